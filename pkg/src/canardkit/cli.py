"""Command-line front end.

Exit codes: 0 success, 2 bad input (model file, expression, arguments),
3 failed computation, 4 computation ran but produced no result.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from fractions import Fraction

from . import __version__
from .canard import existence_bound, fold_point, iterative_asymptotics, run
from .errors import CanardError, ComputationError, InputError, ModelFileError
from .expr import Var, expand, mul, power
from .modelfile import load
from .series import classical_canard_expansion

log = logging.getLogger("canardkit")


def fmt_exact(q: Fraction) -> str:
    """``p/q (decimal)`` for short fractions, the decimal alone otherwise."""
    dec = f"{float(q):.15g}"
    if q.denominator == 1:
        return str(q.numerator)
    if len(str(q.denominator)) <= 12:
        return f"{q.numerator}/{q.denominator} ({dec})"
    return dec


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return fmt_exact(v)
    if isinstance(v, float):
        return f"{v:.15g}"
    return str(v)


def emit(rows: list[dict], fmt: str, out, meta: dict | None = None):
    """Write ``rows`` as an aligned table, RFC 4180 CSV or one JSON document."""
    if fmt == "json":
        doc = dict(meta or {})
        doc["rows"] = rows
        json.dump(doc, out, indent=2, default=_json_default)
        out.write("\n")
        return
    cols = list(rows[0]) if rows else []
    cells = [[_num(r.get(c)) for c in cols] for r in rows]
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\r\n")
        w.writerow(cols)
        w.writerows(cells)
        return
    if meta:
        for k, v in meta.items():
            out.write(f"# {k}: {_num(v) if not isinstance(v, (list, dict)) else json.dumps(v, default=_json_default)}\n")
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
    out.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
    for row in cells:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _json_default(v):
    if isinstance(v, Fraction):
        return {"fraction": f"{v.numerator}/{v.denominator}", "decimal": float(v)}
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return str(v)


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


# ---------------------------------------------------------------------------
# commands


def cmd_iterate(args, out) -> int:
    mf = load(args.model)
    m = mf.iteration_map(bracket=tuple(args.bracket) if args.bracket else None)
    k = args.k or int(mf.task.get("k_max", 3))
    ref = args.reference if args.reference is not None else mf.task.get("reference")
    its = run(m, k, args.mode or str(mf.task.get("mode", "auto")), budget=args.budget,
              reference=None if ref is None else float(ref), panels=args.panels)
    rows = []
    for it in its:
        cert = it.certificate
        rows.append({
            "k": it.k,
            "x_star": it.x_star,
            "c": it.param_value if it.exact else (None if it.param_value is None else float(it.param_value)),
            "c_error": it.param_error if it.resolved else None,
            "deviation_pct": None if it.deviation is None else _clean(100 * it.deviation),
            "certificate": None if cert is None else (cert.residual if cert.kind == "exact" else _clean(cert.ratio)),
            "certified": None if cert is None else (cert.passed if cert.kind == "exact" else cert.blowup),
            "den_degree": it.denominator.degree if hasattr(it.denominator, "degree") else None,
            "size": it.size,
            "flags": ";".join(it.flags),
        })
    emit(rows, args.format, out, {"model": mf.name, "parameter": mf.parameter} if args.format != "csv" else None)
    return 0 if any(it.resolved for it in its) else 4


def cmd_expand(args, out) -> int:
    mf = load(args.model)
    if not mf.epsilon:
        raise ModelFileError("expand needs a perturbation parameter (epsilon) in [variables]", None, mf.path)
    order = args.order if args.order is not None else int(mf.task.get("order", 3))
    m = mf.iteration_map(symbolic_eps=True)
    rows = []
    meta: dict = {"model": mf.name, "method": args.method, "order": order}
    if args.method == "classical":
        if mf.F is None:
            raise ModelFileError("classical expansion needs F and G", None, mf.path)
        F, G = mf.expr("F", {mf.epsilon}), mf.expr("G", {mf.epsilon})
        g = expand(mul(G, power(Var(mf.epsilon), -1)))
        if g.has(mf.epsilon):
            raise ComputationError(f"G must be {mf.epsilon} times a function free of {mf.epsilon}")
        exp = classical_canard_expansion(F, g, fold_point(m), order, mf.independent, mf.dependent,
                                         mf.parameter, mf.epsilon)
        for i, c in enumerate(exp.c):
            rows.append({"iterate": "", "power": i, "coefficient": c})
    else:
        k = args.k or int(mf.task.get("k_max", 3))
        for a in iterative_asymptotics(m, k, order):
            for i, c in enumerate(a.c):
                rows.append({"iterate": a.k, "power": i, "coefficient": c})
        if args.bound:
            b = existence_bound(m)
            meta["existence_bound"] = b.eps
            meta["collision_at"] = [str(x) for x in b.abscissae]
    emit(rows, args.format, out, meta if args.format != "csv" else None)
    return 0


def cmd_explode(args, out) -> int:
    from .ode import amplitude_sweep, explosion_bisect, sweep_csv

    mf = load(args.model)
    spec = mf.model_spec()
    lo, hi = (float(v) for v in (args.interval or mf.task.get("interval") or ()))
    kw = {"rtol": args.rtol, "atol": args.atol}
    if args.sweep:
        sweep_csv(amplitude_sweep(spec, lo, hi, args.sweep, **kw), mf.parameter, out)
        return 0
    res = explosion_bisect(spec, lo, hi, threshold=args.threshold, tol=args.tol, **kw)
    rows = []
    for tag, s in (("low", res.low), ("high", res.high)):
        rows.append({
            "endpoint": tag,
            mf.parameter: lo if tag == "low" else hi,
            "amplitude": 0.0 if s is None else s.amplitude[spec.amplitude_var],
            "period": None if s is None else s.period,
            "converged": None if s is None else s.converged,
        })
    meta = {"model": mf.name, "explosion": res.value, "bracket": list(res.bracket), "threshold": res.threshold,
            "amplitude_var": spec.amplitude_var}
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\r\n")
        w.writerow(["explosion", "bracket_lo", "bracket_hi", "threshold"])
        w.writerow([repr(res.value), repr(res.bracket[0]), repr(res.bracket[1]), repr(res.threshold)])
        return 0
    emit(rows, args.format, out, meta)
    return 0


def cmd_simulate(args, out) -> int:
    from .ode import integrate

    mf = load(args.model)
    spec = mf.model_spec().with_value(args.value)
    y0 = args.initial if args.initial else list(spec.fixed_point() + 1e-3)
    traj = integrate(spec, y0, (0.0, args.t_end), args.rtol, args.atol)
    traj.to_csv(out, samples=args.samples)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="canardkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def fmt(sp):
        sp.add_argument("--format", choices=("table", "csv", "json"), default="table")

    it = sub.add_parser("iterate", help="iterate the map and cancel singularities")
    it.add_argument("model")
    it.add_argument("--k", type=int, help="number of iterations (default from the model file)")
    it.add_argument("--mode", choices=("auto", "exact", "numeric"))
    it.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"))
    it.add_argument("--reference", type=float, help="value to report relative deviations against")
    it.add_argument("--budget", type=int, default=100_000, help="node budget per iterate")
    it.add_argument("--panels", type=int, default=4096, help="sign-scan panels in numeric mode")
    fmt(it)
    it.set_defaults(func=cmd_iterate)

    ex = sub.add_parser("expand", help="exact parameter series in the perturbation parameter")
    ex.add_argument("model")
    ex.add_argument("--order", type=int)
    ex.add_argument("--method", choices=("classical", "iterative"), default="classical")
    ex.add_argument("--k", type=int, help="iterates for --method iterative")
    ex.add_argument("--bound", action="store_true", help="also report the existence bound")
    fmt(ex)
    ex.set_defaults(func=cmd_expand)

    xp = sub.add_parser("explode", help="locate the canard explosion by bisection")
    xp.add_argument("model")
    xp.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"))
    xp.add_argument("--tol", type=float, default=1e-6)
    xp.add_argument("--threshold", type=float)
    xp.add_argument("--sweep", type=int, metavar="N", help="write an N-point amplitude sweep as CSV instead")
    xp.add_argument("--rtol", type=float, default=1e-9)
    xp.add_argument("--atol", type=float, default=1e-12)
    fmt(xp)
    xp.set_defaults(func=cmd_explode)

    sm = sub.add_parser("simulate", help="integrate and write the trajectory as CSV")
    sm.add_argument("model")
    sm.add_argument("--value", type=float, required=True)
    sm.add_argument("--t-end", type=float, default=500.0)
    sm.add_argument("--initial", type=float, nargs=2)
    sm.add_argument("--samples", type=int, default=2001)
    sm.add_argument("--rtol", type=float, default=1e-9)
    sm.add_argument("--atol", type=float, default=1e-12)
    sm.set_defaults(func=cmd_simulate)
    return p


def main(argv=None, out=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except CanardError as exc:
        where = f"{args.model}: " if not isinstance(exc, ModelFileError) else ""
        print(f"error: {where}{exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InputError.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
