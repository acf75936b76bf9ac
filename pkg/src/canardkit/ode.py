"""Numerical side: adaptive Dormand-Prince integration, limit cycles from
Poincare section returns and bisection of the explosion parameter.

The right-hand side is generated from the model expressions and compiled
with numba together with the stepping kernel, so one canard-adjacent run of
several thousand time units takes milliseconds once compiled.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from .errors import (
    ComputationError,
    NonFiniteState,
    NoReturns,
    NotConverged,
    SameClassAtEndpoints,
    StepFloorReached,
)
from .expr import Expr, differentiate, emit_code, lambdify, substitute

log = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau with the free-interpolant coefficients of
# Shampine's dense output (the same constants scipy's RK45 uses).
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1])
_A = np.array([
    [0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
])
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([-71 / 57600, 0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

OK, FULL, FLOOR, NONFINITE = 0, 1, 2, 3


@njit(cache=False)
def _dp45(rhs, t, y, t_end, h, rtol, atol, p, ts, ys, qs, C, A, B, E, P):
    n = y.size
    K = np.empty((7, n))
    ytmp = np.empty(n)
    ynew = np.empty(n)
    y = y.copy()
    rhs(t, y, p, K[0])
    cap = ts.size - 1
    ts[0] = t
    ys[0] = y
    count = 0
    rejected = False
    while t < t_end:
        if count >= cap:
            return FULL, count, t, h
        hmin = 10.0 * (np.nextafter(abs(t), np.inf) - abs(t))
        if h < hmin:
            return FLOOR, count, t, h
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        for s in range(1, 6):
            for i in range(n):
                acc = 0.0
                for j in range(s):
                    acc += A[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            rhs(t + C[s] * h, ytmp, p, K[s])
        for i in range(n):
            acc = 0.0
            for j in range(6):
                acc += B[j] * K[j, i]
            ynew[i] = y[i] + h * acc
        rhs(t + h, ynew, p, K[6])
        err = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(7):
                acc += E[j] * K[j, i]
            sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
            err += (h * acc / sc) ** 2
        err = math.sqrt(err / n)
        if not math.isfinite(err):
            h *= 0.2
            rejected = True
            continue
        if err < 1.0:
            factor = 10.0 if err == 0.0 else min(10.0, 0.9 * err ** -0.2)
            if rejected:
                factor = min(1.0, factor)
            for i in range(n):
                for k in range(4):
                    acc = 0.0
                    for j in range(7):
                        acc += K[j, i] * P[j, k]
                    qs[count, i, k] = acc
            t = t_end if last else t + h
            for i in range(n):
                y[i] = ynew[i]
                K[0, i] = K[6, i]
                if not math.isfinite(y[i]):
                    return NONFINITE, count, t, h
            count += 1
            ts[count] = t
            ys[count] = y
            h *= factor
            rejected = False
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            rejected = True
    return OK, count, t, h


_RHS_CACHE: dict[str, object] = {}


def compile_rhs(exprs: Sequence[Expr], states: Sequence[str], params: Sequence[str] = ()):
    """numba function ``rhs(t, s, p, out)`` evaluating ``exprs`` at state
    vector ``s`` and parameter vector ``p``."""
    env = {name: f"s[{i}]" for i, name in enumerate(states)}
    env.update({name: f"p[{i}]" for i, name in enumerate(params)})
    env.setdefault("t", "t")
    lines, outs = emit_code(exprs, env)
    body = lines + [f"out[{i}] = {o}" for i, o in enumerate(outs)]
    src = "def rhs(t, s, p, out):\n" + "".join(f"    {ln}\n" for ln in body)
    fn = _RHS_CACHE.get(src)
    if fn is None:
        ns = {"sqrt": math.sqrt}
        exec(compile(src, "<rhs>", "exec"), ns)
        fn = njit(cache=False)(ns["rhs"])
        _RHS_CACHE[src] = fn
    return fn


# ---------------------------------------------------------------------------
# models


@dataclass
class ModelSpec:
    """Planar system ``d states / dt = rhs`` with one free parameter."""

    states: tuple[str, str]
    rhs: tuple[Expr, Expr]
    param: str
    value: float = 0.0
    constants: dict[str, Fraction] = field(default_factory=dict)
    amplitude_var: str | None = None
    guess: tuple[float, float] | None = None

    def __post_init__(self):
        allowed = set(self.states) | {self.param} | set(self.constants)
        for e in self.rhs:
            extra = e.free_symbols - allowed
            if extra:
                raise ComputationError(f"right-hand side references unknown symbols {sorted(extra)}")
        if self.amplitude_var is None:
            self.amplitude_var = self.states[1]
        if self.amplitude_var not in self.states:
            raise ComputationError(f"amplitude variable {self.amplitude_var!r} is not a state")

    def with_value(self, value: float) -> "ModelSpec":
        return ModelSpec(self.states, self.rhs, self.param, value, self.constants, self.amplitude_var, self.guess)

    def reduced(self) -> tuple[Expr, Expr]:
        """Right-hand sides with constants substituted."""
        return tuple(substitute(e, self.constants) for e in self.rhs)

    def compiled(self):
        return compile_rhs(self.reduced(), self.states, (self.param,))

    def params(self) -> np.ndarray:
        return np.array([float(self.value)])

    def fixed_point(self, guess=None, tol: float = 1e-13, maxiter: int = 100) -> np.ndarray:
        """Equilibrium by damped Newton iteration with the exact Jacobian."""
        f = self.reduced()
        names = list(self.states) + [self.param]
        fs = [lambdify(e, names) for e in f]
        jac = [[lambdify(differentiate(e, v), names) for v in self.states] for e in f]
        z = np.array(guess if guess is not None else (self.guess or (1.0, 1.0)), dtype=float)
        for _ in range(maxiter):
            args = (*z, self.value)
            r = np.array([g(*args) for g in fs])
            J = np.array([[g(*args) for g in row] for row in jac])
            dz = np.linalg.solve(J, -r)
            lam = 1.0
            while lam > 1e-6:
                zn = z + lam * dz
                try:
                    rn = np.array([g(*zn, self.value) for g in fs])
                except (ZeroDivisionError, ValueError):
                    rn = np.array([np.inf])
                if np.all(np.isfinite(rn)) and np.linalg.norm(rn) < (1 - 1e-4 * lam) * np.linalg.norm(r) + 1e-300:
                    break
                lam /= 2
            z = zn
            if np.linalg.norm(lam * dz) <= tol * (1 + np.linalg.norm(z)):
                return z
        raise ComputationError(f"no equilibrium found near {guess} for {self.param} = {self.value}")


# ---------------------------------------------------------------------------
# integration


@dataclass
class Trajectory:
    """Accepted steps ``t[i] -> t[i+1]`` with states ``y`` and dense-output
    coefficients ``q`` (``y(t[i] + th*h) = y[i] + h * sum_k q[i,:,k] th^(k+1)``)."""

    t: np.ndarray
    y: np.ndarray
    q: np.ndarray
    names: tuple[str, ...] = ()

    def __call__(self, when) -> np.ndarray:
        when = np.atleast_1d(np.asarray(when, dtype=float))
        idx = np.clip(np.searchsorted(self.t, when, side="right") - 1, 0, len(self.t) - 2)
        return self.interpolate(idx, (when - self.t[idx]) / (self.t[idx + 1] - self.t[idx]))

    def interpolate(self, idx, theta) -> np.ndarray:
        idx = np.asarray(idx)
        theta = np.asarray(theta, dtype=float)
        h = (self.t[idx + 1] - self.t[idx])[..., None]
        powers = np.stack([theta ** (k + 1) for k in range(4)], axis=-1)
        return self.y[idx] + h * np.einsum("...ik,...k->...i", self.q[idx], powers)

    @property
    def final(self) -> np.ndarray:
        return self.y[-1]

    def to_csv(self, fp=None, samples: int | None = None) -> str:
        """``t`` plus one column per state; step points or ``samples``
        evenly spaced dense-output points."""
        if samples:
            ts = np.linspace(self.t[0], self.t[-1], samples)
            ys = self(ts)
        else:
            ts, ys = self.t, self.y
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["t", *self.names])
        for ti, yi in zip(ts, ys):
            w.writerow([repr(float(ti)), *(repr(float(v)) for v in yi)])
        text = buf.getvalue()
        if fp is not None:
            fp.write(text)
        return text


def _initial_step(rhs, t0, y0, p, rtol, atol) -> float:
    f0 = np.empty_like(y0)
    rhs(t0, y0, p, f0)
    scale = atol + np.abs(y0) * rtol
    d0, d1 = np.sqrt(np.mean((y0 / scale) ** 2)), np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = np.empty_like(y0)
    rhs(t0 + h0, y0 + h0 * f0, p, f1)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


class Integrator:
    """Resumable integration; ``advance`` returns the next piece."""

    def __init__(self, model: ModelSpec, y0, t0: float = 0.0, rtol: float = 1e-9, atol: float = 1e-12,
                 chunk: int = 1 << 15):
        if rtol <= 0 or atol <= 0:
            raise ValueError("tolerances must be positive")
        self.model = model
        self.rhs = model.compiled()
        self.p = model.params()
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.rtol, self.atol = rtol, atol
        self.h = _initial_step(self.rhs, self.t, self.y, self.p, rtol, atol)
        self.chunk = chunk

    def advance(self, t_end: float) -> Trajectory:
        n = self.y.size
        pieces = []
        while True:
            ts = np.empty(self.chunk + 1)
            ys = np.empty((self.chunk + 1, n))
            qs = np.empty((self.chunk, n, 4))
            status, count, t, h = _dp45(self.rhs, self.t, self.y, float(t_end), self.h, self.rtol, self.atol,
                                        self.p, ts, ys, qs, _C, _A, _B, _E, _P)
            pieces.append((ts[: count + 1], ys[: count + 1], qs[:count]))
            self.t, self.h = t, h
            self.y = ys[count].copy()
            if status == FLOOR:
                raise StepFloorReached(f"step size collapsed at t = {t:.6g} (state {self.y})")
            if status == NONFINITE:
                raise NonFiniteState(f"state became non-finite at t = {t:.6g}")
            if status == OK:
                break
        t = np.concatenate([pieces[0][0]] + [pc[0][1:] for pc in pieces[1:]])
        y = np.concatenate([pieces[0][1]] + [pc[1][1:] for pc in pieces[1:]])
        q = np.concatenate([pc[2] for pc in pieces])
        return Trajectory(t, y, q, tuple(self.model.states))


def integrate(model: ModelSpec, y0, t_span, rtol: float = 1e-9, atol: float = 1e-12) -> Trajectory:
    t0, t1 = t_span
    return Integrator(model, y0, t0, rtol, atol).advance(t1)


# ---------------------------------------------------------------------------
# limit cycles


@dataclass
class CycleStats:
    amplitude: dict[str, float]
    period: float
    converged: bool
    crossings: int
    parameter: float = math.nan
    return_state: np.ndarray | None = None
    loop_min: dict[str, float] = field(default_factory=dict)
    loop_max: dict[str, float] = field(default_factory=dict)

    def of(self, name: str) -> float:
        return self.amplitude[name]


@dataclass
class Section:
    """Hyperplane ``state[index] = level`` crossed with the given sign."""

    index: int
    level: float
    direction: int = 1


def _crossings(traj: Trajectory, sec: Section) -> list[tuple[float, np.ndarray]]:
    g = traj.y[:, sec.index] - sec.level
    if sec.direction > 0:
        hits = np.nonzero((g[:-1] < 0) & (g[1:] >= 0))[0]
    else:
        hits = np.nonzero((g[:-1] > 0) & (g[1:] <= 0))[0]
    out = []
    for i in hits:
        lo, hi = 0.0, 1.0
        glo = g[i]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            gm = traj.interpolate(i, mid)[sec.index] - sec.level
            if (gm < 0) == (glo < 0):
                lo = mid
            else:
                hi = mid
        th = 0.5 * (lo + hi)
        out.append((traj.t[i] + th * (traj.t[i + 1] - traj.t[i]), traj.interpolate(i, th)))
    return out


def _loop_extrema(traj: Trajectory, t_a: float, t_b: float, samples: int = 8):
    idx = np.nonzero((traj.t[:-1] < t_b) & (traj.t[1:] > t_a))[0]
    theta = np.linspace(0.0, 1.0, samples + 1)
    pts = traj.interpolate(idx[:, None], theta[None, :]).reshape(-1, traj.y.shape[1])
    tt = (traj.t[idx][:, None] + theta[None, :] * (traj.t[idx + 1] - traj.t[idx])[:, None]).ravel()
    keep = (tt >= t_a) & (tt <= t_b)
    pts = pts[keep]
    return pts.min(axis=0), pts.max(axis=0)


def default_section(model: ModelSpec, fixed_point=None) -> Section:
    fp = model.fixed_point() if fixed_point is None else fixed_point
    return Section(0, float(fp[0]), 1)


def find_limit_cycle(model: ModelSpec, value: float | None = None, seed=None, transient: float | None = None,
                     section: Section | None = None, rtol: float = 1e-9, atol: float = 1e-12,
                     match: float = 1e-6, max_returns: int = 400, probe: float | None = None,
                     transient_cap: float = 5000.0, amplitude_floor: float = 1e-7,
                     strict: bool = True) -> CycleStats:
    """Integrate past a transient and follow section returns until two
    consecutive pairs agree to ``match`` (relative).

    ``probe`` is the time allowed for the first two returns (default: the
    transient cap).  Raises :class:`NoReturns` when the orbit settles on an
    equilibrium and :class:`NotConverged` (``strict``) when returns keep
    moving after ``max_returns``.
    """
    if value is not None:
        model = model.with_value(value)
    fp = model.fixed_point()
    sec = section or default_section(model, fp)
    if seed is None:
        seed = fp.copy()
        seed[1 - sec.index] += 1e-3 * max(1.0, abs(fp[1 - sec.index]))
        seed[sec.index] += 1e-3 * max(1e-2, abs(fp[sec.index]))
    integ = Integrator(model, seed, 0.0, rtol, atol)
    probe = transient_cap if probe is None else probe

    def settled(traj):
        d = np.linalg.norm(traj.y[-1] - fp)
        return d <= amplitude_floor * (1 + np.linalg.norm(fp))

    # estimate the return time from the first crossings
    traj = integ.advance(probe)
    hits = _crossings(traj, sec)
    if len(hits) < 3:
        raise NoReturns(f"no recurrent section crossings for {model.param} = {model.value}",
                        fixed_point=fp, parameter=model.value)
    tau = hits[-1][0] - hits[-2][0]
    if transient is None:
        transient = min(10 * tau, transient_cap)
    if integ.t < transient:
        integ.advance(transient)
    diffs: list[float] = []
    window = max(2.0 * tau, 1.0)
    buffer: list[Trajectory] = []
    returns: list[tuple[float, np.ndarray]] = []
    for _ in range(max_returns * 4):
        piece = integ.advance(integ.t + window)
        buffer.append(piece)
        new = _crossings(piece, sec)
        if not new and settled(piece):
            raise NoReturns(f"orbit settles on the equilibrium for {model.param} = {model.value}",
                            fixed_point=fp, parameter=model.value)
        for tc, sc in new:
            if returns:
                prev = returns[-1][1]
                diffs.append(np.linalg.norm(sc - prev) / max(np.linalg.norm(sc), 1e-300))
            returns.append((tc, sc))
        if len(returns) >= 2:
            lo, hi = _loop_extrema(_join(buffer), returns[-2][0], returns[-1][0])
            if np.max(hi - lo) < amplitude_floor * (1 + np.linalg.norm(fp)):
                raise NoReturns(f"cycle amplitude decays to zero for {model.param} = {model.value}",
                                fixed_point=fp, parameter=model.value)
        converged = len(diffs) >= 2 and diffs[-1] <= match and diffs[-2] <= match
        if converged or len(returns) > max_returns:
            break
        buffer = buffer[-3:]
    if len(returns) < 2:
        raise NoReturns(f"section crossings stopped for {model.param} = {model.value}",
                        fixed_point=fp, parameter=model.value)
    traj = _join(buffer)
    (ta, _), (tb, sb) = returns[-2], returns[-1]
    lo, hi = _loop_extrema(traj, ta, tb)
    stats = CycleStats(
        {n: float(hi[i] - lo[i]) for i, n in enumerate(model.states)}, float(tb - ta), converged, len(returns),
        float(model.value), sb, {n: float(lo[i]) for i, n in enumerate(model.states)},
        {n: float(hi[i]) for i, n in enumerate(model.states)},
    )
    if not converged and strict:
        raise NotConverged(f"returns did not settle within {max_returns} loops", stats=stats,
                           parameter=model.value)
    return stats


def _join(pieces: Sequence[Trajectory]) -> Trajectory:
    if len(pieces) == 1:
        return pieces[0]
    t = np.concatenate([pieces[0].t] + [p.t[1:] for p in pieces[1:]])
    y = np.concatenate([pieces[0].y] + [p.y[1:] for p in pieces[1:]])
    q = np.concatenate([p.q for p in pieces])
    return Trajectory(t, y, q, pieces[0].names)


def cycle_amplitude(model: ModelSpec, value: float, **kw) -> tuple[float, CycleStats | None]:
    """Amplitude of the attracting cycle in ``model.amplitude_var``; zero
    when the orbit settles on an equilibrium.  Unconverged runs report their
    last loop."""
    try:
        stats = find_limit_cycle(model, value, strict=False, **kw)
    except NoReturns:
        return 0.0, None
    return stats.amplitude[model.amplitude_var], stats


@dataclass
class Explosion:
    value: float
    bracket: tuple[float, float]
    threshold: float
    low: CycleStats | None
    high: CycleStats | None
    amplitudes: dict[float, float] = field(default_factory=dict)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.bracket[1] - self.bracket[0])


def explosion_bisect(model: ModelSpec, lo: float, hi: float, threshold: float | None = None,
                     tol: float = 1e-6, floor: float = 0.1, distinct: float = 2.0, **kw) -> Explosion:
    """Bisect the parameter on ``amplitude(p) > threshold``.

    The default threshold is the geometric mean of the endpoint amplitudes
    with the smaller one floored at ``floor`` times the larger.  Endpoint
    amplitudes within a factor ``distinct`` count as the same class.  Near a Hopf
    endpoint the small cycles shrink to nothing, and an unfloored mean would
    land on the Hopf-born branch instead of across the jump.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    amps: dict[float, float] = {}
    a_lo, s_lo = cycle_amplitude(model, lo, **kw)
    a_hi, s_hi = cycle_amplitude(model, hi, **kw)
    amps[lo], amps[hi] = a_lo, a_hi
    if threshold is None:
        small, big = sorted((a_lo, a_hi))
        if big == 0.0 or distinct * small >= big:
            raise SameClassAtEndpoints(
                f"amplitudes {a_lo:.6g} and {a_hi:.6g} are within a factor {distinct:g} of each other")
        threshold = math.sqrt(max(small, floor * big) * big)
    big_lo, big_hi = a_lo > threshold, a_hi > threshold
    if big_lo == big_hi:
        raise SameClassAtEndpoints(
            f"amplitudes {a_lo:.6g} and {a_hi:.6g} fall on the same side of {threshold:.6g}")
    a, b = lo, hi
    while b - a > tol:
        m = 0.5 * (a + b)
        am, _ = cycle_amplitude(model, m, **kw)
        amps[m] = am
        log.debug("%s = %.10f amplitude %.6g", model.param, m, am)
        if (am > threshold) == big_lo:
            a = m
        else:
            b = m
    return Explosion(0.5 * (a + b), (a, b), threshold, s_lo, s_hi, amps)


def amplitude_sweep(model: ModelSpec, lo: float, hi: float, n: int, **kw) -> list[tuple[float, float, float]]:
    """``(value, amplitude, period)`` at ``n`` evenly spaced parameters;
    period is nan where the orbit settles on an equilibrium."""
    out = []
    for v in np.linspace(lo, hi, n):
        amp, stats = cycle_amplitude(model, float(v), **kw)
        out.append((float(v), float(amp), float(stats.period) if stats else math.nan))
    return out


def sweep_csv(rows, param: str, fp=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow([param, "amplitude", "period"])
    for v, a, p in rows:
        w.writerow([repr(float(v)), repr(float(a)), repr(float(p))])
    text = buf.getvalue()
    if fp is not None:
        fp.write(text)
    return text
