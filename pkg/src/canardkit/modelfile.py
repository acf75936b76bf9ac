"""Line-oriented model files.

::

    name = vdp

    [variables]
    independent = x
    dependent = y
    parameter = c
    epsilon = eps

    [constants]
    eps = 1/10

    [system]
    F = "y - (x^3/3 - x)"
    G = "eps*(c - x)"
    branch = linear
    bracket = 0.5 1.5

    [task]
    k_max = 3

Expressions are double-quoted.  A system is given either by ``F`` and ``G``
(``F * d dep/d indep = G``; the ODE is ``d indep/dt = F``,
``d dep/dt = G``) or by an explicit map ``phi`` with its ``seed``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .errors import ModelFileError, ParseError
from .expr import Const, Expr, substitute
from .parse import parse

SECTIONS = {
    "": {"name"},
    "variables": {"independent", "dependent", "parameter", "epsilon", "slope"},
    "constants": None,
    "system": {"F", "G", "phi", "seed", "branch", "bracket", "fold"},
    "task": {"k_max", "order", "mode", "interval", "amplitude", "guess", "reference", "tol", "transient"},
}
EXPRESSION_KEYS = {"F", "G", "phi", "seed"}
FLOAT_LISTS = {"bracket": 2, "interval": 2, "guess": 2}


@dataclass
class ModelFile:
    name: str
    independent: str
    dependent: str
    parameter: str
    epsilon: str | None = None
    slope: str = "p"
    constants: dict[str, Fraction] = field(default_factory=dict)
    F: str | None = None
    G: str | None = None
    phi: str | None = None
    seed: str | None = None
    branch: str = "linear"
    bracket: tuple[Fraction, Fraction] | None = None
    fold: Fraction | None = None
    task: dict[str, object] = field(default_factory=dict)
    path: str | None = field(default=None, compare=False)
    lines: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    # -- symbols ---------------------------------------------------------

    def symbols(self) -> set[str]:
        out = {self.independent, self.dependent, self.parameter, *self.constants}
        if self.epsilon:
            out.add(self.epsilon)
        return out

    def expr(self, key: str, keep: set[str] = frozenset()) -> Expr:
        """Parse expression ``key`` and substitute constants not in ``keep``."""
        text = getattr(self, key)
        allowed = self.symbols() | ({self.slope} if key == "phi" else set())
        try:
            e = parse(text, allowed)
        except ParseError as exc:
            raise ModelFileError(f"{key}: {exc}", self.lines.get(key), self.path) from None
        return substitute(e, {k: v for k, v in self.constants.items() if k not in keep})

    def error(self, key: str, message: str) -> ModelFileError:
        return ModelFileError(message, self.lines.get(key), self.path)

    # -- builders --------------------------------------------------------

    def iteration_map(self, symbolic_eps: bool = False, bracket=None):
        from .canard import IterationMap, solve_for_dependent, isocline_seed

        keep = {self.epsilon} if (symbolic_eps and self.epsilon) else set()
        br = bracket or self.bracket
        if br is None:
            raise self.error("bracket", "a fold bracket is required for the iteration")
        if self.epsilon and not symbolic_eps and self.epsilon not in self.constants:
            raise self.error("F", f"{self.epsilon} has no value in [constants]")
        if self.F is not None:
            F, G = self.expr("F", keep), self.expr("G", keep)
            phi = solve_for_dependent(F, G, self.dependent, self.branch, self.slope)
            seed = isocline_seed(F, self.dependent, self.branch, self.parameter)
        else:
            phi, seed = self.expr("phi", keep), self.expr("seed", keep)
        return IterationMap(self.independent, self.dependent, self.parameter, phi, seed,
                            (br[0], br[1]), self.slope, self.epsilon if keep else None, None, self.fold)

    def model_spec(self):
        from .ode import ModelSpec

        if self.F is None:
            raise self.error("phi", "numerical integration needs F and G, not an explicit map")
        rhs = (parse(self.F, self.symbols()), parse(self.G, self.symbols()))
        consts = dict(self.constants)
        amp = self.task.get("amplitude", self.dependent)
        guess = self.task.get("guess")
        return ModelSpec((self.independent, self.dependent), rhs, self.parameter, 0.0,
                         {k: Const(v) for k, v in consts.items()}, amp,
                         None if guess is None else tuple(float(g) for g in guess))

    # -- text ------------------------------------------------------------

    def serialize(self) -> str:
        out = [f"name = {self.name}", "", "[variables]",
               f"independent = {self.independent}", f"dependent = {self.dependent}",
               f"parameter = {self.parameter}"]
        if self.epsilon:
            out.append(f"epsilon = {self.epsilon}")
        if self.slope != "p":
            out.append(f"slope = {self.slope}")
        out += ["", "[constants]"]
        out += [f"{k} = {_fmt(v)}" for k, v in self.constants.items()]
        out += ["", "[system]"]
        for key in ("F", "G", "phi", "seed"):
            v = getattr(self, key)
            if v is not None:
                out.append(f'{key} = "{v}"')
        out.append(f"branch = {self.branch}")
        if self.bracket is not None:
            out.append(f"bracket = {_fmt(self.bracket[0])} {_fmt(self.bracket[1])}")
        if self.fold is not None:
            out.append(f"fold = {_fmt(self.fold)}")
        if self.task:
            out += ["", "[task]"]
            for k, v in self.task.items():
                out.append(f"{k} = {' '.join(_fmt(x) for x in v) if isinstance(v, tuple) else _fmt(v)}")
        return "\n".join(out) + "\n"


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def _number(text: str, key: str, line: int, path) -> Fraction:
    try:
        if "/" in text:
            a, b = text.split("/")
            return Fraction(a.strip()) / Fraction(b.strip())
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ModelFileError(f"{key}: {text!r} is not a rational number", line, path) from None


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def loads(text: str, path: str | None = None) -> ModelFile:
    section = ""
    raw: dict[str, dict[str, tuple[str, int]]] = {s: {} for s in SECTIONS}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ModelFileError(f"malformed section header {line!r}", lineno, path)
            section = line[1:-1].strip()
            if section not in SECTIONS or section == "":
                raise ModelFileError(f"unknown section [{section}]", lineno, path)
            continue
        if "=" not in line:
            raise ModelFileError(f"expected 'key = value', got {line!r}", lineno, path)
        key, value = (s.strip() for s in line.split("=", 1))
        allowed = SECTIONS[section]
        if allowed is not None and key not in allowed:
            where = f"[{section}]" if section else "the preamble"
            raise ModelFileError(f"unknown key {key!r} in {where}", lineno, path)
        if key in raw[section]:
            raise ModelFileError(f"duplicate key {key!r}", lineno, path)
        if key in EXPRESSION_KEYS:
            if len(value) < 2 or value[0] != '"' or value[-1] != '"':
                raise ModelFileError(f"{key} must be a double-quoted expression", lineno, path)
            value = value[1:-1]
        raw[section][key] = (value, lineno)

    lines = {k: ln for sec in raw.values() for k, (_, ln) in sec.items()}
    var = raw["variables"]
    for key in ("independent", "dependent", "parameter"):
        if key not in var:
            raise ModelFileError(f"[variables] needs {key!r}", None, path)
    consts = {k: _number(v, k, ln, path) for k, (v, ln) in raw["constants"].items()}
    system = {k: v for k, (v, _) in raw["system"].items()}
    has_fg = "F" in system or "G" in system
    has_phi = "phi" in system or "seed" in system
    if has_fg == has_phi:
        raise ModelFileError("[system] needs exactly one of (F, G) or (phi, seed)", None, path)
    if has_fg and not ("F" in system and "G" in system):
        raise ModelFileError("[system] needs both F and G", None, path)
    if has_phi and not ("phi" in system and "seed" in system):
        raise ModelFileError("[system] needs both phi and seed", None, path)

    def floats(key, text, ln, n):
        parts = text.split()
        if len(parts) != n:
            raise ModelFileError(f"{key} needs {n} numbers", ln, path)
        return tuple(_number(p, key, ln, path) for p in parts)

    bracket = None
    if "bracket" in raw["system"]:
        v, ln = raw["system"]["bracket"]
        bracket = floats("bracket", v, ln, 2)
    fold = None
    if "fold" in raw["system"]:
        v, ln = raw["system"]["fold"]
        fold = _number(v, "fold", ln, path)
    task: dict[str, object] = {}
    for k, (v, ln) in raw["task"].items():
        if k in FLOAT_LISTS:
            task[k] = floats(k, v, ln, FLOAT_LISTS[k])
        elif k in ("k_max", "order"):
            try:
                task[k] = int(v)
            except ValueError:
                raise ModelFileError(f"{k} must be an integer", ln, path) from None
        elif k in ("reference", "tol", "transient"):
            task[k] = _number(v, k, ln, path)
        else:
            task[k] = v
    name = raw[""].get("name", (os.path.splitext(os.path.basename(path or "model"))[0], 0))[0]
    mf = ModelFile(
        name, var["independent"][0], var["dependent"][0], var["parameter"][0],
        var.get("epsilon", (None, 0))[0], var.get("slope", ("p", 0))[0], consts,
        system.get("F"), system.get("G"), system.get("phi"), system.get("seed"),
        system.get("branch", "linear"), bracket, fold, task, path, lines,
    )
    # validate every expression against the declared symbols
    for key in EXPRESSION_KEYS:
        if getattr(mf, key) is not None:
            mf.expr(key)
    return mf


def bundled(name: str) -> str | None:
    base = name if name.endswith(".model") else name + ".model"
    res = resources.files("canardkit").joinpath("models").joinpath(base)
    return str(res) if res.is_file() else None


def load(path: str) -> ModelFile:
    """Read a model file; a bare name falls back to the bundled models."""
    if not os.path.exists(path):
        alt = bundled(os.path.basename(path))
        if alt is None:
            raise ModelFileError(f"no such model file: {path}")
        path = alt
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), path)
