"""Canard points of planar ODEs by functional iteration with singularity
cancellation, checked against exact series expansions and numerical
detection of the canard explosion."""

from .canard import (
    CanardIterate,
    IterationMap,
    existence_bound,
    isocline_seed,
    iterative_asymptotics,
    run,
    solve_for_dependent,
    step,
)
from .errors import CanardError
from .expr import differentiate, eval_exact, eval_numeric, quotient_normal_form, substitute
from .parse import parse
from .poly import Poly, RatFunc, deflate_root, discriminant_vanishes, poly_gcd, real_roots, to_ratfunc
from .series import ParamSeries, classical_canard_expansion, resolve_linear_unknown

__all__ = [
    "CanardError", "CanardIterate", "IterationMap", "ParamSeries", "Poly", "RatFunc",
    "classical_canard_expansion", "deflate_root", "differentiate", "discriminant_vanishes",
    "eval_exact", "eval_numeric", "existence_bound", "isocline_seed", "iterative_asymptotics",
    "parse", "poly_gcd", "quotient_normal_form", "real_roots", "resolve_linear_unknown", "run",
    "solve_for_dependent", "step", "substitute", "to_ratfunc",
]

__version__ = "0.1.0"
