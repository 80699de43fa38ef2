"""Anytime-valid inference from extended nonnegative supermartingales."""
from .numerics import DomainError, ExtendedValue, lambert_w_minus1, v_function, v_inverse
from .processes import PrefixPair, ProcessSpec, StreamStats
from .thresholds import solve_a_alpha, solve_b_alpha, solve_c_alpha
from .cs_builder import CsInterval, build_cs

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "ExtendedValue",
    "lambert_w_minus1",
    "v_function",
    "v_inverse",
    "PrefixPair",
    "ProcessSpec",
    "StreamStats",
    "solve_a_alpha",
    "solve_b_alpha",
    "solve_c_alpha",
    "CsInterval",
    "build_cs",
]
