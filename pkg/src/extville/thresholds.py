"""Crossing-probability bounds and the critical constants behind the flat CSs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .numerics import DomainError, ExtendedValue, bisect, erfc, lambert_w_minus1

__all__ = [
    "AlphaSolution",
    "XbBound",
    "EQUATION_IDS",
    "classical_ville_level",
    "xb_flat_gaussian",
    "f_gaussian_flat",
    "g_subgaussian_flat",
    "h_one_sided",
    "solve_a_alpha",
    "solve_b_alpha",
    "solve_c_alpha",
    "solve_constant",
    "optimal_c_squared",
    "xb_empirical",
]

SOLVER_TOL = 1e-10
_EDGE = 1e-12

EQUATION_IDS = {
    "a": "f_gaussian_flat",
    "b": "g_subgaussian_flat",
    "c": "h_one_sided",
}

# constants from the one-sided tail split, V(x) >= 4 => V(x) > 1.79 exp(x^2/2)
ONE_SIDED_RATIO = 1.79


@dataclass(frozen=True)
class AlphaSolution:
    alpha: float
    constant: float
    kind: str
    residual: float
    equation_id: str


@dataclass(frozen=True)
class XbBound:
    """``C^{-1} E[M ^ C]`` split as tail probability plus truncated mean over C."""

    level: float
    bound: float
    tail_prob: float
    truncated_mean_over_C: float

    @property
    def decomposition(self) -> tuple[float, float]:
        return (self.tail_prob, self.truncated_mean_over_C)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def classical_ville_level(alpha: float, initial_mean: float) -> float:
    _check_alpha(alpha)
    if not initial_mean > 0:
        raise DomainError("initial mean must be positive")
    return initial_mean / alpha


def xb_flat_gaussian(x_over_D: float) -> XbBound:
    """Extended-Ville level of the flat mixture started from ``n = 1`` under N(mu0, 1).

    ``K_1 / D`` is distributed as ``exp(Z^2/2)``, so
    ``Pr[K_1 >= x] = erfc(sqrt(log(x/D)))`` and
    ``E[K_1; K_1 < x] = 2 D sqrt(log(x/D) / pi)``.
    """
    if not x_over_D > 1.0:
        raise DomainError("level must exceed the thickness D")
    L = math.log(x_over_D)
    tail = erfc(math.sqrt(L))
    trunc = 2.0 * math.sqrt(L / math.pi) / x_over_D
    return XbBound(level=x_over_D, bound=tail + trunc, tail_prob=tail, truncated_mean_over_C=trunc)


def f_gaussian_flat(a):
    """``1 - erf(sqrt(log 1/a)) + 2 a sqrt(log(1/a)/pi)``, increasing on (0, 1]."""
    L = math.log(1.0 / a)
    return erfc(math.sqrt(L)) + 2.0 * a * math.sqrt(L / math.pi)


def g_subgaussian_flat(b):
    """``3 b + 2 b log(1/b)``; ``g(1) = 3``."""
    return 3.0 * b + 2.0 * b * math.log(1.0 / b)


def h_one_sided(c):
    """``3 c + 2 c log(2 / (1.79 c))``, used on (0, 1/2)."""
    return 3.0 * c + 2.0 * c * math.log(2.0 / (ONE_SIDED_RATIO * c))


_EQUATIONS = {
    "a": (f_gaussian_flat, (_EDGE, 1.0 - _EDGE)),
    "b": (g_subgaussian_flat, (_EDGE, 1.0 - _EDGE)),
    "c": (h_one_sided, (_EDGE, 0.5 - _EDGE)),
}


def solve_constant(kind: str, alpha: float) -> AlphaSolution:
    _check_alpha(alpha)
    try:
        fn, (lo, hi) = _EQUATIONS[kind]
    except KeyError:
        raise DomainError(f"unknown constant kind {kind!r}") from None
    if alpha <= fn(lo):
        raise DomainError(f"alpha={alpha} lies below the solver bracket for {kind!r}")
    if alpha >= fn(hi):
        # f(1) = 1: alpha this close to 1 maps onto the right edge
        hi_val = fn(hi)
        return AlphaSolution(alpha, hi, kind, abs(hi_val - alpha), EQUATION_IDS[kind])
    res = bisect(lambda t: fn(t) - alpha, lo, hi, tol=SOLVER_TOL)
    return AlphaSolution(alpha, res.root, kind, res.residual, EQUATION_IDS[kind])


def solve_a_alpha(alpha: float) -> AlphaSolution:
    return solve_constant("a", alpha)


def solve_b_alpha(alpha: float) -> AlphaSolution:
    return solve_constant("b", alpha)


def solve_c_alpha(alpha: float) -> AlphaSolution:
    return solve_constant("c", alpha)


def optimal_c_squared(n: int, alpha: float) -> float:
    """Prior precision minimising the Gaussian-mixture CS radius at time ``n``."""
    _check_alpha(alpha)
    if n < 1:
        raise DomainError("n must be at least 1")
    w = lambert_w_minus1(-alpha * alpha / math.e)
    return n / (-w - 1.0)


def xb_empirical(sample: Iterable, C: float) -> XbBound:
    """Plug-in ``C^{-1} mean(min(M_i, C))`` from a sample of ``M_m``.

    Accepts :class:`ExtendedValue` items or plain floats (``inf`` allowed).
    """
    if not C > 0:
        raise DomainError("C must be positive")
    logs = np.array(
        [v.log_value if isinstance(v, ExtendedValue) else _log_or_inf(v) for v in sample],
        dtype=float,
    )
    if logs.size == 0:
        raise DomainError("empty sample")
    return xb_from_logs(logs, C)


def xb_from_logs(logs: np.ndarray, C: float) -> XbBound:
    logC = math.log(C)
    hit = logs >= logC
    tail = float(hit.mean())
    below = np.where(hit, -np.inf, logs)
    trunc = float(np.exp(below - logC).mean())
    return XbBound(level=C, bound=tail + trunc, tail_prob=tail, truncated_mean_over_C=trunc)


def _log_or_inf(v):
    v = float(v)
    if v < 0:
        raise DomainError("sample values must be nonnegative")
    return -math.inf if v == 0 else math.log(v)
