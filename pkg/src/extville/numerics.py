"""Special functions, root bracketing and log-domain values on [0, inf].

Everything downstream (process evaluators, critical constants, interval
construction) goes through this module, so the functions here are pure and
deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "BracketError",
    "NonConvergenceError",
    "ExtendedValue",
    "RootResult",
    "erf",
    "erfc",
    "bisect",
    "lambert_w_minus1",
    "log_v",
    "v_function",
    "v_inverse",
    "log_min",
    "v_inverse_array",
]

ROOT_TOL = 1e-12
ROUNDTRIP_RTOL = 1e-10
# halvings needed to walk from the widest double bracket down to subnormal spacing
MAX_BISECT_ITER = 2100


class DomainError(ValueError):
    """Argument outside the mathematical domain of the function."""


class BracketError(ValueError):
    """Bisection bracket does not straddle a sign change."""


class NonConvergenceError(RuntimeError):
    """Root search exhausted its iteration budget."""


@total_ordering
@dataclass(frozen=True)
class ExtendedValue:
    """A number in [0, inf] stored as its natural logarithm.

    ``log_value == -inf`` is exactly zero and ``log_value == +inf`` is exactly
    infinity.  Products follow measure-theoretic conventions, in particular
    ``0 * inf == 0``.
    """

    log_value: float

    def __post_init__(self):
        lv = float(self.log_value)
        if math.isnan(lv):
            raise DomainError("ExtendedValue cannot hold NaN")
        object.__setattr__(self, "log_value", lv)

    @classmethod
    def from_float(cls, x: float) -> "ExtendedValue":
        if x < 0 or math.isnan(x):
            raise DomainError(f"ExtendedValue requires x >= 0, got {x}")
        if x == 0:
            return cls(-math.inf)
        return cls(math.log(x))

    @classmethod
    def zero(cls) -> "ExtendedValue":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "ExtendedValue":
        return cls(0.0)

    @classmethod
    def infinity(cls) -> "ExtendedValue":
        return cls(math.inf)

    @property
    def is_zero(self) -> bool:
        return self.log_value == -math.inf

    @property
    def is_infinite(self) -> bool:
        return self.log_value == math.inf

    def to_float(self) -> float:
        """Plain float; saturates to inf above the double range."""
        if self.log_value > 709.78:
            return math.inf
        return math.exp(self.log_value)

    __float__ = to_float

    def __mul__(self, other: "ExtendedValue | float") -> "ExtendedValue":
        other = _coerce(other)
        if self.is_zero or other.is_zero:
            return ExtendedValue.zero()
        return ExtendedValue(self.log_value + other.log_value)

    __rmul__ = __mul__

    def __truediv__(self, other: "ExtendedValue | float") -> "ExtendedValue":
        other = _coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("division by zero in [0, inf]")
        if other.is_infinite:
            if self.is_infinite:
                raise DomainError("inf / inf is undefined")
            return ExtendedValue.zero()
        return ExtendedValue(self.log_value - other.log_value)

    def __add__(self, other: "ExtendedValue | float") -> "ExtendedValue":
        other = _coerce(other)
        return ExtendedValue(float(np.logaddexp(self.log_value, other.log_value)))

    __radd__ = __add__

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, float)):
            other = ExtendedValue.from_float(other)
        if not isinstance(other, ExtendedValue):
            return NotImplemented
        return self.log_value == other.log_value

    def __lt__(self, other) -> bool:
        other = _coerce(other)
        return self.log_value < other.log_value

    def __hash__(self) -> int:
        return hash(self.log_value)

    def minimum(self, cap: "ExtendedValue | float") -> "ExtendedValue":
        cap = _coerce(cap)
        return self if self.log_value <= cap.log_value else cap

    def __repr__(self) -> str:
        return f"ExtendedValue(log_value={self.log_value!r})"


def _coerce(x) -> ExtendedValue:
    if isinstance(x, ExtendedValue):
        return x
    return ExtendedValue.from_float(float(x))


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int
    bracket: tuple[float, float]


def erf(x):
    """Error function; scalar input uses the C library, arrays use scipy."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return special.erf(x)


def erfc(x):
    if np.ndim(x) == 0:
        return math.erfc(float(x))
    return special.erfc(x)


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = ROOT_TOL,
    xtol: float = 0.0,
) -> RootResult:
    """Find a root of a monotone ``f`` on ``[lo, hi]`` by bisection.

    Iterates until the bracket is narrower than ``xtol`` (by default until it
    collapses to adjacent doubles) and then returns the best endpoint.  The
    returned residual is ``|f(root)|``, which must not exceed ``tol``.
    """
    lo, hi = float(lo), float(hi)
    if not lo < hi:
        raise BracketError(f"need lo < hi, got [{lo}, {hi}]")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return RootResult(lo, 0.0, 0, (lo, hi))
    if fhi == 0:
        return RootResult(hi, 0.0, 0, (lo, hi))
    if np.sign(flo) == np.sign(fhi):
        raise BracketError(f"f has the same sign at both ends: f({lo})={flo}, f({hi})={fhi}")
    bracket = (lo, hi)
    it = 0
    while it < MAX_BISECT_ITER:
        if hi - lo <= xtol:
            break
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        it += 1
        fmid = f(mid)
        if fmid == 0:
            return RootResult(mid, 0.0, it, bracket)
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    else:
        raise NonConvergenceError(f"bisection did not converge in {MAX_BISECT_ITER} iterations")
    root, res = (lo, abs(flo)) if abs(flo) <= abs(fhi) else (hi, abs(fhi))
    if res > tol:
        raise NonConvergenceError(f"residual {res:.3e} exceeds tolerance {tol:.1e} at x={root!r}")
    return RootResult(root, res, it, bracket)


def lambert_w_minus1(y: float) -> float:
    """Lower real branch of the Lambert W function, ``W_{-1}(y) <= -1``.

    Solves ``x + log(-x) = log(-y)`` on ``x <= -1``, where the left side is
    increasing, so the log-scale residual is the relative error of
    ``x * exp(x)``.
    """
    y = float(y)
    if not (-math.exp(-1.0) <= y < 0.0):
        # allow the branch point to be hit through rounding of -1/e
        if not math.isclose(y, -math.exp(-1.0), rel_tol=1e-15, abs_tol=0.0):
            raise DomainError(f"W_-1 is defined on [-1/e, 0), got {y}")
    target = math.log(-y)
    if target >= -1.0:
        return -1.0
    t = -target
    lo = -(2.0 * t + 2.0)

    def g(x: float) -> float:
        return x + math.log(-x) - target

    return bisect(g, lo, -1.0, tol=1e-13).root


def log_v(x):
    """Natural log of ``V(x) = exp(x^2/2) * (1 + erf(x/sqrt(2)))``.

    Uses ``V(x) = erfcx(-x/sqrt(2))`` on the negative half-line, which keeps
    the value strictly positive far into the left tail.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    neg = x < 0
    out[neg] = np.log(special.erfcx(-x[neg] / math.sqrt(2.0)))
    pos = ~neg
    out[pos] = 0.5 * x[pos] ** 2 + np.log1p(special.erf(x[pos] / math.sqrt(2.0)))
    return out if out.ndim else float(out)


def v_function(x: float) -> ExtendedValue:
    return ExtendedValue(log_v(float(x)))


def v_inverse(y: "ExtendedValue | float", tol: float = ROUNDTRIP_RTOL) -> float:
    """Inverse of the increasing function ``V``, solved in log-domain."""
    y = _coerce(y)
    if y.is_zero or y.is_infinite:
        raise DomainError("V^-1 needs a finite positive argument")
    target = y.log_value
    lo = -1.0
    while log_v(lo) > target:
        lo *= 2.0
        if lo < -1e12:
            raise DomainError(f"value {y.to_float()} is below V on the admissible bracket")
    hi = 1.0
    while log_v(hi) < target:
        hi *= 2.0
    scale = max(1.0, abs(target))
    res = bisect(lambda x: log_v(x) - target, lo, hi, tol=tol * scale)
    return res.root


def log_min(log_a, log_b):
    """Log of ``min(a, b)`` for values given in log-domain (inf-safe)."""
    return np.minimum(log_a, log_b)


def v_inverse_array(log_y, iterations: int = 200) -> np.ndarray:
    """Vectorised ``V^{-1}`` for log-arguments ``log_y`` (fixed-count bisection).

    Meant for bulk evaluation (e.g. a CS boundary over every ``n`` of a long
    horizon); :func:`v_inverse` is the checked scalar route.
    """
    log_y = np.asarray(log_y, dtype=float)
    lo = np.full(log_y.shape, -1.0)
    while np.any(log_v(lo) > log_y):
        lo = np.where(log_v(lo) > log_y, 2.0 * lo, lo)
        if np.any(lo < -1e12):
            raise DomainError("value below V on the admissible bracket")
    hi = np.ones(log_y.shape)
    while np.any(log_v(hi) < log_y):
        hi = np.where(log_v(hi) < log_y, 2.0 * hi, hi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        below = log_v(mid) < log_y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)
