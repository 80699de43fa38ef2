"""Confidence sequences for a Gaussian / 1-subGaussian mean.

Each constructor returns the interval at the current sample size.  The same
boundaries are available in vectorised form through :func:`cs_bounds`, which
the Monte-Carlo lab uses to sweep whole paths at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import DomainError, v_inverse, v_inverse_array
from .processes import PrefixPair, StreamStats
from .thresholds import solve_a_alpha, solve_b_alpha, solve_c_alpha

__all__ = [
    "CsInterval",
    "METHOD_IDS",
    "cs_gaussian_mixture",
    "cs_flat_gaussian",
    "cs_flat_subgaussian",
    "cs_shifted",
    "cs_conditioned",
    "cs_division",
    "cs_one_sided",
    "asymptotic_radius",
    "cs_bounds",
    "build_cs",
]

METHOD_IDS = (
    "cs_gaussian_mixture",
    "cs_flat_gaussian",
    "cs_flat_subgaussian",
    "cs_shifted",
    "cs_conditioned",
    "cs_division",
    "cs_one_sided",
)


@dataclass(frozen=True)
class CsInterval:
    """One interval of a confidence sequence.

    ``vacuous`` marks the whole-line interval returned when the radius
    bracket is negative.
    """

    n: int
    lower: float
    upper: float
    method_id: str
    vacuous: bool = False

    def __post_init__(self):
        if self.lower > self.upper:
            raise DomainError("lower endpoint exceeds upper endpoint")

    @property
    def center(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def radius(self) -> float:
        return 0.5 * (self.upper - self.lower)

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def _check(alpha, n):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if n < 1:
        raise DomainError("a confidence interval needs n >= 1")


def _symmetric(n, center, sq_radius, method_id) -> CsInterval:
    if sq_radius < 0 or math.isnan(sq_radius):
        return CsInterval(n, -math.inf, math.inf, method_id, vacuous=True)
    r = math.sqrt(sq_radius)
    return CsInterval(n, center - r, center + r, method_id)


# ---------------------------------------------------------------------------
# squared radii; all accept arrays in n (and in the sums where relevant)


def _sq_gaussian_mixture(n, c, alpha):
    c2 = c * c
    return np.log((c2 + n) / (c2 * alpha * alpha)) * (1.0 + c2 / n) / n


def _sq_flat(n, const, thickness=1.0):
    # invert  log D - log(n)/2 + n (mu0 - mean)^2 / 2 <= log(D / const)
    log_d = math.log(thickness)
    return 2.0 * ((log_d - math.log(const)) - log_d + 0.5 * np.log(n)) / n


def _sq_shifted(n, mean, c, eta, alpha):
    c2 = c * c
    return (np.log((c2 + n) / (c2 * alpha * alpha)) + c2 * n * (mean - eta) ** 2 / (c2 + n)) / n


def _sq_conditioned(n, nu, alpha):
    return (n + nu) * np.log((n + nu) / (alpha * alpha * nu)) / (n * n)


def _sq_division(n, s_total, s_nu, nu, alpha):
    post = s_total - s_nu
    return (
        np.log((n + nu) / (alpha * alpha * nu)) + post**2 / n - s_total**2 / (n + nu) + s_nu**2 / nu
    ) / n


@lru_cache(maxsize=64)
def _const(kind: str, alpha: float) -> float:
    solver = {"a": solve_a_alpha, "b": solve_b_alpha, "c": solve_c_alpha}[kind]
    return solver(alpha).constant


# ---------------------------------------------------------------------------
# scalar constructors


def cs_gaussian_mixture(stats: StreamStats, c: float, alpha: float) -> CsInterval:
    _check(alpha, stats.n)
    if not c > 0:
        raise DomainError("c must be positive")
    return _symmetric(stats.n, stats.mean(), float(_sq_gaussian_mixture(stats.n, c, alpha)), "cs_gaussian_mixture")


def cs_flat_gaussian(stats: StreamStats, alpha: float, thickness: float = 1.0) -> CsInterval:
    """Flat-mixture CS, level ``D / a_alpha`` for a prior of thickness ``D``.

    The thickness cancels; it is accepted so that the cancellation can be
    checked numerically.
    """
    _check(alpha, stats.n)
    if not thickness > 0:
        raise DomainError("thickness must be positive")
    sq = float(_sq_flat(stats.n, _const("a", alpha), thickness))
    return _symmetric(stats.n, stats.mean(), sq, "cs_flat_gaussian")


def cs_flat_subgaussian(stats: StreamStats, alpha: float) -> CsInterval:
    _check(alpha, stats.n)
    sq = float(_sq_flat(stats.n, _const("b", alpha)))
    return _symmetric(stats.n, stats.mean(), sq, "cs_flat_subgaussian")


def cs_shifted(stats: StreamStats, c: float, eta: float, alpha: float) -> CsInterval:
    _check(alpha, stats.n)
    if not c > 0:
        raise DomainError("c must be positive")
    sq = float(_sq_shifted(stats.n, stats.mean(), c, eta, alpha))
    return _symmetric(stats.n, stats.mean(), sq, "cs_shifted")


def cs_conditioned(stats: StreamStats, nu: int, alpha: float) -> CsInterval:
    _check(alpha, stats.n)
    if int(nu) != nu or nu < 1:
        raise DomainError("nu must be a positive integer")
    return _symmetric(stats.n, stats.mean(), float(_sq_conditioned(stats.n, nu, alpha)), "cs_conditioned")


def cs_division(prefix: PrefixPair, alpha: float) -> CsInterval:
    """CS from the division process, centred at the post-burn-in mean."""
    n, nu = prefix.n, prefix.nu
    _check(alpha, n)
    if nu < 1:
        raise DomainError("nu must be at least 1")
    sq = float(_sq_division(n, prefix.at_total.sum, prefix.at_nu.sum, nu, alpha))
    return _symmetric(n, prefix.post_burn_in_mean(), sq, "cs_division")


def cs_one_sided(stats: StreamStats, alpha: float) -> CsInterval:
    """Lower confidence bound from the half-flat e-process, ``[lower, inf)``."""
    _check(alpha, stats.n)
    n = stats.n
    shift = v_inverse(math.sqrt(4.0 * n) / _const("c", alpha)) / math.sqrt(n)
    return CsInterval(n, stats.mean() - shift, math.inf, "cs_one_sided")


def asymptotic_radius(kind: str, n: int, alpha: float, variant: str = "proof") -> float:
    """Small-alpha approximations of the flat-mixture radii.

    For ``kind="gaussian_flat"`` there are two variants: ``"display"`` is
    ``sqrt(log(2n/(pi alpha^2)) / (2n))`` and ``"proof"`` is
    ``sqrt(log(2n/(pi alpha^2)) / n)``.  The exact radius tracks the latter.
    ``kind="subgaussian_flat"`` gives
    ``sqrt((log(4n/alpha^2) + 2 log log(1/alpha)) / n)``.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if kind == "gaussian_flat":
        num = math.log(2.0 * n / (math.pi * alpha * alpha))
        if variant == "display":
            return math.sqrt(num / (2.0 * n))
        if variant == "proof":
            return math.sqrt(num / n)
        raise DomainError(f"unknown variant {variant!r}")
    if kind == "subgaussian_flat":
        num = math.log(4.0 * n / (alpha * alpha)) + 2.0 * math.log(math.log(1.0 / alpha))
        return math.sqrt(num / n)
    raise DomainError(f"unknown asymptotic kind {kind!r}")


# ---------------------------------------------------------------------------
# vectorised boundaries


def cs_bounds(
    method_id: str,
    n,
    s,
    alpha: float,
    *,
    c: float | None = None,
    eta: float | None = None,
    nu: int | None = None,
    s_nu=None,
    thickness: float = 1.0,
):
    """Lower and upper endpoints for arrays of sample sizes and running sums.

    For ``cs_division`` ``n`` counts post-burn-in points, ``s`` is the total
    sum and ``s_nu`` the burn-in sum.  Vacuous entries come back as
    ``(-inf, inf)``.
    """
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(n < 1):
        raise DomainError("a confidence interval needs n >= 1")
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    mean = s / n
    if method_id == "cs_one_sided":
        shift = v_inverse_array(0.5 * np.log(4.0 * n) - math.log(_const("c", alpha))) / np.sqrt(n)
        return mean - shift, np.full(np.broadcast(mean, shift).shape, np.inf)
    if method_id == "cs_gaussian_mixture":
        sq = _sq_gaussian_mixture(n, _need(c, "c"), alpha)
    elif method_id == "cs_flat_gaussian":
        sq = _sq_flat(n, _const("a", alpha), thickness)
    elif method_id == "cs_flat_subgaussian":
        sq = _sq_flat(n, _const("b", alpha))
    elif method_id == "cs_shifted":
        sq = _sq_shifted(n, mean, _need(c, "c"), _need(eta, "eta"), alpha)
    elif method_id == "cs_conditioned":
        sq = _sq_conditioned(n, _need(nu, "nu"), alpha)
    elif method_id == "cs_division":
        nu = _need(nu, "nu")
        s_nu = np.asarray(_need(s_nu, "s_nu"), dtype=float)
        sq = _sq_division(n, s, s_nu, nu, alpha)
        mean = (s - s_nu) / n
    else:
        raise DomainError(f"unknown method {method_id!r}")
    sq, mean = np.broadcast_arrays(sq, mean)
    vac = ~(sq >= 0)
    r = np.sqrt(np.where(vac, 0.0, sq))
    lower = np.where(vac, -np.inf, mean - r)
    upper = np.where(vac, np.inf, mean + r)
    return lower, upper


def _need(v, name):
    if v is None:
        raise DomainError(f"parameter {name} is required for this method")
    return v


def build_cs(method_id: str, data, alpha: float, **params) -> CsInterval:
    """Dispatch by ``method_id``; ``data`` is StreamStats (PrefixPair for division)."""
    if method_id == "cs_gaussian_mixture":
        return cs_gaussian_mixture(data, _need(params.get("c"), "c"), alpha)
    if method_id == "cs_flat_gaussian":
        return cs_flat_gaussian(data, alpha, params.get("thickness") or 1.0)
    if method_id == "cs_flat_subgaussian":
        return cs_flat_subgaussian(data, alpha)
    if method_id == "cs_shifted":
        return cs_shifted(data, _need(params.get("c"), "c"), _need(params.get("eta"), "eta"), alpha)
    if method_id == "cs_conditioned":
        return cs_conditioned(data, _need(params.get("nu"), "nu"), alpha)
    if method_id == "cs_division":
        return cs_division(data, alpha)
    if method_id == "cs_one_sided":
        return cs_one_sided(data, alpha)
    raise DomainError(f"unknown method {method_id!r}")
