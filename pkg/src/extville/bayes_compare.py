"""Conjugate-normal Bayesian quantities and the diffuse-prior degeneracy scan.

As the prior precision ``c^2`` shrinks, the posterior tends to
``N(mean, 1/n)`` while the Bayes factor and the classical-Ville CS blow up.
Measuring the same mixture on the extended-Ville scale instead, with the
process rescaled by ``1/c`` and its level read off the crossing bound at
``m = 1``, keeps the CS finite and drives it to the flat-mixture CS.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .cs_builder import cs_flat_gaussian, cs_shifted
from .numerics import DomainError, ExtendedValue, bisect
from .processes import StreamStats, path_rng
from .thresholds import xb_from_logs

__all__ = [
    "PosteriorParams",
    "DegeneracyRow",
    "posterior_params",
    "bayes_factor",
    "xb_level_scaled_mixture",
    "degeneracy_scan",
    "flat_reference_radius",
]

XB_SAMPLES = 1_000_000


@dataclass(frozen=True)
class PosteriorParams:
    mean: float
    variance: float


@dataclass(frozen=True)
class DegeneracyRow:
    c: float
    posterior_mean: float
    posterior_variance: float
    log_bayes_factor: float
    cs_radius: float
    xb_level: float
    xb_cs_radius: float

    def to_dict(self) -> dict:
        return asdict(self)


def _check_c(c):
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")


def posterior_params(stats: StreamStats, eta: float, c: float) -> PosteriorParams:
    """Posterior of ``mu`` under the prior ``N(eta, 1/c^2)`` and unit-variance data."""
    _check_c(c)
    prec = c * c + stats.n
    return PosteriorParams(mean=(c * c * eta + stats.sum) / prec, variance=1.0 / prec)


def bayes_factor(stats: StreamStats, eta: float, c: float, mu0: float) -> ExtendedValue:
    """``B_01``: null density over the ``N(eta, 1/c^2)`` marginal, i.e. ``dpi_n / dpi_0`` at ``mu0``."""
    _check_c(c)
    c2 = c * c
    prec = c2 + stats.n
    post = (c2 * eta + stats.sum) / prec
    log_b = 0.5 * math.log(prec / c2) + (c2 * (mu0 - eta) ** 2 - prec * (mu0 - post) ** 2) / 2.0
    return ExtendedValue(log_b)


def _log_scaled_mixture_at_one(c: float, z: np.ndarray) -> np.ndarray:
    # (1/c) L^{(c)}_1 with X_1 - mu0 = z
    c2 = c * c
    return -0.5 * math.log1p(c2) + z * z / (2.0 * (1.0 + c2))


def xb_level_scaled_mixture(c: float, alpha: float, z: np.ndarray) -> float:
    """Level ``C`` with empirical ``C^{-1} E[(L^{(c)}_1 / c) ^ C] = alpha``.

    ``z`` are standard normal draws shared across values of ``c``.  Solved by
    bisection on ``log C``; returns ``log C``.
    """
    logs = _log_scaled_mixture_at_one(c, np.asarray(z, dtype=float))

    def excess(log_c):
        return xb_from_logs(logs, math.exp(log_c)).bound - alpha

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
        if hi > 700:
            raise DomainError("crossing bound does not fall to alpha")
    # the empirical xb is a step-like function of C; settle on the bracket
    return bisect(excess, 0.0, hi, tol=math.inf, xtol=1e-12).root


def degeneracy_scan(
    stats: StreamStats,
    eta: float,
    mu0: float,
    alpha: float,
    c_grid: Sequence[float],
    seed: int = 0,
    samples: int = XB_SAMPLES,
) -> list[DegeneracyRow]:
    """Proper-prior quantities along a decreasing grid of prior precisions.

    The classical column is the ``N(eta, 1/c^2)`` mixture CS radius; the
    extended column uses the Gaussian mixture rescaled by ``1/c`` with the
    level solved from Monte-Carlo truncated means at ``m = 1``.
    """
    c_grid = [float(c) for c in c_grid]
    if any(c <= 0 for c in c_grid):
        raise DomainError("c_grid must be positive")
    if any(b >= a for a, b in zip(c_grid, c_grid[1:])):
        raise DomainError("c_grid must be strictly decreasing")
    if stats.n < 1:
        raise DomainError("the scan needs n >= 1")
    z = path_rng(seed, 0).standard_normal(samples)
    n = stats.n
    rows = []
    for c in c_grid:
        pp = posterior_params(stats, eta, c)
        log_c_level = xb_level_scaled_mixture(c, alpha, z)
        c2 = c * c
        # {mu0 : L^{(c)}_n(mu0) / c < C}
        sq = 2.0 * (c2 + n) * (log_c_level + 0.5 * math.log(c2 + n)) / (n * n)
        rows.append(
            DegeneracyRow(
                c=c,
                posterior_mean=pp.mean,
                posterior_variance=pp.variance,
                log_bayes_factor=bayes_factor(stats, eta, c, mu0).log_value,
                cs_radius=cs_shifted(stats, c, eta, alpha).radius,
                xb_level=math.exp(log_c_level),
                xb_cs_radius=math.sqrt(sq) if sq >= 0 else math.inf,
            )
        )
    return rows


def flat_reference_radius(stats: StreamStats, alpha: float) -> float:
    return cs_flat_gaussian(stats, alpha).radius
