"""Quadrature route to the mixture processes.

Integrates the Gaussian likelihood ratio against a (possibly improper) prior
numerically, independently of the closed forms in :mod:`extville.processes`.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .numerics import DomainError, NonConvergenceError

__all__ = ["log_simpson", "log_mixture_quadrature"]

START_PANELS = 10_000
MAX_PANELS = 10_000 * 2**8
REL_TOL = 1e-9
HALF_WIDTH = 12.0
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _simpson_once(log_f, lo, hi, panels):
    x = np.linspace(lo, hi, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(logsumexp(log_f(x), b=w)) + math.log((hi - lo) / (3.0 * panels))


def log_simpson(log_f, lo: float, hi: float) -> float:
    """Log of the composite Simpson integral of ``exp(log_f)`` over ``[lo, hi]``.

    Panels double from 10^4 until two successive estimates agree to 1e-9
    relative.
    """
    panels = START_PANELS
    prev = _simpson_once(log_f, lo, hi, panels)
    while panels < MAX_PANELS:
        panels *= 2
        cur = _simpson_once(log_f, lo, hi, panels)
        if abs(math.expm1(cur - prev)) <= REL_TOL:
            return cur
        prev = cur
    raise NonConvergenceError("Simpson refinement did not settle")


def log_mixture_quadrature(
    family: str,
    n: int,
    s: float,
    mu0: float,
    *,
    c: float | None = None,
    eta: float | None = None,
    thickness: float = 1.0,
) -> float:
    """``log int ell_n(mu; mu0) prior(dmu)`` by quadrature.

    ``family`` is ``"gaussian"`` (``N(mu0, 1/c^2)``), ``"shifted"``
    (``N(eta, 1/c^2)``), ``"flat"`` (``thickness * dmu / sqrt(2 pi)``) or
    ``"half_flat"`` (``dmu / sqrt(2 pi)`` on ``mu >= mu0``).
    """
    n = int(n)

    def log_lr(mu):
        return (mu - mu0) * s - n * (mu * mu - mu0 * mu0) / 2.0

    if family in ("gaussian", "shifted"):
        if c is None or not c > 0:
            raise DomainError("c must be positive")
        center = mu0 if family == "gaussian" else eta
        if center is None:
            raise DomainError("eta is required for the shifted prior")
        log_prior_norm = math.log(c) - _LOG_SQRT_2PI

        def log_f(mu):
            return log_lr(mu) + log_prior_norm - 0.5 * c * c * (mu - center) ** 2

        prec = c * c + n
        post = (c * c * center + s) / prec
        sd = 1.0 / math.sqrt(prec)
        return log_simpson(log_f, post - HALF_WIDTH * sd, post + HALF_WIDTH * sd)

    if n < 1:
        raise DomainError("improper mixtures need n >= 1")
    post = s / n
    sd = 1.0 / math.sqrt(n)
    if family == "flat":
        log_norm = math.log(thickness) - _LOG_SQRT_2PI
        lo, hi = post - HALF_WIDTH * sd, post + HALF_WIDTH * sd
    elif family == "half_flat":
        log_norm = -_LOG_SQRT_2PI
        lo = max(mu0, post - HALF_WIDTH * sd)
        hi = max(mu0, post) + HALF_WIDTH * sd
    else:
        raise DomainError(f"unknown mixture family {family!r}")
    return log_simpson(lambda mu: log_lr(mu) + log_norm, lo, hi)
