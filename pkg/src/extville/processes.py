"""Closed-form (extended) nonnegative supermartingales and e-processes.

Every evaluator is available in two shapes:

* ``log_*`` functions take arrays of sample sizes ``n`` and running sums
  ``s`` and return natural-log values, broadcasting like numpy ufuncs.  The
  Monte-Carlo lab works with these.
* scalar functions take a :class:`StreamStats` and return an
  :class:`~extville.numerics.ExtendedValue`.

Observations are unit-variance (1-subGaussian) with null mean ``mu0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .numerics import DomainError, ExtendedValue, log_v

__all__ = [
    "StreamStats",
    "PrefixPair",
    "ProcessSpec",
    "SimPath",
    "FAMILIES",
    "START_KINDS",
    "lr_gaussian",
    "gaussian_mixture",
    "flat_mixture",
    "shifted_gaussian_mixture",
    "conditioned_process",
    "division_process",
    "half_flat_eprocess",
    "evaluate",
    "log_path",
    "path_rng",
    "simulate_multiplicative",
    "multiplicative_log_paths",
]


@dataclass(frozen=True)
class StreamStats:
    """Sufficient statistics ``(n, S_n, V_n)`` of an observation prefix."""

    n: int
    sum: float = 0.0
    sum_sq: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("n must be nonnegative")
        if self.n == 0 and (self.sum != 0 or self.sum_sq != 0):
            raise DomainError("empty prefix must have zero sums")
        if self.n >= 1:
            # Cauchy-Schwarz, with slack for rounding
            slack = 1e-9 * max(1.0, abs(self.sum_sq))
            if self.sum_sq + slack < self.sum**2 / self.n:
                raise DomainError("sum_sq < sum^2 / n violates Cauchy-Schwarz")

    @classmethod
    def from_data(cls, xs: Iterable[float]) -> "StreamStats":
        xs = np.asarray(list(xs) if not isinstance(xs, np.ndarray) else xs, dtype=float)
        return cls(int(xs.size), float(xs.sum()), float((xs**2).sum()))

    def mean(self) -> float:
        if self.n < 1:
            raise DomainError("mean of an empty prefix is undefined")
        return self.sum / self.n

    def update(self, x: float) -> "StreamStats":
        return StreamStats(self.n + 1, self.sum + x, self.sum_sq + x * x)


@dataclass(frozen=True)
class PrefixPair:
    """Statistics of the first ``nu`` and of the first ``n + nu`` observations."""

    at_nu: StreamStats
    at_total: StreamStats

    def __post_init__(self):
        if self.at_nu.n > self.at_total.n:
            raise DomainError("burn-in prefix longer than the full prefix")

    @classmethod
    def from_data(cls, xs: Sequence[float], nu: int) -> "PrefixPair":
        xs = np.asarray(xs, dtype=float)
        if not 0 <= nu <= xs.size:
            raise DomainError("nu must lie within the data length")
        return cls(StreamStats.from_data(xs[:nu]), StreamStats.from_data(xs))

    @property
    def nu(self) -> int:
        return self.at_nu.n

    @property
    def n(self) -> int:
        return self.at_total.n - self.at_nu.n

    def post_burn_in_mean(self) -> float:
        if self.n < 1:
            raise DomainError("no observations after the burn-in")
        return (self.at_total.sum - self.at_nu.sum) / self.n


# ---------------------------------------------------------------------------
# log-domain array evaluators


def log_lr_gaussian(n, s, mu, mu0):
    n = np.asarray(n, dtype=float)
    return (mu - mu0) * np.asarray(s, dtype=float) - n * (mu * mu - mu0 * mu0) / 2.0


def log_gaussian_mixture(n, s, c, mu0):
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    c2 = c * c
    return 0.5 * np.log(c2 / (c2 + n)) + (n * mu0 - s) ** 2 / (2.0 * (c2 + n))


def log_flat_mixture(n, s, mu0, thickness=1.0):
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = math.log(thickness) - 0.5 * np.log(n) + (n * mu0 - s) ** 2 / (2.0 * n)
    return np.where(n == 0, np.inf, out)


def log_shifted_gaussian_mixture(n, s, c, eta, mu0):
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    c2 = c * c
    post_mean = (c2 * eta + s) / (c2 + n)
    return 0.5 * np.log(c2 / (c2 + n)) - (
        c2 * (mu0 - eta) ** 2 - (c2 + n) * (mu0 - post_mean) ** 2
    ) / 2.0


def log_conditioned(n, s, nu, mu0):
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    return -0.5 * np.log(n + nu) + (n * mu0 - s) ** 2 / (2.0 * (n + nu))


def log_division(n, s_total, s_nu, nu, mu0):
    """``log O_n`` from the running sum after ``n + nu`` and after ``nu`` points."""
    n = np.asarray(n, dtype=float)
    s_total = np.asarray(s_total, dtype=float)
    s_nu = np.asarray(s_nu, dtype=float)
    post = s_total - s_nu
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (
            0.5 * math.log(nu)
            - 0.5 * np.log(n + nu)
            + n / 2.0 * (mu0 - post / n) ** 2
            - post**2 / (2.0 * n)
            + s_total**2 / (2.0 * (n + nu))
            - s_nu**2 / (2.0 * nu)
        )
    return np.where(n == 0, 0.0, out)


def log_half_flat(n, s, mu0):
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (s - n * mu0) / np.sqrt(n)
        out = -0.5 * np.log(4.0 * n) + log_v(np.where(n == 0, 0.0, z))
    return np.where(n == 0, np.nan, out)


# ---------------------------------------------------------------------------
# scalar API


def lr_gaussian(stats: StreamStats, mu: float, mu0: float) -> ExtendedValue:
    return ExtendedValue(float(log_lr_gaussian(stats.n, stats.sum, mu, mu0)))


def gaussian_mixture(stats: StreamStats, c: float, mu0: float) -> ExtendedValue:
    """Likelihood ratio mixed over ``mu ~ N(mu0, 1/c^2)``."""
    _check_c(c)
    return ExtendedValue(float(log_gaussian_mixture(stats.n, stats.sum, c, mu0)))


def flat_mixture(stats: StreamStats, mu0: float, thickness: float = 1.0) -> ExtendedValue:
    """Likelihood ratio mixed over the flat measure ``thickness * dmu / sqrt(2 pi)``.

    Infinite at ``n = 0``.
    """
    if thickness <= 0:
        raise DomainError("thickness must be positive")
    return ExtendedValue(float(log_flat_mixture(stats.n, stats.sum, mu0, thickness)))


def shifted_gaussian_mixture(stats: StreamStats, c: float, eta: float, mu0: float) -> ExtendedValue:
    """Likelihood ratio mixed over a prior ``N(eta, 1/c^2)`` not centred at the null."""
    _check_c(c)
    return ExtendedValue(float(log_shifted_gaussian_mixture(stats.n, stats.sum, c, eta, mu0)))


def conditioned_process(stats: StreamStats, nu: int, mu0: float) -> ExtendedValue:
    _check_nu(nu)
    return ExtendedValue(float(log_conditioned(stats.n, stats.sum, nu, mu0)))


def division_process(prefix: PrefixPair, nu: int, mu0: float) -> ExtendedValue:
    _check_nu(nu)
    if prefix.nu != nu:
        raise DomainError(f"prefix burn-in {prefix.nu} does not match nu={nu}")
    if prefix.n < 1:
        raise DomainError("division process needs at least one post-burn-in observation")
    return ExtendedValue(
        float(log_division(prefix.n, prefix.at_total.sum, prefix.at_nu.sum, nu, mu0))
    )


def half_flat_eprocess(stats: StreamStats, mu0: float) -> ExtendedValue:
    """Flat mixture over the half-line ``mu >= mu0``; defined for ``n >= 1``."""
    if stats.n < 1:
        raise DomainError("the half-flat e-process is indexed from n = 1")
    return ExtendedValue(float(log_half_flat(stats.n, stats.sum, mu0)))


def _check_c(c):
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")


def _check_nu(nu):
    if int(nu) != nu or nu < 1:
        raise DomainError(f"nu must be a positive integer, got {nu}")


# ---------------------------------------------------------------------------
# tagged process descriptions

FAMILIES = (
    "LR",
    "GaussianMix",
    "FlatMix",
    "FlatMixThick",
    "ShiftedMix",
    "Conditioned",
    "Division",
    "HalfFlat",
)

_REQUIRED = {
    "LR": ("mu",),
    "GaussianMix": ("c",),
    "FlatMix": (),
    "FlatMixThick": ("thickness",),
    "ShiftedMix": ("c", "eta"),
    "Conditioned": ("nu",),
    "Division": ("nu",),
    "HalfFlat": (),
}


@dataclass(frozen=True)
class ProcessSpec:
    family: str
    mu0: float = 0.0
    mu: Optional[float] = None
    c: Optional[float] = None
    eta: Optional[float] = None
    nu: Optional[int] = None
    thickness: Optional[float] = None

    def __post_init__(self):
        if self.family not in _REQUIRED:
            raise DomainError(f"unknown process family {self.family!r}")
        missing = [p for p in _REQUIRED[self.family] if getattr(self, p) is None]
        if missing:
            raise DomainError(f"{self.family} requires {', '.join(missing)}")
        if self.c is not None:
            _check_c(self.c)
        if self.nu is not None:
            _check_nu(self.nu)
        if self.thickness is not None and not self.thickness > 0:
            raise DomainError("thickness must be positive")

    @property
    def burn_in(self) -> int:
        """Observations consumed before time zero of the process."""
        return self.nu if self.family == "Division" else 0

    def log_value(self, n, s, s_nu=None):
        """Vectorised log-value at sample size ``n`` with running sum ``s``.

        For ``Division``, ``n`` counts post-burn-in observations, ``s`` is the
        sum over all ``n + nu`` points and ``s_nu`` the burn-in sum.
        """
        f = self.family
        if f == "LR":
            return log_lr_gaussian(n, s, self.mu, self.mu0)
        if f == "GaussianMix":
            return log_gaussian_mixture(n, s, self.c, self.mu0)
        if f == "FlatMix":
            return log_flat_mixture(n, s, self.mu0, 1.0)
        if f == "FlatMixThick":
            return log_flat_mixture(n, s, self.mu0, self.thickness)
        if f == "ShiftedMix":
            return log_shifted_gaussian_mixture(n, s, self.c, self.eta, self.mu0)
        if f == "Conditioned":
            return log_conditioned(n, s, self.nu, self.mu0)
        if f == "Division":
            if s_nu is None:
                raise DomainError("Division needs the burn-in sum")
            return log_division(n, s, s_nu, self.nu, self.mu0)
        return log_half_flat(n, s, self.mu0)


def evaluate(spec: ProcessSpec, data) -> ExtendedValue:
    """Evaluate ``spec`` on a :class:`StreamStats` (or :class:`PrefixPair` for Division)."""
    if spec.family == "Division":
        if not isinstance(data, PrefixPair):
            raise DomainError("Division is evaluated on a PrefixPair")
        return division_process(data, spec.nu, spec.mu0)
    if spec.family == "HalfFlat":
        return half_flat_eprocess(data, spec.mu0)
    if spec.family == "FlatMix" or spec.family == "FlatMixThick":
        return flat_mixture(data, spec.mu0, spec.thickness or 1.0)
    return ExtendedValue(float(spec.log_value(data.n, data.sum)))


def log_path(spec: ProcessSpec, x: np.ndarray) -> np.ndarray:
    """Log-values along data paths.

    ``x`` has shape ``(paths, burn_in + horizon)``; the result has shape
    ``(paths, horizon + 1)`` with column ``n`` holding the process at time
    ``n``.  The half-flat e-process is undefined at ``n = 0`` (NaN there).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    b = spec.burn_in
    horizon = x.shape[1] - b
    if horizon < 0:
        raise DomainError("data shorter than the burn-in")
    cs = np.cumsum(x, axis=1)
    n = np.arange(horizon + 1, dtype=float)
    if b:
        s_nu = cs[:, b - 1 : b]
        s = np.concatenate([s_nu, cs[:, b:]], axis=1)
        return spec.log_value(n, s, s_nu)
    s = np.concatenate([np.zeros((x.shape[0], 1)), cs], axis=1)
    return spec.log_value(n, s)


# ---------------------------------------------------------------------------
# multiplicative ENSM simulators

START_KINDS = ("cauchy_abs", "atom_half_inf", "const_inf_then", "inf_until_first_success")

_LOG_DOWN = math.log(0.5)
_LOG_UP = math.log(1.5)


@dataclass
class SimPath:
    """One simulated path; ``log_values[n]`` is the log of the value at time n."""

    log_values: np.ndarray
    seed: int
    theta: float
    start: str = "cauchy_abs"

    @property
    def values(self) -> list[ExtendedValue]:
        return [ExtendedValue(v) for v in self.log_values]

    @property
    def horizon(self) -> int:
        return len(self.log_values) - 1


def path_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, index)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def multiplicative_log_paths(
    theta: float,
    start: str,
    horizon: int,
    n_paths: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Log-paths of ``M_n = M_{n-1} (1/2 + xi_n)`` with ``xi_n ~ Ber(theta)``.

    ``start`` selects the initial law / switching rule:

    ``cauchy_abs``
        ``M_0 = |Cauchy(0, 1)|``.
    ``atom_half_inf``
        ``M_0`` is 1 or inf with probability 1/2 each.
    ``const_inf_then``
        ``R_0 = inf`` and ``R_n = M_n`` (Cauchy start) for ``n >= 1``.
    ``inf_until_first_success``
        ``T_n = inf`` while no ``xi_i = 1`` has occurred, else ``M_n``.
    """
    if not 0.0 <= theta <= 1.0:
        raise DomainError("theta must lie in [0, 1]")
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    if start not in START_KINDS:
        raise DomainError(f"unknown start {start!r}")
    if start == "atom_half_inf":
        log_m0 = np.where(rng.random(n_paths) < 0.5, 0.0, np.inf)
    else:
        log_m0 = np.log(np.abs(rng.standard_cauchy(n_paths)))
    xi = rng.random((n_paths, horizon)) < theta
    steps = np.where(xi, _LOG_UP, _LOG_DOWN)
    out = np.empty((n_paths, horizon + 1))
    out[:, 0] = log_m0
    np.cumsum(steps, axis=1, out=out[:, 1:])
    out[:, 1:] += log_m0[:, None]
    if start == "const_inf_then":
        out[:, 0] = np.inf
    elif start == "inf_until_first_success":
        seen = np.logical_or.accumulate(xi, axis=1)
        out[:, 0] = np.inf
        out[:, 1:][~seen] = np.inf
    return out


def simulate_multiplicative(theta: float, start: str, horizon: int, seed: int) -> SimPath:
    rng = path_rng(seed, 0)
    lp = multiplicative_log_paths(theta, start, horizon, 1, rng)[0]
    return SimPath(log_values=lp, seed=seed, theta=theta, start=start)
