"""Monte-Carlo checks of crossing bounds, coverage and supermartingale behaviour.

Paths are generated in fixed-size blocks; block ``j`` of a run with seed
``s`` draws from the counter-based stream keyed by ``(s, j)``, so results are
bit-identical across reruns and independent of how blocks are scheduled.
Crossing events ``exists n`` are checked up to the stated horizon only, so every
crossing estimate is a lower bound of the untruncated probability.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .bayes_compare import degeneracy_scan, flat_reference_radius
from .cs_builder import METHOD_IDS, cs_bounds
from .numerics import DomainError, log_min
from .processes import ProcessSpec, StreamStats, log_path, multiplicative_log_paths, path_rng
from .thresholds import solve_a_alpha, solve_b_alpha, solve_c_alpha, xb_from_logs

__all__ = [
    "DataModel",
    "SimReport",
    "ConfigError",
    "BLOCK",
    "estimate_crossing",
    "estimate_coverage",
    "check_truncated_supermartingale",
    "check_stopped_ville",
    "check_randomized_ville",
    "convergence_trend",
    "check_eprocess_not_supermartingale",
    "adversarial_delta",
    "multiplicative_source",
    "EXPERIMENTS",
    "run_experiment",
]

BLOCK = 200
Z = 3.0
BOOTSTRAP = 200

MEAN_SCHEDULES = ("below_by_inverse_i", "alternating_rademacher_pair")
DATA_KINDS = ("gaussian", "rademacher", "uniform_pm1_shift", "independent_sequence")


class ConfigError(ValueError):
    """Malformed experiment configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class DataModel:
    """Law of an observation stream; every kind is 1-subGaussian.

    ``independent_sequence`` draws ``X_i = mu_i + noise`` with a named mean
    schedule around ``mu``:

    ``below_by_inverse_i``
        ``mu_i = mu - 1/i`` (running average below ``mu``).
    ``alternating_rademacher_pair``
        ``mu_i = mu - delta`` for odd ``i`` and ``mu + delta`` for even ``i``.
    """

    kind: str
    mu: float = 0.0
    schedule: Optional[str] = None
    delta: float = 0.0
    noise: str = "gaussian"

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise DomainError(f"unknown data model {self.kind!r}")
        if self.kind == "independent_sequence":
            if self.schedule not in MEAN_SCHEDULES:
                raise DomainError(f"unknown mean schedule {self.schedule!r}")
            if self.noise not in ("gaussian", "rademacher"):
                raise DomainError(f"unknown noise {self.noise!r}")

    def means(self, length: int) -> np.ndarray:
        i = np.arange(1, length + 1, dtype=float)
        if self.kind != "independent_sequence":
            return np.full(length, self.mu)
        if self.schedule == "below_by_inverse_i":
            return self.mu - 1.0 / i
        return self.mu + np.where(i % 2 == 1, -self.delta, self.delta)

    def sample(self, rng: np.random.Generator, n_paths: int, length: int) -> np.ndarray:
        shape = (n_paths, length)
        kind = self.kind
        if kind == "gaussian":
            return self.mu + rng.standard_normal(shape)
        if kind == "rademacher":
            return self.mu + _signs(rng, shape)
        if kind == "uniform_pm1_shift":
            return self.mu + rng.uniform(-1.0, 1.0, shape)
        noise = rng.standard_normal(shape) if self.noise == "gaussian" else _signs(rng, shape)
        return self.means(length) + noise


def _signs(rng, shape):
    return np.where(rng.random(shape) < 0.5, -1.0, 1.0)


@dataclass
class SimReport:
    """Monte-Carlo estimate checked against a theoretical value.

    ``direction="le"`` passes iff ``estimate <= bound + 3 stderr``;
    ``direction="ge"`` passes iff ``estimate >= bound - 3 stderr``.
    ``expect_fail`` labels negative controls, for which ``verdict == "fail"``
    is the expected outcome.
    """

    experiment: str
    estimate: float
    stderr: float
    reps: int
    horizon: int
    seed: int
    theoretical_bound: Optional[float]
    direction: str = "le"
    expect_fail: bool = False
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.theoretical_bound is None:
            return "pass"
        if self.direction == "le":
            ok = self.estimate <= self.theoretical_bound + Z * self.stderr
        else:
            ok = self.estimate >= self.theoretical_bound - Z * self.stderr
        return "pass" if ok else "fail"

    @property
    def as_expected(self) -> bool:
        return (self.verdict == "fail") == self.expect_fail

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        return d

    def to_json(self) -> str:
        return json.dumps(_finite(self.to_dict()), sort_keys=True)


def _finite(obj):
    # JSON has no infinities; spell them out
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _binomial_se(p: float, reps: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / reps)


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


# ---------------------------------------------------------------------------
# path sources: callables (rng, n_paths, horizon) -> log paths (n_paths, horizon + 1)

PathSource = Callable[[np.random.Generator, int, int], np.ndarray]


def multiplicative_source(theta: float, start: str) -> PathSource:
    def source(rng, n_paths, horizon):
        return multiplicative_log_paths(theta, start, horizon, n_paths, rng)

    return source


def process_source(spec: ProcessSpec, model: DataModel) -> PathSource:
    def source(rng, n_paths, horizon):
        x = model.sample(rng, n_paths, spec.burn_in + horizon)
        return log_path(spec, x)

    return source


def _as_source(source, model):
    if isinstance(source, ProcessSpec):
        if model is None:
            raise DomainError("a ProcessSpec needs a data model")
        return process_source(source, model)
    return source


def _blocks(reps: int):
    start = 0
    j = 0
    while start < reps:
        size = min(BLOCK, reps - start)
        yield j, size
        start += size
        j += 1


def _check_reps(reps, minimum):
    if reps < minimum:
        raise DomainError(f"need at least {minimum} replications, got {reps}")


# ---------------------------------------------------------------------------
# crossing


def estimate_crossing(
    source: Union[ProcessSpec, PathSource],
    C: float,
    horizon: int,
    reps: int,
    seed: int,
    *,
    model: Optional[DataModel] = None,
    m: int = 0,
    bound: Optional[float] = None,
    experiment: str = "crossing",
) -> SimReport:
    """Fraction of paths with ``max_{m <= n <= horizon} M_n >= C``.

    ``bound`` defaults to the plug-in ``C^{-1} mean(M_m ^ C)`` from the same
    paths.
    """
    _check_reps(reps, 100)
    if not C > 0:
        raise DomainError("C must be positive")
    src = _as_source(source, model)
    log_c = math.log(C)
    hits = 0
    xb_sum = 0.0
    for j, size in _blocks(reps):
        lp = src(path_rng(seed, j), size, horizon)
        seg = lp[:, m:]
        hits += int(np.count_nonzero(np.nanmax(seg, axis=1) >= log_c))
        xb_sum += xb_from_logs(lp[:, m], C).bound * size
    p = hits / reps
    xb_hat = xb_sum / reps
    return SimReport(
        experiment=experiment,
        estimate=p,
        stderr=_binomial_se(p, reps),
        reps=reps,
        horizon=horizon,
        seed=seed,
        theoretical_bound=xb_hat if bound is None else bound,
        details={"C": C, "m": m, "plugin_xb": xb_hat},
    )


# ---------------------------------------------------------------------------
# coverage


def estimate_coverage(
    method_id: str,
    model: DataModel,
    alpha: float,
    horizon: int,
    reps: int,
    seed: int,
    *,
    target: Optional[float] = None,
    experiment: str = "coverage",
    **params,
) -> SimReport:
    """Fraction of replications whose CS contains the true mean at every n <= horizon."""
    if method_id not in METHOD_IDS:
        raise DomainError(f"unknown method {method_id!r}")
    _check_reps(reps, 1)
    mu0 = model.mu if target is None else target
    nu = int(params.get("nu") or 0) if method_id == "cs_division" else 0
    n = np.arange(1, horizon + 1, dtype=float)
    covered = 0
    for j, size in _blocks(reps):
        x = model.sample(path_rng(seed, j), size, nu + horizon)
        cs = np.cumsum(x, axis=1)
        if nu:
            s_nu = cs[:, nu - 1 : nu]
            lo, hi = cs_bounds(method_id, n, cs[:, nu:], alpha, s_nu=s_nu, **params)
        else:
            lo, hi = cs_bounds(method_id, n, cs, alpha, **params)
        ok = np.all((lo <= mu0) & (mu0 <= hi), axis=1)
        covered += int(np.count_nonzero(ok))
    p = covered / reps
    return SimReport(
        experiment=experiment,
        estimate=p,
        stderr=_binomial_se(p, reps),
        reps=reps,
        horizon=horizon,
        seed=seed,
        theoretical_bound=1.0 - alpha,
        direction="ge",
        details={"method_id": method_id, "alpha": alpha, "data_model": model.kind},
    )


# ---------------------------------------------------------------------------
# truncated supermartingale


def check_truncated_supermartingale(
    source: Union[ProcessSpec, PathSource],
    k_grid: Sequence[float],
    n_grid: Sequence[int],
    reps: int,
    seed: int,
    *,
    model: Optional[DataModel] = None,
    expect_fail: bool = False,
    experiment: str = "truncated_supermartingale",
) -> SimReport:
    """Paired differences ``(M_{n'} ^ k) - (M_n ^ k)`` over consecutive grid points.

    The reported estimate is the difference with the largest z-score; the
    check passes iff it is at most ``3 stderr`` above zero.
    """
    _check_reps(reps, 10_000)
    n_grid = [int(v) for v in n_grid]
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise DomainError("n_grid must be increasing")
    src = _as_source(source, model)
    horizon = n_grid[-1]
    cols = np.array(n_grid)
    chunks = []
    for j, size in _blocks(reps):
        chunks.append(src(path_rng(seed, j), size, horizon)[:, cols])
    lp = np.concatenate(chunks)
    table = []
    worst = None
    for k in k_grid:
        capped = np.exp(log_min(lp, math.log(k)))
        for a in range(len(n_grid) - 1):
            d = capped[:, a + 1] - capped[:, a]
            mean, se = _mean_se(d)
            zscore = mean / se if se > 0 else (math.inf if mean > 0 else -math.inf if mean < 0 else 0.0)
            row = {"k": float(k), "n": n_grid[a], "n_next": n_grid[a + 1], "mean_diff": mean, "stderr": se}
            table.append(row)
            if worst is None or zscore > worst[0]:
                worst = (zscore, mean, se)
    return SimReport(
        experiment=experiment,
        estimate=worst[1],
        stderr=worst[2],
        reps=reps,
        horizon=horizon,
        seed=seed,
        theoretical_bound=0.0,
        expect_fail=expect_fail,
        details={"table": table},
    )


# ---------------------------------------------------------------------------
# stopped and randomized Ville


def _first_at_or_below(lp: np.ndarray, log_level: float) -> np.ndarray:
    hit = lp <= log_level
    idx = np.argmax(hit, axis=1)
    idx[~hit.any(axis=1)] = -1
    return idx


def check_stopped_ville(
    source: Union[ProcessSpec, PathSource],
    C: float,
    horizon: int,
    reps: int,
    seed: int,
    *,
    model: Optional[DataModel] = None,
    pi_level: Optional[float] = None,
    tau: Union[int, str] = "pi",
    experiment: str = "stopped_ville",
) -> SimReport:
    """``Pr[M_{tau v pi} >= C]`` against ``C^{-1} E[M_pi]``.

    ``pi`` is the first time the path is at or below ``pi_level`` (time 0
    when ``pi_level`` is None).  Paths that never get there within the
    horizon use ``pi = horizon``; their fraction is reported.  ``tau`` is a
    fixed time or ``"pi"``.  The verdict uses the paired difference of the
    event indicator and ``M_pi / C``.
    """
    _check_reps(reps, 100)
    src = _as_source(source, model)
    log_c = math.log(C)
    ind, m_pi = [], []
    truncated = 0
    for j, size in _blocks(reps):
        lp = src(path_rng(seed, j), size, horizon)
        if pi_level is None:
            pi = np.zeros(size, dtype=int)
        else:
            pi = _first_at_or_below(lp, math.log(pi_level))
            truncated += int(np.count_nonzero(pi < 0))
            pi[pi < 0] = horizon
        t = pi if tau == "pi" else np.maximum(int(tau), pi)
        rows = np.arange(size)
        ind.append(lp[rows, t] >= log_c)
        m_pi.append(np.exp(lp[rows, pi]))
    ind = np.concatenate(ind).astype(float)
    m_pi = np.concatenate(m_pi)
    p = float(ind.mean())
    mean_pi, se_pi = _mean_se(m_pi)
    _, se_diff = _mean_se(ind - m_pi / C)
    return SimReport(
        experiment=experiment,
        estimate=p,
        stderr=se_diff,
        reps=reps,
        horizon=horizon,
        seed=seed,
        theoretical_bound=mean_pi / C,
        details={
            "C": C,
            "mean_m_pi": mean_pi,
            "stderr_m_pi": se_pi,
            "truncated_fraction": truncated / reps,
            "tau": tau,
            "pi_level": pi_level,
        },
    )


def check_randomized_ville(
    source: Union[ProcessSpec, PathSource],
    C: float,
    horizon: int,
    reps: int,
    seed: int,
    *,
    model: Optional[DataModel] = None,
    m: int = 0,
    tau: Optional[int] = None,
    force_u: Optional[float] = None,
    bound: Optional[float] = None,
    experiment: str = "randomized_ville",
) -> SimReport:
    """``Pr[max_{m<=n<=tau} M_n >= C  or  M_tau >= U C]`` with an independent uniform U.

    ``bound`` defaults to the plug-in ``C^{-1} mean(M_m ^ C)``.  The
    non-randomized frequency is reported alongside.
    """
    _check_reps(reps, 100)
    src = _as_source(source, model)
    tau = horizon if tau is None else int(tau)
    log_c = math.log(C)
    rand_hits = plain_hits = 0
    xb_sum = 0.0
    for j, size in _blocks(reps):
        rng = path_rng(seed, j)
        lp = src(rng, size, horizon)
        u = np.full(size, float(force_u)) if force_u is not None else rng.random(size)
        crossed = np.nanmax(lp[:, m : tau + 1], axis=1) >= log_c
        with np.errstate(divide="ignore"):
            late = lp[:, tau] >= log_c + np.log(u)
        plain_hits += int(np.count_nonzero(crossed))
        rand_hits += int(np.count_nonzero(crossed | late))
        xb_sum += xb_from_logs(lp[:, m], C).bound * size
    p = rand_hits / reps
    xb_hat = xb_sum / reps
    return SimReport(
        experiment=experiment,
        estimate=p,
        stderr=_binomial_se(p, reps),
        reps=reps,
        horizon=horizon,
        seed=seed,
        theoretical_bound=xb_hat if bound is None else bound,
        details={
            "C": C,
            "m": m,
            "tau": tau,
            "plain_frequency": plain_hits / reps,
            "plugin_xb": xb_hat,
        },
    )


# ---------------------------------------------------------------------------
# trends


def convergence_trend(
    source: Union[ProcessSpec, PathSource],
    checkpoints: Sequence[int],
    reps: int,
    seed: int,
    *,
    model: Optional[DataModel] = None,
    direction: str = "decrease",
    factor: float = 10.0,
    experiment: str = "trend",
) -> SimReport:
    """``log10`` ratio of the path medians at the last and first checkpoints.

    ``direction="decrease"`` requires the ratio to be at most ``1/factor``,
    ``"increase"`` at least ``factor``.  The stderr is a bootstrap over
    replications.  Medians are taken in log-domain, so paths near 0 or
    infinity are handled exactly.
    """
    checkpoints = [int(v) for v in checkpoints]
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise DomainError("checkpoints must be increasing")
    if direction not in ("decrease", "increase"):
        raise DomainError("direction must be 'decrease' or 'increase'")
    src = _as_source(source, model)
    horizon = checkpoints[-1]
    cols = np.array(checkpoints)
    lp = np.concatenate(
        [src(path_rng(seed, j), size, horizon)[:, cols] for j, size in _blocks(reps)]
    )
    med = np.median(lp, axis=0) / math.log(10.0)
    stat = float(med[-1] - med[0])
    boot_rng = path_rng(seed, 2**32)
    boots = np.empty(BOOTSTRAP)
    for b in range(BOOTSTRAP):
        idx = boot_rng.integers(0, lp.shape[0], lp.shape[0])
        bm = np.median(lp[idx][:, [0, -1]], axis=0) / math.log(10.0)
        boots[b] = bm[1] - bm[0]
    target = math.log10(factor)
    return SimReport(
        experiment=experiment,
        estimate=stat,
        stderr=float(boots.std(ddof=1)),
        reps=reps,
        horizon=horizon,
        seed=seed,
        theoretical_bound=-target if direction == "decrease" else target,
        direction="le" if direction == "decrease" else "ge",
        details={"checkpoints": checkpoints, "log10_medians": med.tolist()},
    )


# ---------------------------------------------------------------------------
# e-process that is not a supermartingale


def _step_gain(d: float, delta: float) -> float:
    return math.exp(-0.5 * d * d + d * delta) * (math.exp(-d) + math.exp(d)) / 2.0


def adversarial_delta(d: float = 1.0, margin: float = 1.1) -> float:
    """Shift ``delta`` making the one-step mean factor of the likelihood ratio equal ``margin``.

    The factor is ``exp(-d^2/2 + d delta) cosh(d)``.
    """
    return (math.log(margin) + 0.5 * d * d - math.log(math.cosh(d))) / d


def check_eprocess_not_supermartingale(
    reps: int = 100_000,
    seed: int = 0,
    *,
    d: float = 1.0,
    margin: float = 1.1,
    mu0: float = 0.0,
    alpha: float = 0.05,
    q_reps: int = 10_000,
    q_horizon: int = 1000,
) -> SimReport:
    """Rademacher pair ``rad(mu0 - delta)``, ``rad(mu0 + delta)``.

    The running average stays at or below ``mu0`` but the likelihood ratio
    ``ell(mu0 + d; mu0)`` grows in conditional mean at step 2.  The report
    is a negative control (expected to fail the supermartingale bound 1);
    ``details["q_crossing"]`` holds the companion crossing check for the
    half-flat e-process at ``1/c_alpha`` on the alternating stream.
    """
    delta = adversarial_delta(d, margin)
    if not _step_gain(d, delta) > 1.0:
        raise DomainError("delta does not satisfy the growth inequality")
    rng = path_rng(seed, 0)
    x2 = mu0 + delta + _signs(rng, reps)
    factor = np.exp(d * (x2 - mu0) - 0.5 * d * d)
    mean, se = _mean_se(factor)
    model = DataModel(
        "independent_sequence",
        mu=mu0,
        schedule="alternating_rademacher_pair",
        delta=delta,
        noise="rademacher",
    )
    q = estimate_crossing(
        ProcessSpec("HalfFlat", mu0=mu0),
        1.0 / solve_c_alpha(alpha).constant,
        q_horizon,
        q_reps,
        seed + 1,
        model=model,
        m=1,
        bound=alpha,
        experiment="eproc_q_crossing",
    )
    return SimReport(
        experiment="eproc_negcontrol",
        estimate=mean,
        stderr=se,
        reps=reps,
        horizon=2,
        seed=seed,
        theoretical_bound=1.0,
        expect_fail=True,
        details={
            "delta": delta,
            "d": d,
            "exact_factor": _step_gain(d, delta),
            "q_crossing": q.to_dict(),
        },
    )


# ---------------------------------------------------------------------------
# experiment registry


def _crossing_atom(cfg):
    theta = cfg["theta"]
    rep = estimate_crossing(
        multiplicative_source(theta, "atom_half_inf"),
        cfg["C"],
        cfg["horizon"],
        cfg["reps"],
        cfg["seed"],
        m=0,
        bound=0.5 + 0.5 * min(1.0, 1.0 / cfg["C"]) if theta == 0.5 else None,
        experiment="crossing_ex33",
    )
    return [rep]


def _coverage(method_id, kind):
    def run(cfg):
        model = DataModel(cfg.get("data", kind), mu=cfg["mu0"])
        return [
            estimate_coverage(
                method_id,
                model,
                cfg["alpha"],
                cfg["horizon"],
                cfg["reps"],
                cfg["seed"],
                experiment=f"coverage_{method_id[3:]}",
            )
        ]

    return run


def _stopped_cauchy(cfg):
    src = multiplicative_source(cfg["theta"], "cauchy_abs")
    rep = check_stopped_ville(
        src,
        cfg["C"],
        cfg["horizon"],
        cfg["reps"],
        cfg["seed"],
        pi_level=cfg["pi_level"],
        tau=cfg["tau"],
        experiment="stopped_ville_ex32",
    )
    mean_rep = SimReport(
        experiment="stopped_ville_ex32_mean",
        estimate=rep.details["mean_m_pi"],
        stderr=rep.details["stderr_m_pi"],
        reps=rep.reps,
        horizon=rep.horizon,
        seed=rep.seed,
        theoretical_bound=cfg["pi_level"],
        details={"truncated_fraction": rep.details["truncated_fraction"]},
    )
    return [mean_rep, rep]


def _randomized(cfg):
    alpha = cfg["alpha"]
    C = 1.0 / solve_a_alpha(alpha).constant
    rep = check_randomized_ville(
        ProcessSpec("FlatMix", mu0=0.0),
        C,
        cfg["horizon"],
        cfg["reps"],
        cfg["seed"],
        model=DataModel("gaussian", 0.0),
        m=1,
        bound=alpha,
        experiment="randomized_ville",
    )
    return [rep]


def _trend(family):
    def run(cfg):
        cps = cfg["checkpoints"]
        spec = ProcessSpec(family, mu0=0.0)
        if family == "FlatMix":
            null = DataModel("gaussian", 0.0)
        else:
            null = DataModel("independent_sequence", 0.0, schedule="below_by_inverse_i")
        alt = DataModel("gaussian", cfg["shift"])
        return [
            convergence_trend(spec, cps, cfg["reps"], cfg["seed"], model=null,
                              direction="decrease", factor=10.0, experiment=f"trend_{family}_null"),
            convergence_trend(spec, cps, cfg["reps"], cfg["seed"] + 1, model=alt,
                              direction="increase", factor=1000.0, experiment=f"trend_{family}_alt"),
        ]

    return run


def _negcontrol(cfg):
    k_rep = check_truncated_supermartingale(
        ProcessSpec("FlatMix", mu0=0.0),
        [cfg["k"]],
        cfg["n_grid"],
        cfg["reps"],
        cfg["seed"],
        model=DataModel("gaussian", cfg["shift"]),
        expect_fail=True,
        experiment="truncation_K_alternative",
    )
    lr = check_eprocess_not_supermartingale(cfg["reps"], cfg["seed"], alpha=cfg["alpha"])
    q = lr.details["q_crossing"]
    q_rep = SimReport(**{k: v for k, v in q.items() if k != "verdict"})
    return [k_rep, lr, q_rep]


def _degeneracy(cfg):
    rng = path_rng(cfg["seed"], 0)
    x = rng.standard_normal(cfg["n"])
    stats = StreamStats.from_data(x)
    rows = degeneracy_scan(stats, cfg["eta"], 0.0, cfg["alpha"], cfg["c_grid"],
                           seed=cfg["seed"], samples=cfg["samples"])
    flat = flat_reference_radius(stats, cfg["alpha"])
    last = rows[-1]
    rel = abs(last.xb_cs_radius / flat - 1.0)
    classical = [r.cs_radius for r in rows]
    monotone = all(b > a for a, b in zip(classical, classical[1:]))
    return [
        SimReport(
            experiment="degeneracy_scan",
            estimate=rel,
            stderr=0.0,
            reps=cfg["samples"],
            horizon=cfg["n"],
            seed=cfg["seed"],
            theoretical_bound=0.05,
            details={
                "rows": [r.to_dict() for r in rows],
                "flat_radius": flat,
                "classical_monotone": monotone,
            },
        )
    ]


EXPERIMENTS: dict[str, tuple[Callable, dict]] = {
    "crossing_ex33": (_crossing_atom, {"theta": 0.5, "C": 2.0, "horizon": 10_000, "reps": 100_000, "seed": 1}),
    "coverage_flat_gaussian": (
        _coverage("cs_flat_gaussian", "gaussian"),
        {"alpha": 0.05, "mu0": 0.0, "horizon": 10_000, "reps": 2000, "seed": 2},
    ),
    "coverage_flat_subg": (
        _coverage("cs_flat_subgaussian", "rademacher"),
        {"alpha": 0.05, "mu0": 0.0, "horizon": 10_000, "reps": 2000, "seed": 3},
    ),
    "stopped_ville_ex32": (
        _stopped_cauchy,
        {"theta": 0.5, "C": 10.0, "pi_level": 2.0, "tau": 100, "horizon": 2000, "reps": 100_000, "seed": 4},
    ),
    "randomized_ville": (_randomized, {"alpha": 0.05, "horizon": 1000, "reps": 10_000, "seed": 5}),
    "trend_K": (_trend("FlatMix"), {"checkpoints": [10, 100, 1000, 10_000], "shift": 0.5, "reps": 500, "seed": 6}),
    "trend_Q": (_trend("HalfFlat"), {"checkpoints": [10, 100, 1000, 10_000], "shift": 0.5, "reps": 500, "seed": 7}),
    "eproc_negcontrol": (
        _negcontrol,
        {"k": 10.0, "n_grid": [1, 5, 20, 100], "shift": 0.5, "alpha": 0.05, "reps": 10_000, "seed": 8},
    ),
    "degeneracy_scan": (
        _degeneracy,
        {"n": 100, "eta": 0.0, "alpha": 0.05, "c_grid": [1.0, 0.1, 0.01, 0.001], "samples": 1_000_000, "seed": 9},
    ),
}


def _validate(exp_id: str, overrides: dict) -> dict:
    _, defaults = EXPERIMENTS[exp_id]
    if not isinstance(overrides, dict):
        raise ConfigError("$", "config must be a JSON object")
    cfg = dict(defaults)
    for key, value in overrides.items():
        path = f"$.{key}"
        if key not in defaults and not (key == "data" and exp_id.startswith("coverage")):
            raise ConfigError(path, "unknown field")
        ref = defaults.get(key, "")
        if isinstance(ref, list):
            if not isinstance(value, list):
                raise ConfigError(path, "expected a list")
            for i, v in enumerate(value):
                if isinstance(v, bool) or not isinstance(v, (int, float)):
                    raise ConfigError(f"{path}[{i}]", "expected a number")
        elif isinstance(ref, bool):
            if not isinstance(value, bool):
                raise ConfigError(path, "expected a boolean")
        elif isinstance(ref, int):
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(path, "expected an integer")
        elif isinstance(ref, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(path, "expected a number")
            value = float(value)
        elif isinstance(ref, str):
            if not isinstance(value, str):
                raise ConfigError(path, "expected a string")
        cfg[key] = value
    for key in ("reps", "horizon", "n", "samples"):
        if key in cfg and cfg[key] < 1:
            raise ConfigError(f"$.{key}", "must be positive")
    if "alpha" in cfg and not 0.0 < cfg["alpha"] < 1.0:
        raise ConfigError("$.alpha", "must lie in (0, 1)")
    if "data" in cfg and cfg["data"] not in ("gaussian", "rademacher", "uniform_pm1_shift"):
        raise ConfigError("$.data", "unknown data model")
    return cfg


def run_experiment(exp_id: str, config: Optional[dict] = None) -> list[SimReport]:
    """Run a registered experiment with defaults overridden by ``config``."""
    if exp_id not in EXPERIMENTS:
        raise KeyError(exp_id)
    cfg = _validate(exp_id, config or {})
    return EXPERIMENTS[exp_id][0](cfg)
