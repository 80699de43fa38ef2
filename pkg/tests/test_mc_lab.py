import json
import math

import numpy as np
import pytest

from extville.mc_lab import (
    EXPERIMENTS,
    ConfigError,
    DataModel,
    SimReport,
    adversarial_delta,
    check_eprocess_not_supermartingale,
    check_randomized_ville,
    check_stopped_ville,
    check_truncated_supermartingale,
    convergence_trend,
    estimate_coverage,
    estimate_crossing,
    multiplicative_source,
    run_experiment,
)
from extville.numerics import DomainError
from extville.processes import ProcessSpec, log_path, path_rng
from extville.thresholds import solve_a_alpha


def constant_one(rng, n_paths, horizon):
    return np.zeros((n_paths, horizon + 1))


# ---------------------------------------------------------------------------
# data models


def test_data_models_moments():
    rng = path_rng(0, 0)
    g = DataModel("gaussian", 0.3).sample(rng, 400, 500)
    assert g.mean() == pytest.approx(0.3, abs=0.01)
    assert g.var() == pytest.approx(1.0, abs=0.02)
    r = DataModel("rademacher", -0.5).sample(rng, 10, 100)
    assert set(np.unique(r)) == {-1.5, 0.5}
    u = DataModel("uniform_pm1_shift", 2.0).sample(rng, 10, 1000)
    assert u.min() >= 1.0 and u.max() <= 3.0


def test_mean_schedules():
    below = DataModel("independent_sequence", 1.0, schedule="below_by_inverse_i")
    m = below.means(100)
    assert np.all(np.cumsum(m) / np.arange(1, 101) <= 1.0)
    alt = DataModel("independent_sequence", 0.0, schedule="alternating_rademacher_pair", delta=0.2)
    m = alt.means(6)
    assert np.allclose(m, [-0.2, 0.2, -0.2, 0.2, -0.2, 0.2])
    assert np.all(np.cumsum(m) <= 1e-12)
    with pytest.raises(DomainError):
        DataModel("independent_sequence", 0.0, schedule="nope")
    with pytest.raises(DomainError):
        DataModel("poisson")


# ---------------------------------------------------------------------------
# report plumbing


def test_report_verdict_rule():
    r = SimReport("x", estimate=0.52, stderr=0.01, reps=100, horizon=1, seed=0, theoretical_bound=0.5)
    assert r.verdict == "pass"
    r.estimate = 0.531
    assert r.verdict == "fail"
    g = SimReport("x", 0.93, 0.01, 100, 1, 0, 0.95, direction="ge")
    assert g.verdict == "pass"
    g.estimate = 0.919
    assert g.verdict == "fail"


def test_report_json_snake_case():
    r = SimReport("x", 0.1, 0.01, 100, 10, 3, 0.2, details={"bound": math.inf})
    d = json.loads(r.to_json())
    assert set(d) >= {"estimate", "stderr", "reps", "horizon", "seed", "theoretical_bound", "verdict"}
    assert d["details"]["bound"] == "inf"
    assert all(k == k.lower() for k in d)


# ---------------------------------------------------------------------------
# crossing


def test_constant_process_never_crosses():
    rep = estimate_crossing(constant_one, 2.0, 50, 200, seed=1, bound=0.5)
    assert rep.estimate == 0.0 and rep.verdict == "pass"


def test_crossing_deterministic():
    src = multiplicative_source(0.5, "atom_half_inf")
    a = estimate_crossing(src, 2.0, 200, 1000, seed=9)
    b = estimate_crossing(src, 2.0, 200, 1000, seed=9)
    assert a.to_json() == b.to_json()
    c = estimate_crossing(src, 2.0, 200, 1000, seed=10)
    assert c.estimate != a.estimate


def test_crossing_atom_small():
    rep = estimate_crossing(multiplicative_source(0.5, "atom_half_inf"), 2.0, 1000, 20_000, seed=2, bound=0.75)
    assert rep.verdict == "pass"
    # half of the paths start at infinity
    assert rep.estimate > 0.5
    assert rep.details["plugin_xb"] == pytest.approx(0.75, abs=0.01)


def test_crossing_flat_mixture_from_one():
    a = solve_a_alpha(0.05).constant
    rep = estimate_crossing(
        ProcessSpec("FlatMix"), 1 / a, 500, 5000, seed=3, model=DataModel("gaussian"), m=1, bound=0.05
    )
    assert rep.verdict == "pass"
    assert rep.details["plugin_xb"] == pytest.approx(0.05, abs=0.01)


def test_crossing_needs_reps():
    with pytest.raises(DomainError):
        estimate_crossing(constant_one, 2.0, 5, 10, seed=0)


# ---------------------------------------------------------------------------
# coverage


def test_coverage_trivial_alpha():
    rep = estimate_coverage("cs_flat_gaussian", DataModel("gaussian"), 0.999, 100, 200, seed=1)
    assert rep.verdict == "pass"


@pytest.mark.parametrize(
    "method,params,model",
    [
        ("cs_gaussian_mixture", {"c": 1.0}, DataModel("gaussian", 0.2)),
        ("cs_shifted", {"c": 0.5, "eta": 1.0}, DataModel("gaussian", 0.2)),
        ("cs_conditioned", {"nu": 3}, DataModel("uniform_pm1_shift", 0.2)),
        ("cs_division", {"nu": 2}, DataModel("gaussian", 0.2)),
        ("cs_one_sided", {}, DataModel("rademacher", 0.2)),
        ("cs_flat_subgaussian", {}, DataModel("uniform_pm1_shift", 0.2)),
    ],
)
def test_coverage_small(method, params, model):
    rep = estimate_coverage(method, model, 0.1, 300, 400, seed=5, **params)
    assert rep.verdict == "pass", rep.to_json()


def test_coverage_unknown_method():
    with pytest.raises(DomainError):
        estimate_coverage("cs_nope", DataModel("gaussian"), 0.1, 10, 10, seed=1)


# ---------------------------------------------------------------------------
# supermartingale properties of the processes


NULL_SPECS = [
    ProcessSpec("LR", mu=0.5),
    ProcessSpec("GaussianMix", c=1.0),
    ProcessSpec("FlatMix"),
    ProcessSpec("FlatMixThick", thickness=2.0),
    ProcessSpec("ShiftedMix", c=1.0, eta=0.7),
    ProcessSpec("Conditioned", nu=2),
    ProcessSpec("Division", nu=2),
    ProcessSpec("HalfFlat"),
]


@pytest.mark.parametrize("spec", NULL_SPECS, ids=lambda s: s.family)
def test_truncated_supermartingale_under_null(spec):
    rep = check_truncated_supermartingale(
        spec, [1.0, 10.0, 100.0], [1, 5, 20], 10_000, seed=11, model=DataModel("gaussian", 0.0)
    )
    assert rep.verdict == "pass", rep.details


def test_truncated_supermartingale_multiplicative():
    rep = check_truncated_supermartingale(
        multiplicative_source(0.5, "cauchy_abs"), [1.0, 10.0, 100.0], [0, 1, 5, 20], 10_000, seed=12
    )
    assert rep.verdict == "pass"


def test_k_alternative_negative_control():
    rep = check_truncated_supermartingale(
        ProcessSpec("FlatMix"), [10.0], [1, 5, 20, 100], 10_000, seed=13,
        model=DataModel("gaussian", 0.5), expect_fail=True,
    )
    assert rep.verdict == "fail" and rep.as_expected


def test_gaussian_mixture_mean_one():
    # c^2 > n keeps the variance finite so the 3-stderr rule is meaningful
    spec = ProcessSpec("GaussianMix", c=5.0)
    x = DataModel("gaussian").sample(path_rng(14, 0), 200_000, 10)
    vals = np.exp(log_path(spec, x)[:, [1, 5, 10]])
    for col in vals.T:
        se = col.std(ddof=1) / math.sqrt(col.size)
        assert abs(col.mean() - 1.0) <= 3 * se


# ---------------------------------------------------------------------------
# stopped and randomized Ville


def test_stopped_ville_cauchy_small():
    rep = check_stopped_ville(multiplicative_source(0.5, "cauchy_abs"), 10.0, 500, 20_000, seed=15,
                              pi_level=2.0, tau=100)
    assert rep.verdict == "pass"
    assert rep.details["mean_m_pi"] <= 2.0 + 3 * rep.details["stderr_m_pi"]
    assert rep.details["truncated_fraction"] < 1e-3


def test_stopped_ville_tau_equals_pi():
    rep = check_stopped_ville(multiplicative_source(0.5, "cauchy_abs"), 1.5, 500, 5000, seed=16,
                              pi_level=2.0, tau="pi")
    assert rep.verdict == "pass"


def test_stopped_ville_pi_zero_is_markov():
    rep = check_stopped_ville(ProcessSpec("LR", mu=0.3), 3.0, 100, 5000, seed=17, tau=50,
                              model=DataModel("gaussian"))
    assert rep.verdict == "pass"
    assert rep.theoretical_bound == pytest.approx(1 / 3)


def test_randomized_forced_u_reduces_to_stopped_event():
    src = multiplicative_source(0.5, "atom_half_inf")
    rep = check_randomized_ville(src, 2.0, 300, 5000, seed=18, force_u=1.0, bound=0.75)
    assert rep.verdict == "pass"
    assert rep.estimate == pytest.approx(rep.details["plain_frequency"], abs=0.01)


def test_randomized_at_least_plain_frequency():
    src = multiplicative_source(0.5, "atom_half_inf")
    rep = check_randomized_ville(src, 2.0, 300, 5000, seed=19, tau=3, bound=0.75)
    assert rep.verdict == "pass"
    assert rep.estimate > rep.details["plain_frequency"]
    long = check_randomized_ville(src, 2.0, 300, 5000, seed=19, bound=0.75)
    assert long.estimate >= long.details["plain_frequency"]


def test_randomized_flat_mixture():
    a = solve_a_alpha(0.05).constant
    rep = check_randomized_ville(ProcessSpec("FlatMix"), 1 / a, 300, 5000, seed=20,
                                 model=DataModel("gaussian"), m=1, bound=0.05)
    assert rep.verdict == "pass"


# ---------------------------------------------------------------------------
# trends and the e-process counterexample


def test_trend_k_null_and_alt():
    spec = ProcessSpec("FlatMix")
    null = convergence_trend(spec, [10, 100, 1000], 300, seed=21, model=DataModel("gaussian"))
    alt = convergence_trend(spec, [10, 100, 1000], 300, seed=22, model=DataModel("gaussian", 0.5),
                            direction="increase", factor=1000.0)
    assert null.verdict == "pass" and alt.verdict == "pass"
    assert null.estimate < 0 < alt.estimate


def test_trend_q_running_average_null():
    model = DataModel("independent_sequence", 0.0, schedule="below_by_inverse_i")
    rep = convergence_trend(ProcessSpec("HalfFlat"), [10, 1000, 10_000], 200, seed=23, model=model)
    assert rep.verdict == "pass"


def test_adversarial_delta():
    d = adversarial_delta(1.0, 1.1)
    assert d == pytest.approx(math.log(1.1) + 0.5 - math.log(math.cosh(1.0)), rel=1e-15)
    gain = math.exp(-0.5 + d) * (math.exp(-1) + math.exp(1))
    assert gain == pytest.approx(2.2, rel=1e-14)
    assert gain > 2


def test_eprocess_counterexample():
    rep = check_eprocess_not_supermartingale(reps=50_000, seed=24, q_reps=2000, q_horizon=300)
    assert rep.expect_fail and rep.verdict == "fail"
    assert rep.estimate - 1.0 > 3 * rep.stderr
    assert rep.details["exact_factor"] == pytest.approx(1.1, rel=1e-12)
    q = rep.details["q_crossing"]
    assert q["verdict"] == "pass" and q["theoretical_bound"] == 0.05


# ---------------------------------------------------------------------------
# registry


def test_registry_ids():
    assert set(EXPERIMENTS) == {
        "crossing_ex33", "coverage_flat_gaussian", "coverage_flat_subg", "stopped_ville_ex32",
        "randomized_ville", "trend_K", "trend_Q", "eproc_negcontrol", "degeneracy_scan",
    }


def test_run_experiment_overrides_and_determinism():
    cfg = {"reps": 300, "horizon": 200, "seed": 5}
    a = run_experiment("crossing_ex33", cfg)
    b = run_experiment("crossing_ex33", cfg)
    assert [r.to_json() for r in a] == [r.to_json() for r in b]
    assert a[0].theoretical_bound == 0.75 and a[0].reps == 300


@pytest.mark.parametrize(
    "cfg,path",
    [
        ({"bogus": 1}, "$.bogus"),
        ({"reps": "many"}, "$.reps"),
        ({"reps": 1.5}, "$.reps"),
        ({"alpha": 2.0}, "$.alpha"),
        ({"c_grid": [1.0, "x"]}, "$.c_grid[1]"),
    ],
)
def test_config_errors_name_field(cfg, path):
    exp = "degeneracy_scan" if "c_grid" in cfg or "alpha" in cfg else "crossing_ex33"
    with pytest.raises(ConfigError) as info:
        run_experiment(exp, cfg)
    assert info.value.path == path


def test_unknown_experiment():
    with pytest.raises(KeyError):
        run_experiment("nope")
