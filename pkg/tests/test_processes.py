import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sps

from extville.numerics import DomainError, ExtendedValue
from extville.oracles import log_mixture_quadrature
from extville.processes import (
    FAMILIES,
    PrefixPair,
    ProcessSpec,
    StreamStats,
    conditioned_process,
    division_process,
    evaluate,
    flat_mixture,
    gaussian_mixture,
    half_flat_eprocess,
    log_path,
    lr_gaussian,
    multiplicative_log_paths,
    path_rng,
    shifted_gaussian_mixture,
    simulate_multiplicative,
)


def density_ratio_log(xs, mu, mu0):
    xs = np.asarray(xs, dtype=float)
    return float(np.sum(sps.norm.logpdf(xs, loc=mu) - sps.norm.logpdf(xs, loc=mu0)))


# ---------------------------------------------------------------------------
# StreamStats / PrefixPair


def test_stream_stats_validation():
    with pytest.raises(DomainError):
        StreamStats(-1, 0.0, 0.0)
    with pytest.raises(DomainError):
        StreamStats(0, 1.0, 1.0)
    with pytest.raises(DomainError):
        StreamStats(2, 4.0, 1.0)  # violates S^2 <= n V
    st0 = StreamStats(0, 0.0, 0.0)
    assert st0.update(2.0) == StreamStats(1, 2.0, 4.0)


def test_stream_stats_from_data(rng):
    xs = rng.normal(size=17)
    s = StreamStats.from_data(xs)
    assert s.n == 17
    assert s.sum == pytest.approx(xs.sum())
    assert s.sum_sq == pytest.approx((xs**2).sum())
    assert s.mean() == pytest.approx(xs.mean())


def test_prefix_pair(rng):
    xs = rng.normal(size=10)
    p = PrefixPair.from_data(xs, 3)
    assert p.nu == 3 and p.n == 7
    assert p.post_burn_in_mean() == pytest.approx(xs[3:].mean())


# ---------------------------------------------------------------------------
# likelihood ratio


def test_lr_against_density_ratio(rng):
    for _ in range(20):
        xs = rng.normal(0.3, 1.0, size=rng.integers(1, 40))
        mu, mu0 = rng.normal(), rng.normal()
        got = lr_gaussian(StreamStats.from_data(xs), mu, mu0).log_value
        assert got == pytest.approx(density_ratio_log(xs, mu, mu0), rel=1e-10, abs=1e-10)


def test_lr_at_null_is_one():
    assert lr_gaussian(StreamStats.from_data([1.0, -2.0]), 0.4, 0.4) == ExtendedValue.one()


# ---------------------------------------------------------------------------
# mixtures vs quadrature


@pytest.mark.parametrize("seed", range(5))
def test_gaussian_mixture_quadrature(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(0, 50))
    s = float(r.normal(0, math.sqrt(max(n, 1))))
    c, mu0 = float(r.uniform(0.1, 3)), float(r.normal())
    st_ = StreamStats(n, s, s * s + n + 1.0)
    q = log_mixture_quadrature("gaussian", n, s, mu0, c=c)
    assert gaussian_mixture(st_, c, mu0).log_value == pytest.approx(q, abs=1e-8)


def test_gaussian_mixture_at_zero_is_one():
    assert gaussian_mixture(StreamStats(0, 0.0, 0.0), 0.7, 1.2).log_value == 0.0


def test_flat_mixture_infinite_at_zero():
    assert flat_mixture(StreamStats(0, 0.0, 0.0), 0.0).is_infinite


def test_flat_mixture_thickness_scales():
    st_ = StreamStats.from_data([0.2, 1.1, -0.4])
    base = flat_mixture(st_, 0.1).log_value
    for d in (0.1, 10.0):
        assert flat_mixture(st_, 0.1, d).log_value == pytest.approx(base + math.log(d), abs=1e-14)


def test_gaussian_mixture_limit_increases_to_flat():
    st_ = StreamStats.from_data([0.5, -0.2, 0.9, 0.4])
    mu0 = -0.3
    scaled = [gaussian_mixture(st_, c, mu0).log_value - math.log(c) for c in (1, 0.5, 0.1, 0.01, 0.001)]
    assert all(b > a for a, b in zip(scaled, scaled[1:]))
    assert scaled[-1] == pytest.approx(flat_mixture(st_, mu0).log_value, abs=1e-5)


def test_shifted_with_eta_at_null_equals_centred():
    st_ = StreamStats.from_data([0.5, -0.2, 0.9])
    assert shifted_gaussian_mixture(st_, 0.8, 0.3, 0.3).log_value == pytest.approx(
        gaussian_mixture(st_, 0.8, 0.3).log_value, abs=1e-14
    )


def test_half_flat_basic_values():
    st_ = StreamStats.from_data([0.7, 0.7, 0.7, 0.7])
    assert half_flat_eprocess(st_, 0.7).to_float() == pytest.approx(1.0 / math.sqrt(16.0))
    one = StreamStats.from_data([2.5])
    from extville.numerics import log_v

    assert half_flat_eprocess(one, 0.5).log_value == pytest.approx(math.log(0.5) + log_v(2.0), abs=1e-14)
    q = log_mixture_quadrature("half_flat", 1, 2.5, 0.5)
    assert half_flat_eprocess(one, 0.5).log_value == pytest.approx(q, abs=1e-8)
    with pytest.raises(DomainError):
        half_flat_eprocess(StreamStats(0, 0.0, 0.0), 0.0)


def test_half_flat_dominated_by_flat(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 200))
        s = float(rng.normal(0, 3 * math.sqrt(n)))
        st_ = StreamStats(n, s, s * s / n + 1.0)
        mu0 = float(rng.normal())
        q = half_flat_eprocess(st_, mu0)
        assert math.isfinite(q.log_value)
        # equality up to rounding when erf saturates
        assert q.log_value <= flat_mixture(st_, mu0).log_value + 1e-12 * max(1.0, abs(q.log_value))


# ---------------------------------------------------------------------------
# conditioned and division processes


def test_conditioned_identity(rng):
    for _ in range(200):
        n = int(rng.integers(0, 100))
        nu = int(rng.integers(1, 20))
        s = float(rng.normal(0, math.sqrt(n))) if n else 0.0
        st_ = StreamStats(n, s, s * s + 1.0) if n else StreamStats(0, 0.0, 0.0)
        mu0 = float(rng.normal())
        lhs = conditioned_process(st_, nu, mu0).log_value
        rhs = -0.5 * math.log(nu) + gaussian_mixture(st_, math.sqrt(nu), mu0).log_value
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_division_k_quotient_fixed_data():
    xs = np.array([0.3, -1.2, 0.8, 0.05, 1.7, -0.4, 0.9])
    nu, mu0 = 2, 0.1
    p = PrefixPair.from_data(xs, nu)
    k_total = flat_mixture(StreamStats.from_data(xs), mu0).log_value
    k_nu = flat_mixture(StreamStats.from_data(xs[:nu]), mu0).log_value
    assert division_process(p, nu, mu0).log_value == pytest.approx(k_total - k_nu, abs=1e-12)


def test_division_constant_data():
    nu, n, mu0 = 3, 5, 0.4
    xs = np.full(nu + n, mu0)
    p = PrefixPair.from_data(xs, nu)
    expected = 0.5 * math.log(nu / (n + nu))
    assert division_process(p, nu, mu0).log_value == pytest.approx(expected, abs=1e-13)


def test_division_per_term_oracle():
    from scipy.integrate import quad

    r = np.random.default_rng(7)
    xs = r.normal(size=12)
    nu, mu0 = 4, -0.2

    def log_k(prefix):
        # flat mixture of the product of per-observation density ratios
        def log_integrand(mu):
            return density_ratio_log(prefix, mu, mu0)

        center = float(np.mean(prefix))
        peak = log_integrand(center)
        val, _ = quad(lambda mu: math.exp(log_integrand(mu) - peak), center - 15, center + 15,
                      epsabs=0, epsrel=1e-13, limit=200)
        return peak + math.log(val) - 0.5 * math.log(2 * math.pi)

    expected = log_k(xs) - log_k(xs[:nu])
    got = division_process(PrefixPair.from_data(xs, nu), nu, mu0).log_value
    assert got == pytest.approx(expected, abs=1e-9)


def test_division_preconditions(rng):
    xs = rng.normal(size=6)
    with pytest.raises(DomainError):
        division_process(PrefixPair.from_data(xs, 2), 3, 0.0)
    with pytest.raises(DomainError):
        division_process(PrefixPair.from_data(xs, 6), 6, 0.0)


# ---------------------------------------------------------------------------
# ProcessSpec and paths


def test_spec_validation():
    with pytest.raises(DomainError):
        ProcessSpec("Nope")
    with pytest.raises(DomainError):
        ProcessSpec("GaussianMix")
    with pytest.raises(DomainError):
        ProcessSpec("GaussianMix", c=-1.0)
    with pytest.raises(DomainError):
        ProcessSpec("Conditioned", nu=0)
    assert ProcessSpec("Division", nu=3).burn_in == 3


@pytest.mark.parametrize(
    "spec",
    [
        ProcessSpec("LR", mu=0.4, mu0=0.1),
        ProcessSpec("GaussianMix", c=0.5, mu0=0.1),
        ProcessSpec("FlatMix", mu0=0.1),
        ProcessSpec("FlatMixThick", thickness=3.0, mu0=0.1),
        ProcessSpec("ShiftedMix", c=0.5, eta=1.0, mu0=0.1),
        ProcessSpec("Conditioned", nu=2, mu0=0.1),
        ProcessSpec("HalfFlat", mu0=0.1),
    ],
)
def test_log_path_matches_evaluate(spec, rng):
    x = rng.normal(size=(1, 15))
    lp = log_path(spec, x)[0]
    for n in range(1, 16):
        assert lp[n] == pytest.approx(evaluate(spec, StreamStats.from_data(x[0, :n])).log_value, abs=1e-12)


def test_log_path_division(rng):
    spec = ProcessSpec("Division", nu=3, mu0=0.0)
    x = rng.normal(size=(2, 13))
    lp = log_path(spec, x)
    assert lp.shape == (2, 11)
    assert np.all(lp[:, 0] == 0.0)
    for n in (1, 5, 10):
        v = evaluate(spec, PrefixPair.from_data(x[1, : 3 + n], 3)).log_value
        assert lp[1, n] == pytest.approx(v, abs=1e-12)


def test_families_listed():
    assert set(FAMILIES) == {
        "LR", "GaussianMix", "FlatMix", "FlatMixThick", "ShiftedMix", "Conditioned", "Division", "HalfFlat"
    }


# ---------------------------------------------------------------------------
# multiplicative simulators


def test_theta_zero_atom_paths_halve():
    lp = multiplicative_log_paths(0.0, "atom_half_inf", 50, 200, path_rng(3, 0))
    finite = np.isfinite(lp[:, 0])
    assert finite.any() and (~finite).any()
    expected = np.arange(51) * math.log(0.5)
    assert np.allclose(lp[finite], expected, atol=1e-12)
    assert np.all(np.isposinf(lp[~finite]))


def test_simulator_reproducible():
    a = simulate_multiplicative(0.5, "cauchy_abs", 100, seed=42)
    b = simulate_multiplicative(0.5, "cauchy_abs", 100, seed=42)
    assert np.array_equal(a.log_values, b.log_values)
    assert a.horizon == 100
    assert len(a.values) == 101


def test_switching_starts():
    lp = multiplicative_log_paths(0.3, "const_inf_then", 20, 50, path_rng(1, 0))
    assert np.all(np.isposinf(lp[:, 0])) and np.all(np.isfinite(lp[:, 1:]))
    lp = multiplicative_log_paths(0.3, "inf_until_first_success", 20, 500, path_rng(1, 0))
    steps = np.diff(np.where(np.isfinite(lp), lp, 0.0), axis=1)
    # once finite, a path stays finite
    finite = np.isfinite(lp)
    assert np.all(finite[:, 1:] >= finite[:, :-1])
    assert steps.shape == (500, 20)


def test_simulator_errors():
    with pytest.raises(DomainError):
        simulate_multiplicative(1.5, "cauchy_abs", 10, 0)
    with pytest.raises(DomainError):
        simulate_multiplicative(0.5, "nope", 10, 0)
    with pytest.raises(DomainError):
        simulate_multiplicative(0.5, "cauchy_abs", 0, 0)


def test_cauchy_start_truncated_mean_unbounded():
    # E[M_1 ^ k] grows like log k: the nonintegrability signature
    lp = multiplicative_log_paths(0.5, "cauchy_abs", 1, 400_000, path_rng(5, 0))[:, 1]
    means = [np.exp(np.minimum(lp, math.log(k))).mean() for k in (1e2, 1e4, 1e6)]
    assert means[0] < means[1] < means[2]
    assert means[2] - means[0] > 2.0


@given(st.integers(1, 60), st.floats(-3, 3), st.floats(0.05, 5), st.floats(-2, 2))
def test_gaussian_mixture_below_flat_over_c(n, z, c, mu0):
    s = mu0 * n + z * math.sqrt(n)
    st_ = StreamStats(n, s, s * s / n + 1.0)
    assert gaussian_mixture(st_, c, mu0).log_value - math.log(c) <= flat_mixture(st_, mu0).log_value + 1e-12
