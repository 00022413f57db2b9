import math

import numpy as np
import pytest

from conftest import big_omega, totient
from multlab import distributions, meanvalues, rules, sieve
from multlab.errors import DegenerateInputError


def zero_additive():
    return rules.PrimePowerRule("additive", "zero", lambda p, nu: 0.0,
                                lambda ps: np.zeros(len(ps)), real_valued=True)


def test_weighted_cdf_hand_example(table5):
    cdf = distributions.weighted_cdf(rules.omega_additive(), rules.one(), 10, table5)
    assert cdf.total_weight == 10.0
    assert cdf.query(0) == pytest.approx(0.1)
    assert cdf.query(1) == pytest.approx(0.8)
    assert cdf.query(2) == 1.0
    assert cdf.query(-1) == 0.0


def test_point_mass_at_zero(table5):
    cdf = distributions.weighted_cdf(zero_additive(), rules.one(), 100, table5)
    assert cdf.query(0) == 1.0
    assert cdf.query(5) == 1.0
    assert cdf.query(-1e-9) == 0.0


def test_total_weight_matches_mean_value(table5):
    r = rules.tau_rho(0.5)
    cdf = distributions.weighted_cdf(rules.omega_additive(), r, 10**5, table5)
    m = meanvalues.mean_value_series(r, [10**5], table5).m_values[0].real
    assert abs(cdf.total_weight - m) <= 1e-10 * m


def test_negative_weight_rejected(table5):
    with pytest.raises(ValueError, match=r"r\(2\)"):
        distributions.weighted_cdf(rules.omega_additive(), rules.moebius(), 100, table5)


def test_cdf_monotone_and_bounded(table5):
    cdf = distributions.weighted_cdf(rules.big_omega_additive(), rules.one(),
                                     10**4, table5)
    zs = np.linspace(-1, 20, 400)
    vals = cdf.query(zs)
    assert np.all(np.diff(vals) >= 0)
    assert vals[0] == 0.0 and vals[-1] == 1.0


def test_sketch_compression_bounds_error():
    rng = np.random.default_rng(42)
    samples = rng.normal(size=20_000)
    exact = distributions.WeightedEmpiricalCDF.from_samples(samples)
    sketch = distributions.WeightedEmpiricalCDF.from_samples(samples,
                                                             exact_limit=10_000)
    assert sketch.resolution == 2.0 / distributions.SKETCH_BINS
    assert len(sketch.values) <= distributions.SKETCH_BINS
    zs = np.linspace(-4, 4, 2000)
    gap = np.abs(exact.query(zs) - sketch.query(zs)).max()
    assert gap <= sketch.resolution


# --- moments ------------------------------------------------------------------


def test_moments_zero_function():
    assert distributions.weighted_moments(zero_additive(), rules.one(), 100) == (0.0, 0.0)


def test_moments_match_prime_sum():
    e, d = distributions.weighted_moments(rules.omega_additive(), rules.one(), 10)
    assert e == pytest.approx(1 / 2 + 1 / 3 + 1 / 5 + 1 / 7)
    assert d * d == pytest.approx(e)


def test_totient_factor_count_moment_trend(table5):
    # E_h for h(p) = Omega(p-1) grows like (log log x)^2 / 2 from above
    counts = sieve.prime_factor_counts(table5.limit, table5.primes, "Omega")
    h = rules.omega_phi(table5, counts)
    ratios = []
    for x in (10**4, 10**5):
        e, _ = distributions.weighted_moments(h, rules.one(), x, table5.primes)
        big_l = math.log(math.log(x))
        ratios.append(e / (0.5 * big_l**2))
    assert ratios[1] < ratios[0]
    assert 1.0 < ratios[1] < 3.0


# --- Gaussian comparison ------------------------------------------------------


def test_gaussian_comparison_distance_decreases(table5):
    rep4 = distributions.gaussian_comparison(rules.omega_additive(), rules.one(),
                                             10**4, table5)
    rep5 = distributions.gaussian_comparison(rules.omega_additive(), rules.one(),
                                             10**5, table5)
    assert 0 < rep5.kolmogorov_distance < rep4.kolmogorov_distance < 1


def test_gaussian_comparison_degenerate(table5):
    with pytest.raises(DegenerateInputError):
        distributions.gaussian_comparison(zero_additive(), rules.one(), 100, table5)


def test_multiplicity_changes_distance_mildly(table5):
    # counting with multiplicity stays within 2x of the distinct count
    rep_o = distributions.gaussian_comparison(rules.omega_additive(), rules.one(),
                                              10**5, table5)
    rep_big = distributions.gaussian_comparison(rules.big_omega_additive(),
                                                rules.one(), 10**5, table5)
    ratio = rep_big.kolmogorov_distance / rep_o.kolmogorov_distance
    assert 0.5 <= ratio <= 2.0


def test_kolmogorov_jump_scan_dominates_dense_grid(table5):
    rep = distributions.gaussian_comparison(rules.omega_additive(), rules.one(),
                                            10**4, table5)
    cdf = distributions.weighted_cdf(rules.omega_additive(), rules.one(), 10**4,
                                     table5)
    zs = np.linspace(-5, 8, 100_001)
    dense = np.abs(cdf.query(rep.E_h + zs * rep.D_h)
                   - distributions.standard_normal_cdf(zs)).max()
    assert rep.kolmogorov_distance >= dense - 1e-12
    assert rep.kolmogorov_distance - dense < 0.01


def test_report_fields(table5):
    rep = distributions.gaussian_comparison(rules.omega_additive(), rules.one(),
                                            10**4, table5)
    assert rep.mu_x_observed == pytest.approx(1.0 / rep.D_h)
    assert rep.claim_envelope == pytest.approx(rep.mu_x_observed + 1.0 / rep.D_h)
    want_tail = 0.0  # omega(p^nu) = 1 also for nu >= 2
    for p in table5.primes[table5.primes <= 100]:
        q = int(p) * int(p)
        while q <= 10**4:
            want_tail += 1.0 / q
            q *= int(p)
    assert rep.prime_power_tail == pytest.approx(want_tail)
    d = rep.as_dict()
    assert set(d) == {"x", "E_h", "D_h", "mu_x_observed", "kolmogorov_distance",
                      "claim_envelope", "prime_power_tail"}


# --- totient factor count -----------------------------------------------------


def test_omega_phi_report_basics(table5):
    counts = sieve.prime_factor_counts(table5.limit, table5.primes, "Omega")
    rep = distributions.omega_phi_report(rules.one(), 10**5, table5, counts=counts)
    assert 0 < rep.kolmogorov_distance < 0.75
    assert rep.claim_envelope == pytest.approx(
        1.0 / math.sqrt(math.log(math.log(10**5))))
    # centering constant is the observed prime moment scale, reported for context
    assert rep.E_h > 0 and rep.D_h > 0


def test_omega_phi_prime_values(table5):
    counts = sieve.prime_factor_counts(table5.limit, table5.primes, "Omega")
    h = rules.omega_phi(table5, counts)
    assert h.value(2, 1) == 0.0  # phi(2) = 1 contributes nothing
    assert h.value(5, 1) == big_omega(totient(5))
    assert h.value(5, 2) == big_omega(totient(25))


# --- weighted variance inequality ----------------------------------------------


def test_tk_zero_additive(table5):
    rep = distributions.turan_kubilius(rules.one(), zero_additive(), 1000, table5)
    assert rep.lhs == 0.0
    assert rep.ratio == 0.0


def test_tk_center_and_spread_match_direct_sums(table4):
    rep = distributions.turan_kubilius(rules.one(), rules.omega_additive(),
                                       10**4, table4)
    want = 0.0
    for p in table4.primes:
        q = int(p)
        while q <= 10**4:
            want += 1.0 / q
            q *= int(p)
    assert rep.center.real == pytest.approx(want)
    assert rep.spread == pytest.approx(want)


def test_tk_scale_equivariance(table4):
    base = distributions.turan_kubilius(rules.one(), rules.omega_additive(),
                                        10**4, table4)
    for c in (3.0, -2.0, 1j):
        scaled = rules.PrimePowerRule(
            "additive", "scaled-omega", lambda p, nu, _c=c: _c,
            lambda ps, _c=c: np.full(len(ps), _c,
                                     dtype=np.complex128 if isinstance(_c, complex) else np.float64),
            real_valued=not isinstance(c, complex))
        rep = distributions.turan_kubilius(rules.one(), scaled, 10**4, table4)
        mag = abs(c) ** 2
        assert rep.lhs == pytest.approx(mag * base.lhs, rel=1e-9)
        assert rep.spread == pytest.approx(mag * base.spread, rel=1e-12)
        assert rep.ratio == pytest.approx(base.ratio, rel=1e-9)


def test_tk_suite_below_frozen_constant(table4):
    # the same 12-member suite the acceptance run uses, at the fit scale
    counts = sieve.prime_factor_counts(table4.limit, table4.primes, "Omega")
    weights = [rules.one(), rules.tau_rho(0.5), rules.tau_rho(1.5),
               rules.r_pow_omega(0.8)]
    additives = [rules.omega_additive(), rules.big_omega_additive(),
                 rules.omega_phi(table4, counts)]
    ratios = [distributions.turan_kubilius(lam, th, 10**4, table4).ratio
              for lam in weights for th in additives]
    assert max(ratios) < 2.5


def test_tk_input_validation(table5):
    with pytest.raises(ValueError):
        distributions.turan_kubilius(rules.omega_additive(), rules.omega_additive(),
                                     100, table5)
    with pytest.raises(ValueError, match="negative"):
        distributions.turan_kubilius(rules.moebius(), rules.omega_additive(),
                                     100, table5)


def test_clt_condition_diagnostics(table5):
    diag = distributions.clt_condition_diagnostics(rules.omega_additive(),
                                                   rules.one(), 10**5)
    assert diag["min_tail_prime_weight"] == 1.0
    assert 0.0 < diag["prime_power_tail"] < 1.0
    assert 0.5 < diag["short_interval_slope_min"] < 1.5
    assert 0 < diag["eps1"] < 1
