import math

import numpy as np
import pytest
from scipy import stats

from ecf_toolkit import rng, tm
from ecf_toolkit.ecf import EcfTable, InvalidEcfError, compute_tau, random_spectral_measure, random_valid_ecf
from ecf_toolkit.models import independent_ecf, sqrt_ecf
from ecf_toolkit.semigroup import GroundSet


def test_tm_from_invalid_ecf_raises():
    with pytest.raises(InvalidEcfError):
        tm.tm_from_ecf(EcfTable(GroundSet.of_size(2), [0.0, 1.0, 1.0, 2.5]))


def test_spectral_measure_of_tm():
    p = tm.tm_from_ecf(sqrt_ecf(GroundSet.of_size(3)))
    sm = p.spectral_measure()
    assert sm.q == 7
    np.testing.assert_allclose(sm.atoms.sum(axis=1), 1.0, atol=1e-15)


def test_independent_tm_has_singleton_atoms_only():
    p = tm.tm_from_ecf(independent_ecf(GroundSet.of_size(3)))
    assert p.atom_masks().tolist() == [1, 2, 4]


def test_neg_log_cdf_matches_maxlinear_formula():
    ecf = random_valid_ecf(4, 5, seed=3)
    p = tm.tm_from_ecf(ecf)
    x = np.array([0.5, 2.0, 1.0, 3.0])
    assert tm.tm_neg_log_cdf(p, x) == pytest.approx(tm.maxlinear_neg_log_cdf(p.spectral_measure(), x), rel=1e-14)


def test_neg_log_cdf_on_diagonal_is_theta():
    ecf = random_valid_ecf(3, 4, seed=1)
    p = tm.tm_from_ecf(ecf)
    # P(X_A <= x) = exp(-theta(A)/x): infinite coordinates drop out
    for s in range(1, 8):
        x = np.where([(s >> i) & 1 for i in range(3)], 2.0, np.inf)
        assert tm.tm_neg_log_cdf(p, x) == pytest.approx(ecf[s] / 2.0, rel=1e-14)


def test_stable_tail_dependence_on_indicators():
    ecf = random_valid_ecf(3, 6, seed=5)
    p = tm.tm_from_ecf(ecf)
    for s in range(1, 8):
        ind = np.array([(s >> i) & 1 for i in range(3)], dtype=float)
        assert tm.stable_tail_dependence(p, ind) == pytest.approx(ecf[s], abs=1e-14)
    with pytest.raises(ValueError):
        tm.stable_tail_dependence(p, np.zeros(3))
    with pytest.raises(ValueError):
        tm.stable_tail_dependence(p, np.array([1.0, -1.0, 0.0]))


def test_bivariate_closed_form():
    eta = 0.3
    ecf = EcfTable(GroundSet.of_size(2), [0.0, 1.0, 1.0, 1.0 + eta])
    p = tm.tm_from_ecf(ecf)
    for x, y in [(1.0, 2.0), (3.0, 0.5), (1.0, 1.0)]:
        assert tm.tm_neg_log_cdf(p, [x, y]) == pytest.approx(tm.tm_bivariate_neg_log_cdf(eta, x, y), rel=1e-14)
    with pytest.raises(ValueError):
        tm.tm_bivariate_neg_log_cdf(1.5, 1.0, 1.0)


def test_cdf_arguments_must_be_positive():
    p = tm.tm_from_ecf(sqrt_ecf(GroundSet.of_size(2)))
    with pytest.raises(ValueError, match="positive"):
        tm.tm_neg_log_cdf(p, [0.0, 1.0])
    with pytest.raises(ValueError):
        tm.tm_neg_log_cdf(p, [1.0, 1.0, 1.0])


def test_simulation_is_thread_invariant():
    p = tm.tm_from_ecf(random_valid_ecf(3, 4, seed=0))
    n = 3 * rng.CHUNK + 17
    a = tm.simulate_tm(p, n, seed=42, threads=1).values
    b = tm.simulate_tm(p, n, seed=42, threads=4).values
    np.testing.assert_array_equal(a, b)
    assert a.shape == (n, 3)
    assert not np.array_equal(a, tm.simulate_tm(p, n, seed=43, threads=1).values)


def test_simulated_margins_are_unit_frechet():
    sm = random_spectral_measure(2, 3, seed=1)
    batch = tm.simulate_maxlinear(sm, 50_000, seed=7)
    for i in range(2):
        d = stats.kstest(batch.values[:, i], lambda z: np.exp(-1.0 / z)).statistic
        assert d < 1.63 / math.sqrt(batch.n)


def test_empirical_ecf_formula():
    vals = np.array([[1.0, 2.0], [4.0, 0.5]])
    batch = tm.SampleBatch(vals, seed=0, labels=("a", "b"))
    est, se = tm.empirical_ecf(batch, 0b11)
    assert est == pytest.approx(2 / (1 / 2.0 + 1 / 4.0))
    assert se == pytest.approx(est / math.sqrt(2))
    with pytest.raises(ValueError):
        tm.empirical_ecf(batch, 0)


def test_empirical_table_size_limit():
    p = tm.tm_from_ecf(sqrt_ecf(GroundSet.of_size(3)))
    batch = tm.simulate_tm(p, 1000, seed=1)
    assert sorted(tm.empirical_ecf_table(batch, max_size=2)) == [1, 2, 3, 4, 5, 6]


def test_sample_csv_roundtrip():
    p = tm.tm_from_ecf(sqrt_ecf(GroundSet(("x", "y"))))
    batch = tm.simulate_tm(p, 50, seed=3)
    back = tm.SampleBatch.from_csv(batch.to_csv(), batch.metadata())
    np.testing.assert_array_equal(back.values, batch.values)
    assert back.labels == ("x", "y") and back.seed == 3
    with pytest.raises(ValueError, match="positive"):
        tm.SampleBatch.from_csv("x,y\n1,-1\n")


def test_continuity_bound_values():
    tight, linear = tm.continuity_bound(0.5, 2.0)
    assert tight == pytest.approx(2 * (1 - math.exp(-0.25)))
    assert linear == pytest.approx(0.5)
    assert tight <= linear
    assert tm.continuity_bound(0.0, 1.0) == (0.0, 0.0)
    with pytest.raises(ValueError):
        tm.continuity_bound(0.1, 0.0)


def test_tau_clipping_on_roundoff():
    # a valid table whose tau has roundoff-level negatives still simulates
    ecf = sqrt_ecf(GroundSet.of_size(4))
    p = tm.tm_from_ecf(ecf)
    assert (p.tau.tau >= 0).all()
    np.testing.assert_allclose(p.tau.tau, np.clip(compute_tau(ecf).tau, 0, None))
