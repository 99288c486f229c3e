import math

import mpmath
import numpy as np
import pytest

from ecf_toolkit import models
from ecf_toolkit.ecf import validate_ecf
from ecf_toolkit.semigroup import GroundSet


def union_length(intervals):
    total, end = 0.0, -math.inf
    for lo, hi in sorted(intervals):
        if hi > end:
            total += hi - max(lo, end)
            end = hi
    return total


def test_simple_models():
    g = GroundSet.of_size(3)
    assert models.independent_ecf(g)[0b111] == 3.0
    assert models.identical_ecf(g)[0b101] == 1.0
    assert models.sqrt_ecf(g)[0b011] == math.sqrt(2)
    for f in (models.independent_ecf, models.identical_ecf, models.sqrt_ecf):
        assert validate_ecf(f(g)).passed


def test_ball_ell():
    assert models.ball_ell([3.0, 4.0]) == 5.0
    with pytest.raises(ValueError):
        models.ball_ell([-1.0, 0.0])


def test_box_kernel_volume():
    models.BoxKernel((0.0, 0.0), (2.0, 0.5))
    with pytest.raises(ValueError, match="volume"):
        models.BoxKernel((0.0,), (2.0,))
    assert models.BoxKernel.unit(3).dim == 3


def test_m3_box_one_dimensional_union_lengths():
    xs = [0.0, 0.3, 1.7, 2.1]
    g = GroundSet.of_size(4, np.array(xs))
    ecf = models.m3_box_ecf(g, models.BoxKernel.unit(1))
    for s in range(1, 16):
        expect = union_length([(xs[i], xs[i] + 1) for i in range(4) if s >> i & 1])
        assert ecf[s] == pytest.approx(expect, abs=1e-14)
    assert validate_ecf(ecf).passed


def test_m3_box_two_dimensional_pair():
    g = GroundSet.of_size(2, np.array([[0.0, 0.0], [0.25, -0.5]]))
    ecf = models.m3_box_ecf(g, models.BoxKernel.unit(2))
    assert ecf[0b11] == pytest.approx(2 - 0.75 * 0.5, abs=1e-15)


def test_m3_needs_matching_dimension():
    g = GroundSet.of_size(2, np.zeros((2, 2)))
    with pytest.raises(ValueError, match="dimensional"):
        models.m3_box_ecf(g, models.BoxKernel.unit(1))
    with pytest.raises(ValueError, match="coordinates"):
        models.m3_box_ecf(GroundSet.of_size(2), models.BoxKernel.unit(1))


def test_variogram_spec():
    v = models.VariogramSpec(2.0, 1.0)
    assert v(np.array([[3.0, 4.0]]))[0] == 10.0
    with pytest.raises(ValueError):
        models.VariogramSpec(1.0, 2.5)
    with pytest.raises(ValueError):
        models.VariogramSpec(1.0, 1.0, kind="exponential")


@pytest.mark.parametrize("gamma", [0.0, 1e-8, 0.3, 1.0, 4.0, 17.5, 200.0])
def test_br_bivariate_theta_against_mpmath(gamma):
    mpmath.mp.dps = 40
    expect = 1 + mpmath.erf(mpmath.sqrt(mpmath.mpf(gamma) / 8))
    assert models.br_bivariate_theta(gamma) == pytest.approx(float(expect), rel=1e-15, abs=1e-16)


def test_br_bivariate_limits():
    assert models.br_bivariate_theta(math.inf) == 2.0
    with pytest.raises(ValueError):
        models.br_bivariate_theta(-1.0)


@pytest.mark.parametrize("gamma", [0.01, 0.5, 2.0, 9.0])
def test_hr_equal_arguments(gamma):
    for x in (0.3, 1.0, 7.0):
        assert models.hr_bivariate_neg_log_cdf(gamma, x, x) == pytest.approx(
            models.br_bivariate_theta(gamma) / x, rel=1e-12
        )


def test_hr_against_mpmath():
    mpmath.mp.dps = 40
    gamma, x1, x2 = 1.7, 0.8, 2.3
    a = mpmath.sqrt(gamma)
    r = mpmath.log(mpmath.mpf(x2) / x1) / a
    expect = mpmath.ncdf(a / 2 + r) / x1 + mpmath.ncdf(a / 2 - r) / x2
    assert models.hr_bivariate_neg_log_cdf(gamma, x1, x2) == pytest.approx(float(expect), rel=1e-14)


def test_hr_limits_and_ell():
    assert models.hr_bivariate_neg_log_cdf(0.0, 1.0, 2.0) == 1.0
    assert models.hr_bivariate_neg_log_cdf(math.inf, 1.0, 2.0) == 1.5
    assert models.hr_bivariate_ell(3.0, [0.0, 2.0]) == 2.0
    assert models.hr_bivariate_ell(3.0, [1.0, 1.0]) == pytest.approx(models.br_bivariate_theta(3.0))
    with pytest.raises(ValueError):
        models.hr_bivariate_neg_log_cdf(1.0, 0.0, 1.0)


def test_br_mc_two_sites():
    g = GroundSet.of_size(2, np.array([[0.0], [1.0]]))
    v = models.VariogramSpec(2.0, 1.0)
    est = models.br_ecf_mc(g, v, 40_000, seed=5)
    assert abs(est.raw[0b11] - models.br_bivariate_theta(2.0)) <= 4 * est.se[0b11]
    assert validate_ecf(est.ecf).passed
    assert est.ecf[0b01] == 1.0 and est.ecf[0b10] == 1.0


def test_br_mc_thread_invariant():
    g = GroundSet.of_size(3, np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]))
    v = models.VariogramSpec(1.0, 1.5)
    a = models.br_ecf_mc(g, v, 40_000, seed=1, threads=1)
    b = models.br_ecf_mc(g, v, 40_000, seed=1, threads=3)
    np.testing.assert_array_equal(a.ecf.theta, b.ecf.theta)
    np.testing.assert_array_equal(a.raw, b.raw)


def test_br_mc_needs_coordinates():
    with pytest.raises(ValueError):
        models.br_ecf_mc(GroundSet.of_size(2), models.VariogramSpec(1.0, 1.0), 100, 0)


def test_gamma_eight_reference_value():
    # 1 + erf(1) = 2 Phi(sqrt 2)
    assert models.br_bivariate_theta(8.0) == pytest.approx(1.8427007929497148, rel=1e-15)
    assert models.hr_bivariate_neg_log_cdf(8.0, 1.0, 1.0) == pytest.approx(1.8427007929497148, rel=1e-14)
