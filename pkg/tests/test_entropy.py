import math

import numpy as np
import pytest
from oracles import (
    GAUSSIAN_DEHESA,
    GAUSSIAN_FISHER,
    GAUSSIAN_SHANNON,
    gaussian_radial_density,
)

from ueglab.entropy import (
    GriddedDensity,
    MomentumDistribution,
    OccupationList,
    PairHistogram,
    collins_sum,
    dehesa_measure,
    entropy_density,
    fisher_weizsacker,
    local_wavevector,
    mutual_information,
    shannon_continuous,
    shannon_discrete,
    von_neumann,
    ziesche_entropy,
)


@pytest.fixture(scope="module")
def gaussian():
    r, rho = gaussian_radial_density()
    return GriddedDensity.radial(r, rho, norm=1.0)


# ------------------------------------------------------------------- discrete


def test_shannon_discrete_three_bits():
    assert shannon_discrete(np.full(8, 0.125), log_base=2) == 3.0


def test_shannon_discrete_certainty_and_coin():
    assert shannon_discrete([1.0]) == 0.0
    assert shannon_discrete([0.5, 0.5], log_base=math.e) == pytest.approx(math.log(2), rel=1e-12)


def test_shannon_discrete_validation():
    with pytest.raises(ValueError):
        shannon_discrete([0.5, 0.4])
    with pytest.raises(ValueError):
        shannon_discrete([1.2, -0.2])


def test_shannon_discrete_uniform_is_maximal():
    rng = np.random.default_rng(7)
    for n in (2, 5, 9):
        uniform = shannon_discrete(np.full(n, 1.0 / n), log_base=math.e)
        assert uniform == pytest.approx(math.log(n), rel=1e-12)
        for _ in range(20):
            p = rng.dirichlet(np.ones(n))
            assert shannon_discrete(p, log_base=math.e) <= uniform + 1e-12


def test_von_neumann_diagonal_cases():
    assert von_neumann([1.0]) == 0.0
    assert von_neumann([0.5, 0.5]) == pytest.approx(math.log(2), rel=1e-12)
    assert von_neumann(np.full(6, 1 / 6)) == pytest.approx(math.log(6), rel=1e-12)


# ----------------------------------------------------------------- continuous


def test_uniform_shannon_closed_form():
    assert shannon_continuous(GriddedDensity.uniform(1.0, 1.0, 1.0)) == 0.0
    n, v = 5.0, 12.0
    d = GriddedDensity.uniform(n / v, v, n)
    assert shannon_continuous(d) == pytest.approx(-n * math.log(n / v), rel=1e-14)


def test_gaussian_shannon(gaussian):
    assert shannon_continuous(gaussian) == pytest.approx(GAUSSIAN_SHANNON, abs=1e-6)
    assert GAUSSIAN_SHANNON == pytest.approx(4.256816, abs=1e-6)


def test_norm_validation():
    r = np.linspace(1e-6, 5.0, 50)
    rho = np.exp(-r)
    with pytest.raises(ValueError, match="norm"):
        GriddedDensity.radial(r, rho, norm=1.0)
    with pytest.raises(ValueError):
        GriddedDensity.uniform(1.0, 2.0, 1.0)


def test_entropy_density_values(gaussian):
    assert entropy_density(GriddedDensity.uniform(1.0, 2.0, 2.0)) == 0.0
    d = GriddedDensity.uniform(math.e, 1.0, math.e)
    assert float(entropy_density(d)) == pytest.approx(-math.e, rel=1e-14)
    s = entropy_density(gaussian)
    assert gaussian.integrate(s) == pytest.approx(shannon_continuous(gaussian), rel=1e-12)


def test_local_wavevector(gaussian):
    assert local_wavevector(GriddedDensity.uniform(0.7, 3.0, 2.1)) == 0.0
    k = local_wavevector(gaussian)
    i = int(np.argmin(np.abs(gaussian.r - 1.0)))
    assert k[i] == pytest.approx(gaussian.r[i], abs=1e-6)


def test_local_wavevector_scaling(gaussian):
    lam = 1.6
    scaled = GriddedDensity.radial(
        gaussian.r / lam, lam**3 * gaussian.rho, norm=1.0
    )
    k_orig = local_wavevector(gaussian)
    k_scaled = local_wavevector(scaled)
    np.testing.assert_allclose(k_scaled, lam * k_orig, rtol=1e-9, atol=1e-9)


def test_fisher_uniform_zero_and_gaussian(gaussian):
    assert fisher_weizsacker(GriddedDensity.uniform(0.3, 10.0, 3.0)) == 0.0
    assert fisher_weizsacker(gaussian) == pytest.approx(GAUSSIAN_FISHER, abs=1e-6)
    assert fisher_weizsacker(gaussian) >= 0.0


def test_fisher_requires_positive_density():
    r = np.linspace(0.1, 3.0, 100)
    rho = np.linspace(1.0, 0.0, 100)
    d = GriddedDensity.radial(r, rho, norm=float(np.trapezoid(4 * np.pi * r**2 * rho, r)))
    with pytest.raises(ValueError, match="rho > 0"):
        fisher_weizsacker(d)
    with pytest.raises(ValueError, match="rho > 0"):
        local_wavevector(d)


def test_scaling_laws(gaussian):
    # analytic regridding rho -> lam^3 rho(lam r): S -= 3 log lam, I *= lam^2
    lam = 2.3
    scaled = GriddedDensity.radial(gaussian.r / lam, lam**3 * gaussian.rho, norm=1.0)
    s0, s1 = shannon_continuous(gaussian), shannon_continuous(scaled)
    assert s1 == pytest.approx(s0 - 3.0 * math.log(lam), abs=1e-8)
    i0, i1 = fisher_weizsacker(gaussian), fisher_weizsacker(scaled)
    assert i1 == pytest.approx(lam**2 * i0, rel=1e-8)
    j0, j1 = dehesa_measure(s0), dehesa_measure(s1)
    assert j1 == pytest.approx(j0 / lam**2, rel=1e-8)


def test_dehesa_values(gaussian):
    assert dehesa_measure(0.0) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)
    s = shannon_continuous(gaussian.unit_normalized())
    assert dehesa_measure(s) == pytest.approx(GAUSSIAN_DEHESA, abs=1e-6)
    # monotonicity
    ss = np.linspace(-2, 4, 20)
    js = [dehesa_measure(x) for x in ss]
    assert np.all(np.diff(js) > 0)


# --------------------------------------------------------- mutual information


def test_mutual_information_product_distribution():
    a = np.array([0.2, 0.5, 0.3])
    b = np.array([0.1, 0.4, 0.25, 0.25])
    counts = np.outer(a, b) * 10_000.0
    h = PairHistogram(counts, np.arange(4.0), np.arange(5.0))
    assert mutual_information(h) == pytest.approx(0.0, abs=1e-12)


def test_mutual_information_sampled_product_within_bias_bound():
    rng = np.random.default_rng(0)
    n = 20_000
    x = rng.integers(0, 4, n)
    y = rng.integers(0, 4, n)
    counts, _, _ = np.histogram2d(x, y, bins=[np.arange(5), np.arange(5)])
    h = PairHistogram(counts, np.arange(5.0), np.arange(5.0))
    bias_bound = (16 - 1) ** 2 / (2.0 * n)
    i = mutual_information(h)
    assert 0.0 <= i <= 5.0 * bias_bound


def test_mutual_information_perfect_correlation():
    h = PairHistogram(np.diag([50.0, 50.0]), np.arange(3.0), np.arange(3.0))
    assert mutual_information(h) == pytest.approx(math.log(2), rel=1e-12)


def test_mutual_information_entropy_identity():
    rng = np.random.default_rng(13)
    counts = rng.integers(0, 40, (5, 6)).astype(float)
    h = PairHistogram(counts, np.arange(6.0), np.arange(7.0))
    def ent(p):
        p = p[p > 0]
        return -float(np.sum(p * np.log(p)))

    p12 = counts / counts.sum()
    s1, s2, s12 = ent(p12.sum(1)), ent(p12.sum(0)), ent(p12.ravel())
    assert mutual_information(h) == pytest.approx(s1 + s2 - s12, abs=1e-12)
    assert mutual_information(h) >= 0.0


def test_mutual_information_empty_rejected():
    h = PairHistogram(np.zeros((2, 2)), np.arange(3.0), np.arange(3.0))
    with pytest.raises(ValueError, match="empty"):
        mutual_information(h)


# ---------------------------------------------------------- occupations / momentum


def test_collins_sum_cases():
    assert collins_sum(OccupationList(np.array([1.0, 1.0, 0.0, 0.0]), scale=2.7)) == 0.0
    half = OccupationList(np.full(4, 0.5), scale=1.0)
    assert collins_sum(half) == pytest.approx(-2.0 * math.log(2), abs=1e-12)
    halved = OccupationList(np.full(4, 0.5), scale=0.5)
    assert collins_sum(halved) == pytest.approx(0.5 * collins_sum(half), rel=1e-14)
    with pytest.raises(ValueError):
        OccupationList(np.array([0.5, 1.2]), scale=1.0)


def test_ziesche_ideal_step_is_zero():
    k = np.array([0.0, 1.0, 1.0 + 1e-13, 2.0])
    vals = np.array([1.0, 1.0, 0.0, 0.0])
    assert ziesche_entropy(MomentumDistribution(k, vals)) == 0.0


def test_ziesche_smoothed_step():
    eps = 1e-13
    k = np.array([0.0, 0.9, 0.9 + eps, 1.1, 1.1 + eps, 2.0])
    vals = np.array([1.0, 1.0, 0.5, 0.5, 0.0, 0.0])
    s = ziesche_entropy(MomentumDistribution(k, vals))
    assert s == pytest.approx(0.1 * math.log(2), abs=1e-12)


def test_momentum_distribution_validation():
    with pytest.raises(ValueError, match="k_max"):
        MomentumDistribution(np.array([0.0, 0.5, 1.0]), np.array([1.0, 0.5, 0.0]))
    with pytest.raises(ValueError):
        MomentumDistribution(np.array([0.0, 1.0, 2.0]), np.array([1.0, -0.1, 0.0]))
