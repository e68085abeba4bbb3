import numpy as np
import pytest

from ueglab.cell import SimulationCell, density_to_rs, minimum_image, rs_to_density, wrap_positions


def test_density_to_rs_closed_form():
    assert density_to_rs(2.0) == pytest.approx((3.0 / (8.0 * np.pi)) ** (1.0 / 3.0), rel=1e-12)
    assert density_to_rs(2.0) == pytest.approx(0.49237, abs=1e-5)
    assert density_to_rs(0.029842) == pytest.approx(2.0, abs=1e-4)


def test_rs_to_density_closed_form():
    assert rs_to_density(0.49237) == pytest.approx(2.0, abs=1e-4)
    assert rs_to_density(1.0) == pytest.approx(0.238732, abs=1e-6)


@pytest.mark.parametrize("rho", [0.002, 0.1, 1.0, 2.0])
def test_roundtrip(rho):
    assert rs_to_density(density_to_rs(rho)) == pytest.approx(rho, rel=1e-12)
    rs = density_to_rs(rho)
    assert density_to_rs(rs_to_density(rs)) == pytest.approx(rs, rel=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_rejected(bad):
    with pytest.raises(ValueError):
        density_to_rs(bad)
    with pytest.raises(ValueError):
        rs_to_density(bad)


def test_cell_consistency():
    cell = SimulationCell.from_density(64, 0.1)
    assert cell.density == pytest.approx(0.1, rel=1e-12)
    assert cell.wigner_seitz == pytest.approx(density_to_rs(0.1), rel=1e-12)
    assert cell.volume == pytest.approx(cell.edge_length**3, rel=1e-12)
    rs_cell = SimulationCell.from_wigner_seitz(16, 2.0)
    assert rs_cell.wigner_seitz == pytest.approx(2.0, rel=1e-12)


def test_cell_validation():
    with pytest.raises(ValueError):
        SimulationCell(edge_length=-1.0, n_particles=4)
    with pytest.raises(ValueError):
        SimulationCell(edge_length=1.0, n_particles=0)


def test_minimum_image_wrapping():
    L = 3.0
    cell = SimulationCell(edge_length=L, n_particles=1)
    np.testing.assert_allclose(
        minimum_image(np.array([0.6 * L, 0.0, 0.0]), cell), [-0.4 * L, 0.0, 0.0], atol=1e-14
    )
    np.testing.assert_allclose(minimum_image(np.zeros(3), cell), np.zeros(3))
    # half-open convention: +L/2 maps to -L/2
    np.testing.assert_allclose(
        minimum_image(np.array([L / 2, 0.0, 0.0]), cell), [-L / 2, 0.0, 0.0], atol=1e-14
    )


def test_minimum_image_idempotent_and_bounded():
    rng = np.random.default_rng(5)
    L = 2.7
    d = rng.uniform(-10 * L, 10 * L, (200, 3))
    once = minimum_image(d, L)
    np.testing.assert_array_equal(minimum_image(once, L), once)
    assert np.all(once >= -L / 2) and np.all(once < L / 2)
    assert np.all(np.linalg.norm(once, axis=1) <= np.sqrt(3) / 2 * L + 1e-12)
    # wrapping preserves the equivalence class modulo L
    np.testing.assert_allclose((once - d) / L, np.round((once - d) / L), atol=1e-9)


def test_wrap_positions():
    L = 2.0
    p = wrap_positions(np.array([[2.5, -0.5, 1.0]]), L)
    np.testing.assert_allclose(p, [[0.5, 1.5, 1.0]])
    assert np.all(p >= 0) and np.all(p < L)
