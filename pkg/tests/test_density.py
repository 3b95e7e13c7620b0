import numpy as np
import pytest

from picplace.density import DensityGrid, DensityParams, augmented, default_grid, make_fillers, overflow

from conftest import box, design_of


def cos_basis(m, length):
    x = (np.arange(m) + 0.5) * length / m
    w = np.pi * np.arange(m) / length
    return np.cos(np.outer(w, x)), np.sin(np.outer(w, x)), w


def spectral_oracle(rho, W, H):
    """Cosine-series Poisson solve with explicit basis matrices."""
    m = rho.shape[0]
    cx, sx, wu = cos_basis(m, W)
    cy, sy, wv = cos_basis(m, H)
    scale = np.where(np.arange(m) == 0, 1.0, 2.0)
    a = (cx @ rho @ cy.T) * np.outer(scale, scale) / (m * m)
    k2 = wu[:, None] ** 2 + wv[None, :] ** 2
    k2[0, 0] = 1.0
    c = a / k2
    c[0, 0] = 0.0
    psi = cx.T @ c @ cy
    xi_x = sx.T @ (c * wu[:, None]) @ cy
    xi_y = cx.T @ (c * wv[None, :]) @ sy
    return psi, xi_x, xi_y


def test_spectral_solve_matches_explicit_basis(rng):
    g = DensityGrid(120.0, 80.0, 16)
    rho = rng.uniform(0, 2, (16, 16))
    psi, xi_x, xi_y, energy = g.solve_field(rho)
    o_psi, o_x, o_y = spectral_oracle(rho, 120.0, 80.0)
    assert np.allclose(psi, o_psi, atol=1e-9 * np.abs(o_psi).max())
    assert np.allclose(xi_x, o_x, atol=1e-9 * np.abs(o_x).max())
    assert np.allclose(xi_y, o_y, atol=1e-9 * np.abs(o_y).max())
    assert energy == pytest.approx(0.5 * np.sum(rho * o_psi) * g.bin_area)


def test_uniform_density_has_no_field():
    g = DensityGrid(64.0, 64.0, 16)
    psi, xi_x, xi_y, energy = g.solve_field(np.full((16, 16), 0.7))
    assert np.abs(xi_x).max() < 1e-12 and np.abs(xi_y).max() < 1e-12
    assert np.abs(psi).max() < 1e-12 and abs(energy) < 1e-12


def test_centered_charge_is_point_symmetric():
    g = DensityGrid(64.0, 64.0, 16)
    rho = np.zeros((16, 16))
    rho[7:9, 7:9] = 1.0
    _, xi_x, xi_y, _ = g.solve_field(rho)
    assert np.allclose(xi_x[::-1, ::-1], -xi_x, atol=1e-9)
    assert np.allclose(xi_y[::-1, ::-1], -xi_y, atol=1e-9)
    # the field pushes away from the charge
    assert xi_x[12, 8] > 0 and xi_x[3, 8] < 0


def test_one_bin_and_straddle():
    g = DensityGrid(80.0, 80.0, 8)
    d = g.bin_density(np.array([[20.0, 30.0]]), np.array([[10.0, 10.0]]))
    assert d[2, 3] == pytest.approx(1.0)
    assert d.sum() == pytest.approx(1.0)
    d = g.bin_density(np.array([[15.0, 30.0]]), np.array([[10.0, 10.0]]))
    assert d[1, 3] == pytest.approx(0.5) and d[2, 3] == pytest.approx(0.5)


def test_mass_is_conserved(rng):
    g = DensityGrid(200.0, 100.0, 32)
    size = rng.uniform(1, 30, (40, 2))
    halo = rng.uniform(0, 3, 40)
    xy = rng.uniform(0, 1, (40, 2)) * (np.array([200.0, 100.0]) - size - 2 * halo[:, None]) + halo[:, None]
    d = g.bin_density(xy, size, halo)
    stamped = np.sum((size[:, 0] + 2 * halo) * (size[:, 1] + 2 * halo))
    assert d.sum() * g.bin_area == pytest.approx(stamped, rel=1e-12)


def test_small_component_is_widened_not_lost():
    g = DensityGrid(80.0, 80.0, 8)
    d = g.bin_density(np.array([[44.0, 44.0]]), np.array([[2.0, 2.0]]))
    assert d.sum() * g.bin_area == pytest.approx(4.0)
    assert d[4, 4] == pytest.approx(4.0 / 100.0)


def test_energy_gradient_matches_finite_differences(rng):
    g = DensityGrid(160.0, 120.0, 32)
    worst = 0.0
    for _ in range(10):
        n = 12
        size = rng.uniform(4, 25, (n, 2))
        xy = rng.uniform(0, 1, (n, 2)) * (np.array([160.0, 120.0]) - size)
        _, grad, _ = g.energy_and_grad(xy, size, None, 1.0)
        h = 1e-5
        num = np.zeros_like(xy)
        for idx in np.ndindex(xy.shape):
            e = np.zeros_like(xy)
            e[idx] = h
            num[idx] = (g.energy_and_grad(xy + e, size, None, 1.0)[0]
                        - g.energy_and_grad(xy - e, size, None, 1.0)[0]) / (2 * h)
        worst = max(worst, np.max(np.abs(num - grad)) / np.max(np.abs(num)))
    assert worst < 1e-2


def test_energy_normalization():
    g = DensityGrid(80.0, 80.0, 8)
    xy, size = np.array([[10.0, 10.0]]), np.array([[20.0, 20.0]])
    e1, g1, _ = g.energy_and_grad(xy, size, None, 1.0)
    e4, g4, _ = g.energy_and_grad(xy, size, None, 4.0)
    assert e4 == pytest.approx(e1 / 4) and np.allclose(g4, g1 / 4)


def test_augmented_identities():
    grad = np.array([1.0, -2.0])
    v, g = augmented(0.3, grad, 2.0, 0.0)
    assert v == pytest.approx(0.6) and np.allclose(g, 2.0 * grad)
    v, g = augmented(0.3, grad, 0.0, 2000.0)
    assert v == 0.0 and not g.any()
    v, g = augmented(0.3, grad, 1.0, 10.0)
    assert v == pytest.approx(0.3 + 5.0 * 0.09) and np.allclose(g, 4.0 * grad)


def test_overflow_limits():
    g = DensityGrid(100.0, 100.0, 10)
    spread = np.array([[x, y] for x in range(0, 100, 20) for y in range(0, 100, 20)], dtype=float)
    size = np.full((len(spread), 2), 10.0)
    area = float(size.prod(axis=1).sum())
    assert overflow(g.bin_density(spread, size), 1.0, g.bin_area, area) == 0.0
    stacked = np.full((100, 2), 40.0)
    size = np.full((100, 2), 10.0)
    ovf = overflow(g.bin_density(stacked, size), 1.0, g.bin_area, 100 * 100.0)
    assert ovf == pytest.approx(0.99)


def test_fillers_take_flipped_aspect():
    d = design_of([box(f"m{k}", w=20.0, h=10.0) for k in range(4)], width=200.0, height=200.0)
    f = make_fillers(d, DensityParams())
    assert f.height / f.width == pytest.approx(2.0)
    assert f.area == pytest.approx(200.0 * 200.0 - 4 * 200.0)


def test_filler_aspect_is_clamped():
    d = design_of([box("m", w=5.0, h=40.0), box("k", w=5.0, h=40.0)], width=300.0, height=300.0)
    f = make_fillers(d, DensityParams())
    assert f.height / f.width == pytest.approx(5.0)


def test_no_whitespace_no_fillers():
    d = design_of([box("m", w=10.0, h=10.0, x=0.0, y=0.0)], width=10.0, height=10.0)
    assert make_fillers(d, DensityParams()).count == 0


def test_default_grid_and_params():
    assert default_grid(10) == 64
    assert default_grid(10 ** 6) == 1024
    with pytest.raises(ValueError):
        DensityParams(grid=12)
    with pytest.raises(ValueError):
        DensityParams(target_density=1.5)
