import numpy as np
import pytest

from crsolve import geometry as G
from crsolve.errors import NonIntegrableError, PoleProximityError


def test_chart_anchor_values():
    # frozen by hand from the chart algebra
    z1 = np.array([0.0, 0.0, 1.0], dtype=complex)
    z2 = np.array([1.0, 1j, 0.0], dtype=complex)
    z, t = G.sphere_to_heisenberg(z1, z2)
    np.testing.assert_allclose(z, [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(t, [0, 1, 0], atol=1e-15)


def test_inverse_chart_closed_form():
    # zeta2 = (i - w)/(i + w), zeta1 = 2iz/(i + w) with w = t + i|z|^2
    rng = np.random.default_rng(3)
    z = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    t = 2.0 * rng.standard_normal(50)
    b1, b2 = G.heisenberg_to_sphere(z, t)
    w = t + 1j * np.abs(z) ** 2
    np.testing.assert_allclose(b2, (1j - w) / (1j + w), atol=1e-14)
    np.testing.assert_allclose(b1, 2j * z / (1j + w), atol=1e-14)
    np.testing.assert_allclose(np.abs(b1) ** 2 + np.abs(b2) ** 2, 1.0, atol=1e-13)


def test_round_trip_random():
    rng = np.random.default_rng(11)
    v = rng.standard_normal((4, 500))
    norm = np.sqrt((v ** 2).sum(axis=0))
    z1 = (v[0] + 1j * v[1]) / norm
    z2 = (v[2] + 1j * v[3]) / norm
    keep = np.abs(1 + z2) > 1e-6
    z, t = G.sphere_to_heisenberg(z1[keep], z2[keep])
    b1, b2 = G.heisenberg_to_sphere(z, t)
    assert np.abs(b1 - z1[keep]).max() < 1e-10
    assert np.abs(b2 - z2[keep]).max() < 1e-10


def test_pole_raises():
    with pytest.raises(PoleProximityError):
        G.sphere_to_heisenberg(np.array([0j]), np.array([-1.0 + 0j]))
    # just inside the default tolerance band
    with pytest.raises(PoleProximityError):
        G.sphere_to_heisenberg(np.array([0j]), np.array([-1.0 + 1e-9j]))


def test_cr_weight_values():
    # h = (1 + zeta2)/2 composed with the chart: frozen anchors
    np.testing.assert_allclose(G.cr_weight(np.array([1.0 + 0j])), [0.5])
    np.testing.assert_allclose(G.cr_weight(np.array([1j])), [(1 - 1j) / 2])
    z = np.array([0.0 + 0j])
    t = np.array([0.0])
    np.testing.assert_allclose(G.cr_weight_chart(z, t), [0.5])
    np.testing.assert_allclose(G.cr_weight_chart(np.array([1 + 0j]), t), [1.0])


def test_conformal_factor_matches_weight_modulus():
    rng = np.random.default_rng(5)
    v = rng.standard_normal((4, 200))
    norm = np.sqrt((v ** 2).sum(axis=0))
    z2 = (v[2] + 1j * v[3]) / norm
    keep = np.abs(1 + z2) > 1e-3
    z2 = z2[keep]
    np.testing.assert_allclose(G.conformal_factor(z2), np.abs(G.cr_weight(z2)),
                               rtol=1e-13)
    assert (G.conformal_factor(z2) >= 0.5 - 1e-13).all()


def test_chart_weight_consistency():
    # h o chart agrees with the sphere-side formula
    rng = np.random.default_rng(7)
    z = rng.standard_normal(100) + 1j * rng.standard_normal(100)
    t = 3.0 * rng.standard_normal(100)
    z1, z2 = G.heisenberg_to_sphere(z, t)
    np.testing.assert_allclose(G.cr_weight_chart(z, t), G.cr_weight(z2),
                               atol=1e-12)
    np.testing.assert_allclose(G.conformal_factor_chart(z, t),
                               G.conformal_factor(z2), atol=1e-12)
    np.testing.assert_allclose(G.cr_weight_chart(z, t),
                               (1 + np.abs(z) ** 2 - 1j * t) / 2, atol=1e-14)


def test_gauge():
    z = np.array([1.0 + 0j, 0.0, 2.0 + 0j])
    t = np.array([0.0, 4.0, 3.0])
    np.testing.assert_allclose(G.gauge(z, t), [1.0, 2.0, (16 + 9) ** 0.25])


def test_box_rule_axes_cover_box():
    box = G.BoxRule(radius=5.0, nodes=40)
    (xy, wxy), (tt, wt) = box.axes()
    assert np.abs(xy).max() <= 5.0 + 1e-12
    assert np.abs(tt).max() <= 25.0 + 1e-12
    # weights integrate constants over the full extent
    np.testing.assert_allclose(wxy.sum(), 10.0, rtol=1e-12)
    np.testing.assert_allclose(wt.sum(), 50.0, rtol=1e-12)


def test_h1_lp_norm_closed_form():
    # |f|^2 rho_H integrates to the total sphere measure for f = G^{-2} o chart
    def f(z, t):
        return 4.0 / ((1.0 + np.abs(z) ** 2) ** 2 + t ** 2)

    res = G.h1_lp_norm(f, 2)
    assert abs(res.value - 4 * np.pi) / (4 * np.pi) < 1e-3
    assert res.tail_estimate < 1e-2
    assert 0.0 <= res.outer_shell_fraction < 0.01


def test_h1_lp_norm_gaussian():
    # int exp(-2(|z|^2+t^2)) * 4 = 4 * (pi/2) * sqrt(pi/2)
    def f(z, t):
        return np.exp(-(np.abs(z) ** 2 + t ** 2))

    exact = (4.0 * (np.pi / 2) * np.sqrt(np.pi / 2)) ** 0.5
    res = G.h1_lp_norm(f, 2)
    np.testing.assert_allclose(res.value, exact, rtol=1e-8)


def test_h1_lp_norm_rejects_nondecaying():
    with pytest.raises(NonIntegrableError):
        G.h1_lp_norm(lambda z, t: np.ones_like(t, dtype=complex), 2)


@pytest.mark.parametrize("p", [4.0 / 3.0, 2.0, 4.0])
def test_norm_identity_all_exponents(p):
    # ||f||_p on the group vs ||G^{4/p} f o chart||_p on the sphere
    from crsolve.quadrature import build_grid, grid_function, sphere_lp_norm

    def f(z, t):
        return G.conformal_factor_chart(z, t) ** (-4.0 / p)

    lhs = G.h1_lp_norm(f, p).value
    rhs = (16 * np.pi ** 2) ** (1.0 / p)   # sphere integrand is exactly 1
    assert abs(lhs - rhs) / rhs < 1e-3

    # a second, non-radial integrand through the generic grid path
    grid = build_grid(4)

    def g(z, t):
        z1, _ = G.heisenberg_to_sphere(z, t)
        return G.conformal_factor_chart(z, t) ** (-4.0 / p) * (1 + np.abs(z1) ** 2)

    lhs = G.h1_lp_norm(g, p).value
    z, t = G.sphere_to_heisenberg(grid.zeta1, grid.zeta2)
    vals = G.conformal_factor(grid.zeta2) ** (4.0 / p) * g(z, t)
    rhs = sphere_lp_norm(grid_function(grid, vals), p, grid)
    assert abs(lhs - rhs) / rhs < 1e-3
