"""Tests of the oracle toolbox itself: finite differences, random point and
coefficient generators, cutoff families, and the volume-density checks."""

import numpy as np
import pytest

from crsolve import basis as B
from crsolve import geometry as G
from crsolve import operators as O
from crsolve import testkit as T


def test_fd_step_validation():
    z = np.array([0.3 + 0.1j])
    t = np.array([0.2])
    f = lambda z_, t_: z_ * t_
    for bad in (0.0, 1e-9, 0.1, -1e-5):
        with pytest.raises(ValueError):
            T.finite_difference("zbar", f, z, t, step=bad)
    with pytest.raises(ValueError):
        T.finite_difference("curl", f, z, t)


def test_chart_fd_accuracy():
    rng = np.random.default_rng(2)
    z = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    t = rng.standard_normal(30)

    # Zbar(z conj(z)^2 + i t conj(z)) = 2 z conj(z) + i t + i z (conj(z)^2 -> via -iz d/dt)
    f = lambda z_, t_: z_ * np.conj(z_) ** 2 + 1j * t_ * np.conj(z_)
    exact = (2.0 * z * np.conj(z) + 1j * t
             - 1j * z * (1j * np.conj(z)))
    got = T.zbar_fd(f, z, t)
    assert np.abs(got - exact).max() < 1e-8

    # central differences: halving the step shrinks the error ~4x for a
    # function with nonvanishing third derivatives
    g = lambda z_, t_: np.exp(np.conj(z_)) * np.cos(t_)
    exact_g = np.exp(np.conj(z)) * (np.cos(t) + 1j * z * np.sin(t))
    e1 = np.abs(T.zbar_fd(g, z, t, step=8e-4) - exact_g).max()
    e2 = np.abs(T.zbar_fd(g, z, t, step=4e-4) - exact_g).max()
    assert e2 < e1 / 2.5

    # the three tags agree with their defining combinations
    fz, fzbar, ft = T.chart_partials(g, z, t)
    assert np.abs(T.z_fd(g, z, t) - (fz + 1j * np.conj(z) * ft)).max() < 1e-12
    assert np.abs(T.zbar_star_fd(g, z, t) + T.z_fd(g, z, t)).max() < 1e-12


def test_ambient_fd_matches_mono_action():
    monos = B.monomials(3)
    rng = np.random.default_rng(4)
    c = rng.standard_normal(len(monos)) + 1j * rng.standard_normal(len(monos))
    z1, z2 = T.uniform_sphere_points(25, seed=6)

    def ev(cc, a, b):
        out = np.zeros_like(np.asarray(a, dtype=complex))
        for m, coef in zip(monos, cc):
            out = out + coef * (a ** m.a1 * b ** m.a2
                                * np.conj(a) ** m.b1 * np.conj(b) ** m.b2)
        return out

    exact = ev(O.lbar_mono_matrix(monos) @ c, z1, z2)
    got = T.lbar_fd(lambda a, b: ev(c, a, b), z1, z2)
    assert np.abs(got - exact).max() < 1e-7


def test_uniform_sphere_points():
    z1, z2 = T.uniform_sphere_points(500, seed=1)
    assert z1.shape == z2.shape == (500,)
    assert np.abs(np.abs(z1) ** 2 + np.abs(z2) ** 2 - 1.0).max() < 1e-12
    a1, a2 = T.uniform_sphere_points(500, seed=1)
    assert np.array_equal(z1, a1) and np.array_equal(z2, a2)
    b1, _ = T.uniform_sphere_points(500, seed=2)
    assert not np.array_equal(z1, b1)


def test_random_chart_points():
    z, t = T.random_chart_points(100, seed=3, scale=2.0)
    assert z.shape == (100,) and t.shape == (100,)
    assert np.iscomplexobj(z) and not np.iscomplexobj(t)
    z2, t2 = T.random_chart_points(100, seed=3, scale=2.0)
    assert np.array_equal(z, z2) and np.array_equal(t, t2)


def test_random_coeffs_options():
    bs = B.orthonormal_basis(3)
    sf = T.random_coeffs(bs, seed=5)
    assert not sf.is_form
    assert np.linalg.norm(sf.coeffs) == pytest.approx(1.0)

    masked = T.random_coeffs(bs, seed=5, mask=bs.hardy_mask, is_form=True)
    assert masked.is_form
    assert not np.any(masked.coeffs[~bs.hardy_mask])
    assert np.linalg.norm(masked.coeffs) == pytest.approx(1.0)

    raw = T.random_coeffs(bs, seed=5, normalize=False)
    assert np.linalg.norm(raw.coeffs) > 1.0  # 2 * rank gaussians


def test_cutoff_family_bands():
    fam = T.CutoffFamily(eps=0.125)
    lo, hi = fam.shell
    assert (lo, hi) == (4.0, 8.0)

    rng = np.random.default_rng(8)
    alpha = rng.uniform(0, 2 * np.pi, 200)
    # points below, inside, and above the shell, along t = 0
    z_in = 0.5 * lo * np.exp(1j * alpha)
    assert np.all(fam.chart_value(z_in, np.zeros(200)) == 0.0)
    z_out = 2.0 * hi * np.exp(1j * alpha)
    assert np.all(fam.chart_value(z_out, np.zeros(200)) == 1.0)
    z_mid = rng.uniform(1.01 * lo, 0.99 * hi, 200) * np.exp(1j * alpha)
    v = fam.chart_value(z_mid, np.zeros(200))
    assert np.all((0.0 <= v) & (v <= 1.0))
    assert np.any((0.0 < v) & (v < 1.0))

    with pytest.raises(ValueError):
        T.CutoffFamily(eps=1.5)


def test_cutoff_chart_zbar_matches_fd():
    fam = T.CutoffFamily(eps=0.125)
    lo, hi = fam.shell
    rng = np.random.default_rng(9)
    rho = rng.uniform(1.05 * lo, 0.95 * hi, 60)
    phi = rng.uniform(-1.4, 1.4, 60)
    alpha = rng.uniform(0, 2 * np.pi, 60)
    z = rho * np.sqrt(np.cos(phi)) * np.exp(1j * alpha)
    t = rho ** 2 * np.sin(phi)
    exact = fam.chart_zbar(z, t)
    fd = T.zbar_fd(lambda a, b: fam.chart_value(a, b), z, t, step=1e-4)
    assert np.abs(exact - fd).max() < 1e-5
    assert np.abs(exact).max() > 1e-3  # the shell really carries derivative


def test_cutoff_sphere_values():
    fam = T.CutoffFamily(eps=0.125)
    # the pole is group infinity, deep inside the chi = 1 region
    assert fam.sphere_value(0.0, -1.0) == 1.0
    assert fam.sphere_zbar_hat(0.0, -1.0) == 0.0
    # the far pole (0, 1) is the group origin, chi = 0 there
    assert fam.sphere_value(0.0, 1.0) == 0.0
    # sphere derivative is G times the chart derivative
    z1, z2 = T.uniform_sphere_points(300, seed=10)
    vals = fam.sphere_zbar_hat(z1, z2)
    z, t = G.sphere_to_heisenberg(z1, z2)
    assert np.abs(vals - G.conformal_factor(z2) * fam.chart_zbar(z, t)).max() < 1e-12


def test_cutoff_profile_centering():
    with pytest.raises(ValueError):
        T.CutoffProfile(eps=0.3)
    with pytest.raises(ValueError):
        T.CutoffProfile(eps=0.1, center=(0.5 + 0.0j, 0.5 + 0.0j))

    prof = T.CutoffProfile(eps=0.1)
    assert prof.value(0.0, -1.0) == 1.0

    c1 = 0.6 + 0.0j
    c2 = 0.8j
    prof2 = T.CutoffProfile(eps=0.1, center=(c1, c2))
    assert prof2.value(np.array([c1]), np.array([c2]))[0] == 1.0
    # the antipode rotates to (0, 1), the group origin, far outside the ball
    val, deriv = T.cutoff_value_and_derivative_bound(
        prof2, np.array([-c1]), np.array([-c2]))
    assert val[0] == 0.0
    assert deriv[0] == 0.0


def test_gauge_polar_rule_volume():
    a, b = 2.0, 3.0
    z, t, w = T.gauge_polar_rule(a, b, n_rho=24, n_phi=24, n_alpha=16)
    rho = G.gauge(z, t)
    assert rho.min() > a - 1e-9 and rho.max() < b + 1e-9
    vol = w.sum()
    exact = np.pi ** 2 * (b ** 4 - a ** 4) / 2.0
    assert vol == pytest.approx(exact, rel=1e-10)


def test_contact_density_chart_is_four():
    rng = np.random.default_rng(12)
    x = rng.standard_normal(20)
    y = rng.standard_normal(20)
    t = rng.standard_normal(20)
    dens = T.contact_density_chart(x, y, t)
    assert np.abs(dens - 4.0).max() < 1e-6


def test_contact_density_hopf_closed_form():
    rng = np.random.default_rng(13)
    eta = rng.uniform(0.1, np.pi / 2 - 0.1, 20)
    xi1 = rng.uniform(0, 2 * np.pi, 20)
    xi2 = rng.uniform(0, 2 * np.pi, 20)
    dens = T.contact_density_hopf(eta, xi1, xi2)
    assert np.abs(np.abs(dens) - 8.0 * np.sin(eta) * np.cos(eta)).max() < 1e-12


def test_jacobian_links_the_two_densities():
    # |det J| * (chart density) = G^4 * (Hopf density), the infinitesimal
    # form of the conformal volume relation.
    rng = np.random.default_rng(14)
    eta = rng.uniform(0.15, 1.2, 10)
    xi1 = rng.uniform(0, 2 * np.pi, 10)
    xi2 = rng.uniform(0.2, np.pi - 0.2, 10)  # keep clear of the pole
    zeta1 = np.cos(eta) * np.exp(1j * xi1)
    zeta2 = np.sin(eta) * np.exp(1j * xi2)
    det = T.chart_jacobian_determinant(eta, xi1, xi2)
    lhs = det * 4.0
    rhs = G.conformal_factor(zeta2) ** 4 * np.abs(T.contact_density_hopf(eta, xi1, xi2))
    assert np.abs(lhs / rhs - 1.0).max() < 1e-6


def test_monte_carlo_moment_sanity():
    val, err = T.monte_carlo_moment(1, 0, 1, 0, n=200_000, seed=15)
    exact = 8.0 * np.pi ** 2
    assert err > 0
    assert abs(val - exact) < 4.0 * err

    val0, err0 = T.monte_carlo_moment(1, 0, 0, 1, n=100_000, seed=16)
    assert abs(val0) < 4.0 * max(err0, 1e-12)
