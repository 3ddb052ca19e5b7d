"""Independent numerical oracles used by the test suite.

Nothing here reuses the spectral machinery: derivatives come from central
differences, moments from Monte-Carlo sampling, volume densities from
pointwise exterior algebra, and cutoff functions from closed forms.  That
keeps every cross-check in the suite a genuine two-sided comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import OrthonormalBasis, SpectralFunction
from .geometry import SPHERE_MEASURE, gauge, heisenberg_to_sphere, sphere_to_heisenberg
from .operators import z_from_partials, zbar_from_partials

FD_STEP_MIN = 1e-7
FD_STEP_MAX = 1e-3


def _check_step(step: float):
    if not (FD_STEP_MIN <= step <= FD_STEP_MAX):
        raise ValueError(
            f"finite-difference step {step:g} outside [{FD_STEP_MIN:g}, {FD_STEP_MAX:g}]")


# ---------------------------------------------------------------------------
# chart-side finite differences

def chart_partials(F, z, t, step: float = 1e-5):
    """Central-difference partials (f_z, f_zbar, f_t) of F(z, t)."""
    _check_step(step)
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    fx = (F(z + step, t) - F(z - step, t)) / (2 * step)
    fy = (F(z + 1j * step, t) - F(z - 1j * step, t)) / (2 * step)
    ft = (F(z, t + step) - F(z, t - step)) / (2 * step)
    return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy), ft


def zbar_fd(F, z, t, step: float = 1e-5):
    _, f_zbar, f_t = chart_partials(F, z, t, step)
    return zbar_from_partials(f_zbar, f_t, z)


def z_fd(F, z, t, step: float = 1e-5):
    f_z, _, f_t = chart_partials(F, z, t, step)
    return z_from_partials(f_z, f_t, z)


def zbar_star_fd(F, z, t, step: float = 1e-5):
    return -z_fd(F, z, t, step)


def finite_difference(which: str, F, z, t, step: float = 1e-5):
    """Central-difference application of a chart-side operator.

    Tags: zbar, z, zbar_star (the tangential operators) and dz, dzbar, dt
    (plain partials).  Step must lie in [1e-7, 1e-3].
    """
    if which == "zbar":
        return zbar_fd(F, z, t, step)
    if which == "z":
        return z_fd(F, z, t, step)
    if which == "zbar_star":
        return zbar_star_fd(F, z, t, step)
    f_z, f_zbar, f_t = chart_partials(F, z, t, step)
    if which == "dz":
        return f_z
    if which == "dzbar":
        return f_zbar
    if which == "dt":
        return f_t
    raise ValueError(f"unknown operator tag {which!r}")


# ---------------------------------------------------------------------------
# sphere-side finite differences

def ambient_partials(F, zeta1, zeta2, step: float = 1e-5):
    """Partials of F(zeta1, zeta2) with respect to each complex slot.

    Returns (d/dzeta1, d/dzetabar1, d/dzeta2, d/dzetabar2).  F must accept
    off-sphere arguments near the sphere; the fields below are tangent, so
    the combination is extension independent.
    """
    _check_step(step)
    zeta1 = np.asarray(zeta1, dtype=complex)
    zeta2 = np.asarray(zeta2, dtype=complex)

    def pair(df_dx, df_dy):
        return 0.5 * (df_dx - 1j * df_dy), 0.5 * (df_dx + 1j * df_dy)

    d1x = (F(zeta1 + step, zeta2) - F(zeta1 - step, zeta2)) / (2 * step)
    d1y = (F(zeta1 + 1j * step, zeta2) - F(zeta1 - 1j * step, zeta2)) / (2 * step)
    d2x = (F(zeta1, zeta2 + step) - F(zeta1, zeta2 - step)) / (2 * step)
    d2y = (F(zeta1, zeta2 + 1j * step) - F(zeta1, zeta2 - 1j * step)) / (2 * step)
    dz1, dzb1 = pair(d1x, d1y)
    dz2, dzb2 = pair(d2x, d2y)
    return dz1, dzb1, dz2, dzb2


def lbar_fd(F, zeta1, zeta2, step: float = 1e-5):
    _, dzb1, _, dzb2 = ambient_partials(F, zeta1, zeta2, step)
    return zeta1 * dzb2 - zeta2 * dzb1


def l_fd(F, zeta1, zeta2, step: float = 1e-5):
    dz1, _, dz2, _ = ambient_partials(F, zeta1, zeta2, step)
    return np.conj(zeta1) * dz2 - np.conj(zeta2) * dz1


# ---------------------------------------------------------------------------
# random sampling

def uniform_sphere_points(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]


def random_chart_points(n: int, seed: int = 0, scale: float = 1.0):
    rng = np.random.default_rng(seed)
    z = scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    t = scale ** 2 * rng.standard_normal(n)
    return z, t


def monte_carlo_moment(a1: int, a2: int, b1: int, b2: int,
                       n: int = 200000, seed: int = 0):
    """Monte-Carlo estimate of a sphere monomial moment.

    Returns (estimate, standard_error); the error is the larger of the real
    and imaginary component errors, scaled like the estimate.
    """
    zeta1, zeta2 = uniform_sphere_points(n, seed)
    vals = (zeta1 ** a1 * zeta2 ** a2
            * np.conj(zeta1) ** b1 * np.conj(zeta2) ** b2)
    est = SPHERE_MEASURE * vals.mean()
    err = SPHERE_MEASURE * max(vals.real.std(), vals.imag.std()) / np.sqrt(n)
    return est, float(err)


def random_coeffs(basis: OrthonormalBasis, seed: int = 0, mask=None,
                  is_form: bool = False, normalize: bool = True) -> SpectralFunction:
    """Random coefficient vector, optionally restricted to a bidegree mask."""
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(basis.rank) + 1j * rng.standard_normal(basis.rank)
    if mask is not None:
        c = np.where(mask, c, 0.0)
    if normalize:
        nrm = np.linalg.norm(c)
        if nrm > 0:
            c = c / nrm
    return SpectralFunction(basis.basis_id, c, is_form=is_form)


# ---------------------------------------------------------------------------
# cutoff family

def _sigma(x):
    """exp(-1/x) on x > 0, zero otherwise; smooth across 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(over="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def _profile(r):
    """Smooth transition: 1 on r <= 1, 0 on r >= 2."""
    r = np.asarray(r, dtype=float)
    a = _sigma(2.0 - r)
    b = _sigma(r - 1.0)
    out = np.zeros_like(r)
    mid = (r > 1.0) & (r < 2.0)
    out[mid] = a[mid] / (a[mid] + b[mid])
    out[r <= 1.0] = 1.0
    return out


def _profile_prime(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    mid = (r > 1.0) & (r < 2.0)
    rm = r[mid]
    a = _sigma(2.0 - rm)
    b = _sigma(rm - 1.0)
    da = -a / (2.0 - rm) ** 2
    db = b / (rm - 1.0) ** 2
    out[mid] = (da * b - a * db) / (a + b) ** 2
    return out


@dataclass(frozen=True)
class CutoffFamily:
    """Smooth cutoffs concentrating at the sphere pole (group infinity).

    chi_eps = profile(d / eps) with d = 1 / gauge: identically 1 where
    gauge >= 1/eps, identically 0 where gauge <= 1/(2 eps), with an exact
    closed form for Zbar chi on the transition shell.
    """

    eps: float

    def __post_init__(self):
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")

    @property
    def shell(self):
        """Gauge interval carrying the derivative."""
        return 0.5 / self.eps, 1.0 / self.eps

    def _r(self, z, t):
        rho = gauge(z, t)
        with np.errstate(divide="ignore"):
            return np.where(rho > 0, 1.0 / (rho * self.eps), np.inf)

    def chart_value(self, z, t):
        return _profile(self._r(z, t))

    def chart_zbar(self, z, t):
        """Exact Zbar chi.  Zbar(gauge^4) = 2 z (|z|^2 - i t) gives the
        derivative of d = gauge^{-1} in closed form on the shell."""
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        r = self._r(z, t)
        out = np.zeros(np.broadcast(z, t).shape, dtype=complex)
        mid = (r > 1.0) & (r < 2.0)
        if not np.any(mid):
            return out
        zm = np.broadcast_to(z, out.shape)[mid]
        tm = np.broadcast_to(t, out.shape)[mid]
        rho = gauge(zm, tm)
        zbar_d = -zm * (np.abs(zm) ** 2 - 1j * tm) / (2.0 * rho ** 5)
        out[mid] = _profile_prime(r[mid]) * zbar_d / self.eps
        return out

    def sphere_value(self, zeta1, zeta2, pole_tol: float = 1e-12):
        """Pullback to the sphere; the pole itself maps to 1."""
        zeta1 = np.asarray(zeta1, dtype=complex)
        zeta2 = np.asarray(zeta2, dtype=complex)
        near = np.abs(1.0 + zeta2) <= pole_tol
        out = np.ones(np.broadcast(zeta1, zeta2).shape, dtype=float)
        if np.any(~near):
            z, t = sphere_to_heisenberg(
                np.broadcast_to(zeta1, out.shape)[~near],
                np.broadcast_to(zeta2, out.shape)[~near],
                pole_tol=pole_tol / 2)
            out[~near] = self.chart_value(z, t)
        return out

    def sphere_zbar_hat(self, zeta1, zeta2, pole_tol: float = 1e-12):
        """G * (Zbar chi) pulled back; zero at and beyond the shell."""
        zeta1 = np.asarray(zeta1, dtype=complex)
        zeta2 = np.asarray(zeta2, dtype=complex)
        near = np.abs(1.0 + zeta2) <= pole_tol
        out = np.zeros(np.broadcast(zeta1, zeta2).shape, dtype=complex)
        if np.any(~near):
            z2 = np.broadcast_to(zeta2, out.shape)[~near]
            z, t = sphere_to_heisenberg(
                np.broadcast_to(zeta1, out.shape)[~near], z2,
                pole_tol=pole_tol / 2)
            out[~near] = self.chart_zbar(z, t) / np.abs(1.0 + z2)
        return out


@dataclass(frozen=True)
class CutoffProfile:
    """A cutoff concentrated at a sphere point, default the pole.

    Value 1 inside a non-isotropic eps-ball around the center, 0 outside the
    2 eps ball.  The ball is measured by the reciprocal chart gauge around
    the pole; other centers are handled by a sphere rotation carrying the
    center to the pole, which preserves the CR structure and hence all
    derivative magnitudes.
    """

    eps: float
    center: tuple = (0.0 + 0.0j, -1.0 + 0.0j)

    def __post_init__(self):
        if not (0 < self.eps < 0.25):
            raise ValueError("eps must lie in (0, 1/4)")
        c1, c2 = self.center
        if abs(abs(c1) ** 2 + abs(c2) ** 2 - 1.0) > 1e-12:
            raise ValueError("center must lie on the sphere")

    @property
    def family(self) -> CutoffFamily:
        return CutoffFamily(self.eps)

    def _to_pole_frame(self, zeta1, zeta2):
        c1, c2 = self.center
        if abs(c1) < 1e-14 and abs(c2 + 1.0) < 1e-14:
            return np.asarray(zeta1, dtype=complex), np.asarray(zeta2, dtype=complex)
        # unitary with U(center) = (0, -1)
        u1 = -c2 * zeta1 + c1 * zeta2
        u2 = -np.conj(c1) * zeta1 - np.conj(c2) * zeta2
        return u1, u2

    def value(self, zeta1, zeta2):
        u1, u2 = self._to_pole_frame(zeta1, zeta2)
        return self.family.sphere_value(u1, u2)


def cutoff_value_and_derivative_bound(profile: CutoffProfile, zeta1, zeta2):
    """(chi(q), pointwise first-derivative estimate |Zbar-hat chi| + |Z-hat chi|).

    chi is real, so the two tangential derivatives have equal magnitude and
    the estimate is twice one of them.
    """
    u1, u2 = profile._to_pole_frame(zeta1, zeta2)
    value = profile.family.sphere_value(u1, u2)
    deriv = 2.0 * np.abs(profile.family.sphere_zbar_hat(u1, u2))
    return value, deriv


def gauge_polar_rule(rho_lo: float, rho_hi: float, n_rho: int = 64,
                     n_phi: int = 48, n_alpha: int = 48):
    """Quadrature for the chart volume over a gauge shell.

    Coordinates z = rho sqrt(cos phi) e^{i alpha}, t = rho^2 sin phi turn
    dx dy dt into rho^3 drho dphi dalpha; Gauss-Legendre in rho and phi,
    trapezoid in alpha.  Returns flat (z, t, w).
    """
    xr, wr = np.polynomial.legendre.leggauss(n_rho)
    rho = 0.5 * (rho_hi - rho_lo) * (xr + 1.0) + rho_lo
    wrho = 0.5 * (rho_hi - rho_lo) * wr
    xp, wp = np.polynomial.legendre.leggauss(n_phi)
    phi = 0.5 * np.pi * xp
    wphi = 0.5 * np.pi * wp
    alpha = 2.0 * np.pi * np.arange(n_alpha) / n_alpha
    walpha = 2.0 * np.pi / n_alpha

    R, P, A = np.meshgrid(rho, phi, alpha, indexing="ij")
    WR, WP = np.meshgrid(wrho, wphi, indexing="ij")
    z = (R * np.sqrt(np.cos(P)) * np.exp(1j * A)).ravel()
    t = (R ** 2 * np.sin(P)).ravel()
    w = (WR[:, :, None] * WP[:, :, None] * walpha * R ** 3).ravel()
    return z, t, w


# ---------------------------------------------------------------------------
# volume density oracles

def contact_density_chart(x, y, t, step: float = 1e-4):
    """theta wedge dtheta over dx dy dt by pointwise exterior algebra.

    The contact form has components (-2y, 2x, 1); its exterior derivative is
    approximated by the antisymmetrized finite-difference Jacobian.
    """
    _check_step(step)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)

    def theta(xx, yy, tt):
        shape = np.broadcast(xx, yy, tt).shape
        return np.stack([np.broadcast_to(-2.0 * yy, shape),
                         np.broadcast_to(2.0 * xx, shape),
                         np.ones(shape)])

    args = [x, y, t]
    J = np.zeros((3, 3) + np.broadcast(x, y, t).shape)
    for j in range(3):
        hi = [a.copy() if k == j else a for k, a in enumerate(args)]
        lo = [a.copy() if k == j else a for k, a in enumerate(args)]
        hi[j] = args[j] + step
        lo[j] = args[j] - step
        J[j] = (theta(*hi) - theta(*lo)) / (2 * step)
    F = J - np.swapaxes(J, 0, 1)   # F[j, k] = d_j theta_k - d_k theta_j
    th = theta(x, y, t)
    return th[0] * F[1, 2] - th[1] * F[0, 2] + th[2] * F[0, 1]


def chart_jacobian_determinant(eta, xi1, xi2, step: float = 1e-5):
    """|det| of the Hopf-coordinates-to-chart Jacobian by finite differences.

    Composes the Hopf embedding with the stereographic chart and
    differentiates (x, y, t) with respect to (eta, xi1, xi2).  Together with
    the two contact-volume densities this checks the infinitesimal form of
    the conformal relation between the contact forms: |det| times the chart
    density equals G^4 times the Hopf-coordinate sphere density.
    """
    _check_step(step)
    eta = np.asarray(eta, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)

    def chart(e, x1, x2):
        z, t = sphere_to_heisenberg(np.cos(e) * np.exp(1j * x1),
                                    np.sin(e) * np.exp(1j * x2))
        return np.stack([z.real, z.imag, t])

    cols = []
    for j in range(3):
        d = [np.zeros_like(eta)] * 3
        d = [dd.copy() for dd in d]
        d[j] += step
        hi = chart(eta + d[0], xi1 + d[1], xi2 + d[2])
        lo = chart(eta - d[0], xi1 - d[1], xi2 - d[2])
        cols.append((hi - lo) / (2 * step))
    J = np.stack(cols, axis=1)          # shape (3 rows, 3 cols, ...)
    det = (J[0, 0] * (J[1, 1] * J[2, 2] - J[1, 2] * J[2, 1])
           - J[0, 1] * (J[1, 0] * J[2, 2] - J[1, 2] * J[2, 0])
           + J[0, 2] * (J[1, 0] * J[2, 1] - J[1, 1] * J[2, 0]))
    return np.abs(det)


def contact_density_hopf(eta, xi1, xi2):
    """theta-hat wedge d(theta-hat) against the Hopf coordinate frame.

    Tangent vectors of the embedding are closed form; the wedge uses the
    ambient identity d(theta-hat) = 2i sum dzeta wedge dzetabar.  The result
    should be 8 sin(eta) cos(eta) up to sign.
    """
    eta = np.asarray(eta, dtype=float)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    e1 = np.exp(1j * xi1)
    e2 = np.exp(1j * xi2)
    zeta = np.stack([np.cos(eta) * e1, np.sin(eta) * e2])
    v_eta = np.stack([-np.sin(eta) * e1, np.cos(eta) * e2])
    v_xi1 = np.stack([1j * np.cos(eta) * e1, np.zeros_like(e2)])
    v_xi2 = np.stack([np.zeros_like(e1), 1j * np.sin(eta) * e2])

    def theta_of(v):
        return -2.0 * np.sum(zeta * np.conj(v), axis=0).imag

    def dtheta(u, v):
        return -4.0 * np.sum(u * np.conj(v), axis=0).imag

    t_eta, t_1, t_2 = theta_of(v_eta), theta_of(v_xi1), theta_of(v_xi2)
    return (t_eta * dtheta(v_xi1, v_xi2)
            - t_1 * dtheta(v_eta, v_xi2)
            + t_2 * dtheta(v_eta, v_xi1))
