"""Charts and measures for the Heisenberg group and the unit sphere in C^2.

The Heisenberg group H1 is coordinatized as [z, t] with z complex and t real,
carrying the contact form theta = dt + i(z dzbar - zbar dz).  The unit sphere
S3 in C^2 carries thetahat = i * sum_j (zeta_j dzetabar_j - zetabar_j dzeta_j).
Stereographic projection from the pole p = (0, -1) identifies S3 \\ {p} with H1:

    z = zeta1 / (1 + zeta2),        t + i|z|^2 = i (1 - zeta2) / (1 + zeta2).

The two contact forms match conformally, theta = G^2 thetahat with
G = 1 / |1 + zeta2|, and the scalar weight h = 1 / (1 + zeta2) satisfies
|h| = G and is annihilated by the antiholomorphic tangential operator.

Volume normalizations used throughout:

* ``RHO_H``:  theta ^ dtheta = RHO_H * dx dy dt on H1.  Writing z = x + iy,
  theta = dt + 2x dy - 2y dx, so dtheta = 4 dx ^ dy and the wedge is
  4 dx ^ dy ^ dt.  Orientation is dropped; the density is |4| = 4.
* ``RHO_S``:  thetahat ^ dthetahat = RHO_S * dsigma against the round measure
  of the unit S3.  In Hopf coordinates the wedge is 8 sin(eta) cos(eta)
  d eta d xi1 d xi2 while dsigma = sin(eta) cos(eta) d eta d xi1 d xi2.

Both constants are validated by independent oracles in the test suite
(numeric exterior algebra at random points, Gaussian integral against
Monte-Carlo, Hopf-coordinate quadrature).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonIntegrableError, PoleProximityError

RHO_H = 4.0
RHO_S = 8.0

#: total measure of S3 under thetahat ^ dthetahat (round volume 2 pi^2 times RHO_S)
SPHERE_MEASURE = RHO_S * 2.0 * np.pi ** 2

DEFAULT_POLE_TOL = 1e-8


# ---------------------------------------------------------------------------
# point types

@dataclass(frozen=True)
class HeisenbergPoint:
    """A point [z, t] of the Heisenberg group."""

    z: complex
    t: float

    def to_sphere(self) -> "SpherePoint":
        z1, z2 = heisenberg_to_sphere(self.z, self.t)
        return SpherePoint(complex(z1), complex(z2))


@dataclass(frozen=True)
class SpherePoint:
    """A point (zeta1, zeta2) on the unit sphere of C^2.

    The constructor enforces |zeta1|^2 + |zeta2|^2 = 1 to 1e-12.
    """

    zeta1: complex
    zeta2: complex

    def __post_init__(self):
        r = abs(self.zeta1) ** 2 + abs(self.zeta2) ** 2
        if abs(r - 1.0) > 1e-12:
            raise ValueError(f"not on the unit sphere: |zeta|^2 = {r!r}")

    def to_heisenberg(self, pole_tol: float = DEFAULT_POLE_TOL) -> HeisenbergPoint:
        z, t = sphere_to_heisenberg(self.zeta1, self.zeta2, pole_tol=pole_tol)
        return HeisenbergPoint(complex(z), float(t))


POLE = (0.0 + 0.0j, -1.0 + 0.0j)


# ---------------------------------------------------------------------------
# charts (array-level; scalars pass through unchanged)

def sphere_to_heisenberg(zeta1, zeta2, pole_tol: float = DEFAULT_POLE_TOL):
    """Map sphere points to Heisenberg coordinates [z, t].

    Parameters
    ----------
    zeta1, zeta2 : complex array_like
        Sphere coordinates.  Points with |1 + zeta2| <= pole_tol raise
        PoleProximityError.

    Returns
    -------
    z : complex ndarray
    t : real ndarray
    """
    zeta1 = np.asarray(zeta1, dtype=complex)
    zeta2 = np.asarray(zeta2, dtype=complex)
    denom = 1.0 + zeta2
    bad = np.abs(denom) <= pole_tol
    if np.any(bad):
        raise PoleProximityError(
            f"{int(np.count_nonzero(bad))} point(s) within {pole_tol} of the pole"
        )
    z = zeta1 / denom
    w = 1j * (1.0 - zeta2) / denom
    return z, w.real


def heisenberg_to_sphere(z, t):
    """Inverse chart: [z, t] to (zeta1, zeta2).

    With w = t + i|z|^2 the inverse is zeta2 = (i - w)/(i + w) and
    zeta1 = 2i z / (i + w); the denominator i + w never vanishes on H1.
    """
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    w = t + 1j * np.abs(z) ** 2
    denom = 1j + w
    zeta2 = (1j - w) / denom
    zeta1 = 2j * z / denom
    return zeta1, zeta2


# ---------------------------------------------------------------------------
# conformal weights

def conformal_factor(zeta2):
    """G = 1 / |1 + zeta2| on the sphere (grows without bound at the pole)."""
    return 1.0 / np.abs(1.0 + np.asarray(zeta2, dtype=complex))


def cr_weight(zeta2):
    """h = 1 / (1 + zeta2); |h| = G and the weight is annihilated by the
    tangential antiholomorphic derivative."""
    return 1.0 / (1.0 + np.asarray(zeta2, dtype=complex))


def cr_weight_chart(z, t):
    """The weight h pulled back to H1: h = (1 + |z|^2 - i t) / 2."""
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    return 0.5 * (1.0 + np.abs(z) ** 2 - 1j * t)


def conformal_factor_chart(z, t):
    """G on H1, i.e. |h| in chart coordinates."""
    return np.abs(cr_weight_chart(z, t))


def gauge(z, t):
    """Heisenberg gauge rho([z, t]) = (|z|^4 + t^2)^(1/4)."""
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    return (np.abs(z) ** 4 + t ** 2) ** 0.25


# ---------------------------------------------------------------------------
# truncated Lp norms on the Heisenberg group

@dataclass(frozen=True)
class BoxRule:
    """Tensor Gauss-Legendre rule on |x|, |y| <= radius, |t| <= radius^2.

    The axes are sinh-stretched: the t range grows like radius^2, and an
    unstretched rule would leave gaps wider than the unit scale of the decay
    near t = 0 where the integrands carry their mass.  The substitution
    keeps the rule spectrally accurate for functions analytic in a strip.
    """

    radius: float = 12.0
    nodes: int = 96

    def axes(self):
        v, w = np.polynomial.legendre.leggauss(self.nodes)
        a = float(np.arcsinh(self.radius))
        b = float(np.arcsinh(self.radius ** 2))
        return ((np.sinh(v * a), w * a * np.cosh(v * a)),
                (np.sinh(v * b), w * b * np.cosh(v * b)))


@dataclass(frozen=True)
class H1NormResult:
    value: float
    tail_estimate: float
    outer_shell_fraction: float


def h1_lp_norm(f, p: float, box: BoxRule = BoxRule()) -> H1NormResult:
    """Truncated L^p(H1) norm of an evaluable f with respect to theta ^ dtheta.

    Parameters
    ----------
    f : callable
        f(z, t) -> complex ndarray, vectorized over flat arrays.
    p : float
        Exponent, one of 4/3, 2, 4 in the intended use (any p > 0 works).
    box : BoxRule
        Integration box.  The t half-width is radius^2 to match the
        anisotropic scaling of the group.

    Returns
    -------
    H1NormResult
        ``value`` approximates (int |f|^p theta ^ dtheta)^(1/p).
        ``tail_estimate`` extrapolates the outer-shell decay geometrically.
        ``outer_shell_fraction`` is the share of the integral carried by
        points with max(|x|/R, |y|/R, |t|/R^2) > 0.8.

    Raises
    ------
    NonIntegrableError
        If the outer shell carries more than 10 percent of the integral,
        a heuristic sign that |f|^p does not decay fast enough for the
        truncation to be meaningful.
    """
    (xs, wx), (ts, wt) = box.axes()
    total = 0.0
    shell = 0.0
    mid = 0.0
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    WXY = np.outer(wx, wx)
    zflat = (X + 1j * Y).ravel()
    wflat = WXY.ravel()
    rx = np.maximum(np.abs(X) / box.radius, np.abs(Y) / box.radius).ravel()
    for tk, wk in zip(ts, wt):
        vals = np.abs(f(zflat, np.full(zflat.shape, tk))) ** p
        contrib = vals * wflat * wk
        total += contrib.sum()
        r = np.maximum(rx, abs(tk) / box.radius ** 2)
        shell += contrib[r > 0.8].sum()
        mid += contrib[(r > 0.6) & (r <= 0.8)].sum()
    total *= RHO_H
    shell *= RHO_H
    mid *= RHO_H
    if total <= 0.0:
        return H1NormResult(0.0, 0.0, 0.0)
    frac = shell / total
    if frac > 0.10:
        raise NonIntegrableError(
            f"outer shell carries {frac:.1%} of the truncated integral"
        )
    # geometric extrapolation of successive shells; conservative clip
    ratio = min(shell / mid, 0.9) if mid > 0 else 0.0
    tail = shell * ratio / (1.0 - ratio) if ratio > 0 else 0.0
    value = total ** (1.0 / p)
    tail_est = (total + tail) ** (1.0 / p) - value
    return H1NormResult(float(value), float(tail_est), float(frac))
