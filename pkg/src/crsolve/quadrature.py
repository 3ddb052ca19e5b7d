"""Product quadrature on the sphere in Hopf coordinates.

Hopf coordinates parametrize S3 as

    zeta1 = sqrt(1 - s) * exp(i xi1),   zeta2 = sqrt(s) * exp(i xi2),

with s in (0, 1) and angles in [0, 2 pi).  The round measure is exactly
(1/2) ds dxi1 dxi2 in these variables, so a Gauss-Legendre rule in s crossed
with trapezoidal (equispaced) rules in both angles integrates monomials
zeta^a zetabar^b exactly: the angle sums vanish unless a1 = b1 and a2 = b2
(no aliasing below the angular node count), and the surviving s-integrand is
a polynomial.  All integrals carry the contact volume thetahat ^ dthetahat,
i.e. RHO_S times the round measure.
"""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

from .errors import ConfigError, GridMismatchError
from .geometry import RHO_S, SPHERE_MEASURE

#: squared pointwise norm of the reference (0,1)-form frame, |omegahat|^2.
#: Derived numerically from the Levi pairing of the transferred tangential
#: operator (see operators.omega_hat_norm_squared); the pairing magnitude is
#: the constant 2 over the whole sphere, and the dual frame norm is its
#: reciprocal.  Only the magnitude enters norm computations.
C_OMEGA = 0.5


def default_grid_sizes(N: int) -> tuple[int, int]:
    """Grid sizes paired with polynomial degree N: (2N + 4, 4N + 8)."""
    return 2 * N + 4, 4 * N + 8


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor quadrature nodes on S3 with the contact volume weights.

    Nodes are stored flattened in deterministic order: s varies slowest,
    then xi1, then xi2.  ``weights`` already include RHO_S, so
    ``(weights * values).sum()`` approximates the thetahat ^ dthetahat
    integral directly.  Sums over nodes use numpy's pairwise summation,
    which fixes the accumulation order.
    """

    n_s: int
    n_angle: int
    s_nodes: np.ndarray
    s_weights: np.ndarray
    angles: np.ndarray
    zeta1: np.ndarray
    zeta2: np.ndarray
    s: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray
    weights: np.ndarray
    exactness_degree: int
    grid_id: str

    def __len__(self):
        return self.weights.size

    def integrate(self, values) -> complex:
        return complex(np.sum(self.weights * np.asarray(values)))


def build_grid(N: int | None = None, n_s: int | None = None,
               n_angle: int | None = None) -> QuadratureGrid:
    """Build the product grid, sized by degree N unless sizes are given.

    The recorded ``exactness_degree`` is the conservative
    min(2 n_s - 1, n_angle - 1): the s-rule is exact far beyond that for
    monomials (their s-degree is at most half the total degree), and the
    angular rules are exact up to frequency n_angle - 1.
    """
    if n_s is None or n_angle is None:
        if N is None:
            raise ConfigError("need N or explicit (n_s, n_angle)")
        ds, da = default_grid_sizes(N)
        n_s = ds if n_s is None else n_s
        n_angle = da if n_angle is None else n_angle
    if n_s < 2 or n_angle < 4:
        raise ConfigError(f"grid too small: n_s={n_s}, n_angle={n_angle}")
    x, w = np.polynomial.legendre.leggauss(n_s)
    s_nodes = 0.5 * (x + 1.0)
    s_weights = 0.5 * w
    # no node may sit at s = 1 (the pole lives at s = 1, xi2 = pi)
    assert s_nodes.max() < 1.0 and s_nodes.min() > 0.0
    angles = 2.0 * np.pi * np.arange(n_angle) / n_angle
    S, X1, X2 = np.meshgrid(s_nodes, angles, angles, indexing="ij")
    s = S.ravel()
    xi1 = X1.ravel()
    xi2 = X2.ravel()
    zeta1 = np.sqrt(1.0 - s) * np.exp(1j * xi1)
    zeta2 = np.sqrt(s) * np.exp(1j * xi2)
    w_angle = (2.0 * np.pi / n_angle) ** 2
    weights = RHO_S * 0.5 * w_angle * np.repeat(s_weights, n_angle * n_angle)
    grid = QuadratureGrid(
        n_s=n_s,
        n_angle=n_angle,
        s_nodes=s_nodes,
        s_weights=s_weights,
        angles=angles,
        zeta1=zeta1,
        zeta2=zeta2,
        s=s,
        xi1=xi1,
        xi2=xi2,
        weights=weights,
        exactness_degree=min(2 * n_s - 1, n_angle - 1),
        grid_id=f"hopf-ns{n_s}-na{n_angle}-v1",
    )
    total = weights.sum()
    assert abs(total - SPHERE_MEASURE) <= 1e-10 * SPHERE_MEASURE
    return grid


def refined_grid(grid: QuadratureGrid) -> QuadratureGrid:
    """The same family with both node counts doubled."""
    return build_grid(n_s=2 * grid.n_s, n_angle=2 * grid.n_angle)


# ---------------------------------------------------------------------------
# grid functions

@dataclass
class GridFunction:
    """Sampled complex values on a quadrature grid.

    ``is_form`` marks coefficients of (0,1)-forms against the reference
    frame; form-aware norms then carry the constant C_OMEGA.
    """

    grid_id: str
    values: np.ndarray
    is_form: bool = False

    def _check(self, other: "GridFunction"):
        if self.grid_id != other.grid_id:
            raise GridMismatchError(f"{self.grid_id} vs {other.grid_id}")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid_id, self.values + other.values, self.is_form)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid_id, self.values - other.values, self.is_form)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid_id, self.values * other.values,
                                self.is_form or other.is_form)
        return GridFunction(self.grid_id, self.values * other, self.is_form)

    __rmul__ = __mul__


def grid_function(grid: QuadratureGrid, values, is_form: bool = False) -> GridFunction:
    values = np.asarray(values, dtype=complex)
    if values.shape != grid.weights.shape:
        raise GridMismatchError(
            f"value shape {values.shape} does not match grid {grid.grid_id}"
        )
    return GridFunction(grid.grid_id, values, is_form)


def sphere_inner(f: GridFunction, g: GridFunction, grid: QuadratureGrid) -> complex:
    """L^2 inner product <f, g> = int f conj(g) thetahat ^ dthetahat."""
    f._check(g)
    if f.grid_id != grid.grid_id:
        raise GridMismatchError(f"{f.grid_id} vs {grid.grid_id}")
    val = complex(np.sum(grid.weights * f.values * np.conj(g.values)))
    if f.is_form and g.is_form:
        val *= C_OMEGA
    return val


def sphere_lp_norm(f: GridFunction, p: float, grid: QuadratureGrid) -> float:
    """L^p norm on the sphere; form-marked functions carry sqrt(C_OMEGA)."""
    if f.grid_id != grid.grid_id:
        raise GridMismatchError(f"{f.grid_id} vs {grid.grid_id}")
    val = float(np.sum(grid.weights * np.abs(f.values) ** p)) ** (1.0 / p)
    if f.is_form:
        val *= C_OMEGA ** 0.5
    return val


def grid_to_json(grid: QuadratureGrid, path):
    """Dump nodes and weights for external tools."""
    payload = {
        "grid_id": grid.grid_id,
        "n_s": grid.n_s,
        "n_angle": grid.n_angle,
        "exactness_degree": grid.exactness_degree,
        "total_weight": float(grid.weights.sum()),
        "s": grid.s.tolist(),
        "xi1": grid.xi1.tolist(),
        "xi2": grid.xi2.tolist(),
        "weights": grid.weights.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
