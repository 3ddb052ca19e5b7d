"""Hardy-space structure: projections, kernel bases, minimal-norm solvers.

On the sphere the kernel of the transferred operator inside degree-N
polynomials is exactly the Hardy part (holomorphic restrictions, bidegrees
(p, 0)); the cokernel on the form side is spanned by the conjugates
(bidegrees (0, q)) written against the unit-modulus frame.  Both projectors
are diagonal in the orthonormal basis, which makes the constrained
least-squares solvers below small dense problems:

  * solve_k1: given form data g, find u with hat Zbar u = g of minimal norm
    subject to a vanishing Szego projection.
  * solve_k: given function data f orthogonal to Hardy, find a form u with
    (hat Zbar)^* u = f of minimal norm.

Each solver reports the true grid residual of its output, not the reduced
least-squares residual, plus the component of the data violating the
solvability precondition (a warning, not an error: the answer returned is
the least-squares best approximation either way).
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
import warnings

import numpy as np

from .basis import (OrthonormalBasis, SpectralFunction, analyze,
                    hardy_dimension, synthesize)
from .errors import PreconditionViolated
from .operators import (OperatorMatrix, lbar_basis_matrix, mu_factor,
                        mubar_factor)
from .quadrature import (GridFunction, QuadratureGrid, grid_function,
                         sphere_lp_norm)

SZEGO_KERNEL_CONSTANT = 1.0 / (16.0 * np.pi ** 2)


# ---------------------------------------------------------------------------
# coefficient-level projections

def szego_project(basis: OrthonormalBasis, sf: SpectralFunction) -> SpectralFunction:
    """Orthogonal projection onto the Hardy part (bidegrees (p, 0))."""
    basis.check(sf)
    return SpectralFunction(basis.basis_id,
                            np.where(basis.hardy_mask, sf.coeffs, 0.0),
                            is_form=sf.is_form)


def h1_project(basis: OrthonormalBasis, sf: SpectralFunction) -> SpectralFunction:
    """Projection of a form onto the cokernel (antiholomorphic parts)."""
    basis.check(sf)
    return SpectralFunction(basis.basis_id,
                            np.where(basis.antiholomorphic_mask, sf.coeffs, 0.0),
                            is_form=sf.is_form)


def szego_matrix(basis: OrthonormalBasis) -> np.ndarray:
    return np.diag(basis.hardy_mask.astype(float))


def h1_kernel_basis(basis: OrthonormalBasis, star_matrix=None,
                    cut: float = 1e-8) -> np.ndarray:
    """Orthonormal basis of the adjoint kernel, found numerically.

    Returns a (rank x dim) array of form coefficient vectors spanning
    ker (hat Zbar)^*.  The kernel is computed from the SVD of the adjoint
    matrix rather than read off the bidegree bookkeeping, then checked
    against it: the span must coincide with the antiholomorphic coordinate
    mask, and the dimension must equal the Hardy dimension.
    """
    if star_matrix is None:
        star_matrix = lbar_basis_matrix(basis).conj().T
    _, s, vh = np.linalg.svd(star_matrix)
    null = s <= cut * s[0]
    dim = int(np.count_nonzero(null))
    expected = hardy_dimension(basis.N)
    if dim != expected:
        raise ValueError(f"adjoint kernel dimension {dim}, expected {expected}")
    K = vh[null].conj().T
    # fix phases so reruns produce identical columns
    for j in range(K.shape[1]):
        k = int(np.argmax(np.abs(K[:, j])))
        K[:, j] *= np.abs(K[k, j]) / K[k, j]
    P = K @ K.conj().T
    mask_dev = float(np.abs(P - np.diag(basis.antiholomorphic_mask.astype(float))).max())
    if mask_dev > 1e-8:
        raise ValueError(f"adjoint kernel off the antiholomorphic block by {mask_dev:.3e}")
    return K


@dataclass
class ProjectionPair:
    """Szego projector and cokernel projector over one basis."""
    basis_id: str
    szego: np.ndarray
    h1: np.ndarray
    h1_mask_deviation: float

    def check_idempotent(self) -> float:
        d1 = np.abs(self.szego @ self.szego - self.szego).max()
        d2 = np.abs(self.h1 @ self.h1 - self.h1).max()
        d3 = np.abs(self.h1 - self.h1.conj().T).max()
        return float(max(d1, d2, d3))


def projection_pair(basis: OrthonormalBasis, star_matrix=None) -> ProjectionPair:
    K = h1_kernel_basis(basis, star_matrix=star_matrix)
    P1 = K @ K.conj().T
    pair = ProjectionPair(
        basis_id=basis.basis_id,
        szego=szego_matrix(basis),
        h1=P1,
        h1_mask_deviation=float(
            np.abs(P1 - np.diag(basis.antiholomorphic_mask.astype(float))).max()),
    )
    dev = pair.check_idempotent()
    if dev > 1e-12:
        raise ValueError(f"projector defect {dev:.3e}")
    return pair


# ---------------------------------------------------------------------------
# Szego projection through the reproducing kernel

def szego_kernel_analysis(g: GridFunction, basis: OrthonormalBasis,
                          grid: QuadratureGrid, damping: float = 0.5,
                          chunk: int = 2048):
    """Hardy projection computed by integrating against the damped kernel.

    The reproducing kernel c (1 - <zeta, eta>)^{-2} is integrated with the
    pairing damped by r = damping: the damped projection scales each Hardy
    degree p by r^p, which is then unwound degree by degree.  Damping keeps
    the kernel bounded on the diagonal so plain quadrature converges; the
    price is amplified angular aliasing as r approaches 1, so r defaults to
    1/2.  Returns (samples, coefficients, diagnostics); the residual
    non-Hardy content picked up by the kernel route is reported as
    ``aliasing`` before being dropped.
    """
    if not (0.0 < damping < 1.0):
        raise ValueError("damping must lie in (0, 1)")
    if g.grid_id != grid.grid_id:
        raise ValueError(f"{g.grid_id} vs {grid.grid_id}")
    n = len(grid)
    wg = grid.weights * g.values
    proj = np.empty(n, dtype=complex)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        inner = (grid.zeta1[lo:hi, None] * grid.zeta1[None, :].conj()
                 + grid.zeta2[lo:hi, None] * grid.zeta2[None, :].conj())
        kern = SZEGO_KERNEL_CONSTANT / (1.0 - damping * inner) ** 2
        proj[lo:hi] = kern @ wg
    sf, analysis_residual = analyze(basis, grid_function(grid, proj), grid)
    aliasing = float(np.linalg.norm(sf.coeffs[~basis.hardy_mask]))
    coeffs = np.where(basis.hardy_mask,
                      sf.coeffs / damping ** basis.p_deg.astype(float), 0.0)
    out = SpectralFunction(basis.basis_id, coeffs, is_form=g.is_form)
    samples = synthesize(basis, out, grid)
    diag = {"damping": damping, "aliasing": aliasing,
            "analysis_residual": analysis_residual}
    return samples, out, diag


def szego_kernel_project(g: GridFunction, basis: OrthonormalBasis,
                         grid: QuadratureGrid, damping: float = 0.5,
                         chunk: int = 2048) -> GridFunction:
    """Samples of the kernel-route Hardy projection of g."""
    samples, _, _ = szego_kernel_analysis(g, basis, grid, damping, chunk)
    return samples


# ---------------------------------------------------------------------------
# solvers

@dataclass
class SolveDiagnostics:
    residual_abs: float
    residual_rel: float
    precondition_component: float
    analysis_residual: float
    flagged: bool
    sigma_max: float
    sigma_min: float
    unknowns: int

    def to_dict(self):
        return asdict(self)


def _least_squares(A, d):
    sol, _, _, sigma = np.linalg.lstsq(A, d, rcond=None)
    return sol, float(sigma[0]), float(sigma[-1])


def solve_k1(ghat: GridFunction, basis: OrthonormalBasis, grid: QuadratureGrid,
             op: OperatorMatrix | None = None,
             precondition_tol: float = 1e-6):
    """Minimal-norm solve of hat Zbar u = g with vanishing Szego projection.

    ``ghat`` holds pointwise form samples (twist included).  The Szego
    constraint removes exactly the Hardy coefficients of u, so the
    constrained problem is an unconstrained least squares over the non-Hardy
    columns.  The returned residual is the pointwise grid residual of the
    reconstructed solution, and the cokernel component of the data is
    reported (and warned about) rather than silently absorbed.
    """
    A = op.matrix if op is not None else lbar_basis_matrix(basis)
    mubar = mubar_factor(grid.zeta2)
    d_sf, analysis_residual = analyze(
        basis, grid_function(grid, mubar * ghat.values), grid)
    d = d_sf.coeffs

    cols = ~basis.hardy_mask
    sol, smax, smin = _least_squares(A[:, cols], d)
    coeffs = np.zeros(basis.rank, dtype=complex)
    coeffs[cols] = sol
    u = SpectralFunction(basis.basis_id, coeffs, is_form=False)

    # true pointwise residual on the grid
    lbar_u = SpectralFunction(basis.basis_id, A @ coeffs, is_form=False)
    resid_vals = mu_factor(grid.zeta2) * synthesize(basis, lbar_u, grid).values \
        - ghat.values
    resid = grid_function(grid, resid_vals, is_form=True)
    residual_abs = sphere_lp_norm(resid, 2, grid)
    gnorm = sphere_lp_norm(ghat, 2, grid)
    residual_rel = residual_abs / gnorm if gnorm > 0 else residual_abs

    precond = float(np.linalg.norm(d[basis.antiholomorphic_mask]))
    dnorm = float(np.linalg.norm(d))
    precond_rel = precond / dnorm if dnorm > 0 else 0.0
    flagged = precond_rel > precondition_tol
    if flagged:
        warnings.warn(
            f"data has a cokernel component of relative size {precond_rel:.3e}",
            PreconditionViolated)
    diag = SolveDiagnostics(
        residual_abs=float(residual_abs), residual_rel=float(residual_rel),
        precondition_component=precond_rel,
        analysis_residual=analysis_residual, flagged=flagged,
        sigma_max=smax, sigma_min=smin, unknowns=int(np.count_nonzero(cols)))
    return u, diag


def solve_k(fhat: GridFunction, basis: OrthonormalBasis, grid: QuadratureGrid,
            op: OperatorMatrix | None = None,
            precondition_tol: float = 1e-6):
    """Minimal-norm solve of (hat Zbar)^* u = f for a form u.

    Minimal norm is equivalent to u orthogonal to the adjoint kernel, i.e.
    no antiholomorphic coefficients, so again a column restriction.  The
    precondition is that f be orthogonal to the Hardy space; its Hardy
    component is reported and warned about.
    """
    A = op.matrix if op is not None else lbar_basis_matrix(basis)
    Astar = A.conj().T
    d_sf, analysis_residual = analyze(basis, fhat, grid)
    d = d_sf.coeffs

    cols = ~basis.antiholomorphic_mask
    sol, smax, smin = _least_squares(Astar[:, cols], d)
    coeffs = np.zeros(basis.rank, dtype=complex)
    coeffs[cols] = sol
    u = SpectralFunction(basis.basis_id, coeffs, is_form=True)

    star_u = SpectralFunction(basis.basis_id, Astar @ coeffs, is_form=False)
    resid_vals = synthesize(basis, star_u, grid).values - fhat.values
    resid = grid_function(grid, resid_vals)
    residual_abs = sphere_lp_norm(resid, 2, grid)
    fnorm = sphere_lp_norm(fhat, 2, grid)
    residual_rel = residual_abs / fnorm if fnorm > 0 else residual_abs

    precond = float(np.linalg.norm(d[basis.hardy_mask]))
    dnorm = float(np.linalg.norm(d))
    precond_rel = precond / dnorm if dnorm > 0 else 0.0
    flagged = precond_rel > precondition_tol
    if flagged:
        warnings.warn(
            f"data has a Hardy component of relative size {precond_rel:.3e}",
            PreconditionViolated)
    diag = SolveDiagnostics(
        residual_abs=float(residual_abs), residual_rel=float(residual_rel),
        precondition_component=precond_rel,
        analysis_residual=analysis_residual, flagged=flagged,
        sigma_max=smax, sigma_min=smin, unknowns=int(np.count_nonzero(cols)))
    return u, diag
