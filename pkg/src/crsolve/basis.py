"""Orthonormal polynomial basis for the restricted sphere functions.

Restrictions to S3 of polynomials in (zeta, zetabar) of total degree <= N are
spanned by monomials zeta^a zetabar^b, but the spanning set is degenerate:
|zeta1|^2 + |zeta2|^2 - 1 vanishes identically on the sphere.  The space
splits into mutually orthogonal bidegree components indexed by (p, q) with
p + q <= N; the (p, q) component has dimension p + q + 1 and the total rank is

    rank(N) = (N+1)(N+2)(2N+3) / 6.

The basis is built bidegree by bidegree: monomials of bidegree (p, q) are
deflated against everything of lower degree (their span contains all
(p - j, q - j) components) and the leftover block is orthonormalized by an
eigendecomposition of its exact Gram matrix.  Monomial inner products have
the closed form

    int zeta^a zetabar^b dV = 0 unless a == b,
    int |zeta1|^{2 a1} |zeta2|^{2 a2} dV = RHO_S * 2 pi^2 * a1! a2! / (a1+a2+1)!

with dV the contact volume; the closed form is validated against Monte-Carlo
sampling in the test suite before anything downstream trusts it.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
import json

import numpy as np

from .errors import BasisMismatchError, GridMismatchError
from .geometry import RHO_S
from .quadrature import GridFunction, QuadratureGrid, grid_function

#: relative eigenvalue cut treating a Gram direction as the sphere relation
RANK_CUT = 1e-10

#: ambiguity guard: no eigenvalue may fall within this factor of the cut
CUT_MARGIN = 50.0


@dataclass(frozen=True)
class MonomialIndex:
    a1: int
    a2: int
    b1: int
    b2: int

    @property
    def p(self) -> int:
        return self.a1 + self.a2

    @property
    def q(self) -> int:
        return self.b1 + self.b2

    @property
    def degree(self) -> int:
        return self.p + self.q


def monomials(N: int) -> list[MonomialIndex]:
    """All monomial indices of total degree <= N, grouped by bidegree.

    Order: by degree, then holomorphic degree p, then (a1, b1) lexicographic.
    The order is part of the basis identity and must stay stable.
    """
    out = []
    for d in range(N + 1):
        for p in range(d + 1):
            q = d - p
            for a1 in range(p + 1):
                for b1 in range(q + 1):
                    out.append(MonomialIndex(a1, p - a1, b1, q - b1))
    return out


def monomial_moment(a1: int, a2: int, b1: int, b2: int) -> float:
    """Exact integral of zeta^a zetabar^b over S3 with the contact volume."""
    if a1 != b1 or a2 != b2:
        return 0.0
    return RHO_S * 2.0 * np.pi ** 2 * factorial(a1) * factorial(a2) / factorial(a1 + a2 + 1)


def gram_matrix(monos: list[MonomialIndex]) -> np.ndarray:
    """Exact Gram matrix G[i, j] = <m_i, m_j> of a monomial list."""
    a1 = np.array([m.a1 for m in monos])
    a2 = np.array([m.a2 for m in monos])
    b1 = np.array([m.b1 for m in monos])
    b2 = np.array([m.b2 for m in monos])
    # <m_i, m_j> integrates zeta^(a_i + b_j) zetabar^(b_i + a_j)
    e1 = a1[:, None] + b1[None, :]
    e2 = a2[:, None] + b2[None, :]
    f1 = b1[:, None] + a1[None, :]
    f2 = b2[:, None] + a2[None, :]
    nz = (e1 == f1) & (e2 == f2)
    dmax = int(e1.max() + e2.max()) + 2
    fact = np.array([float(factorial(k)) for k in range(dmax)])
    vals = RHO_S * 2.0 * np.pi ** 2 * fact[e1] * fact[e2] / fact[e1 + e2 + 1]
    return np.where(nz, vals, 0.0)


def rank_formula(N: int) -> int:
    return (N + 1) * (N + 2) * (2 * N + 3) // 6


def hardy_dimension(N: int) -> int:
    return (N + 1) * (N + 2) // 2


def gram_rank(N: int, rel_cut: float = RANK_CUT):
    """Numerical rank of the full monomial Gram at a relative eigenvalue cut.

    Returns (rank, eigenvalues).  Raises if any eigenvalue sits within
    CUT_MARGIN of the cut, which would make the rank call ambiguous.
    """
    G = gram_matrix(monomials(N))
    lam = np.linalg.eigvalsh(G)
    cut = rel_cut * lam[-1]
    ambiguous = (np.abs(lam) > cut / CUT_MARGIN) & (np.abs(lam) < cut * CUT_MARGIN)
    if np.any(ambiguous):
        raise ValueError(f"Gram spectrum ambiguous at cut {cut:.3e}: "
                         f"{lam[ambiguous]}")
    return int(np.count_nonzero(lam > cut)), lam


@dataclass
class OrthonormalBasis:
    """Orthonormal basis of the degree-N restricted polynomials.

    ``Q`` maps orthonormal coefficients to monomial coefficients
    (n_monomials x rank).  Each basis vector has a sharp bidegree recorded in
    ``p_deg`` / ``q_deg``; Hardy vectors are exactly those with q_deg == 0.
    """

    N: int
    monos: list[MonomialIndex]
    gram: np.ndarray
    Q: np.ndarray
    p_deg: np.ndarray
    q_deg: np.ndarray
    discarded_per_block: dict
    basis_id: str

    @property
    def rank(self) -> int:
        return self.Q.shape[1]

    @property
    def hardy_mask(self) -> np.ndarray:
        return self.q_deg == 0

    @property
    def antiholomorphic_mask(self) -> np.ndarray:
        return self.p_deg == 0

    def check(self, sf: "SpectralFunction"):
        if sf.basis_id != self.basis_id:
            raise BasisMismatchError(f"{sf.basis_id} vs {self.basis_id}")


def orthonormal_basis(N: int) -> OrthonormalBasis:
    """Build the orthonormal basis, hard-failing on any rank surprise.

    Per bidegree (p, q) the monomial block has (p+1)(q+1) columns of which
    exactly p*q must fall below the relative cut (they reproduce lower
    bidegrees through the sphere relation).  Any other count aborts.
    """
    monos = monomials(N)
    G = gram_matrix(monos)
    lam_all = np.linalg.eigvalsh(G)
    cut = RANK_CUT * lam_all[-1]

    n_mono = len(monos)
    idx_of = {}
    for i, m in enumerate(monos):
        idx_of.setdefault((m.p, m.q), []).append(i)

    cols = []
    p_deg = []
    q_deg = []
    discarded = {}
    Qb = np.zeros((n_mono, 0))
    for d in range(N + 1):
        for p in range(d + 1):
            q = d - p
            ids = idx_of[(p, q)]
            M = np.zeros((n_mono, len(ids)))
            M[ids, np.arange(len(ids))] = 1.0
            # two-pass deflation against everything already built
            for _ in range(2):
                if Qb.shape[1]:
                    M = M - Qb @ (Qb.conj().T @ (G @ M))
            B = M.conj().T @ (G @ M)
            B = 0.5 * (B + B.conj().T)
            lam, V = np.linalg.eigh(B)
            ambiguous = (np.abs(lam) > cut / CUT_MARGIN) & (np.abs(lam) < cut * CUT_MARGIN)
            if np.any(ambiguous):
                raise ValueError(
                    f"bidegree ({p},{q}) spectrum ambiguous at cut {cut:.3e}")
            keep = lam > cut
            n_drop = int(np.count_nonzero(~keep))
            if n_drop != p * q:
                raise ValueError(
                    f"bidegree ({p},{q}): discarded {n_drop} directions, "
                    f"expected {p * q}")
            discarded[(p, q)] = n_drop
            new = M @ (V[:, keep] / np.sqrt(lam[keep]))
            Qb = np.hstack([Qb, new])
            cols.append(new)
            p_deg += [p] * new.shape[1]
            q_deg += [q] * new.shape[1]

    Q = Qb
    rank = Q.shape[1]
    if rank != rank_formula(N):
        raise ValueError(f"rank {rank} != expected {rank_formula(N)}")
    dev = np.abs(Q.conj().T @ (G @ Q) - np.eye(rank)).max()
    if dev > 1e-12:
        raise ValueError(f"orthonormality defect {dev:.3e} exceeds 1e-12")
    return OrthonormalBasis(
        N=N,
        monos=monos,
        gram=G,
        Q=Q,
        p_deg=np.array(p_deg),
        q_deg=np.array(q_deg),
        discarded_per_block=discarded,
        basis_id=f"s3mono-N{N}-v1",
    )


# ---------------------------------------------------------------------------
# coefficient functions

@dataclass
class SpectralFunction:
    """Coefficients in an orthonormal basis.

    For ``is_form`` functions the coefficients describe the polynomial part
    of a (0,1)-form coefficient written against the unit-modulus frame: the
    pointwise value is mu * (polynomial) where mu is the transfer factor.
    Storing the polynomial part keeps every operator matrix exact.
    """

    basis_id: str
    coeffs: np.ndarray
    is_form: bool = False

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def monomial_values(monos, zeta1, zeta2, out=None):
    """Evaluate every monomial at the given points: (n_points, n_mono)."""
    zeta1 = np.asarray(zeta1, dtype=complex).ravel()
    zeta2 = np.asarray(zeta2, dtype=complex).ravel()
    nmax = max(max(m.a1, m.a2, m.b1, m.b2) for m in monos) + 1
    P1 = np.empty((zeta1.size, nmax), dtype=complex)
    P2 = np.empty_like(P1)
    P1[:, 0] = 1.0
    P2[:, 0] = 1.0
    for k in range(1, nmax):
        P1[:, k] = P1[:, k - 1] * zeta1
        P2[:, k] = P2[:, k - 1] * zeta2
    a1 = np.array([m.a1 for m in monos])
    a2 = np.array([m.a2 for m in monos])
    b1 = np.array([m.b1 for m in monos])
    b2 = np.array([m.b2 for m in monos])
    vals = P1[:, a1]
    vals = vals * P2[:, a2]
    vals = vals * np.conj(P1)[:, b1]
    vals = vals * np.conj(P2)[:, b2]
    return vals


def synthesize_at(basis: OrthonormalBasis, coeffs, zeta1, zeta2,
                  chunk: int = 4096) -> np.ndarray:
    """Evaluate a coefficient vector at arbitrary sphere points."""
    mono_c = basis.Q @ np.asarray(coeffs, dtype=complex)
    zeta1 = np.asarray(zeta1, dtype=complex).ravel()
    zeta2 = np.asarray(zeta2, dtype=complex).ravel()
    out = np.empty(zeta1.size, dtype=complex)
    for lo in range(0, zeta1.size, chunk):
        hi = min(lo + chunk, zeta1.size)
        out[lo:hi] = monomial_values(basis.monos, zeta1[lo:hi], zeta2[lo:hi]) @ mono_c
    return out


def synthesize(basis: OrthonormalBasis, sf: SpectralFunction,
               grid: QuadratureGrid) -> GridFunction:
    """Sample a spectral function on a grid.  Form twists are NOT applied
    here; callers multiplying by the unit-modulus frame do so explicitly."""
    basis.check(sf)
    vals = synthesize_at(basis, sf.coeffs, grid.zeta1, grid.zeta2)
    return grid_function(grid, vals, is_form=sf.is_form)


def analyze(basis: OrthonormalBasis, g: GridFunction, grid: QuadratureGrid,
            chunk: int = 4096):
    """Project grid samples onto the basis.

    Returns (SpectralFunction, residual_norm) where the residual is the grid
    L^2 norm of the difference between the samples and the reconstructed
    polynomial.  Requires grid exactness at least 2N so that the discrete
    projection agrees with the exact one.
    """
    if g.grid_id != grid.grid_id:
        raise GridMismatchError(f"{g.grid_id} vs {grid.grid_id}")
    if grid.exactness_degree < 2 * basis.N:
        raise GridMismatchError(
            f"grid exactness {grid.exactness_degree} below 2N = {2 * basis.N}")
    npts = grid.weights.size
    raw = np.zeros(len(basis.monos), dtype=complex)
    wg = grid.weights * g.values
    for lo in range(0, npts, chunk):
        hi = min(lo + chunk, npts)
        V = monomial_values(basis.monos, grid.zeta1[lo:hi], grid.zeta2[lo:hi])
        raw += V.conj().T @ wg[lo:hi]
    coeffs = basis.Q.conj().T @ raw
    sf = SpectralFunction(basis.basis_id, coeffs, is_form=g.is_form)
    recon = synthesize(basis, sf, grid)
    residual = float(np.sqrt(np.sum(grid.weights
                                    * np.abs(g.values - recon.values) ** 2)))
    return sf, residual


def basis_metadata_json(basis: OrthonormalBasis, path):
    payload = {
        "basis_id": basis.basis_id,
        "N": basis.N,
        "rank": basis.rank,
        "monomial_count": len(basis.monos),
        "hardy_dimension": int(np.count_nonzero(basis.hardy_mask)),
        "bidegrees": [[int(p), int(q)] for p, q in zip(basis.p_deg, basis.q_deg)],
        "discarded_per_block": {f"{p},{q}": int(n)
                                for (p, q), n in basis.discarded_per_block.items()},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
