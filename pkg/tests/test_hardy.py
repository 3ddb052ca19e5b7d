"""Hardy projection (two independent routes), the adjoint kernel, and the
constrained minimal-norm solvers."""

import warnings

import numpy as np
import pytest

from crsolve import basis as B
from crsolve import hardy as H
from crsolve import operators as O
from crsolve import quadrature as Q
from crsolve import testkit as T
from crsolve.errors import GridMismatchError, PreconditionViolated


@pytest.fixture(scope="module")
def setup():
    bs = B.orthonormal_basis(4)
    grid = Q.build_grid(4)
    return bs, grid


def test_mask_projections(setup):
    bs, _ = setup
    sf = T.random_coeffs(bs, seed=1)
    p = H.szego_project(bs, sf)
    assert not np.any(p.coeffs[~bs.hardy_mask])
    assert np.array_equal(p.coeffs[bs.hardy_mask], sf.coeffs[bs.hardy_mask])
    again = H.szego_project(bs, p)
    assert np.array_equal(again.coeffs, p.coeffs)

    form = T.random_coeffs(bs, seed=2, is_form=True)
    h = H.h1_project(bs, form)
    assert h.is_form
    assert not np.any(h.coeffs[~bs.antiholomorphic_mask])


def test_h1_kernel_basis_properties(setup):
    bs, _ = setup
    K = H.h1_kernel_basis(bs)
    dim = B.hardy_dimension(bs.N)
    assert K.shape == (bs.rank, dim)
    assert np.abs(K.conj().T @ K - np.eye(dim)).max() < 1e-12

    # every column is annihilated by the adjoint matrix
    star = O.lbar_basis_matrix(bs).conj().T
    assert np.abs(star @ K).max() < 1e-10

    # columns live on the antiholomorphic block only
    assert np.abs(K[~bs.antiholomorphic_mask, :]).max() < 1e-10

    # deterministic across calls (phases are pinned)
    K2 = H.h1_kernel_basis(bs)
    assert np.array_equal(K, K2)


def test_projection_pair(setup):
    bs, _ = setup
    pair = H.projection_pair(bs)
    assert pair.basis_id == bs.basis_id
    assert pair.check_idempotent() < 1e-12
    assert pair.h1_mask_deviation < 1e-10
    # Szego projector is exactly the Hardy mask
    assert np.array_equal(pair.szego, np.diag(bs.hardy_mask.astype(float)))


def test_kernel_route_matches_mask_route(setup):
    bs, grid = setup
    sf = T.random_coeffs(bs, seed=3)
    g = B.synthesize(bs, sf, grid)

    samples, out, diag = H.szego_kernel_analysis(g, bs, grid)
    direct = H.szego_project(bs, sf)
    assert np.abs(out.coeffs - direct.coeffs).max() < 1e-6
    ref = B.synthesize(bs, direct, grid)
    num = Q.sphere_lp_norm(Q.grid_function(grid, samples.values - ref.values), 2, grid)
    den = Q.sphere_lp_norm(ref, 2, grid)
    assert num / den < 1e-6

    assert set(diag) == {"damping", "aliasing", "analysis_residual"}
    assert diag["damping"] == 0.5
    assert diag["aliasing"] < 1e-5

    proj = H.szego_kernel_project(g, bs, grid)
    assert np.array_equal(proj.values, samples.values)


def test_kernel_route_validation(setup):
    bs, grid = setup
    g = Q.grid_function(grid, np.ones(len(grid), dtype=complex))
    for bad in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ValueError):
            H.szego_kernel_analysis(g, bs, grid, damping=bad)
    other = Q.build_grid(5)
    with pytest.raises(ValueError):
        H.szego_kernel_analysis(g, bs, other)


def test_solve_k1_recovers_and_constrains(setup):
    bs, grid = setup
    u0 = T.random_coeffs(bs, seed=4, mask=~bs.hardy_mask)
    ghat = O.zbar_hat_values(bs, u0, grid)

    with warnings.catch_warnings():
        warnings.simplefilter("error")  # a clean solve must not warn
        u, diag = H.solve_k1(ghat, bs, grid)

    assert not u.is_form
    assert np.abs(u.coeffs - u0.coeffs).max() < 1e-10
    assert diag.residual_rel < 1e-10
    assert not diag.flagged
    assert diag.unknowns == int((~bs.hardy_mask).sum())

    # data from u0 plus a Hardy piece yields the same (minimal-norm) solution
    hardy_part = T.random_coeffs(bs, seed=5, mask=bs.hardy_mask)
    shifted = B.SpectralFunction(bs.basis_id, u0.coeffs + hardy_part.coeffs)
    ghat2 = O.zbar_hat_values(bs, shifted, grid)
    u2, _ = H.solve_k1(ghat2, bs, grid)
    assert np.abs(u2.coeffs - u0.coeffs).max() < 1e-10
    assert not np.any(H.szego_project(bs, u2).coeffs)


def test_solve_k_recovers_and_constrains(setup):
    bs, grid = setup
    p0 = T.random_coeffs(bs, seed=6, mask=~bs.antiholomorphic_mask, is_form=True)
    fhat = B.synthesize(bs, O.apply_zbar_hat_star(bs, p0), grid)

    u, diag = H.solve_k(fhat, bs, grid)
    assert u.is_form
    assert np.abs(u.coeffs - p0.coeffs).max() < 1e-10
    assert diag.residual_rel < 1e-10
    assert not diag.flagged

    anti = T.random_coeffs(bs, seed=7, mask=bs.antiholomorphic_mask, is_form=True)
    shifted = B.SpectralFunction(bs.basis_id, p0.coeffs + anti.coeffs, is_form=True)
    fhat2 = B.synthesize(bs, O.apply_zbar_hat_star(bs, shifted), grid)
    u2, _ = H.solve_k(fhat2, bs, grid)
    assert np.abs(u2.coeffs - p0.coeffs).max() < 1e-10


def test_solve_precondition_warnings(setup):
    bs, grid = setup
    # pure cokernel data for the first solver
    anti = T.random_coeffs(bs, seed=8, mask=bs.antiholomorphic_mask)
    bad_g = Q.grid_function(
        grid,
        O.mu_factor(grid.zeta2) * B.synthesize(bs, anti, grid).values,
        is_form=True)
    with pytest.warns(PreconditionViolated):
        _, diag = H.solve_k1(bad_g, bs, grid)
    assert diag.flagged
    assert diag.precondition_component > 0.9

    # pure Hardy data for the second solver
    hardy = T.random_coeffs(bs, seed=9, mask=bs.hardy_mask)
    bad_f = B.synthesize(bs, hardy, grid)
    with pytest.warns(PreconditionViolated):
        _, diag2 = H.solve_k(bad_f, bs, grid)
    assert diag2.flagged
    assert diag2.precondition_component > 0.9


def test_solve_grid_mismatch(setup):
    bs, grid = setup
    other = Q.build_grid(5)
    f = Q.grid_function(other, np.ones(len(other), dtype=complex))
    with pytest.raises(GridMismatchError):
        H.solve_k(f, bs, grid)


def test_diagnostics_dict(setup):
    bs, grid = setup
    u0 = T.random_coeffs(bs, seed=10, mask=~bs.hardy_mask)
    ghat = O.zbar_hat_values(bs, u0, grid)
    _, diag = H.solve_k1(ghat, bs, grid)
    d = diag.to_dict()
    assert set(d) == {"residual_abs", "residual_rel", "precondition_component",
                      "analysis_residual", "flagged", "sigma_max", "sigma_min",
                      "unknowns"}
    assert d["sigma_max"] >= d["sigma_min"] > 0
