"""End-to-end transfer pipeline: manufactured problems, report contents,
violating data families, and the conjugation equivalence of the two recipes."""

import json

import numpy as np
import pytest

from crsolve import basis as B
from crsolve import quadrature as Q
from crsolve import transfer as X
from crsolve.errors import GridMismatchError, PreconditionViolated

REPORT_KEYS = {
    "sphere_residual", "h1_residual_max", "h1_residual_rms",
    "precondition_component", "norm_l2_h1", "norm_l2_s3",
    "n", "grid", "seed", "elapsed_ms", "flagged",
}


@pytest.fixture(scope="module")
def setup():
    bs = B.orthonormal_basis(3)
    grid = Q.build_grid(3)
    return bs, grid


def test_report_points_bounds_and_determinism():
    z, t = X.report_points(200, seed=1)
    assert z.shape == t.shape == (200,)
    assert np.abs(z).max() <= 2.5
    assert np.abs(t).max() <= 6.0
    z2, t2 = X.report_points(200, seed=1)
    assert np.array_equal(z, z2) and np.array_equal(t, t2)
    z3, _ = X.report_points(200, seed=2)
    assert not np.array_equal(z, z3)


def test_chart_nodes_pole_free(setup):
    _, grid = setup
    z, t = X.chart_nodes(grid)
    assert np.all(np.isfinite(z)) and np.all(np.isfinite(t))


def test_manufactured_thm1_roundtrip(setup):
    bs, grid = setup
    f, v_true = X.manufactured_thm1(bs, grid, seed=3)
    sol, report = X.solve_thm1(f, bs, grid, seed=3)

    assert np.abs(sol.u_hat.coeffs - v_true.coeffs).max() < 1e-8
    assert report.sphere_residual < 1e-8
    assert report.h1_residual_max < 1e-5
    assert report.precondition_component < 1e-8
    assert not report.flagged
    assert report.n == bs.N
    assert report.grid == grid.grid_id
    assert report.seed == 3

    # the sphere data norm equals the group data norm (conformal isometry)
    assert report.norm_l2_h1 == pytest.approx(report.norm_l2_s3, rel=1e-3)

    # the recovered group function is finite at and around the origin
    vals = sol.evaluate(np.array([0.0, 0.1 + 0.2j]), np.array([0.0, -0.3]))
    assert np.all(np.isfinite(vals))


def test_manufactured_thm2_roundtrip(setup):
    bs, grid = setup
    f, p_true = X.manufactured_thm2(bs, grid, seed=4)
    sol, report = X.solve_thm2(f, bs, grid, seed=4)

    assert np.abs(sol.u_hat.coeffs - p_true.coeffs).max() < 1e-8
    assert report.sphere_residual < 1e-8
    assert report.h1_residual_max < 1e-4
    assert not report.flagged
    assert report.norm_l2_h1 == pytest.approx(report.norm_l2_s3, rel=1e-3)

    vals = sol.evaluate(np.array([0.0, -0.4j]), np.array([0.2, 0.0]))
    assert np.all(np.isfinite(vals))


def test_report_dict_and_json(setup, tmp_path):
    bs, grid = setup
    f, _ = X.manufactured_thm1(bs, grid, seed=5)
    _, report = X.solve_thm1(f, bs, grid, seed=5)
    d = report.to_dict()
    assert set(d) == REPORT_KEYS
    path = tmp_path / "report.json"
    report.to_json(path)
    with open(path) as fh:
        back = json.load(fh)
    assert set(back) == REPORT_KEYS
    assert back["sphere_residual"] == d["sphere_residual"]


def test_h1_violating_family(setup):
    bs, grid = setup
    data = X.h1_violating_data(bs, grid, index=2)
    assert data.is_form
    with pytest.warns(PreconditionViolated):
        _, report = X.solve_thm1(data, bs, grid)
    assert report.flagged
    assert report.precondition_component > 0.9
    # GridFunction data carries no group-side function to differentiate
    assert report.h1_residual_max == 0.0


def test_hardy_violating_family(setup):
    bs, grid = setup
    data = X.hardy_violating_data(bs, grid, index=1)
    assert not data.is_form
    with pytest.warns(PreconditionViolated):
        _, report = X.solve_thm2(data, bs, grid)
    assert report.flagged
    assert report.precondition_component > 0.9


def test_grid_function_data_must_match_grid(setup):
    bs, grid = setup
    other = Q.build_grid(4)
    data = Q.grid_function(other, np.ones(len(other), dtype=complex), is_form=True)
    with pytest.raises(GridMismatchError):
        X.solve_thm1(data, bs, grid)


def test_conjugation_links_the_recipes(setup):
    # conj of a first-equation solve of -conj(f) solves the adjoint equation
    bs, grid = setup
    f, _ = X.manufactured_thm2(bs, grid, seed=6)
    sol2, _ = X.solve_thm2(f, bs, grid)

    neg_conj_f = lambda z, t: -np.conj(f(z, t))
    sol1, _ = X.solve_thm1(neg_conj_f, bs, grid)

    z, t = X.report_points(50, seed=7)
    lhs = np.conj(sol1.evaluate(z, t))
    rhs = sol2.evaluate(z, t)
    assert np.abs(lhs - rhs).max() < 1e-10


def test_h1_residual_zero_data(setup):
    bs, grid = setup
    zero = Q.grid_function(grid, np.zeros(len(grid), dtype=complex), is_form=True)
    sol, report = X.solve_thm1(zero, bs, grid)
    assert report.sphere_residual == 0.0
    z, t = X.report_points(20, seed=8)
    stats = X.h1_residual(sol, lambda z_, t_: np.zeros_like(z_), z, t)
    assert stats["max"] < 1e-8 and stats["rms"] <= stats["max"]