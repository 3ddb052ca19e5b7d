"""The full verification suite, one test per check.

Each test runs one check from ``crsolve.checks`` against a shared context
(seed 7, default degrees) and prints the one-line summary so a verbose test
run shows every measured quantity next to its threshold.
"""

import pytest

from crsolve import checks


@pytest.fixture(scope="module")
def ctx():
    return checks.Context(seed=7)


def _run(check, ctx, capsys):
    res = check(ctx)
    with capsys.disabled():
        print()
        print(res.line())
    assert res.passed, res.line()
    return res


def test_01_chart_round_trip(ctx, capsys):
    _run(checks.check_01_round_trip, ctx, capsys)


def test_02_gram_rank_and_moments(ctx, capsys):
    _run(checks.check_02_gram_rank, ctx, capsys)


def test_03_quadrature_exactness(ctx, capsys):
    _run(checks.check_03_quadrature_exactness, ctx, capsys)


def test_04_conformal_identity(ctx, capsys):
    _run(checks.check_04_conformal_identity, ctx, capsys)


def test_05_cr_weights_annihilated(ctx, capsys):
    _run(checks.check_05_cr_weights, ctx, capsys)


def test_06_adjoint_formula(ctx, capsys):
    _run(checks.check_06_adjoint_formula, ctx, capsys)


def test_07_heisenberg_adjoint_pairing(ctx, capsys):
    _run(checks.check_07_heisenberg_adjoint, ctx, capsys)


def test_08_szego_projector_routes(ctx, capsys):
    _run(checks.check_08_szego, ctx, capsys)


def test_09_solution_operators(ctx, capsys):
    _run(checks.check_09_solution_operators, ctx, capsys)


def test_10_first_equation_pipeline(ctx, capsys):
    _run(checks.check_10_thm1_pipeline, ctx, capsys)


def test_11_adjoint_equation_pipeline(ctx, capsys):
    _run(checks.check_11_thm2_pipeline, ctx, capsys)


def test_12_kernel_transfers(ctx, capsys):
    _run(checks.check_12_kernel_transfers, ctx, capsys)


def test_13_cutoff_scaling(ctx, capsys):
    _run(checks.check_13_cutoff_scaling, ctx, capsys)


def test_14_convergence_and_stability(ctx, capsys):
    _run(checks.check_14_convergence, ctx, capsys)
