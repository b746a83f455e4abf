import json

import numpy as np
import pytest
import scipy.sparse as sp

from rbfqlsa.assembly import assemble_collocation, assemble_evaluation, assemble_rhs
from rbfqlsa.geometry import Domain, make_point_set
from rbfqlsa.kernel import make_wendland
from rbfqlsa.solver import (
    ConvergenceError,
    condition_number,
    conjugate_gradient,
    evaluate_solution_at,
    l2_relative_error,
    manufactured_solution,
    solve_system,
)


def spd(n, seed=0):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return Q @ np.diag(np.linspace(1, 50, n)) @ Q.T


def test_cg_matches_dense_solve():
    A = spd(30)
    b = np.arange(30.0)
    x, iters, res = conjugate_gradient(A, b, tol=1e-12)
    np.testing.assert_allclose(x, np.linalg.solve(A, b), rtol=1e-9)
    assert res <= 1e-12 and 0 < iters <= 300


def test_cg_sparse_input_and_zero_rhs():
    A = sp.csc_matrix(spd(10))
    x, iters, res = conjugate_gradient(A, np.zeros(10))
    assert iters == 0 and not x.any()


def test_cg_deterministic():
    A = spd(25, 4)
    b = np.ones(25)
    a1 = conjugate_gradient(A, b)[0]
    a2 = conjugate_gradient(A, b)[0]
    assert np.array_equal(a1, a2)


def test_cg_failures():
    A = spd(20)
    with pytest.raises(ConvergenceError):
        conjugate_gradient(A, np.ones(20), tol=1e-14, max_iter=2)
    with pytest.raises(ValueError):
        conjugate_gradient(np.triu(A), np.ones(20))
    with pytest.raises(ValueError):
        conjugate_gradient(-np.eye(3), np.ones(3))
    with pytest.raises(ValueError):
        conjugate_gradient(A, np.ones(20), tol=0)


def test_condition_number():
    assert condition_number(np.diag([2.0, 4.0, 10.0])) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        condition_number(np.diag([1.0, -1.0]))


@pytest.fixture(scope="module")
def problem_1d():
    pts = make_point_set(Domain(1), 20)
    K = make_wendland(1, 2)
    u, f, g = manufactured_solution(1)
    system = assemble_collocation(K, pts, 0.9)
    b = assemble_rhs(f, g, pts, 0.9)
    ev = assemble_evaluation(K, pts, 0.9)
    return pts, K, system.with_rhs(b), ev, u


def test_direct_and_cg_agree(problem_1d):
    pts, K, system, ev, u = problem_1d
    direct = solve_system(system, ev, method="direct")
    cg = solve_system(system, ev, method="cg", tol=1e-12, max_iter=20000)
    np.testing.assert_allclose(cg.u_bar_at_points, direct.u_bar_at_points, rtol=1e-6, atol=1e-8)
    assert direct.kappa > 1


def test_collocation_interpolates_boundary_and_is_accurate(problem_1d):
    pts, K, system, ev, u = problem_1d
    res = solve_system(system, ev)
    ni = pts.n_interior
    np.testing.assert_allclose(res.u_bar_at_points[ni:], 0.0, atol=1e-8)
    assert l2_relative_error(res.u_bar_at_points, u(pts.points)) < 0.2


def test_error_decreases_under_refinement():
    K = make_wendland(1, 2)
    u, f, g = manufactured_solution(1)
    errs = []
    for n in (20, 80):
        pts = make_point_set(Domain(1), n)
        system = assemble_collocation(K, pts, 0.9).with_rhs(assemble_rhs(f, g, pts, 0.9))
        res = solve_system(system, assemble_evaluation(K, pts, 0.9), compute_kappa=False)
        errs.append(l2_relative_error(res.u_bar_at_points, u(pts.points)))
    assert errs[1] < errs[0] / 8


def test_evaluate_solution_at_matches_M(problem_1d):
    pts, K, system, ev, u = problem_1d
    res = solve_system(system, ev)
    at = evaluate_solution_at(K, pts, res.c, 0.9, pts.points)
    np.testing.assert_allclose(at, res.u_bar_at_points, rtol=1e-12, atol=1e-12)
    assert isinstance(evaluate_solution_at(K, pts, res.c, 0.9, np.array([0.3])), float)
    with pytest.raises(ValueError):
        evaluate_solution_at(K, pts, res.c[:-1], 0.9, pts.points)


def test_result_json(problem_1d):
    pts, K, system, ev, u = problem_1d
    data = json.loads(solve_system(system, ev).to_json())
    assert len(data["c"]) == pts.n
    with pytest.raises(ValueError):
        solve_system(system, ev, method="lu")


def test_manufactured_solution_consistent():
    u, f, g = manufactured_solution(2)
    x = np.array([[0.3, 0.4]])
    h = 1e-4
    lap = sum(
        (u(x + h * e) - 2 * u(x) + u(x - h * e)) / h**2 for e in (np.array([1.0, 0]), np.array([0, 1.0]))
    )
    assert f(x)[0] == pytest.approx(-lap[0], rel=1e-6)
    assert g(x)[0] == 0.0


def test_l2_relative_error():
    assert l2_relative_error([1.0, 1.0], [1.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        l2_relative_error([1.0], [0.0])
