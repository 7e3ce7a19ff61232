import io

import numpy as np
import pytest

from onebit_mimo.lp import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    LpProblem,
    SolverTolerances,
    dump_problem,
    enumerate_vertices_oracle,
    solve,
)

INF = np.inf


def random_problem(rng):
    """Small LP with a mix of finite, one-sided and free variables."""
    n = int(rng.integers(1, 7))
    m = int(rng.integers(0, 9))
    M = rng.normal(size=(m, n))
    b = rng.normal(size=m) + rng.uniform(0, 1.5)
    lo = rng.uniform(-2, 0, n)
    hi = rng.uniform(0, 2, n)
    kind = rng.integers(0, 4, n)
    lo = np.where((kind == 1) | (kind == 3), -INF, lo)
    hi = np.where((kind == 2) | (kind == 3), INF, hi)
    return LpProblem(rng.normal(size=n), M, b, lo, hi)


def test_single_binding_constraint():
    sol = solve(LpProblem([1], [[1]], [3], [-1], [5]))
    assert sol.status == OPTIMAL
    assert sol.values[0] == pytest.approx(3)
    assert sol.objective_value == pytest.approx(3)


def test_two_variable_margin_problem():
    p = LpProblem([0, 1], [[-1, 1], [1, 1]], [0, 2], [-1, -INF], [1, INF])
    sol = solve(p)
    assert sol.status == OPTIMAL
    assert np.allclose(sol.values, [1, 1])
    status, point, obj = enumerate_vertices_oracle(p)
    assert status == OPTIMAL and np.allclose(point, [1, 1]) and obj == pytest.approx(1)


def test_unbounded():
    p = LpProblem([1], np.zeros((0, 1)), [], [0], [INF])
    assert solve(p).status == UNBOUNDED
    assert enumerate_vertices_oracle(p)[0] == UNBOUNDED


def test_infeasible():
    p = LpProblem([1], [[1]], [-2], [0], [INF])
    assert solve(p).status == INFEASIBLE
    assert enumerate_vertices_oracle(p)[0] == INFEASIBLE


def test_box_only_best_corner():
    p = LpProblem([1, -2, 0.5], np.zeros((0, 3)), [], [-1, -3, 0], [1, 4, 2])
    sol = solve(p)
    status, point, obj = enumerate_vertices_oracle(p)
    assert status == OPTIMAL
    assert np.allclose(point, [1, -3, 2])
    assert sol.objective_value == pytest.approx(obj)


def test_oracle_rejects_large_problems():
    p = LpProblem(np.ones(7), np.zeros((0, 7)), [], -np.ones(7), np.ones(7))
    with pytest.raises(ValueError):
        enumerate_vertices_oracle(p)


def test_problem_validation():
    with pytest.raises(ValueError):
        LpProblem([1, 1], [[1]], [1], [0, 0], [1, 1])
    with pytest.raises(ValueError):
        LpProblem([1], [[1]], [1, 2], [0], [1])
    with pytest.raises(ValueError):
        LpProblem([1], [[1]], [1], [2], [1])


def check_certificate(p, sol):
    v = sol.values
    b = p.ineq_rhs
    assert np.all(p.ineq_matrix @ v <= b + 1e-8 * (1 + np.abs(b)))
    assert np.all(v >= p.lower_bounds) and np.all(v <= p.upper_bounds)
    assert sol.objective_value == pytest.approx(p.objective @ v, abs=1e-8)
    # complementary slackness on the rows, sign feasibility of the duals
    slack = b - p.ineq_matrix @ v
    assert np.all(sol.duals >= -1e-7)
    assert np.all(np.abs(sol.duals * slack) <= 1e-7)
    # reduced costs point into the active bounds
    d = sol.reduced_costs
    at_lo = np.isclose(v, p.lower_bounds)
    at_hi = np.isclose(v, p.upper_bounds)
    assert np.all((np.abs(d) <= 1e-7) | (at_lo & (d < 0)) | (at_hi & (d > 0)))
    # stationarity: c = M^T y + d
    assert np.allclose(p.objective, p.ineq_matrix.T @ sol.duals + d, atol=1e-7)


def test_random_against_vertex_oracle():
    rng = np.random.default_rng(2024)
    statuses = set()
    for _ in range(150):
        p = random_problem(rng)
        sol = solve(p)
        status, _, obj = enumerate_vertices_oracle(p)
        statuses.add(status)
        assert sol.status == status
        if status == OPTIMAL:
            assert sol.objective_value == pytest.approx(obj, abs=1e-7)
            check_certificate(p, sol)
    assert statuses == {OPTIMAL, UNBOUNDED, INFEASIBLE}


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_pivot_rules_agree(rule):
    rng = np.random.default_rng(7)
    tol = SolverTolerances(pivot_rule=rule)
    for _ in range(40):
        p = random_problem(rng)
        a, b = solve(p, tol), solve(p)
        assert a.status == b.status
        if a.optimal:
            assert a.objective_value == pytest.approx(b.objective_value, abs=1e-7)


def test_degenerate_problem_terminates():
    # many redundant constraints through the optimum
    n = 4
    rows = [np.eye(n)[i] for i in range(n)] * 3 + [np.ones(n)] * 3
    p = LpProblem(np.ones(n), np.array(rows), np.concatenate([np.zeros(3 * n), np.zeros(3)]),
                  -np.ones(n), np.ones(n))
    for rule in ("bland", "dantzig"):
        sol = solve(p, SolverTolerances(pivot_rule=rule))
        assert sol.status == OPTIMAL
        assert sol.objective_value == pytest.approx(0)


def test_deterministic():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = random_problem(rng)
        a, b = solve(p), solve(p)
        assert a.status == b.status
        if a.optimal:
            assert a.values.tobytes() == b.values.tobytes()


def test_iteration_limit_reports_failure():
    p = LpProblem([0, 1], [[-1, 1], [1, 1]], [0, 2], [-1, -INF], [1, INF])
    sol = solve(p, SolverTolerances(max_iterations=1))
    assert sol.status == "numerical_failure"
    assert sol.values is None


def test_dump_problem():
    p = LpProblem([0, 1], [[-1, 1], [1, 1]], [0, 2], [-1, -INF], [1, INF])
    buf = io.StringIO()
    dump_problem(p, buf)
    rows = [ln for ln in buf.getvalue().splitlines() if not ln.startswith("#")]
    assert rows == ["-1.0 1.0 0.0", "1.0 1.0 2.0"]
    assert "# lower -1.0 -inf" in buf.getvalue()
