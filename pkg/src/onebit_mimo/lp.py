"""Dense bounded-variable primal simplex with Bland's rule.

Problems have the form

    maximize    c @ v
    subject to  M @ v <= b
                lo <= v <= hi      (entries of lo/hi may be infinite)

The solver keeps a full tableau (rows = constraints, columns = structural
variables, slacks and phase-one artificials). Nonbasic variables rest at a
finite bound, or at zero when free. Entering and leaving variables are picked
by lowest index, which makes the pivot sequence both terminating and
deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import IO, Optional

import numba
import numpy as np

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical_failure"


class LpNumericalError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverTolerances:
    feasibility: float = 1e-8
    optimality: float = 1e-9
    pivot: float = 1e-11
    refactor_every: int = 64
    # "dantzig": largest reduced cost, falling back to Bland's rule after
    # degenerate_limit stalled pivots; "bland": lowest index throughout
    pivot_rule: str = "dantzig"
    degenerate_limit: int = 20
    max_iterations: Optional[int] = None


DEFAULT_TOLERANCES = SolverTolerances()


@dataclass(frozen=True)
class LpProblem:
    objective: np.ndarray
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray
    lower_bounds: np.ndarray
    upper_bounds: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        n = c.size
        M = np.asarray(self.ineq_matrix, dtype=float)
        if M.size == 0:
            M = M.reshape(0, n)
        b = np.asarray(self.ineq_rhs, dtype=float).reshape(-1)
        lo = np.asarray(self.lower_bounds, dtype=float).reshape(-1)
        hi = np.asarray(self.upper_bounds, dtype=float).reshape(-1)
        if M.ndim != 2 or M.shape[1] != n:
            raise ValueError(f"ineq_matrix must have {n} columns, got shape {M.shape}")
        if b.size != M.shape[0]:
            raise ValueError("ineq_rhs length does not match ineq_matrix rows")
        if lo.size != n or hi.size != n:
            raise ValueError("bounds must have one entry per variable")
        if np.any(lo > hi):
            raise ValueError("lower_bounds must not exceed upper_bounds")
        if np.any(np.isnan(M)) or np.any(np.isnan(b)) or np.any(np.isnan(c)):
            raise ValueError("NaN in problem data")
        for name, arr in (("objective", c), ("ineq_matrix", M), ("ineq_rhs", b),
                          ("lower_bounds", lo), ("upper_bounds", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.ineq_rhs.size


@dataclass(frozen=True)
class LpSolution:
    status: str
    values: Optional[np.ndarray] = None
    objective_value: float = float("nan")
    # multipliers of the inequality rows (>= 0 at optimum, for a max problem)
    duals: Optional[np.ndarray] = field(default=None, repr=False)
    reduced_costs: Optional[np.ndarray] = field(default=None, repr=False)
    iterations: int = 0
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, problem: LpProblem, tol: SolverTolerances):
        self.tol = tol
        c, M, b = problem.objective, problem.ineq_matrix, problem.ineq_rhs
        lo, hi = problem.lower_bounds, problem.upper_bounds
        m, n = M.shape
        self.m, self.n = m, n

        x_struct = np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0))
        resid = b - M @ x_struct
        flip = resid < 0
        sign = np.where(flip, -1.0, 1.0)
        art_rows = np.flatnonzero(flip)
        n_art = art_rows.size
        self.n_art = n_art
        ntot = n + m + n_art
        self.ntot = ntot

        A = np.zeros((m, ntot))
        A[:, :n] = M * sign[:, None]
        A[np.arange(m), n + np.arange(m)] = sign
        A[art_rows, n + m + np.arange(n_art)] = 1.0
        self.A = A
        self.rhs = b * sign

        self.lo = np.concatenate([lo, np.zeros(m + n_art)])
        self.hi = np.concatenate([hi, np.full(m, np.inf), np.full(n_art, np.inf)])
        self.x = np.zeros(ntot)
        self.x[:n] = x_struct

        basis = n + np.arange(m)
        basis[art_rows] = n + m + np.arange(n_art)
        self.basis = basis
        self.is_basic = np.zeros(ntot, dtype=bool)
        self.is_basic[basis] = True
        self.T = A.copy()
        self.x[basis] = np.abs(resid)

        self.cost2 = np.concatenate([c, np.zeros(m + n_art)])
        self.iterations = 0
        self._since_refactor = 0
        # reinversion is O(m^2 ntot); amortise it over at least m pivots
        self.refactor_interval = max(tol.refactor_every, m)

    def refactor(self):
        if self.m == 0:
            return
        B = self.A[:, self.basis]
        try:
            T = np.linalg.solve(B, self.A)
        except np.linalg.LinAlgError as exc:
            raise LpNumericalError(f"singular basis: {exc}") from None
        drift = np.abs(B @ T[:, self.basis] - B).max() if self.m else 0.0
        if not np.isfinite(drift) or drift > 1e-6 * (1.0 + np.abs(B).max()):
            raise LpNumericalError(f"ill-conditioned basis (residual {drift:.3g})")
        self.T = T
        nonbasic = ~self.is_basic
        r = self.rhs - self.A[:, nonbasic] @ self.x[nonbasic]
        self.x[self.basis] = np.linalg.solve(B, r)
        self._since_refactor = 0

    def reduced_costs(self, cost):
        d = cost - cost[self.basis] @ self.T
        d[self.basis] = 0.0
        return d

    def run(self, cost, max_iter) -> str:
        """Optimise ``cost`` from the current basic feasible point."""
        tol = self.tol
        while True:
            budget = min(max_iter - self.iterations,
                         self.refactor_interval - self._since_refactor)
            if budget <= 0:
                if self.iterations >= max_iter:
                    raise LpNumericalError("iteration limit reached")
                self.refactor()
                continue
            code, steps, pivots = _pivot_loop(
                self.T, self.x, self.lo, self.hi, self.basis, self.is_basic,
                cost, tol.optimality, tol.pivot, budget,
                tol.pivot_rule == "bland", tol.degenerate_limit)
            self.iterations += steps
            self._since_refactor += pivots
            if code == _DONE:
                return OPTIMAL
            if code == _UNBOUNDED:
                return UNBOUNDED
            # budget exhausted: loop refactors or stops at the iteration cap
            self._since_refactor = max(self._since_refactor, self.refactor_interval)


_DONE, _UNBOUNDED, _BUDGET = 0, 1, 2


@numba.njit(cache=True)
def _pivot_loop(T, x, lo, hi, basis, is_basic, cost, opt_tol, piv_tol, budget,
                bland, degenerate_limit):
    """Bland-rule pivots on the tableau in place.

    The entering variable is the one with the largest reduced cost, except
    that after ``degenerate_limit`` consecutive zero-length steps (or always,
    when ``bland`` is set) the lowest eligible index is taken instead, which
    rules out cycling. Leaving ties always go to the lowest index.

    Returns (code, steps taken, basis changes). Bound flips of the entering
    variable count as steps but not as basis changes.
    """
    m, ntot = T.shape
    steps = 0
    pivots = 0
    degenerate_run = 0
    d = np.empty(ntot)
    # reduced costs d = cost - cost_B @ T, updated in place after each pivot
    for j in range(ntot):
        d[j] = cost[j]
    for i in range(m):
        cb = cost[basis[i]]
        if cb != 0.0:
            for j in range(ntot):
                d[j] -= cb * T[i, j]
    while steps < budget:
        enter = -1
        use_bland = bland or degenerate_run >= degenerate_limit
        best_d = 0.0
        for j in range(ntot):
            if is_basic[j]:
                continue
            if (d[j] > opt_tol and x[j] < hi[j]) or (d[j] < -opt_tol and x[j] > lo[j]):
                if use_bland:
                    enter = j
                    break
                if abs(d[j]) > best_d:
                    best_d = abs(d[j])
                    enter = j
        if enter < 0:
            return _DONE, steps, pivots
        direction = 1.0 if d[enter] > 0 else -1.0

        step = np.inf
        leave_var = -1
        if np.isfinite(hi[enter]) and np.isfinite(lo[enter]):
            step = hi[enter] - lo[enter]
            leave_var = enter
        best = np.inf
        for i in range(m):
            a = direction * T[i, enter]
            bi = basis[i]
            lim = np.inf
            if a > piv_tol:
                if np.isfinite(lo[bi]):
                    lim = max((x[bi] - lo[bi]) / a, 0.0)
            elif a < -piv_tol:
                if np.isfinite(hi[bi]):
                    lim = max((hi[bi] - x[bi]) / (-a), 0.0)
            if lim < best:
                best = lim
        row = -1
        if best < np.inf and best <= step:
            tie = best + 1e-12 * (1.0 + best)
            r = -1
            for i in range(m):
                a = direction * T[i, enter]
                bi = basis[i]
                lim = np.inf
                if a > piv_tol:
                    if np.isfinite(lo[bi]):
                        lim = max((x[bi] - lo[bi]) / a, 0.0)
                elif a < -piv_tol:
                    if np.isfinite(hi[bi]):
                        lim = max((hi[bi] - x[bi]) / (-a), 0.0)
                if lim <= tie and (r < 0 or basis[i] < basis[r]):
                    r = i
            if leave_var < 0 or step > tie or basis[r] < leave_var:
                row = r
                step = best
                leave_var = basis[r]
        if not np.isfinite(step):
            return _UNBOUNDED, steps, pivots

        steps += 1
        if step > 0:
            degenerate_run = 0
        else:
            degenerate_run += 1
        if step > 0:
            for i in range(m):
                x[basis[i]] -= direction * step * T[i, enter]
        if row < 0:
            x[enter] = hi[enter] if direction > 0 else lo[enter]
            continue

        leaving = basis[row]
        x_enter = x[enter] + direction * step
        x[leaving] = lo[leaving] if direction * T[row, enter] > 0 else hi[leaving]
        piv = T[row, enter]
        for j in range(ntot):
            T[row, j] /= piv
        for i in range(m):
            if i == row:
                continue
            f = T[i, enter]
            if f != 0.0:
                for j in range(ntot):
                    T[i, j] -= f * T[row, j]
        f = d[enter]
        for j in range(ntot):
            d[j] -= f * T[row, j]
        d[enter] = 0.0
        basis[row] = enter
        is_basic[leaving] = False
        is_basic[enter] = True
        x[enter] = x_enter
        pivots += 1
    return _BUDGET, steps, pivots


def solve(problem: LpProblem, tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> LpSolution:
    """Solve ``problem`` to a vertex optimum.

    Returns an :class:`LpSolution` whose status is one of ``optimal``,
    ``unbounded``, ``infeasible`` or ``numerical_failure``. A failed solve is
    reported, never papered over with a best-effort point.
    """
    tab = _Tableau(problem, tolerances)
    m, n = tab.m, tab.n
    max_iter = tolerances.max_iterations or 200 * (m + n) + 1000
    feas = tolerances.feasibility
    try:
        if tab.n_art:
            cost1 = np.zeros(tab.ntot)
            cost1[n + m:] = -1.0
            status = tab.run(cost1, max_iter)
            if status != OPTIMAL:
                raise LpNumericalError("phase one did not terminate at an optimum")
            tab.refactor()
            infeas = tab.x[n + m:].sum()
            if infeas > feas * (1.0 + np.abs(problem.ineq_rhs).max(initial=0.0)):
                return LpSolution(INFEASIBLE, iterations=tab.iterations)
            tab.hi[n + m:] = 0.0
            tab.x[n + m:] = np.minimum(tab.x[n + m:], 0.0)
        status = tab.run(tab.cost2, max_iter)
        if status == UNBOUNDED:
            return LpSolution(UNBOUNDED, iterations=tab.iterations)
        tab.refactor()
    except LpNumericalError as exc:
        return LpSolution(NUMERICAL_FAILURE, iterations=tab.iterations, message=str(exc))

    v = tab.x[:n].copy()
    v = np.clip(v, problem.lower_bounds, problem.upper_bounds)
    b = problem.ineq_rhs
    viol = problem.ineq_matrix @ v - b
    if np.any(viol > feas * (1.0 + np.abs(b))):
        return LpSolution(
            NUMERICAL_FAILURE,
            iterations=tab.iterations,
            message=f"final point violates constraints by {viol.max():.3g}",
        )
    d = tab.reduced_costs(tab.cost2)
    return LpSolution(
        OPTIMAL,
        values=v,
        objective_value=float(problem.objective @ v),
        duals=-d[n:n + m],
        reduced_costs=d[:n],
        iterations=tab.iterations,
    )


def enumerate_vertices_oracle(problem: LpProblem, max_dims: int = 6, box: float = 1e6):
    """Brute-force reference solver for tiny problems (tests only).

    Every combination of n active constraints (rows, bounds, and an artificial
    box of half-width ``box`` on unbounded sides) is solved; the best feasible
    point wins. Unboundedness shows up as an optimum that grows with the box.

    Returns ``(status, values, objective)``.
    """
    n = problem.n_vars
    if n < 1 or n > max_dims or max_dims > 6:
        raise ValueError(f"oracle handles 1..{min(max_dims, 6)} variables, got {n}")

    def best_vertex(radius):
        lo = np.where(np.isfinite(problem.lower_bounds), problem.lower_bounds, -radius)
        hi = np.where(np.isfinite(problem.upper_bounds), problem.upper_bounds, radius)
        eye = np.eye(n)
        G = np.vstack([problem.ineq_matrix, -eye, eye])
        h = np.concatenate([problem.ineq_rhs, -lo, hi])
        combos = np.array(list(itertools.combinations(range(G.shape[0]), n)))
        mats = G[combos]
        rhs = h[combos]
        dets = np.linalg.det(mats)
        ok = np.abs(dets) > 1e-10
        if not ok.any():
            return None, None
        pts = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
        slack = pts @ G.T - h
        feasible = np.all(slack <= 1e-9 * (1.0 + np.abs(h)), axis=1)
        if not feasible.any():
            return None, None
        pts = pts[feasible]
        objs = pts @ problem.objective
        k = int(np.argmax(objs))
        return pts[k], float(objs[k])

    point, obj = best_vertex(box)
    if point is None:
        return INFEASIBLE, None, float("nan")
    _, obj_big = best_vertex(10 * box)
    if obj_big > obj + 1e-6 * (1.0 + abs(obj)):
        return UNBOUNDED, None, float("inf")
    return OPTIMAL, point, obj


def dump_problem(problem: LpProblem, fh: IO[str]) -> None:
    """Write a plain-text dump: one inequality row per line, coefficients then rhs."""
    fmt = lambda arr: " ".join(repr(float(a)) for a in arr)  # noqa: E731
    fh.write(f"# vars {problem.n_vars} rows {problem.n_rows}\n")
    fh.write(f"# objective {fmt(problem.objective)}\n")
    fh.write(f"# lower {fmt(problem.lower_bounds)}\n")
    fh.write(f"# upper {fmt(problem.upper_bounds)}\n")
    for row, rhs in zip(problem.ineq_matrix, problem.ineq_rhs):
        fh.write(f"{fmt(row)} {float(rhs)!r}\n")
