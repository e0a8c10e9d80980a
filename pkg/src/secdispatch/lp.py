"""Dense two-phase primal simplex for small linear programs.

Problems have the form::

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                lo <= x <= hi

Bland's rule picks both the entering and the leaving variable, so the
method cannot cycle and a given input always produces the same vertex.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-7
PIVOT_TOL = 1e-10
OPT_TOL = 1e-9
BINDING_TOL = 1e-6


class MalformedLp(ValueError):
    pass


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    var_bounds: list = None
    A_eq: np.ndarray = None
    b_eq: np.ndarray = None
    A_ub: np.ndarray = None
    b_ub: np.ndarray = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        if c.ndim != 1:
            raise MalformedLp("objective must be a vector")
        n = c.size
        bounds = self.var_bounds
        if bounds is None:
            bounds = [(0.0, np.inf)] * n
        bounds = np.array([(-np.inf if lo is None else lo, np.inf if hi is None else hi) for lo, hi in bounds],
                          dtype=float).reshape(-1, 2)
        if bounds.shape[0] != n:
            raise MalformedLp(f"{bounds.shape[0]} bounds for {n} variables")
        if np.isnan(bounds).any() or (bounds[:, 0] > bounds[:, 1]).any():
            raise MalformedLp("every variable needs lo <= hi")
        if np.isposinf(bounds[:, 0]).any() or np.isneginf(bounds[:, 1]).any():
            raise MalformedLp("infinite bound on the wrong side")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "var_bounds", bounds)
        for a_name, b_name in (("A_eq", "b_eq"), ("A_ub", "b_ub")):
            A, b = getattr(self, a_name), getattr(self, b_name)
            A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
            b = np.zeros(0) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
            if A.size == 0:
                A = A.reshape(0, n) if b.size == 0 else A
            if A.ndim != 2 or A.shape[1] != n:
                raise MalformedLp(f"{a_name} rows must have length {n}")
            if A.shape[0] != b.size:
                raise MalformedLp(f"{a_name} has {A.shape[0]} rows but {b_name} has {b.size} entries")
            if not (np.isfinite(A).all() and np.isfinite(b).all()):
                raise MalformedLp(f"{a_name}/{b_name} must be finite")
            object.__setattr__(self, a_name, A)
            object.__setattr__(self, b_name, b)
        if not np.isfinite(c).all():
            raise MalformedLp("objective must be finite")

    @property
    def n(self) -> int:
        return self.objective.size


@dataclass(eq=False)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float = np.nan
    binding: list[int] = field(default_factory=list)
    eq_duals: np.ndarray | None = None
    ineq_duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Unbounded(Exception):
    pass


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])
    basis[row] = col


def _run(T, basis, cost, ncols):
    """Bland-rule simplex on tableau ``T`` (rhs in the last column); returns pivot count."""
    iterations = 0
    rhs = T[:, -1]
    while True:
        z = cost[:ncols] - cost[basis] @ T[:, :ncols]
        candidates = np.flatnonzero(z < -OPT_TOL)
        if candidates.size == 0:
            return iterations
        col = candidates[0]
        column = T[:, col]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if rows.size == 0:
            raise _Unbounded(col)
        ratios = rhs[rows] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        row = tied[np.argmin(basis[tied])]
        _pivot(T, basis, row, col)
        iterations += 1


def solve(lp: LinearProgram) -> LpSolution:
    n = lp.n
    lo, hi = lp.var_bounds[:, 0], lp.var_bounds[:, 1]

    # x = S @ y + shift with y >= 0
    cols, shift = [], np.zeros(n)
    bound_rows, bound_rhs = [], []
    for j in range(n):
        if np.isfinite(lo[j]):
            shift[j] = lo[j]
            cols.append((j, 1.0))
            if np.isfinite(hi[j]):
                bound_rows.append(len(cols) - 1)
                bound_rhs.append(hi[j] - lo[j])
        elif np.isfinite(hi[j]):
            shift[j] = hi[j]
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    ny = len(cols)
    S = np.zeros((n, ny))
    for k, (j, sgn) in enumerate(cols):
        S[j, k] = sgn

    n_ub, n_eq, n_bd = lp.A_ub.shape[0], lp.A_eq.shape[0], len(bound_rows)
    A_bd = np.zeros((n_bd, ny))
    A_bd[np.arange(n_bd), bound_rows] = 1.0
    ineq = np.vstack([lp.A_ub @ S, A_bd])
    ineq_rhs = np.concatenate([lp.b_ub - lp.A_ub @ shift, bound_rhs])
    eq = lp.A_eq @ S
    eq_rhs = lp.b_eq - lp.A_eq @ shift
    n_in = n_ub + n_bd
    rows = n_in + n_eq

    # standard form: [ineq | I] and [eq | 0]; rows flipped so rhs >= 0
    M = np.zeros((rows, ny + n_in))
    M[:n_in, :ny] = ineq
    M[:n_in, ny:] = np.eye(n_in)
    M[n_in:, :ny] = eq
    r = np.concatenate([ineq_rhs, eq_rhs])
    sign = np.where(r < 0, -1.0, 1.0)
    M *= sign[:, None]
    r = r * sign
    cost = np.concatenate([S.T @ lp.objective, np.zeros(n_in)])

    ncols = M.shape[1]
    basis = np.full(rows, -1)
    need_art = []
    for i in range(rows):
        if i < n_in and sign[i] > 0:
            basis[i] = ny + i
        else:
            need_art.append(i)
    n_art = len(need_art)
    T = np.zeros((rows, ncols + n_art + 1))
    T[:, :ncols] = M
    T[:, -1] = r
    for k, i in enumerate(need_art):
        T[i, ncols + k] = 1.0
        basis[i] = ncols + k

    iterations = 0
    keep_rows = np.arange(rows)
    if n_art:
        phase1 = np.zeros(ncols + n_art)
        phase1[ncols:] = 1.0
        iterations += _run(T, basis, phase1, ncols + n_art)
        infeas = phase1[basis] @ T[:, -1]
        if infeas > FEAS_TOL * max(1.0, np.abs(r).max(initial=0.0)):
            return LpSolution(LpStatus.INFEASIBLE, iterations=iterations)
        redundant = []
        for i in range(rows):
            if basis[i] < ncols:
                continue
            nz = np.flatnonzero(np.abs(T[i, :ncols]) > PIVOT_TOL)
            if nz.size:
                _pivot(T, basis, i, nz[0])
                iterations += 1
            else:
                redundant.append(i)
        if redundant:
            mask = np.ones(rows, dtype=bool)
            mask[redundant] = False
            T, basis, keep_rows = T[mask], basis[mask], keep_rows[mask]
        T = np.hstack([T[:, :ncols], T[:, -1:]])
        T[:, -1] = np.maximum(T[:, -1], 0.0)

    try:
        iterations += _run(T, basis, cost, ncols)
    except _Unbounded:
        return LpSolution(LpStatus.UNBOUNDED, iterations=iterations)

    y_std = np.zeros(ncols)
    y_std[basis] = T[:, -1]
    x = S @ y_std[:ny] + shift

    B = M[np.ix_(keep_rows, basis)]
    pi = np.zeros(rows)
    pi[keep_rows] = np.linalg.solve(B.T, cost[basis])
    pi *= sign
    ineq_duals = pi[:n_ub]
    eq_duals = pi[n_in:]
    reduced = lp.objective - lp.A_eq.T @ eq_duals - lp.A_ub.T @ ineq_duals

    slack = lp.b_ub - lp.A_ub @ x
    binding = [int(i) for i in np.flatnonzero(slack <= BINDING_TOL)]
    return LpSolution(
        LpStatus.OPTIMAL,
        x=x,
        objective_value=float(lp.objective @ x),
        binding=binding,
        eq_duals=eq_duals,
        ineq_duals=ineq_duals,
        reduced_costs=reduced,
        iterations=iterations,
    )
