"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves  min/max c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.

The tableau is a plain numpy array; every pivot is a rank-one update and the
tableau is rebuilt from the original data every REINVERT_EVERY pivots to keep
round-off from accumulating.  Equilibrium polytopes are extremely degenerate
(every deviation row has a zero right-hand side), so the inequality
right-hand sides are first relaxed by tiny distinct amounts; once optimal,
the relaxation is removed and primal feasibility is restored with dual
simplex pivots.  Entering columns are priced by most negative reduced cost
and fall back to Bland's lowest-index rule after a run of degenerate pivots;
ratio ties always leave by lowest basic index.  The final basis is
re-factorized to produce a clean vertex and an optimality certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import InvalidInputError

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
RATIO_TOL = 1e-12
FEAS_TOL = 1e-12
DEGENERATE_STREAK = 50
REINVERT_EVERY = 100
PERTURBATION = 1e-7


@dataclass
class LpProblem:
    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    sense: str = "min"
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_ub = np.asarray(self.A_ub, dtype=float).reshape(-1, n)
        self.b_ub = np.asarray(self.b_ub, dtype=float).ravel()
        self.A_eq = np.asarray(self.A_eq, dtype=float).reshape(-1, n)
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        if self.sense not in ("min", "max"):
            raise InvalidInputError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if self.A_ub.shape[0] != self.b_ub.size or self.A_eq.shape[0] != self.b_eq.size:
            raise InvalidInputError("constraint matrix and right-hand side sizes differ")
        for arr in (self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq):
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError("LP data must be finite")

    @property
    def n_vars(self) -> int:
        return self.c.size

    @property
    def n_rows(self) -> int:
        return self.A_ub.shape[0] + self.A_eq.shape[0]


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    x: np.ndarray | None
    objective: float | None
    max_residual: float = float("nan")
    min_reduced_cost: float = float("nan")
    iterations: int = 0
    duals: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def certificate(self) -> dict:
        return {
            "status": self.status,
            "objective": self.objective,
            "max_primal_residual": self.max_residual,
            "min_reduced_cost": self.min_reduced_cost,
            "iterations": self.iterations,
        }


class _Tableau:
    """Tableau over fixed data (A, b, cost); row -1 holds reduced costs."""

    def __init__(self, A: np.ndarray, b: np.ndarray, cost: np.ndarray, basis: np.ndarray):
        self.A, self.b, self.cost = A, b, cost
        self.basis = basis
        self.iterations = 0
        self._since_reinvert = 0
        self.T = np.empty((A.shape[0] + 1, A.shape[1] + 1))
        self.reinvert()

    def reinvert(self) -> None:
        m = self.A.shape[0]
        B = self.A[:, self.basis]
        T = self.T
        T[:m, :-1] = np.linalg.solve(B, self.A)
        T[:m, -1] = np.linalg.solve(B, self.b)
        T[:m, self.basis] = np.eye(m)
        T[-1, :-1] = self.cost
        T[-1, -1] = 0.0
        T[-1] -= self.cost[self.basis] @ T[:m]
        T[-1, self.basis] = 0.0
        self._since_reinvert = 0

    def set_rhs(self, b: np.ndarray) -> None:
        self.b = b
        self.reinvert()

    def set_cost(self, cost: np.ndarray) -> None:
        self.cost = cost
        self.reinvert()

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1
        self._since_reinvert += 1
        if self._since_reinvert >= REINVERT_EVERY:
            self.reinvert()

    def primal(self, allowed: int, max_iter: int) -> str:
        T = self.T
        m = T.shape[0] - 1
        streak = 0
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            rc = T[-1, :allowed]
            entering = np.flatnonzero(rc < -PIVOT_TOL)
            if entering.size == 0:
                return "optimal"
            if streak >= DEGENERATE_STREAK:
                j = int(entering[0])  # Bland
            else:
                j = int(entering[np.argmin(rc[entering])])
            col = T[:m, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return "unbounded"
            ratios = np.maximum(T[rows, -1], 0.0) / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + RATIO_TOL * max(1.0, abs(best))]
            r = int(tied[np.argmin(self.basis[tied])])
            streak = streak + 1 if best <= RATIO_TOL else 0
            self.pivot(r, j)
            T = self.T

    def dual(self, allowed: int, max_iter: int) -> str:
        """Dual simplex from a dual-feasible basis until the rhs is non-negative."""
        T = self.T
        m = T.shape[0] - 1
        while True:
            if self.iterations >= max_iter:
                return "iteration_limit"
            rhs = T[:m, -1]
            neg = np.flatnonzero(rhs < -FEAS_TOL)
            if neg.size == 0:
                return "optimal"
            r = int(neg[np.argmin(self.basis[neg])])
            row = T[r, :allowed]
            cands = np.flatnonzero(row < -PIVOT_TOL)
            if cands.size == 0:
                return "infeasible"
            ratios = np.maximum(T[-1, cands], 0.0) / -row[cands]
            j = int(cands[np.argmin(ratios)])
            self.pivot(r, j)


def _standard_form(problem: LpProblem, b_ub: np.ndarray):
    n = problem.n_vars
    m_ub, m_eq = problem.A_ub.shape[0], problem.A_eq.shape[0]
    A = np.zeros((m_ub + m_eq, n + m_ub))
    A[:m_ub, :n] = problem.A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = problem.A_eq
    b = np.concatenate([b_ub, problem.b_eq])
    c = np.zeros(n + m_ub)
    c[:n] = problem.c if problem.sense == "min" else -problem.c
    return A, b, c


def _perturbation(m_ub: int) -> np.ndarray:
    # Distinct, deterministic relaxations of the inequality rows.
    return PERTURBATION * (1.0 + np.arange(m_ub) / max(m_ub, 1))


def solve_lp(problem: LpProblem, max_iter: int = 100_000) -> LpSolution:
    """Two-phase dense simplex; deterministic for identical inputs."""
    m_ub = problem.A_ub.shape[0]
    n = problem.n_vars
    A, b, c = _standard_form(problem, problem.b_ub)
    b_pert = b.copy()
    b_pert[:m_ub] += _perturbation(m_ub)
    m, N = A.shape

    # Flip rows so that the (perturbed) rhs is non-negative; a row keeps its
    # slack as the initial basic variable only if the slack stays at +1.
    sign = np.where(b_pert < 0, -1.0, 1.0)
    slack_ok = np.zeros(m, dtype=bool)
    slack_ok[:m_ub] = sign[:m_ub] > 0
    art_rows = np.flatnonzero(~slack_ok)
    n_art = art_rows.size
    A_full = np.zeros((m, N + n_art))
    A_full[:, :N] = A * sign[:, None]
    basis = np.empty(m, dtype=np.int64)
    basis[slack_ok] = n + np.flatnonzero(slack_ok)
    for k, r in enumerate(art_rows):
        A_full[r, N + k] = 1.0
        basis[r] = N + k
    b_s, b_pert_s = b * sign, b_pert * sign

    iterations = 0
    keep = np.ones(m, dtype=bool)
    if n_art:
        cost1 = np.zeros(N + n_art)
        cost1[N:] = 1.0
        tab = _Tableau(A_full, b_pert_s, cost1, basis)
        status = tab.primal(N + n_art, max_iter)
        iterations = tab.iterations
        if status != "optimal":
            return LpSolution(status, None, None, iterations=iterations)
        infeas = -tab.T[-1, -1]
        if infeas > 1e-9 * max(1.0, np.abs(b_pert_s).max()):
            log.debug("phase 1 ended with infeasibility %.3g", infeas)
            return LpSolution("infeasible", None, None, iterations=iterations)
        T = tab.T
        for r in range(m):
            if tab.basis[r] >= N:
                cands = np.flatnonzero(np.abs(T[r, :N]) > PIVOT_TOL)
                if cands.size:
                    tab.pivot(r, int(cands[np.argmax(np.abs(T[r, cands]))]))
                    T = tab.T
                else:
                    keep[r] = False
        iterations = tab.iterations
        basis = tab.basis[keep]

    A2 = A_full[keep][:, :N]
    tab = _Tableau(A2, b_pert_s[keep], c, basis.copy())
    tab.iterations = iterations
    status = tab.primal(N, max_iter)
    if status != "optimal":
        return LpSolution(status, None, None, iterations=tab.iterations)

    tab.set_rhs(b_s[keep])
    for _ in range(10):
        status = tab.dual(N, max_iter)
        if status != "optimal":
            return LpSolution(status, None, None, iterations=tab.iterations)
        status = tab.primal(N, max_iter)
        if status != "optimal":
            return LpSolution(status, None, None, iterations=tab.iterations)
        tab.reinvert()
        if tab.T[:-1, -1].min() >= -FEAS_TOL and tab.T[-1, :N].min() >= -PIVOT_TOL:
            break

    x, duals, resid, min_rc = _certify(A, b, c, tab, keep, sign)
    value = float(problem.c @ x[:n])
    return LpSolution("optimal", x[:n], value, resid, min_rc, tab.iterations, duals)


def _certify(A, b, c, tab: _Tableau, keep, sign):
    """Clean vertex, duals and optimality certificate from the final basis."""
    m, N = A.shape
    x = np.zeros(N)
    x[tab.basis] = np.maximum(tab.T[:-1, -1], 0.0)
    x[np.abs(x) < 1e-15] = 0.0
    resid = float(np.abs(A @ x - b).max()) if m else 0.0
    y = np.zeros(m)
    B = tab.A[:, tab.basis]
    y[keep] = np.linalg.solve(B.T, c[tab.basis]) * sign[keep]
    rc = c - A.T @ y
    rc[tab.basis] = 0.0
    return x, y, resid, float(rc.min()) if N else 0.0
