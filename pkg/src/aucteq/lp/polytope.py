"""Extremal CCEs and CEs over a discretized bid grid.

One LP variable per joint bid profile.  Deviation rows resolve ties in the
deviator's favour by default: bidding just above a grid point is then never
better than the row at that point, so every feasible distribution is a true
equilibrium of the continuous game and the continuum lower bounds apply.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..core import Atom, AuctionInstance, FiniteEquilibrium
from ..errors import InvalidInputError, ProblemSizeError
from ..verify import DeviationPolicy, VerificationReport, verify_ce, verify_cce
from .simplex import LpProblem, LpSolution, solve_lp

MAX_PLAYERS = 3
MAX_PROFILES = 20_000


@dataclass(frozen=True)
class BidGrid:
    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if not pts or pts[0] != 0.0:
            raise InvalidInputError("bid grid must start at 0")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise InvalidInputError("bid grid must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, instance: AuctionInstance, k: int, top: float | None = None) -> "BidGrid":
        """k equal cells on [0, top] (default: highest value), plus every value."""
        if k < 1:
            raise InvalidInputError("grid needs at least one cell")
        top = max(instance.values) if top is None else float(top)
        pts = {top * j / k for j in range(k + 1)}
        pts.update(v for v in instance.values if v <= top)
        return cls(tuple(sorted(pts)))

    def admissible(self, value: float, no_overbid: bool) -> np.ndarray:
        pts = np.array(self.points)
        return pts[pts <= value] if no_overbid else pts

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ProfileSpace:
    bids: np.ndarray  # (P, n)
    winner: np.ndarray  # (P,) tie-priority winner
    price: np.ndarray
    utility: np.ndarray  # (P, n) on-path utilities


def enumerate_profiles(instance: AuctionInstance, grid: BidGrid, no_overbid: bool) -> ProfileSpace:
    if not 2 <= instance.n <= MAX_PLAYERS:
        raise ProblemSizeError(f"profile enumeration supports 2..{MAX_PLAYERS} players")
    sets = [grid.admissible(v, no_overbid) for v in instance.values]
    if any(s.size == 0 for s in sets):
        raise InvalidInputError("a player has no admissible bid")
    size = math.prod(s.size for s in sets)
    if size > MAX_PROFILES:
        raise ProblemSizeError(f"{size} profiles exceed the limit of {MAX_PROFILES}")
    bids = np.array(list(itertools.product(*sets)), dtype=float).reshape(size, instance.n)
    price = bids.max(axis=1)
    rank = np.array(instance.rank())
    at_top = bids == price[:, None]
    winner = np.argmin(np.where(at_top, rank[None, :], instance.n), axis=1)
    values = np.array(instance.values)
    won = winner[:, None] == np.arange(instance.n)[None, :]
    utility = np.where(won, values[None, :] - bids, 0.0)
    return ProfileSpace(bids, winner, price, utility)


def _objective(space: ProfileSpace, instance: AuctionInstance, objective: str) -> np.ndarray:
    if objective == "welfare":
        return np.array(instance.values)[space.winner]
    if objective == "revenue":
        return space.price.copy()
    raise InvalidInputError(f"objective must be 'welfare' or 'revenue', got {objective!r}")


def _deviation_gain(space: ProfileSpace, i: int, value: float, d: float, tie: DeviationPolicy) -> np.ndarray:
    others = np.delete(space.bids, i, axis=1).max(axis=1)
    wins = others <= d if tie is DeviationPolicy.DEVIATOR_WINS else others < d
    return space.utility[:, i] - (value - d) * wins


def _assemble(instance, grid, space, rows, labels, objective, direction, no_overbid, eq_class, tie):
    P = space.bids.shape[0]
    A_ub = -np.array(rows).reshape(-1, P) if rows else np.zeros((0, P))
    meta = {
        "class": eq_class,
        "objective": objective,
        "no_overbid": no_overbid,
        "deviation_tie": tie.value,
        "instance": instance,
        "grid": grid,
        "space": space,
        "row_labels": labels,
    }
    return LpProblem(
        c=_objective(space, instance, objective),
        A_ub=A_ub,
        b_ub=np.zeros(A_ub.shape[0]),
        A_eq=np.ones((1, P)),
        b_eq=np.ones(1),
        sense=direction,
        meta=meta,
    )


def build_cce_lp(instance: AuctionInstance, grid: BidGrid, objective: str = "welfare",
                 direction: str = "min", no_overbid: bool = False,
                 deviation_tie=DeviationPolicy.DEVIATOR_WINS) -> LpProblem:
    """One row per (player, deviation bid): E[u_i(b) - u_i(d, b_-i)] >= 0."""
    tie = DeviationPolicy(deviation_tie)
    space = enumerate_profiles(instance, grid, no_overbid)
    rows, labels = [], []
    for i, v in enumerate(instance.values):
        # Deviations above the own value are implied by the row for 0.
        for d in grid.admissible(v, True):
            rows.append(_deviation_gain(space, i, v, d, tie))
            labels.append((i, float(d)))
    return _assemble(instance, grid, space, rows, labels, objective, direction, no_overbid, "cce", tie)


def build_ce_lp(instance: AuctionInstance, grid: BidGrid, objective: str = "welfare",
                direction: str = "min", no_overbid: bool = False,
                deviation_tie=DeviationPolicy.DEVIATOR_WINS) -> LpProblem:
    """One row per (player, recommended bid, deviation bid)."""
    tie = DeviationPolicy(deviation_tie)
    space = enumerate_profiles(instance, grid, no_overbid)
    rows, labels = [], []
    for i, v in enumerate(instance.values):
        recs = np.unique(space.bids[:, i])
        for d in grid.admissible(v, True):
            gain = _deviation_gain(space, i, v, d, tie)
            for r in recs:
                row = np.where(space.bids[:, i] == r, gain, 0.0)
                if np.any(row != 0.0):
                    rows.append(row)
                    labels.append((i, float(r), float(d)))
    return _assemble(instance, grid, space, rows, labels, objective, direction, no_overbid, "ce", tie)


def solution_to_equilibrium(problem: LpProblem, solution: LpSolution,
                            cutoff: float = 1e-12) -> FiniteEquilibrium:
    """Atoms for every profile with mass above ``cutoff``; winners by tie priority."""
    space: ProfileSpace = problem.meta["space"]
    x = np.where(solution.x > cutoff, solution.x, 0.0)
    idx = np.flatnonzero(x)
    total = math.fsum(x[idx])
    atoms = tuple(
        Atom(x[k] / total, tuple(space.bids[k]), {int(space.winner[k]): 1.0}) for k in idx
    )
    return FiniteEquilibrium(atoms)


@dataclass
class ExtremalResult:
    equilibrium: FiniteEquilibrium | None
    value: float | None
    report: VerificationReport | None
    solution: LpSolution
    problem: LpProblem
    grid_limited: bool

    def to_dict(self) -> dict:
        return {
            "status": self.solution.status,
            "value": self.value,
            "certificate": self.solution.certificate(),
            "verification": self.report.to_dict() if self.report else None,
            "grid_limited": self.grid_limited,
            "n_variables": self.problem.n_vars,
            "n_rows": self.problem.n_rows,
        }


def extremal_equilibrium(instance: AuctionInstance, grid: BidGrid, eq_class: str = "cce",
                         objective: str = "welfare", direction: str = "min",
                         no_overbid: bool = False, tolerance: float = 1e-7,
                         deviation_tie=DeviationPolicy.DEVIATOR_WINS) -> ExtremalResult:
    """Optimize ``objective`` over grid-supported equilibria and re-verify the optimum."""
    if eq_class == "cce":
        problem = build_cce_lp(instance, grid, objective, direction, no_overbid, deviation_tie)
    elif eq_class == "ce":
        problem = build_ce_lp(instance, grid, objective, direction, no_overbid, deviation_tie)
    else:
        raise InvalidInputError(f"equilibrium class must be 'cce' or 'ce', got {eq_class!r}")
    top = grid.points[-1]
    grid_limited = (
        DeviationPolicy(deviation_tie) is not DeviationPolicy.DEVIATOR_WINS
        or any(v <= top and v not in grid.points for v in instance.values)
    )
    solution = solve_lp(problem)
    if not solution.optimal:
        return ExtremalResult(None, None, None, solution, problem, grid_limited)
    eq = solution_to_equilibrium(problem, solution)
    verifier = verify_cce if eq_class == "cce" else verify_ce
    report = verifier(instance, eq, tolerance, DeviationPolicy.DEVIATOR_WINS)
    return ExtremalResult(eq, solution.objective, report, solution, problem, grid_limited)
