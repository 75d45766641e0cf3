"""Explicit equilibria: Table 1, the worst-welfare and worst-revenue
common-bid constructions, pure-Nash mixtures, and the n-to-2 reduction.

In a common-bid construction every player bids the same price x drawn from a
``PiecewiseCdf``; who wins at each price is given by winner shares on atoms
and on price intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import bisect

from . import bounds
from .cdf import PiecewiseCdf, min_envelope, reciprocal_cdf, sup_deviation_utility
from .core import (
    Atom,
    AuctionInstance,
    FiniteEquilibrium,
    OutcomeSummary,
    check_consistent,
    merge_atoms,
    summary_from_totals,
)
from .errors import ConstructionError, InvalidInputError, ParameterError, PreconditionError

SHARE_TOL = 1e-12
ASSIGNMENT_TOL = 1e-10


@dataclass(frozen=True)
class SharePiece:
    """Winner shares for the continuous price mass on (lo, hi]."""

    lo: float
    hi: float
    shares: Mapping[int, float]


def _check_shares(shares: Mapping[int, float], n: int, where: str) -> dict[int, float]:
    out = {int(i): float(s) for i, s in shares.items() if s != 0}
    if any(not 0 <= i < n for i in out) or any(s < 0 for s in out.values()):
        raise InvalidInputError(f"bad winner shares at {where}: {shares}")
    if abs(math.fsum(out.values()) - 1.0) > SHARE_TOL:
        raise InvalidInputError(f"winner shares at {where} sum to {math.fsum(out.values())}")
    return out


@dataclass(frozen=True)
class ContinuousEquilibrium:
    instance: AuctionInstance
    price_cdf: PiecewiseCdf
    atom_shares: Mapping[float, Mapping[int, float]]
    pieces: tuple[SharePiece, ...]

    def __post_init__(self):
        n = self.instance.n
        atoms = {}
        for x in self.price_cdf.atoms:
            if x not in self.atom_shares:
                raise InvalidInputError(f"no winner shares for the atom at {x}")
            atoms[x] = _check_shares(self.atom_shares[x], n, f"atom {x}")
        pieces = tuple(
            SharePiece(float(p.lo), float(p.hi), _check_shares(p.shares, n, f"({p.lo}, {p.hi}]"))
            for p in sorted(self.pieces, key=lambda p: p.lo)
        )
        covered = math.fsum(self.price_cdf.continuous_mass(p.lo, p.hi) for p in pieces)
        total = self.price_cdf.continuous_mass(0.0, self.price_cdf.top)
        if abs(covered - total) > 1e-12:
            raise InvalidInputError("share pieces do not cover the continuous price mass")
        object.__setattr__(self, "atom_shares", atoms)
        object.__setattr__(self, "pieces", pieces)

    @property
    def no_overbid(self) -> bool:
        """Every bid (the common price) is at most every bidder's value."""
        return self.price_cdf.top <= min(self.instance.values)

    def summary(self) -> OutcomeSummary:
        n = self.instance.n
        win = [[] for _ in range(n)]
        pay = [[] for _ in range(n)]
        cdf = self.price_cdf
        for x, shares in self.atom_shares.items():
            m = cdf.atoms[x]
            for i, s in shares.items():
                win[i].append(m * s)
                pay[i].append(m * s * x)
        for p in self.pieces:
            mass, moment = cdf.continuous_mass(p.lo, p.hi), cdf.continuous_moment(p.lo, p.hi)
            for i, s in p.shares.items():
                win[i].append(mass * s)
                pay[i].append(moment * s)
        return summary_from_totals(self.instance.values, [math.fsum(w) for w in win],
                                   [math.fsum(r) for r in pay])

    def deviation_gains(self) -> tuple[float, ...]:
        """Best constant-bid utility minus equilibrium utility, per player."""
        util = self.summary().utility
        return tuple(sup_deviation_utility(self.price_cdf, v) - u
                     for v, u in zip(self.instance.values, util))

    def is_cce(self, tolerance: float = 1e-9) -> bool:
        return max(self.deviation_gains()) <= tolerance

    def to_dict(self) -> dict:
        return {
            "values": list(self.instance.values),
            "price_cdf": self.price_cdf.to_dict(),
            "atom_shares": [{"x": x, "shares": dict(s)} for x, s in self.atom_shares.items()],
            "pieces": [{"lo": p.lo, "hi": p.hi, "shares": dict(p.shares)} for p in self.pieces],
        }


# ---------------------------------------------------------------- Table 1

TABLE1_ROWS = (
    # probability, Alice's bid offset, Bob's bid
    (0.02, 0.0, +1),
    (0.02, 0.1, +1),
    (0.03, 0.5, -1),
    (0.11, 0.8, -1),
    (0.19, 0.9, -1),
    (0.63, 1.0, -1),
)


def construct_table1(epsilon: float = 1e-4) -> tuple[AuctionInstance, FiniteEquilibrium]:
    """Six-atom CCE with Bob (value 2) as player 0 and Alice (value 1) as player 1.

    Alice bids Bob's bid plus epsilon in the first two rows and wins them;
    otherwise she bids epsilon below Bob, who wins.
    """
    if not 0 < epsilon <= 1e-3:
        raise ParameterError(f"epsilon must lie in (0, 1e-3], got {epsilon}")
    instance = AuctionInstance((2.0, 1.0))
    atoms = []
    for p, bob, sign in TABLE1_ROWS:
        alice = bob + sign * epsilon
        winner = 1 if sign > 0 else 0
        atoms.append(Atom(p, (bob, alice), {winner: 1.0}))
    return instance, FiniteEquilibrium(tuple(atoms))


# ------------------------------------------------------- worst welfare

@dataclass(frozen=True)
class WinnerAssignment:
    """Alice wins the price-quantile band [u_lo, u_lo + q].

    In price terms she takes ``atom_share`` of the atom at 0 and every
    continuous price in (start, end].
    """

    u_lo: float
    q: float
    atom_share: float
    start: float
    end: float
    utility: float
    residual: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _alice_utility(cdf: PiecewiseCdf, u_lo: float, q: float) -> float:
    return q - cdf.quantile_integral(u_lo, u_lo + q)


def solve_winner_assignment(alpha: float) -> WinnerAssignment:
    """Place Alice's winning band so that her utility is exactly alpha.

    Her utility falls continuously from u_max (band at the lowest prices)
    to u_min (band at the highest prices) as the band slides up.
    """
    p = bounds.WorstWelfareParams.from_alpha(alpha)
    cdf = min_envelope(p.alpha, p.beta, p.v)
    q = p.q
    hi_u = 1.0 - q

    def gap(u):
        return _alice_utility(cdf, u, q) - p.alpha

    g0, g1 = gap(0.0), gap(hi_u)
    if not (g0 >= 0 >= g1):
        raise ConstructionError(
            f"alpha={alpha} is outside [u_min, u_max] = [{g1 + p.alpha}, {g0 + p.alpha}]"
        )
    u_lo = bisect(gap, 0.0, hi_u, xtol=1e-15)
    residual = abs(gap(u_lo))
    if residual > ASSIGNMENT_TOL:
        raise ConstructionError(f"assignment residual {residual} above {ASSIGNMENT_TOL}")
    f0 = cdf.atoms.get(0.0, 0.0)
    overlap = max(0.0, min(f0, u_lo + q) - u_lo)
    atom_share = overlap / f0 if f0 else 0.0
    start = cdf.inverse(max(u_lo, f0)) if u_lo + q > f0 else 0.0
    end = cdf.inverse(u_lo + q) if u_lo + q > f0 else 0.0
    return WinnerAssignment(u_lo, q, atom_share, start, end, p.alpha + gap(u_lo), residual)


def construct_worst_welfare(alpha: float | None = None) -> ContinuousEquilibrium:
    """Two-player common-bid CCE with values (1, 1 - alpha) and welfare welfare_case2a(alpha).

    Player 0 (Alice, value 1) gets utility alpha and player 1 (Bob) gets
    beta_of_alpha(alpha); neither bids above their value.
    """
    if alpha is None:
        alpha = bounds.minimize_welfare().params["alpha"]
    lo, hi = bounds.CERTIFIED_ALPHA
    if not lo <= alpha <= hi:
        raise ParameterError(f"alpha must lie in [{lo}, {hi}], got {alpha}")
    p = bounds.WorstWelfareParams.from_alpha(alpha)
    cdf = min_envelope(p.alpha, p.beta, p.v)
    wa = solve_winner_assignment(alpha)
    instance = AuctionInstance((1.0, p.v))
    pieces = [SharePiece(0.0, wa.start, {1: 1.0}), SharePiece(wa.start, wa.end, {0: 1.0}),
              SharePiece(wa.end, cdf.top, {1: 1.0})]
    atom = {0: wa.atom_share, 1: 1.0 - wa.atom_share} if wa.atom_share < 1 else {0: 1.0}
    atom_shares = {0.0: atom}
    return ContinuousEquilibrium(instance, cdf, atom_shares, tuple(x for x in pieces if x.hi > x.lo))


def construct_case1_welfare(alpha: float | None = None) -> ContinuousEquilibrium:
    """Boundary construction: F = alpha/(1 - x), Alice wins only at price 0.

    At the root of 2x - ln x - 2 = 0 Bob's utility is exactly alpha (1 - alpha)
    and the welfare is the boundary-case floor.
    """
    if alpha is None:
        alpha = bounds.case1_alpha()
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    instance = AuctionInstance((1.0, 1.0 - alpha))
    cdf = reciprocal_cdf(alpha, 1.0)
    return ContinuousEquilibrium(instance, cdf, {0.0: {0: 1.0}},
                                 (SharePiece(0.0, cdf.top, {1: 1.0}),))


# ------------------------------------------------------- worst revenue

def construct_symmetric_worst_revenue(n: int, v: float = 1.0) -> ContinuousEquilibrium:
    """n bidders of value v share F(x) = alpha/(v - x), alpha = v e^{-(n-1)}, equally."""
    alpha = bounds.symmetric_alpha(n, v)
    instance = AuctionInstance((float(v),) * n)
    cdf = reciprocal_cdf(alpha, float(v))
    equal = {i: 1.0 / n for i in range(n)}
    return ContinuousEquilibrium(instance, cdf, {0.0: equal}, (SharePiece(0.0, cdf.top, equal),))


# ------------------------------------------------------- pure Nash mixtures

def construct_pure_nash_mixture(v1: float, v2: float,
                                price_atoms: Mapping[float, float]) -> tuple[AuctionInstance, FiniteEquilibrium]:
    """Both players bid the same price in [v2, v1]; player 0 wins every tie."""
    instance = AuctionInstance((float(v1), float(v2)))
    atoms = []
    for price, mass in sorted(price_atoms.items()):
        price = float(price)
        if not v2 <= price <= v1:
            raise PreconditionError(f"price {price} outside [{v2}, {v1}]")
        atoms.append(Atom(mass, (price, price), {0: 1.0}))
    return instance, FiniteEquilibrium(tuple(atoms))


# ------------------------------------------------------- n -> 2 reduction

def reduce_to_two(instance: AuctionInstance,
                  eq: FiniteEquilibrium) -> tuple[AuctionInstance, FiniteEquilibrium]:
    """Drop players 2.. and give their wins to player 0.

    Both kept players have their bid raised to the highest dropped bid when
    it exceeds their own.  Each kept player then faces exactly the same
    highest opposing bid as before, so every constant-deviation payoff is
    unchanged, while the price and the payments are preserved.
    """
    check_consistent(instance, eq)
    if instance.n < 3:
        raise PreconditionError("reduction needs at least three players")
    prio = [i for i in instance.tie_priority if i < 2]
    reduced = AuctionInstance(instance.values[:2], tuple(prio))
    atoms = []
    for a in eq.atoms:
        dropped = max(a.bids[2:])
        bids = (max(a.bids[0], dropped), max(a.bids[1], dropped))
        shares = {0: 0.0, 1: 0.0}
        for i, s in a.winner_shares.items():
            shares[i if i < 2 else 0] += s
        atoms.append(Atom(a.probability, bids, shares))
    return reduced, merge_atoms(atoms)


# ------------------------------------------------------- discretization

def discretize(ce, k: int):
    """Round prices down to the grid {j * top / k : j = 0..k}.

    A ``ContinuousEquilibrium`` becomes a finite common-bid equilibrium whose
    atoms carry the per-cell integrated winner shares.  A ``FiniteEquilibrium``
    already on the grid of its highest bid is returned unchanged.
    """
    if int(k) != k or k < 2:
        raise InvalidInputError(f"k must be an integer >= 2, got {k}")
    if isinstance(ce, FiniteEquilibrium):
        return _discretize_finite(ce, k)
    cdf, n = ce.price_cdf, ce.instance.n
    top = cdf.top
    grid = top * np.arange(k + 1) / k
    mass = np.zeros((k + 1, n))
    for x, shares in ce.atom_shares.items():
        j = min(k, int(np.searchsorted(grid, x, side="right")) - 1)
        for i, s in shares.items():
            mass[j, i] += cdf.atoms[x] * s
    for p in ce.pieces:
        j0 = max(0, int(np.searchsorted(grid, p.lo, side="right")) - 1)
        for j in range(j0, k):
            if grid[j] >= p.hi:
                break
            m = cdf.continuous_mass(max(p.lo, grid[j]), min(p.hi, grid[j + 1]))
            for i, s in p.shares.items():
                mass[j, i] += m * s
    atoms = []
    for j in range(k + 1):
        total = math.fsum(mass[j])
        if total <= 0:
            continue
        shares = {i: mass[j, i] / total for i in range(n) if mass[j, i] > 0}
        atoms.append(Atom(total, (float(grid[j]),) * n, shares))
    return FiniteEquilibrium(tuple(atoms))


def _discretize_finite(eq: FiniteEquilibrium, k: int) -> FiniteEquilibrium:
    top = max(a.price for a in eq.atoms)
    if top == 0:
        return eq
    grid = top * np.arange(k + 1) / k
    on_grid = set(grid.tolist())
    if all(b in on_grid for a in eq.atoms for b in a.bids):
        return eq
    out = []
    for a in eq.atoms:
        bids = tuple(float(grid[min(k, int(np.searchsorted(grid, b, side="right")) - 1)]) for b in a.bids)
        top_bid = max(bids)
        if any(bids[i] != top_bid for i in a.winner_shares):
            raise ConstructionError(f"rounding the atom {a.bids} would unseat its winner")
        out.append(Atom(a.probability, bids, a.winner_shares))
    return merge_atoms(out)
