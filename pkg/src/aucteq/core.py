"""Full-information first-price single-item auctions.

Players are indexed from 0 in the Python API (player 0 has the highest
value).  Bids and values are plain floats; ties are detected with exact
equality, which is safe because grids and constructions only ever repeat
bit-identical bid values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvariantError

PROB_TOL = 1e-12


@dataclass(frozen=True)
class AuctionInstance:
    values: tuple[float, ...]
    tie_priority: tuple[int, ...] = ()

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        n = len(values)
        if n < 2:
            raise InvalidInputError("an auction needs at least two players")
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise InvalidInputError(f"values must be finite and non-negative: {values}")
        if any(values[i] < values[i + 1] for i in range(n - 1)):
            raise InvariantError("values-sorted", f"values must be non-increasing, got {values}")
        prio = tuple(int(i) for i in self.tie_priority) if self.tie_priority else tuple(range(n))
        if sorted(prio) != list(range(n)):
            raise InvariantError("tie-priority", f"{prio} is not a permutation of 0..{n - 1}")
        object.__setattr__(self, "tie_priority", prio)

    @property
    def n(self) -> int:
        return len(self.values)

    def rank(self) -> tuple[int, ...]:
        """rank[i] = position of player i in the tie priority order."""
        r = [0] * self.n
        for pos, i in enumerate(self.tie_priority):
            r[i] = pos
        return tuple(r)


def _check_profile(instance: AuctionInstance, bids: Sequence[float]) -> tuple[float, ...]:
    bids = tuple(float(b) for b in bids)
    if len(bids) != instance.n:
        raise InvalidInputError(f"expected {instance.n} bids, got {len(bids)}")
    if any(not math.isfinite(b) or b < 0 for b in bids):
        raise InvalidInputError(f"bids must be finite and non-negative: {bids}")
    return bids


def outcome(instance: AuctionInstance, bids: Sequence[float]) -> tuple[int, float]:
    """Winner and price of a single bid profile under the instance's tie priority."""
    bids = _check_profile(instance, bids)
    top = max(bids)
    for i in instance.tie_priority:
        if bids[i] == top:
            return i, top
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class Atom:
    """One support point of a finite joint bid distribution.

    ``winner_shares`` maps player index to the fraction of this atom's
    probability on which that player receives the item.
    """

    probability: float
    bids: tuple[float, ...]
    winner_shares: Mapping[int, float]

    def __post_init__(self):
        p = float(self.probability)
        if not (0.0 < p <= 1.0 + PROB_TOL):
            raise InvariantError("atom-probability", f"probability {p} not in (0, 1]")
        bids = tuple(float(b) for b in self.bids)
        if any(not math.isfinite(b) or b < 0 for b in bids):
            raise InvalidInputError(f"bids must be finite and non-negative: {bids}")
        shares = {int(k): float(s) for k, s in self.winner_shares.items() if float(s) != 0.0}
        if any(s < 0 for s in shares.values()):
            raise InvariantError("winner-shares", f"negative share in {shares}")
        if abs(math.fsum(shares.values()) - 1.0) > PROB_TOL:
            raise InvariantError("winner-shares", f"shares {shares} do not sum to 1")
        top = max(bids)
        for i in shares:
            if not 0 <= i < len(bids):
                raise InvariantError("winner-shares", f"player {i} out of range")
            if bids[i] != top:
                raise InvariantError(
                    "winner-shares", f"player {i} has a share but bids {bids[i]} < max {top}"
                )
        object.__setattr__(self, "probability", p)
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "winner_shares", dict(sorted(shares.items())))

    @property
    def price(self) -> float:
        return max(self.bids)

    def tied(self) -> bool:
        top = self.price
        return sum(1 for b in self.bids if b == top) > 1


@dataclass(frozen=True)
class FiniteEquilibrium:
    """Finite-support joint bid distribution with explicit winners per atom."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        atoms = tuple(self.atoms)
        if not atoms:
            raise InvariantError("probabilities", "no atoms")
        n = len(atoms[0].bids)
        if any(len(a.bids) != n for a in atoms):
            raise InvalidInputError("atoms have inconsistent numbers of bids")
        total = math.fsum(a.probability for a in atoms)
        if abs(total - 1.0) > PROB_TOL:
            raise InvariantError("probabilities", f"atom probabilities sum to {total!r}")
        if len({a.bids for a in atoms}) != len(atoms):
            raise InvariantError("distinct-profiles", "two atoms share a bid profile")
        object.__setattr__(self, "atoms", atoms)

    @property
    def n(self) -> int:
        return len(self.atoms[0].bids)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(probabilities, bids, shares) as arrays of shape (m,), (m, n), (m, n)."""
        m, n = len(self.atoms), self.n
        probs = np.array([a.probability for a in self.atoms])
        bids = np.array([a.bids for a in self.atoms], dtype=float).reshape(m, n)
        shares = np.zeros((m, n))
        for k, a in enumerate(self.atoms):
            for i, s in a.winner_shares.items():
                shares[k, i] = s
        return probs, bids, shares

    def support_bids(self) -> np.ndarray:
        return np.unique(np.concatenate([[0.0], np.ravel([a.bids for a in self.atoms])]))


def merge_atoms(atoms: Sequence[Atom]) -> FiniteEquilibrium:
    """Combine atoms with identical bid profiles, mixing their winner shares."""
    mass: dict[tuple[float, ...], float] = {}
    won: dict[tuple[float, ...], dict[int, float]] = {}
    for a in atoms:
        mass[a.bids] = mass.get(a.bids, 0.0) + a.probability
        acc = won.setdefault(a.bids, {})
        for i, s in a.winner_shares.items():
            acc[i] = acc.get(i, 0.0) + a.probability * s
    out = []
    for bids, p in mass.items():
        shares = {i: w / p for i, w in won[bids].items()}
        norm = math.fsum(shares.values())
        out.append(Atom(p, bids, {i: s / norm for i, s in shares.items()}))
    return FiniteEquilibrium(tuple(out))


def check_consistent(instance: AuctionInstance, eq: FiniteEquilibrium) -> None:
    if eq.n != instance.n:
        raise InvalidInputError(f"equilibrium has {eq.n} players, instance has {instance.n}")


@dataclass(frozen=True)
class OutcomeSummary:
    win_prob: tuple[float, ...]
    expected_payment: tuple[float, ...]
    utility: tuple[float, ...]
    welfare: float
    revenue: float

    def to_dict(self) -> dict:
        return {
            "win_prob": list(self.win_prob),
            "expected_payment": list(self.expected_payment),
            "utility": list(self.utility),
            "welfare": self.welfare,
            "revenue": self.revenue,
        }


def summary_from_totals(values: Sequence[float], win: Sequence[float], pay: Sequence[float]) -> OutcomeSummary:
    win = tuple(float(w) for w in win)
    pay = tuple(float(r) for r in pay)
    util = tuple(w * v - r for w, v, r in zip(win, values, pay))
    welfare = math.fsum(w * v for w, v in zip(win, values))
    return OutcomeSummary(win, pay, util, welfare, math.fsum(pay))


def summarize(instance: AuctionInstance, eq: FiniteEquilibrium) -> OutcomeSummary:
    """Exact probability-weighted outcome, using atom winner shares."""
    check_consistent(instance, eq)
    n = instance.n
    win = [[] for _ in range(n)]
    pay = [[] for _ in range(n)]
    for a in eq.atoms:
        for i, s in a.winner_shares.items():
            win[i].append(a.probability * s)
            pay[i].append(a.probability * s * a.bids[i])
    return summary_from_totals(
        instance.values, [math.fsum(w) for w in win], [math.fsum(r) for r in pay]
    )


def perturb_to_strict(eq: FiniteEquilibrium, epsilon: float) -> FiniteEquilibrium:
    """Remove every tie by raising the designated winner's bid by ``epsilon``.

    Atoms with fractional shares are first split into one atom per winner.
    """
    if not epsilon > 0:
        raise InvalidInputError("epsilon must be positive")
    out: list[Atom] = []
    for a in eq.atoms:
        if not a.tied():
            out.append(a)
            continue
        for i, s in a.winner_shares.items():
            bids = list(a.bids)
            bids[i] += epsilon
            out.append(Atom(a.probability * s, tuple(bids), {i: 1.0}))
    return merge_atoms(out)


def pure_profile(bids: Sequence[float], winner: int) -> FiniteEquilibrium:
    return FiniteEquilibrium((Atom(1.0, tuple(bids), {winner: 1.0}),))
