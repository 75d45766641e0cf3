"""(epsilon-)CCE and CE verification for finite joint bid distributions.

Deviation payoffs are computed on the candidate set {0} plus every bid in
the support.  Between two candidates the set of opponent profiles beaten by
a deviation is constant while the payment grows, so these points suffice.
A deviator who loses exact ties can still bid an infinitesimal amount above
a candidate; the supremum of that limit equals the deviator-wins payoff at
the candidate.  Regret is therefore always measured against that supremum,
and the policy only decides which bids are reported as attained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import AuctionInstance, FiniteEquilibrium, check_consistent, summarize
from .errors import InvalidInputError, PreconditionError

MIN_CONDITIONING_MASS = 1e-15


class DeviationPolicy(str, Enum):
    DEVIATOR_WINS = "deviator-wins"
    DEVIATOR_LOSES = "deviator-loses"


def _policy(policy) -> DeviationPolicy:
    try:
        return DeviationPolicy(policy)
    except ValueError:
        raise InvalidInputError(f"unknown tie policy {policy!r}") from None


@dataclass(frozen=True)
class Deviation:
    bid: float
    utility: float
    # True when the utility is a supremum reached by bidding just above ``bid``.
    from_above: bool = False

    def to_dict(self) -> dict:
        return {"bid": self.bid, "utility": self.utility, "from_above": self.from_above}


def _others_max(bids: np.ndarray, player: int) -> np.ndarray:
    others = np.delete(bids, player, axis=1)
    return others.max(axis=1) if others.shape[1] else np.zeros(bids.shape[0])


def deviation_table(value: float, probs: np.ndarray, others_max: np.ndarray,
                    candidates: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Utilities of constant deviations at ``candidates``: (loses ties, wins ties)."""
    order = np.argsort(others_max, kind="stable")
    om = others_max[order]
    cum = np.concatenate([[0.0], np.cumsum(probs[order])])
    le = cum[np.searchsorted(om, candidates, side="right")]
    lt = cum[np.searchsorted(om, candidates, side="left")]
    margin = value - candidates
    return margin * lt, margin * le


def _best(candidates, u_loses, u_wins, policy: DeviationPolicy) -> tuple[Deviation, Deviation]:
    """(policy-specific best, supremum over all real bids)."""
    k = int(np.argmax(u_wins))
    sup = Deviation(float(candidates[k]), float(u_wins[k]), False)
    if policy is DeviationPolicy.DEVIATOR_WINS:
        return sup, sup
    attained = int(np.argmax(u_loses))
    if u_loses[attained] >= u_wins[k]:
        best = Deviation(float(candidates[attained]), float(u_loses[attained]), False)
    else:
        best = Deviation(sup.bid, sup.utility, True)
    return best, sup


def best_constant_deviation(instance: AuctionInstance, eq: FiniteEquilibrium, player: int,
                            policy=DeviationPolicy.DEVIATOR_LOSES) -> Deviation:
    """Best fixed bid for ``player`` against the equilibrium's opponent bids.

    Returns the lowest maximizing candidate.  Under deviator-loses, the
    utility may be a supremum approached from above (``from_above``).
    """
    check_consistent(instance, eq)
    policy = _policy(policy)
    probs, bids, _ = eq.arrays()
    cands = eq.support_bids()
    lo, hi = deviation_table(instance.values[player], probs, _others_max(bids, player), cands)
    return _best(cands, lo, hi, policy)[0]


def deviation_utility(instance: AuctionInstance, eq: FiniteEquilibrium, player: int,
                      bid: float, policy=DeviationPolicy.DEVIATOR_LOSES) -> float:
    """Utility of the single constant deviation ``bid`` (ties resolved by policy)."""
    policy = _policy(policy)
    probs, bids, _ = eq.arrays()
    lo, hi = deviation_table(instance.values[player], probs, _others_max(bids, player),
                             np.array([float(bid)]))
    return float(hi[0] if policy is DeviationPolicy.DEVIATOR_WINS else lo[0])


@dataclass(frozen=True)
class PlayerReport:
    equilibrium_utility: float
    best_deviation: Deviation
    regret: float
    by_policy: dict[str, Deviation] = field(default_factory=dict)

    @property
    def best_deviation_bid(self) -> float:
        return self.best_deviation.bid

    @property
    def best_deviation_utility(self) -> float:
        return self.best_deviation.utility

    def to_dict(self) -> dict:
        return {
            "equilibrium_utility": self.equilibrium_utility,
            "best_deviation_bid": self.best_deviation.bid,
            "best_deviation_utility": self.best_deviation.utility,
            "approached_from_above": self.best_deviation.from_above,
            "regret": self.regret,
            "by_policy": {k: d.to_dict() for k, d in self.by_policy.items()},
        }


@dataclass(frozen=True)
class ConditionalViolation:
    player: int
    recommendation: float
    deviation: float
    conditional_gain: float
    probability: float

    def to_dict(self) -> dict:
        return {
            "player": self.player,
            "recommendation": self.recommendation,
            "deviation": self.deviation,
            "conditional_gain": self.conditional_gain,
            "recommendation_probability": self.probability,
        }


@dataclass(frozen=True)
class VerificationReport:
    mode: str
    policy: str
    tolerance: float
    players: tuple[PlayerReport, ...]
    max_regret: float
    passed: bool
    worst: ConditionalViolation | None = None

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "policy": self.policy,
            "tolerance": self.tolerance,
            "players": [p.to_dict() for p in self.players],
            "max_regret": self.max_regret,
            "pass": self.passed,
        }
        if self.worst is not None:
            out["worst_conditional_deviation"] = self.worst.to_dict()
        return out


def _check_tol(tolerance: float) -> float:
    tolerance = float(tolerance)
    if not tolerance >= 0:
        raise InvalidInputError("tolerance must be non-negative")
    return tolerance


def verify_cce(instance: AuctionInstance, eq: FiniteEquilibrium, tolerance: float = 0.0,
               policy=DeviationPolicy.DEVIATOR_LOSES) -> VerificationReport:
    check_consistent(instance, eq)
    tolerance = _check_tol(tolerance)
    policy = _policy(policy)
    summary = summarize(instance, eq)
    probs, bids, _ = eq.arrays()
    cands = eq.support_bids()
    players = []
    for i in range(instance.n):
        lo, hi = deviation_table(instance.values[i], probs, _others_max(bids, i), cands)
        per_policy = {p.value: _best(cands, lo, hi, p)[0] for p in DeviationPolicy}
        best, sup = _best(cands, lo, hi, policy)
        regret = max(0.0, sup.utility - summary.utility[i])
        players.append(PlayerReport(summary.utility[i], best, regret, per_policy))
    max_regret = max(p.regret for p in players)
    return VerificationReport("cce", policy.value, tolerance, tuple(players), max_regret,
                              max_regret <= tolerance)


def conditional_gains(instance: AuctionInstance, eq: FiniteEquilibrium, player: int,
                      policy=DeviationPolicy.DEVIATOR_LOSES) -> dict[float, tuple[float, Deviation, float]]:
    """Per recommended bid r of ``player``: (conditional gain, best deviation, Pr[r]).

    The gain is the supremum deviation utility minus the on-path utility,
    both conditional on the recommendation.
    """
    check_consistent(instance, eq)
    policy = _policy(policy)
    probs, bids, shares = eq.arrays()
    cands = eq.support_bids()
    v = instance.values[player]
    om = _others_max(bids, player)
    on_path = probs * shares[:, player] * (v - bids[:, player])
    out = {}
    for r in np.unique(bids[:, player]):
        sel = bids[:, player] == r
        mass = probs[sel].sum()
        if mass < MIN_CONDITIONING_MASS:
            continue
        cond_util = on_path[sel].sum() / mass
        lo, hi = deviation_table(v, probs[sel] / mass, om[sel], cands)
        best, sup = _best(cands, lo, hi, policy)
        out[float(r)] = (float(sup.utility - cond_util), best, float(mass))
    return out


def verify_ce(instance: AuctionInstance, eq: FiniteEquilibrium, tolerance: float = 0.0,
              policy=DeviationPolicy.DEVIATOR_LOSES) -> VerificationReport:
    """Conditional check: for each player and each recommended bid, no
    deviation beats the conditional on-path utility by more than ``tolerance``.

    Per-player ``regret`` is the conditional gain of the worst recommendation.
    """
    check_consistent(instance, eq)
    tolerance = _check_tol(tolerance)
    policy = _policy(policy)
    summary = summarize(instance, eq)
    players = []
    worst: ConditionalViolation | None = None
    for i in range(instance.n):
        gains = conditional_gains(instance, eq, i, policy)
        r, (gain, best, mass) = max(gains.items(), key=lambda kv: kv[1][0])
        if worst is None or gain > worst.conditional_gain:
            worst = ConditionalViolation(i, r, best.bid, gain, mass)
        players.append(PlayerReport(summary.utility[i], best, max(0.0, gain)))
    max_regret = max(p.regret for p in players)
    return VerificationReport("ce", policy.value, tolerance, tuple(players), max_regret,
                              max_regret <= tolerance, worst)


@dataclass(frozen=True)
class CharacterizationReport:
    holds: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {"holds": self.holds, "violations": list(self.violations)}


def check_ce_characterization(instance: AuctionInstance, eq: FiniteEquilibrium,
                              tolerance: float = 0.0, require_ce: bool = True) -> CharacterizationReport:
    """Check the outcome consequences every correlated equilibrium must have.

    If v1 > v2, the top player always wins at a price in [v2, v1]; if the
    top values tie, only top-valued players win, at price v1, and every
    utility is zero (all up to ``tolerance``).
    """
    check_consistent(instance, eq)
    tolerance = _check_tol(tolerance)
    if require_ce and not verify_ce(instance, eq, tolerance).passed:
        raise PreconditionError("distribution is not a correlated equilibrium at this tolerance")
    v = instance.values
    v1, v2 = v[0], v[1]
    summary = summarize(instance, eq)
    problems = []
    for k, a in enumerate(eq.atoms):
        price = a.price
        for i, s in a.winner_shares.items():
            if v[i] < v1:
                problems.append(f"atom {k}: player {i} with value {v[i]} < {v1} wins")
        if v1 > v2:
            if not (v2 - tolerance <= price <= v1 + tolerance):
                problems.append(f"atom {k}: price {price} outside [{v2}, {v1}]")
        elif abs(price - v1) > tolerance:
            problems.append(f"atom {k}: price {price} differs from v1 = {v1}")
    top_win = sum(summary.win_prob[i] for i in range(instance.n) if v[i] == v1)
    if abs(top_win - 1.0) > max(tolerance, 1e-12):
        problems.append(f"top-valued players win with probability {top_win}")
    if v1 == v2:
        for i, u in enumerate(summary.utility):
            if u > tolerance:
                problems.append(f"player {i} has positive utility {u}")
    return CharacterizationReport(not problems, tuple(problems))
