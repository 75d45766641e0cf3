"""No-regret learning over a bid grid with full-information feedback.

Each round every player samples a bid from its current mixed strategy,
then observes the counterfactual utility of every grid bid against the
realized opposing bids (on-path winners follow the tie priority).  The
time-averaged joint play is an approximate CCE whose tolerance is the
largest average external regret, measured with deviator-wins ties so that
it matches the LP rows and the verifier.  That measure can exceed the
learners' own (tie-priority) regret by up to one grid step for a player
who loses ties.

Randomness comes from numpy's PCG64 generator.  ``AUCTEQ_SEED`` overrides
the default seed.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .core import Atom, AuctionInstance, FiniteEquilibrium
from .errors import InvalidInputError
from .lp.polytope import BidGrid

ALGORITHMS = ("regret-matching", "multiplicative-weights")
DEFAULT_SEED = 20240607
TRAJECTORY_POINTS = 100


def default_seed() -> int:
    raw = os.environ.get("AUCTEQ_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw, 0)
    except ValueError:
        raise InvalidInputError(f"AUCTEQ_SEED must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class LearnerConfig:
    algorithm: str = "regret-matching"
    rounds: int = 10_000
    seed: int = field(default_factory=default_seed)
    rate: float | None = None  # multiplicative weights; default sqrt(ln K / T)
    no_overbid: bool = False

    def __post_init__(self):
        aliases = {"rm": "regret-matching", "mw": "multiplicative-weights"}
        algo = aliases.get(self.algorithm, self.algorithm)
        if algo not in ALGORITHMS:
            raise InvalidInputError(f"unknown algorithm {self.algorithm!r}")
        object.__setattr__(self, "algorithm", algo)
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise InvalidInputError("rounds must be a positive integer")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if self.rate is not None and not self.rate > 0:
            raise InvalidInputError("learning rate must be positive")


@dataclass
class SimResult:
    instance: AuctionInstance
    config: LearnerConfig
    actions: tuple[np.ndarray, ...]
    history: np.ndarray  # (T, n) realized bids
    equilibrium: FiniteEquilibrium
    regret: tuple[float, ...]
    trajectory: np.ndarray  # rows (round, average welfare, average revenue)
    # Regret against the learners' own feedback, where ties follow the priority.
    learner_regret: tuple[float, ...] = ()

    @property
    def max_regret(self) -> float:
        return max(self.regret)

    def to_dict(self) -> dict:
        return {
            "algorithm": self.config.algorithm,
            "rounds": self.config.rounds,
            "seed": self.config.seed,
            "regret": list(self.regret),
            "max_regret": self.max_regret,
            "learner_regret": list(self.learner_regret),
            "final_welfare": float(self.trajectory[-1, 1]),
            "final_revenue": float(self.trajectory[-1, 2]),
        }


def _strategy(cfg: LearnerConfig, state: np.ndarray, rate: float) -> np.ndarray:
    if cfg.algorithm == "regret-matching":
        pos = np.maximum(state, 0.0)
        total = pos.sum()
        return pos / total if total > 0 else np.full(state.size, 1.0 / state.size)
    w = np.exp(rate * (state - state.max()))
    return w / w.sum()


def run(instance: AuctionInstance, grid: BidGrid, config: LearnerConfig | None = None) -> SimResult:
    cfg = config or LearnerConfig()
    n, T = instance.n, int(cfg.rounds)
    values = np.array(instance.values)
    rank = np.array(instance.rank())
    actions = tuple(np.asarray(grid.admissible(v, cfg.no_overbid)) for v in instance.values)
    if any(a.size == 0 for a in actions):
        raise InvalidInputError("a player has no admissible bid")
    rate = cfg.rate
    if rate is None:
        rate = math.sqrt(math.log(max(a.size for a in actions)) / T) if T > 1 else 1.0
    rng = np.random.Generator(np.random.PCG64(int(cfg.seed)))

    # Learner state: cumulative regret (RM) or cumulative utility (MW).
    state = [np.zeros(a.size) for a in actions]
    dev_sum = [np.zeros(a.size) for a in actions]  # deviator-wins counterfactuals
    margins = [values[i] - actions[i] for i in range(n)]
    realized = np.zeros(n)
    history = np.empty((T, n))
    every = max(1, T // TRAJECTORY_POINTS)
    traj = []
    welfare_sum = revenue_sum = 0.0
    regret_matching = cfg.algorithm == "regret-matching"

    for t in range(T):
        draws = rng.random(n)
        bids = []
        for i in range(n):
            cum = np.cumsum(_strategy(cfg, state[i], rate))
            j = int(cum.searchsorted(draws[i] * cum[-1], side="right"))
            bids.append(float(actions[i][min(j, actions[i].size - 1)]))
        history[t] = bids
        top = max(bids)
        winner = min((i for i in range(n) if bids[i] == top), key=lambda i: rank[i])
        welfare_sum += values[winner]
        revenue_sum += top
        for i in range(n):
            om = max(bids[j] for j in range(n) if j != i)
            beats = all(rank[i] < rank[j] for j in range(n) if j != i and bids[j] == om)
            # Actions from index ``first`` on tie or beat ``om``; ties are won
            # on path only with priority, and always by a deviator.
            first = int(actions[i].searchsorted(om, side="left"))
            win_from = first if beats else int(actions[i].searchsorted(om, side="right"))
            u_now = values[i] - bids[i] if i == winner else 0.0
            realized[i] += u_now
            dev_sum[i][first:] += margins[i][first:]
            state[i][win_from:] += margins[i][win_from:]
            if regret_matching:
                state[i] -= u_now
        if (t + 1) % every == 0 or t == T - 1:
            traj.append((t + 1, welfare_sum / (t + 1), revenue_sum / (t + 1)))

    regret = tuple(float((dev_sum[i].max() - realized[i]) / T) for i in range(n))
    if regret_matching:
        learner = tuple(float(state[i].max() / T) for i in range(n))
    else:
        learner = tuple(float((state[i].max() - realized[i]) / T) for i in range(n))
    return SimResult(instance, cfg, actions, history, empirical_distribution(instance, history),
                     regret, np.array(traj), learner)


def empirical_distribution(instance: AuctionInstance, history: np.ndarray) -> FiniteEquilibrium:
    """Visit frequencies of the played profiles, winners by tie priority."""
    history = np.asarray(history, dtype=float)
    profiles, counts = np.unique(history, axis=0, return_counts=True)
    T = history.shape[0]
    rank = instance.rank()
    atoms = []
    for bids, c in zip(profiles, counts):
        top = bids.max()
        winner = min((i for i in range(instance.n) if bids[i] == top), key=lambda i: rank[i])
        atoms.append(Atom(c / T, tuple(bids), {winner: 1.0}))
    return FiniteEquilibrium(tuple(atoms))


def external_regret(instance: AuctionInstance, history: np.ndarray, player: int,
                    actions: np.ndarray) -> float:
    """Average gain of the best fixed bid in ``actions`` over the logged play.

    The fixed bid wins ties (deviator-wins); realized utilities use the tie
    priority.
    """
    history = np.asarray(history, dtype=float)
    T = history.shape[0]
    v = instance.values[player]
    om = np.delete(history, player, axis=1).max(axis=1)
    top = history.max(axis=1)
    rank = np.array(instance.rank())
    at_top = history == top[:, None]
    winners = np.argmin(np.where(at_top, rank[None, :], instance.n), axis=1)
    realized = math.fsum(np.where(winners == player, v - history[:, player], 0.0))
    om_sorted = np.sort(om)
    wins = np.searchsorted(om_sorted, np.asarray(actions, dtype=float), side="right")
    best = float(np.max((v - np.asarray(actions, dtype=float)) * wins))
    return (best - realized) / T
