"""The reference-constant suite behind ``aucteq report`` and the test gate.

Each criterion returns a list of ``Check`` rows: a computed number, the
closed interval it must land in, and the route that produced it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import bounds
from .cdf import reciprocal_mean
from .construct import (
    construct_symmetric_worst_revenue,
    construct_table1,
    construct_worst_welfare,
    discretize,
    reduce_to_two,
)
from .core import AuctionInstance, summarize
from .dynamics import LearnerConfig, run
from .lp.polytope import BidGrid, build_cce_lp, extremal_equilibrium, solution_to_equilibrium
from .lp.simplex import LpProblem, solve_lp
from .verify import DeviationPolicy, check_ce_characterization, verify_ce, verify_cce

E = math.e
WINS = DeviationPolicy.DEVIATOR_WINS
LOSES = DeviationPolicy.DEVIATOR_LOSES


@dataclass(frozen=True)
class Check:
    label: str
    value: float
    lo: float
    hi: float
    basis: str

    @property
    def passed(self) -> bool:
        return bool(self.lo <= self.value <= self.hi)

    @property
    def expected(self) -> str:
        if self.lo == -math.inf:
            return f"<= {self.hi:.9g}"
        if self.hi == math.inf:
            return f">= {self.lo:.9g}"
        return f"[{self.lo:.9g}, {self.hi:.9g}]"

    def to_dict(self) -> dict:
        return {"label": self.label, "value": self.value, "expected": self.expected,
                "lo": self.lo, "hi": self.hi, "basis": self.basis, "pass": self.passed}


def near(label: str, value: float, target: float, tol: float, basis: str) -> Check:
    return Check(label, float(value), target - tol, target + tol, basis)


def at_least(label: str, value: float, floor: float, basis: str) -> Check:
    return Check(label, float(value), floor, math.inf, basis)


def at_most(label: str, value: float, ceiling: float, basis: str) -> Check:
    return Check(label, float(value), -math.inf, ceiling, basis)


def holds(label: str, ok: bool, basis: str) -> Check:
    return Check(label, 1.0 if ok else 0.0, 1.0, 1.0, basis)


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check]
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        detail = "; ".join(f"{c.label}={c.value:.9g} (want {c.expected})" for c in self.failures())
        return f"[{status}] {self.number:2d}. {self.title}" + (f" -- {detail}" if detail else "")

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "pass": self.passed,
                "seconds": self.seconds, "checks": [c.to_dict() for c in self.checks]}


# ---------------------------------------------------------------- criteria

def welfare_floor() -> list[Check]:
    r = bounds.minimize_welfare()
    return [
        near("W*", r.value, 0.813559, 1e-5, "closed form"),
        near("alpha*", r.params["alpha"], 0.274322, 1e-4, "closed form"),
        at_most("root residual", r.residual, 1e-10, "closed form"),
    ]


def case1_candidate() -> list[Check]:
    a = bounds.case1_alpha()
    return [
        near("case-1 root", a, 0.203, 1e-3, "closed form"),
        near("case-1 welfare", bounds.case1_welfare(a), 0.838, 1e-3, "closed form"),
    ]


def tight_welfare_construction() -> list[Check]:
    ce = construct_worst_welfare()
    s = ce.summary()
    return [
        at_most("max deviation gain", max(ce.deviation_gains()), 1e-9, "construction"),
        holds("no overbidding", ce.no_overbid, "construction"),
        near("welfare", s.welfare, 0.813559, 1e-6, "construction"),
    ]


def interval_feasibility() -> list[Check]:
    alphas = np.round(np.arange(0.27, 0.28 + 1e-9, 1e-3), 12)
    ub = [bounds.u_bounds(a) for a in alphas]
    return [
        at_least("min(alpha - u_min)", min(a - u.u_min for a, u in zip(alphas, ub)), 0.0, "closed form"),
        at_least("min(u_max - alpha)", min(u.u_max - a for a, u in zip(alphas, ub)), 0.0, "closed form"),
        at_most("max u_min", max(u.u_min for u in ub), 0.12, "closed form"),
        at_least("min u_max", min(u.u_max for u in ub), 0.285, "closed form"),
    ]


def revenue_floor(k: int = 200) -> list[Check]:
    ce = construct_symmetric_worst_revenue(2, 1.0)
    s = ce.summary()
    checks = [
        near("revenue (n=2)", s.revenue, 1 - 2 / E, 1e-9, "construction"),
        near("utility 1 (n=2)", s.utility[0], 1 / E, 1e-9, "construction"),
        near("utility 2 (n=2)", s.utility[1], 1 / E, 1e-9, "construction"),
    ]
    for n in (2, 3, 4):
        c = construct_symmetric_worst_revenue(n, 1.0)
        rev = summarize(c.instance, discretize(c, k)).revenue
        checks.append(near(f"discretized revenue n={n}, k={k}", rev,
                           bounds.symmetric_revenue_bound(n, 1.0), 2 / k, "construction"))
    return checks


def table1() -> list[Check]:
    inst, eq = construct_table1(1e-4)
    s = summarize(inst, eq)
    cce = verify_cce(inst, eq, 5e-3, LOSES)
    ce = verify_ce(inst, eq, 5e-3, LOSES)
    return [
        holds("CCE at tol 5e-3 (deviator-loses)", cce.passed, "verifier"),
        near("Alice utility", s.utility[1], 0.038, 2e-3, "summary"),
        near("Bob utility", s.utility[0], 1.016, 2e-3, "summary"),
        holds("fails CE verification", not ce.passed, "verifier"),
    ]


def ce_efficiency() -> list[Check]:
    checks = []
    for values in ((2.0, 1.0), (1.0, 1.0)):
        inst = AuctionInstance(values)
        for k in (10, 20):
            grid = BidGrid.uniform(inst, k)
            tag = f"{values}, k={k}"
            w = extremal_equilibrium(inst, grid, "ce", "welfare", "min")
            r = extremal_equilibrium(inst, grid, "ce", "revenue", "min")
            checks.append(near(f"min CE welfare {tag}", w.value, values[0], 1e-9, "LP"))
            checks.append(at_least(f"min CE revenue {tag}", r.value, values[1] - 1e-9, "LP"))
            for name, res in (("welfare", w), ("revenue", r)):
                ok = res.report.passed and check_ce_characterization(
                    inst, res.equilibrium, res.report.tolerance).holds
                checks.append(holds(f"characterization, min {name} {tag}", ok, "LP + verifier"))
    return checks


def lp_bracketing(k: int = 40) -> list[Check]:
    a_star = bounds.minimize_welfare().params["alpha"]
    inst = AuctionInstance((1.0, 1.0 - a_star))
    no_ob = extremal_equilibrium(inst, BidGrid.uniform(inst, k), "cce", "welfare", "min", no_overbid=True)
    ob = extremal_equilibrium(inst, BidGrid.uniform(inst, k, top=1.0), "cce", "welfare", "min")
    sym = AuctionInstance((1.0, 1.0))
    rev = extremal_equilibrium(sym, BidGrid.uniform(sym, k), "cce", "revenue", "min")
    return [
        Check(f"min welfare, no overbid, k={k}", no_ob.value, 0.813559 - 1e-6, 0.84, "LP"),
        Check(f"min revenue (1,1), k={k}", rev.value, 1 - 2 / E - 1e-6, 0.295, "LP"),
        Check(f"min welfare, overbidding, k={k}", ob.value, 1 - 1 / E - 1e-6, 0.8136, "LP"),
    ]


def random_cce_lps(count: int = 20, k: int = 4, seed: int = 2024):
    """Extreme points of 3-player CCE polytopes under random linear objectives."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        values = tuple(sorted(np.round(rng.uniform(0.2, 1.0, 3), 3), reverse=True))
        inst = AuctionInstance(values)
        base = build_cce_lp(inst, BidGrid.uniform(inst, k))
        problem = LpProblem(rng.normal(size=base.n_vars), base.A_ub, base.b_ub, base.A_eq, base.b_eq,
                            "min", base.meta)
        sol = solve_lp(problem)
        if sol.optimal:
            out.append((inst, solution_to_equilibrium(problem, sol)))
    return out


def reduction_soundness(tolerance: float = 1e-7) -> list[Check]:
    worst_rev = worst_util = 0.0
    before_ok = after_ok = True
    for inst, eq in random_cce_lps():
        s = summarize(inst, eq)
        red_inst, red = reduce_to_two(inst, eq)
        t = summarize(red_inst, red)
        worst_rev = max(worst_rev, abs(s.revenue - t.revenue))
        worst_util = max(worst_util, s.utility[0] - t.utility[0], s.utility[1] - t.utility[1])
        for policy in DeviationPolicy:
            before = verify_cce(inst, eq, tolerance, policy).passed
            before_ok &= before
            if before:
                after_ok &= verify_cce(red_inst, red, tolerance, policy).passed
    return [
        holds("inputs pass CCE verification", before_ok, "LP + verifier"),
        at_most("max revenue change", worst_rev, 1e-12, "reduction"),
        holds("outputs pass CCE verification", after_ok, "reduction + verifier"),
        at_most("max utility decrease (kept players)", worst_util, 1e-12, "reduction"),
    ]


def value_gap_trend(k: int = 40) -> list[Check]:
    revs = []
    for v in (1.0, 2.0, 5.0, 10.0):
        inst = AuctionInstance((v, 1.0))
        revs.append(extremal_equilibrium(inst, BidGrid.uniform(inst, k), "cce", "revenue", "min").value)
    checks = [at_least(f"rev(v={b}) - rev(v={a})", rb - ra, 0.0, "LP")
              for (a, ra), (b, rb) in zip(zip((1, 2, 5), revs), zip((2, 5, 10), revs[1:]))]
    checks.append(near("gap_threshold(0.1)", bounds.gap_threshold(0.1), 3.24e6, 1e-6, "closed form"))
    return checks


def property_suites(seeds=range(1, 11), rounds: int = 100_000) -> list[Check]:
    rng = np.random.default_rng(11)
    lemma_err = 0.0
    for _ in range(100):
        b = rng.uniform(0.1, 5.0)
        a = rng.uniform(0.01, 1.0) * b
        oracle, _ = quad(lambda x: 1 - a / (b - x), 0, b - a, epsabs=1e-13, epsrel=1e-13)
        lemma_err = max(lemma_err, abs(reciprocal_mean(a, b) - oracle))
    margin = min(bounds.revenue_gap_margin(rng.uniform(1 / E, 1.0) if i else 1.0, rng.uniform(1.0, 10.0))
                 for i in range(100))
    jump = 0.0
    for _ in range(100):
        alpha, v = rng.uniform(0.01, 1.0), rng.uniform(0.01, 0.99)
        jump = max(jump, abs(bounds.welfare_lb_case1(alpha, v * alpha) - bounds.welfare_lb_case2(alpha, v * alpha, v)))
    inst = AuctionInstance((1.0, 1.0))
    grid = BidGrid.uniform(inst, 20)
    sims_ok = True
    for seed in seeds:
        res = run(inst, grid, LearnerConfig("regret-matching", rounds, seed))
        sims_ok &= verify_cce(inst, res.equilibrium, max(res.max_regret, 0.0) + 1e-9, WINS).passed
    return [
        at_most("mean formula vs quadrature", lemma_err, 1e-8, "closed form + quadrature"),
        Check("min revenue margin (positive)", margin, np.nextafter(0.0, 1.0), math.inf, "closed form"),
        at_most("case-boundary jump", jump, 1e-9, "closed form"),
        holds(f"regret matching, seeds {seeds[0]}..{seeds[-1]}, T={rounds}", sims_ok, "simulation + verifier"),
    ]


CRITERIA: tuple[tuple[int, str, Callable[[], list[Check]]], ...] = (
    (1, "Welfare floor constant", welfare_floor),
    (2, "Boundary-case candidate", case1_candidate),
    (3, "Tight welfare construction", tight_welfare_construction),
    (4, "Interval feasibility", interval_feasibility),
    (5, "Revenue floor", revenue_floor),
    (6, "Table 1 coarse equilibrium", table1),
    (7, "CE efficiency on grids", ce_efficiency),
    (8, "LP bracketing at k=40", lp_bracketing),
    (9, "Reduction soundness", reduction_soundness),
    (10, "Value-gap trend", value_gap_trend),
    (11, "Property suites", property_suites),
)


def run_criterion(number: int) -> CriterionResult:
    for num_, title, fn in CRITERIA:
        if num_ == number:
            t0 = time.perf_counter()
            checks = fn()
            return CriterionResult(num_, title, checks, time.perf_counter() - t0)
    raise KeyError(number)


def run_all() -> list[CriterionResult]:
    return [run_criterion(n) for n, _, _ in CRITERIA]
