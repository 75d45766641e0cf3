import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aucteq.core import Atom, AuctionInstance, FiniteEquilibrium, outcome, perturb_to_strict, summarize
from aucteq.errors import InvalidInputError, PreconditionError
from aucteq.verify import (
    DeviationPolicy,
    best_constant_deviation,
    check_ce_characterization,
    conditional_gains,
    deviation_utility,
    verify_ce,
    verify_cce,
)

WINS, LOSES = DeviationPolicy.DEVIATOR_WINS, DeviationPolicy.DEVIATOR_LOSES


def brute_force_sup(instance, eq, player, step=1e-3):
    """Best constant deviation over a dense grid plus points just above each bid."""
    v = instance.values[player]
    bids = [a.bids for a in eq.atoms]
    probs = [a.probability for a in eq.atoms]
    om = [max(b[j] for j in range(instance.n) if j != player) for b in bids]
    cands = set(np.arange(0.0, max(instance.values) + step, step))
    cands.update(x + 1e-12 for x in om)
    cands.update(om)
    # Strict wins only: the sup over reals is approached from the candidates above.
    return max((v - d) * sum(p for p, o in zip(probs, om) if o < d) for d in cands)


def random_equilibrium(instance, rng, m=6, grid=(0.0, 0.2, 0.4, 0.6, 0.8, 1.0)):
    seen = {}
    while len(seen) < m:
        bids = tuple(float(rng.choice(grid)) for _ in range(instance.n))
        seen[bids] = rng.uniform(0.1, 1.0)
    total = sum(seen.values())
    atoms = tuple(Atom(w / total, b, {outcome(instance, b)[0]: 1.0}) for b, w in seen.items())
    return FiniteEquilibrium(atoms)


def test_table1_is_cce_under_both_policies(table1):
    inst, eq = table1
    for policy in DeviationPolicy:
        rep = verify_cce(inst, eq, 5e-3, policy)
        assert rep.passed
        assert rep.max_regret == 0.0


def test_table1_best_deviations(table1):
    inst, eq = table1
    bob = best_constant_deviation(inst, eq, 0, WINS)
    alice = best_constant_deviation(inst, eq, 1, LOSES)
    assert bob.bid == pytest.approx(0.9999) and bob.utility == pytest.approx(1.0001)
    assert alice.bid == pytest.approx(0.9) and alice.utility == pytest.approx(0.037)
    assert alice.from_above
    assert summarize(inst, eq).utility[1] == pytest.approx(0.037996, abs=1e-9)


def test_table1_fails_ce(table1):
    inst, eq = table1
    rep = verify_ce(inst, eq, 5e-3)
    assert not rep.passed
    assert rep.worst.player == 0 and rep.worst.recommendation == 0.0
    assert rep.worst.conditional_gain == pytest.approx(1.9999, abs=1e-12)
    # Alice told to bid 0.4999 gains 0.5 by matching Bob at 0.5.
    gain, dev, mass = conditional_gains(inst, eq, 1)[0.4999]
    assert gain == pytest.approx(0.5, abs=1e-12)
    assert dev.bid == pytest.approx(0.5) and mass == pytest.approx(0.03)


def test_deviation_utility_tie_policies():
    inst = AuctionInstance((1.0, 1.0))
    eq = FiniteEquilibrium((Atom(1.0, (0.4, 0.4), {0: 1.0}),))
    assert deviation_utility(inst, eq, 1, 0.4, WINS) == pytest.approx(0.6)
    assert deviation_utility(inst, eq, 1, 0.4, LOSES) == 0.0
    # Regret is measured against the supremum, so the policy does not change it.
    assert verify_cce(inst, eq, 0.0, LOSES).players[1].regret == pytest.approx(0.6)
    assert verify_cce(inst, eq, 0.0, WINS).players[1].regret == pytest.approx(0.6)


def test_pure_nash_at_second_value_is_exact_cce():
    inst = AuctionInstance((2.0, 1.0))
    eq = FiniteEquilibrium((Atom(1.0, (1.0, 1.0), {0: 1.0}),))
    assert verify_cce(inst, eq).passed
    assert verify_ce(inst, eq).passed


def test_negative_tolerance_rejected(table1):
    inst, eq = table1
    with pytest.raises(InvalidInputError):
        verify_cce(inst, eq, -1.0)
    with pytest.raises(InvalidInputError):
        verify_cce(inst, eq, 0.0, "bogus")


@pytest.mark.parametrize("seed", range(10))
def test_regret_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    inst = AuctionInstance(tuple(sorted(rng.uniform(0.3, 1.0, 3), reverse=True)))
    eq = random_equilibrium(inst, rng)
    util = summarize(inst, eq).utility
    rep = verify_cce(inst, eq, 0.0, LOSES)
    for i in range(inst.n):
        oracle = max(0.0, brute_force_sup(inst, eq, i) - util[i])
        assert rep.players[i].regret == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_ce_regret_dominates_cce_regret(seed):
    rng = np.random.default_rng(100 + seed)
    inst = AuctionInstance(tuple(sorted(rng.uniform(0.3, 1.0, 2 + seed % 2), reverse=True)))
    eq = random_equilibrium(inst, rng)
    ce, cce = verify_ce(inst, eq), verify_cce(inst, eq)
    for p_ce, p_cce in zip(ce.players, cce.players):
        assert p_ce.regret >= p_cce.regret - 1e-12
    if ce.passed:
        assert cce.passed


def test_perturbation_does_not_raise_regret():
    inst = AuctionInstance((1.0, 1.0))
    eq = FiniteEquilibrium((Atom(0.5, (0.6, 0.6), {0: 0.5, 1: 0.5}), Atom(0.5, (0.8, 0.8), {0: 1.0})))
    before = verify_cce(inst, eq, 0.0, WINS).max_regret
    after = verify_cce(inst, perturb_to_strict(eq, 1e-6), 0.0, WINS).max_regret
    assert after <= before + 1e-5


def test_characterization_on_top_value_tie():
    inst = AuctionInstance((1.0, 1.0))
    eq = FiniteEquilibrium((Atom(1.0, (1.0, 1.0), {0: 0.5, 1: 0.5}),))
    rep = check_ce_characterization(inst, eq)
    assert rep.holds and bool(rep)


def test_characterization_flags_low_price():
    inst = AuctionInstance((2.0, 1.0))
    eq = FiniteEquilibrium((Atom(1.0, (1.0, 1.0), {0: 1.0}),))
    assert check_ce_characterization(inst, eq).holds
    low = FiniteEquilibrium((Atom(1.0, (0.5, 0.4), {0: 1.0}),))
    rep = check_ce_characterization(inst, low, require_ce=False)
    assert not rep.holds
    with pytest.raises(PreconditionError):
        check_ce_characterization(inst, low)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_regret_is_policy_independent(seed):
    rng = np.random.default_rng(seed)
    inst = AuctionInstance((1.0, 0.7))
    eq = random_equilibrium(inst, rng, m=4)
    assert verify_cce(inst, eq, 0, WINS).max_regret == verify_cce(inst, eq, 0, LOSES).max_regret
