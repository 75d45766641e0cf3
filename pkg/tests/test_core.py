import math

import pytest
from hypothesis import given, strategies as st

from aucteq.core import (
    Atom,
    AuctionInstance,
    FiniteEquilibrium,
    merge_atoms,
    outcome,
    perturb_to_strict,
    pure_profile,
    summarize,
)
from aucteq.errors import InvalidInputError, InvariantError


def test_instance_defaults():
    inst = AuctionInstance((2, 1))
    assert inst.values == (2.0, 1.0)
    assert inst.tie_priority == (0, 1)
    assert inst.rank() == (0, 1)


@pytest.mark.parametrize("values", [(1.0,), (1.0, -1.0), (1.0, math.nan)])
def test_instance_rejects_bad_values(values):
    with pytest.raises(InvalidInputError):
        AuctionInstance(values)


def test_instance_requires_sorted_values():
    with pytest.raises(InvariantError) as exc:
        AuctionInstance((1.0, 2.0))
    assert exc.value.name == "values-sorted"


def test_tie_priority_must_be_permutation():
    with pytest.raises(InvariantError):
        AuctionInstance((1.0, 1.0), (0, 0))


def test_outcome_uses_priority():
    inst = AuctionInstance((1.0, 1.0, 1.0), (2, 0, 1))
    assert outcome(inst, (0.5, 0.5, 0.2)) == (0, 0.5)
    assert outcome(inst, (0.5, 0.5, 0.5)) == (2, 0.5)
    assert outcome(inst, (0.1, 0.7, 0.5)) == (1, 0.7)


def test_atom_winner_must_bid_the_max():
    with pytest.raises(InvariantError):
        Atom(1.0, (0.2, 0.5), {0: 1.0})


def test_atom_shares_sum_to_one():
    with pytest.raises(InvariantError):
        Atom(1.0, (0.5, 0.5), {0: 0.5, 1: 0.4})


def test_probabilities_sum_to_one():
    with pytest.raises(InvariantError) as exc:
        FiniteEquilibrium((Atom(0.5, (0.0, 0.0), {0: 1.0}),))
    assert exc.value.name == "probabilities"


def test_duplicate_profiles_rejected():
    a = Atom(0.5, (0.0, 0.0), {0: 1.0})
    with pytest.raises(InvariantError):
        FiniteEquilibrium((a, a))


def test_merge_atoms_mixes_shares():
    eq = merge_atoms([Atom(0.25, (0.5, 0.5), {0: 1.0}), Atom(0.75, (0.5, 0.5), {1: 1.0})])
    assert len(eq.atoms) == 1
    assert eq.atoms[0].winner_shares == {0: 0.25, 1: 0.75}


def test_summarize_table1(table1):
    inst, eq = table1
    s = summarize(inst, eq)
    # Bob (player 0) wins the last four rows at bids 0.5, 0.8, 0.9, 1.0.
    assert s.win_prob[0] == pytest.approx(0.96, abs=1e-12)
    assert s.utility[0] == pytest.approx(0.03 * 1.5 + 0.11 * 1.2 + 0.19 * 1.1 + 0.63 * 1.0, abs=1e-12)
    assert s.utility[1] == pytest.approx(0.02 * (1 - 1e-4) + 0.02 * (0.9 - 1e-4), abs=1e-12)
    assert s.welfare == pytest.approx(0.96 * 2 + 0.04, abs=1e-12)
    assert s.revenue == pytest.approx(s.welfare - sum(s.utility), abs=1e-12)


def test_pure_profile_is_a_point_mass():
    eq = pure_profile((0.5, 0.5), 0)
    assert len(eq.atoms) == 1
    assert eq.atoms[0].winner_shares == {0: 1.0}


def test_perturb_to_strict_removes_ties():
    inst = AuctionInstance((1.0, 1.0))
    eq = FiniteEquilibrium((Atom(0.5, (0.3, 0.3), {0: 1.0}), Atom(0.5, (0.6, 0.6), {1: 1.0})))
    out = perturb_to_strict(eq, 1e-6)
    assert not any(a.tied() for a in out.atoms)
    for a in out.atoms:
        w, price = outcome(inst, a.bids)
        assert a.winner_shares == {w: 1.0}


@given(st.lists(st.floats(0.0, 5.0), min_size=2, max_size=4), st.data())
def test_summary_identities(values, data):
    inst = AuctionInstance(tuple(sorted(values, reverse=True)))
    m = data.draw(st.integers(1, 5))
    profiles = data.draw(st.lists(st.tuples(*[st.sampled_from([0.0, 0.25, 0.5, 1.0])] * inst.n),
                                  min_size=m, max_size=m, unique=True))
    weights = data.draw(st.lists(st.floats(0.1, 1.0), min_size=m, max_size=m))
    total = math.fsum(weights)
    atoms = []
    for bids, w in zip(profiles, weights):
        winner, _ = outcome(inst, bids)
        atoms.append(Atom(w / total, bids, {winner: 1.0}))
    s = summarize(inst, FiniteEquilibrium(tuple(atoms)))
    assert math.fsum(s.win_prob) == pytest.approx(1.0, abs=1e-12)
    assert s.welfare - s.revenue == pytest.approx(math.fsum(s.utility), abs=1e-12)
