"""The reference implementations, checked against raw run enumeration."""

import itertools
import random

import pytest

from forestalg import oracle, trees
from forestalg.errors import TooLarge
from forestalg.oracle import OracleConfig, oracle_eval, oracle_runs, oracle_select, oracle_sigset

import helpers

WIDE = OracleConfig(max_nodes=10, max_states=12)


# -- run enumeration on hand-checked instances -------------------------------

def test_runs_over_a_single_leaf(cycle_aut):
    t = trees.leaf("a", node_id=7)
    runs = oracle_runs(cycle_aut, t, WIDE)
    assert sorted((pre0, frag[7], post) for frag, pre0, post in runs) == [
        (0, (0, 0, 1), 1),
        (2, (2, 0, 3), 3),
        (4, (4, 0, 5), 5),
    ]


def test_runs_over_the_bare_hole(cycle_aut):
    b = trees.box()
    hid = b.hole.id
    runs = oracle_runs(cycle_aut, b, WIDE)
    assert len(runs) == 36  # pre and post both unconstrained
    assert all(frag[hid] == (pre0, None, post) for frag, pre0, post in runs)


def test_runs_over_a_two_root_forest(cycle_aut):
    f = trees.concat(trees.leaf("a", node_id=0), trees.leaf("b", node_id=1))
    assert oracle_sigset(cycle_aut, f, WIDE) == {(0, 0), (2, 2)}
    runs = oracle_runs(cycle_aut, f, WIDE)
    assert len(runs) == 2


def test_run_caps():
    rng = random.Random(5)
    aut = helpers.random_nfta(rng, 3)
    big = helpers.random_tree(rng, 9)
    with pytest.raises(TooLarge):
        oracle_runs(aut, big, OracleConfig(max_nodes=8))
    wide = helpers.random_nfta(rng, 6)
    while wide.nq <= 5:
        wide = helpers.random_nfta(rng, 6)
    with pytest.raises(TooLarge):
        oracle_runs(wide, trees.leaf("a"), OracleConfig(max_states=5))


# -- acceptance --------------------------------------------------------------

def test_acceptance_equals_accepting_signature_presence():
    rng = random.Random(0xACC)
    for _ in range(150):
        aut = helpers.random_nfta(rng, 4)
        t = helpers.random_tree(rng, rng.randint(1, 7))
        sx = aut.state_index
        expected = (sx[aut.q0], sx[aut.qF]) in oracle_sigset(aut, t)
        assert oracle_eval(aut, t) == expected


def test_acceptance_needs_a_single_tree(cycle_aut):
    two = trees.concat(trees.leaf("a"), trees.leaf("a"))
    with pytest.raises(TooLarge):
        oracle_eval(cycle_aut, two)
    with pytest.raises(TooLarge):
        oracle_eval(cycle_aut, trees.box())


# -- selection ---------------------------------------------------------------

def select_from_runs(aut, t, cfg=None):
    """Selection recomputed straight from accepting runs, position by position."""
    sx = aut.state_index
    q0, qF = sx[aut.q0], sx[aut.qF]
    accepting = [
        frag
        for frag, pre0, post in oracle_runs(aut, t, cfg)
        if pre0 == q0 and post == qF
    ]
    if aut.k == 0:
        return {()} if (aut.select and accepting) else set()
    answers = set()
    for frag in accepting:
        for s in aut.select:
            cands = [
                [vid for vid, tr in frag.items() if tr[1] == sx[q]]
                for q in s
            ]
            answers.update(itertools.product(*cands))
    return answers


def test_selection_on_the_pair_fixture(pair_aut, seven_tree):
    assert oracle_select(pair_aut, seven_tree) == {(4, 1), (5, 1)}
    assert select_from_runs(pair_aut, seven_tree, WIDE) == {(4, 1), (5, 1)}


def test_selection_matches_runs():
    rng = random.Random(0x5E1)
    for _ in range(120):
        aut = helpers.random_nfsta(rng, 3)
        t = helpers.random_tree(rng, rng.randint(1, 6))
        assert oracle_select(aut, t) == select_from_runs(aut, t)


def test_nullary_selection(cycle_aut, nine_tree):
    base = dict(
        states=cycle_aut.states,
        alphabet=cycle_aut.alphabet,
        init=cycle_aut.init,
        delta=cycle_aut.delta,
        q0=cycle_aut.q0,
        qF=cycle_aut.qF,
    )
    from forestalg.automata import Nfsta

    yes = Nfsta(**base, select=[()])
    no = Nfsta(**base, select=[])
    assert oracle_select(yes, nine_tree) == {()}
    assert oracle_select(no, nine_tree) == set()
    rejected = trees.leaf("b")
    assert oracle_select(yes, rejected) == set()


def test_selection_assignment_cap(pair_aut, seven_tree):
    with pytest.raises(TooLarge):
        oracle_select(pair_aut, seven_tree, OracleConfig(max_assignments=1))


def test_selection_needs_a_single_tree(pair_aut):
    two = trees.concat(trees.leaf("a"), trees.leaf("a"))
    with pytest.raises(TooLarge):
        oracle_select(pair_aut, two)
