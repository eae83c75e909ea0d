"""Tate cohomology orders: pinned examples, oracle agreement, h = 1."""

import random

import pytest

from artifact.herbrand import (
    CyclicAction,
    brute_cohomology,
    herbrand,
    random_action,
    tate_h0,
    tate_h1,
)


def test_trivial_action_z3_on_z3():
    act = CyclicAction(3, [3], [[1]])
    assert tate_h0(act) == 3
    assert tate_h1(act) == 3
    assert herbrand(act) == 1
    assert brute_cohomology(act) == (3, 3)


def test_zero_module():
    act = CyclicAction(3, [], [])
    assert tate_h0(act) == 1 and tate_h1(act) == 1
    assert brute_cohomology(act) == (1, 1)
    act1 = CyclicAction(3, [1, 1], [[1, 0], [0, 1]])
    assert act1.module_order == 1 and tate_h0(act1) == 1


def test_shift_on_z5_cubed():
    shift = CyclicAction(3, [5, 5, 5], [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert tate_h0(shift) == 1
    assert tate_h1(shift) == 1
    assert brute_cohomology(shift) == (1, 1)


def test_multiplication_by_unit():
    # 7 has multiplicative order 3 mod 9, so x -> 7x is a valid Z/3 action on Z/9
    act = CyclicAction(3, [9], [[7]])
    h0, h1 = brute_cohomology(act)
    assert (tate_h0(act), tate_h1(act)) == (h0, h1)
    assert herbrand(act) == 1


def test_invalid_actions_refused():
    with pytest.raises(ValueError):
        CyclicAction(3, [3, 9], [[1, 0], [1, 1]])
    with pytest.raises(ValueError):
        CyclicAction(3, [5], [[2]])
    with pytest.raises(ValueError):
        CyclicAction(3, [3], [[1, 0]])
    with pytest.raises(ValueError):
        CyclicAction(0, [3], [[1]])


def test_enumeration_limit():
    act = CyclicAction(3, [3, 3, 3, 3, 3, 3, 3, 3], [[1 if i == j else 0 for j in range(8)] for i in range(8)])
    with pytest.raises(ValueError):
        brute_cohomology(act, limit=2000)


def test_random_actions_snf_matches_brute_and_h_is_1():
    rng = random.Random(20260822)
    checked = 0
    while checked < 100:
        p, n = rng.choice([(3, 1), (3, 2), (3, 3), (5, 1), (5, 2)])
        act = random_action(rng, p, n)
        pair = (tate_h0(act), tate_h1(act))
        assert pair == brute_cohomology(act), (act.factors, act.matrix)
        assert herbrand(act) == 1
        checked += 1


def test_generator_change_invariance():
    rng = random.Random(7)
    for _ in range(25):
        p, n = rng.choice([(3, 1), (3, 2), (5, 1)])
        act = random_action(rng, p, n)
        base = (tate_h0(act), tate_h1(act))
        u = rng.choice([u0 for u0 in range(1, p**n) if u0 % p != 0])
        tw = act.power_generator(u)
        assert (tate_h0(tw), tate_h1(tw)) == base
    with pytest.raises(ValueError):
        CyclicAction(3, [3], [[1]]).power_generator(3)


def test_multiplicativity_on_sub_quotient_pairs():
    rng = random.Random(31)
    for _ in range(20):
        p, n = rng.choice([(3, 1), (3, 2), (5, 1)])
        act = random_action(rng, p, n)
        m = p ** rng.randint(1, 2)
        sub, quo = act.sub_quotient_pair(m)
        assert sub.module_order * quo.module_order == act.module_order
        assert herbrand(act) == herbrand(sub) * herbrand(quo) == 1


def test_unipotent_block_values():
    act = CyclicAction(3, [9, 9], [[1, 0], [3, 1]])
    h0, h1 = brute_cohomology(act)
    assert (tate_h0(act), tate_h1(act)) == (h0, h1)
    assert h0 == h1
    assert herbrand(act) == 1
