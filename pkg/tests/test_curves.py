"""Finite fields, curve enumeration, automorphisms, orbits, kernels."""

import random
from collections import Counter

import pytest

from artifact.curves import (
    Curve,
    FiniteField,
    automorphisms,
    cyclic_subgroups,
    kernel_report,
    mu_index,
    parse_curve,
    scalar_frobenius_check,
    subgroup_orbits,
)

CM_REDUCTION = parse_curve("y2=x3-x")


@pytest.fixture(scope="module")
def F9():
    return FiniteField(3, 2)


@pytest.fixture(scope="module")
def E9(F9):
    return Curve(F9, CM_REDUCTION)


@pytest.fixture(scope="module")
def E729():
    return Curve(FiniteField(3, 6), CM_REDUCTION)


def test_field_axioms_random():
    rng = random.Random(31)
    for p, k in ((3, 2), (3, 4), (5, 2), (7, 1)):
        F = FiniteField(p, k)
        for _ in range(150):
            a, b, c = (rng.randrange(F.q) for _ in range(3))
            assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
            assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
            assert F.add(a, F.neg(a)) == 0
            if a:
                assert F.mul(a, F.inv(a)) == 1
        # Frobenius is additive and multiplicative and p-power
        for _ in range(50):
            a, b = rng.randrange(F.q), rng.randrange(F.q)
            assert F.frob(F.add(a, b)) == F.add(F.frob(a), F.frob(b))
            assert F.frob(F.mul(a, b)) == F.mul(F.frob(a), F.frob(b))
            assert F.frob(a) == F.power(a, p)
        # the k-fold Frobenius is the identity
        for a in range(min(F.q, 64)):
            assert F.frob(a, k) == a


def test_field_generator_and_subfield():
    F81 = FiniteField(3, 4)
    seen = set()
    x = 1
    for _ in range(80):
        seen.add(x)
        x = F81.mul(x, F81.gen)
    assert len(seen) == 80
    # elements fixed by the square of Frobenius form the F_9 subfield
    fixed = [a for a in range(81) if F81.frob(a, 2) == a]
    assert len(fixed) == 9


def test_parse_curve_forms():
    assert parse_curve("y2=x3-x") == (0, 0, 0, -1, 0)
    assert parse_curve("y2+y=x3-38x+90") == (0, 0, 1, -38, 90)
    assert parse_curve("y2 + 3xy - y = x3 + 2x2 - 7x + 1") == (3, 2, -1, -7, 1)
    with pytest.raises(ValueError):
        parse_curve("y2=x2-x")
    with pytest.raises(ValueError):
        parse_curve("y3=x3-x")
    with pytest.raises(ValueError):
        parse_curve("y2+x=x3")


def test_singular_curve_rejected():
    with pytest.raises(ValueError):
        Curve(FiniteField(3, 1), (0, 0, 0, 0, 0))
    with pytest.raises(ValueError):
        Curve(FiniteField(5, 1), (0, 0, 0, -3, 2))


def test_reduction_point_set():
    E3 = Curve(FiniteField(3, 1), CM_REDUCTION)
    assert E3.count() == 4
    assert E3.trace() == 0
    assert set(E3.points()) == {None, (0, 0), (1, 0), (2, 0)}
    assert E3.group_structure() == (2, 2)
    assert E3.is_supersingular()


def test_j_invariant_zero_is_1728_mod_3():
    E3 = Curve(FiniteField(3, 1), CM_REDUCTION)
    assert E3.j_invariant() == 0
    assert 1728 % 3 == 0


def test_counts_follow_scalar_frobenius():
    for k, count, structure in ((1, 16, (4, 4)), (2, 64, (8, 8)), (3, 784, (28, 28))):
        E = Curve(FiniteField(3, 2 * k), CM_REDUCTION)
        assert E.count() == count == ((-3) ** k - 1) ** 2
        assert E.trace() == 9**k + 1 - count
        assert E.group_structure() == structure
    assert Curve(FiniteField(3, 2), CM_REDUCTION).trace() == -6


def test_group_law_on_enumerated_points(E9):
    rng = random.Random(5)
    pts = E9.points()
    for _ in range(120):
        P, Q, R = (rng.choice(pts) for _ in range(3))
        assert E9.add_points(P, Q) == E9.add_points(Q, P)
        assert E9.add_points(E9.add_points(P, Q), R) == E9.add_points(
            P, E9.add_points(Q, R)
        )
        assert E9.add_points(P, E9.neg_point(P)) is None
        assert E9.add_points(P, None) == P
        assert E9.add_points(P, Q) in pts


def test_point_orders_divide_exponent(E9):
    orders = E9.point_orders()
    assert orders[None] == 1
    assert max(orders.values()) == 4
    assert sorted(Counter(orders.values()).items()) == [(1, 1), (2, 3), (4, 12)]


def test_long_form_curve_over_f3():
    E = Curve(FiniteField(3, 1), parse_curve("y2+y=x3-38x+90"))
    assert E.count() == 4
    assert E.trace() == 0
    assert E.is_supersingular()
    # this model has a single rational 2-torsion point, so the group is Z/4
    assert E.group_structure() == (1, 4)


def test_automorphism_group_f9(E9):
    auts = automorphisms(E9)
    assert len(auts) == 12
    orders = sorted(Counter(g.order() for g in auts).items())
    assert orders == [(1, 1), (2, 1), (3, 2), (4, 6), (6, 2)]
    # dicyclic presentation: a of order 6, b of order 4, b^2 = a^3, bab^-1 = a^-1
    by_order = {}
    for g in auts:
        by_order.setdefault(g.order(), []).append(g)
    a = by_order[6][0]
    b = by_order[4][0]
    a3 = a.compose(a).compose(a)
    assert b.compose(b).key() == a3.key()
    binv = b.compose(b).compose(b)
    ainv = a3.compose(a).compose(a)
    assert b.compose(a).compose(binv).key() == ainv.key()


def test_automorphisms_act_on_points(E9):
    pts = set(E9.points())
    for g in automorphisms(E9):
        image = {g.act(P) for P in pts}
        assert image == pts
        # group automorphism: additive on a sample
        rng = random.Random(str(g.key()))
        for _ in range(20):
            P, Q = rng.choice(list(pts)), rng.choice(list(pts))
            assert g.act(E9.add_points(P, Q)) == E9.add_points(g.act(P), g.act(Q))


def test_automorphism_search_over_prime_field():
    E3 = Curve(FiniteField(3, 1), CM_REDUCTION)
    auts = automorphisms(E3)
    assert len(auts) == 6
    assert sorted(Counter(g.order() for g in auts).items()) == [
        (1, 1),
        (2, 1),
        (3, 2),
        (6, 2),
    ]


def test_generic_curve_has_two_automorphisms():
    # j not 0 or 1728: only +-1 survive
    E = Curve(FiniteField(5, 1), parse_curve("y2=x3+x+1"))
    assert E.j_invariant() not in (0, E.field.from_int(1728))
    assert len(automorphisms(E)) == 2


def test_scalar_frobenius_levels():
    report = scalar_frobenius_check(CM_REDUCTION, 3, kmax=3)
    assert report["trace"] == -6
    assert report["scalar"] == -3
    assert [lv["points"] for lv in report["levels"]] == [16, 64, 784]


def test_scalar_frobenius_refuses_ordinary():
    # y^2 = x^3 + x^2 - 1 has trace 1 over F_3, hence trace -5 over F_9
    coeffs = parse_curve("y2=x3+x2-1")
    E = Curve(FiniteField(3, 2), coeffs)
    assert E.trace() not in (6, -6)
    with pytest.raises(ValueError):
        scalar_frobenius_check(coeffs, 3)


def test_mu_index_values():
    assert [mu_index(N) for N in (1, 2, 4, 7, 11, 12)] == [1, 3, 6, 8, 12, 24]


def test_cyclic_subgroup_counts(E9, E729):
    assert len(cyclic_subgroups(E9, 2)) == 3
    assert len(cyclic_subgroups(E9, 4)) == 6
    assert len(cyclic_subgroups(E729, 7)) == 8
    with pytest.raises(ValueError):
        cyclic_subgroups(E9, 3)
    with pytest.raises(ValueError):
        # 7-torsion is not rational over F_9
        cyclic_subgroups(E9, 7)


def test_subgroup_orbit_reports(E9, E729):
    rep2 = subgroup_orbits(E9, 2)
    assert rep2["mu"] == 3 and rep2["orbit_count"] == 1
    assert [(len(o["members"]), o["stabilizer_order"]) for o in rep2["orbits"]] == [
        (3, 4)
    ]
    rep4 = subgroup_orbits(E9, 4)
    assert rep4["mu"] == 6 and rep4["orbit_count"] == 1
    assert [(len(o["members"]), o["stabilizer_order"]) for o in rep4["orbits"]] == [
        (6, 2)
    ]
    rep7 = subgroup_orbits(E729, 7)
    assert rep7["mu"] == 8 and rep7["orbit_count"] == 2
    assert sorted(
        (len(o["members"]), o["stabilizer_order"]) for o in rep7["orbits"]
    ) == [(2, 6), (6, 2)]
    for rep in (rep2, rep4, rep7):
        assert 6 * rep["orbit_count"] >= rep["mu"]
        for orbit in rep["orbits"]:
            assert len(orbit["members"]) * orbit["stabilizer_order"] == rep["aut_order"]


def test_kernel_report_values():
    report = kernel_report(CM_REDUCTION, 3, kmax=2)
    assert report["stable"]
    assert report["B"] == 2
    rows = report["levels"][-1]["rows"]
    summary = sorted({(r["order"], r["trace"], r["fixed"], r["anti"]) for r in rows})
    # order-3: both kernels collapse to the origin (inseparable degree 3 and
    # degree 1); order-4: each kernel is {O, T} for a shared 2-torsion T;
    # order-6: degrees 1 and 3, both give just the origin
    assert summary == [(3, -1, 1, 1), (4, 0, 2, 2), (6, 1, 1, 1)]
    for r in rows:
        assert r["deg_minus"] == 2 - r["trace"]
        assert r["deg_plus"] == 2 + r["trace"]
        assert r["fixed"] <= r["deg_minus"]
        assert r["anti"] <= r["deg_plus"]
