"""Genus arithmetic, oracle cross-checks, and the twist-prime search."""

from fractions import Fraction

import pytest

from artifact.modular import (
    cusp_orbit_count,
    degree_mu,
    elliptic_root_count,
    euler_phi,
    gamma1_4_cover_degree,
    gamma1_coset_count,
    genus_x0,
    legendre,
    order_argument_violations,
    ram_bound,
    search_twist_conductors,
)


def test_degree_mu_pinned():
    assert [degree_mu(n) for n in (1, 2, 4, 7, 11, 12)] == [1, 3, 6, 8, 12, 24]
    with pytest.raises(ValueError):
        degree_mu(0)


def test_legendre_basics():
    assert [legendre(a, 5) for a in range(5)] == [0, 1, -1, -1, 1]
    assert legendre(-3, 5) == -1
    assert legendre(-3, 7) == 1
    assert legendre(-1, 13) == 1
    assert legendre(-1, 11) == -1


def test_genus_pinned_examples():
    d1 = genus_x0(1)
    assert (d1.mu, d1.eps2, d1.eps3, d1.eps_inf, d1.g) == (1, 1, 1, 1, 0)
    d11 = genus_x0(11)
    assert (d11.mu, d11.eps2, d11.eps3, d11.eps_inf, d11.g) == (12, 0, 0, 2, 1)
    d36 = genus_x0(36)
    assert (d36.mu, d36.eps2, d36.eps3, d36.eps_inf, d36.g) == (72, 0, 0, 12, 1)


def test_genus_spot_values():
    expected = {2: 0, 3: 0, 10: 0, 13: 0, 14: 1, 15: 1, 17: 1, 19: 1,
                20: 1, 21: 1, 22: 2, 23: 2, 37: 2, 50: 2}
    for N, g in expected.items():
        assert genus_x0(N).g == g, N


def test_elliptic_closed_form_vs_direct_count():
    for N in list(range(1, 81)) + [97, 144, 180, 210, 289, 360]:
        d = genus_x0(N)
        assert d.eps2 == elliptic_root_count(N, 2), N
        assert d.eps3 == elliptic_root_count(N, 3), N
    with pytest.raises(ValueError):
        elliptic_root_count(10, 5)


def test_cusp_formula_vs_orbit_enumeration():
    for N in list(range(1, 37)) + [40, 48]:
        assert genus_x0(N).eps_inf == cusp_orbit_count(N), N


def test_genus_identity_every_level_to_500():
    for N in range(1, 501):
        d = genus_x0(N)
        assert 12 * (d.g - 1) + 3 * d.eps2 + 4 * d.eps3 + 6 * d.eps_inf == d.mu
        assert d.g >= 0
        assert d.eps_inf >= 1


def test_ram_bound_chain():
    for N in range(1, 501):
        r = ram_bound(N)
        assert Fraction(r["two_g_minus_2"]) == r["chain"]
        assert r["chain"] < r["mu_over_6"]
        assert r["strict"]
    assert ram_bound(1)["trivial"]
    assert not ram_bound(11)["trivial"]
    assert ram_bound(11)["two_g_minus_2"] == 0


def test_gamma1_cover_degree():
    cover = gamma1_4_cover_degree()
    assert cover["degree"] == 6
    assert cover["index"] == 12
    # index formula N^2 prod (1 - 1/p^2) against reachability, nearby levels
    assert [gamma1_coset_count(n) for n in (3, 4, 5)] == [8, 12, 24]


def test_search_first_three_twist_primes():
    recs = search_twist_conductors(1, 3, kernel_bound=2)
    assert [r["ell"] for r in recs] == [5, 17, 29]
    assert [r["N"] for r in recs] == [25, 289, 841]
    assert [r["phi"] for r in recs] == [20, 272, 812]
    for r in recs:
        assert r["ell"] % 12 == 5
        assert r["minus3_nonsquare"]
        assert r["symbol_evidence"][r["nonsquare_witness_prime"]] == -1
        assert r["phi_exceeds_bound"] and r["phi"] > r["kernel_bound"]


def test_search_with_base_conductor():
    recs = search_twist_conductors(11, 2, kernel_bound=2)
    assert [r["N"] for r in recs] == [25 * 11, 289 * 11]
    assert recs[0]["symbol_evidence"][11] == -1
    # a base divisible by 5 skips ell = 5
    skipped = search_twist_conductors(5, 1, kernel_bound=2)
    assert skipped[0]["ell"] == 17
    with pytest.raises(ValueError):
        search_twist_conductors(1, 1)
    with pytest.raises(ValueError):
        search_twist_conductors(0, 1, kernel_bound=2)


def test_search_deterministic():
    a = search_twist_conductors(1, 3, kernel_bound=2)
    b = search_twist_conductors(1, 3, kernel_bound=2)
    assert a == b


def test_order_argument_scan():
    for N in (25, 289, 841):
        assert order_argument_violations(N) == []
    assert order_argument_violations(8) == [3, 5]
    assert order_argument_violations(9) == [4, 7]
    assert euler_phi(841) == 29 * 28
