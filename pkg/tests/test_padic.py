"""Base-ring sanity: exact generators, precision debits, Frobenius, parsing."""

import random

import pytest

from artifact.padic import PrimeContext, UnramifiedElement, least_nonresidue


def test_generator_choice_small_primes():
    assert PrimeContext(3).r == -1
    assert PrimeContext(7).r == -1
    assert PrimeContext(11).r == -1
    # 1 mod 4 primes take the least non-residue
    assert PrimeContext(5).r == 2
    assert PrimeContext(13).r == 2
    assert PrimeContext(17).r == 3


def test_least_nonresidue_is_nonresidue():
    for p in (5, 13, 17, 29, 41):
        c = least_nonresidue(p)
        assert pow(c, (p - 1) // 2, p) == p - 1
        for d in range(2, c):
            assert pow(d, (p - 1) // 2, p) == 1


def test_literal_round_trip():
    ctx = PrimeContext(3, 12)
    x = ctx.elt(1234, 56789)
    assert ctx.parse(str(x)) == x
    assert ctx.parse(str(x)).prec == x.prec
    y = ctx.parse("2+1*w mod 3^5")
    assert y.coords() == (2, 1) and y.prec == 5
    # bare integer, negative b, spaces
    assert ctx.parse("7").coords() == (7, 0)
    assert ctx.parse("-1 - 1*w").coords() == (3**12 - 1, 3**12 - 1)
    with pytest.raises(ValueError):
        ctx.parse("2+1*w mod 5^3")
    with pytest.raises(ValueError):
        ctx.parse("w+2")


def test_literal_round_trip_random():
    ctx = PrimeContext(5, 8)
    rng = random.Random(11)
    for _ in range(200):
        x = ctx.random_element(rng)
        assert ctx.parse(str(x)) == x


def test_ring_axioms_random():
    ctx = PrimeContext(3, 10)
    rng = random.Random(7)
    for _ in range(300):
        x = ctx.random_element(rng)
        y = ctx.random_element(rng)
        z = ctx.random_element(rng)
        assert (x + y) * z == x * z + y * z
        assert (x * y) * z == x * (y * z)
        assert x * y == y * x
        assert x + (-x) == ctx.zero()


def test_w_squares_to_generator():
    for p in (3, 5, 13):
        ctx = PrimeContext(p, 9)
        assert ctx.w() * ctx.w() == ctx.elt(ctx.r)


def test_valuation():
    ctx = PrimeContext(3, 12)
    assert ctx.elt(5, 7).valuation() == 0
    assert ctx.elt(9 * 5, 27).valuation() == 2
    assert ctx.elt(0, 81).valuation() == 4
    assert ctx.zero().valuation() == 12
    assert ctx.elt(3**11).valuation() == 11


def test_valuation_multiplicative_random():
    ctx = PrimeContext(3, 12)
    rng = random.Random(3)
    for _ in range(100):
        x = ctx.random_element(rng, unit=True) * ctx.elt(3) ** rng.randrange(3)
        y = ctx.random_element(rng, unit=True) * ctx.elt(3) ** rng.randrange(3)
        assert (x * y).valuation() == x.valuation() + y.valuation()


def test_inverse_and_division():
    ctx = PrimeContext(3, 12)
    rng = random.Random(19)
    for _ in range(100):
        x = ctx.random_element(rng, unit=True)
        assert x * x.inverse() == ctx.one()
    with pytest.raises(ZeroDivisionError):
        ctx.elt(3, 6).inverse()


def test_shift_down_debits_precision():
    ctx = PrimeContext(3, 12)
    x = ctx.elt(9 * 14, 9 * 2)
    y = x.shift_down(2)
    assert y.coords() == (14, 2)
    assert y.prec == 10
    with pytest.raises(ValueError):
        ctx.elt(1, 3).shift_down()
    # dividing then re-multiplying loses the top digits, visibly
    z = y * ctx.elt(9)
    assert z.prec == 12  # regained via the valuation of 9
    assert z == x


def test_frobenius_is_squared_identity_and_fixes_base():
    ctx = PrimeContext(3, 12)
    rng = random.Random(23)
    for _ in range(50):
        x = ctx.random_element(rng)
        assert x.frobenius().frobenius() == x
        assert x.frobenius().prec == x.prec
    assert ctx.elt(7).frobenius() == ctx.elt(7)


def test_frobenius_reduces_to_p_power_map():
    for p in (3, 5, 13):
        ctx = PrimeContext(p, 8)
        rng = random.Random(p)
        for _ in range(40):
            x = ctx.random_element(rng)
            fx = x.frobenius()
            xp = x ** p
            m = p
            assert (fx.a - xp.a) % m == 0 and (fx.b - xp.b) % m == 0


def test_teichmuller():
    ctx = PrimeContext(3, 12)
    rng = random.Random(29)
    for _ in range(25):
        x = ctx.random_element(rng, unit=True)
        t = ctx.teichmuller(x)
        assert t ** ctx.q == t
        assert (t - x).valuation() >= 1
        assert t ** (ctx.q - 1) == ctx.one()
        # frobenius acts on teichmuller lifts as the p-th power
        assert t.frobenius() == t ** ctx.p
    with pytest.raises(ValueError):
        ctx.teichmuller(ctx.elt(3))


def test_norm_and_trace():
    ctx = PrimeContext(3, 12)
    rng = random.Random(31)
    for _ in range(60):
        x = ctx.random_element(rng)
        y = ctx.random_element(rng)
        assert x.conjugate_norm() == x * x.frobenius()
        assert x.trace_to_base() == x + x.frobenius()
        assert (x * y).conjugate_norm() == x.conjugate_norm() * y.conjugate_norm()
        assert x.conjugate_norm().b == 0 and x.trace_to_base().b == 0


def test_product_precision_rule():
    ctx = PrimeContext(3, 12)
    x = ctx.elt(2, 1).shift_down(0)
    lowx = UnramifiedElement(ctx, 1, 1, prec=5)
    assert (x * lowx).prec == 5
    # multiplying by p^2 raises what we know about the product
    assert (lowx * ctx.elt(9)).prec == 7
    assert (x + lowx).prec == 5


def test_int_coercion():
    ctx = PrimeContext(3, 10)
    x = ctx.elt(4, 2)
    assert 3 * x == ctx.elt(12, 6)
    assert x + 1 == ctx.elt(5, 2)
    assert 1 - x == ctx.elt(-3, -2)
    assert x / 2 == x * ctx.elt(2).inverse()
