"""Series layer: literals, ring ops, composition, reversion, denominators."""

import random

import numpy as np
import pytest

from artifact.padic import PrimeContext
from artifact.series import (
    ExactPolynomial,
    TruncatedSeries,
    capmax,
    parse_series,
    work_prec,
)


@pytest.fixture(scope="module")
def ctx():
    return PrimeContext(3, 20)


def test_capmax_values():
    assert capmax(3) == 20
    assert capmax(5) == 13
    assert capmax(7) == 11
    assert 3**20 < 2**32 < 3**21


def test_exact_polynomial_basics():
    f = ExactPolynomial({1: -3, 9: 1})  # -3*Y + Y^9
    assert f.degree() == 9
    assert f.coeff(9) == 1 and f.coeff(1) == -3 and f.coeff(2) == 0
    g = f * f
    assert g.coeff(18) == 1 and g.coeff(10) == -6 and g.coeff(2) == 9
    assert (f - f) == 0
    assert f.derivative().c == {0: -3, 8: 9}
    assert f.evaluate_int(2) == -6 + 512


def test_exact_polynomial_compose():
    f = ExactPolynomial({1: -3, 9: 1})
    ff = f.compose(f)
    # f(f(Y)) = -3 f + f^9, degree 81, monic
    assert ff.degree() == 81
    assert ff.is_monic()
    assert ff == f * ExactPolynomial({0: -3, 8: 1}).compose(f)


def test_eisenstein_check():
    assert ExactPolynomial({0: -3, 8: 1}).is_eisenstein(3)
    assert not ExactPolynomial({0: -9, 8: 1}).is_eisenstein(3)
    assert not ExactPolynomial({0: -3, 1: 1, 8: 1}).is_eisenstein(3)
    assert not ExactPolynomial({0: -3, 8: 2}).is_eisenstein(3)


def test_series_literal_round_trip(ctx):
    s = parse_series(ctx, "1 + 2*X + (2+1*w)*X^3")
    assert s.D == 3
    assert s.coeff(0)[:2] == (1, 0)
    assert s.coeff(1)[:2] == (2, 0)
    assert s.coeff(2)[:2] == (0, 0)
    assert s.coeff(3)[:2] == (2, 1)
    assert parse_series(ctx, str(s)) == s


def test_series_literal_signs_and_prefix(ctx):
    s = parse_series(ctx, "X - X^2 + 2*X^3 - 5*X^4")
    assert [s.coeff_element(k).a for k in range(5)] == [0, 1, 3**20 - 1, 2, 3**20 - 5]
    t = parse_series(ctx, "pi^-2 * (1 + 3*X)")
    # normalization cannot strip (constant term is a unit), so e stays 2
    assert t.e == 2 and t.coeff(0)[0] == 1
    assert parse_series(ctx, str(t)) == t
    assert parse_series(ctx, "-X").coeff(1)[0] == 3**20 - 1
    with pytest.raises(ValueError):
        parse_series(ctx, "X^")
    with pytest.raises(ValueError):
        parse_series(ctx, "^3")


def test_series_print_round_trip_random(ctx):
    rng = random.Random(41)
    m = 3**20
    for _ in range(40):
        D = rng.randrange(1, 9)
        pairs = [(rng.randrange(m), rng.randrange(m) if rng.random() < 0.4 else 0)
                 for _ in range(D + 1)]
        s = TruncatedSeries.from_pairs(ctx, pairs, D)
        assert parse_series(ctx, str(s), D=D) == s


def test_mul_matches_convolution(ctx):
    rng = random.Random(43)
    m = 3**20
    for _ in range(20):
        D = rng.randrange(1, 12)
        s = TruncatedSeries.from_pairs(
            ctx, [(rng.randrange(m), rng.randrange(m)) for _ in range(D + 1)], D)
        t = TruncatedSeries.from_pairs(
            ctx, [(rng.randrange(m), rng.randrange(m)) for _ in range(D + 1)], D)
        st = s * t
        for k in range(D + 1):
            acc_a, acc_b = 0, 0
            for i in range(k + 1):
                a1, b1, _ = s.coeff(i)
                a2, b2, _ = t.coeff(k - i)
                acc_a += a1 * a2 - b1 * b2
                acc_b += a1 * b2 + b1 * a2
            assert st.coeff(k)[0] == acc_a % m
            assert st.coeff(k)[1] == acc_b % m


def test_compose_oracle_geometric(ctx):
    D = 6
    g = TruncatedSeries.from_pairs(ctx, [(-1) ** k for k in range(D + 1)], D)
    h = TruncatedSeries.from_pairs(ctx, [0] + [1] * D, D)
    gh = g.compose(h)
    want = parse_series(ctx, "1 - X", D=D)
    assert gh == want


def test_compose_requires_zero_constant(ctx):
    g = parse_series(ctx, "1 + X", D=4)
    with pytest.raises(ValueError):
        g.compose(g)


def test_revert_oracle(ctx):
    g = parse_series(ctx, "X + X^2", D=4)
    h = g.revert()
    assert h == parse_series(ctx, "X - X^2 + 2*X^3 - 5*X^4", D=4)


def test_revert_round_trip_random(ctx):
    rng = random.Random(47)
    m = 3**20
    for _ in range(10):
        D = rng.randrange(3, 10)
        pairs = [0, 1 + 3 * rng.randrange(27)] + [
            rng.randrange(m) for _ in range(D - 1)
        ]
        g = TruncatedSeries.from_pairs(ctx, pairs, D)
        h = g.revert()
        x = TruncatedSeries.x(ctx, D)
        assert g.compose(h) == x
        assert h.compose(g) == x


def test_inverse(ctx):
    s = parse_series(ctx, "1 + X + 2*X^2", D=8)
    assert s * s.inverse() == parse_series(ctx, "1", D=8)
    with pytest.raises(ValueError):
        parse_series(ctx, "3 + X", D=4).inverse()


def test_denominator_normalization(ctx):
    # pi^{-1} * 3X normalizes to the integral series -X
    s = TruncatedSeries.from_pairs(ctx, [0, 3], 3, e=1)
    assert s.e == 0
    assert s.coeff_element(1) == ctx.elt(-1)
    assert s.tprec() == 19  # cap and e both dropped by the strip
    assert s.is_integral()
    # a genuine denominator survives
    t = TruncatedSeries.from_pairs(ctx, [0, 1], 3, e=1)
    assert t.e == 1 and not t.is_integral()
    with pytest.raises(ValueError):
        t.coeff_element(1)


def test_denominator_arithmetic(ctx):
    t = TruncatedSeries.from_pairs(ctx, [0, 1], 6, e=1)  # X/pi
    three_t = t.scale(3)
    assert three_t.e == 0  # 3/pi = -1
    assert three_t.coeff_element(1) == ctx.elt(-1)
    tt = t * t  # X^2/pi^2
    assert tt.e == 2 and tt.coeff(2)[0] == 1
    s = tt + t
    assert s.e == 2
    # stored: X^2 + pi*X; tprec dropped by the alignment
    assert s.coeff(1)[0] == (-3) % 3**s.cap
    back = s.pi_shift(2)
    assert back.e == 0 and back.is_integral()
    down = back.pi_shift(-2)
    assert down.agrees_with(s, min(down.tprec(), s.tprec()))


def test_tprec_accounting(ctx):
    t = TruncatedSeries.from_pairs(ctx, [0, 1], 4, e=0)
    assert t.tprec() == 20
    u = t.pi_shift(-3)
    assert u.e == 3 and u.tprec() == 17


def test_evaluate(ctx):
    s = parse_series(ctx, "2 + X + 5*X^3", D=3)
    x = ctx.elt(3, 6)
    v = s.evaluate(x)
    want = ctx.elt(2) + x + 5 * x**3
    assert v == want
    # with a denominator: pi^{-1} * (3 + 3*X) evaluates to -1 - x
    t = TruncatedSeries.from_pairs(ctx, [3, 3], 2, e=1)
    assert t.evaluate(x) == ctx.elt(-1) - x


def test_evaluate_rejects_units(ctx):
    s = parse_series(ctx, "1 + X", D=2)
    with pytest.raises(ValueError):
        s.evaluate(ctx.elt(1))


def test_derivative(ctx):
    s = parse_series(ctx, "1 + 2*X + 7*X^4", D=4)
    assert s.derivative() == parse_series(ctx, "2 + 28*X^3", D=4)


def test_from_polynomial_exact_tail(ctx):
    f = ExactPolynomial({1: -3, 9: 1})
    s = TruncatedSeries.from_polynomial(f, ctx, 12)
    assert s.exact_tail
    assert s.coeff(9)[0] == 1 and s.coeff(1)[0] == (-3) % 3**s.cap
    t = TruncatedSeries.from_polynomial(f, ctx, 5)
    assert not t.exact_tail
