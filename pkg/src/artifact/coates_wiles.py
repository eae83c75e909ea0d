"""Logarithmic-derivative functionals on unit series over the torsion tower.

A datum couples a power series f with unit constant term to a twist
coordinate a in the base ring.  Three functionals are computed from it:

* the base value a * f'(0)/f(0);
* the layer-n value (a / lambda'(v)) * f'(v)/f(v) at the layer generator
  v, normalized by the derivative of the group logarithm, which makes a
  relative trace down one layer cost exactly one factor of pi;
* the character-weighted conjugate sum over the layer's automorphisms,
  divided by pi^(n+1) and valued in the formal root-of-unity ring.

The scalar automorphism group acts on data by (f, a) -> (f o [1/u], u*a);
layer values are then conjugated, and the character sums transform by the
inverse character value.

Scalar-action data: for a unit u of the base ring, the series [u](X)/X has
unit constant term and is fixed by the norm operator of the group (the
product of its values over a torsion-translate orbit equals its value at
the image point).  That fixedness makes its character sums independent of
the layer in which they are computed.  Layer values of these data are
evaluated exactly, reading [u](v) off the automorphism table instead of
summing a long truncation that the coefficient modulus cannot afford.
"""

from __future__ import annotations

import numpy as np

from .formal_group import mult_by_series
from .padic import PrimeContext, UnramifiedElement
from .series import ExactPolynomial, TruncatedSeries
from .tower import (AnticyclotomicCharacter, CycloElement, TowerElement,
                    TowerLevel, evaluate_series)

__all__ = [
    "ColemanDatum",
    "coleman_from_unit",
    "delta",
    "delta_chi",
    "delta_chi_of_value",
    "delta_n",
    "delta_n_from_unit",
    "delta_n_of_twist",
    "log_derivative_point",
    "twist_action",
]


def _unit_element(ctx: PrimeContext, u) -> UnramifiedElement:
    if isinstance(u, UnramifiedElement):
        return u
    if isinstance(u, int):
        return ctx.elt(u)
    a, b = u
    return ctx.elt(a, b)


class ColemanDatum:
    """A unit power series together with a twist coordinate.

    f must have integral coefficients and a unit constant term; a is any
    base-ring element.  The datum is immutable.
    """

    __slots__ = ("ctx", "f", "a")

    def __init__(self, f: TruncatedSeries, a):
        self.ctx = f.ctx
        if f.e:
            raise ValueError("the series part must have integral coefficients")
        c0 = f.coeff_element(0)
        if c0.valuation() != 0:
            raise ValueError("the series part needs a unit constant term")
        self.f = f
        self.a = _unit_element(self.ctx, a) if not isinstance(a, UnramifiedElement) else a

    def __repr__(self):  # pragma: no cover
        return f"ColemanDatum(D={self.f.D}, a={self.a})"


# ---------------------------------------------------------------------------
# the logarithm derivative at the layer generator
# ---------------------------------------------------------------------------

_LOG_DERIV_CACHE: dict[tuple[int, int], TowerElement] = {}


def log_derivative_point(level: TowerLevel, digits: int | None = None) -> TowerElement:
    """The derivative of the group logarithm at the layer generator.

    The derivative is the sparse integral series sum_i (q/pi)^i X^(q^i-1),
    so the value at v is a folded exact polynomial plus a tail whose i-th
    term carries at least i + (q^i - 1)/e certified digits.  The returned
    element is a unit (constant term 1) with its claim clamped to the
    first dropped term's bound.
    """
    target = min(level.ctx.N, level.cap) if digits is None else max(1, digits)
    key = (id(level), target)
    cached = _LOG_DERIV_CACHE.get(key)
    if cached is not None:
        return cached
    q, e = level.q, level.e
    ratio = q // (-level.p)  # q/pi, an exact integer
    i = 0
    coeffs: dict[int, int] = {}
    while i + (q**i - 1) / e < target:
        coeffs[q**i - 1] = ratio**i
        i += 1
    bound = i + (q**i - 1) // e  # floor of the first dropped term's digits
    el = level.from_exact_poly(ExactPolynomial(coeffs))
    capv = min(el.cap, bound)
    if el.cap > capv:
        el = TowerElement(level, el.a, el.b, e=0, cap=capv, _norm=False)
    if el.valuation() != 0:
        raise ArithmeticError("logarithm derivative fails to be a unit")
    _LOG_DERIV_CACHE[key] = el
    return el


# ---------------------------------------------------------------------------
# the functionals
# ---------------------------------------------------------------------------


def delta(x: ColemanDatum) -> UnramifiedElement:
    """Base value a * f'(0)/f(0)."""
    c0 = x.f.coeff_element(0)
    c1 = x.f.coeff_element(1) if x.f.D >= 1 else x.ctx.elt(0)
    return x.a * c1 * c0.inverse()


def delta_n(x: ColemanDatum, level: TowerLevel,
            digits: int | None = None) -> TowerElement:
    """Layer value (a / lambda'(v)) * f'(v)/f(v) at the layer generator.

    Exact polynomials evaluate exactly; a genuine truncation must be long
    enough for its integral-coefficient tail bound to reach the digit
    target, otherwise evaluation raises with the required degree.
    """
    v = level.v()
    num = evaluate_series(x.f.derivative(), v, digits=digits)
    den = evaluate_series(x.f, v, digits=digits)
    lam = log_derivative_point(level, digits)
    return (num * level.invert_unit(den * lam)).scale(x.a)


def _extended(f: TruncatedSeries, D: int) -> TruncatedSeries:
    """Pad an exact polynomial to a longer truncation window."""
    if f.D >= D:
        return f
    if not f.exact_tail:
        raise ValueError("cannot extend a series whose tail is unknown")
    a = np.zeros(D + 1, dtype=np.int64)
    b = np.zeros(D + 1, dtype=np.int64)
    a[: f.D + 1] = f.a
    b[: f.D + 1] = f.b
    return TruncatedSeries(f.ctx, D, a, b, e=f.e, cap=f.cap,
                           exact_tail=True, _norm=False)


def twist_action(x: ColemanDatum, u, degree: int | None = None) -> ColemanDatum:
    """The datum (f o [1/u], u*a) for a unit scalar u.

    The composed series is truncated at `degree` (default: the degree of
    f), which also bounds the certified digits of later evaluations: a
    composition never carries an exact tail.
    """
    uel = _unit_element(x.ctx, u)
    if uel.valuation() != 0:
        raise ValueError("twisting wants a unit scalar")
    deg = x.f.D if degree is None else degree
    inner = mult_by_series(x.ctx, uel.inverse(), deg)
    outer = _extended(x.f, deg) if (x.f.exact_tail and x.f.D < deg) else x.f
    return ColemanDatum(outer.compose(inner), uel * x.a)


def delta_n_of_twist(x: ColemanDatum, u, level: TowerLevel,
                     digits: int | None = None) -> TowerElement:
    """Layer value of the twisted datum, without composing series.

    Differentiating lambda([1/u](X)) = (1/u) lambda(X) turns the layer
    value of (f o [1/u], u*a) into (a / lambda'(w)) * f'(w)/f(w) at the
    conjugate point w = [1/u](v), so f is evaluated at w directly and the
    logarithm derivative is conjugated instead of recomputed.
    """
    key = level.unit_key(u)
    w = level.conjugate_point(key)
    num = evaluate_series(x.f.derivative(), w, digits=digits)
    den = evaluate_series(x.f, w, digits=digits)
    lam_w = level.galois_act(key, log_derivative_point(level, digits))
    return (num * level.invert_unit(den * lam_w)).scale(x.a)


# ---------------------------------------------------------------------------
# scalar-action data
# ---------------------------------------------------------------------------


def coleman_from_unit(ctx: PrimeContext, u, a, D: int) -> ColemanDatum:
    """The datum ([u](X)/X, a) as a stored truncation of degree D."""
    uel = _unit_element(ctx, u)
    if uel.valuation() != 0:
        raise ValueError("a scalar-action datum wants a unit scalar")
    ser = mult_by_series(ctx, uel, D + 1)
    f = TruncatedSeries(ctx, D, ser.a[1:], ser.b[1:], e=ser.e, cap=ser.cap)
    return ColemanDatum(f, a)


def delta_n_from_unit(level: TowerLevel, u, a) -> TowerElement:
    """Exact layer value of the datum ([u](X)/X, a).

    With w = [u](v) read off the automorphism table, f(v) = w/v and
    [u]'(v) = u * lambda'(v)/lambda'(w), so the layer value collapses to
    a * ([u]'(v) v - w) / (lambda'(v) v w) with no series truncation
    beyond the logarithm-derivative tail.
    """
    uel = _unit_element(level.ctx, u)
    if uel.valuation() != 0:
        raise ValueError("a scalar-action datum wants a unit scalar")
    kinv = level.uinv(level.unit_key(uel))
    w = level.conjugate_point(kinv)
    v = level.v()
    lam_v = log_derivative_point(level)
    lam_w = level.galois_act(kinv, lam_v)
    du = (lam_v * level.invert_unit(lam_w)).scale(uel)  # [u]'(v)
    num = du * v - w
    den = lam_v * v * w
    aex = _unit_element(level.ctx, a)
    return level.divide(num, den).scale(aex)


# ---------------------------------------------------------------------------
# character sums
# ---------------------------------------------------------------------------


def delta_chi_of_value(d1: TowerElement, chi: AnticyclotomicCharacter,
                       certify: bool = True) -> CycloElement:
    """Character-weighted conjugate sum of an already computed layer value.

    The sum over the whole automorphism group is reorganized through the
    cosets of the norm-kernel subgroup: each coset contributes its
    representative's conjugate of the subgroup trace, weighted by the
    character value of the coset.  With certify=True the plain sum over
    all automorphisms is recomputed and the two are compared slot by
    slot.  The result carries the pi^(n+1) division.
    """
    lvl = chi.level
    pn = lvl.p**lvl.n
    t = lvl.h_trace(d1)
    vec = [lvl.zero(cap=d1.cap) for _ in range(pn)]
    for j, rep in enumerate(lvl.coset_reps):
        slot = chi.exponent(j)
        vec[slot] = vec[slot] + lvl.galois_act(rep, t)
    if certify:
        flat = [lvl.zero(cap=d1.cap) for _ in range(pn)]
        for u in lvl.units:
            slot = chi.exponent_on_unit(u)
            flat[slot] = flat[slot] + lvl.galois_act(u, d1)
        for s, f in zip(vec, flat):
            diff = s - f
            if not diff.is_zero(min(s.tprec(), f.tprec(), diff.tprec())):
                raise ArithmeticError(
                    "coset-organized character sum disagrees with the "
                    "plain conjugate sum"
                )
    return CycloElement(lvl, vec).pi_shift(-(lvl.n + 1))


def delta_chi(x: ColemanDatum, chi: AnticyclotomicCharacter,
              digits: int | None = None, certify: bool = True) -> CycloElement:
    """Character sum of a datum's layer value at the character's layer."""
    return delta_chi_of_value(delta_n(x, chi.level, digits), chi, certify)
