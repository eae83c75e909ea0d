"""The height-two formal group of f(X) = pi*X + X^q and its calculus.

Everything is driven by the distinguished endomorphism polynomial
f = pi*X + X^q with pi = -p and q = p^2.  The module provides:

  * the logarithm lambda, pinned by lambda(f) = pi * lambda and
    lambda'(0) = 1 and solved degree by degree; its support is the
    degrees 1 mod (q-1), with the sum of X^{q^i}/pi^i as leading
    skeleton and unit-size corrections in between; its compositional
    inverse, computed exactly over the rationals; and proven tail
    bounds for evaluating either at points;
  * the group law F(X, Y), solved from lambda(F) = lambda(X) + lambda(Y)
    by Newton iteration in a weighted-truncated bivariate ring (the weight
    of Y can be set to q^n so that torsion-point substitutions keep the
    truncation honest);
  * scalar endomorphism series [a](X) = lambda^{-1}(a * lambda(X));
  * the torsion polynomials E_n = pi + (f o ... o f)^{q-1}, exact;
  * the identity checks used by the verification suite (commutativity,
    associativity, logarithm additivity, scalar composition).

Associativity is certified by computing T = F(F(X, Y), Z) once and testing
its invariance under the cyclic rotation of the three variables; given
commutativity (checked separately) this is equivalent to associativity and
halves the trivariate work.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

import numpy as np

from .padic import PrimeContext, UnramifiedElement
from .polypack import poly_mul_mod_2d, poly_mul_mod_3d
from .series import ExactPolynomial, TruncatedSeries, capmax, work_prec

__all__ = [
    "lubin_tate_poly",
    "f_iterate",
    "torsion_polynomial",
    "log_coefficients_exact",
    "log_series",
    "exp_coefficients_exact",
    "exp_series",
    "log_tail_valuation",
    "exp_tail_valuation",
    "log_eval",
    "formal_sum_base",
    "WeightedBivariate",
    "group_law",
    "mult_by_series",
    "check_commutative",
    "check_identity_section",
    "check_log_additivity",
    "check_associativity",
    "check_scalar_composition",
]


# ---------------------------------------------------------------------------
# exact polynomials
# ---------------------------------------------------------------------------


def lubin_tate_poly(ctx: PrimeContext) -> ExactPolynomial:
    """f(Y) = pi*Y + Y^q as an exact polynomial."""
    return ExactPolynomial({1: ctx.pi, ctx.q: 1})


def f_iterate(ctx: PrimeContext, n: int) -> ExactPolynomial:
    """n-fold composite of f; n = 0 gives Y."""
    result = ExactPolynomial.x()
    f = lubin_tate_poly(ctx)
    for _ in range(n):
        # f(g) = pi*g + g^q
        result = ctx.pi * result + result**ctx.q
    return result


def torsion_polynomial(ctx: PrimeContext, n: int) -> ExactPolynomial:
    """E_n(Y), the level-n annihilator factor: pi + (f o .. o f)^{q-1}.

    E_0 = Y^{q-1} + pi, and Y * E_0 * ... * E_n equals the (n+1)-fold
    composite of f, which is the identity the tests pin down.
    """
    return f_iterate(ctx, n) ** (ctx.q - 1) + ctx.pi


# ---------------------------------------------------------------------------
# logarithm and exponential
# ---------------------------------------------------------------------------


def _ilog_q(q: int, m: int) -> int:
    """floor(log_q m) for m >= 1."""
    i, k = 0, 1
    while k * q <= m:
        k *= q
        i += 1
    return i


def _int_vp(p: int, n: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@lru_cache(maxsize=None)
def _log_unit_coeffs(p: int, D: int) -> tuple[tuple[int, int, int, int], ...]:
    """Logarithm coefficients of f = pi*X + X^q as unit-times-power data.

    lambda is pinned by lambda(f) = pi * lambda with lambda'(0) = 1.
    Expanding f^k = sum_a C(k, a) pi^{k-a} X^{k + a(q-1)} and matching
    degree m isolates the triangular recurrence

        lambda_m * (pi - pi^m) = sum_{k < m} lambda_k C(k, a) pi^{k-a},
        a = (m - k) / (q - 1) <= k,

    so the support is m = 1 mod (q - 1) (the Teichmueller scalars stay
    linear) and every division is by pi * (1 - pi^{m-1}), a unit times p.
    The valuations obey v(lambda_m) >= -floor(log_q m), with equality at
    the q-powers; both facts are asserted as the table is built.

    Entries are (m, u, v, g): lambda_m = u * p^v with the unit residue u
    certified mod p^g, computed in fixed-modulus integer arithmetic with
    exact valuation tracking.  Coefficients whose valuation reaches the
    clip ceiling are stored as u = 0 with v their certified lower bound;
    they sit far above every modulus the callers reduce to, and the
    working headroom keeps certified digits comfortably past the caps
    (anything less raises rather than degrading silently).
    """
    q = p * p
    step = q - 1
    ceil_v = capmax(p) + 10
    CB = 6 * ceil_v
    mod = p ** CB
    out: list[tuple[int, int, int, int]] = [(1, 1, 0, CB)]
    table: dict[int, tuple[int, int, int]] = {1: (1, 0, CB)}
    for m in range(1 + step, D + 1, step):
        # terms (t, v_t, g_t): value t * p^{v_t} with t certified mod p^{g_t},
        # aligned at the term's actual valuation (the exact p-power of the
        # binomial scalar is split off first, so no digits of range are
        # wasted and chains of support degrees keep their certification)
        nz: list[tuple[int, int, int]] = []
        zero_floor: int | None = None
        for k in range(1, m, step):
            a = (m - k) // step
            if a > k:
                continue
            u_k, v_k, g_k = table[k]
            cb = comb(k, a)
            vp_cb = _int_vp(p, cb)
            vt = v_k + vp_cb + (k - a)
            if u_k == 0:
                zero_floor = vt if zero_floor is None else min(zero_floor, vt)
                continue
            cunit = (cb // p**vp_cb) * (-1) ** ((k - a) % 2)
            nz.append(((u_k * cunit) % mod, vt, g_k))
        if not nz:
            bound = (zero_floor if zero_floor is not None else ceil_v + CB) - 1
            if bound < ceil_v:
                raise ArithmeticError("logarithm recurrence lost certification")
            table[m] = (0, bound, CB)
            out.append((m, 0, bound, CB))
            continue
        A = min(v for _, v, _ in nz)
        gN = min(g + (v - A) for _, v, g in nz)
        if zero_floor is not None:
            gN = min(gN, zero_floor - A)
        gN = min(gN, CB)
        if gN <= 0:
            raise ArithmeticError("logarithm recurrence lost certification")
        N = sum(t * p ** (v - A) for t, v, _ in nz if v - A < CB) % mod
        if N % (p ** min(gN, CB)) == 0:
            bound = A + gN - 1
            if bound < ceil_v:
                raise ArithmeticError("logarithm recurrence lost certification")
            table[m] = (0, bound, CB)
            out.append((m, 0, bound, CB))
            continue
        vN = _int_vp(p, N)
        w = (1 - pow(-p, m - 1, mod)) % mod
        u = (-(N // p**vN) * pow(w, -1, mod)) % mod
        v = A + vN - 1
        g = gN - vN
        i = _ilog_q(q, m)
        if v < -i:
            raise ArithmeticError("logarithm coefficient below its slope bound")
        if m == q**i and v != -i:
            raise ArithmeticError("logarithm q-power coefficient off its slope")
        if v >= ceil_v:
            table[m] = (0, v, CB)
            out.append((m, 0, v, CB))
            continue
        if g < capmax(p) + 8:
            raise ArithmeticError("logarithm recurrence lost certification")
        table[m] = (u, v, g)
        out.append((m, u, v, g))
    return tuple(out)


@lru_cache(maxsize=None)
def log_coefficients_exact(p: int, D: int) -> tuple[tuple[int, Fraction], ...]:
    """Exact rational logarithm coefficients, support degrees only.

    The same recurrence as the fixed-modulus engine, run over Q for the
    small truncations the exponential reversion needs (and for cross
    checks).  Rational sizes grow quickly with the degree, so this path
    is guarded to D <= 200.
    """
    if D > 200:
        raise ValueError("exact rational logarithm restricted to D <= 200")
    q = p * p
    step = q - 1
    pi = -p
    out: list[tuple[int, Fraction]] = [(1, Fraction(1))]
    table: dict[int, Fraction] = {1: Fraction(1)}
    for m in range(1 + step, D + 1, step):
        s = Fraction(0)
        for k in range(1, m, step):
            a = (m - k) // step
            if a > k:
                continue
            s += table[k] * comb(k, a) * pi ** (k - a)
        lam = s / (pi - pi**m)
        table[m] = lam
        out.append((m, lam))
    return tuple(out)


def _log_scaled_coeffs(ctx: PrimeContext, D: int,
                       cap: int) -> list[tuple[int, int, int]]:
    """Logarithm support as (m, stored, e): lambda_m = pi^{-e} * stored.

    Coefficients that vanish mod p^cap are dropped, so what remains is
    the handful of degrees near the q-power spine that matter at the
    working modulus, and evaluation costs scale with that count.
    """
    out: list[tuple[int, int, int]] = []
    for m, u, v, _g in _log_unit_coeffs(ctx.p, D):
        if u == 0 or v >= cap:
            continue
        e = -v if v < 0 else 0
        sign = -1 if e % 2 else 1
        stored = (sign * u * ctx.p ** (v + e)) % ctx.p ** (cap + e)
        out.append((m, stored, e))
    return out


def log_series(ctx: PrimeContext, D: int, cap: int | None = None) -> TruncatedSeries:
    """The logarithm, truncated at degree D, in denominator-exponent form.

    Support in degrees 1 mod (q-1); the denominator exponent is the depth
    of the q-power spine, e = floor(log_q D).
    """
    capv = min(cap if cap is not None else work_prec(ctx.p, ctx.N), capmax(ctx.p))
    e = _ilog_q(ctx.q, max(D, 1))
    sign = -1 if e % 2 else 1
    m_ = ctx.p ** capv
    a = np.zeros(D + 1, dtype=np.int64)
    b = np.zeros(D + 1, dtype=np.int64)
    for m, u, v, _g in _log_unit_coeffs(ctx.p, D):
        if u == 0 or v >= capv:
            continue
        a[m] = (sign * u * ctx.p ** (v + e)) % m_
    return TruncatedSeries(ctx, D, a, b, e=e, cap=capv)


def _frac_mul(u: list[Fraction], v: list[Fraction], D: int) -> list[Fraction]:
    out = [Fraction(0)] * (D + 1)
    for i, ui in enumerate(u):
        if ui:
            top = D - i
            for j, vj in enumerate(v[: top + 1]):
                if vj:
                    out[i + j] += ui * vj
    return out


def _frac_pow(u: list[Fraction], n: int, D: int) -> list[Fraction]:
    result = None
    base = u
    while n:
        if n & 1:
            result = base if result is None else _frac_mul(result, base, D)
        n >>= 1
        if n:
            base = _frac_mul(base, base, D)
    return result if result is not None else [Fraction(1)] + [Fraction(0)] * D


def _frac_inverse(u: list[Fraction], D: int) -> list[Fraction]:
    if u[0] == 0:
        raise ValueError("inverse needs a nonzero constant term")
    y = [Fraction(0)] * (D + 1)
    y[0] = 1 / u[0]
    for _ in range(max(1, D.bit_length() + 1)):
        uy = _frac_mul(u, y, D)
        two_minus = [-c for c in uy]
        two_minus[0] += 2
        y2 = _frac_mul(y, two_minus, D)
        if y2 == y:
            break
        y = y2
    return y


def exp_coefficients_exact(ctx: PrimeContext, D: int) -> list[Fraction]:
    """Exact rational coefficients of the inverse of the logarithm.

    Newton iteration on lambda(h) = X over the rationals: the coefficients
    of the inverse have denominators whose p-part the modular series
    arithmetic cannot carry through long compositions without shedding
    tracked digits, so this one series is computed exactly and certified by
    the exact identity lambda(h) = X before being reduced.
    """
    lam = dict(log_coefficients_exact(ctx.p, D))

    def lam_of(h: list[Fraction], shift: int) -> list[Fraction]:
        # sum lam[k] * h^{k - shift}; shift = 1 with the cofactor k gives
        # lambda', shift = 0 gives lambda itself; powers of h share a cache
        out = [Fraction(0)] * (D + 1)
        cache: dict[int, list[Fraction]] = {1: h}

        def power(n: int) -> list[Fraction]:
            if n not in cache:
                cache[n] = _frac_mul(power(n // 2), power(n - n // 2), D)
            return cache[n]

        for k, c in lam.items():
            kk = k - shift
            scale = c * k if shift else c
            if kk == 0:
                out[0] += scale
                continue
            if kk > D:
                continue
            hp = power(kk)
            for a in range(D + 1):
                if hp[a]:
                    out[a] += scale * hp[a]
        return out

    h = [Fraction(0)] * (D + 1)
    if D >= 1:
        h[1] = Fraction(1)
    target = [Fraction(0)] * (D + 1)
    if D >= 1:
        target[1] = Fraction(1)
    for _ in range(max(1, D.bit_length() + 2)):
        resid = [a - b for a, b in zip(lam_of(h, 0), target)]
        if not any(resid):
            break
        inv = _frac_inverse(lam_of(h, 1), D)
        upd = _frac_mul(resid, inv, D)
        h = [a - b for a, b in zip(h, upd)]
        h[0] = Fraction(0)
    if any(a - b for a, b in zip(lam_of(h, 0), target)):
        raise ArithmeticError("exponential reversion failed its exact certificate")
    return h


def _den_p_exponent(p: int, c: Fraction) -> int:
    d = c.denominator
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    return v


def exp_series(ctx: PrimeContext, D: int, cap: int | None = None) -> TruncatedSeries:
    """Compositional inverse of the logarithm, truncated at degree D.

    Not integral: the coefficient of X^q has valuation -1, and in general
    the coefficient of X^k has valuation >= -(k-1)/(q-1), a bound checked
    during the reduction.  Computed exactly over the rationals (with the
    exact identity lambda(exp) = X as the certificate); the prime-to-p
    part of each denominator is folded in by modular inversion.
    """
    h = exp_coefficients_exact(ctx, D)
    qm1 = ctx.q - 1
    e = 0
    for k, c in enumerate(h):
        ek = _den_p_exponent(ctx.p, c)
        if ek * qm1 > max(k - 1, 0):
            raise ArithmeticError("denominator bound violated in reversion")
        e = max(e, ek)
    capv = min(cap if cap is not None else work_prec(ctx.p, ctx.N), capmax(ctx.p))
    m = ctx.p ** capv
    pie = (-ctx.p) ** e
    a = np.zeros(D + 1, dtype=np.int64)
    for k, c in enumerate(h):
        scaled = c * pie
        den = scaled.denominator
        if den % ctx.p == 0:
            raise ArithmeticError("denominator bound violated in reversion")
        a[k] = scaled.numerator * pow(den, -1, m) % m
    b = np.zeros(D + 1, dtype=np.int64)
    return TruncatedSeries(ctx, D, a, b, e=e, cap=capv)


def log_tail_valuation(ctx: PrimeContext, v: Fraction, D: int) -> Fraction:
    """Lower bound on v(tail) for the logarithm past degree D at argument
    valuation v > 0, from v(lambda_m) >= -floor(log_q m) over the support
    m = 1 mod (q - 1)."""
    if v <= 0:
        raise ValueError(f"argument valuation {v} outside convergence domain")
    step = ctx.q - 1
    stop = Fraction(capmax(ctx.p) + 4)
    m = D + 1
    r = (m - 1) % step
    if r:
        m += step - r
    best = None
    while True:
        i = _ilog_q(ctx.q, m)
        t = Fraction(m) * v - i
        if best is None or t < best:
            best = t
        # m*v - log_q(m) is increasing in m on this domain, so once it
        # clears the stop line no later term can undercut the minimum
        if Fraction(m) * v - (i + 1) >= stop or m > 4_000_000:
            break
        m += step
    return best


def exp_tail_valuation(ctx: PrimeContext, v: Fraction, D: int) -> Fraction:
    """Lower bound on v(tail) of the exponential at valuation v > 1/(q-1).

    Uses v(coefficient of X^k) >= -(k-1)/(q-1): the term bound
    k*v - (k-1)/(q-1) is increasing in k exactly when v > 1/(q-1), so the
    first dropped degree D+1 is the minimum.
    """
    qm1 = ctx.q - 1
    if v <= Fraction(1, qm1):
        raise ValueError(f"argument valuation {v} outside convergence domain")
    return Fraction(D + 1) * v - Fraction(D, qm1)


def log_eval(ctx: PrimeContext, x: UnramifiedElement) -> UnramifiedElement:
    """The logarithm at a base element of positive valuation.

    Base elements have integer valuation >= 1, so the degree-m term has
    valuation >= m - floor(log_q m) and a truncation a little past the
    working precision drops only terms below it.
    """
    if x.valuation() < 1:
        raise ValueError("logarithm of a base element needs v(x) >= 1")
    D = ctx.N + 1
    while (D + 1) - _ilog_q(ctx.q, D + 1) < ctx.N:
        D += 1
    return log_series(ctx, D).evaluate(x)


def formal_sum_base(ctx: PrimeContext, x: UnramifiedElement,
                    y: UnramifiedElement, F: "WeightedBivariate") -> UnramifiedElement:
    """x (+) y for base elements of valuation >= 1: evaluate the group law.

    The dropped monomials have weighted degree > G, hence valuation at
    least G + 1 at integral arguments, so G >= N - 1 keeps the truncation
    below working precision.
    """
    if x.valuation() < 1 or y.valuation() < 1:
        raise ValueError("formal sum needs v(x) >= 1 and v(y) >= 1")
    if F.G + 1 < ctx.N:
        raise ValueError(f"group-law truncation {F.G} too short for {ctx.N} digits")
    return F.evaluate(x, y)


# ---------------------------------------------------------------------------
# weighted bivariate ring
# ---------------------------------------------------------------------------


class WeightedBivariate:
    """Bivariate series over Z_p truncated by the weighted degree i + wy*j.

    The weight function w(X^i Y^j) = i + wy*j is additive under products,
    so the truncation {w <= G} is a quotient ring and multiplication can
    drop out-of-range terms freely.  Coefficients are held in an int64
    array arr[j, i], stored mod p^cap with denominator exponent e, exactly
    like the univariate series class.  The coefficients of the objects this
    ring exists for are rational (no w-component), and the class enforces
    that by construction.
    """

    __slots__ = ("ctx", "G", "wy", "cap", "e", "arr")

    def __init__(self, ctx, G, wy, arr, e=0, cap=None, _norm=True):
        self.ctx = ctx
        self.G = G
        self.wy = wy
        self.cap = min(cap if cap is not None else work_prec(ctx.p, ctx.N),
                       capmax(ctx.p))
        if self.cap <= e:
            raise ValueError("no certified digits left in bivariate ring")
        self.e = e
        m = ctx.p ** self.cap
        self.arr = np.asarray(arr, dtype=np.int64) % m
        ny, nx = self.arr.shape
        if nx != G + 1 or ny != G // wy + 1:
            raise ValueError("array shape does not match the weighted bound")
        self._mask()
        if _norm:
            self._normalize()

    @classmethod
    def zeros(cls, ctx, G, wy, cap=None):
        return cls(ctx, G, wy, np.zeros((G // wy + 1, G + 1), dtype=np.int64),
                   cap=cap)

    @classmethod
    def variable_x(cls, ctx, G, wy, cap=None):
        z = np.zeros((G // wy + 1, G + 1), dtype=np.int64)
        z[0, 1] = 1
        return cls(ctx, G, wy, z, cap=cap)

    @classmethod
    def variable_y(cls, ctx, G, wy, cap=None):
        z = np.zeros((G // wy + 1, G + 1), dtype=np.int64)
        z[1, 0] = 1
        return cls(ctx, G, wy, z, cap=cap)

    def _mask(self):
        ny, nx = self.arr.shape
        i = np.arange(nx)[None, :]
        j = np.arange(ny)[:, None]
        self.arr[i + self.wy * j > self.G] = 0

    def _normalize(self):
        p = self.ctx.p
        k = 0
        while k < self.e and not ((self.arr % p) != 0).any():
            self.arr //= p
            k += 1
        if k:
            self.e -= k
            self.cap -= k
            if k % 2:
                self.arr = (-self.arr) % (p ** self.cap)

    def tprec(self) -> int:
        return self.cap - self.e

    def copy_with(self, arr, e=None, cap=None, norm=True):
        return WeightedBivariate(self.ctx, self.G, self.wy, arr,
                                 e=self.e if e is None else e,
                                 cap=self.cap if cap is None else cap,
                                 _norm=norm)

    def _aligned(self, other):
        e = max(self.e, other.e)

        def scaled(s):
            d = e - s.e
            if d == 0:
                return s.arr, s.cap
            cap = min(s.cap + d, capmax(s.ctx.p))
            return (s.arr * (-s.ctx.p) ** d) % (s.ctx.p ** cap), cap

        a1, c1 = scaled(self)
        a2, c2 = scaled(other)
        return e, min(c1, c2), a1, a2

    def __add__(self, other):
        if isinstance(other, int):
            z = np.zeros_like(self.arr)
            z[0, 0] = other % (self.ctx.p ** self.cap)
            other = self.copy_with(z, e=0)
        e, cap, a1, a2 = self._aligned(other)
        m = self.ctx.p ** cap
        return WeightedBivariate(self.ctx, self.G, self.wy, (a1 + a2) % m,
                                 e=e, cap=cap)

    __radd__ = __add__

    def __neg__(self):
        return self.copy_with(-self.arr, norm=False)

    def __sub__(self, other):
        if isinstance(other, int):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            m = self.ctx.p ** self.cap
            mm = np.uint64(m)
            prod = (self.arr.astype(np.uint64) * np.uint64(other % m)) % mm
            return self.copy_with(prod.astype(np.int64))
        if self.G != other.G or self.wy != other.wy:
            raise ValueError("mixing different bivariate rings")
        cap = min(self.cap, other.cap)
        m = self.ctx.p ** cap
        full = poly_mul_mod_2d(self.arr % m, other.arr % m, m)
        ny, nx = self.arr.shape
        return WeightedBivariate(self.ctx, self.G, self.wy,
                                 full[:ny, :nx], e=self.e + other.e, cap=cap)

    __rmul__ = __mul__

    def pow(self, n: int) -> "WeightedBivariate":
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            z = WeightedBivariate.zeros(self.ctx, self.G, self.wy, cap=self.cap)
            return z + 1
        return result

    def pi_shift(self, j: int) -> "WeightedBivariate":
        if j >= 0:
            f = (-self.ctx.p) ** j
            cap = min(self.cap + min(j, self.e), capmax(self.ctx.p))
            return WeightedBivariate(self.ctx, self.G, self.wy,
                                     (self.arr * f) % (self.ctx.p ** cap),
                                     e=self.e, cap=cap)
        return WeightedBivariate(self.ctx, self.G, self.wy, self.arr,
                                 e=self.e - j, cap=self.cap, _norm=False)

    def inverse(self) -> "WeightedBivariate":
        """Newton inverse; the true constant term must be a unit.

        Iterates at a fixed modulus, re-expanding each iterate to the
        starting cap (the iteration damps p-adic perturbation
        quadratically), and certifies the result with one honest final
        residual at the conservatively tracked precision.
        """
        c0 = int(self.arr[0, 0])
        pe = self.ctx.p ** self.e
        if c0 % pe:
            raise ValueError("constant term is not integral")
        cap0 = self.cap
        y = WeightedBivariate.zeros(self.ctx, self.G, self.wy, cap=cap0) + int(
            pow((-1) ** (self.e % 2) * (c0 // pe), -1, self.ctx.p ** self.tprec())
        )
        steps = max(1, (self.G).bit_length() + 6)
        for _ in range(steps):
            y2 = y * (2 - self * y)
            if y2.cap < cap0:
                y2 = WeightedBivariate(self.ctx, self.G, self.wy, y2.arr,
                                       e=y2.e, cap=cap0, _norm=False)
            if y2.e == y.e and y2.cap == y.cap and (y2.arr == y.arr).all():
                break
            y = y2
        resid = self * y - 1
        if not resid.is_zero_to(resid.tprec()):
            raise ArithmeticError("bivariate inverse residual fails to vanish")
        return y

    def lift_to(self, G: int) -> "WeightedBivariate":
        """Re-embed into the larger ring with bound G (same weight)."""
        if G < self.G:
            raise ValueError("use truncation, not lift, to shrink")
        out = np.zeros((G // self.wy + 1, G + 1), dtype=np.int64)
        ny, nx = self.arr.shape
        out[:ny, :nx] = self.arr
        return WeightedBivariate(self.ctx, G, self.wy, out, e=self.e,
                                 cap=self.cap, _norm=False)

    def is_zero_to(self, digits: int) -> bool:
        m = self.ctx.p ** min(digits + self.e, self.cap)
        return bool(((self.arr % m) == 0).all())

    def is_integral(self) -> bool:
        return self.e == 0 or not ((self.arr % (self.ctx.p ** self.e)) != 0).any()

    def coeff_int(self, i: int, j: int) -> int:
        """Integral coefficient of X^i Y^j as a balanced integer."""
        if self.e:
            raise ValueError("series has a denominator")
        m = self.ctx.p ** self.cap
        v = int(self.arr[j, i])
        return v - m if v > m // 2 else v

    def row_arrays(self) -> list[tuple[int, np.ndarray]]:
        """Masked rows (j, x-coefficients of Y^j), for pointwise evaluation."""
        out = []
        ny, _ = self.arr.shape
        for j in range(ny):
            width = self.G - self.wy * j
            if width < 0:
                break
            out.append((j, self.arr[j, : width + 1].copy()))
        return out

    def evaluate(self, x: UnramifiedElement, y: UnramifiedElement) -> UnramifiedElement:
        """Value at base elements of positive valuation (nested Horner)."""
        if x.valuation() < 1 or y.valuation() < 1:
            raise ValueError("bivariate evaluation needs positive valuation")
        ctx = self.ctx
        prec = min(self.cap, ctx.N)
        acc = ctx.zero()
        for j, row in reversed(self.row_arrays()):
            inner = ctx.zero()
            for c in row[::-1]:
                inner = inner * x + UnramifiedElement(ctx, int(c), 0, prec)
            acc = acc * y + inner
        if self.e:
            acc = acc.shift_down(self.e)
            if self.e % 2:
                acc = -acc
        return acc


def _lambda_of(Fv: WeightedBivariate, powers: dict[int, WeightedBivariate],
               coeffs: list[tuple[int, int, int]]) -> WeightedBivariate:
    """lambda(F) from precomputed powers and scaled support coefficients."""
    acc = Fv
    for m, stored, e in coeffs:
        if m == 1:
            continue
        term = powers[m] * stored
        acc = acc + (term.pi_shift(-e) if e else term)
    return acc


def _lambda_prime_of(Fv: WeightedBivariate, powers: dict[int, WeightedBivariate],
                     coeffs: list[tuple[int, int, int]]) -> WeightedBivariate:
    """lambda'(F) = 1 + sum m lambda_m F^{m-1}; integral despite the
    denominators (it is the reciprocal of a partial derivative of F)."""
    ctx = Fv.ctx
    acc = WeightedBivariate.zeros(ctx, Fv.G, Fv.wy, cap=Fv.cap) + 1
    for m, stored, e in coeffs:
        if m == 1:
            continue
        term = powers[m - 1] * (m * stored)
        acc = acc + (term.pi_shift(-e) if e else term)
    return acc


def _f_powers(Fv: WeightedBivariate,
              coeffs: list[tuple[int, int, int]]
              ) -> dict[int, WeightedBivariate]:
    """Powers of F on the logarithm support (m and m - 1), shared cache.

    Square-and-multiply with memoisation; the support degrees step by
    q - 1, so consecutive entries share most of their chains and the
    total cost is a couple of ring products per support degree.
    """
    need = set()
    for m, _, _ in coeffs:
        if m > 1:
            need.add(m)
            need.add(m - 1)
    powers: dict[int, WeightedBivariate] = {1: Fv}

    def get(n: int) -> WeightedBivariate:
        if n not in powers:
            if n % 2 == 0:
                h = get(n // 2)
                powers[n] = h * h
            else:
                powers[n] = get(n - 1) * Fv
        return powers[n]

    for k in sorted(need):
        get(k)
    return powers


def _log_sum_target(ctx: PrimeContext, g: int, wy: int, cap: int,
                    coeffs: list[tuple[int, int, int]]) -> WeightedBivariate:
    """lambda(X) + lambda(Y) in the weighted ring: a sum of monomials."""
    ny, nx = g // wy + 1, g + 1
    S = WeightedBivariate.zeros(ctx, g, wy, cap=cap)
    for m, stored, e in coeffs:
        arr = np.zeros((ny, nx), dtype=np.int64)
        arr[0, m] = stored
        if m * wy <= g:
            arr[m, 0] = stored
        S = S + WeightedBivariate(ctx, g, wy, arr, e=e, cap=cap + e, _norm=False)
    return S


def group_law(ctx: PrimeContext, G: int, wy: int = 1,
              cap: int | None = None, require_digits: int | None = None
              ) -> WeightedBivariate:
    """Solve lambda(F) = lambda(X) + lambda(Y) for the group law F.

    Newton iteration with a doubling degree schedule: starting from
    F = X + Y (correct through weighted degree 2*wy), each step at bound g
    doubles the certified weighted degree, so the total cost is a small
    multiple of the final ring size.  Intermediate iterates are re-expanded
    to the working cap (Newton damps p-adic perturbation quadratically, so
    a fixed-modulus iteration converges); the certificate is the final,
    conservatively tracked residual, which is asserted to vanish, together
    with integrality of the coefficients.
    """
    capv = min(cap if cap is not None else work_prec(ctx.p, ctx.N), capmax(ctx.p))

    def newton_at(g: int, F: WeightedBivariate) -> WeightedBivariate:
        coeffs = _log_scaled_coeffs(ctx, g, capv)
        S = _log_sum_target(ctx, g, wy, capv, coeffs)
        for _ in range(3):
            powers = _f_powers(F, coeffs)
            resid = _lambda_of(F, powers, coeffs) - S
            if resid.is_zero_to(resid.tprec()):
                break
            F = F - resid * _lambda_prime_of(F, powers, coeffs).inverse()
            if F.cap < capv:
                F = WeightedBivariate(ctx, g, wy, F.arr, e=F.e, cap=capv,
                                      _norm=False)
        return F

    g = min(max(2 * wy, 2), G)
    F = WeightedBivariate.variable_x(ctx, g, wy, cap=capv) \
        + WeightedBivariate.variable_y(ctx, g, wy, cap=capv)
    F = newton_at(g, F)
    while g < G:
        g = min(2 * g, G)
        F = newton_at(g, F.lift_to(g))

    coeffs = _log_scaled_coeffs(ctx, G, capv)
    resid = _lambda_of(F, _f_powers(F, coeffs), coeffs) \
        - _log_sum_target(ctx, G, wy, capv, coeffs)
    digits = require_digits if require_digits is not None \
        else min(ctx.N, resid.tprec())
    if not resid.is_zero_to(digits):
        raise ArithmeticError("group law residual fails to vanish")
    if not F.is_integral():
        raise ArithmeticError("group law coefficients are not integral")
    return F


def _lambda_series_of(s: TruncatedSeries, derivative: bool = False
                      ) -> TruncatedSeries:
    """lambda(s) or lambda'(s) for an integral series s with s(0) = 0.

    Powers of s are taken by square and multiply, which stays in the
    integral world; the division by pi^e happens once per support term,
    so only a couple of tracked digits are shed along the way (and
    lambda'(s) is itself integral, so they normalize back).
    """
    ctx = s.ctx
    coeffs = _log_scaled_coeffs(ctx, s.D + (1 if derivative else 0), s.cap)
    cache: dict[int, TruncatedSeries] = {1: s}

    def power(n: int) -> TruncatedSeries:
        if n not in cache:
            if n % 2 == 0:
                h = power(n // 2)
                cache[n] = h * h
            else:
                cache[n] = power(n - 1) * s
        return cache[n]

    if derivative:
        acc = _const_series(ctx, s.D, 1, s.cap)
        for m, stored, e in coeffs:
            if m == 1 or m - 1 > s.D:
                continue
            term = power(m - 1).scale(m * stored)
            acc = acc + (term.pi_shift(-e) if e else term)
        return acc
    acc = s
    for m, stored, e in coeffs:
        if m == 1 or m > s.D:
            continue
        term = power(m).scale(stored)
        acc = acc + (term.pi_shift(-e) if e else term)
    return acc


def _const_series(ctx: PrimeContext, D: int, v: int, cap: int) -> TruncatedSeries:
    a = np.zeros(D + 1, dtype=np.int64)
    a[0] = v % (ctx.p**cap)
    return TruncatedSeries(ctx, D, a, np.zeros(D + 1, dtype=np.int64), cap=cap)


def mult_by_series(ctx: PrimeContext, a: UnramifiedElement | int, D: int,
                   lam: TruncatedSeries | None = None) -> TruncatedSeries:
    """[a](X) = lambda^{-1}(a * lambda(X)) truncated at degree D, integral.

    Solved directly from lambda([a]) = a * lambda(X) by Newton iteration in
    the integral world (same re-expansion discipline as the group law),
    with the conservatively tracked final residual as the certificate.
    """
    lam = log_series(ctx, D) if lam is None else lam.truncate(D)
    if isinstance(a, int):
        a = ctx.elt(a)
    capv = lam.cap
    target = lam.scale(a)
    s = TruncatedSeries.x(ctx, D, cap=capv).scale(a)
    for _ in range(max(1, D.bit_length() + 2)):
        resid = _lambda_series_of(s) - target
        if resid.agrees_with(TruncatedSeries.zero(ctx, D), resid.tprec()):
            break
        s = s - resid * _lambda_series_of(s, derivative=True).inverse()
        if s.cap < capv:
            s = TruncatedSeries(ctx, D, s.a, s.b, e=s.e, cap=capv, _norm=False)
    resid = _lambda_series_of(s) - target
    digits = min(ctx.N, resid.tprec())
    if not resid.agrees_with(TruncatedSeries.zero(ctx, D), digits):
        raise ArithmeticError("[a] series residual fails to vanish")
    if not s.is_integral():
        raise ArithmeticError("[a] series fails integrality")
    return s


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------


def check_commutative(F: WeightedBivariate) -> bool:
    """F(X, Y) = F(Y, X): the coefficient array is symmetric."""
    if F.wy != 1:
        raise ValueError("commutativity check needs equal weights")
    return bool((F.arr == F.arr.T).all())


def check_identity_section(F: WeightedBivariate) -> bool:
    """F(X, 0) = X and F(0, Y) = Y."""
    ny, nx = F.arr.shape
    row0 = np.zeros(nx, dtype=np.int64)
    row0[1] = 1
    col0 = np.zeros(ny, dtype=np.int64)
    col0[1] = 1
    return bool((F.arr[0] == row0).all() and (F.arr[:, 0] == col0).all())


def check_log_additivity(ctx: PrimeContext, F: WeightedBivariate,
                         digits: int) -> bool:
    """lambda(F) - lambda(X) - lambda(Y) vanishes to the given digits."""
    coeffs = _log_scaled_coeffs(ctx, F.G, F.cap)
    S = _log_sum_target(ctx, F.G, F.wy, F.cap, coeffs)
    resid = _lambda_of(F, _f_powers(F, coeffs), coeffs) - S
    return resid.is_zero_to(digits)


def _mask_total(arr: np.ndarray, D: int) -> None:
    nz, ny, nx = arr.shape
    k = np.arange(nz)[:, None, None]
    j = np.arange(ny)[None, :, None]
    i = np.arange(nx)[None, None, :]
    arr[k + j + i > D] = 0


def check_associativity(ctx: PrimeContext, F: WeightedBivariate,
                        digits: int) -> bool:
    """Associativity to total degree G via cyclic invariance.

    Computes T = F(F(X,Y), Z) in the trivariate ring truncated at total
    degree G and checks T(X,Y,Z) = T(Y,Z,X).  Together with commutativity
    this is equivalent to F(F(X,Y),Z) = F(X,F(Y,Z)): cyclic invariance
    rewrites the left side as F(F(Y,Z),X), and the outer commutativity
    swaps that into F(X,F(Y,Z)); the reverse implication is immediate.
    """
    if F.wy != 1:
        raise ValueError("associativity check needs equal weights")
    if not check_commutative(F):
        return False
    D = F.G
    m = ctx.p ** digits
    Fm = (F.arr % m).astype(np.int64)

    W = np.zeros((1, D + 1, D + 1), dtype=np.int64)
    W[0] = Fm
    # Horner over the first argument of the outer F:
    # T = sum_i C_i(Z) * W^i with C_i(Z) = sum_k F[k, i] Z^k.
    T = np.zeros((D + 1, 1, 1), dtype=np.int64)
    T[:, 0, 0] = Fm[:, D]
    for i in range(D - 1, -1, -1):
        T = poly_mul_mod_3d(T, W, m)
        T = T[: D + 1, : D + 1, : D + 1]
        _mask_total(T, D)
        nz = T.shape[0]
        T[:nz, 0, 0] = (T[:nz, 0, 0] + Fm[:nz, i]) % m
    # pad to the full cube so the transpose compare is well-shaped
    full = np.zeros((D + 1, D + 1, D + 1), dtype=np.int64)
    full[: T.shape[0], : T.shape[1], : T.shape[2]] = T
    return bool((full == full.transpose(2, 0, 1)).all())


def check_scalar_composition(ctx: PrimeContext, a, b, D: int,
                             digits: int) -> bool:
    """[a] o [b] = [ab] = [b] o [a] at truncation D."""
    lam = log_series(ctx, D)
    sa = mult_by_series(ctx, a, D, lam)
    sb = mult_by_series(ctx, b, D, lam)
    if isinstance(a, int):
        a = ctx.elt(a)
    if isinstance(b, int):
        b = ctx.elt(b)
    sab = mult_by_series(ctx, a * b, D, lam)
    return (sa.compose(sb).agrees_with(sab, digits)
            and sb.compose(sa).agrees_with(sab, digits))
