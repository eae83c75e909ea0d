"""Totally ramified torsion layers of the height-two formal module.

Level n is the extension of the quadratic unramified base field generated
by a torsion point v = v_n of exact order pi^{n+1}.  Its minimal
polynomial E_n is Eisenstein of degree d_n = q^n (q - 1), so the layer is
totally ramified, {1, v, ..., v^{d_n - 1}} is a power basis, and v-adic
valuations of distinct basis monomials are pairwise distinct, which makes
the valuation of a coordinate vector exactly the minimum over its terms.

Elements are coordinate vectors over the base ring (two int64 arrays, the
1- and w-parts, modulo p^cap) together with a denominator exponent e: the
true element is pi^{-e} times the stored integral one.  A product is one
packed convolution followed by one matrix fold against the precomputed
reduction matrix of E_n.

The Galois group over the base is canonically the unit group
(O/pi^{n+1})^x, a unit class u acting by v -> [u^{-1}](v).  A Teichmuller
generator acts linearly and costs nothing.  Each remaining generator
costs one short scalar-endomorphism series, truncated just past the
largest gap between conjugate roots, which pins the intended root, plus
one Newton lift inside the tower ring, whose honest digit count is
rederived at the end from the measured residual and derivative
valuations.  The data for every other unit follows by composition, which
stays exact in coordinates.  Traces down to
the base are read off Newton power sums of E_n and therefore never depend
on the conjugate enumeration; the conjugation matrices supply the
independent cross-check (the sum of all of them must be the power-sum
matrix, zero outside the top row).

The anticyclotomic subgroup H_n is generated by the Teichmuller classes
and the rational scalar classes; the quotient is cyclic of order p^n and
indexes the character table.  Character values are powers of a formal
root of unity and live in the group ring Z[Z]/(Z^{p^n} - 1); identity
checks reduce modulo the p^n-th cyclotomic polynomial at the very end, so
no inversion in a possibly non-integral coefficient ring is ever needed.

Levels are immutable after construction; the per-unit matrix cache only
ever appends.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd

import numpy as np

from .formal_group import mult_by_series, torsion_polynomial
from .padic import PrimeContext, UnramifiedElement
from .polypack import qpoly_mul_mod
from .series import ExactPolynomial, parse_series, work_prec

__all__ = [
    "AnticyclotomicCharacter",
    "CycloElement",
    "TowerElement",
    "TowerLevel",
    "build_level",
    "character_conductor",
    "characters",
    "evaluate_series",
    "galois_act",
    "parse_tower_element",
    "trace_to_base",
]

_DEGREE_LIMIT = 1000
_BIG_VAL = 1 << 30


def _int_vp(p: int, x: int) -> int:
    """p-adic valuation of an integer (a large sentinel for 0)."""
    if x == 0:
        return _BIG_VAL
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _cap_guard(p: int, d: int) -> int:
    """Largest storage exponent keeping every int64 path in range.

    Folding and matrix application sum up to d products of residues mod
    p^c, so d * (p^c - 1)^2 must stay below 2^62; the packed convolution
    additionally wants p^c < 2^31.
    """
    c = 1
    while True:
        m = p ** (c + 1)
        if m >= (1 << 31) or d * (m - 1) * (m - 1) >= (1 << 62):
            return c
        c += 1


def _mat_apply(mat, xa, xb, r, m):
    """Apply an O-matrix (pair of int64 arrays) to a coordinate pair."""
    Ma, Mb = mat
    a = (Ma @ xa + r * ((Mb @ xb) % m)) % m
    b = (Ma @ xb + Mb @ xa) % m
    return a, b


def _mat_compose(A, B, r, m):
    """Product A @ B of two O-matrices over w^2 = r, entries mod m."""
    a = (A[0] @ B[0] + r * ((A[1] @ B[1]) % m)) % m
    b = (A[0] @ B[1] + A[1] @ B[0]) % m
    return a, b


# ---------------------------------------------------------------------------
# elements
# ---------------------------------------------------------------------------


class TowerElement:
    """pi^{-e} times an integral coordinate vector in the power basis of v.

    Coordinates are stored modulo p^cap; the true coordinates carry
    cap - e certified digits.  All ring operations track cap and e
    conservatively, and common powers of p are stripped out of storage
    into the denominator on construction, so e never drifts above its
    true value.
    """

    __slots__ = ("level", "a", "b", "e", "cap")

    def __init__(self, level, a, b, e=0, cap=None, _norm=True):
        self.level = level
        self.cap = min(cap if cap is not None else level.cap, level.cap)
        if self.cap <= e:
            raise ValueError(f"no certified digits left (cap={self.cap}, e={e})")
        m = level.p ** self.cap
        self.a = np.asarray(a, dtype=np.int64) % m
        self.b = np.asarray(b, dtype=np.int64) % m
        if len(self.a) != level.d or len(self.b) != level.d:
            raise ValueError("coordinate vectors must have length d")
        self.e = e
        if _norm and e:
            self._normalize()

    def _normalize(self):
        p = self.level.p
        k = 0
        while k < self.e:
            if ((self.a % p) != 0).any() or ((self.b % p) != 0).any():
                break
            self.a //= p
            self.b //= p
            k += 1
        if k:
            # pi^{-e} p^k = (-1)^k pi^{-(e-k)}
            self.e -= k
            self.cap -= k
            m = p ** self.cap
            if k % 2:
                self.a = (-self.a) % m
                self.b = (-self.b) % m
            else:
                self.a %= m
                self.b %= m

    # -- precision bookkeeping -------------------------------------------

    def tprec(self) -> int:
        """Certified absolute digits of the true coordinates."""
        return self.cap - self.e

    def vprec(self) -> int:
        """Absolute precision in v-adic units (v(v) = 1, v(p) = e_n)."""
        return self.tprec() * self.level.e

    # -- inspection -------------------------------------------------------

    def valuation(self):
        """Exact v-adic valuation, or None if indistinguishable from 0.

        Distinct basis monomials have pairwise distinct v-adic valuations
        (degree d equals ramification index e), so the minimum over the
        stored terms is the valuation, with no cancellation possible.
        """
        lvl = self.level
        best = None
        for k in range(lvl.d):
            av, bv = int(self.a[k]), int(self.b[k])
            if av == 0 and bv == 0:
                continue
            val = lvl.e * min(_int_vp(lvl.p, av), _int_vp(lvl.p, bv)) + k
            if best is None or val < best:
                best = val
        if best is None:
            return None
        return best - self.e * lvl.e

    def is_zero(self, digits: int | None = None) -> bool:
        dg = self.tprec() if digits is None else digits
        if dg + self.e > self.cap:
            raise ValueError(
                f"cannot test {dg} digits: only {self.tprec()} are certified"
            )
        m = self.level.p ** (dg + self.e)
        return bool(((self.a % m) == 0).all() and ((self.b % m) == 0).all())

    def coeff(self, k: int) -> UnramifiedElement:
        """Coordinate of v^k as a base element; must be integral."""
        pe = self.level.p ** self.e
        av, bv = int(self.a[k]), int(self.b[k])
        if av % pe or bv % pe:
            raise ValueError(f"coordinate of v^{k} is not integral")
        sign = -1 if self.e % 2 else 1
        prec = min(self.tprec(), self.level.ctx.N)
        return UnramifiedElement(self.level.ctx, sign * (av // pe),
                                 sign * (bv // pe), prec)

    def constant_pair(self) -> tuple[int, int, int, int]:
        """Raw constant coordinate as (a, b, e, cap)."""
        return int(self.a[0]), int(self.b[0]), self.e, self.cap

    def to_base(self) -> UnramifiedElement:
        """The element as a base scalar; the v-coordinates must vanish."""
        m = self.level.p ** self.cap
        if ((self.a[1:] % m) != 0).any() or ((self.b[1:] % m) != 0).any():
            raise ArithmeticError("element does not lie in the base field")
        return self.coeff(0)

    # -- ring operations --------------------------------------------------

    def _align(self, other):
        lvl = self.level
        if lvl is not other.level:
            raise ValueError("mixing elements from different levels")
        e = max(self.e, other.e)

        def scaled(s):
            dd = e - s.e
            if dd == 0:
                return s.a, s.b, s.cap
            f = (-lvl.p) ** dd
            cap = min(s.cap + dd, lvl.cap)
            m = lvl.p ** cap
            return (s.a * f) % m, (s.b * f) % m, cap

        a1, b1, c1 = scaled(self)
        a2, b2, c2 = scaled(other)
        return e, min(c1, c2), (a1, b1), (a2, b2)

    def _coerced(self, other):
        if isinstance(other, (int, UnramifiedElement)):
            return self.level.from_base(other)
        return other

    def __add__(self, other):
        other = self._coerced(other)
        e, cap, (a1, b1), (a2, b2) = self._align(other)
        m = self.level.p ** cap
        return TowerElement(self.level, (a1 + a2) % m, (b1 + b2) % m,
                            e=e, cap=cap)

    __radd__ = __add__

    def __neg__(self):
        return TowerElement(self.level, -self.a, -self.b, e=self.e,
                            cap=self.cap, _norm=False)

    def __sub__(self, other):
        return self + (-self._coerced(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, UnramifiedElement)):
            return self.scale(other)
        lvl = self.level
        if lvl is not other.level:
            raise ValueError("mixing elements from different levels")
        cap = min(self.cap, other.cap)
        m = lvl.p ** cap
        a, b = qpoly_mul_mod(self.a % m, self.b % m, other.a % m,
                             other.b % m, lvl.ctx.r, m)
        a = lvl._fold(a, m)
        b = lvl._fold(b, m)
        return TowerElement(lvl, a, b, e=self.e + other.e, cap=cap)

    __rmul__ = __mul__

    def scale(self, c) -> "TowerElement":
        if isinstance(c, int):
            m = self.level.p ** self.cap
            return TowerElement(self.level, (self.a * (c % m)) % m,
                                (self.b * (c % m)) % m, e=self.e, cap=self.cap)
        cap = min(self.cap, c.prec)
        m = self.level.p ** cap
        return TowerElement(self.level,
                            *self._scale_pair(c.a % m, c.b % m, m),
                            e=self.e, cap=cap)

    def _scale_pair(self, ca: int, cb: int, m: int):
        """Coordinatewise product with the base pair ca + cb*w, mod m."""
        r = self.level.ctx.r
        a = (self.a * ca + r * ((self.b * cb) % m)) % m
        b = (self.a * cb + self.b * ca) % m
        return a, b

    def pow(self, k: int) -> "TowerElement":
        if k < 0:
            raise ValueError("negative powers are not provided")
        result = self.level.one(cap=self.cap)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    __pow__ = pow

    def normalized(self) -> "TowerElement":
        """Copy with common powers of p stripped out of the denominator."""
        return TowerElement(self.level, self.a, self.b, e=self.e, cap=self.cap)

    def pi_shift(self, j: int) -> "TowerElement":
        """Multiply the true element by pi^j (j may be negative)."""
        if j >= 0:
            if j > self.level.cap:
                raise ValueError(f"shift by {j} exceeds storage {self.level.cap}")
            f = (-self.level.p) ** j
            cap = min(self.cap + min(j, self.e), self.level.cap)
            m = self.level.p ** cap
            return TowerElement(self.level, (self.a * f) % m,
                                (self.b * f) % m, e=self.e, cap=cap)
        return TowerElement(self.level, self.a, self.b, e=self.e - j,
                            cap=self.cap, _norm=False)

    def __eq__(self, other):
        other = self._coerced(other)
        diff = self - other
        return diff.is_zero(min(self.tprec(), other.tprec(), diff.tprec()))

    __hash__ = None

    # -- rendering --------------------------------------------------------

    def __str__(self):
        m = self.level.p ** self.cap
        parts = []
        for k in range(self.level.d):
            av, bv = int(self.a[k]), int(self.b[k])
            if av == 0 and bv == 0:
                continue
            av = av - m if av > m // 2 else av
            bv = bv - m if bv > m // 2 else bv
            if bv == 0:
                coef = f"{av}"
                bare = True
            else:
                coef = f"({av}{'+' if bv >= 0 else '-'}{abs(bv)}*w)"
                bare = False
            if k == 0:
                parts.append(coef)
            elif bare and av == 1:
                parts.append("v" if k == 1 else f"v^{k}")
            else:
                parts.append(f"{coef}*v" if k == 1 else f"{coef}*v^{k}")
        body = " + ".join(parts).replace("+ -", "- ") if parts else "0"
        if self.e:
            return f"pi^-{self.e} * ({body})"
        return body

    def __repr__(self):  # pragma: no cover
        return f"TowerElement(n={self.level.n}, {self})"


# ---------------------------------------------------------------------------
# levels
# ---------------------------------------------------------------------------


class TowerLevel:
    """One totally ramified torsion layer with its Galois machinery.

    Construction builds, in order: the exact minimal polynomial E_n and
    its fold-down matrix, the Newton power sums, the enumerated unit
    group with the anticyclotomic subgroup H_n and its cosets, and the
    Galois data (one conjugate point per unit).  Per-unit conjugation
    matrices are materialized on demand and cached.
    """

    def __init__(self, ctx: PrimeContext, n: int, cap: int | None = None,
                 allow_level_two: bool = False):
        if n < 0:
            raise ValueError("level must be non-negative")
        p, q = ctx.p, ctx.q
        d = q ** n * (q - 1)
        if n >= 2 and not allow_level_two:
            raise ValueError(
                f"level {n} (degree {d}) is an explicit opt-in: pass "
                "allow_level_two=True and expect a costly build"
            )
        if d > _DEGREE_LIMIT:
            raise ValueError(f"degree {d} exceeds the resource limit {_DEGREE_LIMIT}")
        self.ctx = ctx
        self.n = n
        self.p = p
        self.q = q
        self.d = d
        self.e = d  # totally ramified: ramification index equals degree
        self.pn1 = p ** (n + 1)

        guard = _cap_guard(p, d)
        capv = min(cap if cap is not None else work_prec(p, ctx.N), guard)
        if capv < ctx.N:
            raise ValueError(
                f"int64 storage caps digits at {guard} for degree {d}; "
                f"context asks for {ctx.N}"
            )
        self.cap = capv
        m = p ** capv

        # minimal polynomial and reduction data
        self.E = torsion_polynomial(ctx, n)
        if self.E.degree() != d or not self.E.is_eisenstein(p):
            raise ArithmeticError("torsion polynomial fails the Eisenstein shape")
        self.E_lower = sorted((k, c) for k, c in self.E.c.items() if k < d)
        self._rmat = self._build_fold_matrix(m)
        self._psums = self._build_power_sums(m)

        # unit group enumeration (lexicographic, hence deterministic)
        self.units = [(a, b) for a in range(self.pn1) for b in range(self.pn1)
                      if a % p or b % p]
        if len(self.units) != d:
            raise ArithmeticError("unit count does not match the degree")
        self.one_key = (1 % self.pn1, 0)

        # anticyclotomic subgroup, cosets, quotient generator
        self.zeta = self._teichmuller_generator()
        self.zeta_key = (self.zeta.a % self.pn1, self.zeta.b % self.pn1)
        self._build_h_and_cosets()

        # Galois data: one conjugate point per unit
        self._build_galois()

        # tower compatibility point [pi](v): the image of v one level down
        fpoly = ExactPolynomial({1: ctx.pi, q: 1})
        self.compat = self.from_exact_poly(fpoly)

    # -- basic constructors ----------------------------------------------

    def zero(self, cap: int | None = None) -> TowerElement:
        z = np.zeros(self.d, dtype=np.int64)
        return TowerElement(self, z, z.copy(), cap=cap)

    def one(self, cap: int | None = None) -> TowerElement:
        a = np.zeros(self.d, dtype=np.int64)
        a[0] = 1
        return TowerElement(self, a, np.zeros(self.d, dtype=np.int64), cap=cap)

    def v(self, cap: int | None = None) -> TowerElement:
        a = np.zeros(self.d, dtype=np.int64)
        a[1] = 1
        return TowerElement(self, a, np.zeros(self.d, dtype=np.int64), cap=cap)

    def from_base(self, c) -> TowerElement:
        a = np.zeros(self.d, dtype=np.int64)
        b = np.zeros(self.d, dtype=np.int64)
        if isinstance(c, UnramifiedElement):
            a[0], b[0] = c.a, c.b
            return TowerElement(self, a, b, cap=min(self.cap, c.prec))
        a[0] = c % (self.p ** self.cap)
        return TowerElement(self, a, b)

    def from_coeffs(self, pairs, e: int = 0, cap: int | None = None) -> TowerElement:
        """Build from a list of ints, (a, b) pairs, or base elements."""
        a = np.zeros(self.d, dtype=np.int64)
        b = np.zeros(self.d, dtype=np.int64)
        capv = self.cap if cap is None else cap
        for k, cv in enumerate(pairs):
            if k >= self.d:
                raise ValueError("coefficient list longer than the degree")
            if isinstance(cv, UnramifiedElement):
                a[k], b[k] = cv.a, cv.b
                capv = min(capv, cv.prec)
            elif isinstance(cv, tuple):
                a[k], b[k] = cv
            else:
                a[k] = cv % (self.p ** self.cap)
        return TowerElement(self, a, b, e=e, cap=capv)

    def from_exact_poly(self, poly: ExactPolynomial) -> TowerElement:
        """Reduce an exact integer polynomial in v modulo E_n."""
        m = self.p ** self.cap
        arr = [0] * max(poly.degree() + 1, self.d)
        for k, c in poly.c.items():
            arr[k] = c
        a = self._fold_long(arr, m)
        return TowerElement(self, a, np.zeros(self.d, dtype=np.int64))

    def coerce(self, c) -> TowerElement:
        if isinstance(c, TowerElement):
            if c.level is not self:
                raise ValueError("element belongs to a different level")
            return c
        return self.from_base(c)

    def random_element(self, rng, e: int = 0) -> TowerElement:
        m = self.p ** self.cap
        a = np.array([rng.randrange(m) for _ in range(self.d)], dtype=np.int64)
        b = np.array([rng.randrange(m) for _ in range(self.d)], dtype=np.int64)
        return TowerElement(self, a, b, e=e)

    def lift(self, x: TowerElement) -> TowerElement:
        """Embed an element of the previous layer into this one.

        The previous generator goes to the compatible point pi*v + v^q,
        whose minimal polynomial is exactly the lower layer's, so the map
        is the canonical ring embedding.
        """
        if self.n == 0:
            raise ValueError("the base layer has no previous layer")
        low = x.level
        if low.ctx is not self.ctx or low.n != self.n - 1:
            raise ValueError("lift wants an element of the previous layer")
        cap = min(self.cap, x.cap)
        m = self.p ** cap
        acc = self.zero(cap=cap)
        powk = self.one(cap=cap)
        for k in range(low.d):
            ak, bk = int(x.a[k]) % m, int(x.b[k]) % m
            if ak or bk:
                acc = acc + TowerElement(self, *powk._scale_pair(ak, bk, m),
                                         e=0, cap=cap)
            if k + 1 < low.d:
                powk = powk * self.compat
        return acc.pi_shift(-x.e) if x.e else acc

    # -- reduction machinery ---------------------------------------------

    def _build_fold_matrix(self, m: int) -> np.ndarray:
        """Rows j = coordinates of v^{d+j}, for j = 0 .. d-2.

        Row 0 is read off E_n; each next row is the shift of the previous
        one with its overflow coefficient folded through row 0 again.
        """
        d = self.d
        r0 = np.zeros(d, dtype=np.int64)
        for k, c in self.E_lower:
            r0[k] = (-c) % m
        rows = [r0]
        row = r0
        for _ in range(1, d - 1):
            shifted = np.zeros(d, dtype=np.int64)
            shifted[1:] = row[:-1]
            row = (shifted + int(row[d - 1]) * r0) % m
            rows.append(row)
        return np.array(rows, dtype=np.int64)

    def _fold(self, arr: np.ndarray, m: int) -> np.ndarray:
        """Reduce a convolution output (length <= 2d-1) modulo E_n."""
        d = self.d
        if len(arr) <= d:
            out = np.zeros(d, dtype=np.int64)
            out[: len(arr)] = arr
            return out
        high = arr[d:]
        return (arr[:d] + high @ self._rmat[: len(high)]) % m

    def _fold_long(self, arr: list, m: int) -> np.ndarray:
        """Reduce a coefficient list of any length (exact relation walk)."""
        arr = [x % m for x in arr]
        d = self.d
        for t in range(len(arr) - 1, d - 1, -1):
            c = arr[t]
            if c:
                for k, ck in self.E_lower:
                    arr[t - d + k] = (arr[t - d + k] - c * ck) % m
                arr[t] = 0
        out = np.zeros(d, dtype=np.int64)
        head = arr[:d]
        out[: len(head)] = head
        return out

    def _build_power_sums(self, m: int) -> np.ndarray:
        """Newton power sums s_k of the roots of E_n, k < d, mod p^cap.

        These determine every trace to the base without enumerating a
        single conjugate, which is what makes them an oracle for the
        matrix route rather than a restatement of it.
        """
        d = self.d
        a = [0] * (d + 1)  # a[i] = coefficient of Y^{d-i}
        for k, c in self.E.c.items():
            a[d - k] = c % m
        s = [0] * d
        s[0] = d % m
        for k in range(1, d):
            acc = k * a[k]
            for i in range(1, k):
                acc += a[i] * s[k - i]
            s[k] = (-acc) % m
        return np.array(s, dtype=np.int64)

    # -- unit group -------------------------------------------------------

    def unit_key(self, u) -> tuple[int, int]:
        if isinstance(u, TowerElement):
            raise ValueError("a unit class is a base-ring datum, not a tower element")
        if isinstance(u, UnramifiedElement):
            if u.prec < self.n + 1:
                raise ValueError(f"unit class needs {self.n + 1} digits, has {u.prec}")
            key = (u.a % self.pn1, u.b % self.pn1)
        elif isinstance(u, int):
            key = (u % self.pn1, 0)
        else:
            a, b = u
            key = (a % self.pn1, b % self.pn1)
        if key[0] % self.p == 0 and key[1] % self.p == 0:
            raise ValueError(f"{key} is not a unit class modulo pi^{self.n + 1}")
        return key

    def umul(self, u1, u2) -> tuple[int, int]:
        a1, b1 = u1
        a2, b2 = u2
        r = self.ctx.r
        return ((a1 * a2 + r * b1 * b2) % self.pn1, (a1 * b2 + b1 * a2) % self.pn1)

    def upow(self, u, k: int) -> tuple[int, int]:
        result = self.one_key
        base = u
        k %= self.d  # group order annihilates
        while k:
            if k & 1:
                result = self.umul(result, base)
            base = self.umul(base, base)
            k >>= 1
        return result

    def uinv(self, u) -> tuple[int, int]:
        return self.upow(u, self.d - 1)

    def unit_order(self, u) -> int:
        u = self.unit_key(u)
        x, k = u, 1
        while x != self.one_key:
            x = self.umul(x, u)
            k += 1
        return k

    def _teichmuller_generator(self) -> UnramifiedElement:
        """Teichmuller lift of the first residue generator of F_q^x."""
        p, q, r = self.p, self.q, self.ctx.r

        def order_mod_p(a, b):
            x, k = (a % p, b % p), 1
            while x != (1, 0):
                x = ((x[0] * a + r * x[1] * b) % p, (x[0] * b + x[1] * a) % p)
                k += 1
                if k > q:
                    raise ArithmeticError("order computation ran away")
            return k

        for a0 in range(p):
            for b0 in range(p):
                if (a0 % p, b0 % p) == (0, 0):
                    continue
                if order_mod_p(a0, b0) == q - 1:
                    tw = self.ctx.teichmuller(self.ctx.elt(a0, b0))
                    if not (tw ** (q - 1) - self.ctx.one()).is_zero():
                        raise ArithmeticError("Teichmuller lift fails its defining power")
                    return tw
        raise ArithmeticError("residue field has no multiplicative generator")

    def _build_h_and_cosets(self):
        p, q, n = self.p, self.q, self.n
        hgens = [self.zeta_key] + [(c, 0) for c in range(1, self.pn1) if c % p]
        H = {self.one_key}
        frontier = [self.one_key]
        while frontier:
            u = frontier.pop()
            for g in hgens:
                ug = self.umul(u, g)
                if ug not in H:
                    H.add(ug)
                    frontier.append(ug)
        if len(H) != (q - 1) * p ** n:
            raise ArithmeticError(
                f"anticyclotomic subgroup has order {len(H)}, "
                f"expected {(q - 1) * p ** n}"
            )
        self.h_subgroup = frozenset(H)

        seen: dict[tuple[int, int], int] = {}
        cosets = []
        for u in self.units:
            if u in seen:
                continue
            members = frozenset(self.umul(u, h) for h in H)
            cid = len(cosets)
            for x in members:
                seen[x] = cid
            cosets.append(members)
        pn = p ** n
        if len(cosets) != pn:
            raise ArithmeticError(f"{len(cosets)} cosets, expected {pn}")

        # first unit whose coset class has full order: certifies the
        # quotient cyclic and fixes the labeling convention
        gen = self.one_key
        if pn > 1:
            gen = None
            for u in self.units:
                x, ids = self.one_key, set()
                for _ in range(pn):
                    ids.add(seen[x])
                    x = self.umul(x, u)
                if len(ids) == pn:
                    gen = u
                    break
            if gen is None:
                raise ArithmeticError("quotient by H is not cyclic")
        relabel = {}
        x = self.one_key
        reps = []
        for j in range(pn):
            relabel[seen[x]] = j
            reps.append(x)
            x = self.umul(x, gen)
        self.quotient_generator = gen
        self.coset_reps = reps
        self.coset_index = {u: relabel[seen[u]] for u in self.units}
        self.cosets = [frozenset(u for u in self.units
                                 if self.coset_index[u] == j)
                       for j in range(pn)]

    # -- Galois data ------------------------------------------------------

    def _build_galois(self):
        ctx, p, n = self.ctx, self.p, self.n
        # conjugate roots of E_n sit at pairwise gaps of v-valuation at
        # most q^n, so agreement beyond that valuation pins a root
        self.root_gap = self.q ** n

        # Teichmuller classes act linearly: [z](X) = z*X commutes with the
        # distinguished endomorphism and has the right derivative
        zinv = self.zeta.inverse()
        wz = self.v().scale(zinv)

        gal_gens = {self.zeta_key: wz}
        if n >= 1:
            for key in [((1 + p) % self.pn1, 0), (1 % self.pn1, p % self.pn1)]:
                glift = ctx.elt(key[0], key[1])
                ser = mult_by_series(ctx, glift.inverse(), self.root_gap)
                x0 = self._series_value_raw(ser, self.v())
                gal_gens[key] = self._hensel_conjugate(x0)

        self._mats: dict[tuple[int, int], tuple] = {}
        eye = np.eye(self.d, dtype=np.int64)
        zmat = np.zeros((self.d, self.d), dtype=np.int64)
        self._mats[self.one_key] = (eye, zmat, self.cap)
        for key, w in gal_gens.items():
            if key == self.one_key:
                continue
            check = self._eval_exact_poly_at(self.E, w)
            if not check.is_zero(min(ctx.N, check.tprec())):
                raise ArithmeticError(
                    f"conjugate point for generator {key} fails E_n"
                )
            self._mats[key] = self._matrix_from_point(w)
        self._gal_gens = [k for k in gal_gens if k != self.one_key]

        # conjugate points for every unit, by composition along a breadth
        # first walk; coverage re-proves that the generators generate
        self._w = {self.one_key: self.v()}
        self._parent: dict[tuple[int, int], tuple] = {}
        frontier = [self.one_key]
        while frontier:
            nxt = []
            for u in frontier:
                wu = self._w[u]
                for g in self._gal_gens:
                    ug = self.umul(u, g)
                    if ug in self._w:
                        continue
                    Ma, Mb, mcap = self._mats[g]
                    cap = min(wu.cap, mcap)
                    m = p ** cap
                    a, b = _mat_apply((Ma, Mb), wu.a % m, wu.b % m, ctx.r, m)
                    self._w[ug] = TowerElement(self, a, b, cap=cap, _norm=False)
                    self._parent[ug] = (u, g)
                    nxt.append(ug)
            frontier = nxt
        if len(self._w) != self.d:
            raise ArithmeticError(
                f"Galois generators reach {len(self._w)} of {self.d} units"
            )

    def _eval_exact_poly_at(self, poly: ExactPolynomial, x: TowerElement) -> TowerElement:
        acc = self.zero(cap=x.cap)
        prev = None
        for k in sorted(poly.c, reverse=True):
            if prev is None:
                acc = self.from_base(poly.c[k] % (self.p ** x.cap))
            else:
                acc = acc * x.pow(prev - k) + self.from_base(poly.c[k])
            prev = k
        if prev:
            acc = acc * x.pow(prev)
        return acc

    def _series_value_raw(self, s, x: TowerElement) -> TowerElement:
        """Sum of the stored truncation of s at x, with no tail logic.

        Coefficients are applied as raw stored pairs, so nothing clamps
        to the context display precision along the way.
        """
        cap = min(self.cap, x.cap, s.cap)
        m = self.p ** cap
        out_a = np.zeros(self.d, dtype=np.int64)
        out_b = np.zeros(self.d, dtype=np.int64)
        gap_powers: dict[int, TowerElement] = {}
        cur = None
        curk = None
        r = self.ctx.r
        for k in range(s.D + 1):
            ca, cb = int(s.a[k]) % m, int(s.b[k]) % m
            if ca == 0 and cb == 0:
                continue
            if k == 0:
                pa = np.zeros(self.d, dtype=np.int64)
                pa[0] = 1
                pb = np.zeros(self.d, dtype=np.int64)
            else:
                if cur is None:
                    cur = x.pow(k)
                else:
                    gap = k - curk
                    xg = gap_powers.get(gap)
                    if xg is None:
                        xg = x.pow(gap)
                        gap_powers[gap] = xg
                    cur = cur * xg
                curk = k
                pa, pb = cur.a % m, cur.b % m
            out_a = (out_a + pa * ca + r * ((pb * cb) % m)) % m
            out_b = (out_b + pa * cb + pb * ca) % m
        return TowerElement(self, out_a, out_b, e=s.e, cap=cap)

    def invert_unit(self, x: TowerElement) -> TowerElement:
        """Inverse of a valuation-zero element, by reciprocal iteration.

        The seed inverts the constant coordinate in the residue field;
        each pass doubles the correct v-digit count, and the final
        residual certifies full working precision.
        """
        xn = x.normalized() if x.e else x
        if xn.e or xn.valuation() != 0:
            # a valuation-zero element always normalizes to e = 0
            raise ArithmeticError("inverse wants a valuation-zero integral element")
        seed = UnramifiedElement(self.ctx, int(xn.a[0]), int(xn.b[0])).inverse()
        cap = xn.cap
        m = self.p ** cap
        t = np.zeros(self.d, dtype=np.int64)
        tb = np.zeros(self.d, dtype=np.int64)
        t[0], tb[0] = seed.a % m, seed.b % m
        t = TowerElement(self, t, tb, cap=cap, _norm=False)
        two = self.from_base(2)
        ok = False
        for _ in range(2 + (self.e * cap).bit_length()):
            s = xn * t
            if (s - self.one(cap=cap)).is_zero():
                ok = True
                break
            t = t * (two - s)
        if not ok:
            raise ArithmeticError("reciprocal iteration failed to converge")
        return t

    def divide(self, A: TowerElement, B: TowerElement) -> TowerElement:
        """A / B in the fraction field of the layer.

        B factors as v^k pi^g times a unit by valuation bookkeeping; only
        the unit part ever gets inverted, and the v- and pi-parts move to
        the other side exactly.
        """
        m = B.valuation()
        if m is None:
            raise ArithmeticError("division by an element indistinguishable from 0")
        k = (-m) % self.e
        C = (B * self.v(cap=B.cap).pow(k)) if k else B
        g = (m + k) // self.e
        U = C.pi_shift(-g).normalized()
        if U.valuation() != 0 or U.e:
            raise ArithmeticError("valuation split failed to produce a unit")
        res = A * self.invert_unit(U)
        if k:
            res = res * self.v(cap=res.cap).pow(k)
        return res.pi_shift(-g) if g else res

    def _hensel_conjugate(self, x0: TowerElement) -> TowerElement:
        """Lift a pinned approximation to the conjugate root it names.

        x0 agrees with exactly one root of E_n beyond the largest
        root-gap valuation.  The iteration runs on full-width scratch
        vectors; the honest certified digit count is rederived at the
        end from the measured residual and derivative valuations, which
        is exactly what the ultrametric Newton bound licenses.
        """
        Ep = self.E.derivative()
        cap = self.cap
        m = self.p ** cap
        x = TowerElement(self, x0.a % m, x0.b % m, cap=cap, _norm=False)
        prev = -1
        for _ in range(64):
            fx = self._eval_exact_poly_at(self.E, x)
            fv = fx.valuation()
            if fv is None:
                break
            if fv <= prev:
                raise ArithmeticError("conjugate lift stopped making progress")
            prev = fv
            dx = self.divide(fx, self._eval_exact_poly_at(Ep, x)).normalized()
            if dx.e:
                raise ArithmeticError("conjugate correction is not integral")
            if not (dx.a.any() or dx.b.any()):
                break
            x = TowerElement(self, (x.a - dx.a) % m, (x.b - dx.b) % m,
                             cap=cap, _norm=False)
        fx = self._eval_exact_poly_at(self.E, x)
        vr = fx.valuation()
        if vr is None:
            vr = self.e * cap
        dE = self._eval_exact_poly_at(Ep, x)
        vE = dE.valuation()
        if vE is None or vr <= 2 * vE:
            raise ArithmeticError("conjugate lift misses the simple-root bound")
        digits = (vr - vE) // self.e
        if digits < self.ctx.N:
            raise ArithmeticError(
                f"conjugate certified to {digits} digits, context wants {self.ctx.N}"
            )
        gap_diff = (x - x0).valuation()
        if gap_diff is not None and gap_diff <= self.root_gap:
            raise ArithmeticError("lift drifted past the pinning approximation")
        out = TowerElement(self, x.a, x.b, cap=digits, _norm=False)
        if out.valuation() != 1:
            raise ArithmeticError("conjugate point has the wrong valuation")
        return out

    def _matrix_from_point(self, w: TowerElement) -> tuple:
        """Matrix of the automorphism v -> w on the power basis."""
        d = self.d
        mcap = w.cap
        m = self.p ** mcap
        Ma = np.zeros((d, d), dtype=np.int64)
        Mb = np.zeros((d, d), dtype=np.int64)
        cur = self.one(cap=mcap)
        for k in range(d):
            Ma[:, k] = cur.a % m
            Mb[:, k] = cur.b % m
            if k < d - 1:
                cur = cur * w
        return Ma, Mb, mcap

    def conj_matrix(self, u) -> tuple:
        """Cached conjugation matrix of the unit class u."""
        key = self.unit_key(u)
        got = self._mats.get(key)
        if got is not None:
            return got
        chain = []
        x = key
        while x not in self._mats:
            chain.append(x)
            x = self._parent[x][0]
        for y in reversed(chain):
            par, g = self._parent[y]
            A = self._mats[g]
            B = self._mats[par]
            mcap = min(A[2], B[2])
            m = self.p ** mcap
            a, b = _mat_compose((A[0] % m, A[1] % m), (B[0] % m, B[1] % m),
                                self.ctx.r, m)
            self._mats[y] = (a, b, mcap)
        return self._mats[key]

    def galois_act(self, u, x: TowerElement) -> TowerElement:
        """The automorphism attached to the unit class u, applied to x."""
        key = self.unit_key(u)
        if x.level is not self:
            raise ValueError("element belongs to a different level")
        Ma, Mb, mcap = self.conj_matrix(key)
        cap = min(x.cap, mcap)
        m = self.p ** cap
        a, b = _mat_apply((Ma, Mb), x.a % m, x.b % m, self.ctx.r, m)
        return TowerElement(self, a, b, e=x.e, cap=cap, _norm=False)

    def conjugate_point(self, u) -> TowerElement:
        """The image of v under the automorphism of the unit class u."""
        return self._w[self.unit_key(u)]

    # -- traces and norms -------------------------------------------------

    def trace_to_base(self, x: TowerElement) -> UnramifiedElement:
        """Sum of all conjugates, read off the Newton power sums."""
        if x.level is not self:
            raise ValueError("element belongs to a different level")
        m = self.p ** x.cap
        s = self._psums % m
        ta = int((s * x.a) .sum() % m)
        tb = int((s * x.b) .sum() % m)
        pe = self.p ** x.e
        if ta % pe or tb % pe:
            raise ArithmeticError(
                "trace is not integral at this denominator; shift first"
            )
        sign = -1 if x.e % 2 else 1
        prec = min(x.tprec(), self.ctx.N)
        return UnramifiedElement(self.ctx, sign * (ta // pe),
                                 sign * (tb // pe), prec)

    def trace_certificate(self) -> bool:
        """Cross-check of the power sums against full conjugate sums.

        The sum of all conjugation matrices must send v^k to the constant
        s_k: power-sum top row, zero everywhere else.
        """
        d = self.d
        mcap = self.cap
        mats = [self.conj_matrix(u) for u in self.units]
        for _, _, mc in mats:
            mcap = min(mcap, mc)
        m = self.p ** mcap
        Ta = np.zeros((d, d), dtype=np.int64)
        Tb = np.zeros((d, d), dtype=np.int64)
        for Ma, Mb, _ in mats:
            Ta = (Ta + Ma) % m
            Tb = (Tb + Mb) % m
        expect = np.zeros((d, d), dtype=np.int64)
        expect[0, :] = self._psums % m
        if not ((Ta == expect).all() and (Tb == 0).all()):
            raise ArithmeticError(
                "conjugate sums disagree with the Newton power sums"
            )
        return True

    def norm_to_base(self, x: TowerElement) -> UnramifiedElement:
        """Product of all conjugates, certified to land in the base."""
        if x.e:
            raise ValueError("norm wants an integral element")
        acc = self.one(cap=x.cap)
        for u in self.units:
            acc = acc * self.galois_act(u, x)
        return acc.to_base()

    def rel_galois_kernel(self, m_level: int) -> list[tuple[int, int]]:
        """Unit classes fixing the level-m sublayer (congruent 1 there)."""
        if not 0 <= m_level < self.n:
            raise ValueError("relative kernel wants 0 <= m < n")
        pm1 = self.p ** (m_level + 1)
        ker = [u for u in self.units
               if (u[0] - 1) % pm1 == 0 and u[1] % pm1 == 0]
        if len(ker) != self.q ** (self.n - m_level):
            raise ArithmeticError("relative kernel has the wrong order")
        return ker

    def rel_trace(self, x: TowerElement, m_level: int) -> TowerElement:
        """Sum over the conjugates fixing level m; certified to lie there."""
        ker = self.rel_galois_kernel(m_level)
        acc = self.zero(cap=x.cap)
        for u in ker:
            acc = acc + self.galois_act(u, x)
        for u in ker:
            if not (self.galois_act(u, acc) - acc).is_zero():
                raise ArithmeticError("relative trace fails to be fixed")
        return acc

    def rel_norm(self, x: TowerElement, m_level: int) -> TowerElement:
        """Product over the conjugates fixing level m."""
        ker = self.rel_galois_kernel(m_level)
        acc = self.one(cap=x.cap)
        for u in ker:
            acc = acc * self.galois_act(u, x)
        for u in ker:
            if not (self.galois_act(u, acc) - acc).is_zero():
                raise ArithmeticError("relative norm fails to be fixed")
        return acc

    def h_trace(self, x: TowerElement) -> TowerElement:
        """Sum over the anticyclotomic subgroup; lands in the H-fixed layer."""
        acc = self.zero(cap=x.cap)
        for h in self.h_subgroup:
            acc = acc + self.galois_act(h, x)
        return acc

    def is_h_fixed(self, x: TowerElement, digits: int | None = None) -> bool:
        for h in self.h_subgroup:
            diff = self.galois_act(h, x) - x
            if not diff.is_zero(digits if digits is not None
                                else min(x.tprec(), diff.tprec())):
                return False
        return True

    # -- characters -------------------------------------------------------

    def characters(self) -> list["AnticyclotomicCharacter"]:
        return [AnticyclotomicCharacter(self, j)
                for j in range(self.p ** self.n)]

    def summary(self) -> dict:
        return {
            "level": self.n,
            "degree": self.d,
            "ramification_index": self.e,
            "unit_group_order": len(self.units),
            "h_order": len(self.h_subgroup),
            "quotient_order": self.p ** self.n,
            "quotient_generator": list(self.quotient_generator),
            "storage_digits": self.cap,
            "minimal_polynomial": str(self.E),
        }

    def __repr__(self):  # pragma: no cover
        return f"TowerLevel(p={self.p}, n={self.n}, d={self.d})"


# ---------------------------------------------------------------------------
# series evaluation at tower points
# ---------------------------------------------------------------------------


def evaluate_series(s, x: TowerElement, tail_val: Fraction | None = None,
                    digits: int | None = None) -> TowerElement:
    """Value s(x) at a tower point of positive valuation.

    Only the stored truncation is summed.  The dropped tail is certified
    by one of: s.exact_tail (a polynomial), the integral-coefficient
    bound (D+1) * v(x) - e, or an explicit caller-supplied p-adic tail
    valuation bound (series with denominators, like the logarithm, have
    sharper bounds than the generic one).  Falls over with the required
    truncation degree when the certificate does not reach the target.
    """
    lvl = x.level
    if x.e:
        raise ValueError("evaluation wants an integral point")
    xv = x.valuation()
    if xv is None or xv <= 0:
        raise ValueError("evaluation wants a point of positive valuation")
    cap = min(lvl.cap, x.cap, s.cap)
    # a result always carries at least one certified digit, so the target
    # cannot drop below 1
    target = min(lvl.ctx.N, cap - s.e) if digits is None else max(1, digits)
    if not s.exact_tail:
        bound = (Fraction((s.D + 1) * xv, lvl.e) - s.e
                 if tail_val is None else tail_val)
        if bound < target:
            need = -(-lvl.e * (target + s.e) // xv) - 1  # ceil then back off
            raise ValueError(
                f"series truncation D={s.D} certifies only {bound} digits "
                f"at this point; need D >= {need} for {target}"
            )
    result = lvl._series_value_raw(s, x)
    if not s.exact_tail:
        allowed = int(bound) + result.e  # floor of the tail bound
        if result.cap > allowed:
            result = TowerElement(lvl, result.a, result.b, e=result.e,
                                  cap=allowed, _norm=False)
    return result


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


def character_conductor(p: int, n: int, j: int) -> int:
    """Conductor of the index-j character of the cyclic level-n quotient.

    The trivial character has conductor 1.  A character of order p^k is
    new at the layer of modulus pi^{k+1}, so its conductor is p^{k+1}.
    """
    pn = p ** n
    j %= pn
    if j == 0:
        return 1
    order = pn // gcd(j, pn)
    k = 0
    t = order
    while t > 1:
        t //= p
        k += 1
    return p ** (k + 1)


class AnticyclotomicCharacter:
    """One character of the cyclic quotient by the anticyclotomic subgroup.

    Values are powers of a formal p^n-th root of unity Z; the table is
    indexed by the quotient labeling the level fixed (coset j of the
    chosen generator maps to Z^{index * j}).  The labeling convention is
    not canonical, so every downstream identity is label-invariant.
    """

    __slots__ = ("level", "index", "order", "conductor", "parity")

    def __init__(self, level: TowerLevel, index: int):
        pn = level.p ** level.n
        j = index % pn
        self.level = level
        self.index = j
        self.order = pn // gcd(j, pn) if j else 1
        self.conductor = character_conductor(level.p, level.n, j)
        cexp = 0
        t = self.conductor
        while t > 1:
            t //= level.p
            cexp += 1
        self.parity = "+" if cexp % 2 == 0 else "-"
        # the stated conductor is minimal: the character kills the
        # order-p^k sublevel and nothing smaller
        if (j * self.order) % pn != 0:
            raise ArithmeticError("character order fails to annihilate")
        if j and (j * (self.order // level.p)) % pn == 0:
            raise ArithmeticError("character conductor is not minimal")

    @property
    def is_trivial(self) -> bool:
        return self.index == 0

    def exponent(self, coset: int) -> int:
        """Exponent of Z on the coset with quotient label `coset`."""
        pn = self.level.p ** self.level.n
        return (self.index * coset) % pn

    def exponent_inv(self, coset: int) -> int:
        pn = self.level.p ** self.level.n
        return (-self.index * coset) % pn

    def exponent_on_unit(self, u) -> int:
        return self.exponent(self.level.coset_index[self.level.unit_key(u)])

    def value(self, coset: int) -> "CycloElement":
        return CycloElement.monomial(self.level, self.exponent(coset))

    def __repr__(self):  # pragma: no cover
        return (f"AnticyclotomicCharacter(n={self.level.n}, index={self.index}, "
                f"conductor={self.conductor}, parity={self.parity})")


def characters(level: TowerLevel) -> list[AnticyclotomicCharacter]:
    return level.characters()


# ---------------------------------------------------------------------------
# the root-of-unity coefficient ring
# ---------------------------------------------------------------------------


class CycloElement:
    """Element of the level's formal root-of-unity ring.

    Stored in the group-ring basis 1, Z, ..., Z^{p^n - 1} with tower
    element coefficients; every identity test reduces modulo the p^n-th
    cyclotomic polynomial at the end.  All target identities are linear
    over this ring, so no inversion is ever required.
    """

    __slots__ = ("level", "vec")

    def __init__(self, level: TowerLevel, vec):
        pn = level.p ** level.n
        vec = list(vec)
        if len(vec) != pn:
            raise ValueError(f"need {pn} coefficients, got {len(vec)}")
        self.level = level
        self.vec = [level.coerce(c) for c in vec]

    @classmethod
    def monomial(cls, level: TowerLevel, k: int, value=1) -> "CycloElement":
        pn = level.p ** level.n
        vec = [level.zero() for _ in range(pn)]
        vec[k % pn] = level.coerce(value)
        return cls(level, vec)

    @classmethod
    def zero(cls, level: TowerLevel) -> "CycloElement":
        pn = level.p ** level.n
        return cls(level, [level.zero() for _ in range(pn)])

    def __add__(self, other):
        return CycloElement(self.level,
                            [a + b for a, b in zip(self.vec, other.vec)])

    def __sub__(self, other):
        return CycloElement(self.level,
                            [a - b for a, b in zip(self.vec, other.vec)])

    def __neg__(self):
        return CycloElement(self.level, [-a for a in self.vec])

    def rot(self, k: int) -> "CycloElement":
        """Multiplication by Z^k."""
        pn = len(self.vec)
        out = [None] * pn
        for i, c in enumerate(self.vec):
            out[(i + k) % pn] = c
        return CycloElement(self.level, out)

    def scale(self, c) -> "CycloElement":
        return CycloElement(self.level, [a * c for a in self.vec])

    def pi_shift(self, j: int) -> "CycloElement":
        return CycloElement(self.level, [a.pi_shift(j) for a in self.vec])

    def __mul__(self, other):
        if not isinstance(other, CycloElement):
            return self.scale(other)
        pn = len(self.vec)
        out = [self.level.zero() for _ in range(pn)]
        for i, ci in enumerate(self.vec):
            for k, ck in enumerate(other.vec):
                out[(i + k) % pn] = out[(i + k) % pn] + ci * ck
        return CycloElement(self.level, out)

    def galois_act(self, u) -> "CycloElement":
        return CycloElement(self.level,
                            [self.level.galois_act(u, c) for c in self.vec])

    def reduce(self) -> list[TowerElement]:
        """Remainder modulo the p^n-th cyclotomic polynomial."""
        p, n = self.level.p, self.level.n
        if n == 0:
            return [self.vec[0]]
        pn = p ** n
        phi_deg = (p - 1) * p ** (n - 1)
        step = p ** (n - 1)
        work = list(self.vec)
        for t in range(pn - 1, phi_deg - 1, -1):
            c = work[t]
            for i in range(p - 1):
                idx = t - phi_deg + i * step
                work[idx] = work[idx] - c
            work[t] = self.level.zero()
        return work[:phi_deg]

    def tprec(self) -> int:
        """Certified digits of the least precise coefficient."""
        return min(c.tprec() for c in self.vec)

    def is_zero(self, digits: int | None = None) -> bool:
        return all(c.is_zero(digits) for c in self.reduce())

    def __eq__(self, other):
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):  # pragma: no cover
        return f"CycloElement({[str(c) for c in self.vec]})"


# ---------------------------------------------------------------------------
# literals
# ---------------------------------------------------------------------------

_V_RE = re.compile(r"\bv\b")


def parse_tower_element(level: TowerLevel, text: str) -> TowerElement:
    """Parse a literal like "pi^-1 * (v^3 + (1+2*w)*v - 3)".

    The grammar is the series grammar with v for the variable; exponents
    at or above the degree are folded through the minimal polynomial.
    """
    s = parse_series(level.ctx, _V_RE.sub("X", text), cap=level.cap)
    m = level.p ** level.cap
    a = level._fold_long([int(x) for x in s.a], m)
    b = level._fold_long([int(x) for x in s.b], m)
    # coefficient literals in text carry at most the context precision, and
    # a pi^-e prefix spends e of those digits, so the certified window is
    # N - e; claiming more would promote unparsed digits to certified ones
    capv = min(level.cap, s.cap, level.ctx.N)
    return TowerElement(level, a, b, e=s.e, cap=capv)


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

_LEVEL_CACHE: dict[tuple, TowerLevel] = {}


def build_level(ctx: PrimeContext, n: int, cap: int | None = None,
                allow_level_two: bool = False) -> TowerLevel:
    """Build (or fetch) the level-n layer for this context.

    The cache key includes the context identity; a cached level keeps its
    context alive, so identity keys can never be silently reused.
    """
    key = (id(ctx), n, cap)
    lvl = _LEVEL_CACHE.get(key)
    if lvl is None:
        lvl = TowerLevel(ctx, n, cap=cap, allow_level_two=allow_level_two)
        _LEVEL_CACHE[key] = lvl
    return lvl


def galois_act(u, x: TowerElement) -> TowerElement:
    return x.level.galois_act(u, x)


def trace_to_base(x: TowerElement) -> UnramifiedElement:
    return x.level.trace_to_base(x)
