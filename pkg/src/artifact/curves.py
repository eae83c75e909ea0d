"""Elliptic curves over small finite fields by exhaustive enumeration.

Fields F_{p^k} are built from a deterministically chosen irreducible
polynomial; elements are integers 0..p^k-1 encoding base-p digit vectors,
multiplied through discrete log/exp tables so every operation is O(1)
after setup.  Curves are long Weierstrass equations with integer
coefficients (reduced into the field), points are enumerated by completing
the square in y per x, and all invariants (trace, group structure,
automorphism group, torsion orbits, fixed-point kernels) come from direct
enumeration rather than point-counting algorithms.  Everything is exact.
"""

from __future__ import annotations

import re
from math import gcd

import numpy as np

__all__ = [
    "FiniteField",
    "Curve",
    "parse_curve",
    "automorphisms",
    "scalar_frobenius_check",
    "cyclic_subgroups",
    "subgroup_orbits",
    "kernel_report",
    "mu_index",
]


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return out


def _poly_rem(a: list[int], mod: list[int], p: int) -> list[int]:
    a = list(a)
    dm = len(mod) - 1
    inv_lead = pow(mod[-1], -1, p)
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] % p
        if c:
            factor = (c * inv_lead) % p
            for j, mj in enumerate(mod):
                a[i - dm + j] = (a[i - dm + j] - factor * mj) % p
    a = a[:dm]
    while len(a) < dm:
        a.append(0)
    return a


def _poly_powmod(base: list[int], e: int, mod: list[int], p: int) -> list[int]:
    result = [1]
    b = _poly_rem(base, mod, p)
    while e:
        if e & 1:
            result = _poly_rem(_poly_mul(result, b, p), mod, p)
        b = _poly_rem(_poly_mul(b, b, p), mod, p)
        e >>= 1
    out = list(result)
    while len(out) < len(mod) - 1:
        out.append(0)
    return out


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    def trim(v):
        v = list(v)
        while v and v[-1] % p == 0:
            v.pop()
        return v

    a, b = trim(a), trim(b)
    while b:
        a = trim(_poly_rem(a, b, p)) if len(a) >= len(b) else a
        a, b = b, a if len(a) < len(b) else trim(_poly_rem(a, b, p))
    return a


def _is_irreducible(mod: list[int], p: int) -> bool:
    k = len(mod) - 1
    x = [0, 1]
    xqk = _poly_powmod(x, p**k, mod, p)
    lin = list(xqk)
    lin[1] = (lin[1] - 1) % p
    if any(c % p for c in lin):
        return False
    for ell in _prime_factors(k):
        xq = _poly_powmod(x, p ** (k // ell), mod, p)
        diff = list(xq)
        diff[1] = (diff[1] - 1) % p
        g = _poly_gcd(diff, mod, p)
        if len(g) != 1:
            return False
    return True


def _find_modulus(p: int, k: int) -> list[int]:
    """Smallest monic irreducible of degree k over F_p, by encoded value."""
    if k == 1:
        return [0, 1]
    for code in range(p**k):
        mod = [(code // p**i) % p for i in range(k)] + [1]
        if _is_irreducible(mod, p):
            return mod
    raise RuntimeError(f"no irreducible of degree {k} over F_{p}")


class FiniteField:
    """F_{p^k} with log/exp multiplication tables.

    Elements are integers in range(p^k), read as little-endian base-p digit
    vectors of polynomial coefficients modulo a fixed irreducible.  A
    generator of the multiplicative group is found at construction and all
    products, inverses, powers, and Frobenius maps go through the discrete
    log table, so the per-operation cost is constant.

    Intended for q up to a few thousand (table size is O(q)).

    Examples:
        >>> F9 = FiniteField(3, 2)
        >>> F9.mul(F9.gen, F9.inv(F9.gen))
        1
    """

    def __init__(self, p: int, k: int):
        if p < 2 or k < 1:
            raise ValueError("need a prime p and degree k >= 1")
        self.p = p
        self.k = k
        self.q = p**k
        if self.q > 4096:
            raise ValueError(
                f"field size {self.q} beyond the table budget (4096 elements)"
            )
        self.modulus = _find_modulus(p, k)
        self.gen = self._find_generator()
        self._exp = [0] * (self.q - 1)
        self._log = [0] * self.q
        cur = 1
        for i in range(self.q - 1):
            self._exp[i] = cur
            self._log[cur] = i
            cur = self._mul_poly(cur, self.gen)
        if cur != 1:
            raise RuntimeError("generator order mismatch")
        digs = np.zeros((self.q, k), dtype=np.int64)
        vals = np.arange(self.q)
        for i in range(k):
            digs[:, i] = (vals // p**i) % p
        pw = np.array([p**i for i in range(k)], dtype=np.int64)
        self._add_table = (((digs[:, None, :] + digs[None, :, :]) % p) @ pw).astype(
            np.int32
        )
        self._neg_table = (((-digs) % p) @ pw).astype(np.int32)

    def _decode(self, e: int) -> list[int]:
        return [(e // self.p**i) % self.p for i in range(self.k)]

    def _encode(self, v: list[int]) -> int:
        return sum((c % self.p) * self.p**i for i, c in enumerate(v))

    def _mul_poly(self, a: int, b: int) -> int:
        prod = _poly_mul(self._decode(a), self._decode(b), self.p)
        return self._encode(_poly_rem(prod, self.modulus, self.p))

    def _find_generator(self) -> int:
        n = self.q - 1
        fac = _prime_factors(n)
        for cand in range(2, self.q):
            if all(self._powpoly(cand, n // ell) != 1 for ell in fac):
                return cand
        if self.q == 2:
            return 1
        raise RuntimeError("no multiplicative generator found")

    def _powpoly(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_poly(result, a)
            a = self._mul_poly(a, a)
            e >>= 1
        return result

    def add(self, a: int, b: int) -> int:
        return int(self._add_table[a, b])

    def neg(self, a: int) -> int:
        return int(self._neg_table[a])

    def sub(self, a: int, b: int) -> int:
        return int(self._add_table[a, self._neg_table[b]])

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def power(self, a: int, n: int) -> int:
        if a == 0:
            if n < 0:
                raise ZeroDivisionError("inverse of zero")
            return 0 if n else 1
        return self._exp[(self._log[a] * n) % (self.q - 1)]

    def frob(self, a: int, times: int = 1) -> int:
        """p^times-power Frobenius."""
        return self.power(a, self.p**times)

    def from_int(self, c: int) -> int:
        return c % self.p

    def scalar(self, c: int, a: int) -> int:
        """Multiply by an integer scalar (prime-field element)."""
        return self.mul(self.from_int(c), a)

    def __repr__(self) -> str:
        return f"FiniteField({self.p}, {self.k})"


def parse_curve(text: str) -> tuple[int, int, int, int, int]:
    """Parse a long Weierstrass equation into (a1, a2, a3, a4, a6).

    Accepts forms like "y2=x3-x" or "y2+y=x3-38x+90": left side is y^2
    plus optional a1*xy and a3*y terms, right side is x^3 plus optional
    a2*x^2, a4*x and constant terms, with integer coefficients.

    Examples:
        >>> parse_curve("y2+y=x3-38x+90")
        (0, 0, 1, -38, 90)
    """
    s = text.replace(" ", "").replace("^", "").replace("**", "").lower()
    if "=" not in s:
        raise ValueError(f"no '=' in curve equation {text!r}")
    left, right = s.split("=", 1)
    term_re = re.compile(r"([+-]?\d*)(xy|x3|x2|y2|x|y)?")

    def terms(side: str) -> dict[str, int]:
        out: dict[str, int] = {}
        pos = 0
        while pos < len(side):
            m = term_re.match(side, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse {side[pos:]!r} in {text!r}")
            coeff_s, mono = m.group(1), m.group(2) or "1"
            coeff = int(coeff_s) if coeff_s not in ("", "+", "-") else int(coeff_s + "1")
            out[mono] = out.get(mono, 0) + coeff
            pos = m.end()
        return out

    lt, rt = terms(left), terms(right)
    if lt.get("y2") != 1:
        raise ValueError(f"left side of {text!r} must start with y^2")
    if rt.get("x3") != 1:
        raise ValueError(f"right side of {text!r} must start with x^3")
    bad = set(lt) - {"y2", "xy", "y"} | set(rt) - {"x3", "x2", "x", "1"}
    if bad:
        raise ValueError(f"unexpected terms {sorted(bad)} in {text!r}")
    return (
        lt.get("xy", 0),
        rt.get("x2", 0),
        lt.get("y", 0),
        rt.get("x", 0),
        rt.get("1", 0),
    )


class Curve:
    """Long Weierstrass curve y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6.

    Coefficients are integers reduced into the given field (so the same
    equation can be instantiated over any extension).  Points are affine
    pairs of field elements, with None for the point at infinity.  The
    constructor rejects singular equations.

    Args:
        field: FiniteField instance.
        coeffs: (a1, a2, a3, a4, a6) integer tuple.

    Examples:
        >>> E = Curve(FiniteField(3, 1), (0, 0, 0, -1, 0))
        >>> len(E.points()), E.trace()
        (4, 0)
    """

    def __init__(self, field: FiniteField, coeffs: tuple[int, int, int, int, int]):
        self.field = field
        self.coeffs = tuple(int(c) for c in coeffs)
        self.a1, self.a2, self.a3, self.a4, self.a6 = (
            field.from_int(c) for c in self.coeffs
        )
        if self.discriminant() == 0:
            raise ValueError(f"singular curve {coeffs} over {field}")
        self._points: list[tuple[int, int] | None] | None = None
        self._orders: dict[tuple[int, int] | None, int] | None = None
        self._auts: list["Automorphism"] | None = None

    def _b_invariants(self) -> tuple[int, int, int, int]:
        F = self.field
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = F.add(F.mul(a1, a1), F.scalar(4, a2))
        b4 = F.add(F.scalar(2, a4), F.mul(a1, a3))
        b6 = F.add(F.mul(a3, a3), F.scalar(4, a6))
        b8 = F.mul(F.mul(a1, a1), a6)
        b8 = F.add(b8, F.scalar(4, F.mul(a2, a6)))
        b8 = F.sub(b8, F.mul(a1, F.mul(a3, a4)))
        b8 = F.add(b8, F.mul(a2, F.mul(a3, a3)))
        b8 = F.sub(b8, F.mul(a4, a4))
        return b2, b4, b6, b8

    def discriminant(self) -> int:
        F = self.field
        b2, b4, b6, b8 = self._b_invariants()
        d = F.neg(F.mul(F.mul(b2, b2), b8))
        d = F.sub(d, F.scalar(8, F.power(b4, 3)))
        d = F.sub(d, F.scalar(27, F.mul(b6, b6)))
        d = F.add(d, F.scalar(9, F.mul(b2, F.mul(b4, b6))))
        return d

    def j_invariant(self) -> int:
        F = self.field
        b2, b4, _, _ = self._b_invariants()
        c4 = F.sub(F.mul(b2, b2), F.scalar(24, b4))
        return F.mul(F.power(c4, 3), F.inv(self.discriminant()))

    def on_curve(self, P: tuple[int, int] | None) -> bool:
        if P is None:
            return True
        F = self.field
        x, y = P
        lhs = F.add(F.mul(y, y), F.add(F.mul(self.a1, F.mul(x, y)), F.mul(self.a3, y)))
        rhs = F.add(
            F.power(x, 3),
            F.add(F.mul(self.a2, F.mul(x, x)), F.add(F.mul(self.a4, x), self.a6)),
        )
        return lhs == rhs

    def points(self) -> list[tuple[int, int] | None]:
        """All points, by completing the square in y per x-value."""
        if self._points is not None:
            return self._points
        F = self.field
        if F.p == 2:
            raise ValueError("even characteristic not supported")
        roots: dict[int, list[int]] = {}
        for y in range(F.q):
            roots.setdefault(F.mul(y, y), []).append(y)
        half = F.inv(F.from_int(2))
        pts: list[tuple[int, int] | None] = [None]
        for x in range(F.q):
            rhs = F.add(
                F.power(x, 3),
                F.add(F.mul(self.a2, F.mul(x, x)), F.add(F.mul(self.a4, x), self.a6)),
            )
            shift = F.mul(half, F.add(F.mul(self.a1, x), self.a3))
            target = F.add(rhs, F.mul(shift, shift))
            for z in roots.get(target, []):
                pts.append((x, F.sub(z, shift)))
        for P in pts:
            if not self.on_curve(P):
                raise RuntimeError("point enumeration produced an off-curve point")
        self._points = pts
        return pts

    def neg_point(self, P: tuple[int, int] | None) -> tuple[int, int] | None:
        if P is None:
            return None
        F = self.field
        x, y = P
        return (x, F.sub(F.neg(y), F.add(F.mul(self.a1, x), self.a3)))

    def add_points(
        self, P: tuple[int, int] | None, Q: tuple[int, int] | None
    ) -> tuple[int, int] | None:
        F = self.field
        if P is None:
            return Q
        if Q is None:
            return P
        x1, y1 = P
        x2, y2 = Q
        if x1 == x2 and y2 == self.neg_point(P)[1]:
            return None
        if P == Q:
            num = F.add(
                F.scalar(3, F.mul(x1, x1)),
                F.add(F.scalar(2, F.mul(self.a2, x1)), F.sub(self.a4, F.mul(self.a1, y1))),
            )
            den = F.add(F.scalar(2, y1), F.add(F.mul(self.a1, x1), self.a3))
        else:
            num = F.sub(y2, y1)
            den = F.sub(x2, x1)
        lam = F.mul(num, F.inv(den))
        x3 = F.sub(
            F.add(F.mul(lam, lam), F.mul(self.a1, lam)),
            F.add(self.a2, F.add(x1, x2)),
        )
        y3 = F.sub(
            F.mul(lam, F.sub(x1, x3)),
            F.add(y1, F.add(F.mul(self.a1, x3), self.a3)),
        )
        return (x3, y3)

    def mul_point(self, n: int, P: tuple[int, int] | None) -> tuple[int, int] | None:
        if n < 0:
            return self.mul_point(-n, self.neg_point(P))
        R: tuple[int, int] | None = None
        Q = P
        while n:
            if n & 1:
                R = self.add_points(R, Q)
            Q = self.add_points(Q, Q)
            n >>= 1
        return R

    def count(self) -> int:
        return len(self.points())

    def trace(self) -> int:
        """Trace of Frobenius a = q + 1 - #E, as a signed integer."""
        return self.field.q + 1 - self.count()

    def is_supersingular(self) -> bool:
        return self.trace() % self.field.p == 0

    def point_order(self, P: tuple[int, int] | None) -> int:
        n = self.count()
        order = n
        for ell in _prime_factors(n):
            while order % ell == 0 and self.mul_point(order // ell, P) is None:
                order //= ell
        return order

    def point_orders(self) -> dict[tuple[int, int] | None, int]:
        if self._orders is None:
            self._orders = {P: self.point_order(P) for P in self.points()}
        return self._orders

    def group_structure(self) -> tuple[int, int]:
        """Invariant factors (d1, d2), d1 | d2, of the point group.

        d2 is the group exponent (lcm of point orders); d1 = #E/d2.  The
        result is cross-checked: d1 divides d2, the d1-torsion has exactly
        d1^2 points, and d1 divides q - 1 (the Weil pairing forces the
        d1-th roots of unity into the field).
        """
        n = self.count()
        d2 = 1
        for order in self.point_orders().values():
            d2 = d2 * order // gcd(d2, order)
        d1, rem = divmod(n, d2)
        if rem:
            raise RuntimeError("exponent does not divide the group order")
        if d1 > 1 and d2 % d1:
            raise RuntimeError("invariant factors failed d1 | d2")
        killed = sum(1 for o in self.point_orders().values() if d1 % o == 0)
        if killed != d1 * d1:
            raise RuntimeError("d1-torsion count mismatch")
        if (self.field.q - 1) % d1:
            raise RuntimeError("Weil constraint d1 | q-1 violated")
        return (d1, d2)

    def __repr__(self) -> str:
        return f"Curve({self.field!r}, {self.coeffs})"


class Automorphism:
    """Point map (x, y) -> (u^2 x + r, u^3 y + s u^2 x + t) fixing infinity."""

    __slots__ = ("curve", "u", "r", "s", "t")

    def __init__(self, curve: Curve, u: int, r: int, s: int, t: int):
        self.curve = curve
        self.u = u
        self.r = r
        self.s = s
        self.t = t

    def key(self) -> tuple[int, int, int, int]:
        return (self.u, self.r, self.s, self.t)

    def act(self, P: tuple[int, int] | None) -> tuple[int, int] | None:
        if P is None:
            return None
        F = self.curve.field
        x, y = P
        u2 = F.mul(self.u, self.u)
        X = F.add(F.mul(u2, x), self.r)
        Y = F.add(F.mul(F.mul(u2, self.u), y), F.add(F.mul(self.s, F.mul(u2, x)), self.t))
        return (X, Y)

    def compose(self, other: "Automorphism") -> "Automorphism":
        """self after other, recovered from images of generic points."""
        F = self.curve.field
        u = F.mul(self.u, other.u)
        u2 = F.mul(u, u)
        u3 = F.mul(u2, u)
        # image of x: self.u^2 (other.u^2 x + other.r) + self.r
        su2 = F.mul(self.u, self.u)
        r = F.add(F.mul(su2, other.r), self.r)
        # y-row: self.u^3 (other.u^3 y + other.s other.u^2 x + other.t) + self.s self.u^2 (...) + self.t
        su3 = F.mul(su2, self.u)
        ou2 = F.mul(other.u, other.u)
        s_coeff = F.add(F.mul(su3, F.mul(other.s, ou2)), F.mul(self.s, F.mul(su2, ou2)))
        s = F.mul(s_coeff, F.inv(u2))
        t = F.add(
            F.mul(su3, other.t),
            F.add(F.mul(self.s, F.mul(su2, other.r)), self.t),
        )
        return Automorphism(self.curve, u, r, s, t)

    def order(self) -> int:
        n = 1
        g = self
        ident = (1, 0, 0, 0)
        while g.key() != ident:
            g = g.compose(self)
            n += 1
            if n > 24:
                raise RuntimeError("automorphism order beyond 24")
        return n

    def __repr__(self) -> str:
        return f"Automorphism(u={self.u}, r={self.r}, s={self.s}, t={self.t})"


def _equation_poly(curve: Curve) -> dict[tuple[int, int], int]:
    """Nonzero coefficients of y^2 + a1 xy + a3 y - x^3 - a2 x^2 - a4 x - a6."""
    F = curve.field
    full = {
        (0, 2): 1,
        (1, 1): curve.a1,
        (0, 1): curve.a3,
        (3, 0): F.neg(F.from_int(1)),
        (2, 0): F.neg(curve.a2),
        (1, 0): F.neg(curve.a4),
        (0, 0): F.neg(curve.a6),
    }
    return {k: v for k, v in full.items() if v}


def _substituted_poly(
    curve: Curve, u: int, r: int, s: int, t: int
) -> dict[tuple[int, int], int]:
    """Equation polynomial evaluated at (u^2 x + r, u^3 y + s u^2 x + t)."""
    F = curve.field
    u2 = F.mul(u, u)
    X = {(1, 0): u2, (0, 0): r}
    Y = {(0, 1): F.mul(u2, u), (1, 0): F.mul(s, u2), (0, 0): t}

    def pmul(A, B):
        out: dict[tuple[int, int], int] = {}
        for (i, j), a in A.items():
            for (k, l), b in B.items():
                key = (i + k, j + l)
                out[key] = F.add(out.get(key, 0), F.mul(a, b))
        return {k: v for k, v in out.items() if v}

    def padd(A, B):
        out = dict(A)
        for k, v in B.items():
            out[k] = F.add(out.get(k, 0), v)
        return {k: v for k, v in out.items() if v}

    def pscale(A, c):
        return {k: F.mul(c, v) for k, v in A.items() if F.mul(c, v)}

    X2 = pmul(X, X)
    out = pmul(Y, Y)
    out = padd(out, pscale(pmul(X, Y), curve.a1))
    out = padd(out, pscale(Y, curve.a3))
    out = padd(out, pscale(pmul(X2, X), F.neg(F.from_int(1))))
    out = padd(out, pscale(X2, F.neg(curve.a2)))
    out = padd(out, pscale(X, F.neg(curve.a4)))
    out = padd(out, {(0, 0): F.neg(curve.a6)})
    return out


def automorphisms(curve: Curve) -> list[Automorphism]:
    """All Weierstrass automorphisms with coefficients in the curve's field.

    The substitution family is (x, y) -> (u^2 x + r, u^3 y + s u^2 x + t)
    with u invertible.  A candidate is accepted exactly when the
    substituted curve polynomial equals u^6 times the original as a
    polynomial identity in x and y.  Comparing the xy and y monomials
    shows s and t are determined linearly by (u, r) in odd characteristic,
    so the search runs over all (u, r) pairs with s, t solved.  Each pair
    is prefiltered by evaluating the identity at two sample points (cheap,
    never excludes a true automorphism since the identity holds at every
    point), survivors get the full polynomial comparison, and closure
    under composition is checked before returning.  Results are cached on
    the curve.

    Examples:
        >>> E9 = Curve(FiniteField(3, 2), (0, 0, 0, -1, 0))
        >>> len(automorphisms(E9))
        12
    """
    if curve._auts is not None:
        return curve._auts
    F = curve.field
    if F.p == 2:
        raise ValueError("even characteristic not supported")
    half = F.inv(F.from_int(2))
    a1, a2, a3, a4, a6 = curve.a1, curve.a2, curve.a3, curve.a4, curve.a6

    def eq_at(x: int, y: int) -> int:
        acc = F.mul(y, y)
        acc = F.add(acc, F.mul(a1, F.mul(x, y)))
        acc = F.add(acc, F.mul(a3, y))
        acc = F.sub(acc, F.power(x, 3))
        acc = F.sub(acc, F.mul(a2, F.mul(x, x)))
        acc = F.sub(acc, F.mul(a4, x))
        return F.sub(acc, a6)

    samples = [(F.gen, F.power(F.gen, 3)), (F.add(F.gen, 1), F.power(F.gen, 5))]
    candidates: list[tuple[int, int, int, int]] = []
    for u in range(1, F.q):
        u2 = F.mul(u, u)
        u3 = F.mul(u2, u)
        u6 = F.mul(u3, u3)
        # xy monomial: (2s + a1) u^5 = a1 u^6; y monomial: (2t + r a1 + a3) u^3 = a3 u^6
        s = F.mul(half, F.mul(a1, F.sub(u, 1)))
        t_base = F.mul(half, F.sub(F.mul(u3, a3), a3))
        t_slope = F.neg(F.mul(half, a1))
        pre = []
        for x0, y0 in samples:
            pre.append(
                (
                    F.mul(u2, x0),
                    F.add(F.mul(u3, y0), F.mul(s, F.mul(u2, x0))),
                    F.mul(u6, eq_at(x0, y0)),
                )
            )
        for r in range(F.q):
            t = F.add(t_base, F.mul(t_slope, r))
            ok = True
            for xbase, ybase, tgt in pre:
                if eq_at(F.add(xbase, r), F.add(ybase, t)) != tgt:
                    ok = False
                    break
            if ok:
                candidates.append((u, r, s, t))
    found: list[Automorphism] = []
    target_base = _equation_poly(curve)
    for u, r, s, t in candidates:
        u6 = F.power(u, 6)
        target = {k: F.mul(u6, v) for k, v in target_base.items()}
        if _substituted_poly(curve, u, r, s, t) == target:
            found.append(Automorphism(curve, u, r, s, t))
    keys = {g.key() for g in found}
    if (1, 0, 0, 0) not in keys:
        raise RuntimeError("identity substitution missing")
    for g in found:
        for h in found:
            if g.compose(h).key() not in keys:
                raise RuntimeError("automorphism set not closed under composition")
    if 24 % len(found) != 0:
        raise RuntimeError(f"automorphism count {len(found)} does not divide 24")
    curve._auts = found
    return found


def scalar_frobenius_check(
    coeffs: tuple[int, int, int, int, int], p: int, kmax: int = 3
) -> dict:
    """Verify the p^2-power Frobenius acts as the scalar a/2 on points.

    Requires the trace a over F_{p^2} to be +-2p (else the Frobenius is
    not a rational scalar and the check is refused).  The quadratic
    (phi - a/2)^2 = 0 then forces phi = a/2 in the endomorphism ring, and
    this is witnessed directly: (x^{p^2}, y^{p^2}) = [a/2](x, y) for every
    point of E(F_{p^{2k}}), k = 1..kmax.

    Returns a report dict with the scalar, per-level point counts, and the
    verified count identity #E(F_{q^k}) = (scalar^k - 1)^2.
    """
    base = Curve(FiniteField(p, 2), coeffs)
    a = base.trace()
    if a not in (2 * p, -2 * p):
        raise ValueError(f"trace {a} over F_{p*p} is not +-2p; Frobenius is not scalar")
    scalar = a // 2
    levels = []
    for k in range(1, kmax + 1):
        E = Curve(FiniteField(p, 2 * k), coeffs)
        pts = E.points()
        for P in pts:
            if P is None:
                continue
            x, y = P
            image = (E.field.frob(x, 2), E.field.frob(y, 2))
            if image != E.mul_point(scalar, P):
                raise RuntimeError(f"Frobenius mismatch at level {k} on {P}")
        expected = (scalar**k - 1) ** 2
        if len(pts) != expected:
            raise RuntimeError(
                f"count {len(pts)} != (scalar^{k} - 1)^2 = {expected}"
            )
        levels.append({"k": k, "points": len(pts), "count_identity": expected})
    return {"scalar": scalar, "trace": a, "levels": levels}


def mu_index(N: int) -> int:
    """Index mu(N) = N * prod_{ell | N} (1 + 1/ell)."""
    mu = N
    for ell in _prime_factors(N):
        mu = mu // ell * (ell + 1)
    return mu


def cyclic_subgroups(curve: Curve, N: int) -> list[frozenset]:
    """All cyclic order-N subgroups, as frozensets of points.

    Requires gcd(N, p) = 1 and the full N-torsion rational over the
    curve's field (checked by counting: exactly N^2 points killed by N).
    """
    if gcd(N, curve.field.p) != 1:
        raise ValueError(f"N = {N} not coprime to the characteristic")
    orders = curve.point_orders()
    killed = [P for P, o in orders.items() if N % o == 0]
    if len(killed) != N * N:
        raise ValueError(
            f"N-torsion not fully rational: {len(killed)} points, need {N * N}"
        )
    subs = set()
    for P, o in orders.items():
        if o == N:
            span = frozenset(curve.mul_point(i, P) for i in range(N))
            subs.add(span)
    out = sorted(subs, key=lambda S: sorted((-1, -1) if P is None else P for P in S))
    if len(out) != mu_index(N):
        raise RuntimeError(f"found {len(out)} cyclic subgroups, expected {mu_index(N)}")
    return out


def subgroup_orbits(curve: Curve, N: int) -> dict:
    """Orbits of the automorphism group on cyclic order-N subgroups.

    Returns subgroup count, orbits (as lists of subgroup indices),
    stabilizer orders, and checks the orbit-stabilizer identity
    |orbit| * |stabilizer| = #Aut for every orbit plus the partition
    identity sum |orbit| = mu(N).
    """
    subs = cyclic_subgroups(curve, N)
    auts = automorphisms(curve)
    index = {S: i for i, S in enumerate(subs)}
    seen: set[int] = set()
    orbits = []
    for i, S in enumerate(subs):
        if i in seen:
            continue
        orbit = set()
        stab = 0
        for g in auts:
            image = frozenset(g.act(P) for P in S)
            j = index.get(image)
            if j is None:
                raise RuntimeError("automorphism image is not an enumerated subgroup")
            orbit.add(j)
            if j == i:
                stab += 1
        if len(orbit) * stab != len(auts):
            raise RuntimeError("orbit-stabilizer identity failed")
        seen |= orbit
        orbits.append({"members": sorted(orbit), "stabilizer_order": stab})
    if sum(len(o["members"]) for o in orbits) != len(subs):
        raise RuntimeError("orbits do not partition the subgroup set")
    return {
        "N": N,
        "mu": len(subs),
        "subgroups": len(subs),
        "orbit_count": len(orbits),
        "orbits": orbits,
        "aut_order": len(auts),
    }


def _aut_trace(curve: Curve, g: Automorphism) -> int:
    """Endomorphism trace of an automorphism, from g^2 - t g + 1 = 0.

    Determined by testing t in -2..2 against g(g(P)) - [t] g(P) + P = O on
    every rational point; exactly one t works for an automorphism.
    """
    pts = curve.points()
    hits = []
    for t in range(-2, 3):
        ok = True
        for P in pts:
            gP = g.act(P)
            lhs = curve.add_points(
                curve.add_points(g.act(gP), curve.mul_point(-t, gP)), P
            )
            if lhs is not None:
                ok = False
                break
        if ok:
            hits.append(t)
    if len(hits) != 1:
        raise RuntimeError(f"trace not uniquely determined: {hits}")
    return hits[0]


def _kernel_rows(E: Curve) -> list[dict]:
    """Per-automorphism kernel data over one field, central elements skipped."""
    rows = []
    neg_of = {P: E.neg_point(P) for P in E.points()}
    for g in automorphisms(E):
        order = g.order()
        if order <= 2:
            continue
        tr = _aut_trace(E, g)
        fixed = sum(1 for P in E.points() if g.act(P) == P)
        anti = sum(1 for P in E.points() if g.act(P) == neg_of[P])
        union = sum(
            1 for P in E.points() if g.act(P) == P or g.act(P) == neg_of[P]
        )
        rows.append(
            {
                "order": order,
                "trace": tr,
                "deg_minus": 2 - tr,
                "deg_plus": 2 + tr,
                "fixed": fixed,
                "anti": anti,
                "union": union,
            }
        )
    return rows


def kernel_report(coeffs: tuple[int, int, int, int, int], p: int, kmax: int = 3) -> dict:
    """Fixed-point kernels ker(g -+ 1) for every non-central automorphism.

    For each automorphism g outside {1, -1} of the curve over F_{p^{2k}},
    k = 1..kmax: the rational points with g(P) = P and with g(P) = -P are
    counted, alongside the endomorphism trace and the algebraic degrees
    deg(g -+ 1) = 2 -+ tr(g).  Rational kernel sizes can be strictly
    smaller than the degree when g -+ 1 is inseparable (its kernel then
    sits in the p-torsion, which has no points for a supersingular curve).

    Elements of order 1 and 2 are central (the only involution of an
    elliptic curve automorphism group is -1, since the endomorphism
    algebra has no zero divisors), so the enumeration covers every g with
    image of order 2 or 3 in Aut/{+-1}.  Sufficiency of the field levels
    is checked by multiset stability of the rows across k; the bound B is
    the maximum union size at the deepest level.
    """
    levels = []
    for k in range(1, kmax + 1):
        E = Curve(FiniteField(p, 2 * k), coeffs)
        rows = sorted(
            _kernel_rows(E),
            key=lambda d: (d["order"], d["trace"], d["fixed"], d["anti"]),
        )
        levels.append({"k": k, "rows": rows})
    summary = [
        [(r["order"], r["trace"], r["fixed"], r["anti"], r["union"]) for r in lv["rows"]]
        for lv in levels
    ]
    stable = all(s == summary[0] for s in summary[1:])
    if not stable:
        raise RuntimeError(
            f"kernel sizes not stable across field levels 1..{kmax}: {summary}"
        )
    bound = max((r["union"] for r in levels[-1]["rows"]), default=0)
    return {"p": p, "levels": levels, "stable": stable, "B": bound}
