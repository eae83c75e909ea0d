"""Arithmetic in the quadratic unramified extension of Z_p at finite precision.

Elements are written a + b*w where w is a fixed square root of a non-residue:
w^2 = -1 when p = 3 (mod 4), otherwise w^2 = c for the least positive
non-residue c.  Coordinates are stored as plain integers modulo p^prec and
every element carries its own effective precision, so lossy steps (division
by p) are visible in the type rather than silent.
"""

from __future__ import annotations

import re

__all__ = [
    "PrimeContext",
    "UnramifiedElement",
    "least_nonresidue",
]


def least_nonresidue(p: int) -> int:
    """Return the smallest positive quadratic non-residue mod p."""
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return c
    raise ValueError(f"no non-residue found for p={p}")


class PrimeContext:
    """Fixed prime, default precision, and residue-field generator.

    The context pins p, the default number of p-adic digits N, and the
    constant r with w^2 = r defining the unramified quadratic extension.
    For p = 3 (mod 4) the generator is w^2 = -1; otherwise w^2 = c with c
    the least positive non-residue.  q = p^2 is the residue field size and
    pi = -p is the distinguished uniformizer used throughout.

    Args:
        p: odd prime.
        N: default working precision (p-adic digits), at least 1.

    Examples:
        >>> ctx = PrimeContext(3, 12)
        >>> ctx.q, ctx.pi, ctx.r % ctx.p
        (9, -3, 2)
    """

    def __init__(self, p: int, N: int = 12):
        if p < 3 or any(p % d == 0 for d in range(2, min(p, 60))):
            raise ValueError(f"p must be an odd prime, got {p}")
        if N < 1:
            raise ValueError(f"precision must be >= 1, got {N}")
        self.p = p
        self.N = N
        self.q = p * p
        self.pi = -p
        if p % 4 == 3:
            self.r = -1
        else:
            self.r = least_nonresidue(p)
        self._pow_cache = {k: p ** k for k in range(N + 1)}

    def modulus(self, prec: int | None = None) -> int:
        prec = self.N if prec is None else prec
        m = self._pow_cache.get(prec)
        if m is None:
            m = self.p ** prec
            self._pow_cache[prec] = m
        return m

    def elt(self, a: int, b: int = 0, prec: int | None = None) -> "UnramifiedElement":
        return UnramifiedElement(self, a, b, prec)

    def zero(self, prec: int | None = None) -> "UnramifiedElement":
        return self.elt(0, 0, prec)

    def one(self, prec: int | None = None) -> "UnramifiedElement":
        return self.elt(1, 0, prec)

    def w(self, prec: int | None = None) -> "UnramifiedElement":
        return self.elt(0, 1, prec)

    def random_element(self, rng, unit: bool = False) -> "UnramifiedElement":
        """Draw uniformly mod p^N; with unit=True, redraw until valuation 0.

        Accepts either a random.Random or a numpy Generator.
        """
        m = self.modulus()
        if hasattr(rng, "randrange"):
            draw = rng.randrange
        else:
            draw = lambda n: int(rng.integers(n))  # noqa: E731
        while True:
            x = self.elt(draw(m), draw(m))
            if not unit or x.valuation() == 0:
                return x

    def teichmuller(self, x: "UnramifiedElement") -> "UnramifiedElement":
        """Teichmuller representative with the same residue as the unit x.

        Computed by iterating y -> y^q to the fixed point, which exists and
        is unique: the limit satisfies y^q = y and y = x (mod p).
        """
        if x.valuation() != 0:
            raise ValueError("teichmuller lift needs a unit")
        y = x
        for _ in range(x.prec + 2):
            z = y ** self.q
            if z == y:
                break
            y = z
        return y

    def parse(self, text: str) -> "UnramifiedElement":
        return _parse_element(self, text)

    def __repr__(self):  # pragma: no cover
        return f"PrimeContext(p={self.p}, N={self.N}, w^2={self.r})"


_ELT_RE = re.compile(
    r"""^\s*(?P<a>[+-]?\d+)\s*
        (?:(?P<sign>[+-])\s*(?P<b>\d+)\s*\*\s*w\s*)?
        (?:mod\s*(?P<p>\d+)\s*\^\s*(?P<n>\d+)\s*)?$""",
    re.VERBOSE,
)


def _parse_element(ctx: PrimeContext, text: str) -> "UnramifiedElement":
    m = _ELT_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse element literal: {text!r}")
    a = int(m.group("a"))
    b = int(m.group("b") or 0)
    if m.group("sign") == "-":
        b = -b
    prec = None
    if m.group("p") is not None:
        if int(m.group("p")) != ctx.p:
            raise ValueError(
                f"literal is mod {m.group('p')} but context prime is {ctx.p}"
            )
        prec = int(m.group("n"))
    return UnramifiedElement(ctx, a, b, prec)


class UnramifiedElement:
    """One element a + b*w, reduced mod p^prec, with its effective precision.

    Arithmetic tracks precision conservatively: sums take the min of the two
    precisions, products gain from valuations, and division by p is only
    available through shift_down, which returns an element of strictly lower
    precision.  Precision never exceeds the context default N.
    """

    __slots__ = ("ctx", "a", "b", "prec", "_val")

    def __init__(self, ctx: PrimeContext, a: int, b: int = 0, prec: int | None = None):
        self.ctx = ctx
        self.prec = ctx.N if prec is None else prec
        if not 0 <= self.prec <= ctx.N:
            raise ValueError(f"precision {self.prec} out of range [0, {ctx.N}]")
        m = ctx.modulus(self.prec)
        self.a = a % m
        self.b = b % m
        self._val = None

    # -- basic queries ----------------------------------------------------

    def coords(self) -> tuple[int, int]:
        return (self.a, self.b)

    def valuation(self) -> int:
        """Largest k <= prec with p^k dividing both coordinates.

        A return value equal to prec means "indistinguishable from zero",
        i.e. the true valuation is at least prec.
        """
        if self._val is None:
            p, k = self.ctx.p, 0
            a, b = self.a, self.b
            if a == 0 and b == 0:
                k = self.prec
            else:
                while k < self.prec and a % p == 0 and b % p == 0:
                    a //= p
                    b //= p
                    k += 1
            self._val = k
        return self._val

    def is_zero(self) -> bool:
        """True when the element is 0 to its full precision."""
        return self.a == 0 and self.b == 0

    def residue(self) -> tuple[int, int]:
        """Image in the residue field F_q as a coordinate pair mod p."""
        return (self.a % self.ctx.p, self.b % self.ctx.p)

    # -- ring operations --------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, UnramifiedElement):
            if other.ctx is not self.ctx:
                raise ValueError("mixing elements from different contexts")
            return other
        if isinstance(other, int):
            return UnramifiedElement(self.ctx, other, 0, self.prec)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(self.prec, o.prec)
        return UnramifiedElement(self.ctx, self.a + o.a, self.b + o.b, prec)

    __radd__ = __add__

    def __neg__(self):
        return UnramifiedElement(self.ctx, -self.a, -self.b, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(self.prec, o.prec)
        return UnramifiedElement(self.ctx, self.a - o.a, self.b - o.b, prec)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(
            self.ctx.N,
            min(self.prec + o.valuation(), o.prec + self.valuation()),
        )
        r = self.ctx.r
        a = self.a * o.a + r * self.b * o.b
        b = self.a * o.b + self.b * o.a
        return UnramifiedElement(self.ctx, a, b, prec)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = UnramifiedElement(self.ctx, 1, 0, self.prec)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> "UnramifiedElement":
        """Multiplicative inverse; requires valuation 0."""
        if self.valuation() != 0:
            raise ZeroDivisionError("inverse of a non-unit; shift_down first")
        m = self.ctx.modulus(self.prec)
        norm = (self.a * self.a - self.ctx.r * self.b * self.b) % m
        ninv = pow(norm, -1, m)
        return UnramifiedElement(self.ctx, self.a * ninv, -self.b * ninv, self.prec)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def shift_down(self, k: int = 1) -> "UnramifiedElement":
        """Divide by p^k.  The result has precision prec - k.

        This is the only way to divide by p: the precision cost is carried
        by the returned element.  Raises if the element is not divisible.
        """
        if k < 0:
            raise ValueError("shift amount must be >= 0")
        if k == 0:
            return self
        if self.valuation() < k:
            raise ValueError(
                f"cannot divide by p^{k}: valuation is {self.valuation()}"
            )
        if self.prec - k < 0:
            raise ValueError("no precision left after shift")
        pk = self.ctx.modulus(k)
        return UnramifiedElement(self.ctx, self.a // pk, self.b // pk, self.prec - k)

    def frobenius(self) -> "UnramifiedElement":
        """The lift of x -> x^p on the residue field: a + b*w -> a - b*w.

        Exact (no precision loss): with w^2 = -1 and p = 3 (mod 4), or
        w^2 = c a non-residue and p = 1 (mod 4), w^p = -w in both cases.
        """
        return UnramifiedElement(self.ctx, self.a, -self.b, self.prec)

    def conjugate_norm(self) -> "UnramifiedElement":
        """Norm to Z_p: x * frobenius(x), returned as an element with b = 0."""
        m = self.ctx.modulus(self.prec)
        n = (self.a * self.a - self.ctx.r * self.b * self.b) % m
        return UnramifiedElement(self.ctx, n, 0, self.prec)

    def trace_to_base(self) -> "UnramifiedElement":
        """Trace to Z_p: x + frobenius(x) = 2a."""
        return UnramifiedElement(self.ctx, 2 * self.a, 0, self.prec)

    # -- comparisons and formatting --------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(self.prec, o.prec)
        m = self.ctx.modulus(prec)
        return (self.a - o.a) % m == 0 and (self.b - o.b) % m == 0

    def __hash__(self):
        return hash((self.a, self.b, self.prec))

    def __str__(self):
        return f"{self.a}+{self.b}*w mod {self.ctx.p}^{self.prec}"

    def __repr__(self):
        return f"<{self}>"
