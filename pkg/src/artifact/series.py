"""Dense truncated power series over the quadratic unramified ring, and
exact integer polynomials for the torsion machinery.

A TruncatedSeries holds coefficients of 1, X, ..., X^D as a pair of numpy
vectors (the a + b*w coordinates), stored modulo p^cap together with a
denominator exponent e >= 0: the true series is pi^{-e} times the stored
one, and its coefficients are known to absolute precision cap - e digits.
Multiplication adds denominator exponents and takes the minimum cap, which
keeps the invariant automatically; every result is canonicalized by
stripping the largest common power of p out of the stored coefficients, so
denominator exponents never drift above their true values.

ExactPolynomial is the unbounded-precision companion: plain integer
coefficients in a sparse dict, used for the distinguished polynomials whose
integrality is itself an assertion target.
"""

from __future__ import annotations

import re

import numpy as np

from .padic import PrimeContext, UnramifiedElement
from .polypack import qpoly_mul_mod

__all__ = [
    "capmax",
    "work_prec",
    "ExactPolynomial",
    "TruncatedSeries",
]


def capmax(p: int) -> int:
    """Largest c with p^c below the packed-multiplication modulus bound."""
    c, m = 0, 1
    while m * p < (1 << 32):
        m *= p
        c += 1
    return c


def work_prec(p: int, N: int, pad: int = 8) -> int:
    """Internal digit count used to certify N digits on outputs."""
    return min(N + pad, capmax(p))


# ---------------------------------------------------------------------------
# exact polynomials
# ---------------------------------------------------------------------------


class ExactPolynomial:
    """Sparse polynomial with exact integer coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs: dict[int, int] | None = None):
        self.c = {k: v for k, v in (coeffs or {}).items() if v != 0}

    @classmethod
    def x(cls) -> "ExactPolynomial":
        return cls({1: 1})

    @classmethod
    def const(cls, v: int) -> "ExactPolynomial":
        return cls({0: v})

    def degree(self) -> int:
        return max(self.c, default=-1)

    def coeff(self, k: int) -> int:
        return self.c.get(k, 0)

    def is_monic(self) -> bool:
        d = self.degree()
        return d >= 0 and self.c[d] == 1

    def __add__(self, other):
        if isinstance(other, int):
            other = ExactPolynomial.const(other)
        out = dict(self.c)
        for k, v in other.c.items():
            out[k] = out.get(k, 0) + v
        return ExactPolynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return ExactPolynomial({k: -v for k, v in self.c.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = ExactPolynomial.const(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return ExactPolynomial({k: v * other for k, v in self.c.items()})
        out: dict[int, int] = {}
        for k1, v1 in self.c.items():
            for k2, v2 in other.c.items():
                k = k1 + k2
                out[k] = out.get(k, 0) + v1 * v2
        return ExactPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        result = ExactPolynomial.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = ExactPolynomial.const(other)
        return self.c == other.c

    def __hash__(self):
        return hash(frozenset(self.c.items()))

    def compose(self, inner: "ExactPolynomial") -> "ExactPolynomial":
        """Substitute inner for the variable (Horner over sparse support)."""
        result = ExactPolynomial.const(0)
        prev_k = None
        for k in sorted(self.c, reverse=True):
            if prev_k is None:
                result = ExactPolynomial.const(self.c[k])
            else:
                result = result * inner ** (prev_k - k) + self.c[k]
            prev_k = k
        if prev_k is not None and prev_k > 0:
            result = result * inner**prev_k
        return result

    def derivative(self) -> "ExactPolynomial":
        return ExactPolynomial({k - 1: k * v for k, v in self.c.items() if k >= 1})

    def evaluate_int(self, x: int, m: int | None = None) -> int:
        """Value at an integer, optionally mod m."""
        total = 0
        for k, v in self.c.items():
            term = v * pow(x, k, m) if m else v * x**k
            total += term
        return total % m if m else total

    def is_eisenstein(self, p: int) -> bool:
        """Monic, all lower coefficients divisible by p, constant not by p^2."""
        d = self.degree()
        if d < 1 or self.c.get(d) != 1:
            return False
        if any(v % p for k, v in self.c.items() if k < d):
            return False
        return self.coeff(0) % (p * p) != 0

    def dense_arrays(self, m: int, length: int | None = None) -> np.ndarray:
        """Dense int64 coefficient vector reduced mod m."""
        n = (self.degree() + 1) if length is None else length
        out = np.zeros(max(n, 1), dtype=np.int64)
        for k, v in self.c.items():
            if k < len(out):
                out[k] = v % m
        return out

    def __str__(self):
        if not self.c:
            return "0"
        parts = []
        for k in sorted(self.c):
            v = self.c[k]
            if k == 0:
                parts.append(f"{v}")
            elif k == 1:
                parts.append(f"{v}*Y" if v != 1 else "Y")
            else:
                parts.append(f"{v}*Y^{k}" if v != 1 else f"Y^{k}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):  # pragma: no cover
        return f"ExactPolynomial({self.c!r})"


# ---------------------------------------------------------------------------
# truncated series
# ---------------------------------------------------------------------------


def _balanced(v: int, m: int) -> int:
    return v - m if v > m // 2 else v


class TruncatedSeries:
    """Series known modulo X^{D+1}, coefficients pi^{-e} * (stored mod p^cap).

    Attributes:
        ctx: base PrimeContext.
        D: truncation degree (coefficients 0..D are tracked).
        e: denominator exponent (true = pi^{-e} * stored).
        cap: stored coefficients live mod p^cap; true coefficients carry
            cap - e certified digits.
        exact_tail: True when the mathematical object has no terms beyond D
            (a polynomial), so evaluation needs no tail estimate.
    """

    __slots__ = ("ctx", "D", "e", "cap", "a", "b", "exact_tail")

    def __init__(self, ctx, D, a, b, e=0, cap=None, exact_tail=False, _norm=True):
        self.ctx = ctx
        self.D = D
        self.e = e
        self.cap = min(cap if cap is not None else work_prec(ctx.p, ctx.N), capmax(ctx.p))
        if self.cap <= self.e:
            raise ValueError(f"no certified digits left (cap={self.cap}, e={self.e})")
        m = ctx.p ** self.cap
        self.a = np.asarray(a, dtype=np.int64) % m
        self.b = np.asarray(b, dtype=np.int64) % m
        if len(self.a) != D + 1 or len(self.b) != D + 1:
            raise ValueError("coefficient vectors must have length D+1")
        self.exact_tail = exact_tail
        if _norm:
            self._normalize()

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_pairs(cls, ctx, pairs, D, e=0, cap=None, exact_tail=False):
        """Build from a list of (a, b) pairs or plain ints, padded to D."""
        a = np.zeros(D + 1, dtype=np.int64)
        b = np.zeros(D + 1, dtype=np.int64)
        m = ctx.p ** min(cap if cap is not None else work_prec(ctx.p, ctx.N), capmax(ctx.p))
        for k, cv in enumerate(pairs[: D + 1]):
            if isinstance(cv, tuple):
                a[k], b[k] = cv[0] % m, cv[1] % m
            else:
                a[k] = cv % m
        return cls(ctx, D, a, b, e=e, cap=cap, exact_tail=exact_tail)

    @classmethod
    def zero(cls, ctx, D, cap=None):
        z = np.zeros(D + 1, dtype=np.int64)
        return cls(ctx, D, z, z.copy(), cap=cap, exact_tail=True)

    @classmethod
    def x(cls, ctx, D, cap=None):
        return cls.from_pairs(ctx, [0, 1], D, cap=cap, exact_tail=True)

    @classmethod
    def from_polynomial(cls, poly: ExactPolynomial, ctx, D, cap=None):
        """Reduce an exact polynomial; exact_tail iff nothing beyond D."""
        capv = min(cap if cap is not None else work_prec(ctx.p, ctx.N), capmax(ctx.p))
        m = ctx.p ** capv
        a = np.zeros(D + 1, dtype=np.int64)
        for k, v in poly.c.items():
            if k <= D:
                a[k] = v % m
        return cls(ctx, D, a, np.zeros(D + 1, dtype=np.int64), cap=capv,
                   exact_tail=poly.degree() <= D)

    # -- internals --------------------------------------------------------

    def _normalize(self):
        """Strip common powers of p from storage into the denominator."""
        if self.e == 0:
            return
        p = self.ctx.p
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
            if k % 2:
                m = p ** self.cap
                self.a = (-self.a) % m
                self.b = (-self.b) % m

    def tprec(self) -> int:
        """Certified absolute digits of the true coefficients."""
        return self.cap - self.e

    def _stored_degree(self) -> int:
        """Index of the highest nonzero stored coefficient, -1 if none."""
        nz = np.nonzero(self.a | self.b)[0]
        return int(nz[-1]) if len(nz) else -1

    def modulus(self) -> int:
        return self.ctx.p ** self.cap

    def coeff(self, k: int) -> tuple[int, int, int]:
        """Stored coordinates and the denominator: (a, b, e)."""
        return int(self.a[k]), int(self.b[k]), self.e

    def coeff_element(self, k: int) -> UnramifiedElement:
        """Coefficient k as a base element; requires it to be integral."""
        a, b, e = self.coeff(k)
        pe = self.ctx.p ** e
        if a % pe or b % pe:
            raise ValueError(f"coefficient of X^{k} is not integral")
        sign = -1 if e % 2 else 1
        prec = min(self.tprec(), self.ctx.N)
        return UnramifiedElement(self.ctx, sign * (a // pe), sign * (b // pe), prec)

    def is_integral(self) -> bool:
        pe = self.ctx.p ** self.e
        return bool(((self.a % pe) == 0).all() and ((self.b % pe) == 0).all())

    # -- ring operations --------------------------------------------------

    def _align(self, other):
        if self.ctx is not other.ctx:
            raise ValueError("mixing series from different contexts")
        e = max(self.e, other.e)

        def scaled(s):
            d = e - s.e
            if d == 0:
                return s.a, s.b, s.cap
            f = (-s.ctx.p) ** d
            cap = min(s.cap + d, capmax(s.ctx.p))
            m = s.ctx.p ** cap
            return (s.a * f) % m, (s.b * f) % m, cap

        a1, b1, c1 = scaled(self)
        a2, b2, c2 = scaled(other)
        return e, min(c1, c2), (a1, b1), (a2, b2)

    def __add__(self, other):
        if isinstance(other, (int, UnramifiedElement)):
            other = _const_like(self, other)
        D = min(self.D, other.D)
        e, cap, (a1, b1), (a2, b2) = self._align(other)
        m = self.ctx.p ** cap
        return TruncatedSeries(
            self.ctx, D, (a1[: D + 1] + a2[: D + 1]) % m,
            (b1[: D + 1] + b2[: D + 1]) % m, e=e, cap=cap,
            exact_tail=self.exact_tail and other.exact_tail and self.D == other.D,
        )

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.ctx, self.D, -self.a, -self.b, e=self.e,
                               cap=self.cap, exact_tail=self.exact_tail, _norm=False)

    def __sub__(self, other):
        if isinstance(other, (int, UnramifiedElement)):
            other = _const_like(self, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, UnramifiedElement)):
            return self.scale(other)
        if self.ctx is not other.ctx:
            raise ValueError("mixing series from different contexts")
        D = min(self.D, other.D)
        cap = min(self.cap, other.cap)
        m = self.ctx.p ** cap
        a, b = qpoly_mul_mod(self.a % m, self.b % m, other.a % m, other.b % m,
                             self.ctx.r, m)
        tail = False
        if self.exact_tail and other.exact_tail:
            # compare true stored degrees, not truncation windows
            d1 = self._stored_degree()
            d2 = other._stored_degree()
            tail = d1 < 0 or d2 < 0 or d1 + d2 <= D
        return TruncatedSeries(
            self.ctx, D, a[: D + 1], b[: D + 1], e=self.e + other.e, cap=cap,
            exact_tail=tail,
        )

    __rmul__ = __mul__

    def scale(self, c) -> "TruncatedSeries":
        m = self.modulus()
        mm = np.uint64(m)
        au = self.a.astype(np.uint64)
        bu = self.b.astype(np.uint64)
        if isinstance(c, int):
            cu = np.uint64(c % m)
            a = ((au * cu) % mm).astype(np.int64)
            b = ((bu * cu) % mm).astype(np.int64)
            return TruncatedSeries(self.ctx, self.D, a, b, e=self.e, cap=self.cap,
                                   exact_tail=self.exact_tail)
        # general element: multiply coordinatewise in the quadratic ring
        ca, cb = np.uint64(c.a % m), np.uint64(c.b % m)
        ru = np.uint64(self.ctx.r % m)
        a = ((au * ca) % mm + ((bu * cb) % mm) * ru % mm) % mm
        b = ((au * cb) % mm + (bu * ca) % mm) % mm
        cap = min(self.cap, c.prec)
        return TruncatedSeries(self.ctx, self.D, a.astype(np.int64),
                               b.astype(np.int64), e=self.e, cap=cap,
                               exact_tail=self.exact_tail)

    def pi_shift(self, j: int) -> "TruncatedSeries":
        """Multiply the true series by pi^j (j may be negative)."""
        if j >= 0:
            f = (-self.ctx.p) ** j
            m = self.ctx.p ** min(self.cap + min(j, self.e), capmax(self.ctx.p))
            s = TruncatedSeries(self.ctx, self.D, (self.a * f) % m, (self.b * f) % m,
                                e=self.e, cap=min(self.cap + min(j, self.e),
                                                  capmax(self.ctx.p)),
                                exact_tail=self.exact_tail)
            return s
        return TruncatedSeries(self.ctx, self.D, self.a, self.b, e=self.e - j,
                               cap=self.cap, exact_tail=self.exact_tail, _norm=False)

    def truncate(self, D: int) -> "TruncatedSeries":
        if D >= self.D:
            return self
        return TruncatedSeries(self.ctx, D, self.a[: D + 1], self.b[: D + 1],
                               e=self.e, cap=self.cap, exact_tail=False, _norm=False)

    def derivative(self) -> "TruncatedSeries":
        ks = np.arange(1, self.D + 1, dtype=np.int64)
        m = self.modulus()
        a = np.zeros(self.D + 1, dtype=np.int64)
        b = np.zeros(self.D + 1, dtype=np.int64)
        a[: self.D] = (self.a[1:] * ks) % m
        b[: self.D] = (self.b[1:] * ks) % m
        return TruncatedSeries(self.ctx, self.D, a, b, e=self.e, cap=self.cap,
                               exact_tail=self.exact_tail)

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """self(inner); inner must have zero constant term."""
        if int(inner.a[0]) or int(inner.b[0]):
            raise ValueError("composition needs inner(0) = 0")
        D = min(self.D, inner.D)
        result = _const_like(inner.truncate(D), 0)
        for k in range(D, -1, -1):
            ck = _const_pair(self, k)
            result = result * inner.truncate(D) + ck
        return result

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; the true constant term must be a unit.

        Fixed-modulus Newton with each iterate re-expanded to the starting
        cap (the iteration damps p-adic perturbation quadratically); one
        honest final residual at the tracked precision is the certificate.
        """
        a0, b0, e = self.coeff(0)
        pe = self.ctx.p ** e
        if a0 % pe or b0 % pe:
            raise ValueError("constant term is not a unit")
        c0 = self.coeff_element(0)
        if c0.valuation() != 0:
            raise ValueError("constant term is not a unit")
        cap0 = self.cap
        y = _const_like(self, c0.inverse())
        for _ in range(max(1, self.D.bit_length() + 6)):
            y2 = y * (2 - self * y)
            if y2.cap < cap0:
                y2 = TruncatedSeries(self.ctx, self.D, y2.a, y2.b, e=y2.e,
                                     cap=cap0, _norm=False)
            if (y2.e == y.e and y2.cap == y.cap
                    and (y2.a == y.a).all() and (y2.b == y.b).all()):
                break
            y = y2
        resid = self * y - 1
        if not resid.agrees_with(TruncatedSeries.zero(self.ctx, self.D),
                                 resid.tprec()):
            raise ArithmeticError("series inverse residual fails to vanish")
        return y

    def revert(self) -> "TruncatedSeries":
        """Compositional inverse of a series with g(0)=0 and unit g'(0).

        Newton iteration at a fixed storage modulus: each step divides by
        powers of pi, which would debit the conservative precision ledger,
        but the iteration is self-correcting (perturbations are damped
        quadratically), so intermediate iterates are re-expanded to the
        original cap and the caller certifies the result by composing back.
        """
        if int(self.a[0]) or int(self.b[0]):
            raise ValueError("reversion needs g(0) = 0")
        g1 = self.coeff_element(1)
        if g1.valuation() != 0:
            raise ValueError("reversion needs unit linear coefficient")
        cap0 = self.cap
        x = TruncatedSeries.x(self.ctx, self.D, cap=cap0)
        h = x.scale(g1.inverse())
        for _ in range(max(1, self.D.bit_length() + 4)):
            gh = self.compose(h)
            err = gh - x
            if _is_zero_arrays(err):
                break
            dgh = self.derivative().compose(h)
            h = h - err * dgh.inverse()
            if h.cap < cap0:
                h = TruncatedSeries(self.ctx, self.D, h.a, h.b, e=h.e,
                                    cap=cap0, _norm=False)
        return h

    # -- evaluation -------------------------------------------------------

    def evaluate(self, x: UnramifiedElement) -> UnramifiedElement:
        """Value at a base element with positive valuation.

        The stored polynomial is evaluated by Horner and the denominator is
        divided out at the end, so intermediate products stay integral.
        Only the truncated part is summed; tail control is the caller's
        business (exact_tail means there is none).
        """
        if x.valuation() == 0 and not x.is_zero():
            raise ValueError("evaluation wants v(x) > 0")
        ctx = self.ctx
        acc = ctx.zero()
        for k in range(self.D, -1, -1):
            c = UnramifiedElement(ctx, int(self.a[k]), int(self.b[k]),
                                  min(self.cap, ctx.N))
            acc = acc * x + c
        if self.e:
            # true value is pi^{-e} * stored = (-1)^e stored / p^e
            acc = acc.shift_down(self.e)
            if self.e % 2:
                acc = -acc
        return acc

    # -- comparisons and formatting ---------------------------------------

    def agrees_with(self, other: "TruncatedSeries", digits: int) -> bool:
        """All true coefficients agree to the given absolute precision."""
        D = min(self.D, other.D)
        e, cap, (a1, b1), (a2, b2) = self._align(other)
        k = min(digits + e, cap)
        m = self.ctx.p ** k
        return bool((((a1[: D + 1] - a2[: D + 1]) % m) == 0).all()
                    and (((b1[: D + 1] - b2[: D + 1]) % m) == 0).all())

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.agrees_with(other, min(self.tprec(), other.tprec()))

    def __str__(self):
        body = []
        m = self.modulus()
        for k in range(self.D + 1):
            a, b = int(self.a[k]), int(self.b[k])
            if a == 0 and b == 0:
                continue
            if b == 0:
                cs = str(_balanced(a, m))
            else:
                cs = f"({a}+{b}*w)"
            if k == 0:
                body.append(cs)
            elif k == 1:
                body.append("X" if cs == "1" else f"{cs}*X")
            else:
                body.append(f"X^{k}" if cs == "1" else f"{cs}*X^{k}")
        s = " + ".join(body).replace("+ -", "- ") if body else "0"
        if self.e:
            return f"pi^-{self.e} * ({s})"
        return s

    def __repr__(self):  # pragma: no cover
        return f"<series D={self.D} e={self.e} cap={self.cap}: {self}>"


def _const_like(s: TruncatedSeries, v) -> TruncatedSeries:
    a = np.zeros(s.D + 1, dtype=np.int64)
    b = np.zeros(s.D + 1, dtype=np.int64)
    if isinstance(v, UnramifiedElement):
        a[0], b[0] = v.a, v.b
        cap = min(s.cap, v.prec)
    else:
        a[0] = v
        cap = s.cap
    return TruncatedSeries(s.ctx, s.D, a, b, e=0, cap=cap, exact_tail=True)


def _const_pair(s: TruncatedSeries, k: int) -> TruncatedSeries:
    """Coefficient k of s as a constant series carrying s's denominator."""
    a = np.zeros(s.D + 1, dtype=np.int64)
    b = np.zeros(s.D + 1, dtype=np.int64)
    a[0], b[0] = s.a[k], s.b[k]
    return TruncatedSeries(s.ctx, s.D, a, b, e=s.e, cap=s.cap, exact_tail=True)


def _is_zero_arrays(s: TruncatedSeries) -> bool:
    return bool((s.a == 0).all() and (s.b == 0).all())


# ---------------------------------------------------------------------------
# literals
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(
    r"""^\s*(?:
        (?P<coef>\((?P<elt>[^()]*)\)|[+-]?\d+)\s*(?:\*\s*)?
        )?
        (?P<var>X)?\s*(?:\^\s*(?P<exp>\d+))?\s*$""",
    re.VERBOSE,
)

_PREFIX_RE = re.compile(r"^\s*pi\^-(?P<e>\d+)\s*\*\s*\((?P<body>.*)\)\s*$", re.DOTALL)


def parse_series(ctx: PrimeContext, text: str, D: int | None = None,
                 cap: int | None = None) -> TruncatedSeries:
    """Parse a series literal like "1 + 2*X + (2+1*w)*X^3".

    Terms are separated by top-level + and -; each term is an optional
    coefficient (integer, or a parenthesized element literal) times an
    optional power of X.  A prefix "pi^-e * ( ... )" sets the denominator
    exponent.  D defaults to the highest exponent present.
    """
    e = 0
    mpref = _PREFIX_RE.match(text)
    if mpref:
        e = int(mpref.group("e"))
        text = mpref.group("body")

    terms: list[tuple[int, str]] = []  # (sign, chunk)
    depth, start, sign = 0, 0, 1
    chunks: list[tuple[int, str]] = []
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            prev = text[start:i].strip()
            if prev and not prev.endswith(("*", "^", "+", "-")):
                chunks.append((sign, prev))
                sign = 1 if ch == "+" else -1
                start = i + 1
    chunks.append((sign, text[start:].strip()))

    parsed: list[tuple[int, tuple[int, int]]] = []
    maxdeg = 0
    for sg, chunk in chunks:
        chunk = chunk.strip()
        if chunk.startswith("-"):
            sg, chunk = -sg, chunk[1:].strip()
        elif chunk.startswith("+"):
            chunk = chunk[1:].strip()
        m = _TERM_RE.match(chunk)
        if not m or (m.group("coef") is None and m.group("var") is None):
            raise ValueError(f"cannot parse series term: {chunk!r}")
        if m.group("elt") is not None:
            el = ctx.parse(m.group("elt"))
            ca, cb = el.a, el.b
        elif m.group("coef") is not None:
            ca, cb = int(m.group("coef")), 0
        else:
            ca, cb = 1, 0
        if m.group("var"):
            k = int(m.group("exp") or 1)
        else:
            if m.group("exp") is not None:
                raise ValueError(f"exponent without variable: {chunk!r}")
            k = 0
        parsed.append((k, (sg * ca, sg * cb)))
        maxdeg = max(maxdeg, k)
    terms = parsed

    Dv = maxdeg if D is None else D
    a = np.zeros(Dv + 1, dtype=np.int64)
    b = np.zeros(Dv + 1, dtype=np.int64)
    capv = min(cap if cap is not None else work_prec(ctx.p, ctx.N), capmax(ctx.p))
    m = ctx.p ** capv
    for k, (ca, cb) in terms:
        if k <= Dv:
            a[k] = (a[k] + ca) % m
            b[k] = (b[k] + cb) % m
    return TruncatedSeries(ctx, Dv, a, b, e=e, cap=capv)
