"""Tate cohomology orders and Herbrand quotients for cyclic group actions.

A finite abelian module is a list of cyclic factor orders; the generator of
a cyclic group of prime-power order acts by an integer matrix taken mod the
factor orders.  The two cohomology orders are

    |H^0-hat| = |M^G| / |N M|        (fixed points over norm image)
    |H^1|     = |ker N| / |(g - 1)M| (norm kernel over augmentation image)

with N the norm endomorphism 1 + g + ... + g^{order-1}.  Orders are exact:
subgroup indexes come from Smith normal form over Z, and a direct
enumeration oracle recomputes everything set-theoretically for small
modules.  The Herbrand quotient of a finite module is always 1, and the
code fails loudly if a computation ever disagrees.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product
from math import gcd, lcm

__all__ = [
    "CyclicAction",
    "brute_cohomology",
    "herbrand",
    "random_action",
    "tate_h0",
    "tate_h1",
]


def _snf_index(mat: list[list[int]], r: int) -> int:
    """Product of invariant factors: the index of the column lattice in Z^r.

    Returns 0 when the columns do not span a finite-index sublattice.
    """
    if r == 0:
        return 1
    m = [row[:] for row in mat]
    cols = len(m[0])
    if cols < r:
        return 0
    det = 1
    for k in range(r):
        while True:
            piv = None
            for i in range(k, r):
                for j in range(k, cols):
                    if m[i][j] != 0 and (piv is None or abs(m[i][j]) < abs(m[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                return 0
            i0, j0 = piv
            m[k], m[i0] = m[i0], m[k]
            for row in m:
                row[k], row[j0] = row[j0], row[k]
            a = m[k][k]
            dirty = False
            for i in range(k + 1, r):
                q = m[i][k] // a
                if q:
                    for j in range(k, cols):
                        m[i][j] -= q * m[k][j]
                if m[i][k]:
                    dirty = True
            for j in range(k + 1, cols):
                q = m[k][j] // a
                if q:
                    for i in range(k, r):
                        m[i][j] -= q * m[i][k]
                if m[k][j]:
                    dirty = True
            if not dirty:
                break
        det *= abs(m[k][k])
    return det


def _mat_mul(A: list[list[int]], B: list[list[int]], mod: int) -> list[list[int]]:
    r = len(A)
    return [
        [sum(A[i][k] * B[k][j] for k in range(r)) % mod for j in range(r)]
        for i in range(r)
    ]


def _mat_pow(A: list[list[int]], e: int, mod: int) -> list[list[int]]:
    r = len(A)
    out = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    base = [[x % mod for x in row] for row in A]
    while e:
        if e & 1:
            out = _mat_mul(out, base, mod)
        base = _mat_mul(base, base, mod)
        e >>= 1
    return out


class CyclicAction:
    """A cyclic group of order group_order acting on a finite abelian module.

    Args:
        group_order: the group order (a prime power in every intended use).
        factors: cyclic factor orders d_1..d_r of the module, each >= 1.
        matrix: integer matrix A with column j the image of the j-th
            generator; must define an endomorphism (d_j A[i][j] = 0 mod d_i)
            whose group_order-th power is the identity.
    """

    def __init__(self, group_order: int, factors: list[int], matrix: list[list[int]]):
        if group_order < 1:
            raise ValueError("group order must be >= 1")
        factors = [int(d) for d in factors if d != 1]
        r = len(factors)
        if any(d < 1 for d in factors):
            raise ValueError("factor orders must be >= 1")
        if r and (len(matrix) != r or any(len(row) != r for row in matrix)):
            raise ValueError(f"matrix must be {r}x{r}")
        self.group_order = group_order
        self.factors = factors
        self.r = r
        self.exponent = lcm(*factors) if factors else 1
        self.matrix = [[matrix[i][j] % factors[i] for j in range(r)] for i in range(r)]
        for i in range(r):
            for j in range(r):
                if (self.matrix[i][j] * factors[j]) % factors[i] != 0:
                    raise ValueError(
                        f"inconsistent action: entry ({i},{j}) does not respect factor orders"
                    )
        power = _mat_pow(self.matrix, group_order, self.exponent)
        for i in range(r):
            for j in range(r):
                want = 1 if i == j else 0
                if (power[i][j] - want) % factors[i] != 0:
                    raise ValueError("inconsistent action: generator power is not the identity")

    @property
    def module_order(self) -> int:
        n = 1
        for d in self.factors:
            n *= d
        return n

    def norm_matrix(self) -> list[list[int]]:
        r, L = self.r, self.exponent
        acc = [[0] * r for _ in range(r)]
        power = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
        for _ in range(self.group_order):
            for i in range(r):
                for j in range(r):
                    acc[i][j] = (acc[i][j] + power[i][j]) % L
            power = _mat_mul(power, self.matrix, L)
        return acc

    def aug_matrix(self) -> list[list[int]]:
        r = self.r
        return [
            [(self.matrix[i][j] - (1 if i == j else 0)) % self.exponent for j in range(r)]
            for i in range(r)
        ]

    def power_generator(self, u: int) -> "CyclicAction":
        """The same module under the generator g^u, gcd(u, group_order) = 1."""
        if gcd(u, self.group_order) != 1:
            raise ValueError(f"{u} does not generate the group")
        mat = _mat_pow(self.matrix, u % self.group_order, self.exponent)
        return CyclicAction(self.group_order, self.factors, mat)

    def apply(self, mat: list[list[int]], v: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(
            sum(mat[i][j] * v[j] for j in range(self.r)) % self.factors[i]
            for i in range(self.r)
        )

    def sub_quotient_pair(self, m: int) -> tuple["CyclicAction", "CyclicAction"]:
        """The stable submodule mM and the quotient M/mM, same matrix.

        mM = sum of m e_i has factor orders d_i / gcd(d_i, m); M/mM has
        factor orders gcd(d_i, m).  Both inherit the action matrix.
        """
        sub = [d // gcd(d, m) for d in self.factors]
        quo = [gcd(d, m) for d in self.factors]
        full = [[self.matrix[i][j] for j in range(self.r)] for i in range(self.r)]
        return (
            CyclicAction(self.group_order, sub, _shrink(full, self.factors, sub)),
            CyclicAction(self.group_order, quo, _shrink(full, self.factors, quo)),
        )


def _shrink(mat: list[list[int]], old: list[int], new: list[int]) -> list[list[int]]:
    """Restrict a matrix to the factor sublist where the new order is > 1."""
    keep = [i for i, d in enumerate(new) if d != 1]
    return [[mat[i][j] for j in keep] for i in keep]


def _cok_order(action: CyclicAction, mat: list[list[int]]) -> int:
    """Order of Z^r / (columns of mat + factor lattice) = |ker(mat on M)|."""
    r = action.r
    if r == 0:
        return 1
    aug = [
        [mat[i][j] for j in range(r)]
        + [action.factors[i] if i == k else 0 for k in range(r)]
        for i in range(r)
    ]
    idx = _snf_index(aug, r)
    if idx == 0:
        raise ArithmeticError("degenerate lattice; factors must be positive")
    return idx


def tate_h0(action: CyclicAction) -> int:
    """|H^0-hat| = |M^G| / |N M|, exact."""
    fixed = _cok_order(action, action.aug_matrix())
    ker_norm = _cok_order(action, action.norm_matrix())
    norm_image = action.module_order // ker_norm
    if fixed % norm_image != 0:
        raise ArithmeticError("norm image does not sit inside the fixed points")
    return fixed // norm_image


def tate_h1(action: CyclicAction) -> int:
    """|H^1| = |ker N| / |(g - 1)M|, exact."""
    ker_norm = _cok_order(action, action.norm_matrix())
    fixed = _cok_order(action, action.aug_matrix())
    aug_image = action.module_order // fixed
    if ker_norm % aug_image != 0:
        raise ArithmeticError("augmentation image does not sit inside the norm kernel")
    return ker_norm // aug_image


def herbrand(action: CyclicAction) -> Fraction:
    """|H^0-hat| / |H^1|; equals 1 on every finite module, checked loudly."""
    h = Fraction(tate_h0(action), tate_h1(action))
    if h != 1:
        raise ArithmeticError(f"Herbrand quotient {h} != 1 on a finite module: computation bug")
    return h


def brute_cohomology(action: CyclicAction, limit: int = 2000) -> tuple[int, int]:
    """Set-theoretic recomputation of (|H^0-hat|, |H^1|) by full enumeration.

    Walks every element of the module (refused above `limit` elements),
    building the fixed-point set, the norm image, the norm kernel, and the
    augmentation image, and checks the two inclusions before dividing.
    """
    size = action.module_order
    if size > limit:
        raise ValueError(f"module of order {size} exceeds enumeration limit {limit}")
    norm = action.norm_matrix()
    gen = action.matrix
    elements = list(product(*[range(d) for d in action.factors]))
    fixed = set()
    norm_image = set()
    norm_kernel = set()
    aug_image = set()
    zero = tuple([0] * action.r)
    for v in elements:
        gv = action.apply(gen, v)
        nv = action.apply(norm, v)
        if gv == v:
            fixed.add(v)
        norm_image.add(nv)
        if nv == zero:
            norm_kernel.add(v)
        aug_image.add(tuple((a - b) % d for a, b, d in zip(gv, v, action.factors)))
    if not norm_image <= fixed:
        raise ArithmeticError("norm image escapes the fixed points")
    if not aug_image <= norm_kernel:
        raise ArithmeticError("augmentation image escapes the norm kernel")
    if len(fixed) % len(norm_image) or len(norm_kernel) % len(aug_image):
        raise ArithmeticError("non-integral quotient in enumeration")
    return len(fixed) // len(norm_image), len(norm_kernel) // len(aug_image)


def random_action(rng: random.Random, p: int, n: int, size_limit: int = 2000) -> CyclicAction:
    """Random valid action of the cyclic group of order p^n, block-diagonal.

    Blocks are drawn from three families: a scalar unit of multiplicative
    order dividing p^n on Z/p^a, the unipotent [[1, 0], [p, 1]] on
    (Z/p^2)^2, and the coordinate shift of order p on (Z/q)^p for a prime
    q != p.  The module order stays at or below size_limit so the
    enumeration oracle can always recheck the result.
    """
    N = p**n
    factors: list[int] = []
    blocks: list[list[list[int]]] = []
    size = 1
    while True:
        kind = rng.choice(["scalar", "unipotent", "shift"])
        if kind == "scalar":
            d = p ** rng.randint(1, 3)
            if size * d > size_limit:
                break
            phi = d // p * (p - 1)
            while True:
                u = rng.randrange(1, d)
                if gcd(u, p) == 1:
                    break
            c = pow(u, phi // gcd(phi, N), d)
            factors.append(d)
            blocks.append([[c]])
            size *= d
        elif kind == "unipotent":
            d = p * p
            if size * d * d > size_limit:
                break
            factors.extend([d, d])
            blocks.append([[1, 0], [p, 1]])
            size *= d * d
        else:
            q = rng.choice([q0 for q0 in (2, 5, 7) if q0 != p])
            if size * q**p > size_limit:
                break
            factors.extend([q] * p)
            blocks.append([[1 if i == (j + 1) % p else 0 for j in range(p)] for i in range(p)])
            size *= q**p
        if rng.random() < 0.35:
            break
    if not factors:
        factors, blocks = [p], [[[1]]]
    r = len(factors)
    big = [[0] * r for _ in range(r)]
    off = 0
    for block in blocks:
        w = len(block)
        for i in range(w):
            for j in range(w):
                big[off + i][off + j] = block[i][j]
        off += w
    return CyclicAction(N, factors, big)
