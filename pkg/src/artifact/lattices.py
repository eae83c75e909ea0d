"""Index-p overlattice combinatorics for the two-variable torsion model.

The ambient object is the quotient (p^{-k}T)/T of a rank-2 module with
distinguished basis (t, omega t), where omega generates the unramified
quadratic extension.  Level-s lattices T_s = p^{-s}Z_p t + T become cyclic
subgroups of (Z/p^k)^2; the index-p overlattices of T_s split into p
lattices of type A (indexed by a residue a) and a single type B lattice
whose p-scaling recovers the level-(s-1) lattice.  Unit classes 1 + c p^s
omega permute the type A family simply transitively and fix type B, while
scalar classes 1 + c p^s fix everything, which is the combinatorial core of
the Hecke identity T_p x_s = (sum of conjugates) x_{s+1} + x_{s-1}.

All computation is exact finite group theory: subgroups are held in Hermite
normal form and compared by canonical key.
"""

from __future__ import annotations

from math import gcd

from .modular import legendre

__all__ = [
    "Subgroup",
    "classify_overlattice",
    "enumerate_overlattices",
    "galois_transitivity_check",
    "hecke_identity",
    "inclusion_chain_check",
    "stability_check",
    "torsion_model",
    "type_a_model",
    "type_b_model",
]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


class Subgroup:
    """Subgroup of (Z/m)^2 in Hermite form: rows (a, b) and (0, c).

    a and c divide m, 0 <= b < c, and the form is the unique canonical
    representative, so equality of subgroups is equality of keys.
    """

    __slots__ = ("m", "a", "b", "c")

    def __init__(self, m: int, gens: list[tuple[int, int]]):
        self.m = m
        vecs = [(x % m, y % m) for x, y in gens] + [(m, 0), (0, m)]
        a, b = 0, 0
        ys = []
        for x, y in vecs:
            if x == 0:
                ys.append(y)
            elif a == 0:
                a, b = x, y
            else:
                g, u, v = _xgcd(a, x)
                ys.append((x // g) * b - (a // g) * y)
                a, b = g, u * b + v * y
        c = m
        for y in ys:
            c = gcd(c, y % m)
        if c == 0:
            c = m
        self.a, self.b, self.c = a, b % c, c

    @property
    def order(self) -> int:
        return (self.m // self.a) * (self.m // self.c)

    def key(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def contains(self, v: tuple[int, int]) -> bool:
        x, y = v[0] % self.m, v[1] % self.m
        return x % self.a == 0 and (y - (x // self.a) * self.b) % self.c == 0

    def contains_subgroup(self, other: "Subgroup") -> bool:
        if self.m != other.m:
            raise ValueError("modulus mismatch")
        return self.contains((other.a, other.b)) and self.contains((0, other.c))

    def transform(self, mat: tuple[int, int, int, int]) -> "Subgroup":
        """Image under the integer matrix [[m00, m01], [m10, m11]]."""
        m00, m01, m10, m11 = mat
        imgs = []
        for x, y in ((self.a, self.b), (0, self.c)):
            imgs.append((m00 * x + m01 * y, m10 * x + m11 * y))
        return Subgroup(self.m, imgs)

    def scale(self, n: int) -> "Subgroup":
        return self.transform((n, 0, 0, n))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Subgroup)
            and self.m == other.m
            and self.key() == other.key()
        )

    def __hash__(self) -> int:
        return hash((self.m, self.key()))

    def __repr__(self) -> str:
        return f"Subgroup(m={self.m}, rows=({self.a},{self.b}),(0,{self.c}))"


def _mult_matrix(x: int, y: int, nonresidue: int) -> tuple[int, int, int, int]:
    """Matrix of multiplication by x + y*omega on the basis (t, omega t)."""
    return (x, y * nonresidue, y, x)


def _nonresidue(p: int) -> int:
    for n in range(2, p):
        if legendre(n, p) == -1:
            return n
    raise ValueError(f"no quadratic non-residue mod {p}")


def torsion_model(p: int, s: int, k: int) -> Subgroup:
    """The level-s lattice T_s = p^{-s}Z_p t + T inside (p^{-k}T)/T."""
    if s < 0 or k < s:
        raise ValueError(f"need 0 <= s <= k, got s={s}, k={k}")
    return Subgroup(p**k, [(p ** (k - s), 0)])


def type_a_model(p: int, s: int, k: int, a: int) -> Subgroup:
    """Type A overlattice: adjoin p^{-(s+1)}t + a p^{-1} omega t to T_s."""
    return Subgroup(p**k, [(p ** (k - s - 1), a * p ** (k - 1)), (p ** (k - s), 0)])


def type_b_model(p: int, s: int, k: int) -> Subgroup:
    """Type B overlattice p^{-s}Z_p t + p^{-1}T."""
    return Subgroup(p**k, [(p ** (k - s), 0), (0, p ** (k - 1))])


def enumerate_overlattices(p: int, s: int, k: int | None = None) -> list[Subgroup]:
    """All subgroups containing the T_s model with index exactly p.

    Found by brute force: every vector whose p-multiple lands in T_s is
    adjoined, the resulting subgroups are deduplicated by Hermite key, and
    those of the right order are returned in key order.  There are always
    exactly p + 1.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if k is None:
        k = s + 2
    if k < s + 2:
        raise ValueError(f"working level k={k} too small for s={s}")
    m = p**k
    base = torsion_model(p, s, k)
    found: dict[tuple[int, int, int], Subgroup] = {}
    # preimage of T_s under multiplication by p: x = 0 mod p^{k-s-1}, y = 0 mod p^{k-1}
    for i in range(p ** (s + 1)):
        for j in range(p):
            v = (i * p ** (k - s - 1) % m, j * p ** (k - 1) % m)
            L = Subgroup(m, [(base.a, base.b), (0, base.c), v])
            if L.order == p * base.order:
                found.setdefault(L.key(), L)
    out = [found[key] for key in sorted(found)]
    if len(out) != p + 1:
        raise ArithmeticError(f"expected {p + 1} overlattices, found {len(out)}")
    for L in out:
        if not L.contains_subgroup(base):
            raise ArithmeticError("overlattice fails to contain the base")
    return out


def classify_overlattice(p: int, s: int, L: Subgroup, k: int | None = None) -> dict:
    """Tag an index-p overlattice of T_s as TypeA(a) or TypeB.

    Type B comes with its witness: scaling by p gives back the T_{s-1}
    model exactly.  Anything unclassifiable signals a model bug.
    """
    if k is None:
        k = s + 2
    for a in range(p):
        if L == type_a_model(p, s, k, a):
            return {"type": "A", "a": a}
    if L == type_b_model(p, s, k):
        lower = torsion_model(p, s - 1, k)
        if L.scale(p) != lower:
            raise ArithmeticError("type B scaling witness failed")
        return {"type": "B", "p_scaling_equals_lower_level": True}
    raise ArithmeticError(f"unclassifiable overlattice {L!r}")


def inclusion_chain_check(p: int, s: int, k: int | None = None) -> dict:
    """T_{s-1} < T_s < T_{s+1}, each inclusion of index p, inside one model."""
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if k is None:
        k = s + 2
    lo = torsion_model(p, s - 1, k)
    mid = torsion_model(p, s, k)
    hi = torsion_model(p, s + 1, k)
    ok = (
        mid.contains_subgroup(lo)
        and hi.contains_subgroup(mid)
        and mid.order == p * lo.order
        and hi.order == p * mid.order
        and mid.order == p**s
    )
    return {"p": p, "s": s, "k": k, "chain_ok": ok}


def galois_transitivity_check(
    p: int, s: int, k: int | None = None, nonresidue: int | None = None
) -> dict:
    """Unit classes 1 + c p^s omega permute the type A family, fix type B.

    The action is multiplication on the (t, omega t) basis, omega^2 being a
    fixed quadratic non-residue.  The permutation realized is a -> a + c,
    so the family of p units acts simply transitively on the p type A
    lattices; scalar classes 1 + c p^s (no omega part) fix every
    overlattice, which isolates the omega direction as the moving one.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    if k is None:
        k = s + 2
    if nonresidue is None:
        nonresidue = _nonresidue(p)
    lats = enumerate_overlattices(p, s, k)
    tags = [classify_overlattice(p, s, L, k) for L in lats]
    a_lats = {t["a"]: L for L, t in zip(lats, tags) if t["type"] == "A"}
    b_lat = next(L for L, t in zip(lats, tags) if t["type"] == "B")

    shifts = []
    for c in range(p):
        mat = _mult_matrix(1, c * p**s, nonresidue)
        images = {a: a_lats[a].transform(mat) for a in a_lats}
        shift = None
        for a, img in images.items():
            match = [a2 for a2, L2 in a_lats.items() if L2 == img]
            if len(match) != 1:
                raise ArithmeticError("unit image is not a type A lattice")
            delta = (match[0] - a) % p
            if shift is None:
                shift = delta
            elif shift != delta:
                raise ArithmeticError("unit action is not a uniform shift")
        if b_lat.transform(mat) != b_lat:
            raise ArithmeticError("type B moved by a unit")
        shifts.append(shift)

    scalars_trivial = True
    for c in range(p):
        mat = _mult_matrix(1 + c * p**s, 0, nonresidue)
        if any(a_lats[a].transform(mat) != a_lats[a] for a in a_lats):
            scalars_trivial = False
        if b_lat.transform(mat) != b_lat:
            scalars_trivial = False

    simply_transitive = sorted(shifts) == list(range(p))
    orbit_of_a0 = [(c, shifts[c]) for c in range(p)]
    if not simply_transitive:
        raise ArithmeticError(f"shifts {shifts} are not simply transitive")
    return {
        "p": p,
        "s": s,
        "k": k,
        "unit_family": "1 + c p^s omega",
        "shifts": shifts,
        "orbit_of_a0": orbit_of_a0,
        "simply_transitive": simply_transitive,
        "type_b_fixed": True,
        "scalar_action_trivial": scalars_trivial,
    }


def hecke_identity(p: int, s: int) -> dict:
    """The overlattice count as a labeled identity.

    The p + 1 index-p overlattices of T_s split as p type A lattices (the
    conjugates of the level-(s+1) label) plus one type B lattice (the
    level-(s-1) label), which is the content of
    T_p x_s = (sigma_0 + ... + sigma_{p-1}) x_{s+1} + x_{s-1}.
    """
    if s < 1:
        raise ValueError(f"s must be >= 1 (the level-0 boundary is handled by the trace relations), got {s}")
    k = s + 2
    lats = enumerate_overlattices(p, s, k)
    tags = [classify_overlattice(p, s, L, k) for L in lats]
    n_a = sum(1 for t in tags if t["type"] == "A")
    n_b = sum(1 for t in tags if t["type"] == "B")
    if (n_a, n_b) != (p, 1):
        raise ArithmeticError(f"classification counts ({n_a}, {n_b}) wrong")
    summands = []
    for L, t in zip(lats, tags):
        if t["type"] == "A":
            summands.append(
                {"label": f"sigma_{t['a']} x_{s + 1}", "type": "A", "a": t["a"], "lattice": L.key()}
            )
        else:
            summands.append({"label": f"x_{s - 1}", "type": "B", "lattice": L.key()})
    sigma_sum = " + ".join(f"sigma_{a}" for a in range(p))
    return {
        "p": p,
        "s": s,
        "identity": f"T_p x_{s} = ({sigma_sum}) x_{s + 1} + x_{s - 1}",
        "type_a_count": n_a,
        "type_b_count": n_b,
        "summands": summands,
    }


def stability_check(p: int, s: int) -> dict:
    """Classification is unchanged when the working level k grows by one."""
    results = {}
    for k in (s + 2, s + 3):
        lats = enumerate_overlattices(p, s, k)
        tags = [classify_overlattice(p, s, L, k) for L in lats]
        labels = sorted(f"A{t['a']}" if t["type"] == "A" else "B" for t in tags)
        trans = galois_transitivity_check(p, s, k)
        results[k] = {"labels": labels, "shifts": trans["shifts"]}
    ks = sorted(results)
    stable = results[ks[0]] == results[ks[1]]
    if not stable:
        raise ArithmeticError(f"classification unstable between k={ks[0]} and k={ks[1]}")
    return {"p": p, "s": s, "levels": ks, "stable": stable, "labels": results[ks[0]]["labels"]}
