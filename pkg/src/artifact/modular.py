"""X_0(N) genus arithmetic, the Hurwitz bound chain, and twist-prime search.

Closed formulas for the index mu, the elliptic-point counts eps2/eps3, the
cusp count eps_inf, and the genus, each backed by an independent brute-force
oracle (root counting mod N for elliptic points, orbit enumeration on
P^1(Z/N) for cusps, coset reachability for the level-4 index).  The search
routine streams twist primes congruent to 5 mod 12 and emits candidate
conductors with explicit non-residue and totient evidence.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import NamedTuple

__all__ = [
    "GenusData",
    "cusp_orbit_count",
    "degree_mu",
    "elliptic_root_count",
    "euler_phi",
    "gamma1_4_cover_degree",
    "gamma1_coset_count",
    "genus_x0",
    "legendre",
    "order_argument_violations",
    "ram_bound",
    "search_twist_conductors",
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


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p, in {-1, 0, 1}."""
    a %= p
    if a == 0:
        return 0
    s = pow(a, (p - 1) // 2, p)
    return 1 if s == 1 else -1


def euler_phi(n: int) -> int:
    phi = n
    for p in _prime_factors(n):
        phi = phi // p * (p - 1)
    return phi


def _divisors(n: int) -> list[int]:
    out = [1]
    for p in _prime_factors(n):
        e = 0
        m = n
        while m % p == 0:
            m //= p
            e += 1
        out = [d * p**i for d in out for i in range(e + 1)]
    return sorted(out)


def degree_mu(N: int) -> int:
    """Covering degree mu(N) = N * prod_{p | N} (1 + 1/p)."""
    if N < 1:
        raise ValueError(f"N must be positive, got {N}")
    mu = N
    for p in _prime_factors(N):
        mu = mu // p * (p + 1)
    return mu


def _eps2(N: int) -> int:
    if N % 4 == 0:
        return 0
    count = 1
    for p in _prime_factors(N):
        count *= 1 + (0 if p == 2 else legendre(-1, p))
    return count


def _eps3(N: int) -> int:
    if N % 9 == 0:
        return 0
    count = 1
    for p in _prime_factors(N):
        if p == 2:
            factor = 0  # x^2 + x + 1 is odd, so no roots mod 2
        elif p == 3:
            factor = 1  # the single root x = 1 mod 3 does not lift
        else:
            factor = 1 + legendre(-3, p)
        count *= factor
    return count


def _eps_inf(N: int) -> int:
    return sum(euler_phi(gcd(d, N // d)) for d in _divisors(N))


def elliptic_root_count(N: int, kind: int) -> int:
    """Direct count of x mod N with x^2 + 1 = 0 (kind 2) or x^2 + x + 1 = 0 (kind 3).

    These counts are the elliptic-point numbers of X_0(N); they serve as the
    brute-force oracle for the multiplicative closed forms.
    """
    if kind == 2:
        return sum(1 for x in range(N) if (x * x + 1) % N == 0)
    if kind == 3:
        return sum(1 for x in range(N) if (x * x + x + 1) % N == 0)
    raise ValueError(f"kind must be 2 or 3, got {kind}")


def _p1_classes(N: int) -> list[tuple[int, int]]:
    """Canonical representatives of P^1(Z/N)."""
    units = [u for u in range(1, N) if gcd(u, N) == 1]
    seen: set[tuple[int, int]] = set()
    reps = []
    for c in range(N):
        for d in range(N):
            if gcd(gcd(c, d), N) != 1:
                continue
            if (c, d) in seen:
                continue
            orbit = {((u * c) % N, (u * d) % N) for u in units}
            seen |= orbit
            reps.append(min(orbit))
    return reps


def cusp_orbit_count(N: int) -> int:
    """Number of cusps of X_0(N) by orbit enumeration on P^1(Z/N).

    Cosets of the level subgroup in the modular group are bottom rows
    (c : d) in P^1(Z/N); cusps are their orbits under the stabilizer of
    infinity, generated by the translation (c : d) -> (c : d + c) and the
    sign flip.  This is the independent oracle for the divisor-sum formula.
    """
    if N == 1:
        return 1
    reps = _p1_classes(N)
    units = [u for u in range(1, N) if gcd(u, N) == 1]

    def canon(c: int, d: int) -> tuple[int, int]:
        return min(((u * c) % N, (u * d) % N) for u in units)

    index = {r: i for i, r in enumerate(reps)}
    seen: set[int] = set()
    orbits = 0
    for r in reps:
        i = index[r]
        if i in seen:
            continue
        orbits += 1
        stack = [r]
        while stack:
            c, d = stack.pop()
            j = index[canon(c, d)]
            if j in seen:
                continue
            seen.add(j)
            stack.append((c, (d + c) % N))
            stack.append(((-c) % N, (-d) % N))
    return orbits


class GenusData(NamedTuple):
    N: int
    mu: int
    eps2: int
    eps3: int
    eps_inf: int
    g: int
    ram_bound_strict: Fraction


def genus_x0(N: int) -> GenusData:
    """Genus data of X_0(N) from the standard closed formulas.

    g = 1 + mu/12 - eps2/4 - eps3/3 - eps_inf/2 must come out a
    non-negative integer; the exact rearrangement
    12(g - 1) + 3 eps2 + 4 eps3 + 6 eps_inf = mu is asserted on every call.

    Examples:
        >>> genus_x0(11).g, genus_x0(36).g
        (1, 1)
    """
    mu = degree_mu(N)
    e2, e3, einf = _eps2(N), _eps3(N), _eps_inf(N)
    g_frac = 1 + Fraction(mu, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(einf, 2)
    if g_frac.denominator != 1 or g_frac < 0:
        raise ArithmeticError(f"genus formula gave {g_frac} at N={N}")
    g = int(g_frac)
    if 12 * (g - 1) + 3 * e2 + 4 * e3 + 6 * einf != mu:
        raise ArithmeticError(f"genus identity failed at N={N}")
    bound = Fraction(mu, 6) - Fraction(e2, 2) - Fraction(2 * e3, 3) - einf
    return GenusData(N, mu, e2, e3, einf, g, bound)


def ram_bound(N: int) -> dict:
    """The ramification bound chain 2g - 2 = mu/6 - eps2/2 - 2 eps3/3 - eps_inf.

    Reports the exact rational chain and the strictness certificate
    2g - 2 < mu/6, which holds because eps_inf >= 1 (the cusp at infinity
    always exists).  For g = 0 the bound is trivial and flagged as such.
    """
    data = genus_x0(N)
    two_g_minus_2 = 2 * data.g - 2
    if Fraction(two_g_minus_2) != data.ram_bound_strict:
        raise ArithmeticError(f"bound chain mismatch at N={N}")
    strict = Fraction(two_g_minus_2) < Fraction(data.mu, 6)
    if not strict:
        raise ArithmeticError(f"strict inequality failed at N={N}")
    return {
        "N": N,
        "g": data.g,
        "two_g_minus_2": two_g_minus_2,
        "mu_over_6": Fraction(data.mu, 6),
        "chain": data.ram_bound_strict,
        "strict": strict,
        "strictness_certificate": f"eps_inf = {data.eps_inf} >= 1",
        "trivial": data.g == 0,
    }


def gamma1_coset_count(N: int) -> int:
    """Cosets of the level-N point subgroup by reachability on bottom rows.

    Starting from (0, 1), right multiplication by the two standard
    generators of the modular group reaches every coprime bottom row mod N;
    the reachable count is the subgroup index (sign not quotiented).
    """
    start = (0 % N, 1 % N)
    seen = {start}
    stack = [start]
    while stack:
        c, d = stack.pop()
        # S = [[0,-1],[1,0]]: (c, d) -> (d, -c); T = [[1,1],[0,1]]: (c, d) -> (c, c + d)
        for img in ((d % N, (-c) % N), (c, (c + d) % N)):
            if img not in seen:
                seen.add(img)
                stack.append(img)
    return len(seen)


def gamma1_4_cover_degree() -> dict:
    """Degree of the level-4 point cover: index 12 over the sign, so 6.

    The index formula N^2 prod_{p | N} (1 - 1/p^2) gives 16 * 3/4 = 12 at
    N = 4, cross-checked by coset reachability; the covering degree of the
    curve map halves it since -1 acts trivially.  Fiber size equals the
    degree exactly at unramified points, which is the bookkeeping use here.
    """
    N = 4
    index = N * N
    for p in _prime_factors(N):
        index = index * (p * p - 1) // (p * p)
    enumerated = gamma1_coset_count(N)
    if index != enumerated:
        raise ArithmeticError(f"index formula {index} != coset count {enumerated}")
    degree = index // 2
    if degree < 1:
        raise ArithmeticError("degree must be positive")
    return {
        "degree": degree,
        "index": index,
        "note": "fiber size = degree at unramified points",
    }


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def search_twist_conductors(
    base_conductor: int = 1, count: int = 3, kernel_bound: int | None = None
) -> list[dict]:
    """Stream candidate conductors N = ell^2 * base from twist primes ell.

    Twist primes run through ell = 5 mod 12 (so ell = 2 mod 3, making -3 a
    non-residue mod ell), skipping divisors of the base conductor.  Each
    emitted record carries: the per-prime symbol evidence that -3 is not a
    square mod N (it suffices that one prime-power factor refuses; the
    ell^2 factor always does), the totient phi(N), and the comparison
    against the kernel bound B.

    Args:
        base_conductor: the fixed conductor factor (externally supplied).
        count: how many candidates to emit.
        kernel_bound: B; must be provided by the caller (the curve module
            computes it as the maximal kernel union size).
    """
    if base_conductor < 1:
        raise ValueError("base conductor must be >= 1")
    if kernel_bound is None:
        raise ValueError("kernel bound B required")
    out = []
    ell = 5  # every later candidate is ell + 12k, keeping ell = 5 mod 12
    while len(out) < count:
        if _is_prime(ell) and base_conductor % ell != 0:
            N = ell * ell * base_conductor
            evidence = {}
            nonsquare = False
            for p in _prime_factors(N):
                if p == 2:
                    sym = None
                else:
                    sym = legendre(-3, p)
                evidence[p] = sym
                if sym == -1:
                    nonsquare = True
            if legendre(-3, ell) != -1:
                raise ArithmeticError(f"twist prime {ell} admits -3 as a square")
            # -3 a square mod every odd prime-power factor and mod the 2-part
            # would make it a square mod N; the ell-part refusal settles it
            phi = euler_phi(N)
            record = {
                "ell": ell,
                "N": N,
                "base_conductor": base_conductor,
                "symbol_evidence": evidence,
                "minus3_nonsquare": nonsquare,
                "nonsquare_witness_prime": ell,
                "phi": phi,
                "kernel_bound": kernel_bound,
                "phi_exceeds_bound": phi > kernel_bound,
            }
            if not nonsquare:
                raise ArithmeticError(f"no non-residue witness at N={N}")
            if not record["phi_exceeds_bound"]:
                raise ArithmeticError(f"phi({N}) = {phi} <= B = {kernel_bound}")
            out.append(record)
        ell += 12
    return out


def order_argument_violations(N: int) -> list[int]:
    """All n mod N with n^2 = 1 or n^3 = 1 but n not +-1 (direct scan).

    Empty exactly when every square root and cube root of unity mod N is
    +-1; composite moduli with several prime factors generally fail this,
    while N = ell^2 for a prime ell = 5 mod 12 passes (the unit group is
    cyclic of order ell(ell - 1), indivisible by 3).
    """
    bad = []
    for n in range(N):
        if (n * n) % N == 1 or pow(n, 3, N) == 1:
            if n != 1 % N and n != (N - 1) % N:
                bad.append(n)
    return bad
