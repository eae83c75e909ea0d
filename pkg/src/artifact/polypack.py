"""Exact polynomial multiplication over Z/m via Kronecker substitution.

Coefficient vectors (values reduced into [0, m), m < 2^32) are packed into
one big integer with a fixed slot width chosen so that convolution sums
cannot collide, multiplied as integers, then unpacked and reduced.  gmpy2
supplies FFT multiplication for the big products when available; plain
Python integers are a correct fallback.

Univariate, bivariate and trivariate products are all routed through the
same packing by flattening with per-axis strides wide enough for the
result degrees.
"""

from __future__ import annotations

import numpy as np

try:
    from gmpy2 import mpz
except ImportError:  # pragma: no cover
    def mpz(x):
        return x

__all__ = [
    "poly_mul_mod",
    "qpoly_mul_mod",
    "poly_mul_mod_2d",
    "qpoly_mul_mod_2d",
    "poly_mul_mod_3d",
]

_MAX_MOD = 1 << 32


def _slot_bytes(n_min: int, m: int) -> int:
    """Slot width in bytes holding n_min products of values < m."""
    bound = n_min * (m - 1) * (m - 1)
    if bound < (1 << 63):
        return 8
    if bound < (1 << 127):
        return 16
    raise ValueError("modulus too large for packed multiplication")


def _pack(arr: np.ndarray, width: int):
    n = len(arr)
    buf = np.zeros((n, width), dtype=np.uint8)
    buf[:, :8] = arr.astype("<u8").view(np.uint8).reshape(n, 8)
    return mpz(int.from_bytes(buf.tobytes(), "little"))


def _unpack(value, n_slots: int, width: int, m: int) -> np.ndarray:
    raw = int(value).to_bytes(n_slots * width + width, "little")
    buf = np.frombuffer(raw[: n_slots * width], dtype=np.uint8).reshape(
        n_slots, width
    )
    lo = buf[:, :8].copy().view("<u8").reshape(n_slots)
    mm = np.uint64(m)
    out = lo % mm
    if width == 16:
        hi = buf[:, 8:16].copy().view("<u8").reshape(n_slots)
        # (hi mod m) * (2^64 mod m) stays below 2^64 because m < 2^32
        shift = np.uint64((1 << 64) % m)
        out = (out + (hi % mm) * shift % mm) % mm
    return out.astype(np.int64)


def poly_mul_mod(A: np.ndarray, B: np.ndarray, m: int) -> np.ndarray:
    """Full convolution of two coefficient vectors, reduced mod m.

    Inputs must already be reduced into [0, m).  Returns a vector of
    length len(A) + len(B) - 1 (length 1 for empty inputs).
    """
    if m >= _MAX_MOD:
        raise ValueError(f"modulus {m} too large (needs < 2^32)")
    nA, nB = len(A), len(B)
    if nA == 0 or nB == 0:
        return np.zeros(1, dtype=np.int64)
    width = _slot_bytes(min(nA, nB), m)
    prod = _pack(A, width) * _pack(B, width)
    return _unpack(prod, nA + nB - 1, width, m)


def _addmul_mod(x: np.ndarray, y: np.ndarray, c: int, m: int) -> np.ndarray:
    """(x + c*y) mod m without int64 overflow (uses uint64 lanes)."""
    xu = x.astype(np.uint64)
    yu = y.astype(np.uint64)
    return ((xu + (yu * np.uint64(c % m)) % np.uint64(m)) % np.uint64(m)).astype(
        np.int64
    )


def qpoly_mul_mod(a1, b1, a2, b2, r: int, m: int):
    """Product of (a1 + b1*w)(a2 + b2*w) with w^2 = r, three multiplications."""
    m1 = poly_mul_mod(a1, a2, m)
    m2 = poly_mul_mod(b1, b2, m)
    m3 = poly_mul_mod((a1 + b1) % m, (a2 + b2) % m, m)
    a = _addmul_mod(m1, m2, r, m)
    cross = (m3 - m1 - m2) % m
    return a, cross


def _flatten_2d(A: np.ndarray, sx: int) -> np.ndarray:
    """Row-major flatten of a (ny, nx) array into slots index = i + j*sx."""
    ny, nx = A.shape
    out = np.zeros(sx * ny, dtype=np.int64)
    view = out.reshape(ny, sx)
    view[:, :nx] = A
    return out


def poly_mul_mod_2d(A: np.ndarray, B: np.ndarray, m: int) -> np.ndarray:
    """2-D convolution mod m.  Arrays indexed [j, i] for X^i Y^j."""
    if m >= _MAX_MOD:
        raise ValueError(f"modulus {m} too large (needs < 2^32)")
    ay, ax = A.shape
    by, bx = B.shape
    rx, ry = ax + bx - 1, ay + by - 1
    width = _slot_bytes(min(ax, bx) * min(ay, by), m)
    fA = _flatten_2d(A, rx)
    fB = _flatten_2d(B, rx)
    prod = _pack(fA, width) * _pack(fB, width)
    flat = _unpack(prod, rx * ry, width, m)
    return flat.reshape(ry, rx)


def qpoly_mul_mod_2d(a1, b1, a2, b2, r: int, m: int):
    """Bivariate version of the three-multiplication quadratic product."""
    m1 = poly_mul_mod_2d(a1, a2, m)
    m2 = poly_mul_mod_2d(b1, b2, m)
    m3 = poly_mul_mod_2d((a1 + b1) % m, (a2 + b2) % m, m)
    a = _addmul_mod(m1, m2, r, m)
    cross = (m3 - m1 - m2) % m
    return a, cross


def poly_mul_mod_3d(A: np.ndarray, B: np.ndarray, m: int) -> np.ndarray:
    """3-D convolution mod m.  Arrays indexed [k, j, i] for X^i Y^j Z^k."""
    if m >= _MAX_MOD:
        raise ValueError(f"modulus {m} too large (needs < 2^32)")
    az, ay, ax = A.shape
    bz, by, bx = B.shape
    rx, ry, rz = ax + bx - 1, ay + by - 1, az + bz - 1
    width = _slot_bytes(min(ax, bx) * min(ay, by) * min(az, bz), m)

    def flatten(P, nz, ny, nx):
        out = np.zeros(rx * ry * rz, dtype=np.int64)
        view = out.reshape(rz, ry, rx)
        view[:nz, :ny, :nx] = P
        return out

    prod = _pack(flatten(A, az, ay, ax), width) * _pack(flatten(B, bz, by, bx), width)
    flat = _unpack(prod, rx * ry * rz, width, m)
    return flat.reshape(rz, ry, rx)
