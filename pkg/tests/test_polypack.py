"""Packed multiplication agrees with naive convolution, both slot widths."""

import random

import numpy as np
import pytest

from artifact.polypack import (
    poly_mul_mod,
    poly_mul_mod_2d,
    poly_mul_mod_3d,
    qpoly_mul_mod,
)


def naive_mul(A, B, m):
    out = [0] * (len(A) + len(B) - 1)
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            out[i + j] = (out[i + j] + int(a) * int(b)) % m
    return out


@pytest.mark.parametrize("m", [3**6, 3**13, 3**20, 5**8, 2**31 - 1])
def test_univariate_random(m):
    rng = random.Random(m % 1000)
    for _ in range(8):
        nA = rng.randrange(1, 40)
        nB = rng.randrange(1, 40)
        A = np.array([rng.randrange(m) for _ in range(nA)], dtype=np.int64)
        B = np.array([rng.randrange(m) for _ in range(nB)], dtype=np.int64)
        got = poly_mul_mod(A, B, m)
        assert got.tolist() == naive_mul(A, B, m)


def test_univariate_large_vectors():
    m = 3**14
    rng = np.random.default_rng(5)
    A = rng.integers(0, m, size=3000).astype(np.int64)
    B = rng.integers(0, m, size=2500).astype(np.int64)
    got = poly_mul_mod(A, B, m)
    # spot-check a few coefficients against direct sums
    for k in (0, 1, 777, 2999, 5498):
        lo = max(0, k - 2499)
        hi = min(k, 2999)
        s = sum(int(A[i]) * int(B[k - i]) for i in range(lo, hi + 1)) % m
        assert int(got[k]) == s


def test_modulus_cap():
    with pytest.raises(ValueError):
        poly_mul_mod(np.ones(2, dtype=np.int64), np.ones(2, dtype=np.int64), 2**32)


def test_quadratic_extension_product():
    m = 3**12
    r = -1
    rng = random.Random(2)
    for _ in range(10):
        n = rng.randrange(1, 25)
        a1, b1, a2, b2 = (
            np.array([rng.randrange(m) for _ in range(n)], dtype=np.int64)
            for _ in range(4)
        )
        ga, gb = qpoly_mul_mod(a1, b1, a2, b2, r, m)
        # reference: multiply (a1 + b1 w)(a2 + b2 w) coefficientwise
        ra = (np.array(naive_mul(a1, a2, m)) + r * np.array(naive_mul(b1, b2, m))) % m
        rb = (np.array(naive_mul(a1, b2, m)) + np.array(naive_mul(b1, a2, m))) % m
        assert ga.tolist() == ra.tolist()
        assert gb.tolist() == rb.tolist()


def test_bivariate_matches_kronecker_by_hand():
    m = 3**10
    rng = np.random.default_rng(9)
    A = rng.integers(0, m, size=(4, 7)).astype(np.int64)
    B = rng.integers(0, m, size=(5, 3)).astype(np.int64)
    got = poly_mul_mod_2d(A, B, m)
    ref = np.zeros((8, 9), dtype=object)
    for j1 in range(4):
        for i1 in range(7):
            for j2 in range(5):
                for i2 in range(3):
                    ref[j1 + j2, i1 + i2] += int(A[j1, i1]) * int(B[j2, i2])
    assert (got == (ref % m).astype(np.int64)).all()


def test_trivariate_matches_reference():
    m = 3**8
    rng = np.random.default_rng(13)
    A = rng.integers(0, m, size=(3, 2, 4)).astype(np.int64)
    B = rng.integers(0, m, size=(2, 3, 2)).astype(np.int64)
    got = poly_mul_mod_3d(A, B, m)
    ref = np.zeros((4, 4, 5), dtype=object)
    for k1 in range(3):
        for j1 in range(2):
            for i1 in range(4):
                for k2 in range(2):
                    for j2 in range(3):
                        for i2 in range(2):
                            ref[k1 + k2, j1 + j2, i1 + i2] += int(A[k1, j1, i1]) * int(
                                B[k2, j2, i2]
                            )
    assert (got == (ref % m).astype(np.int64)).all()
