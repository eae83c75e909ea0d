"""Trace relation rewriting, parity certificates, confluence."""

import random

import pytest

from artifact.trace_relations import TraceSystem


@pytest.fixture(scope="module")
def ts0():
    return TraceSystem(a_p=0, S=9)


@pytest.fixture(scope="module")
def sym():
    return TraceSystem(a_p=None, S=9)


def test_norm_down_pinned(ts0):
    assert ts0.norm_down(1, 0) == {"y": {(0, 0): -1}}
    assert ts0.norm_down(3, 0) == {"y": {(0, 1): 1}}
    assert ts0.norm_down(2, 0) == {"y0": {(0, 1): -1}}
    assert TraceSystem.format_expression(ts0.norm_down(3, 0)) == "p*y"
    with pytest.raises(ValueError):
        ts0.norm_down(3, 4)
    with pytest.raises(ValueError):
        ts0.norm_down(10, 0)


def test_intro_relation_at_ap_zero(ts0):
    # tracing one level with a_p = 0 sends y_{s+1} to -y_{s-1}
    for s in range(1, 9):
        assert ts0.norm_down(s + 1, s) == {f"y{s - 1}": {(0, 0): -1}}
    assert ts0.norm_down(1, 0) == {"y": {(0, 0): -1}}


def test_symbolic_matches_transfer_matrix_oracle(sym):
    for s in range(10):
        for k in range(s + 1):
            assert sym.norm_down(s, k) == sym.transfer_matrix_oracle(s, k), (s, k)


def test_symbolic_shapes(sym):
    f = TraceSystem.format_expression
    assert f(sym.norm_down(1, 0)) == "-y + a_p*y0"
    assert f(sym.norm_down(3, 0)) == "(p - a_p^2)*y + (-2*a_p*p + a_p^3)*y0"


def test_numeric_specialization_consistent(sym):
    rng = random.Random(11)
    for _ in range(30):
        s = rng.randint(1, 9)
        k = rng.randint(0, s)
        ap = rng.randint(-4, 4)
        spec = TraceSystem(a_p=ap).norm_down(s, k)
        full = sym.norm_down(s, k)
        collapsed = {}
        for symb, coeff in full.items():
            acc = {}
            for (i, j), c in coeff.items():
                acc[(0, j)] = acc.get((0, j), 0) + c * ap**i
            acc = {key: v for key, v in acc.items() if v}
            if acc:
                collapsed[symb] = acc
        assert collapsed == spec, (s, k, ap)


def test_parity_certificates(ts0):
    c32 = ts0.verify_parity_identity(3, 2)
    assert c32["normal_form"] == "-y1" and c32["exponent"] == 0
    c52 = ts0.verify_parity_identity(5, 2)
    assert c52["normal_form"] == "p*y1" and c52["exponent"] == 1
    assert len(c52["chain"]) == 3
    with pytest.raises(ValueError):
        ts0.verify_parity_identity(4, 2)
    with pytest.raises(ValueError):
        TraceSystem(a_p=None).verify_parity_identity(3, 2)


def test_parity_certificates_all_odd_gaps(ts0):
    for s in range(1, 10):
        for k in range(s % 2, s, 2):
            if (s - k) % 2 == 1:
                cert = ts0.verify_parity_identity(s, k)
                assert cert["exponent"] == (s - k - 1) // 2


def test_boundary_branches(ts0):
    cert = ts0.verify_parity_identity(3, 0)
    assert cert["y0_branches"]["atomic"] == cert["y0_branches"]["expanded"] == "p*y"


def test_even_norm_form(ts0):
    e20 = ts0.even_norm_form(2, 0)
    assert e20["normal_form"] == "-p*y0"
    e42 = ts0.even_norm_form(4, 2)
    assert e42["normal_form"] == "-p*y2"
    e40 = ts0.even_norm_form(4, 0)
    assert e40["normal_form"] == "p^2*y0"
    with pytest.raises(ValueError):
        ts0.even_norm_form(3, 0)


def test_confluence_random_orders():
    rng = random.Random(20260822)
    for _ in range(100):
        s = rng.randint(2, 9)
        k = rng.randint(0, s - 1)
        ap = rng.choice([0, None, 2, -1])
        t = TraceSystem(a_p=ap)
        assert t.norm_down_via_split(s, k, rng) == t.norm_down(s, k)


def test_multiplicativity_of_composed_traces():
    rng = random.Random(5)
    for _ in range(50):
        s = rng.randint(2, 9)
        j = rng.randint(1, s - 1)
        k = rng.randint(0, j)
        t = TraceSystem(a_p=rng.choice([0, None, 3]))
        expr = t.norm_down(s, j)
        for n in range(j, k, -1):
            expr = t.trace_step(expr, n)
        assert expr == t.norm_down(s, k)


def test_vanishing_report_structure(ts0):
    rep = ts0.parity_vanishing_report(1)
    patterns = [c["pattern"] for c in rep["wrong_parity_cases"]]
    assert patterns == ["boundary-scaling", "annihilation"]
    assert rep["parity"] == "odd"

    rep5 = ts0.parity_vanishing_report(5)
    by_class = {c["conductor_class"]: c for c in rep5["wrong_parity_cases"]}
    assert by_class[2]["pattern"] == "norm-compression"
    assert by_class[2]["conclusion"] == "lambda_chi(y5) = 0"
    assert by_class[6]["pattern"] == "annihilation"
    assert by_class[0]["pattern"] == "boundary-scaling"

    rep2 = ts0.parity_vanishing_report(2)
    assert rep2["base_class_companion"]["conclusion"] == "lambda_chi(y2) = 0"
    assert rep2["parity"] == "even"

    rep0 = ts0.parity_vanishing_report(0)
    assert [c["pattern"] for c in rep0["wrong_parity_cases"]] == ["annihilation"]
    assert "level 0" in rep0["note"]

    with pytest.raises(ValueError):
        TraceSystem(a_p=None).parity_vanishing_report(2)


def test_unknown_symbol_refused(ts0):
    with pytest.raises(ValueError):
        ts0.symbol("z3")
    with pytest.raises(ValueError):
        ts0.symbol("y12")
