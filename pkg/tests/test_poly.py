import random

import pytest
from hypothesis import given, settings, strategies as st

from lintrans.errors import BothZero, CapExceeded, DivisionByZero, NonSquare, TowerMismatch
from lintrans.gf import FieldElem, build_tower, subfield_generator
from lintrans.poly import OrdPoly, all_ones, ord_arith, ord_det, ord_gcd, perm_sign

T4 = build_tower(2, 1, 2, 1)
T3 = build_tower(3, 1, 2, 1)


def P(t, *cs):
    return OrdPoly(t, cs)


def rand_poly(t, rng, deg):
    return OrdPoly(t, [FieldElem(t, rng.randrange(t.order)) for _ in range(deg + 1)])


def test_examples():
    t = build_tower(2)
    assert ord_arith("mul", P(t, 1, 1), P(t, 1, 1)) == P(t, 1, 0, 1)
    x3, x = OrdPoly.monomial(t, 3), OrdPoly.x(t)
    assert ord_arith("divrem", x3, x) == (OrdPoly.monomial(t, 2), OrdPoly(t))
    w = subfield_generator(T4, 4)
    assert ord_arith("eval", P(T4, 1, 1, 1), w) == FieldElem(T4, 0)


def test_gcd_examples():
    t = build_tower(2)
    assert ord_gcd(P(t, 1, 0, 1), P(t, 1, 1)) == P(t, 1, 1)
    assert ord_gcd(P(t, 1, 1), P(t, 1, 1, 1, 1, 1)) == P(t, 1)
    w = subfield_generator(T4, 4)
    f = OrdPoly(T4, [w, 1, w])
    assert ord_gcd(f, OrdPoly(T4)) == f.monic()
    with pytest.raises(BothZero):
        ord_gcd(OrdPoly(t), OrdPoly(t))


def test_all_ones():
    t = build_tower(2)
    assert all_ones(1, t) == P(t, 1)
    assert all_ones(2, t) == P(t, 1, 1)
    assert all_ones(5, t) == P(t, 1, 1, 1, 1, 1)


def test_errors():
    with pytest.raises(DivisionByZero):
        P(T4, 1, 1).divmod(OrdPoly(T4))
    with pytest.raises(TowerMismatch):
        P(T4, 1) + P(T3, 1)
    with pytest.raises(NonSquare):
        ord_det([[P(T4, 1), P(T4, 1)]])
    with pytest.raises(CapExceeded):
        ord_det([[P(T4, 1)] * 8 for _ in range(8)])


def test_det_small_examples():
    one, zero = P(T4, 1), OrdPoly(T4)
    f = P(T4, 1, 0, 1)
    assert ord_det([[f]]) == f
    assert ord_det([[one, zero], [zero, one]]) == one
    # 2x2 block for the P3.3-type decomposition with k = 1 and c^3 = 1: entries a^(r^i) * assoc(S_1) * x^[i>j]
    w = subfield_generator(T4, 4)
    x = OrdPoly.x(T4)
    m = [[OrdPoly(T4, [w]), one], [x, OrdPoly(T4, [w ** 2])]]
    assert ord_det(m) == P(T4, 1, 1)


@pytest.mark.parametrize("t", [T4, T3], ids=["char2", "char3"])
@pytest.mark.parametrize("n", [3, 4])
def test_det_methods_agree_with_leibniz(t, n):
    rng = random.Random(n * 7 + t.p)
    for _ in range(8):
        m = [[rand_poly(t, rng, rng.randint(-1, 2)) for _ in range(n)] for _ in range(n)]
        ref = ord_det(m, "leibniz")
        assert ord_det(m, "bareiss") == ref
        assert ord_det(m, "cofactor") == ref


def test_det_with_zero_pivot():
    one, zero = P(T3, 1), OrdPoly(T3)
    m = [[zero, one, zero], [one, zero, zero], [zero, zero, P(T3, 0, 1)]]
    assert ord_det(m) == ord_det(m, "leibniz") == P(T3, 0, 2)


def test_perm_sign():
    assert perm_sign((0, 1, 2)) == 1
    assert perm_sign((1, 0, 2)) == -1
    assert perm_sign((1, 2, 0)) == 1


def test_render():
    t = build_tower(2, 1, 2, 1)
    assert P(t, 1, 0, 1).render() == "(1,0)*x^2 + (1,0)"
    assert OrdPoly(t).render() == "0"


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(0, 8), max_size=6), st.lists(st.integers(0, 8), min_size=1, max_size=4))
def test_divrem_roundtrip(fs, gs):
    f = OrdPoly(T3, [FieldElem(T3, v) for v in fs])
    g = OrdPoly(T3, [FieldElem(T3, v) for v in gs])
    if g.is_zero():
        return
    q, r = f.divmod(g)
    assert q * g + r == f
    assert r.degree < g.degree


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_gcd_with_planted_factor(seed):
    rng = random.Random(seed)
    h = rand_poly(T3, rng, rng.randint(1, 2))
    if h.is_zero():
        return
    f = h * rand_poly(T3, rng, 2)
    g = h * rand_poly(T3, rng, 2)
    if f.is_zero() or g.is_zero():
        return
    d = ord_gcd(f, g)
    assert (f % d).is_zero() and (g % d).is_zero()
    assert (d % h.monic()).is_zero()
    assert d.lead() == FieldElem(T3, 1)
