import pickle
import random
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_irreducible_p, gf_mul, gf_rem

from lintrans import linalg
from lintrans.errors import (
    DegreeCapExceeded,
    DivisionByZero,
    NonDividingDegrees,
    NonPrimeP,
    NotInTopField,
    TowerMismatch,
)
from lintrans.gf import (
    FieldElem,
    arith,
    build_tower,
    enumerate_subfield,
    frobenius,
    in_subfield,
    is_irreducible,
    norm_trace,
    smallest_irreducible,
    subfield_generator,
)


def brute_smallest(p, n):
    # low-degree-first lexicographic order, checked with an outside irreducibility test
    for cs in product(range(p), repeat=n):
        if gf_irreducible_p([1] + list(reversed(cs)), p, ZZ):
            return tuple(cs) + (1,)


@pytest.mark.parametrize("p,n", [(2, 2), (2, 3), (2, 4), (2, 5), (2, 8), (2, 10), (3, 1),
                                 (3, 2), (3, 3), (3, 4), (5, 2), (5, 3), (7, 2)])
def test_smallest_irreducible_matches_brute_force(p, n):
    assert smallest_irreducible(p, n) == brute_smallest(p, n)


def test_large_gf2_modulus_is_irreducible():
    f = smallest_irreducible(2, 24)
    assert gf_irreducible_p(list(reversed(f)), 2, ZZ)
    assert is_irreducible(list(f), 2)


def oracle_mul(t, a, b):
    fa = list(reversed(t.coords(a)))
    fb = list(reversed(t.coords(b)))
    mod = list(reversed(t.modulus))
    r = gf_rem(gf_mul(fa, fb, t.p, ZZ), mod, t.p, ZZ)
    return t.from_coords(list(reversed(r)))


@pytest.mark.parametrize("params", [(2, 1, 2, 3, 1), (3, 1, 2, 2, 1), (2, 1, 2, 6, 2), (5, 1, 1, 3, 1),
                                    (2, 1, 2, 9, 2)])
def test_mul_matches_polynomial_oracle(params):
    t = build_tower(*params)
    rng = random.Random(1)
    for _ in range(200):
        a, b = rng.randrange(t.order), rng.randrange(t.order)
        assert t.mul(a, b) == oracle_mul(t, a, b)
    xs = np.array([rng.randrange(t.order) for _ in range(300)], dtype=np.int64)
    ys = np.array([rng.randrange(t.order) for _ in range(300)], dtype=np.int64)
    got = t.vmul(xs, ys)
    assert all(int(g) == oracle_mul(t, int(a), int(b)) for g, a, b in zip(got, xs, ys))


def test_build_tower_examples():
    t = build_tower(2, 1, 2, 5, 1)
    assert t.degree == 10 and t.q == 4 and t.e == 5
    t = build_tower(2, 1, 2, 6, 2)
    assert t.degree == 24 and t.level_size("qe") == 4 ** 6
    t = build_tower(3, 1, 1, 1, 1)
    assert t.degree == 1 and t.modulus == (0, 1)
    assert build_tower(2, 1, 2, 3).modulus == build_tower(2, 1, 2, 3).modulus


def test_build_tower_errors():
    with pytest.raises(NonPrimeP):
        build_tower(4, 1, 1, 1)
    with pytest.raises(DegreeCapExceeded):
        build_tower(2, 1, 2, 33)


def test_tower_pickles_to_same_object():
    t = build_tower(2, 1, 2, 3)
    assert pickle.loads(pickle.dumps(t)) is t


def omega(t):
    return subfield_generator(t, 4)


def test_f4_identities():
    t = build_tower(2, 1, 2, 5)
    w = omega(t)
    one = FieldElem(t, 1)
    assert w * w * w == one
    assert w * (w ** 2) == one
    assert w + w ** 2 == one
    assert one + one == FieldElem(t, 0)
    assert frobenius(w, 4, 1) == w
    assert frobenius(w, 2, 1) == w ** 2
    assert frobenius(w, 2, 0) == w
    assert not in_subfield(w, 2)
    assert in_subfield(w ** 3, 2)
    assert in_subfield(FieldElem(t, 0), 2)


def test_arith_dispatch_and_errors():
    t = build_tower(2, 1, 2, 3)
    u = build_tower(3, 1, 2, 1)
    w = omega(t)
    assert arith("mul", w, w) == w ** 2
    assert arith("inv", w) * w == FieldElem(t, 1)
    assert arith("pow", w, 3) == FieldElem(t, 1)
    with pytest.raises(DivisionByZero):
        arith("inv", FieldElem(t, 0))
    with pytest.raises(TowerMismatch):
        arith("add", w, FieldElem(u, 1))


def test_norm_trace_f4():
    t = build_tower(2, 1, 2, 5)
    w = omega(t)
    assert norm_trace(w, 4, 2) == (FieldElem(t, 1), FieldElem(t, 1))
    zero = FieldElem(t, 0)
    assert norm_trace(zero, 4, 2) == (zero, zero)
    with pytest.raises(NotInTopField):
        norm_trace(subfield_generator(t, 4 ** 5), 4, 2)
    with pytest.raises(NonDividingDegrees):
        norm_trace(w, 4 ** 5, 4 ** 2)


def test_norm_multiplicative_trace_additive():
    t = build_tower(3, 1, 2, 2)
    rng = random.Random(5)
    elems = [FieldElem(t, int(v)) for v in t.enumerate_codes(t.level_degree("qe"))]
    for _ in range(100):
        x, y = rng.choice(elems), rng.choice(elems)
        nx, tx = norm_trace(x, 81, 3)
        ny, ty = norm_trace(y, 81, 3)
        nxy, _ = norm_trace(x * y, 81, 3)
        _, txy = norm_trace(x + y, 81, 3)
        assert nxy == nx * ny and txy == tx + ty
        assert in_subfield(nx, 3) and in_subfield(tx, 3)


@pytest.mark.parametrize("params,level,size", [((2, 1, 2, 5), 2, 2), ((2, 1, 2, 5), 4, 4),
                                               ((2, 1, 2, 5), 4 ** 5, 1024), ((3, 1, 2, 2), 9, 9)])
def test_enumerate_subfield(params, level, size):
    t = build_tower(*params)
    elems = list(enumerate_subfield(t, level))
    assert len(elems) == len(set(elems)) == size
    assert all(x.frobenius(level) == x for x in elems)


def test_subfield_count_matches_frobenius_fixed_points():
    t = build_tower(2, 1, 2, 3)
    everything = np.arange(t.order, dtype=np.int64)
    fixed = everything[t.vfrob(everything, t.q) == everything]
    assert len(fixed) == t.q
    assert sorted(fixed.tolist()) == sorted(t.enumerate_codes(2).tolist())


def test_frobenius_full_cycle():
    t = build_tower(2, 1, 2, 6, 2)
    rng = random.Random(2)
    for _ in range(50):
        a = rng.randrange(t.order)
        assert t.frob(a, 2, t.degree) == a


def test_vector_ops_match_scalar():
    for params in [(2, 1, 2, 3), (3, 1, 2, 2), (2, 1, 2, 9, 2)]:
        t = build_tower(*params)
        rng = random.Random(3)
        xs = np.array([rng.randrange(t.order) for _ in range(100)], dtype=np.int64)
        ys = np.array([rng.randrange(t.order) for _ in range(100)], dtype=np.int64)
        for k in (0, 1, 5, 123456789):
            assert [int(v) for v in t.vpow(xs, k)] == [t.pow(int(x), k) for x in xs]
        assert [int(v) for v in t.vadd(xs, ys)] == [t.add(int(a), int(b)) for a, b in zip(xs, ys)]
        assert [int(v) for v in t.vsub(xs, ys)] == [t.sub(int(a), int(b)) for a, b in zip(xs, ys)]
        assert [int(v) for v in t.vfrob(xs, t.q, 2)] == [t.frob(int(x), t.q, 2) for x in xs]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 1023), st.integers(0, 1023), st.integers(0, 1023))
def test_field_axioms(a, b, c):
    t = build_tower(2, 1, 2, 5)
    x, y, z = (FieldElem(t, v) for v in (a, b, c))
    assert x * (y + z) == x * y + x * z
    assert (x * y) * z == x * (y * z)
    if y:
        assert (x / y) * y == x


def test_linalg_section_and_kernel():
    rng = np.random.default_rng(0)
    for p in (2, 3, 5):
        a = rng.integers(0, p, size=(6, 8))
        a[5] = (a[0] + a[1]) % p
        k = linalg.kernel(a, p)
        assert not ((a @ k.T) % p).any()
        s = linalg.section(a, p)
        for _ in range(10):
            y = (a @ rng.integers(0, p, size=8)) % p
            assert np.array_equal((a @ (s @ y)) % p, y)
