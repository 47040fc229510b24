import random
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lintrans.errors import (
    AuxFieldMissing,
    CapExceeded,
    DegreeCapExceeded,
    FormNotApplicable,
    InstanceInvariantViolation,
    PredicateFailed,
    UnknownId,
)
from lintrans.gf import FieldElem, build_tower, subfield_generator
from lintrans.gnq import (
    GnqSpec,
    REGISTRY,
    S_poly,
    SExpr,
    artin_schreier_preimage,
    congruence_holds,
    criterion_check,
    detA,
    eval_fp_poly,
    expand_power_sum,
    gnq_coeffs,
    gnq_coeffs_fp,
    gnq_eval,
    gnq_recurrence_check,
    gnq_values,
    gnq_weight_form,
    instance_from_json,
    instance_registry,
    instance_to_json,
    is_pp,
    registry_tower,
    sum_shifted_powers,
)
from lintrans.poly import OrdPoly

T2 = build_tower(2, 1, 2, 2, 2)
T3 = build_tower(2, 1, 2, 3, 2)


def field_points(t):
    return t.enumerate_codes(t.level_degree("qe"))


def test_gnq_spec():
    s = GnqSpec(17429, 4)
    assert s.digits == (1, 1, 1, 0, 0, 1, 0, 1) and s.weight == 5
    assert sum(d * 4 ** i for i, d in enumerate(s.digits)) == 17429
    with pytest.raises(CapExceeded):
        GnqSpec(1 << 63, 4)


def test_S_poly():
    assert S_poly(1, T3) == S_poly(1, T3).monomial(T3, 4, 0)
    assert S_poly(0, T3).is_zero()
    assert S_poly(5, T3).associate() == OrdPoly(T3, [1] * 5)


def test_gnq_coeffs_trivial():
    assert gnq_coeffs(1, T3).is_zero()
    assert gnq_coeffs(0, T3).is_zero()
    with pytest.raises(DegreeCapExceeded):
        gnq_coeffs_fp(10 ** 4 + 1, T3)


def test_gnq_coeffs_defining_identity():
    # g(x^q - x) must reproduce the dense sum; compose by brute force over F_p
    for n in (85, 217, 341, 999):
        g = gnq_coeffs_fp(n, T3)
        h = np.zeros(1, dtype=np.int64)
        u = np.zeros(5, dtype=np.int64)
        u[4], u[1] = 1, 1
        acc = np.zeros(1, dtype=np.int64)
        for k, c in enumerate(g):
            if c:
                term = np.array([1], dtype=np.int64)
                for _ in range(k):
                    term = np.convolve(term, u) % 2
                acc = np.pad(acc, (0, max(0, len(term) - len(acc))))
                acc[: len(term)] = (acc[: len(term)] + term) % 2
        h = expand_power_sum(n, T3)
        assert np.array_equal(np.trim_zeros(acc, "b"), np.trim_zeros(h, "b"))


def test_gnq_coeffs_char3():
    t = build_tower(3, 1, 1, 2, 3)
    ys = field_points(t)
    for n in range(0, 300, 7):
        assert np.array_equal(eval_fp_poly(gnq_coeffs_fp(n, t), t, ys), gnq_values(n, t, ys))


def test_gnq_eval_examples():
    w = FieldElem(T3, int(field_points(T3)[5]))
    assert gnq_eval(1, w) == FieldElem(T3, 0)
    zero = FieldElem(T3, 0)
    fq = [FieldElem(T3, int(c)) for c in T3.enumerate_codes(2)]
    for n in (3, 7, 15, 100):
        assert gnq_eval(n, zero) == sum((c ** n for c in fq), zero)
    with pytest.raises(AuxFieldMissing):
        gnq_eval(3, FieldElem(build_tower(2, 1, 2, 3), 1))


def test_preimage_independence():
    rng = random.Random(4)
    ys = field_points(T3)
    fq = T3.enumerate_codes(2)
    for _ in range(50):
        n = rng.randint(0, 10 ** 6)
        y = np.array([rng.choice(ys)], dtype=np.int64)
        x = artin_schreier_preimage(T3, y)
        vals = {int(sum_shifted_powers(T3, T3.vadd(x, np.array([c])), n)[0]) for c in fq}
        assert len(vals) == 1


def test_gnq_17429_is_pp():
    t = registry_tower(5)
    assert is_pp(lambda v: gnq_values(17429, t, v), t)


def test_oracles_agree_small():
    for t in (T2, T3):
        ys = field_points(t)
        for n in range(0, 400):
            assert np.array_equal(eval_fp_poly(gnq_coeffs_fp(n, t), t, ys), gnq_values(n, t, ys)), n


def test_weight_form_examples():
    t = registry_tower(5)
    ys = field_points(t)
    form = gnq_weight_form(17429, t)
    assert sorted(form.exponents) == [1, 2, 5, 7] and form.size == 2
    assert np.array_equal(form.eval_vec(t, ys), gnq_values(17429, t, ys))
    form85 = gnq_weight_form(85, T3)
    assert form85.size == 1 and form85.exponents == (1, 2, 3)
    s123 = T3.vadd(T3.vadd(S_poly(1, T3).eval_vec(field_points(T3)), S_poly(2, T3).eval_vec(field_points(T3))),
                   S_poly(3, T3).eval_vec(field_points(T3)))
    assert np.array_equal(gnq_values(85, T3, field_points(T3)), T3.vneg(s123))
    with pytest.raises(FormNotApplicable):
        gnq_weight_form(1 + 1 + 4 + 16 + 64 + 256 + 1024, T3)


def test_weight_form_char3():
    t = build_tower(3, 1, 2, 2, 3)
    ys = field_points(t)
    for exps in ([0, 0, 1, 1, 2, 2, 3, 4, 5], [0, 1, 1, 1, 2, 3, 3, 4, 5, 6, 6, 7],
                 [0] * 8 + [1] * 6):
        n = 1 + sum(9 ** a for a in exps)
        form = gnq_weight_form(n, t)
        vals = gnq_values(n, t, ys)
        assert np.array_equal(form.eval_vec(t, ys), vals)
        assert np.array_equal(form.reduce_mod(t, 2).eval_vec(ys), vals)


def test_recurrence_examples():
    assert gnq_recurrence_check(10, 2, 2, T3)
    for a in range(4):
        for b in range(a + 1):
            assert gnq_recurrence_check(0, a, b, T3)
            assert np.array_equal(gnq_coeffs_fp(4 ** a, T3), gnq_coeffs_fp(4 ** b, T3))
    with pytest.raises(ValueError):
        gnq_recurrence_check(3, 1, 2, T3)


def test_recurrence_pointwise_path():
    t = registry_tower(3)
    assert gnq_recurrence_check(5000, 5, 2, t)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 500), st.integers(0, 4), st.data())
def test_recurrence_random(n, a, data):
    b = data.draw(st.integers(0, a))
    assert gnq_recurrence_check(n, a, b, T3)


def test_is_pp_examples():
    t = build_tower(2, 1, 2, 1)
    assert is_pp(lambda v: v, t, level="q")
    assert is_pp(lambda v: t.vsquare(v), t, level="q")
    assert not is_pp(lambda v: t.vpow(v, 3), t, level="q")
    assert is_pp(lambda x: x * x, t, level="q", vectorized=False)
    with pytest.raises(CapExceeded):
        is_pp(lambda v: v, build_tower(2, 1, 1, 21), level="ambient")


def test_is_pp_rejects_values_outside_domain():
    t = build_tower(2, 1, 2, 2)
    g = subfield_generator(t, 16)
    assert not is_pp(lambda v: t.vmul(v, np.full_like(v, g.v)), t, level="q")


@pytest.mark.parametrize("id,params,n", [
    ("P3.3", {"a": 1, "b": 2, "k": 2, "e": 5}, 17429),
    ("P3.4", {"a": 1, "e": 4}, 2317),
    ("P3.5", {"e": 5}, 8713),
    ("P3.6", {"e": 4}, 2377),
    ("P3.7", {"e": 6}, 135457),
])
def test_registry_examples(id, params, n):
    inst = instance_registry(id, params)
    assert inst.n == n
    rep = criterion_check(inst)
    assert rep.ok and rep.pp
    assert congruence_holds(inst)


def test_detA_closed_forms():
    inst = instance_registry("P3.3", {"a": 1, "b": 2, "k": 2, "e": 5})
    t = inst.tower
    x = OrdPoly.x(t)
    for fb in inst.fibers:
        c3 = fb.c ** 3
        want = (x ** 4 + 1) * (x + OrdPoly(t, [c3]))
        assert detA(fb, t) * (x + 1) ** 2 == want
    inst = instance_registry("P3.6", {"e": 4})
    t = inst.tower
    x = OrdPoly.x(t)
    for fb in inst.fibers:
        c3 = OrdPoly(t, [fb.c ** 3])
        assert detA(fb, t) == x ** 4 + c3 * (1 + x + x ** 2 + x ** 4)


def test_registry_errors():
    with pytest.raises(PredicateFailed):
        instance_registry("P3.3", {"a": 1, "b": 2, "k": 2, "e": 4})
    with pytest.raises(PredicateFailed):
        instance_registry("P3.5", {"e": 4})
    with pytest.raises(PredicateFailed):
        instance_registry("P3.6", {"e": 6})
    with pytest.raises(PredicateFailed):
        instance_registry("P3.4", {"a": 1})
    with pytest.raises(UnknownId):
        instance_registry("P9.9", {"e": 3})


def test_every_satisfied_family_instance_passes():
    seen = 0
    for id, (_, names) in REGISTRY.items():
        for e in range(2, 6):
            for vals in np.ndindex(*(4,) * (len(names) - 1)):
                params = dict(zip([k for k in names if k != "e"], (v + 1 for v in vals)), e=e)
                try:
                    inst = instance_registry(id, params)
                except PredicateFailed:
                    continue
                rep = criterion_check(inst)
                assert rep.ok, (id, params)
                if inst.n is not None:
                    assert congruence_holds(inst), (id, params)
                seen += 1
    assert seen > 50


def test_corrupted_instance_names_fiber():
    inst = instance_registry("P3.6", {"e": 4})
    bad = replace(inst.fibers[2], a=(inst.fibers[2].a[0], inst.fibers[2].a[0]))
    broken = replace(inst, fibers=inst.fibers[:2] + (bad,) + inst.fibers[3:])
    rep = criterion_check(broken, check_pp=False)
    assert not rep.decomposition
    assert rep.failed_fibers == [inst.fibers[2].c.render()]


def test_instance_invariants():
    inst = instance_registry("P3.4", {"a": 1, "e": 4})
    t = inst.tower
    outside = subfield_generator(t, 16)
    with pytest.raises(InstanceInvariantViolation):
        replace(inst, fibers=inst.fibers[:3]).validate()
    bad = replace(inst.fibers[0], a=(outside, inst.fibers[0].a[1]))
    with pytest.raises(InstanceInvariantViolation):
        replace(inst, fibers=(bad,) + inst.fibers[1:]).validate()


def test_json_roundtrip():
    for id, params in [("P3.3", {"a": 2, "b": 3, "k": 2, "e": 5}), ("R3.8b", {"a": 2, "b": 3, "e": 4})]:
        inst = instance_registry(id, params)
        text = instance_to_json(inst)
        back = instance_from_json(text)
        assert instance_to_json(back) == text
        assert criterion_check(back).ok


def test_sexpr_eval():
    t = registry_tower(3)
    zs = field_points(t)
    f = SExpr.parse([[1, [["S", 2, 1], ["X", 1, 2]]], [1, [["S", 3, 3]]]])
    s2, x1, s3 = S_poly(2, t).eval_vec(zs), t.vfrob(zs, 4), S_poly(3, t).eval_vec(zs)
    want = t.vadd(t.vmul(s2, t.vsquare(x1)), t.vpow(s3, 3))
    assert np.array_equal(f.eval_vec(t, zs), want)
