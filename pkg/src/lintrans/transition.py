"""From an r-linearized equation over F_q to a q-linearized one over F_r.

Given a_0..a_{m-1} in F_q and q-linearized f_0..f_{m-1} with coefficients in
F_r, every root z of

    sum_i a_i * f_i(z)^(r^i) = 0

is a root of det M, where M is the m x m matrix over the composition ring R_q
with (i, j) entry a_{j-i}^(r^i) * f_{j-i} o x^(r^delta(i, j)) (subscripts mod
m, delta(i, j) = m when i > j and 0 otherwise).  det M is q-linearized with
coefficients in F_r.

det M is computed two ways: through the associate isomorphism R_q -> F_q[x]
and an ordinary polynomial determinant (:func:`det_M`), and through the
expansion over difference classes of permutations of Z_m evaluated with
compositions (:func:`expansion_det`).
"""

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

from .errors import (
    CapExceeded,
    DeterminantCapExceeded,
    InvariantViolation,
    NotInFrakM,
    WitnessNotFound,
)
from .gf import FieldElem
from .linop import LinPoly, lift
from .poly import ord_det, perm_sign

MAX_M = 7
SEARCH_LIMIT = 1 << 20


@dataclass(frozen=True)
class TransitionInput:
    m: int
    a: tuple
    f: tuple

    @property
    def tower(self):
        return self.f[0].tower

    def validate(self):
        t = self.tower
        if self.m != t.m:
            raise InvariantViolation(f"m={self.m} does not match the tower (m={t.m})")
        if len(self.a) != self.m or len(self.f) != self.m:
            raise InvariantViolation("need exactly m scalars and m polynomials")
        dq, dr = t.level_degree("q"), t.level_degree("r")
        for i, ai in enumerate(self.a):
            if ai.tower is not t or not t.in_subfield(ai.v, dq):
                raise InvariantViolation(f"a_{i} is not in F_q")
        for i, fi in enumerate(self.f):
            if fi.tower is not t:
                raise InvariantViolation(f"f_{i} is over another tower")
            try:
                fi.rebase(t.q)
            except ValueError:
                raise InvariantViolation(f"f_{i} is not q-linearized") from None
            if not fi.in_subfield(dr):
                raise InvariantViolation(f"f_{i} has coefficients outside F_r")
        return self


def delta(i, j, m):
    return 0 if i <= j else m


@dataclass(frozen=True)
class TransitionMatrix:
    m: int
    entries: tuple

    def associates(self):
        return [[e.associate() for e in row] for row in self.entries]


def build_M(inp):
    inp.validate()
    t = inp.tower
    m, q, r = inp.m, t.q, t.r
    shift = LinPoly.monomial(t, q, 1)
    rows = []
    for i in range(m):
        row = []
        for j in range(m):
            k = (j - i) % m
            coef = t.frob(inp.a[k].v, r, i)
            entry = inp.f[k].rebase(q)._scale_code(coef)
            if delta(i, j, m):
                entry = entry.compose(shift)
            row.append(entry.rebase(q))
        rows.append(tuple(row))
    return TransitionMatrix(m, tuple(rows))


def _check_m(m):
    if m > MAX_M:
        raise DeterminantCapExceeded(f"m={m} exceeds the cap {MAX_M}")


def det_M(inp, method="bareiss"):
    """det M as a q-linearized polynomial, via associates and an ordinary determinant."""
    _check_m(inp.m)
    mat = build_M(inp)
    t = inp.tower
    d = lift(ord_det(mat.associates(), method=method), t.q)
    if not d.in_subfield(t.level_degree("r")):
        raise AssertionError("det M has a coefficient outside F_r")
    return d


def det_M_composition(inp):
    """det M by the signed permutation sum evaluated directly in R_q (small m only)."""
    if inp.m > 3:
        raise CapExceeded("direct composition determinant is limited to m <= 3")
    mat = build_M(inp)
    t = inp.tower
    total = LinPoly(t, t.q)
    for perm in permutations(range(inp.m)):
        term = LinPoly.monomial(t, t.q)
        for i, j in enumerate(perm):
            term = term.compose(mat.entries[i][j])
        total = total + term if perm_sign(perm) == 1 else total - term
    return total.rebase(t.q)


def equation_form(inp):
    """The r-linearized polynomial sum_i a_i f_i^(r^i), i.e. z -> sum_i a_i f_i(z)^(r^i).

    f_i(z)^(r^i) equals (f_i with coefficients raised to r^i) composed with x^(r^i).
    """
    inp.validate()
    t = inp.tower
    r = t.r
    total = LinPoly(t, r)
    for i, (ai, fi) in enumerate(zip(inp.a, inp.f)):
        twisted = fi.twist(i)
        if twisted != fi:
            raise AssertionError("twisting changed a polynomial with coefficients in F_r")
        term = twisted.rebase(r).compose(LinPoly.monomial(t, r, i)).scale(ai)
        total = total + term
    return total.rebase(r)


@dataclass(frozen=True)
class RootTransferReport:
    searched: int
    roots: int
    transfers_verified: int
    violations: tuple

    @property
    def ok(self):
        return not self.violations


def verify_root_transfer(inp, level="qe"):
    """Check that every root of the r-linearized form in ``level`` is a root of det M."""
    t = inp.tower
    if t.level_size(level) > SEARCH_LIMIT:
        raise CapExceeded(f"search level has more than {SEARCH_LIMIT} elements")
    zs = t.enumerate_codes(t.level_degree(level))
    lhs = equation_form(inp).eval_vec(zs)
    rhs = det_M(inp).eval_vec(zs)
    roots = lhs == 0
    bad = roots & (rhs != 0)
    return RootTransferReport(
        searched=len(zs),
        roots=int(roots.sum()),
        transfers_verified=int((roots & (rhs == 0)).sum()),
        violations=tuple(int(z) for z in zs[bad]),
    )


# --- difference classes ---

def in_frakM(mu):
    m = len(mu)
    return (
        m > 0
        and all(isinstance(x, int) and x >= 0 for x in mu)
        and sum(mu) == m
        and sum(i * x for i, x in enumerate(mu)) % m == 0
    )


def enumerate_frakM(m):
    """All (mu_0..mu_{m-1}) >= 0 with sum m and sum i*mu_i = 0 mod m, lexicographically descending."""
    _check_cap(m)
    out = []

    def rec(prefix, left):
        if len(prefix) == m - 1:
            mu = tuple(prefix) + (left,)
            if sum(i * x for i, x in enumerate(mu)) % m == 0:
                out.append(mu)
            return
        for x in range(left, -1, -1):
            rec(prefix + [x], left - x)

    rec([], m)
    return out


def _check_cap(m):
    if m < 1:
        raise ValueError("m must be positive")
    if m > MAX_M:
        raise CapExceeded(f"m={m} exceeds the cap {MAX_M}")


def difference_class(perm):
    """mu-vector of the multiset {sigma(i) - i mod m}."""
    m = len(perm)
    mu = [0] * m
    for i, s in enumerate(perm):
        mu[(s - i) % m] += 1
    return tuple(mu)


@lru_cache(maxsize=None)
def _perms_by_class(m):
    classes = {}
    for perm in permutations(range(m)):
        classes.setdefault(difference_class(perm), []).append(perm)
    return {mu: tuple(ps) for mu, ps in classes.items()}


@dataclass(frozen=True)
class DiffClass:
    mu: tuple
    perms: tuple
    coeff: FieldElem

    @property
    def indices(self):
        """Sorted f-index tuple: index i repeated mu_i times."""
        return tuple(i for i, k in enumerate(self.mu) for _ in range(k))

    @property
    def shift(self):
        """Exponent s of the trailing x^(r^s); equals sum_i i * mu_i."""
        return sum(i * k for i, k in enumerate(self.mu))


def class_perms(mu):
    m = len(mu)
    _check_cap(m)
    return _perms_by_class(m).get(tuple(mu), ())


def frakS_and_coeff(mu, a):
    """Permutations with difference multiset ``mu`` and the coefficient

        c_mu = sum_sigma sgn(sigma) prod_i a_i^(sum_{j : sigma(j) - j = i} r^j).
    """
    mu = tuple(mu)
    if not in_frakM(mu):
        raise NotInFrakM(f"{mu} is not a valid difference class")
    if len(a) != len(mu):
        raise ValueError("need one scalar per class index")
    t = a[0].tower
    m, r = len(mu), t.r
    perms = class_perms(mu)
    total = 0
    for perm in perms:
        exps = [0] * m
        for j, s in enumerate(perm):
            exps[(s - j) % m] += r ** j
        term = 1
        for ai, k in zip(a, exps):
            if k:
                term = t.mul(term, t.pow(ai.v, k))
        total = t.add(total, term) if perm_sign(perm) == 1 else t.sub(total, term)
    if not t.in_subfield(total, t.level_degree("r")):
        raise AssertionError(f"c_{mu} is not in F_r")
    return DiffClass(mu, perms, FieldElem(t, total))


def expansion_classes(inp):
    inp.validate()
    _check_m(inp.m)
    return [frakS_and_coeff(mu, inp.a) for mu in enumerate_frakM(inp.m)]


def expansion_det(inp):
    """det M as sum_mu c_mu f_0^[mu_0] o ... o f_{m-1}^[mu_{m-1}] o x^(r^(sum i mu_i))."""
    t = inp.tower
    total = LinPoly(t, t.q)
    for cls in expansion_classes(inp):
        if not cls.coeff:
            continue
        term = LinPoly.monomial(t, t.r, cls.shift)
        for fi, k in zip(inp.f, cls.mu):
            term = fi.power(k).compose(term)
        total = total + term.scale(cls.coeff)
    return total.rebase(t.q)


def hall_witness(mu):
    """A permutation of Z_m whose difference multiset is ``mu``, found by exhaustive search."""
    mu = tuple(mu)
    if not in_frakM(mu):
        raise NotInFrakM(f"{mu} is not a valid difference class")
    _check_cap(len(mu))
    for perm in permutations(range(len(mu))):
        if difference_class(perm) == mu:
            return perm
    raise WitnessNotFound(f"no permutation realizes {mu}")


def random_input(tower, rng=None, max_degree=2, zero_prob=0.0):
    """A random :class:`TransitionInput` on ``tower`` (m = tower.m).

    ``zero_prob`` is the chance that any given a_i is forced to zero.
    """
    rng = rng if rng is not None else random.Random()
    t = tower
    fq = [int(v) for v in t.enumerate_codes(t.level_degree("q"))]
    fr = [int(v) for v in t.enumerate_codes(t.level_degree("r"))]
    a, f = [], []
    for _ in range(t.m):
        ai = 0 if rng.random() < zero_prob else rng.choice(fq)
        a.append(FieldElem(t, ai))
        deg = rng.randint(0, max_degree)
        f.append(LinPoly._raw(t, t.q, [rng.choice(fr) for _ in range(deg + 1)]))
    return TransitionInput(t.m, tuple(a), tuple(f))
