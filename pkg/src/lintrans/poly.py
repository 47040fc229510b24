"""Dense univariate polynomials over a tower's ambient field.

Coefficients are raw field codes (see :mod:`lintrans.gf`), lowest degree
first, with no trailing zeros; the zero polynomial has no coefficients.
"""

from itertools import permutations

import numpy as np

from .errors import BothZero, CapExceeded, DivisionByZero, NonSquare, TowerMismatch
from .gf import FieldElem

MAX_DET_DIM = 7


def _trim(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


class OrdPoly:
    __slots__ = ("tower", "c")

    def __init__(self, tower, coeffs=()):
        self.tower = tower
        self.c = _trim(_code(tower, a) for a in coeffs)

    @classmethod
    def _raw(cls, tower, codes):
        obj = cls.__new__(cls)
        obj.tower = tower
        obj.c = _trim(codes)
        return obj

    @classmethod
    def monomial(cls, tower, k, coeff=1):
        return cls(tower, [0] * k + [coeff])

    @classmethod
    def x(cls, tower):
        return cls.monomial(tower, 1)

    @classmethod
    def const(cls, tower, a):
        return cls(tower, [a])

    @property
    def coeffs(self):
        return tuple(FieldElem(self.tower, v) for v in self.c)

    @property
    def degree(self):
        """Degree, with -1 for the zero polynomial."""
        return len(self.c) - 1

    def is_zero(self):
        return not self.c

    def lead(self):
        return FieldElem(self.tower, self.c[-1] if self.c else 0)

    def coeff(self, i):
        return FieldElem(self.tower, self.c[i] if 0 <= i < len(self.c) else 0)

    def _check(self, g):
        if isinstance(g, OrdPoly):
            if g.tower is not self.tower:
                raise TowerMismatch("polynomials over different towers")
            return g
        if isinstance(g, (FieldElem, int)):
            return OrdPoly(self.tower, [g])
        return NotImplemented

    def __add__(self, g):
        g = self._check(g)
        if g is NotImplemented:
            return g
        t = self.tower
        a, b = self.c, g.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, v in enumerate(b):
            out[i] = t.add(out[i], v)
        return OrdPoly._raw(t, out)

    __radd__ = __add__

    def __neg__(self):
        t = self.tower
        return OrdPoly._raw(t, [t.neg(v) for v in self.c])

    def __sub__(self, g):
        g = self._check(g)
        if g is NotImplemented:
            return g
        return self + (-g)

    def __rsub__(self, g):
        g = self._check(g)
        if g is NotImplemented:
            return g
        return g + (-self)

    def __mul__(self, g):
        g = self._check(g)
        if g is NotImplemented:
            return g
        t = self.tower
        if not self.c or not g.c:
            return OrdPoly._raw(t, ())
        out = [0] * (len(self.c) + len(g.c) - 1)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(g.c):
                    if b:
                        out[i + j] = t.add(out[i + j], t.mul(a, b))
        return OrdPoly._raw(t, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = OrdPoly(self.tower, [1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def shift(self, k):
        """Multiply by x^k."""
        if not self.c:
            return self
        return OrdPoly._raw(self.tower, (0,) * k + self.c)

    def scale(self, a):
        return self._scale_code(_code(self.tower, a))

    def _scale_code(self, a):
        t = self.tower
        return OrdPoly._raw(t, [t.mul(a, v) for v in self.c])

    def divmod(self, g):
        g = self._check(g)
        if not g.c:
            raise DivisionByZero("division by the zero polynomial")
        t = self.tower
        rem = list(self.c)
        dg = len(g.c) - 1
        inv = t.inv(g.c[-1])
        quot = [0] * max(len(rem) - dg, 0)
        while len(rem) - 1 >= dg and rem:
            k = len(rem) - 1 - dg
            c = t.mul(rem[-1], inv)
            quot[k] = c
            for i, b in enumerate(g.c):
                rem[k + i] = t.sub(rem[k + i], t.mul(c, b))
            rem = list(_trim(rem))
        return OrdPoly._raw(t, quot), OrdPoly._raw(t, rem)

    def __floordiv__(self, g):
        return self.divmod(g)[0]

    def __mod__(self, g):
        return self.divmod(g)[1]

    def monic(self):
        if not self.c:
            return self
        return self._scale_code(self.tower.inv(self.c[-1]))

    def eval(self, z):
        t = self.tower
        z = _code(t, z)
        acc = 0
        for a in reversed(self.c):
            acc = t.add(t.mul(acc, z), a)
        return FieldElem(t, acc)

    __call__ = eval

    def eval_vec(self, zs):
        """Evaluate at every code of a numpy array."""
        t = self.tower
        zs = np.asarray(zs, dtype=np.int64)
        acc = np.zeros_like(zs)
        for a in reversed(self.c):
            acc = t.vadd(t.vmul(acc, zs), np.full_like(zs, a))
        return acc

    def __eq__(self, g):
        if isinstance(g, OrdPoly):
            return self.tower is g.tower and self.c == g.c
        if isinstance(g, (FieldElem, int)):
            return self == OrdPoly(self.tower, [g])
        return NotImplemented

    def __hash__(self):
        return hash((id(self.tower), self.c))

    def __repr__(self):
        return f"OrdPoly({self.render()})"

    def render(self):
        """Text form ``c_d*x^d + ... + c_0`` with coordinate-tuple coefficients."""
        if not self.c:
            return "0"
        terms = []
        for i in range(len(self.c) - 1, -1, -1):
            v = self.c[i]
            if not v:
                continue
            cf = FieldElem(self.tower, v).render()
            if i == 0:
                terms.append(cf)
            elif i == 1:
                terms.append(f"{cf}*x")
            else:
                terms.append(f"{cf}*x^{i}")
        return " + ".join(terms)

    def in_subfield(self, degree):
        t = self.tower
        return all(t.in_subfield(v, degree) for v in self.c)


def _code(tower, a):
    if isinstance(a, FieldElem):
        if a.tower is not tower:
            raise TowerMismatch("coefficient from a different tower")
        return a.v
    return tower.const(a)


def ord_arith(op, f, g):
    """Dispatch ``add``, ``sub``, ``mul``, ``divrem`` or ``eval``."""
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "divrem":
        return f.divmod(g)
    if op == "eval":
        return f.eval(g)
    raise ValueError(f"unknown operation {op!r}")


def ord_gcd(f, g):
    """Monic gcd by Euclid's algorithm."""
    if f.tower is not g.tower:
        raise TowerMismatch("polynomials over different towers")
    if f.is_zero() and g.is_zero():
        raise BothZero("gcd(0, 0) is undefined")
    while not g.is_zero():
        f, g = g, f % g
    return f.monic()


def all_ones(e, tower):
    """1 + x + ... + x^(e-1)."""
    return OrdPoly(tower, [1] * e)


def _check_square(mat):
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise NonSquare("matrix is not square")
    if n:
        t = mat[0][0].tower
        for row in mat:
            for a in row:
                if a.tower is not t:
                    raise TowerMismatch("matrix entries over different towers")
    return n


def det_bareiss(mat):
    """Fraction-free (Bareiss) elimination; every division is exact."""
    n = _check_square(mat)
    if n == 0:
        raise NonSquare("empty matrix")
    t = mat[0][0].tower
    a = [list(row) for row in mat]
    sign = 1
    prev = OrdPoly(t, [1])
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return OrdPoly(t)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                quo, rem = num.divmod(prev)
                assert rem.is_zero(), "Bareiss division must be exact"
                a[i][j] = quo
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def det_cofactor(mat):
    """Laplace expansion along the first row."""
    n = _check_square(mat)
    if n == 0:
        raise NonSquare("empty matrix")
    if n == 1:
        return mat[0][0]
    t = mat[0][0].tower
    total = OrdPoly(t)
    for j in range(n):
        if mat[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = mat[0][j] * det_cofactor(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def perm_sign(perm):
    """+1 or -1, from the cycle decomposition."""
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def det_leibniz(mat):
    """Signed sum over all permutations; O(n * n!) and only meant as an oracle."""
    n = _check_square(mat)
    t = mat[0][0].tower
    total = OrdPoly(t)
    for perm in permutations(range(n)):
        term = OrdPoly(t, [1])
        for i, j in enumerate(perm):
            term = term * mat[i][j]
            if term.is_zero():
                break
        total = total + term if perm_sign(perm) == 1 else total - term
    return total


def ord_det(mat, method="bareiss"):
    """Determinant of a square matrix of OrdPoly, dimension at most 7."""
    n = _check_square(mat)
    if n > MAX_DET_DIM:
        raise CapExceeded(f"dimension {n} exceeds {MAX_DET_DIM}")
    if method == "bareiss":
        return det_bareiss(mat)
    if method == "cofactor":
        return det_cofactor(mat)
    if method == "leibniz":
        return det_leibniz(mat)
    raise ValueError(f"unknown method {method!r}")
