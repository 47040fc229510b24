"""Linearized polynomials sum_i a_i x^(B^i) and their composition ring.

A single :class:`LinPoly` type covers every base B (a power of p).  The same
additive map can be written over several bases, e.g. x^(q^i) = x^(r^(m i)),
and :meth:`LinPoly.rebase` performs that rewriting; equality compares the
p-base normal form, so it is independent of the base a polynomial was
written in.
"""

from math import gcd

import numpy as np

from .errors import BothZero, CoefficientsOutsideFq, TowerMismatch
from .gf import FieldElem
from .poly import OrdPoly, _code, _trim, ord_gcd


class LinPoly:
    __slots__ = ("tower", "base", "c")

    def __init__(self, tower, base, coeffs=()):
        tower.log_p(base)
        self.tower = tower
        self.base = base
        self.c = _trim(_code(tower, a) for a in coeffs)

    @classmethod
    def _raw(cls, tower, base, codes):
        obj = cls.__new__(cls)
        obj.tower = tower
        obj.base = base
        obj.c = _trim(codes)
        return obj

    @classmethod
    def monomial(cls, tower, base, k=0, coeff=1):
        """coeff * x^(base^k)."""
        return cls(tower, base, [0] * k + [coeff])

    @property
    def coeffs(self):
        return tuple(FieldElem(self.tower, v) for v in self.c)

    @property
    def degree(self):
        """Largest i with a nonzero coefficient of x^(B^i); -1 for zero."""
        return len(self.c) - 1

    def is_zero(self):
        return not self.c

    def _log_base(self):
        return self.tower.log_p(self.base)

    # --- base changes ---

    def rebase(self, new_base):
        """The same polynomial written over ``new_base``.

        Going to a finer base pads with zeros; going to a coarser one
        requires the skipped coefficients to vanish.
        """
        t = self.tower
        u, v = self._log_base(), t.log_p(new_base)
        if u == v:
            return self
        if v and u % v == 0:
            step = u // v
            out = [0] * (step * (len(self.c) - 1) + 1) if self.c else []
            for i, a in enumerate(self.c):
                out[i * step] = a
            return LinPoly._raw(t, new_base, out)
        if u and v % u == 0:
            step = v // u
            if any(a for i, a in enumerate(self.c) if i % step):
                raise ValueError(f"not expressible over base {new_base}")
            return LinPoly._raw(t, new_base, self.c[::step])
        return self.rebase(t.p ** gcd(u, v)).rebase(new_base)

    def normal_form(self):
        """Coefficient tuple over base p."""
        return self.rebase(self.tower.p).c

    # --- ring operations ---

    def _common(self, g):
        if not isinstance(g, LinPoly):
            raise TypeError("expected a LinPoly")
        if g.tower is not self.tower:
            raise TowerMismatch("polynomials over different towers")
        t = self.tower
        b = t.p ** gcd(self._log_base(), g._log_base())
        return self.rebase(b), g.rebase(b), b

    def __add__(self, g):
        f, g, b = self._common(g)
        t = self.tower
        a, c = f.c, g.c
        if len(a) < len(c):
            a, c = c, a
        out = list(a)
        for i, v in enumerate(c):
            out[i] = t.add(out[i], v)
        return LinPoly._raw(t, b, out)

    def __neg__(self):
        t = self.tower
        return LinPoly._raw(t, self.base, [t.neg(v) for v in self.c])

    def __sub__(self, g):
        return self + (-g)

    def scale(self, a):
        """The polynomial a * f (a scalar multiple, not a composition)."""
        return self._scale_code(_code(self.tower, a))

    def _scale_code(self, a):
        t = self.tower
        return LinPoly._raw(t, self.base, [t.mul(a, v) for v in self.c])

    def compose(self, g):
        """f(g(x)), written over the finest common base b.

        (f o g)_k = sum_{i + j = k} f_i * g_j^(b^i).
        """
        f, g, b = self._common(g)
        t = self.tower
        if not f.c or not g.c:
            return LinPoly._raw(t, b, ())
        out = [0] * (len(f.c) + len(g.c) - 1)
        for i, a in enumerate(f.c):
            if not a:
                continue
            for j, v in enumerate(g.c):
                if v:
                    out[i + j] = t.add(out[i + j], t.mul(a, t.frob(v, b, i)))
        return LinPoly._raw(t, b, out)

    def power(self, k):
        """k-fold composition f^[k]."""
        result = LinPoly.monomial(self.tower, self.base)
        for _ in range(k):
            result = result.compose(self)
        return result

    def twist(self, j, base=None):
        """Raise every coefficient to the power base^j (base defaults to r)."""
        t = self.tower
        base = t.r if base is None else base
        return LinPoly._raw(t, self.base, [t.frob(v, base, j) for v in self.c])

    # --- evaluation ---

    def eval(self, z):
        t = self.tower
        z = _code(t, z)
        acc = 0
        for a in self.c:
            if a:
                acc = t.add(acc, t.mul(a, z))
            z = t.frob(z, self.base)
        return FieldElem(t, acc)

    __call__ = eval

    def eval_vec(self, zs):
        t = self.tower
        zs = np.asarray(zs, dtype=np.int64)
        acc = np.zeros_like(zs)
        step = self._log_base()
        for i, a in enumerate(self.c):
            if a:
                acc = t.vadd(acc, t.vmul(zs, np.full_like(zs, a)))
            if i + 1 < len(self.c):
                zs = t.vfrob_p(zs, step)
        return acc

    # --- associates ---

    def associate(self):
        """The conventional associate sum_i a_i x^i."""
        return OrdPoly._raw(self.tower, self.c)

    def in_subfield(self, degree):
        t = self.tower
        return all(t.in_subfield(v, degree) for v in self.c)

    def monic(self):
        if not self.c:
            return self
        return self._scale_code(self.tower.inv(self.c[-1]))

    def __eq__(self, g):
        if not isinstance(g, LinPoly):
            return NotImplemented
        return self.tower is g.tower and self.normal_form() == g.normal_form()

    def __hash__(self):
        return hash((id(self.tower), self.normal_form()))

    def __repr__(self):
        return f"LinPoly[{self.base}]({self.render()})"

    def render(self):
        """Text form ``a_i · X^(B^i)`` joined by `` + ``, highest index first."""
        if not self.c:
            return "0"
        terms = []
        for i in range(len(self.c) - 1, -1, -1):
            if self.c[i]:
                cf = FieldElem(self.tower, self.c[i]).render()
                terms.append(f"{cf} · X^({self.base}^{i})")
        return " + ".join(terms)


def lin_eval(f, z):
    return f.eval(z)


def lin_compose(f, g):
    return f.compose(g)


def associate(f):
    return f.associate()


def lift(g, base):
    """Inverse of :func:`associate`: sum_i g_i x^i -> sum_i g_i x^(base^i)."""
    return LinPoly._raw(g.tower, base, g.c)


def twist(f, j, base=None):
    return f.twist(j, base)


def lin_gcd(f, g):
    """gcd of two q-linearized polynomials over F_q, via their associates.

    The result is normalized so that its associate is monic.
    """
    t = f.tower
    if g.tower is not t:
        raise TowerMismatch("polynomials over different towers")
    q = t.q
    try:
        f, g = f.rebase(q), g.rebase(q)
    except ValueError as exc:
        raise CoefficientsOutsideFq("operands are not q-linearized") from exc
    dq = t.level_degree("q")
    if not (f.in_subfield(dq) and g.in_subfield(dq)):
        raise CoefficientsOutsideFq("coefficients must lie in F_q")
    if f.is_zero() and g.is_zero():
        raise BothZero("gcd(0, 0) is undefined")
    return lift(ord_gcd(f.associate(), g.associate()), q)


def root_set(f, zs):
    """The codes in ``zs`` at which ``f`` vanishes, as a Python set."""
    zs = np.asarray(zs, dtype=np.int64)
    return {int(z) for z in zs[f.eval_vec(zs) == 0]}
