"""Finite field towers F_p < F_r < F_q < F_{q^e} < F_{q^E} inside one ambient field.

An element of the ambient field F_{p^N} is encoded as a nonnegative int whose
base-p digits are its coordinates in the power basis 1, x, ..., x^(N-1)
(bit i for p = 2).  Inner loops work on these raw codes, or on numpy arrays
of them; :class:`FieldElem` is the tagged wrapper handed to users.

Subfields are never embedded explicitly: F_{p^d} is the set of fixed points
of x -> x^(p^d), so every tower level lives in the same ambient field.
"""

from functools import lru_cache
from itertools import product

import numpy as np

from . import linalg
from .errors import (
    DegreeCapExceeded,
    DivisionByZero,
    NonDividingDegrees,
    NonPrimeP,
    NotInTopField,
    TowerMismatch,
)

MAX_DEGREE = 64
# log/exp tables are built for fields up to this many elements
TABLE_LIMIT = 1 << 16
# enumeration cap for subfields
ENUM_LIMIT = 1 << 24


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_factors(n):
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


def _divisors(n):
    return [d for d in range(1, n + 1) if n % d == 0]


# --- polynomials over F_p as low-first int lists (used for the modulus only) ---

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, m, p):
    a = list(a)
    dm = len(m) - 1
    inv = pow(m[-1], p - 2, p)
    while len(_ptrim(a)) - 1 >= dm:
        c = a[-1] * inv % p
        shift = len(a) - 1 - dm
        for i, mc in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mc) % p
    return a


def _pmulmod(a, b, m, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pmod(out, m, p)


def _ppowmod(a, k, m, p):
    result = [1]
    while k:
        if k & 1:
            result = _pmulmod(result, a, m, p)
        a = _pmulmod(a, a, m, p)
        k >>= 1
    return _pmod(result, m, p)


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def is_irreducible(f, p):
    """Rabin-style test for a monic ``f`` (low-first coefficients) over F_p."""
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    powers = {}
    h = x
    for k in range(1, n + 1):
        h = _ppowmod(h, p, f, p)
        powers[k] = h
    if _ptrim(list(powers[n])) != x:
        return False
    for k in _divisors(n)[:-1]:
        diff = list(powers[k]) + [0] * 2
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(f, diff, p)) > 1:
            return False
    return True


def _b2mulmod(a, b, f, n):
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    while r.bit_length() > n:
        r ^= f << (r.bit_length() - 1 - n)
    return r


def _b2mod(a, b):
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def _b2gcd(a, b):
    while b:
        a, b = b, _b2mod(a, b)
    return a


def _is_irreducible_gf2(f, n):
    """Same test as :func:`is_irreducible` with F_2[x] packed into int bitmasks."""
    if not f & 1 or bin(f).count("1") % 2 == 0:
        # divisible by x or by x + 1
        return n == 1
    powers = {}
    h = 2
    for k in range(1, n + 1):
        h = _b2mulmod(h, h, f, n)
        powers[k] = h
    if powers[n] != 2:
        return False
    return all(_b2gcd(f, powers[k] ^ 2) == 1 for k in _divisors(n)[:-1])


def smallest_irreducible(p, n):
    """Lexicographically smallest monic irreducible of degree ``n`` over F_p.

    Coefficient tuples (c_0, ..., c_{n-1}) are compared low-degree-first.
    """
    if n == 1:
        return (0, 1)
    if p == 2:
        # c_1 is the most significant digit of the candidate index
        for idx in range(1 << (n - 1)):
            f = 1 | (1 << n)
            for i in range(1, n):
                if (idx >> (n - 1 - i)) & 1:
                    f |= 1 << i
            if _is_irreducible_gf2(f, n):
                return tuple((f >> i) & 1 for i in range(n + 1))
    # a zero constant term means x divides f
    for c0 in range(1, p):
        for tail in product(range(p), repeat=n - 1):
            f = [c0, *tail, 1]
            if is_irreducible(f, p):
                return tuple(f)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class FieldTower:
    """The tower F_p < F_r < F_q < F_{q^e} < F_{q^(e*aux_factor)}.

    ``r = p**s``, ``q = r**m``.  Instances are immutable after construction
    and may be shared freely between threads and processes.
    """

    def __init__(self, p, s, m, e, aux_factor=1):
        if not is_prime(p):
            raise NonPrimeP(f"{p} is not prime")
        for name, v in (("s", s), ("m", m), ("e", e), ("aux_factor", aux_factor)):
            if v < 1:
                raise ValueError(f"{name} must be positive, got {v}")
        degree = s * m * e * aux_factor
        if degree > MAX_DEGREE:
            raise DegreeCapExceeded(f"ambient degree {degree} exceeds {MAX_DEGREE}")
        self.p, self.s, self.m, self.e, self.aux_factor = p, s, m, e, aux_factor
        self.degree = degree
        self.r = p ** s
        self.q = self.r ** m
        self.order = p ** degree
        self.modulus = smallest_irreducible(p, degree)
        self._modmask = sum(c << i for i, c in enumerate(self.modulus)) if p == 2 else None
        self._pows = [p ** i for i in range(degree + 1)]
        # images of x^i under x -> x^p, as codes and as a coordinate matrix
        self.frob_cols = tuple(self._slow_pow(self._pows[i], p) for i in range(degree))
        self.frob_matrix = np.array([self.coords(c) for c in self.frob_cols], dtype=np.int64).T
        self._exp = self._log = None
        self._exp_np = self._log_np = None
        if self.order <= TABLE_LIMIT:
            self._build_tables()
        self._basis_cache = {}

    def __repr__(self):
        return (f"FieldTower(p={self.p}, s={self.s}, m={self.m}, e={self.e}, "
                f"aux_factor={self.aux_factor})")

    def __reduce__(self):
        return (build_tower, (self.p, self.s, self.m, self.e, self.aux_factor))

    # --- level bookkeeping ---

    def level_degree(self, level):
        """Degree over F_p of a tower level, given by name or by field size."""
        named = {
            "p": 1,
            "r": self.s,
            "q": self.s * self.m,
            "qe": self.s * self.m * self.e,
            "ambient": self.degree,
            "aux": self.degree,
        }
        if isinstance(level, str):
            return named[level]
        d, size = 0, 1
        while size < level:
            size *= self.p
            d += 1
        if size != level or d == 0 or self.degree % d:
            raise NonDividingDegrees(f"{level} is not a subfield size of {self!r}")
        return d

    def level_size(self, level):
        return self.p ** self.level_degree(level)

    # --- encoding ---

    def coords(self, v):
        p = self.p
        out = []
        for _ in range(self.degree):
            v, c = divmod(v, p)
            out.append(c)
        return tuple(out)

    def from_coords(self, cs):
        if len(cs) > self.degree:
            raise ValueError("too many coordinates")
        return sum((c % self.p) * self._pows[i] for i, c in enumerate(cs))

    def const(self, n):
        """Code of the prime-field element n mod p."""
        return n % self.p

    def elem(self, v):
        return FieldElem(self, v)

    # --- scalar arithmetic on codes ---

    def add(self, a, b):
        if self.p == 2:
            return a ^ b
        if self.degree == 1:
            return (a + b) % self.p
        return self.from_coords([x + y for x, y in zip(self.coords(a), self.coords(b))])

    def neg(self, a):
        if self.p == 2:
            return a
        if self.degree == 1:
            return -a % self.p
        return self.from_coords([-x for x in self.coords(a)])

    def sub(self, a, b):
        if self.p == 2:
            return a ^ b
        return self.add(a, self.neg(b))

    def scale(self, a, k):
        """k * a for an integer k."""
        k %= self.p
        if k == 0:
            return 0
        if k == 1:
            return a
        return self.from_coords([k * x for x in self.coords(a)])

    def mul(self, a, b):
        if not a or not b:
            return 0
        if self._log is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._slow_mul(a, b)

    def pow(self, a, k):
        if k < 0:
            return self.pow(self.inv(a), -k)
        if k == 0:
            return 1
        if not a:
            return 0
        if self._log is not None:
            return self._exp[(self._log[a] * k) % (self.order - 1)]
        return self._slow_pow(a, k % (self.order - 1) or (self.order - 1))

    def inv(self, a):
        if not a:
            raise DivisionByZero("inverse of zero")
        if self._log is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self._slow_pow(a, self.order - 2)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def frob_p(self, a, times=1):
        """a^(p^times), by repeated application of the p-power matrix."""
        times %= self.degree
        if not times or not a:
            return a
        if self._log is not None:
            return self._exp[(self._log[a] * pow(self.p, times, self.order - 1)) % (self.order - 1)]
        for _ in range(times):
            a = self._apply_frob(a)
        return a

    def frob(self, a, base, k=1):
        """a^(base^k) for base a power of p."""
        return self.frob_p(a, self.log_p(base) * k)

    def log_p(self, base):
        t, b = 0, 1
        while b < base:
            b *= self.p
            t += 1
        if b != base:
            raise ValueError(f"{base} is not a power of {self.p}")
        return t

    def in_subfield(self, a, degree):
        return self.frob_p(a, degree) == a

    def _apply_frob(self, a):
        if self.p == 2:
            out, i = 0, 0
            while a:
                if a & 1:
                    out ^= self.frob_cols[i]
                a >>= 1
                i += 1
            return out
        out = 0
        for i, c in enumerate(self.coords(a)):
            if c:
                out = self.add(out, self.scale(self.frob_cols[i], c))
        return out

    def _slow_mul(self, a, b):
        if self.p == 2:
            r = 0
            while b:
                if b & 1:
                    r ^= a
                a <<= 1
                b >>= 1
            n, mm = self.degree, self._modmask
            while r.bit_length() > n:
                r ^= mm << (r.bit_length() - 1 - n)
            return r
        prod_ = [0] * (2 * self.degree - 1)
        for i, x in enumerate(self.coords(a)):
            if x:
                for j, y in enumerate(self.coords(b)):
                    prod_[i + j] += x * y
        return self.from_coords(_pmod([c % self.p for c in prod_], self.modulus, self.p)
                                if self.degree > 1 else [sum(prod_) % self.p])

    def _slow_pow(self, a, k):
        result = 1
        while k:
            if k & 1:
                result = self._slow_mul(result, a)
            a = self._slow_mul(a, a)
            k >>= 1
        return result

    def _build_tables(self):
        n = self.order - 1
        g = self._primitive_element()
        exp = [1] * (2 * n)
        log = [0] * self.order
        v = 1
        for i in range(n):
            exp[i] = v
            log[v] = i
            v = self._slow_mul(v, g)
        for i in range(n, 2 * n):
            exp[i] = exp[i - n]
        self._exp, self._log = exp, log
        self._exp_np = np.array(exp, dtype=np.int64)
        self._log_np = np.array(log, dtype=np.int64)
        self.primitive = g

    def _primitive_element(self):
        n = self.order - 1
        ls = prime_factors(n)
        for g in range(1, self.order):
            if all(self._slow_pow(g, n // l) != 1 for l in ls):
                return g
        raise AssertionError("no primitive element")  # pragma: no cover

    # --- vectorized arithmetic on int64 arrays of codes ---

    def _check_vec(self):
        if self.order > 1 << 62:
            raise DegreeCapExceeded("vector operations need codes below 2**62")

    def digits(self, v):
        v = np.asarray(v, dtype=np.int64)
        if self.p == 2:
            return (v[..., None] >> np.arange(self.degree, dtype=np.int64)) & 1
        pw = np.array(self._pows[: self.degree], dtype=np.int64)
        return (v[..., None] // pw) % self.p

    def undigits(self, d):
        pw = np.array(self._pows[: self.degree], dtype=np.int64)
        return (np.asarray(d, dtype=np.int64) % self.p) @ pw

    def vlinear(self, v, mat):
        """Apply an F_p-linear map, given by its coordinate matrix, to an array of codes."""
        return self.undigits((self.digits(v) @ np.asarray(mat).T) % self.p)

    def vadd(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.p == 2:
            return a ^ b
        return self.undigits(self.digits(a) + self.digits(b))

    def vneg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.p == 2:
            return a
        return self.undigits(-self.digits(a))

    def vsub(self, a, b):
        return self.vadd(a, self.vneg(b))

    def vscale(self, a, k):
        a = np.asarray(a, dtype=np.int64)
        k %= self.p
        if k == 0:
            return np.zeros_like(a)
        if k == 1:
            return a
        return self.undigits(k * self.digits(a))

    def vmul(self, a, b):
        self._check_vec()
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self._log_np is not None:
            a, b = np.broadcast_arrays(a, b)
            out = self._exp_np[self._log_np[a] + self._log_np[b]]
            out[(a == 0) | (b == 0)] = 0
            return out
        if self.p == 2:
            n, mm = self.degree, self._modmask
            a, b = np.broadcast_arrays(a, b)
            a = a.copy()
            acc = np.zeros_like(a)
            for i in range(n):
                acc ^= a * ((b >> i) & 1)
                a <<= 1
                a ^= ((a >> n) & 1) * mm
            return acc
        return np.frompyfunc(self.mul, 2, 1)(a, b).astype(np.int64)

    def vsquare(self, a):
        if self._log_np is None and self.p == 2:
            return self.vlinear(a, self.frob_matrix)
        return self.vmul(a, a)

    def vpow(self, a, k):
        self._check_vec()
        a = np.asarray(a, dtype=np.int64)
        if k < 0:
            raise ValueError("negative exponent")
        if k == 0:
            return np.ones_like(a)
        if self._log_np is not None:
            kk = k % (self.order - 1)
            out = self._exp_np[(self._log_np[a] * kk) % (self.order - 1)]
            out[a == 0] = 0
            return out
        result = np.ones_like(a)
        base = a
        while k:
            if k & 1:
                result = self.vmul(result, base)
            k >>= 1
            if k:
                base = self.vsquare(base)
        return result

    def vfrob_p(self, a, times=1):
        a = np.asarray(a, dtype=np.int64)
        times %= self.degree
        if not times:
            return a
        if self._log_np is not None:
            kk = pow(self.p, times, self.order - 1)
            out = self._exp_np[(self._log_np[a] * kk) % (self.order - 1)]
            out[a == 0] = 0
            return out
        mat = self.frob_matrix
        for _ in range(times - 1):
            mat = (self.frob_matrix @ mat) % self.p
        return self.vlinear(a, mat)

    def vfrob(self, a, base, k=1):
        return self.vfrob_p(a, self.log_p(base) * k)

    def vin_subfield(self, a, degree):
        a = np.asarray(a, dtype=np.int64)
        return self.vfrob_p(a, degree) == a

    # --- subfields ---

    def subfield_basis(self, degree):
        """F_p-basis (codes) of the subfield F_{p^degree}, as the kernel of Frob^degree - 1."""
        if self.degree % degree:
            raise NonDividingDegrees(f"{degree} does not divide {self.degree}")
        if degree not in self._basis_cache:
            fd = np.eye(self.degree, dtype=np.int64)
            for _ in range(degree):
                fd = (self.frob_matrix @ fd) % self.p
            ker = linalg.kernel((fd - np.eye(self.degree, dtype=np.int64)) % self.p, self.p)
            basis = tuple(self.from_coords([int(c) for c in row]) for row in ker)
            self._basis_cache[degree] = basis
        return self._basis_cache[degree]

    def enumerate_codes(self, degree):
        """All codes of F_{p^degree} as an int64 array, in a fixed order."""
        size = self.p ** degree
        if size > ENUM_LIMIT:
            raise DegreeCapExceeded(f"subfield of size {size} exceeds enumeration cap")
        self._check_vec()
        out = np.zeros(1, dtype=np.int64)
        for b in self.subfield_basis(degree):
            layers = [out]
            for k in range(1, self.p):
                layers.append(self.vadd(out, np.full_like(out, self.scale(b, k))))
            out = np.concatenate(layers)
        return out


def build_tower(p, s=1, m=1, e=1, aux_factor=1):
    """Build (or fetch the cached) tower with the given parameters.

    Equal parameters always give the same object, however they are passed.
    """
    return _cached_tower(int(p), int(s), int(m), int(e), int(aux_factor))


@lru_cache(maxsize=None)
def _cached_tower(p, s, m, e, aux_factor):
    return FieldTower(p, s, m, e, aux_factor)


class FieldElem:
    """An element of a tower's ambient field."""

    __slots__ = ("tower", "v")

    def __init__(self, tower, v):
        self.tower = tower
        self.v = v

    @property
    def coeffs(self):
        return self.tower.coords(self.v)

    def _other(self, y):
        if isinstance(y, FieldElem):
            if y.tower is not self.tower:
                raise TowerMismatch("elements belong to different towers")
            return y.v
        if isinstance(y, int):
            return self.tower.const(y)
        return NotImplemented

    def __add__(self, y):
        w = self._other(y)
        if w is NotImplemented:
            return w
        return FieldElem(self.tower, self.tower.add(self.v, w))

    __radd__ = __add__

    def __sub__(self, y):
        w = self._other(y)
        if w is NotImplemented:
            return w
        return FieldElem(self.tower, self.tower.sub(self.v, w))

    def __rsub__(self, y):
        w = self._other(y)
        if w is NotImplemented:
            return w
        return FieldElem(self.tower, self.tower.sub(w, self.v))

    def __neg__(self):
        return FieldElem(self.tower, self.tower.neg(self.v))

    def __mul__(self, y):
        w = self._other(y)
        if w is NotImplemented:
            return w
        return FieldElem(self.tower, self.tower.mul(self.v, w))

    __rmul__ = __mul__

    def __truediv__(self, y):
        w = self._other(y)
        if w is NotImplemented:
            return w
        return FieldElem(self.tower, self.tower.div(self.v, w))

    def __rtruediv__(self, y):
        w = self._other(y)
        if w is NotImplemented:
            return w
        return FieldElem(self.tower, self.tower.div(w, self.v))

    def __pow__(self, k):
        return FieldElem(self.tower, self.tower.pow(self.v, k))

    def inverse(self):
        return FieldElem(self.tower, self.tower.inv(self.v))

    def frobenius(self, base, k=1):
        return FieldElem(self.tower, self.tower.frob(self.v, base, k))

    def __eq__(self, y):
        if isinstance(y, FieldElem):
            return self.tower is y.tower and self.v == y.v
        if isinstance(y, int):
            return self.v == self.tower.const(y)
        return NotImplemented

    def __hash__(self):
        return hash((id(self.tower), self.v))

    def __bool__(self):
        return self.v != 0

    def __repr__(self):
        return f"FieldElem{self.coeffs}"

    def render(self):
        return "(" + ",".join(str(c) for c in self.coeffs) + ")"


def _same_tower(x, y):
    if x.tower is not y.tower:
        raise TowerMismatch("elements belong to different towers")


def arith(op, x, y=None):
    """Dispatch ``add``, ``sub``, ``mul``, ``div``, ``inv`` or ``pow`` on field elements."""
    if op == "inv":
        return x.inverse()
    if op == "pow":
        return x ** y
    if isinstance(y, FieldElem):
        _same_tower(x, y)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown operation {op!r}")


def frobenius(x, base, k=1):
    """x^(base^k)."""
    return x.frobenius(base, k)


def in_subfield(x, level):
    """True iff x lies in the tower level (name or field size)."""
    t = x.tower
    return t.in_subfield(x.v, t.level_degree(level))


def norm_trace(x, top, bottom):
    """Relative norm and trace of ``x`` from F_top down to F_bottom (field sizes)."""
    t = x.tower
    dt, db = t.level_degree(top), t.level_degree(bottom)
    if dt % db:
        raise NonDividingDegrees(f"F_{bottom} is not a subfield of F_{top}")
    if not t.in_subfield(x.v, dt):
        raise NotInTopField(f"{x!r} is not in F_{top}")
    ratio = dt // db
    big, small = t.p ** dt, t.p ** db
    norm = t.pow(x.v, (big - 1) // (small - 1))
    trace = 0
    for i in range(ratio):
        trace = t.add(trace, t.frob_p(x.v, db * i))
    return FieldElem(t, norm), FieldElem(t, trace)


def enumerate_subfield(tower, level):
    """Yield every element of a tower level exactly once, in a deterministic order."""
    for v in tower.enumerate_codes(tower.level_degree(level)):
        yield FieldElem(tower, int(v))


def subfield_generator(tower, level):
    """First element, in enumeration order, of ``level`` lying in no proper subfield of it."""
    d = tower.level_degree(level)
    proper = [k for k in range(1, d) if d % k == 0]
    for v in tower.enumerate_codes(d):
        v = int(v)
        if not any(tower.in_subfield(v, k) for k in proper):
            return FieldElem(tower, v)
    raise AssertionError("subfield has no generator")  # pragma: no cover
