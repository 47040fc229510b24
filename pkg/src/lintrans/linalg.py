"""Dense linear algebra over F_p on small integer matrices."""

import numpy as np


def rref(a, p):
    """Row-reduce ``a`` over F_p.

    Returns ``(r, t, pivots)`` with ``t @ a == r (mod p)``, ``r`` in reduced
    row echelon form and ``pivots`` the pivot column of each nonzero row.
    """
    r = np.array(a, dtype=np.int64) % p
    rows, cols = r.shape
    t = np.eye(rows, dtype=np.int64)
    pivots = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        nz = np.flatnonzero(r[row:, col])
        if nz.size == 0:
            continue
        k = row + nz[0]
        if k != row:
            r[[row, k]] = r[[k, row]]
            t[[row, k]] = t[[k, row]]
        inv = pow(int(r[row, col]), p - 2, p)
        r[row] = (r[row] * inv) % p
        t[row] = (t[row] * inv) % p
        for i in range(rows):
            if i != row and r[i, col]:
                f = r[i, col]
                r[i] = (r[i] - f * r[row]) % p
                t[i] = (t[i] - f * t[row]) % p
        pivots.append(col)
        row += 1
    return r, t, pivots


def kernel(a, p):
    """Basis of the right kernel of ``a`` over F_p, one vector per row."""
    r, _, pivots = rref(a, p)
    cols = r.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fcol in free:
        v = np.zeros(cols, dtype=np.int64)
        v[fcol] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-r[i, fcol]) % p
        basis.append(v)
    return np.array(basis, dtype=np.int64).reshape(len(basis), cols)


def section(a, p):
    """Matrix ``s`` with ``a @ s @ y == y (mod p)`` for every ``y`` in the image of ``a``.

    Free variables are set to zero, so the preimage chosen is deterministic.
    """
    r, t, pivots = rref(a, p)
    n = r.shape[1]
    s = np.zeros((n, t.shape[1]), dtype=np.int64)
    for i, pc in enumerate(pivots):
        s[pc] = t[i]
    return s
