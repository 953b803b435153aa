"""Exact rational kernels and lattice reduction for integrality certificates.

Rank-zero claims about integral forms cannot rest on floating point alone:
the kernel computation here is exact over arbitrary-precision fractions, and
the height-bounded search reduces a stacked lattice to find all short integer
vectors near a floating-point kernel.
"""

from fractions import Fraction

import numpy as np

from .errors import ModeError


def to_fraction(value, max_denominator=10**6):
    """Exact Fraction from int/str/Fraction, or from a float that is a small rational.

    Floats are exact dyadic rationals; the reconstruction test rejects values
    that are not small rationals (conjugation noise) instead of silently
    rounding them.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    exact = Fraction(float(value))
    approx = exact.limit_denominator(max_denominator)
    if approx != exact:
        raise ModeError(
            f"value {value!r} is not a rational of denominator <= {max_denominator}"
        )
    return approx


def rational_matrix(rows):
    return [[to_fraction(x) for x in row] for row in rows]


def rational_rref(matrix):
    """Reduced row echelon form with pivot columns, exact.

    Pivots are chosen by largest numerator magnitude within the column, which
    keeps intermediate fractions from ballooning on typical integer inputs.
    """
    m = [row[:] for row in matrix]
    if not m:
        return m, []
    n_rows, n_cols = len(m), len(m[0])
    pivot_cols = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        best, best_key = None, -1
        for r in range(row, n_rows):
            entry = m[r][col]
            if entry != 0 and abs(entry.numerator) > best_key:
                best, best_key = r, abs(entry.numerator)
        if best is None:
            continue
        m[row], m[best] = m[best], m[row]
        pivot = m[row][col]
        m[row] = [x / pivot for x in m[row]]
        for r in range(n_rows):
            if r != row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[row])]
        pivot_cols.append(col)
        row += 1
    return m, pivot_cols


def rational_kernel(matrix):
    """Exact basis of the right kernel of a rational matrix (list of vectors)."""
    rref, pivot_cols = rational_rref(matrix)
    if not matrix:
        return []
    n_cols = len(matrix[0])
    free_cols = [c for c in range(n_cols) if c not in pivot_cols]
    basis = []
    for free in free_cols:
        v = [Fraction(0)] * n_cols
        v[free] = Fraction(1)
        for prow, pcol in enumerate(pivot_cols):
            v[pcol] = -rref[prow][free]
        basis.append(v)
    return basis


def rational_rank(matrix):
    _, pivot_cols = rational_rref(matrix)
    return len(pivot_cols)


def lll_reduce(basis, delta=0.99, max_steps=200000):
    """Lenstra-Lenstra-Lovasz reduction of the rows of ``basis``.

    Returns the reduced rows together with the integer coefficient matrix U
    with reduced = U @ basis.  Size reductions update the mu table in place
    (they do not change the Gram-Schmidt vectors); only swaps trigger a
    recomputation.
    """
    b = np.array(basis, dtype=float)
    n = b.shape[0]
    u = np.eye(n, dtype=np.int64)

    def gram_schmidt():
        star = np.zeros_like(b)
        mu = np.zeros((n, n))
        norms = np.zeros(n)
        for i in range(n):
            star[i] = b[i].copy()
            for j in range(i):
                mu[i, j] = 0.0 if norms[j] == 0.0 else (b[i] @ star[j]) / norms[j]
                star[i] -= mu[i, j] * star[j]
            norms[i] = star[i] @ star[i]
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    steps = 0
    swaps_since_refresh = 0
    while k < n:
        steps += 1
        if steps > max_steps:
            break
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q != 0:
                b[k] -= q * b[j]
                u[k] -= q * u[j]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
            continue
        b[[k - 1, k]] = b[[k, k - 1]]
        u[[k - 1, k]] = u[[k, k - 1]]
        swaps_since_refresh += 1
        if swaps_since_refresh >= 512:
            # Float mu updates drift over long runs; refresh from scratch.
            mu, norms = gram_schmidt()
            swaps_since_refresh = 0
            k = max(k - 1, 1)
            continue
        m = mu[k, k - 1]
        big = norms[k] + m * m * norms[k - 1]
        if big <= 0.0:
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
            continue
        mu_new = m * norms[k - 1] / big
        norms[k] = norms[k - 1] * norms[k] / big
        norms[k - 1] = big
        mu[[k - 1, k], : k - 1] = mu[[k, k - 1], : k - 1]
        mu[k, k - 1] = mu_new
        if k + 1 < n:
            t_col = mu[k + 1 :, k].copy()
            mu[k + 1 :, k] = mu[k + 1 :, k - 1] - m * t_col
            mu[k + 1 :, k - 1] = t_col + mu_new * mu[k + 1 :, k]
        k = max(k - 1, 1)
    return b, u
