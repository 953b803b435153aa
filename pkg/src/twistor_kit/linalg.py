"""Shared numerical linear algebra: rank decisions, kernels, matrix functions.

All rank decisions in the package go through :func:`numerical_rank` /
:func:`nullspace` so the singular-value cutoff policy lives in one place.
"""

import numpy as np
from scipy.linalg import expm, logm

from .errors import ToleranceError

# Frobenius tolerance for algebraic identities (I^2 = -1, frame relations, ...).
TOL_STRUCT = 1e-9
# Relative singular-value cutoff for rank decisions.
RANK_CUTOFF = 1e-7
# Distance threshold for membership of a matrix in a sphere's 3-span.
MEMBERSHIP_TOL = 1e-8


def frobenius(a):
    return float(np.linalg.norm(a, "fro"))


def vec(a):
    """Row-major flattening used consistently for matrix-space operators."""
    return np.asarray(a).reshape(-1)


def unvec(v, size):
    return np.asarray(v).reshape(size, size)


def commutator_operator(j):
    """Matrix of X -> XJ - JX on row-major vectorized matrix space."""
    size = j.shape[0]
    eye = np.eye(size)
    return np.kron(eye, j.T) - np.kron(j, eye)


def anticommutator_operator(j):
    """Matrix of X -> XJ + JX on row-major vectorized matrix space."""
    size = j.shape[0]
    eye = np.eye(size)
    return np.kron(eye, j.T) + np.kron(j, eye)


def singular_values(m):
    return np.linalg.svd(np.asarray(m), compute_uv=False)


def numerical_rank(m, cutoff=RANK_CUTOFF, guard=None):
    """Rank of ``m`` with a relative singular-value cutoff.

    With ``guard`` set, raise :class:`ToleranceError` when some singular value
    lies within a factor ``guard`` of the threshold on either side, i.e. the
    rank decision is not clean.
    """
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    thr = cutoff * s[0]
    if guard is not None:
        ambiguous = (s > thr / guard) & (s < thr * guard)
        if np.any(ambiguous):
            raise ToleranceError(
                f"singular values {s[ambiguous]} lie near the rank cutoff {thr:.3e}"
            )
    return int(np.sum(s > thr))


def nullspace(m, cutoff=RANK_CUTOFF):
    """Orthonormal basis (columns) of the numerical kernel of ``m``."""
    m = np.asarray(m)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        return vh.conj().T
    rank = int(np.sum(s > cutoff * s[0]))
    return vh[rank:].conj().T


def minimum_norm_solve(a, b, cutoff=1e-9):
    """Minimum-norm least-squares solution of ``a x = b`` via pseudoinverse."""
    sol, _, _, _ = np.linalg.lstsq(a, b, rcond=cutoff)
    return sol


def matrix_exp(a):
    return expm(np.asarray(a, dtype=float))


def real_log(a, tol=1e-8):
    """Principal real logarithm, or None if the matrix has no real log.

    A real matrix has a real principal logarithm when no eigenvalue lies on
    the closed negative real axis.
    """
    a = np.asarray(a, dtype=float)
    eigs = np.linalg.eigvals(a)
    scale = max(1.0, float(np.max(np.abs(eigs))))
    on_negative_axis = (np.abs(eigs.imag) < tol * scale) & (eigs.real < tol * scale)
    if np.any(on_negative_axis):
        return None
    log = logm(a)
    if np.linalg.norm(np.imag(log)) > 1e-8 * max(1.0, np.linalg.norm(np.real(log))):
        return None
    return np.real(log)


def fibonacci_sphere(m):
    """m roughly equidistributed points on the unit 2-sphere."""
    i = np.arange(m)
    z = 1.0 - 2.0 * (i + 0.5) / m
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = np.pi * (3.0 - np.sqrt(5.0))
    theta = golden * i
    return np.column_stack([z, r * np.cos(theta), r * np.sin(theta)])


def project_onto_span(vectors, target):
    """Orthogonal projection of ``target`` onto span(vectors) (Frobenius).

    ``vectors`` is a sequence of matrices; returns (projection, distance).
    """
    basis = np.column_stack([vec(v) for v in vectors])
    q, _ = np.linalg.qr(basis)
    t = vec(target)
    proj = q @ (q.T @ t)
    return unvec(proj, target.shape[0]), float(np.linalg.norm(t - proj))
