"""Normalized period-matrix charts, the Pluecker embedding, and conic certificates.

Only the C-invertible chart is implemented: a complex structure
I = [[A, B], [C, D]] with invertible C corresponds to Z = (i*1 - A) C^{-1},
and conversely Z determines I through (1|Z) I = i (1|Z).  Points outside the
chart raise OutsideChartError instead of being re-charted.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DimensionError, OutsideChartError, PreconditionError, SamplingError
from .linalg import RANK_CUTOFF, frobenius
from .structures import ComplexStructure, TwistorSphere

CONIC_RESIDUAL_TOL = 1e-8
PLANE_RANK_CUTOFF = 1e-7
PLUECKER_RELATION_TOL = 1e-9


class PeriodMatrix:
    """Normalized chart point: the full period matrix is (1 | Z), Z complex 2n x 2n."""

    __slots__ = ("n", "z")

    def __init__(self, z):
        z = np.array(z, dtype=complex)
        if z.ndim != 2 or z.shape[0] != z.shape[1]:
            raise DimensionError(f"Z must be square, got shape {z.shape}")
        if z.shape[0] % 2:
            raise DimensionError(f"Z must have even size 2n, got {z.shape[0]}")
        # The 2n-plane spanned by the rows of (1|Z) must miss the real
        # subspace; equivalently the stacked real matrix below is invertible.
        stacked = _real_stack(z)
        s = np.linalg.svd(stacked, compute_uv=False)
        if s[-1] <= 1e-12 * s[0]:
            raise OutsideChartError("period plane meets the real subspace")
        z.setflags(write=False)
        self.n = z.shape[0] // 2
        self.z = z

    @property
    def full(self):
        """The 2n x 4n matrix (1 | Z)."""
        return np.hstack([np.eye(2 * self.n), self.z])

    def __repr__(self):
        return f"PeriodMatrix(n={self.n})"


def _real_stack(z):
    p = np.hstack([np.eye(z.shape[0]), z])
    return np.vstack([p.real, p.imag])


def complex_structure_from_period(p):
    """The unique real I with (1|Z) I = i (1|Z).

    Splitting into real and imaginary parts gives the real linear system
    [[Re P], [Im P]] I = [[-Im P], [Re P]]; its solution squares to -1
    automatically.
    """
    full = p.full
    stacked = np.vstack([full.real, full.imag])
    rhs = np.vstack([-full.imag, full.real])
    s = np.linalg.svd(stacked, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise OutsideChartError("chart system is singular at this period")
    mat = np.linalg.solve(stacked, rhs)
    return ComplexStructure(mat)


def period_from_complex_structure(structure, min_rcond=1e-12):
    """Z = (i*1 - A) C^{-1} for I = [[A, B], [C, D]]; requires invertible C."""
    mat = structure.mat
    half = mat.shape[0] // 2
    a = mat[:half, :half]
    c = mat[half:, :half]
    s = np.linalg.svd(c, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= min_rcond * s[0]:
        raise OutsideChartError(
            f"block C is singular (rcond {0.0 if s[0] == 0.0 else s[-1] / s[0]:.3e}); "
            "the structure lies outside the normalized chart"
        )
    z = np.linalg.solve(c.T, (1j * np.eye(half) - a).T).T
    return PeriodMatrix(z)


def chart_complex_linearity_check(p, direction, h):
    """Finite-difference residual of df(iX) = I_Z df(X) at the chart point.

    Returns ||(f(Z+ihX)-f(Z))/h - I_Z (f(Z+hX)-f(Z))/h||_F, which is O(h)
    when the chart map is complex-linear in the stated sense.
    """
    direction = np.asarray(direction, dtype=complex)
    if direction.shape != p.z.shape:
        raise DimensionError("direction must match the period matrix shape")
    base = complex_structure_from_period(p).mat
    d_imag = (complex_structure_from_period(PeriodMatrix(p.z + 1j * h * direction)).mat - base) / h
    d_real = (complex_structure_from_period(PeriodMatrix(p.z + h * direction)).mat - base) / h
    return frobenius(d_imag - base @ d_real)


_SUBSET_CACHE = {}


def pluecker_subsets(n):
    """Sorted 2n-subsets of {0..4n-1} in lexicographic order."""
    if n not in _SUBSET_CACHE:
        subsets = list(combinations(range(4 * n), 2 * n))
        _SUBSET_CACHE[n] = (subsets, {s: i for i, s in enumerate(subsets)})
    return _SUBSET_CACHE[n][0]


def _subset_index(n):
    pluecker_subsets(n)
    return _SUBSET_CACHE[n][1]


class PlueckerVector:
    """Maximal minors of (1|Z), normalized so the first nonzero coordinate is 1."""

    __slots__ = ("n", "coords")

    def __init__(self, coords, n, check_relations=True):
        coords = np.array(coords, dtype=complex)
        peak = np.max(np.abs(coords))
        if peak == 0.0:
            raise PreconditionError("Pluecker vector must not vanish identically")
        first = int(np.argmax(np.abs(coords) > 1e-12 * peak))
        coords = coords / coords[first]
        coords.setflags(write=False)
        self.n = n
        self.coords = coords
        if check_relations:
            worst = self.relation_residual()
            if worst > PLUECKER_RELATION_TOL:
                raise PreconditionError(
                    f"sampled Pluecker relation residual {worst:.3e} exceeds "
                    f"{PLUECKER_RELATION_TOL:.0e}"
                )

    def _coord(self, ordered):
        """Minor on an ordered column tuple: sign times the sorted-subset coordinate."""
        if len(set(ordered)) != len(ordered):
            return 0.0 + 0.0j
        perm = list(ordered)
        sign = 1
        for i in range(len(perm)):
            for j in range(i + 1, len(perm)):
                if perm[i] > perm[j]:
                    sign = -sign
        index = _subset_index(self.n)[tuple(sorted(ordered))]
        return sign * self.coords[index]

    def relation_residual(self, samples=5, seed=0):
        """Worst residual of a fixed sample of three-term Pluecker relations.

        For a fixed (2n-2)-set S and four extra columns i<j<k<l the minors
        q(a,b) on ordered columns (S..., a, b) satisfy
        q(i,j)q(k,l) - q(i,k)q(j,l) + q(i,l)q(j,k) = 0.
        """
        rng = np.random.default_rng(seed)
        total = 4 * self.n
        worst = 0.0
        for _ in range(samples):
            cols = rng.permutation(total)
            moving = np.sort(cols[:4])
            fixed = tuple(sorted(cols[4 : 2 * self.n + 2]))
            i, j, k, l = (int(x) for x in moving)
            q = lambda a, b: self._coord(fixed + (a, b))
            value = q(i, j) * q(k, l) - q(i, k) * q(j, l) + q(i, l) * q(j, k)
            scale = max(
                abs(q(i, j) * q(k, l)), abs(q(i, k) * q(j, l)), abs(q(i, l) * q(j, k)), 1.0
            )
            worst = max(worst, abs(value) / scale)
        return worst

    def __repr__(self):
        return f"PlueckerVector(n={self.n}, len={self.coords.size})"


def pluecker(p, check_relations=True):
    """All 2n x 2n minors of (1|Z) in lexicographic subset order."""
    full = p.full
    coords = [np.linalg.det(full[:, cols]) for cols in pluecker_subsets(p.n)]
    return PlueckerVector(coords, p.n, check_relations=check_relations)


@dataclass
class ConicReport:
    plane_dim: int
    conic_residual: float
    degree: int
    note: str = ""


def verify_conic(sphere, m=32):
    """Sample the sphere through the chart, test plane containment and conic fit.

    The degree certificate is 2 exactly when the affine span of the Pluecker
    image is a plane and the quadric design matrix (1, x, y, x^2, xy, y^2) in
    orthonormal plane coordinates is rank deficient within CONIC_RESIDUAL_TOL.
    """
    if m < 8:
        raise PreconditionError("need at least 8 samples for a conic certificate")
    points = _sample_pluecker(sphere, m)
    centered = points - points.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    plane_dim = int(np.sum(svals > PLANE_RANK_CUTOFF * svals[0])) if svals[0] > 0 else 0
    _, _, vh = np.linalg.svd(centered)
    plane_coords = centered @ vh[:2].conj().T
    x, y = plane_coords[:, 0], plane_coords[:, 1]
    design = np.column_stack([np.ones_like(x), x, y, x * x, x * y, y * y])
    dvals = np.linalg.svd(design, compute_uv=False)
    if dvals[0] == 0.0 or int(np.sum(dvals > PLANE_RANK_CUTOFF * dvals[0])) < 5:
        return ConicReport(plane_dim, float("inf"), 0, "degenerate conic design matrix")
    residual = float(dvals[-1] / dvals[0])
    if plane_dim == 2 and residual < CONIC_RESIDUAL_TOL:
        return ConicReport(plane_dim, residual, 2)
    note = "" if plane_dim == 2 else f"image spans {plane_dim} affine dimensions, not a plane"
    return ConicReport(plane_dim, residual, 0, note)


def _sample_pluecker(sphere, m):
    """m usable Pluecker vectors of sphere points inside the chart.

    Fibonacci samples near a chart pole are skipped; if too many fall out,
    progressively denser grids are tried before giving up.
    """
    rows = []
    for factor in (1, 2, 4):
        rows = []
        for a, b, c in sphere.sample_coordinates(factor * m):
            try:
                point = sphere.point(a, b, c)
                period = period_from_complex_structure(point, min_rcond=1e-6)
            except OutsideChartError:
                continue
            rows.append(pluecker(period, check_relations=False).coords)
            if len(rows) == m:
                return np.array(rows)
    raise SamplingError(
        f"only {len(rows)} of {m} requested sphere samples landed inside the chart"
    )
