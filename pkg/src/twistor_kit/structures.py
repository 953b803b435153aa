"""Complex structures on R^{4n}, twistor spheres, and the conjugation action.

The inner product used for sphere geometry is (u, v) = -tr(uv)/(4n).  It makes
every quaternionic frame orthonormal, is invariant under conjugation, and two
points of a common sphere are orthogonal exactly when they anticommute
(uv + vu = -2 (u,v) 1), so Gram-Schmidt in this product recovers a
quaternionic frame from any non-proportional co-spherical pair.
"""

import numpy as np

from .errors import (
    DegeneratePairError,
    DimensionError,
    InvalidStructureError,
    NormalizationError,
    NotCosphericalError,
    PreconditionError,
    SingularityError,
    ToleranceError,
)
from .linalg import (
    MEMBERSHIP_TOL,
    RANK_CUTOFF,
    TOL_STRUCT,
    commutator_operator,
    fibonacci_sphere,
    frobenius,
    project_onto_span,
    unvec,
    vec,
)


def is_complex_structure(mat, tol=TOL_STRUCT):
    """True iff ``mat`` squares to -1 within ``tol`` and has positive determinant."""
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
    size = mat.shape[0]
    if size % 2:
        raise DimensionError(f"complex structures need even size, got {size}")
    residual = frobenius(mat @ mat + np.eye(size))
    sign, _ = np.linalg.slogdet(mat)
    return bool(residual <= tol and sign > 0)


class ComplexStructure:
    """A 4n x 4n real matrix squaring to -1 (positively oriented by det > 0)."""

    __slots__ = ("n", "mat")

    def __init__(self, mat, tol=TOL_STRUCT):
        mat = np.array(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
        if mat.shape[0] % 4:
            raise DimensionError(f"size must be a multiple of 4, got {mat.shape[0]}")
        if not is_complex_structure(mat, tol=tol):
            residual = frobenius(mat @ mat + np.eye(mat.shape[0]))
            raise InvalidStructureError(
                f"matrix is not a complex structure (|M^2+1|_F = {residual:.3e})"
            )
        mat.setflags(write=False)
        self.n = mat.shape[0] // 4
        self.mat = mat

    @property
    def size(self):
        return 4 * self.n

    def __repr__(self):
        return f"ComplexStructure(n={self.n})"


class GroupElement:
    """An orientation-preserving automorphism of R^{4n} with cached inverse."""

    __slots__ = ("mat", "inv")

    def __init__(self, mat, inv=None, tol=TOL_STRUCT):
        mat = np.array(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {mat.shape}")
        sign, _ = np.linalg.slogdet(mat)
        if sign <= 0:
            raise InvalidStructureError("group elements must have positive determinant")
        if inv is None:
            inv = np.linalg.inv(mat)
        else:
            inv = np.array(inv, dtype=float)
        residual = frobenius(mat @ inv - np.eye(mat.shape[0]))
        if residual > tol:
            raise InvalidStructureError(
                f"inverse check failed (|g g^-1 - 1|_F = {residual:.3e})"
            )
        mat.setflags(write=False)
        inv.setflags(write=False)
        self.mat = mat
        self.inv = inv

    @property
    def size(self):
        return self.mat.shape[0]

    @classmethod
    def identity(cls, size):
        eye = np.eye(size)
        return cls(eye, inv=eye)

    def inverse(self):
        return GroupElement(self.inv, inv=self.mat)

    def compose(self, other):
        """Group product self * other."""
        return GroupElement(self.mat @ other.mat, inv=other.inv @ self.inv)

    def __repr__(self):
        return f"GroupElement(size={self.size})"


def sphere_dot(a, b):
    """The frame-independent inner product -tr(ab)/(4n) on sphere spans."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(-np.trace(a @ b) / a.shape[0])


class TwistorSphere:
    """Ordered quaternionic frame (I, J, K); points are aI + bJ + cK on the unit sphere."""

    __slots__ = ("frame",)

    def __init__(self, frame, tol=TOL_STRUCT):
        i, j, k = (m if isinstance(m, ComplexStructure) else ComplexStructure(m) for m in frame)
        if not (i.size == j.size == k.size):
            raise DimensionError("frame matrices must have equal size")
        eye = np.eye(i.size)
        checks = {
            "IJ - K": i.mat @ j.mat - k.mat,
            "JI + K": j.mat @ i.mat + k.mat,
            "I^2 + 1": i.mat @ i.mat + eye,
            "J^2 + 1": j.mat @ j.mat + eye,
            "K^2 + 1": k.mat @ k.mat + eye,
        }
        for name, value in checks.items():
            residual = frobenius(value)
            if residual > tol:
                raise PreconditionError(
                    f"frame is not quaternionic: |{name}|_F = {residual:.3e}"
                )
        self.frame = (i, j, k)

    @property
    def n(self):
        return self.frame[0].n

    @property
    def size(self):
        return self.frame[0].size

    def point(self, a, b, c, tol=1e-12):
        """Realize the sphere point aI + bJ + cK as a ComplexStructure."""
        if abs(a * a + b * b + c * c - 1.0) > tol:
            raise NormalizationError(
                f"(a, b, c) must lie on the unit sphere, |a^2+b^2+c^2-1| = "
                f"{abs(a * a + b * b + c * c - 1.0):.3e}"
            )
        i, j, k = self.frame
        return ComplexStructure(a * i.mat + b * j.mat + c * k.mat)

    def span_distance(self, mat):
        """Frobenius distance from ``mat`` to the frame's 3-dimensional span."""
        mat = mat.mat if isinstance(mat, ComplexStructure) else np.asarray(mat, dtype=float)
        _, dist = project_onto_span([m.mat for m in self.frame], mat)
        return dist

    def contains(self, mat, tol=MEMBERSHIP_TOL):
        return self.span_distance(mat) <= tol

    def coordinates_of(self, mat):
        """(a, b, c) coordinates of a matrix lying in (or near) the frame span."""
        mat = mat.mat if isinstance(mat, ComplexStructure) else np.asarray(mat, dtype=float)
        return np.array([sphere_dot(mat, f.mat) for f in self.frame])

    def sample_coordinates(self, m):
        """m Fibonacci-sphere coordinate triples (a, b, c)."""
        return fibonacci_sphere(m)

    def __repr__(self):
        return f"TwistorSphere(n={self.n})"


class SpherePoint:
    """A point of a twistor sphere, kept together with its (a, b, c) coordinates."""

    __slots__ = ("sphere", "coords")

    def __init__(self, sphere, coords, tol=1e-12):
        a, b, c = coords
        if abs(a * a + b * b + c * c - 1.0) > tol:
            raise NormalizationError("sphere point coordinates must be unit length")
        self.sphere = sphere
        self.coords = (float(a), float(b), float(c))

    @property
    def matrix(self):
        return self.sphere.point(*self.coords)


def sphere_point(sphere, a, b, c):
    """Operation form of TwistorSphere.point."""
    return sphere.point(a, b, c)


def sphere_from_pair(i1, i2, tol=TOL_STRUCT):
    """The unique twistor sphere through two non-proportional co-spherical structures.

    Gram-Schmidt in the sphere inner product turns (i1, i2) into an
    anticommuting pair (u, v); the frame is (u, v, uv).  Co-sphericity is
    certified, not assumed: the anticommutator and the squares of v and uv
    must vanish within ``tol``.
    """
    u = i1.mat
    w = i2.mat
    if u.shape != w.shape:
        raise DimensionError("structures must have equal size")
    cos = abs(float(np.sum(u * w))) / (frobenius(u) * frobenius(w))
    if cos >= 1.0 - 1e-8:
        raise DegeneratePairError("structures are (anti)proportional, no unique sphere")
    raw = w - sphere_dot(u, w) * u
    norm_sq = sphere_dot(raw, raw)
    if norm_sq <= 1e-16:
        raise DegeneratePairError("second structure degenerates after projection")
    v = raw / np.sqrt(norm_sq)
    eye = np.eye(u.shape[0])
    anti = frobenius(u @ v + v @ u)
    v_sq = frobenius(v @ v + eye)
    k = u @ v
    k_sq = frobenius(k @ k + eye)
    worst = max(anti, v_sq, k_sq)
    if worst > tol:
        raise NotCosphericalError(
            f"pair fails the co-sphericity certificate (worst residual {worst:.3e})"
        )
    return TwistorSphere((ComplexStructure(u), ComplexStructure(v), ComplexStructure(k)))


def conjugate(g, x):
    """Conjugation action g . x = g x g^{-1} on structures and spheres."""
    if isinstance(x, TwistorSphere):
        return TwistorSphere(tuple(conjugate(g, f) for f in x.frame))
    mat = x.mat if isinstance(x, ComplexStructure) else np.asarray(x, dtype=float)
    if g.size != mat.shape[0]:
        raise DimensionError(f"size mismatch: {g.size} vs {mat.shape[0]}")
    out = g.mat @ mat @ g.inv
    if isinstance(x, ComplexStructure):
        return ComplexStructure(out)
    return out


def _kernel_basis(operator, expected, what, cutoff=RANK_CUTOFF, guard=10.0):
    _, s, vh = np.linalg.svd(operator)
    thr = cutoff * s[0]
    ambiguous = (s > thr / guard) & (s < thr * guard)
    if np.any(ambiguous):
        raise ToleranceError(
            f"{what}: singular values {s[ambiguous]} sit near the cutoff {thr:.3e}"
        )
    rank = int(np.sum(s > thr))
    basis = vh[rank:]
    if basis.shape[0] != expected:
        raise ToleranceError(
            f"{what}: kernel dimension {basis.shape[0]}, expected {expected}"
        )
    size = int(round(np.sqrt(operator.shape[1])))
    return [unvec(row, size) for row in basis]


def centralizer_basis(j):
    """Orthonormal (Frobenius) basis of {X : XJ = JX}; dimension 8n^2."""
    op = commutator_operator(j.mat)
    return _kernel_basis(op, 8 * j.n * j.n, "centralizer kernel")


def adapted_conjugator(structure):
    """A well-conditioned p with structure = p I_0 p^{-1}, I_0 canonical.

    Columns are (v_1..v_{2n}, I v_1..I v_{2n}), built Gram-Schmidt style in
    the I-compatible metric (1 + I^T I)/2; orthogonality in that metric is
    preserved by I, so the I-images of selected vectors stay independent.
    """
    i = structure.mat
    size = i.shape[0]
    metric = 0.5 * (np.eye(size) + i.T @ i)
    selected = []
    for _ in range(size // 2):
        best, best_norm = None, -1.0
        for j in range(size):
            cand = np.zeros(size)
            cand[j] = 1.0
            for s in selected:
                cand = cand - (s @ metric @ cand) * s
            norm = float(cand @ metric @ cand)
            if norm > best_norm:
                best, best_norm = cand, norm
        if best_norm <= 1e-12:
            raise ToleranceError("could not complete an adapted basis")
        v = best / np.sqrt(best_norm)
        selected.extend([v, i @ v])
    return np.column_stack(selected[0::2] + selected[1::2])


def centralizer_basis_exact(structure):
    """Orthonormal centralizer basis from the exact algebraic span.

    Conjugating the closed-form commutant of the canonical structure (block
    matrices [[A, -B], [B, A]]) by an adapted conjugator spans {X : XI = IX}
    exactly; a QR pass orthonormalizes.  Same span as centralizer_basis but
    without a large SVD, which matters inside path solvers.
    """
    p = adapted_conjugator(structure)
    p_inv = np.linalg.inv(p)
    size = structure.size
    half = size // 2
    columns = []
    for r in range(half):
        for c in range(half):
            e = np.zeros((size, size))
            e[r, c] = 1.0
            e[r + half, c + half] = 1.0
            columns.append(vec(p @ e @ p_inv))
            e = np.zeros((size, size))
            e[r, c + half] = -1.0
            e[r + half, c] = 1.0
            columns.append(vec(p @ e @ p_inv))
    q, _ = np.linalg.qr(np.column_stack(columns))
    return [unvec(q[:, k], size) for k in range(q.shape[1])]


def quaternionic_centralizer_basis(sphere):
    """Orthonormal basis of matrices commuting with the whole frame; dimension 4n^2."""
    i, j, _ = sphere.frame
    op = np.vstack([commutator_operator(i.mat), commutator_operator(j.mat)])
    return _kernel_basis(op, 4 * sphere.n * sphere.n, "quaternionic centralizer kernel")


def canonical_structure(n):
    """The block structure [[0, -1], [1, 0]] on R^{4n}."""
    eye = np.eye(2 * n)
    zero = np.zeros((2 * n, 2 * n))
    return np.block([[zero, -eye], [eye, zero]])


def canonical_frame(n):
    """A quaternionic frame extending canonical_structure(n)."""
    i0 = canonical_structure(n)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    s = np.block([[zero, -eye], [eye, zero]])
    j0 = np.block([[s, np.zeros((2 * n, 2 * n))], [np.zeros((2 * n, 2 * n)), -s]])
    return TwistorSphere((ComplexStructure(i0), ComplexStructure(j0), ComplexStructure(i0 @ j0)))


_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])
_MIR = np.array([[-1.0, 0.0], [0.0, 1.0]])


def chart_frame(n):
    """The frame whose period chart is Z = block-diag of [[u, v], [v, -u]].

    The chart blocks A, B, C, D of every sphere point are block-diagonal in
    2x2 pieces, so the n=1 closed form of the chart replicates along the
    diagonal of Z.
    """
    a = np.kron(np.eye(n), _ROT)
    e = np.kron(np.eye(n), _MIR)
    zero = np.zeros((2 * n, 2 * n))
    i = np.block([[a, zero], [zero, a]])
    j = np.block([[zero, e], [-e, zero]])
    return TwistorSphere((ComplexStructure(i), ComplexStructure(j), ComplexStructure(i @ j)))


def random_group_element(size, rng, min_normalized_det=1e-3, max_tries=100):
    """Seeded Gaussian sample of GL+; retries until the normalized det is healthy.

    The determinant is normalized by the product of row norms (Hadamard
    bound), which keeps conjugators away from near-singular matrices.
    """
    for _ in range(max_tries):
        g = rng.standard_normal((size, size))
        row_norms = np.linalg.norm(g, axis=1)
        if np.any(row_norms == 0.0):
            continue
        det = np.linalg.det(g)
        if abs(det) / np.prod(row_norms) <= min_normalized_det:
            continue
        if det < 0:
            g = g.copy()
            g[:, 0] = -g[:, 0]
        return GroupElement(g)
    raise ToleranceError("could not sample a well-conditioned group element")


def random_complex_structure(n, seed):
    """A seeded random conjugate of the canonical structure."""
    if n < 1:
        raise DimensionError("n must be a positive integer")
    rng = np.random.default_rng(seed)
    g = random_group_element(4 * n, rng)
    return conjugate(g, ComplexStructure(canonical_structure(n)))


def compatible_form_pair(structure, seed, max_tries=5):
    """A metric/skew-form pair (h, sigma) compatible with the given structure.

    h is the I-average of the identity (hence I-invariant and positive
    definite); sigma is the I-anti-invariant part of a seeded random skew
    form, redrawn if it comes out degenerate.
    """
    i = structure.mat
    size = i.shape[0]
    h = 0.5 * (np.eye(size) + i.T @ i)
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        raw = rng.standard_normal((size, size))
        skew = 0.5 * (raw - raw.T)
        sigma = 0.5 * (skew - i.T @ skew @ i)
        s = np.linalg.svd(sigma, compute_uv=False)
        if s[-1] > 1e-6 * s[0]:
            return h, sigma
    raise SingularityError("could not draw a nondegenerate compatible skew form")


def anticommuting_partner(structure, h, sigma, tol=TOL_STRUCT):
    """The complex structure J solving h(x, Jy) = sigma(x, y), rescaled so J^2 = -1.

    The raw solution H^{-1} sigma anticommutes with I and has negative
    diagonalizable square; dividing each eigenspace of J^2 by sqrt(-lambda)
    normalizes the square to -1 without breaking anticommutativity.
    """
    i = structure.mat
    size = i.shape[0]
    h = np.asarray(h, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if h.shape != (size, size) or sigma.shape != (size, size):
        raise DimensionError("h and sigma must match the structure size")
    scale_h = frobenius(h)
    if frobenius(h - h.T) > 1e-8 * scale_h:
        raise PreconditionError("h must be symmetric")
    if frobenius(i.T @ h @ i - h) > 1e-8 * scale_h:
        raise PreconditionError("h must be I-invariant: h(Ix, Iy) = h(x, y)")
    scale_s = frobenius(sigma)
    if scale_s == 0.0:
        raise SingularityError("sigma is zero")
    if frobenius(sigma + sigma.T) > 1e-8 * scale_s:
        raise PreconditionError("sigma must be skew-symmetric")
    if frobenius(i.T @ sigma @ i + sigma) > 1e-8 * scale_s:
        raise PreconditionError("sigma must be I-anti-invariant: sigma(Ix, Iy) = -sigma(x, y)")
    svals = np.linalg.svd(sigma, compute_uv=False)
    if svals[-1] <= 1e-10 * svals[0]:
        raise SingularityError("sigma is numerically degenerate")

    hvals, hvecs = np.linalg.eigh(h)
    if hvals[0] <= 0.0:
        raise PreconditionError("h must be positive definite")
    h_isqrt = hvecs @ np.diag(hvals**-0.5) @ hvecs.T
    h_sqrt = hvecs @ np.diag(hvals**0.5) @ hvecs.T

    w = h_isqrt @ sigma @ h_isqrt
    w = 0.5 * (w - w.T)
    w2 = w @ w
    lam, vecs = np.linalg.eigh(0.5 * (w2 + w2.T))
    if lam[-1] >= -1e-12 * abs(lam[0]):
        raise PreconditionError(
            f"square of the raw partner has a non-negative eigenvalue ({lam[-1]:.3e})"
        )
    rescale = vecs @ np.diag((-lam) ** -0.5) @ vecs.T
    j = h_isqrt @ (w @ rescale) @ h_sqrt
    out = ComplexStructure(j, tol=tol)
    anti = frobenius(i @ out.mat + out.mat @ i)
    if anti > tol:
        raise PreconditionError(f"partner fails anticommutation (|IJ+JI|_F = {anti:.3e})")
    return out
