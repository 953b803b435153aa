"""Neron-Severi rank certificates, locus codimension bounds, Riemann relations.

An alternating form is a Hodge (1,1) class at I exactly when I^T Omega I =
Omega.  The exact mode certifies the rational solution space of that equation
with exact arithmetic; the height-bounded mode searches for integral
solutions of bounded height near the floating-point kernel and truthfully
reports "generic up to H" rather than genericity outright.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateInputError,
    DimensionError,
    InvalidFormError,
    PreconditionError,
    ToleranceError,
    UnsupportedSizeError,
)
from .linalg import (
    RANK_CUTOFF,
    anticommutator_operator,
    commutator_operator,
    frobenius,
    numerical_rank,
    vec,
)
from .rational import rational_kernel, rational_matrix, lll_reduce, to_fraction
from .structures import chart_frame

LOCUS_RESIDUAL_TOL = 1e-8


class AlternatingForm:
    """A skew-symmetric 4n x 4n form, floating point or tagged exact rational."""

    __slots__ = ("mat", "exact")

    def __init__(self, mat, exact=None):
        if exact is not None:
            exact = [[to_fraction(x) for x in row] for row in exact]
            mat = np.array([[float(x) for x in row] for row in exact])
        else:
            mat = np.array(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"form must be square, got shape {mat.shape}")
        if exact is not None:
            size = len(exact)
            for a in range(size):
                for b in range(size):
                    if exact[a][b] != -exact[b][a]:
                        raise PreconditionError("exact form is not skew-symmetric")
        else:
            if frobenius(mat + mat.T) > 1e-12 * max(1.0, frobenius(mat)):
                raise PreconditionError("form is not skew-symmetric within 1e-12")
        mat.setflags(write=False)
        self.mat = mat
        self.exact = exact

    @property
    def is_rational(self):
        return self.exact is not None

    @property
    def size(self):
        return self.mat.shape[0]

    def __repr__(self):
        tag = "rational" if self.is_rational else "real"
        return f"AlternatingForm(size={self.size}, {tag})"


def alternating_pairs(size):
    return [(a, b) for a in range(size) for b in range(a + 1, size)]


def form_from_vector(v, size):
    mat = np.zeros((size, size))
    for (a, b), value in zip(alternating_pairs(size), v):
        mat[a, b] = value
        mat[b, a] = -value
    return mat


def _invariance_column_exact(i_rows, a, b, pairs):
    """Column of Omega -> I^T Omega I - Omega on the alternating basis, exact."""
    column = []
    for c, d in pairs:
        value = i_rows[a][c] * i_rows[b][d] - i_rows[b][c] * i_rows[a][d]
        if (c, d) == (a, b):
            value = value - 1
        column.append(value)
    return column


def _invariance_operator_exact(i_rows):
    size = len(i_rows)
    pairs = alternating_pairs(size)
    columns = [_invariance_column_exact(i_rows, a, b, pairs) for a, b in pairs]
    return [[columns[j][i] for j in range(len(pairs))] for i in range(len(pairs))]


def _invariance_operator_real(i_mat):
    size = i_mat.shape[0]
    pairs = alternating_pairs(size)
    m = np.zeros((len(pairs), len(pairs)))
    for col, (a, b) in enumerate(pairs):
        block = np.outer(i_mat[a], i_mat[b]) - np.outer(i_mat[b], i_mat[a])
        for row, (c, d) in enumerate(pairs):
            m[row, col] = block[c, d]
        m[col, col] -= 1.0
    return m


@dataclass
class NSReport:
    rank: int
    basis: list
    method: str
    height_bound: int | None = None

    @property
    def generic_up_to_height(self):
        return self.method == "height_bounded" and self.rank == 0


def ns_rank(structure, mode="exact", height=1000):
    """Rank of the space of alternating forms with I^T Omega I = Omega.

    ``mode="exact"`` needs rational entries and certifies the rank with exact
    elimination; ``mode="height_bounded"`` accepts any real structure and
    counts independent integer solutions of sup-norm <= height found by
    lattice reduction near the floating kernel.
    """
    if mode == "exact":
        i_rows = rational_matrix(structure.mat)
        operator = _invariance_operator_exact(i_rows)
        kernel = rational_kernel(operator)
        size = structure.size
        basis = []
        for v in kernel:
            mat = [[Fraction(0)] * size for _ in range(size)]
            for (a, b), value in zip(alternating_pairs(size), v):
                mat[a][b] = value
                mat[b][a] = -value
            basis.append(AlternatingForm(None, exact=mat))
        for form in basis:
            residual = structure.mat.T @ form.mat @ structure.mat - form.mat
            if frobenius(residual) > 1e-9:
                raise ToleranceError("exact kernel element fails invariance numerically")
        return NSReport(len(basis), basis, "exact_rational")
    if mode != "height_bounded":
        raise ValueError(f"unknown mode {mode!r}")
    return _ns_rank_height(structure, int(height))


def _ns_rank_height(structure, height):
    operator = _invariance_operator_real(structure.mat)
    m = operator.shape[0]
    _, svals, vh = np.linalg.svd(operator)
    kernel_dim = int(np.sum(svals <= RANK_CUTOFF * svals[0]))
    complement = vh[: m - kernel_dim]
    eps = 1e-9 * height
    if kernel_dim == 0:
        return NSReport(0, [], "height_bounded", height)
    # Stacked lattice: a short vector means small integer coordinates
    # (identity block scaled by 1/height) and a small distance to the kernel
    # (complement projection scaled by 1/eps).
    lattice = np.hstack([np.eye(m) / height, complement.T / eps])
    _, coeffs = lll_reduce(lattice)
    size = structure.size
    accepted = []
    basis = []
    for row in coeffs:
        x = row.astype(float)
        if not np.any(x):
            continue
        if np.max(np.abs(x)) > height:
            continue
        if np.linalg.norm(complement @ x) > eps:
            continue
        mat = [[Fraction(0)] * size for _ in range(size)]
        for (a, b), value in zip(alternating_pairs(size), row):
            mat[a][b] = Fraction(int(value))
            mat[b][a] = -Fraction(int(value))
        form = AlternatingForm(None, exact=mat)
        residual = structure.mat.T @ form.mat @ structure.mat - form.mat
        if frobenius(residual) > 1e-9 * height:
            continue
        stacked = np.array(accepted + [list(x)], dtype=float)
        if np.linalg.matrix_rank(stacked) == len(accepted) + 1:
            accepted.append(list(x))
            basis.append(form)
    return NSReport(len(basis), basis, "height_bounded", height)


def split_by_structure(omega, structure):
    """I-invariant and I-anti-invariant parts of a form: (Omega +- I^T Omega I)/2."""
    conjugated = structure.mat.T @ omega.mat @ structure.mat
    plus = 0.5 * (omega.mat + conjugated)
    minus = 0.5 * (omega.mat - conjugated)
    return AlternatingForm(plus), AlternatingForm(minus)


def locus_solution_dimension(i, j, omega):
    """Dimension/codimension of {Y : YI=IY, YJ=-JY, Y^T Omega + Omega Y = 0}.

    The ambient space (commuting with I, anticommuting with J) has dimension
    4n^2; solutions of the equation for a mixed Omega automatically satisfy it
    for both the I-invariant and I-anti-invariant parts, and the codimension
    is at least 4n-3 for nonzero Omega.
    """
    if frobenius(i.mat @ j.mat + j.mat @ i.mat) > 1e-9:
        raise PreconditionError("I and J must anticommute")
    if frobenius(omega.mat) == 0.0:
        raise DegenerateInputError("Omega must be nonzero")
    n = i.n
    stacked = np.vstack([commutator_operator(i.mat), anticommutator_operator(j.mat)])
    _, svals, vh = np.linalg.svd(stacked)
    ambient_dim = int(np.sum(svals <= RANK_CUTOFF * svals[0]))
    if ambient_dim != 4 * n * n:
        raise ToleranceError(
            f"ambient solution space has dimension {ambient_dim}, expected {4 * n * n}"
        )
    ambient = vh[vh.shape[0] - ambient_dim :]
    size = i.size
    columns = []
    mats = []
    for row in ambient:
        y = row.reshape(size, size)
        mats.append(y)
        columns.append(vec(y.T @ omega.mat + omega.mat @ y))
    operator = np.column_stack(columns)
    codim = numerical_rank(operator)
    dim = ambient_dim - codim
    if codim < 4 * n - 3:
        raise ToleranceError(
            f"computed codimension {codim} violates the lower bound {4 * n - 3}"
        )
    _, _, vker = np.linalg.svd(operator)
    kernel_coeffs = vker[codim:]
    basis = [sum(c * m for c, m in zip(coeff, mats)) for coeff in kernel_coeffs]
    return {"dim": int(dim), "codim": int(codim), "basis": basis}


def sphere_locus_decision(sphere, omega, samples=20):
    """"contained" when every sampled sphere point preserves Omega, else finite.

    The underlying dichotomy (a twistor sphere meets the invariance locus in
    finitely many points or lies inside it) justifies deciding from samples.
    """
    if samples < 20:
        raise PreconditionError("need at least 20 samples for the locus decision")
    for a, b, c in sphere.sample_coordinates(samples):
        lam = sphere.point(a, b, c).mat
        residual = frobenius(lam.T @ omega.mat @ lam - omega.mat)
        if residual >= LOCUS_RESIDUAL_TOL:
            return "finite_intersection"
    return "contained"


def _paper_family_form(b, c, d):
    return [
        [0, -b, c, -d],
        [b, 0, d, c],
        [-c, -d, 0, b],
        [d, -c, -b, 0],
    ]


def invariant_form_family(sphere):
    """Exact basis of skew forms invariant under the canonical n=1 chart frame.

    Returns the three-parameter family in its closed parametric form; the
    sphere must carry the canonical chart frame (conjugate first otherwise).
    """
    if sphere.n != 1:
        raise UnsupportedSizeError("the closed-form family is implemented for n=1 only")
    reference = chart_frame(1)
    for ours, theirs in zip(sphere.frame, reference.frame):
        if frobenius(ours.mat - theirs.mat) > 1e-9:
            raise PreconditionError(
                "sphere frame is not the canonical chart frame; conjugate it first"
            )
    i_rows = rational_matrix(reference.frame[0].mat)
    j_rows = rational_matrix(reference.frame[1].mat)
    operator = _invariance_operator_exact(i_rows) + _invariance_operator_exact(j_rows)
    kernel = rational_kernel(operator)
    if len(kernel) != 3:
        raise ToleranceError(f"invariant family has rank {len(kernel)}, expected 3")
    pairs = alternating_pairs(4)
    kernel_matrix = [[kernel[k][idx] for k in range(3)] for idx in range(len(pairs))]
    basis = []
    for params in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        target = _paper_family_form(*(Fraction(x) for x in params))
        target_vec = [target[a][b] for a, b in pairs]
        augmented = [row + [t] for row, t in zip(kernel_matrix, target_vec)]
        if len(rational_kernel(augmented)) != 1:
            raise ToleranceError("parametric form lies outside the computed family")
        basis.append(AlternatingForm(None, exact=target))
    return basis


@dataclass
class RiemannCertificate:
    first_relation_residual: float
    hermitian_matrix: np.ndarray
    determinant: float
    formula_determinant: float
    positive_definite: bool


def riemann_certificate(period, form):
    """First/second Riemann-relation report for a twistor-line period and family form.

    The hermitian matrix is i * W Q * conj(W)^T for W = (1|Z); its determinant
    is compared against the closed-form expression in (u, v, b, c, d).  On
    this family the first relation holds and the second always fails
    (indefinite hermitian form).
    """
    if period.n != 1:
        raise UnsupportedSizeError("the certificate is implemented for n=1 only")
    z = period.z
    u, v = complex(z[0, 0]), complex(z[0, 1])
    line_residual = max(
        abs(z[1, 0] - v), abs(z[1, 1] + u), abs(u * u + v * v + 1.0)
    )
    if line_residual > 1e-10:
        raise InvalidFormError(
            f"period is not on the twistor-line family (residual {line_residual:.3e})"
        )
    q = form.mat
    if q.shape != (4, 4):
        raise InvalidFormError("form must be 4 x 4")
    b, c, d = float(q[1, 0]), float(q[0, 2]), float(q[3, 0])
    if frobenius(q - np.array(_paper_family_form(b, c, d), dtype=float)) > 1e-12:
        raise InvalidFormError("form is outside the invariant family")
    norm_sq = b * b + c * c + d * d
    if norm_sq == 0.0:
        raise InvalidFormError("form parameters must not all vanish")
    q_inv = -q / norm_sq
    w = period.full
    first = frobenius(w @ q_inv @ w.T)
    herm = 1j * (w @ q @ np.conj(w).T)
    determinant = float(np.real(np.linalg.det(herm)))
    u1, u2, v1, v2 = u.real, u.imag, v.real, v.imag
    u_abs2, v_abs2 = abs(u) ** 2, abs(v) ** 2
    formula = (
        b * b * (4.0 * (u1 * v2 - u2 * v1) ** 2 - (1.0 + u_abs2 + v_abs2) ** 2)
        - 4.0 * (u2 * c - v2 * d) ** 2
        - 4.0 * (v2 * c + u2 * d) ** 2
    )
    eigs = np.linalg.eigvalsh(0.5 * (herm + np.conj(herm).T))
    return RiemannCertificate(
        first_relation_residual=float(first),
        hermitian_matrix=herm,
        determinant=determinant,
        formula_determinant=float(formula),
        positive_definite=bool(np.all(eigs > 0.0)),
    )


def sample_constrained_uv(rng, max_radius=2.0):
    """A pair (u, v) with u^2 + v^2 = -1, exact by construction.

    Writing u = X1 + i Y1, v = X2 + i Y2, the constraint says |Y|^2 = |X|^2 + 1
    and X is orthogonal to Y; X is drawn from a disc and Y is the rotated,
    stretched complement.
    """
    radius = max_radius * np.sqrt(rng.uniform(0.0, 1.0))
    angle = rng.uniform(0.0, 2.0 * np.pi)
    x = radius * np.array([np.cos(angle), np.sin(angle)])
    stretch = np.sqrt(radius * radius + 1.0)
    direction = np.array([-np.sin(angle), np.cos(angle)])
    if rng.uniform() < 0.5:
        direction = -direction
    y = stretch * direction
    return complex(x[0], y[0]), complex(x[1], y[1])


def line_period(u, v):
    """The twistor-line period matrix [[u, v], [v, -u]] (u^2 + v^2 = -1)."""
    from .charts import PeriodMatrix

    return PeriodMatrix(np.array([[u, v], [v, -u]]))
