"""The evaluation map on centralizer pairs, rank certificates, and path solvers.

Phi sends a pair (g1, g2) with g1 commuting with J and g2 commuting with K to
the conjugate of I by g1 g2.  A Gauss-Newton solver in exponential
coordinates inverts Phi near the identity; chaining solved segments yields
twistor paths between arbitrary structures.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm_frechet

from .errors import (
    DegeneratePairError,
    DegenerateProblemError,
    DimensionError,
    NoConvergenceError,
    NotCosphericalError,
    PathingError,
    ToleranceError,
    WrongSubgroupError,
)
from .linalg import (
    MEMBERSHIP_TOL,
    RANK_CUTOFF,
    TOL_STRUCT,
    frobenius,
    matrix_exp,
    numerical_rank,
    real_log,
    vec,
)
from .structures import (
    ComplexStructure,
    GroupElement,
    TwistorSphere,
    adapted_conjugator,
    anticommuting_partner,
    canonical_structure,
    centralizer_basis,
    centralizer_basis_exact,
    compatible_form_pair,
    conjugate,
    quaternionic_centralizer_basis,
    sphere_from_pair,
)


@dataclass
class SolverOptions:
    """Knobs of the Gauss-Newton solver and the path constructions."""

    radius: float = 0.3
    tol_solve: float = 1e-10
    max_iter: int = 50
    pinv_cutoff: float = 1e-9
    max_retries: int = 5
    seed: int = 0


def _exp_group(x):
    return GroupElement(matrix_exp(x), inv=matrix_exp(-x))


def _commutes(g, structure, tol=1e-8):
    return frobenius(g.mat @ structure.mat - structure.mat @ g.mat) <= tol * frobenius(g.mat)


class PhiProblem:
    """A co-spherical triple (I, J, K) with cached centralizer bases of J and K.

    The triple need not be quaternionic.  Co-sphericity is certified through
    sphere_from_pair; the ``independent`` flag records whether the three
    matrices span three dimensions (relative singular-value cutoff 1e-7).
    """

    __slots__ = ("i", "j", "k", "sphere", "independent", "j_basis", "k_basis", "_quat_basis")

    def __init__(self, i, j, k, membership_tol=MEMBERSHIP_TOL):
        if not (i.size == j.size == k.size):
            raise DimensionError("triple must have a common size")
        sphere = None
        for a, b in ((i, j), (i, k), (j, k)):
            try:
                sphere = sphere_from_pair(a, b)
                break
            except DegeneratePairError:
                continue
        if sphere is None:
            raise DegeneratePairError("all three structures are mutually proportional")
        for name, m in (("I", i), ("J", j), ("K", k)):
            dist = sphere.span_distance(m.mat)
            if dist > membership_tol:
                raise NotCosphericalError(
                    f"{name} sits {dist:.3e} away from the common sphere span"
                )
        stack = np.column_stack([vec(i.mat), vec(j.mat), vec(k.mat)])
        svals = np.linalg.svd(stack, compute_uv=False)
        self.independent = bool(svals[2] > RANK_CUTOFF * svals[0])
        self.i, self.j, self.k = i, j, k
        self.sphere = sphere
        self.j_basis = centralizer_basis_exact(j)
        self.k_basis = centralizer_basis_exact(k)
        self._quat_basis = None

    @property
    def n(self):
        return self.i.n

    @property
    def quaternionic_basis(self):
        """Basis of matrices commuting with the whole sphere (lazy)."""
        if self._quat_basis is None:
            self._quat_basis = quaternionic_centralizer_basis(self.sphere)
        return self._quat_basis


def phi(problem, g1, g2, membership_tol=1e-8):
    """Conjugate of the center I by g1 g2, with subgroup membership enforced."""
    if not _commutes(g1, problem.j, membership_tol):
        raise WrongSubgroupError("g1 does not commute with J")
    if not _commutes(g2, problem.k, membership_tol):
        raise WrongSubgroupError("g2 does not commute with K")
    return conjugate(g1.compose(g2), problem.i)


def _differential_columns(problem, g1=None, g2=None):
    """Columns of the Phi differential at (g1, g2) in the cached bases.

    The tangent map is (X, Y) -> [g1 X g1^-1 + (g1 g2) Y (g1 g2)^-1, ^{g1 g2} I].
    At the identity this reduces to (X, Y) -> [X + Y, I].
    """
    i = problem.i.mat
    if g1 is None and g2 is None:
        cur = i
        cols = [vec(b @ i - i @ b) for b in problem.j_basis]
        cols += [vec(b @ i - i @ b) for b in problem.k_basis]
        return np.column_stack(cols)
    a = g1.compose(g2)
    cur = a.mat @ i @ a.inv
    cols = []
    for b in problem.j_basis:
        m = g1.mat @ b @ g1.inv
        cols.append(vec(m @ cur - cur @ m))
    for b in problem.k_basis:
        m = a.mat @ b @ a.inv
        cols.append(vec(m @ cur - cur @ m))
    return np.column_stack(cols)


def phi_differential_rank(problem):
    """Rank of the Phi differential at the identity; 8n^2 iff the triple is independent."""
    return numerical_rank(_differential_columns(problem))


def fiber_dimension(problem, g1, g2, membership_tol=1e-8):
    """Nullity of the Phi differential at (g1, g2); 8n^2 at regular solutions."""
    if not _commutes(g1, problem.j, membership_tol):
        raise WrongSubgroupError("g1 does not commute with J")
    if not _commutes(g2, problem.k, membership_tol):
        raise WrongSubgroupError("g2 does not commute with K")
    cols = _differential_columns(problem, g1, g2)
    return cols.shape[1] - numerical_rank(cols)


@dataclass
class PhiSolution:
    """Solved pair (exp X, exp Y) with the coordinates that generated it."""

    g1: GroupElement
    g2: GroupElement
    x: np.ndarray
    y: np.ndarray
    residual: float
    iterations: int

    def __iter__(self):
        return iter((self.g1, self.g2))


def solve_phi(problem, target, opts=None, x0=None, y0=None):
    """Gauss-Newton solve of phi(problem, exp X, exp Y) = target near the identity.

    Steps are minimum-norm (pseudoinverse with the configured cutoff) in the
    exponential coordinates spanned by the cached centralizer bases, with
    Armijo backtracking on the Frobenius residual.
    """
    opts = opts or SolverOptions()
    if not problem.independent:
        raise DegenerateProblemError("sphere triple is linearly dependent")
    distance = frobenius(target.mat - problem.i.mat)
    if distance > opts.radius:
        raise NoConvergenceError(
            f"target at distance {distance:.3e} exceeds the trust radius {opts.radius}",
            residual=distance,
        )
    nb = len(problem.j_basis)
    x = np.zeros(nb) if x0 is None else np.array(x0, dtype=float)
    y = np.zeros(nb) if y0 is None else np.array(y0, dtype=float)
    jb = np.stack(problem.j_basis)
    kb = np.stack(problem.k_basis)
    i_mat = problem.i.mat
    t_mat = target.mat

    def state(xv, yv):
        xm = np.tensordot(xv, jb, axes=1)
        ym = np.tensordot(yv, kb, axes=1)
        g1m, g1i = matrix_exp(xm), matrix_exp(-xm)
        g2m, g2i = matrix_exp(ym), matrix_exp(-ym)
        cur = g1m @ g2m @ i_mat @ g2i @ g1i
        return xm, ym, g1m, g1i, g2m, g2i, cur

    xm, ym, g1m, g1i, g2m, g2i, cur = state(x, y)
    residual = frobenius(cur - t_mat)
    for iteration in range(opts.max_iter):
        if residual <= opts.tol_solve:
            break
        cols = []
        for b in problem.j_basis:
            d = expm_frechet(xm, b, compute_expm=False)
            m = d @ g1i
            cols.append(vec(m @ cur - cur @ m))
        for b in problem.k_basis:
            d = expm_frechet(ym, b, compute_expm=False)
            m = g1m @ (d @ g2i) @ g1i
            cols.append(vec(m @ cur - cur @ m))
        jac = np.column_stack(cols)
        step, _, _, _ = np.linalg.lstsq(jac, -vec(cur - t_mat), rcond=opts.pinv_cutoff)
        scale = 1.0
        while scale >= 2.0**-30:
            xn = x + scale * step[:nb]
            yn = y + scale * step[nb:]
            trial = state(xn, yn)
            trial_residual = frobenius(trial[-1] - t_mat)
            if trial_residual <= (1.0 - 1e-4 * scale) * residual:
                x, y = xn, yn
                xm, ym, g1m, g1i, g2m, g2i, cur = trial
                residual = trial_residual
                break
            scale *= 0.5
        else:
            raise NoConvergenceError(
                f"line search stalled at residual {residual:.3e}", residual=residual
            )
    else:
        raise NoConvergenceError(
            f"no convergence after {opts.max_iter} iterations (residual {residual:.3e})",
            residual=residual,
        )
    return PhiSolution(
        GroupElement(g1m, inv=g1i),
        GroupElement(g2m, inv=g2i),
        x,
        y,
        residual,
        iteration,
    )


class TwistorPath:
    """An ordered chain of twistor spheres with joints on consecutive spheres."""

    __slots__ = ("spheres", "joints", "endpoints", "solver_residuals")

    def __init__(self, spheres, joints, endpoints, solver_residuals=(), validate=True):
        if len(joints) != len(spheres) - 1:
            raise PathingError(
                f"{len(spheres)} spheres need {len(spheres) - 1} joints, got {len(joints)}"
            )
        self.spheres = list(spheres)
        self.joints = list(joints)
        self.endpoints = tuple(endpoints)
        self.solver_residuals = list(solver_residuals)
        if validate:
            report = validate_path(self)
            if not report["ok"]:
                raise PathingError(f"path fails validation: {report}")

    def __len__(self):
        return len(self.spheres)


def validate_path(path, membership_tol=MEMBERSHIP_TOL, tol=TOL_STRUCT):
    """Joint/endpoint membership and frame residuals of a path, as a report dict."""
    eye = np.eye(path.spheres[0].size)
    joint_membership = []
    joint_square = []
    for idx, joint in enumerate(path.joints):
        joint_membership.append(
            max(
                path.spheres[idx].span_distance(joint.mat),
                path.spheres[idx + 1].span_distance(joint.mat),
            )
        )
        joint_square.append(frobenius(joint.mat @ joint.mat + eye))
    start, end = path.endpoints
    endpoint_membership = [
        path.spheres[0].span_distance(start.mat),
        path.spheres[-1].span_distance(end.mat),
    ]
    frame_residual = []
    for sphere in path.spheres:
        i, j, k = (f.mat for f in sphere.frame)
        frame_residual.append(
            max(
                frobenius(i @ j - k),
                frobenius(j @ i + k),
                frobenius(i @ i + eye),
                frobenius(j @ j + eye),
                frobenius(k @ k + eye),
            )
        )
    ok = (
        max(joint_membership, default=0.0) <= membership_tol
        and max(endpoint_membership) <= membership_tol
        and max(joint_square, default=0.0) <= tol
        and max(frame_residual) <= tol
    )
    return {
        "joint_membership": joint_membership,
        "joint_square": joint_square,
        "endpoint_membership": endpoint_membership,
        "frame_residual": frame_residual,
        "max_residual": max(
            joint_membership + joint_square + endpoint_membership + frame_residual
        ),
        "ok": bool(ok),
    }


def conjugate_path(g, path):
    """Conjugate every sphere, joint and endpoint of a path by g."""
    return TwistorPath(
        [conjugate(g, s) for s in path.spheres],
        [conjugate(g, j) for j in path.joints],
        tuple(conjugate(g, e) for e in path.endpoints),
        solver_residuals=path.solver_residuals,
    )


def default_partner(structure, seed):
    """Deterministic anticommuting partner used for path construction."""
    h, sigma = compatible_form_pair(structure, seed)
    return anticommuting_partner(structure, h, sigma)


def three_sphere_path(i1, i2, opts=None, jk=None):
    """A three-sphere twistor path from i1 to a nearby i2.

    With ``jk`` unset, J is the seeded default partner of i1 and K = I1 J;
    the spheres are S1, ^{g1} S1 and ^{g1 g2} S1 with joints J and ^{g1} K.
    """
    opts = opts or SolverOptions()
    if jk is None:
        j = default_partner(i1, opts.seed)
        k = ComplexStructure(i1.mat @ j.mat)
    else:
        j, k = jk
    problem = PhiProblem(i1, j, k)
    solution = solve_phi(problem, i2, opts)
    g1, g2 = solution.g1, solution.g2
    s1 = problem.sphere
    s_mid = conjugate(g1, s1)
    s2 = conjugate(g1.compose(g2), s1)
    return TwistorPath(
        [s1, s_mid, s2],
        [j, conjugate(g1, k)],
        (i1, i2),
        solver_residuals=[solution.residual],
    )


def _repair_conjugator(g, i1, opts):
    """Adjust g within g * G_{i1} until it has a real logarithm.

    Right factors from the centralizer group of i1 do not change g i1 g^-1.
    Small perturbations cannot remove simple negative real eigenvalues of a
    real matrix, so the first candidates are the rotations exp(theta * i1)
    (theta = pi gives -g, which flips a fully negative real spectrum);
    escalating random centralizer twists are the fallback.
    """
    log = real_log(g)
    if log is not None:
        return g, log
    eye = np.eye(g.shape[0])
    for theta in (np.pi, 0.5 * np.pi, 1.5 * np.pi, 0.25 * np.pi, 1.25 * np.pi):
        candidate = g @ (np.cos(theta) * eye + np.sin(theta) * i1.mat)
        log = real_log(candidate)
        if log is not None:
            return candidate, log
    rng = np.random.default_rng(opts.seed)
    basis = centralizer_basis(i1)
    for attempt in range(1, opts.max_retries + 1):
        coeffs = rng.standard_normal(len(basis))
        twist = sum(c * b for c, b in zip(coeffs, basis))
        twist *= (0.5 * attempt) / max(frobenius(twist), 1e-12)
        candidate = g @ matrix_exp(twist)
        log = real_log(candidate)
        if log is not None:
            return candidate, log
    raise PathingError(
        f"no real logarithm of the conjugator after {opts.max_retries} retries"
    )


def _adaptive_waypoints(i1, i2, log, radius, max_depth=14):
    """Waypoints ^{exp(t log)} i1 with consecutive gaps at most radius/2.

    Intervals are bisected individually, so a single badly conditioned
    stretch of the interpolation does not inflate the whole subdivision.
    """

    def structure_at(t):
        return conjugate(GroupElement(matrix_exp(t * log)), i1)

    def refine(t0, s0, t1, s1, depth):
        if frobenius(s0.mat - s1.mat) <= radius / 2:
            return [s0]
        if depth >= max_depth:
            raise PathingError("subdivision did not reach the trust radius")
        tm = 0.5 * (t0 + t1)
        sm = structure_at(tm)
        return refine(t0, s0, tm, sm, depth + 1) + refine(tm, sm, t1, s1, depth + 1)

    return refine(0.0, i1, 1.0, i2, 0) + [i2]


def global_path(i1, i2, opts=None):
    """A twistor path between arbitrary equal-size structures.

    Builds a conjugator g with g i1 g^{-1} = i2 through adapted bases, follows
    the one-parameter family exp(t log g), subdivides until consecutive
    structures are within radius/2, and chains three-sphere segments.
    """
    opts = opts or SolverOptions()
    if i1.size != i2.size:
        raise DimensionError("endpoints must have equal size")
    if frobenius(i1.mat - i2.mat) <= opts.radius:
        return three_sphere_path(i1, i2, opts)
    p1 = adapted_conjugator(i1)
    p2 = adapted_conjugator(i2)
    sign1 = np.sign(np.linalg.det(p1))
    sign2 = np.sign(np.linalg.det(p2))
    if sign1 * sign2 < 0:
        raise PathingError(
            "endpoints lie in different orientation components of the structure variety"
        )
    g = p2 @ np.linalg.inv(p1)
    g, log = _repair_conjugator(g, i1, opts)
    stops = _adaptive_waypoints(i1, i2, log, opts.radius)
    spheres, joints, residuals = [], [], []
    for idx, (a, b) in enumerate(zip(stops, stops[1:])):
        seg_opts = SolverOptions(
            radius=opts.radius,
            tol_solve=opts.tol_solve,
            max_iter=opts.max_iter,
            pinv_cutoff=opts.pinv_cutoff,
            max_retries=opts.max_retries,
            seed=opts.seed + idx,
        )
        segment = three_sphere_path(a, b, seg_opts)
        if spheres:
            joints.append(a)
        spheres.extend(segment.spheres)
        joints.extend(segment.joints)
        residuals.extend(segment.solver_residuals)
    return TwistorPath(spheres, joints, (i1, i2), solver_residuals=residuals)


def cone_parametrization_rank(i, j, k):
    """Rank of the differential of (X, t) -> e^X e^{tK} J e^{-tK} e^{-X} at (0, 0).

    X runs over the centralizer algebra of I; the expected value is 4n^2 + 1
    when K avoids the circle spanned by I and J on their sphere.
    """
    sphere = sphere_from_pair(i, j)
    dist = sphere.span_distance(k.mat)
    if dist > MEMBERSHIP_TOL:
        raise NotCosphericalError(f"K sits {dist:.3e} away from the sphere of (I, J)")
    basis = centralizer_basis(i)
    cols = [vec(x @ j.mat - j.mat @ x) for x in basis]
    cols.append(vec(k.mat @ j.mat - j.mat @ k.mat))
    return numerical_rank(np.column_stack(cols))


def _project_log(group_element, basis, what):
    """Coordinates of log(g) in an orthonormal matrix basis."""
    log = real_log(group_element.mat)
    if log is None:
        raise ToleranceError(f"{what}: group element has no real logarithm")
    stacked = np.column_stack([vec(b) for b in basis])
    coords = stacked.T @ vec(log)
    residual = np.linalg.norm(vec(log) - stacked @ coords)
    if residual > 1e-6:
        raise ToleranceError(
            f"{what}: log lies {residual:.3e} outside the centralizer algebra"
        )
    return coords


def psi_forward(i1, i2, j, k, opts=None):
    """The sphere-and-joints transport (S(J,K), J, K) -> (^g S, ^g K, ^g J), g = f1 f2.

    The returned pair is switched: the image sphere comes with (^g K, ^g J).
    """
    opts = opts or SolverOptions()
    problem = PhiProblem(i1, j, k)
    solution = solve_phi(problem, i2, opts)
    g = solution.g1.compose(solution.g2)
    sphere = conjugate(g, sphere_from_pair(j, k))
    return sphere, conjugate(g, k), conjugate(g, j)


def psi_roundtrip_residual(i1, i2, j, k, opts=None):
    """Residual of the Psi round trip; zero when the two transports invert each other.

    The backward solve is seeded with the explicit fiber point
    (d1, d2) = (f1 f2^-1 f1^-1, f1 f2 f1^-1 f2^-1 f1^-1), whose product is
    (f1 f2)^-1.
    """
    opts = opts or SolverOptions()
    problem = PhiProblem(i1, j, k)
    forward = solve_phi(problem, i2, opts)
    f1, f2 = forward.g1, forward.g2
    g = f1.compose(f2)
    j2 = conjugate(g, j)
    k2 = conjugate(g, k)
    d1 = f1.compose(f2.inverse()).compose(f1.inverse())
    d2 = f1.compose(f2).compose(f1.inverse()).compose(f2.inverse()).compose(f1.inverse())
    backward_problem = PhiProblem(i2, k2, j2)
    x0 = _project_log(d1, backward_problem.j_basis, "backward seed d1")
    y0 = _project_log(d2, backward_problem.k_basis, "backward seed d2")
    backward = solve_phi(backward_problem, i1, opts, x0=x0, y0=y0)
    h = backward.g1.compose(backward.g2)
    j_rec = conjugate(h, j2)
    k_rec = conjugate(h, k2)
    return max(frobenius(j_rec.mat - j.mat), frobenius(k_rec.mat - k.mat))


def dimension_certificates(n, triple=None):
    """Expected-vs-computed table for the four rank certificates at size 4n.

    Rows: differential of Phi (8n^2), tangent of the anticommuting orbit
    (4n^2), the sphere space through a point (4n^2 - 1, the orbit tangent
    minus the one-dimensional frame rotation), and the cone parametrization
    (4n^2 + 1).
    """
    from .structures import canonical_frame

    frame = canonical_frame(n)
    i, j, k = frame.frame
    if triple is None:
        triple = (i, j, k)
    problem = PhiProblem(*triple)
    phi_rank = phi_differential_rank(problem)
    basis = centralizer_basis(i)
    orbit_cols = np.column_stack([vec(x @ j.mat - j.mat @ x) for x in basis])
    orbit_rank = numerical_rank(orbit_cols)
    rotation = vec(i.mat @ j.mat - j.mat @ i.mat)
    rotation_rank = numerical_rank(rotation.reshape(-1, 1))
    sphere_space_rank = orbit_rank - rotation_rank
    cone_rank = cone_parametrization_rank(i, j, k)
    return [
        {"name": "phi_differential", "expected": 8 * n * n, "computed": int(phi_rank)},
        {"name": "anticommuting_orbit", "expected": 4 * n * n, "computed": int(orbit_rank)},
        {"name": "sphere_space", "expected": 4 * n * n - 1, "computed": int(sphere_space_rank)},
        {"name": "cone", "expected": 4 * n * n + 1, "computed": int(cone_rank)},
    ]
