import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twistor_kit import (
    ComplexStructure,
    DegeneratePairError,
    DimensionError,
    GroupElement,
    InvalidStructureError,
    NormalizationError,
    NotCosphericalError,
    PreconditionError,
    SingularityError,
    adapted_conjugator,
    anticommuting_partner,
    canonical_frame,
    canonical_structure,
    centralizer_basis,
    centralizer_basis_exact,
    chart_frame,
    compatible_form_pair,
    conjugate,
    is_complex_structure,
    quaternionic_centralizer_basis,
    random_complex_structure,
    random_group_element,
    sphere_dot,
    sphere_from_pair,
    sphere_point,
)
from twistor_kit.linalg import frobenius, matrix_exp, vec

from conftest import random_sphere


def test_is_complex_structure_examples():
    assert is_complex_structure(canonical_structure(1))
    assert not is_complex_structure(np.eye(4))
    rotation_blocks = np.kron(np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert is_complex_structure(rotation_blocks)


def test_is_complex_structure_rejects_bad_shapes():
    with pytest.raises(DimensionError):
        is_complex_structure(np.zeros((3, 4)))
    with pytest.raises(DimensionError):
        is_complex_structure(np.zeros((3, 3)))


def test_structure_constructor_validates():
    with pytest.raises(InvalidStructureError):
        ComplexStructure(np.eye(4))
    with pytest.raises(DimensionError):
        ComplexStructure(np.kron(np.eye(1), np.array([[0.0, -1.0], [1.0, 0.0]])))


def test_random_structure_determinism_and_invariants():
    a = random_complex_structure(2, 11)
    b = random_complex_structure(2, 11)
    assert np.array_equal(a.mat, b.mat)
    assert a.size == 8
    assert frobenius(a.mat @ a.mat + np.eye(8)) < 1e-9
    assert np.linalg.det(a.mat) > 0


def test_group_element_checks():
    with pytest.raises(InvalidStructureError):
        GroupElement(np.diag([1.0, 1.0, 1.0, -1.0]))
    g = GroupElement(np.diag([2.0, 1.0, 1.0, 0.5]))
    assert frobenius(g.mat @ g.inv - np.eye(4)) < 1e-12
    gi = g.inverse()
    assert np.allclose(gi.mat, g.inv)


def test_anticommuting_partner_canonical_case():
    # h = identity and sigma = the block partner already solve the defining
    # equation with square -1, so the rescaling leaves it untouched.
    i, j, _ = chart_frame(1).frame
    out = anticommuting_partner(i, np.eye(4), j.mat)
    assert frobenius(out.mat - j.mat) == 0.0


def test_anticommuting_partner_contract():
    structure = random_complex_structure(1, 5)
    h, sigma = compatible_form_pair(structure, 9)
    partner = anticommuting_partner(structure, h, sigma)
    assert frobenius(structure.mat @ partner.mat + partner.mat @ structure.mat) < 1e-9


def test_anticommuting_partner_spectrum_oracle():
    # Independent oracle: the eigenvalues of the returned square must all be -1.
    structure = random_complex_structure(2, 3)
    h, sigma = compatible_form_pair(structure, 7)
    partner = anticommuting_partner(structure, h, sigma)
    eigenvalues = np.linalg.eigvals(partner.mat @ partner.mat)
    assert np.max(np.abs(eigenvalues + 1.0)) < 1e-9


def test_anticommuting_partner_rejects_bad_inputs():
    structure = ComplexStructure(canonical_structure(1))
    with pytest.raises(SingularityError):
        anticommuting_partner(structure, np.eye(4), np.zeros((4, 4)))
    skew = np.array([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(PreconditionError):
        # h not I-invariant
        anticommuting_partner(structure, np.diag([1.0, 2.0, 3.0, 4.0]), np.kron(np.eye(2), skew))


def test_sphere_from_pair_quaternionic_inputs():
    i, j, k = canonical_frame(1).frame
    sphere = sphere_from_pair(i, j)
    assert frobenius(sphere.frame[0].mat - i.mat) == 0.0
    assert frobenius(sphere.frame[1].mat - j.mat) == 0.0
    assert frobenius(sphere.frame[2].mat - k.mat) == 0.0


def test_sphere_from_pair_span_oracle():
    # The sphere through I and (I+J)/sqrt(2) equals the sphere through I and J:
    # the two frames must span the same 3-dimensional subspace.
    sphere = random_sphere(1, 21)
    i, j, _ = sphere.frame
    mix = ComplexStructure((i.mat + j.mat) / np.sqrt(2.0))
    other = sphere_from_pair(i, mix)
    stacked = np.column_stack(
        [vec(f.mat) for f in sphere.frame] + [vec(f.mat) for f in other.frame]
    )
    svals = np.linalg.svd(stacked, compute_uv=False)
    assert int(np.sum(svals > 1e-9 * svals[0])) == 3


def test_sphere_from_pair_order_and_conjugation_invariance():
    sphere = random_sphere(1, 33)
    i, j, _ = sphere.frame
    mix = ComplexStructure((0.6 * i.mat + 0.8 * j.mat))
    forward = sphere_from_pair(i, mix)
    backward = sphere_from_pair(mix, i)
    g = random_group_element(4, np.random.default_rng(2))
    conjugated = sphere_from_pair(conjugate(g, i), conjugate(g, mix))
    direct = conjugate(g, forward)
    for a, b in ((forward, backward), (conjugated, direct)):
        stacked = np.column_stack(
            [vec(f.mat) for f in a.frame] + [vec(f.mat) for f in b.frame]
        )
        svals = np.linalg.svd(stacked, compute_uv=False)
        assert int(np.sum(svals > 1e-9 * svals[0])) == 3


def test_sphere_from_pair_rejects_proportional():
    i = random_complex_structure(1, 3)
    minus = ComplexStructure(-i.mat)
    with pytest.raises(DegeneratePairError):
        sphere_from_pair(i, minus)


def test_sphere_from_pair_rejects_non_cospherical():
    i = ComplexStructure(canonical_structure(1))
    other = random_complex_structure(1, 8)
    with pytest.raises(NotCosphericalError):
        sphere_from_pair(i, other)


def test_sphere_point_axes_and_square():
    sphere = canonical_frame(1)
    for coords, member in (((1, 0, 0), 0), ((0, 1, 0), 1), ((0, 0, 1), 2)):
        point = sphere.point(*coords)
        assert frobenius(point.mat - sphere.frame[member].mat) == 0.0
    s = 1.0 / np.sqrt(2.0)
    point = sphere.point(s, s, 0.0)
    assert frobenius(point.mat @ point.mat + np.eye(4)) < 1e-12
    with pytest.raises(NormalizationError):
        sphere.point(1.0, 1.0, 0.0)
    assert sphere_point(sphere, 0.0, 0.0, 1.0).n == 1


@settings(max_examples=25, deadline=None)
@given(
    a=st.floats(-1.0, 1.0),
    b=st.floats(-1.0, 1.0),
    c=st.floats(-1.0, 1.0),
    seed=st.integers(0, 50),
)
def test_sphere_points_square_to_minus_one(a, b, c, seed):
    norm = np.sqrt(a * a + b * b + c * c)
    if norm < 1e-3:
        return
    sphere = random_sphere(1, seed)
    point = sphere.point(a / norm, b / norm, c / norm)
    assert frobenius(point.mat @ point.mat + np.eye(4)) < 1e-9


def test_conjugation_identity_and_rotation_oracle():
    sphere = canonical_frame(1)
    i, j, k = sphere.frame
    e = GroupElement.identity(4)
    assert frobenius(conjugate(e, j).mat - j.mat) == 0.0
    # Rotation about the I axis: exp(t I / 2) J exp(-t I / 2) = cos t J + sin t K,
    # checked with the matrix exponential as the independent oracle.
    for t in (0.3, 1.1):
        g = GroupElement(matrix_exp(0.5 * t * i.mat), inv=matrix_exp(-0.5 * t * i.mat))
        rotated = conjugate(g, j)
        expected = np.cos(t) * j.mat + np.sin(t) * k.mat
        assert frobenius(rotated.mat - expected) < 1e-12
        assert sphere.contains(rotated.mat)


def test_conjugated_frame_stays_quaternionic():
    sphere = random_sphere(2, 4)
    g = random_group_element(8, np.random.default_rng(9))
    image = conjugate(g, sphere)
    i, j, k = (f.mat for f in image.frame)
    assert frobenius(i @ j - k) < 1e-9
    assert frobenius(j @ i + k) < 1e-9


def test_conjugate_size_mismatch():
    g = GroupElement.identity(8)
    with pytest.raises(DimensionError):
        conjugate(g, ComplexStructure(canonical_structure(1)))


def _commutator_kernel_dim_oracle(mats, size):
    """Independent kernel-dimension oracle assembled entrywise."""
    rows = []
    for m in mats:
        for r in range(size):
            for c in range(size):
                row = np.zeros(size * size)
                for k in range(size):
                    row[r * size + k] += m[k, c]
                    row[k * size + c] -= m[r, k]
                rows.append(row)
    svals = np.linalg.svd(np.array(rows), compute_uv=False)
    return int(np.sum(svals <= 1e-7 * svals[0])) + size * size - len(svals) if False else (
        size * size - int(np.sum(svals > 1e-7 * svals[0]))
    )


def test_centralizer_dimensions():
    for n in (1, 2):
        structure = random_complex_structure(n, 6)
        basis = centralizer_basis(structure)
        assert len(basis) == 8 * n * n
        assert all(frobenius(x @ structure.mat - structure.mat @ x) < 1e-9 for x in basis)
        oracle = _commutator_kernel_dim_oracle([structure.mat], 4 * n)
        assert oracle == 8 * n * n


def test_quaternionic_centralizer_dimensions():
    for n in (1, 2):
        sphere = canonical_frame(n)
        basis = quaternionic_centralizer_basis(sphere)
        assert len(basis) == 4 * n * n
        k = sphere.frame[2].mat
        assert all(frobenius(x @ k - k @ x) < 1e-9 for x in basis)
        oracle = _commutator_kernel_dim_oracle(
            [sphere.frame[0].mat, sphere.frame[1].mat], 4 * n
        )
        assert oracle == 4 * n * n


def test_centralizer_exact_matches_svd_span():
    structure = random_complex_structure(2, 13)
    svd_basis = centralizer_basis(structure)
    exact_basis = centralizer_basis_exact(structure)
    assert len(exact_basis) == len(svd_basis)
    stacked = np.column_stack([vec(x) for x in svd_basis + exact_basis])
    svals = np.linalg.svd(stacked, compute_uv=False)
    assert int(np.sum(svals > 1e-9 * svals[0])) == len(svd_basis)


def test_adapted_conjugator_recovers_structure():
    for n in (1, 2):
        structure = random_complex_structure(n, 17)
        p = adapted_conjugator(structure)
        recovered = p @ canonical_structure(n) @ np.linalg.inv(p)
        assert frobenius(recovered - structure.mat) < 1e-10


def test_sphere_inner_product_properties():
    sphere = canonical_frame(2)
    i, j, k = (f.mat for f in sphere.frame)
    gram = np.array([[sphere_dot(a, b) for b in (i, j, k)] for a in (i, j, k)])
    assert frobenius(gram - np.eye(3)) < 1e-12
    # agreement with the rescaled Frobenius product on orthogonal frames
    assert abs(sphere_dot(i, j) - np.sum(i * j) / 8.0) < 1e-12
    # conjugation invariance
    g = random_group_element(8, np.random.default_rng(1))
    gi, gj = (g.mat @ m @ g.inv for m in (i, j))
    assert abs(sphere_dot(gi, gj) - sphere_dot(i, j)) < 1e-9


def test_tangent_plane_complex_linearity():
    # Left multiplication by I preserves the span of (J, K): IJ = K and IK = -J.
    for n in (1, 2):
        sphere = random_sphere(n, 14)
        i, j, k = (f.mat for f in sphere.frame)
        assert frobenius(i @ j - k.copy()) < 1e-9
        assert frobenius(i @ k + j) < 1e-9
