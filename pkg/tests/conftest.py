import numpy as np
import pytest

from twistor_kit import (
    ComplexStructure,
    GroupElement,
    TwistorSphere,
    canonical_frame,
    canonical_structure,
    chart_frame,
    conjugate,
    default_partner,
    random_complex_structure,
)
from twistor_kit.linalg import frobenius, matrix_exp


def nearby_structure(base, seed, distance):
    """A conjugate of ``base`` at Frobenius distance close to (and at most) ``distance``."""
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(base.mat.shape)
    eps = 1e-4

    def at(scale):
        g = GroupElement(matrix_exp(scale * direction), inv=matrix_exp(-scale * direction))
        return conjugate(g, base)

    candidate = at(eps)
    while frobenius(candidate.mat - base.mat) < distance and eps < 10.0:
        eps *= 1.3
        candidate = at(eps)
    while frobenius(candidate.mat - base.mat) > distance:
        eps *= 0.85
        candidate = at(eps)
    return candidate


def random_sphere(n, seed):
    structure = random_complex_structure(n, seed)
    partner = default_partner(structure, seed)
    return TwistorSphere(
        (structure, partner, ComplexStructure(structure.mat @ partner.mat))
    )


@pytest.fixture
def canonical_1():
    return canonical_frame(1)


@pytest.fixture
def chart_1():
    return chart_frame(1)
