"""Twistor geometry of the period domain of even-dimensional complex tori.

Complex structures on R^{4n}, twistor spheres and paths between periods,
period-matrix charts with the Pluecker embedding, and Neron-Severi /
Riemann-relation certificates, all with seeded deterministic randomness.
"""

from .charts import (
    ConicReport,
    PeriodMatrix,
    PlueckerVector,
    chart_complex_linearity_check,
    complex_structure_from_period,
    period_from_complex_structure,
    pluecker,
    pluecker_subsets,
    verify_conic,
)
from .connectivity import (
    PhiProblem,
    PhiSolution,
    SolverOptions,
    TwistorPath,
    cone_parametrization_rank,
    conjugate_path,
    default_partner,
    dimension_certificates,
    fiber_dimension,
    global_path,
    phi,
    phi_differential_rank,
    psi_forward,
    psi_roundtrip_residual,
    solve_phi,
    three_sphere_path,
    validate_path,
)
from .errors import (
    DegenerateInputError,
    DegeneratePairError,
    DegenerateProblemError,
    DimensionError,
    InvalidFormError,
    InvalidStructureError,
    ModeError,
    NoConvergenceError,
    NormalizationError,
    NotCosphericalError,
    OutsideChartError,
    PathingError,
    PreconditionError,
    SamplingError,
    SingularityError,
    ToleranceError,
    TwistorKitError,
    UnsupportedSizeError,
    WrongSubgroupError,
)
from .genericity import (
    AlternatingForm,
    NSReport,
    RiemannCertificate,
    invariant_form_family,
    line_period,
    locus_solution_dimension,
    ns_rank,
    riemann_certificate,
    sample_constrained_uv,
    sphere_locus_decision,
    split_by_structure,
)
from .structures import (
    ComplexStructure,
    GroupElement,
    SpherePoint,
    TwistorSphere,
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

__version__ = "0.1.0"
