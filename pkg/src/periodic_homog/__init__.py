"""Homogenized densities of periodic energies with gradient constraints.

The package computes cell-problem values, piecewise-affine envelopes,
truncation sequences and radial boundary extensions for integrands
``W(x, xi) = A(x) f(xi)`` that are finite only for ``xi`` in a bounded
convex set, and runs desk-scale convergence sweeps for oscillating
energies ``int W(x/eps, grad u)``.
"""

from .cell_problem import (
    CellSolveResult,
    TestField,
    cell_solves,
    cell_value,
    duality_1d_oracle,
    hW,
    hWn_sequence,
    tiled_start,
    values_over_r,
)
from .envelopes import (
    EnvelopeResult,
    HWDensity,
    RadialProbe,
    convex_envelope_1d,
    extend_hat,
    laminate_bound,
    monotone_sup_check,
    radial_limit,
    zf_discrete,
    zf_refinement,
    zhw,
)
from .estimators import DensityTable, EnvelopeTransformer, HomogenizedDensity
from .exceptions import (
    DimensionMismatch,
    InfeasibleMacroGradient,
    NotCompactlyContained,
    PreconditionError,
    ProjectionNotConverged,
    TilingMismatch,
    UndecidedLimit,
)
from .gamma_sweep import DomainMesh, SweepReport, minimize_I_eps, recovery_construct, refine_minimum, sweep
from .geometry import (
    Ball,
    Box,
    ConstraintSet,
    Polytope,
    constraint_from_dict,
    minimal_scale_containing,
    neighborhood_inclusion_check,
)
from .hyperelastic import (
    HyperelasticDensity,
    blowup_probe,
    det_positivity_check,
    hyperelastic_integrand,
    shifted_integrand,
    whom_hyper,
)
from .integrand import (
    Barrier,
    DoubleWell,
    Integrand,
    PeriodicCoefficient,
    PowerGauge,
    Quadratic,
    SampleConfig,
    Tabulated,
    TruncatedIntegrand,
    TruncationSchedule,
    assumption_report,
    certified_schedule,
    eval_W,
    eval_Wn,
    integrand_from_dict,
)
from .mesh import StructuredMesh
from .solver import SolverConfig

__version__ = "0.1.0"

__all__ = [
    "CellSolveResult",
    "TestField",
    "cell_solves",
    "cell_value",
    "duality_1d_oracle",
    "hW",
    "hWn_sequence",
    "tiled_start",
    "values_over_r",
    "EnvelopeResult",
    "HWDensity",
    "RadialProbe",
    "convex_envelope_1d",
    "extend_hat",
    "laminate_bound",
    "monotone_sup_check",
    "radial_limit",
    "zf_discrete",
    "zf_refinement",
    "zhw",
    "DimensionMismatch",
    "InfeasibleMacroGradient",
    "NotCompactlyContained",
    "PreconditionError",
    "ProjectionNotConverged",
    "TilingMismatch",
    "UndecidedLimit",
    "Ball",
    "Box",
    "ConstraintSet",
    "Polytope",
    "constraint_from_dict",
    "minimal_scale_containing",
    "neighborhood_inclusion_check",
    "HyperelasticDensity",
    "blowup_probe",
    "det_positivity_check",
    "hyperelastic_integrand",
    "shifted_integrand",
    "whom_hyper",
    "Barrier",
    "DoubleWell",
    "Integrand",
    "PeriodicCoefficient",
    "PowerGauge",
    "Quadratic",
    "SampleConfig",
    "Tabulated",
    "TruncatedIntegrand",
    "TruncationSchedule",
    "assumption_report",
    "certified_schedule",
    "eval_W",
    "eval_Wn",
    "integrand_from_dict",
    "DensityTable",
    "EnvelopeTransformer",
    "HomogenizedDensity",
    "DomainMesh",
    "SweepReport",
    "minimize_I_eps",
    "recovery_construct",
    "refine_minimum",
    "sweep",
    "StructuredMesh",
    "SolverConfig",
]
