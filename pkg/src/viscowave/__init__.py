"""Mixed-element solver for the viscoelastic velocity-stress wave system
on the unit square, with two conforming rectangular element pairs and
implicit midpoint time stepping."""

from .analysis import (
    StressErrorEvaluator,
    VelocityErrorEvaluator,
    convergence_orders,
    energy,
    energy_residuals,
    infsup_constants,
    stress_error_a,
    velocity_error_c,
)
from .assembly import (
    AssembledSystem,
    assemble_coupling,
    assemble_load,
    assemble_mass_stress,
    assemble_mass_velocity,
    assemble_system,
)
from .fespace import FAMILIES, HMZ, NEDELEC, StressSpace, VelocitySpace
from .linalg import (
    ConvergenceError,
    SchurSolver,
    SingularBlockError,
    block_diag_inverse,
    build_schur,
)
from .material import (
    IsotropicMaterial,
    VoigtTensor,
    apply_compliance,
    apply_stiffness,
    compliance_bounds,
    voigt_inner,
)
from .mesh import ElementRect, StructuredMesh
from .mms import ExactSolution, ResidualReport, exact_fields, verify_residuals
from .quadrature import QuadratureRule, integrate, lumped_rect_rule, rect_rule, triangle_rule
from .timestepper import RunResult, SimState, TimeGrid, cn_step, init_state, run

__version__ = "0.1.0"
