"""Implicit midpoint (trapezoidal) time stepping of the velocity-stress system.

The semidiscrete system is

    A alpha' + A alpha + B^T beta = 0
    C beta'  - B alpha            = F(t),

advanced by averaging the two endpoint states over each step.  The load
enters through the average of the endpoint body forces.  Each step solves
the reduced stress system (velocity eliminated exactly) and recovers the
velocity update in closed form, so the two discrete equations hold to
solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .assembly import AssembledSystem, assemble_load, assemble_system
from .fespace import NEDELEC, StressSpace, VelocitySpace
from .linalg import SchurSolver, block_diag_inverse, build_schur
from .material import IsotropicMaterial
from .mesh import StructuredMesh
from .mms import exact_fields

__all__ = ["SimState", "TimeGrid", "RunResult", "init_state", "cn_step", "CNStepper", "run"]


@dataclass
class SimState:
    """Stress and velocity coefficients at one time node."""

    alpha: np.ndarray
    beta: np.ndarray
    t: float

    def copy(self) -> "SimState":
        return SimState(self.alpha.copy(), self.beta.copy(), self.t)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, t_final] into n_steps steps."""

    t_final: float
    n_steps: int

    def __post_init__(self):
        if not self.t_final > 0.0:
            raise ValueError(f"final time must be positive, got {self.t_final}")
        if self.n_steps < 1 or int(self.n_steps) != self.n_steps:
            raise ValueError(f"step count must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps

    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.t_final, self.n_steps + 1)


def init_state(
    stress_space: StressSpace,
    velocity_space: VelocitySpace,
    sigma0=None,
    v0=None,
) -> SimState:
    """State at t = 0: stress by collocation interpolation, velocity by L2 projection.

    ``sigma0(x, y) -> (..., 3)`` and ``v0(x, y) -> (..., 2)``; ``None`` means zero.
    """
    alpha = (
        stress_space.interpolate(sigma0)
        if sigma0 is not None
        else np.zeros(stress_space.dim)
    )
    beta = (
        velocity_space.project(v0) if v0 is not None else np.zeros(velocity_space.dim)
    )
    return SimState(alpha, beta, 0.0)


class CNStepper:
    """Prepared single-step update for a fixed system and solver."""

    def __init__(self, system: AssembledSystem, solver: SchurSolver):
        if solver.S.shape[0] != system.A.shape[0]:
            raise ValueError("solver was built for a different stress space")
        self.system = system
        self.solver = solver
        self.Cinv = block_diag_inverse(system.C, system.velocity_space.n_local)
        self.Bt = system.B.T.tocsr()

    def midpoint_load(self, f, t: float, dt: float) -> np.ndarray:
        """Average of the endpoint load vectors over [t, t + dt]."""
        vs = self.system.velocity_space
        if f is None:
            return np.zeros(vs.dim)
        return 0.5 * (assemble_load(vs, f, t) + assemble_load(vs, f, t + dt))

    def advance(self, state: SimState, load_mid: np.ndarray, dt: float) -> SimState:
        if not dt > 0.0:
            raise ValueError(f"time step must be positive, got {dt}")
        A, B, Bt, Cinv = self.system.A, self.system.B, self.Bt, self.Cinv
        a, b = state.alpha, state.beta
        rhs = (
            (1.0 / dt - 0.5) * (A @ a)
            - Bt @ b
            - 0.25 * dt * (Bt @ (Cinv @ (B @ a)))
            - 0.5 * dt * (Bt @ (Cinv @ load_mid))
        )
        a_new = self.solver.solve(rhs)
        b_new = b + dt * (Cinv @ (0.5 * (B @ (a + a_new)) + load_mid))
        return SimState(a_new, b_new, state.t + dt)


def cn_step(
    system: AssembledSystem, solver: SchurSolver, state: SimState, f, dt: float
) -> SimState:
    """Advance one step; ``f(x, y, t) -> (..., 2)`` or ``None`` for no forcing."""
    stepper = CNStepper(system, solver)
    load = stepper.midpoint_load(f, state.t, dt)
    return stepper.advance(state, load, dt)


@dataclass
class RunResult:
    """Trajectory diagnostics of one run."""

    config: object
    times: np.ndarray
    energy: np.ndarray
    final_state: SimState
    snapshots: list = field(default_factory=list)
    err_sigma: np.ndarray | None = None
    err_v: np.ndarray | None = None
    E_a_sigma: float | None = None
    E_c_v: float | None = None
    argmax_sigma: int | None = None
    argmax_v: int | None = None


def run(config) -> RunResult:
    """Drive a full simulation described by a resolved run configuration.

    The configuration must carry ``element``, ``nx``, ``dt``, ``n_steps``,
    ``t_final``, ``rho``, ``mu``, ``lam``, ``solver``, ``solver_tol``,
    ``example`` (``None`` for an unforced zero-data run), ``force``, and
    ``snapshot_every``.  Mass lumping is applied exactly when the element
    family is ``nedelec-q1q0``.
    """
    grid = TimeGrid(config.t_final, config.n_steps)
    dt = grid.dt
    if config.dt is not None and abs(config.dt * config.n_steps - config.t_final) > 1e-9 * max(
        1.0, config.t_final
    ):
        raise ValueError(
            f"dt * n_steps = {config.dt * config.n_steps} does not match "
            f"t_final = {config.t_final}"
        )
    material = IsotropicMaterial(rho=config.rho, mu=config.mu, lam=config.lam)
    mesh = StructuredMesh(config.nx, config.nx)
    stress_space = StressSpace(mesh, config.element)
    velocity_space = VelocitySpace(mesh, config.element)
    lumped = config.element == NEDELEC
    system = assemble_system(stress_space, velocity_space, material, lumped=lumped)
    stepper = CNStepper(
        system,
        build_schur(
            system.A,
            system.B,
            block_diag_inverse(system.C, velocity_space.n_local),
            dt,
            method=config.solver,
            tol=config.solver_tol,
        ),
    )

    solution = None
    if config.example is not None:
        solution = exact_fields(config.example, material, force=getattr(config, "force", False))
        state = init_state(
            stress_space,
            velocity_space,
            sigma0=lambda x, y: solution.sigma(x, y, 0.0),
            v0=lambda x, y: solution.v(x, y, 0.0),
        )
    else:
        state = init_state(stress_space, velocity_space)

    nodes = grid.nodes()
    n_nodes = nodes.size
    energy = np.empty(n_nodes)
    err_sigma = np.empty(n_nodes) if solution else None
    err_v = np.empty(n_nodes) if solution else None
    if solution:
        stress_err = analysis.StressErrorEvaluator(stress_space, material)
        vel_err = analysis.VelocityErrorEvaluator(velocity_space, material)

    every = getattr(config, "snapshot_every", None)
    snapshots = []

    def record(n, st):
        energy[n] = analysis.energy(system, st)
        if solution:
            err_sigma[n] = stress_err(st.alpha, solution.sigma, nodes[n])
            err_v[n] = vel_err(st.beta, solution.v, nodes[n])
        if every and n % every == 0:
            snapshots.append((n, st.copy()))

    record(0, state)
    f = solution.f if solution else None
    for n in range(grid.n_steps):
        load = stepper.midpoint_load(f, float(nodes[n]), dt)
        state = stepper.advance(state, load, dt)
        state.t = float(nodes[n + 1])
        record(n + 1, state)

    result = RunResult(
        config=config,
        times=nodes,
        energy=energy,
        final_state=state,
        snapshots=snapshots,
    )
    if solution:
        result.err_sigma = err_sigma
        result.err_v = err_v
        result.argmax_sigma = int(np.argmax(err_sigma[1:])) + 1
        result.argmax_v = int(np.argmax(err_v[1:])) + 1
        result.E_a_sigma = float(err_sigma[result.argmax_sigma])
        result.E_c_v = float(err_v[result.argmax_v])
    return result
