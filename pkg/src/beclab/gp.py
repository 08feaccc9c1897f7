"""Ground-state search by normalized gradient flow (imaginary time).

Each accepted step is psi <- normalize(psi - step * grad E); the step halves
whenever the energy would rise and grows 10% after 20 consecutive accepts,
so the flow self-tunes to the stability edge.  Convergence is declared on
the stationarity residual of the GP equation, not on an energy stall.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum

import numpy as np

from .field import (
    ComplexField,
    EnergyBreakdown,
    Grid,
    load_field,
    random_field,
    uniform_field,
    vector_potential,
)
from .params import Params, derive
from .tf import TFSolution, tf_energy_unscaled
from .trial import LatticeKind, assemble_trial, giant_vortex_trial


class InitKind(Enum):
    UNIFORM = "uniform"
    TRIAL_LATTICE = "trial"
    GIANT_VORTEX = "giant"
    FILE = "file"
    RANDOM = "random"


@dataclass
class OmegaRamp:
    """Optional annealing schedule: relax at reduced rotation rates first."""

    start_fraction: float = 0.7
    stages: int = 3
    iters_per_stage: int = 3000


@dataclass
class MinimizeOptions:
    max_iters: int = 200_000
    step: float | None = None          # None: 0.4 * h^2
    tol_residual: float = 1e-4
    init: InitKind = InitKind.UNIFORM
    seed: int = 0
    init_path: str | None = None
    lattice_kind: LatticeKind = LatticeKind.SQUARE
    anneal: OmegaRamp | None = None
    grow_after: int = 20
    grow_factor: float = 1.1
    check_every: int = 25
    min_step: float = 1e-15

    def __post_init__(self):
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")


@dataclass
class MinimizeReport:
    psi: ComplexField
    breakdown: EnergyBreakdown
    mu: float
    residual_norm: float
    iters: int
    energy_history: np.ndarray
    sup_density: float
    converged: bool
    params: Params
    final_step: float
    seed: int


class NonConvergenceError(RuntimeError):
    """Raised when the flow hits max_iters above tolerance; carries the report."""

    def __init__(self, report: MinimizeReport):
        super().__init__(
            f"flow did not reach tol_residual after {report.iters} iterations "
            f"(residual {report.residual_norm:.3e})"
        )
        self.report = report


class StepUnderflowError(RuntimeError):
    pass


class _Engine:
    """State restricted to the masked nodes as contiguous 1-D vectors; one
    call evaluates the energy breakdown and the exact discrete gradient."""

    def __init__(self, grid: Grid, params: Params):
        self.grid = grid
        self.params = params
        dx, dy, dxT, dyT = grid.difference_operators()
        sel = np.flatnonzero(grid.mask.ravel())
        self.sel = sel
        self.dx = dx[sel][:, sel]
        self.dy = dy[sel][:, sel]
        self.dxT = dxT[sel][:, sel]
        self.dyT = dyT[sel][:, sel]
        ax, ay = vector_potential(grid, params.Omega)
        self.ax = ax.ravel()[sel]
        self.ay = ay.ravel()[sel]
        self.w = grid.weights.ravel()[sel]
        self.cent = -0.25 * params.Omega**2 * grid.R.ravel()[sel] ** 2
        self.inv_eps2 = 1.0 / params.epsilon**2

    def to_vector(self, field: ComplexField) -> np.ndarray:
        return field.values.ravel()[self.sel].copy()

    def to_field(self, v: np.ndarray) -> ComplexField:
        full = np.zeros(self.grid.n * self.grid.n, dtype=np.complex128)
        full[self.sel] = v
        return ComplexField(self.grid, full.reshape(self.grid.n, self.grid.n))

    def normalize(self, v: np.ndarray) -> np.ndarray:
        nrm = math.sqrt(np.vdot(v, self.w * v).real)
        return v / nrm

    def evaluate(self, v: np.ndarray):
        """Energy breakdown, gradient, and density at one point of the flow."""
        gx = self.dx @ v
        gx -= 1j * (self.ax * v)
        gy = self.dy @ v
        gy -= 1j * (self.ay * v)
        zx = self.w * gx
        zy = self.w * gy
        kinetic = np.vdot(gx, zx).real + np.vdot(gy, zy).real
        dens = (v.real * v.real + v.imag * v.imag)
        wdens = self.w * dens
        centrifugal = float(np.dot(self.cent, wdens))
        interaction = self.inv_eps2 * float(np.dot(dens, wdens))
        bd = EnergyBreakdown(kinetic=float(kinetic), centrifugal=centrifugal,
                             interaction=interaction)
        grad = self.dxT @ zx
        grad += self.dyT @ zy
        grad += 1j * (self.ax * zx + self.ay * zy)
        grad += (self.w * (self.cent + (2.0 * self.inv_eps2) * dens)) * v
        grad /= self.w
        return bd, grad, dens

    def energy_only(self, v: np.ndarray) -> EnergyBreakdown:
        gx = self.dx @ v - 1j * (self.ax * v)
        gy = self.dy @ v - 1j * (self.ay * v)
        kinetic = np.vdot(gx, self.w * gx).real + np.vdot(gy, self.w * gy).real
        dens = v.real * v.real + v.imag * v.imag
        wdens = self.w * dens
        return EnergyBreakdown(
            kinetic=float(kinetic),
            centrifugal=float(np.dot(self.cent, wdens)),
            interaction=self.inv_eps2 * float(np.dot(dens, wdens)),
        )

    def mu_and_residual(self, v, grad):
        mu = np.vdot(v, self.w * grad).real
        res = grad - mu * v
        rn = math.sqrt(np.vdot(res, self.w * res).real)
        return float(mu), rn


def _initial_field(params: Params, grid: Grid, opts: MinimizeOptions) -> ComplexField:
    if opts.init is InitKind.UNIFORM:
        return uniform_field(grid)
    if opts.init is InitKind.RANDOM:
        return random_field(grid, opts.seed)
    if opts.init is InitKind.TRIAL_LATTICE:
        return assemble_trial(params, opts.lattice_kind, grid=grid).psi
    if opts.init is InitKind.GIANT_VORTEX:
        return giant_vortex_trial(params, grid=grid).psi
    if opts.init is InitKind.FILE:
        if opts.init_path is None:
            raise ValueError("init=FILE requires init_path")
        return load_field(opts.init_path, grid=grid).normalized()
    raise ValueError(f"unknown init {opts.init!r}")


def _flow(engine: _Engine, v: np.ndarray, step: float, max_iters: int,
          opts: MinimizeOptions, history: list[float]):
    """Run the descent loop; returns (v, breakdown, mu, residual, iters, step, converged)."""
    bd, grad, _dens = engine.evaluate(v)
    history.append(bd.total)
    consecutive = 0
    mu = rn = math.nan
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        if it % opts.check_every == 0 or it == 1:
            mu, rn = engine.mu_and_residual(v, grad)
            scale = 1.0 + math.sqrt(max(bd.kinetic, 0.0))
            if rn <= opts.tol_residual * scale:
                converged = True
                break
        while True:
            cand = engine.normalize(v - step * grad)
            cbd, cgrad, _cdens = engine.evaluate(cand)
            if cbd.total <= bd.total + 1e-12 * (1.0 + abs(bd.total)):
                break
            step *= 0.5
            consecutive = 0
            if step < opts.min_step:
                raise StepUnderflowError(
                    f"backtracking collapsed the step below {opts.min_step}"
                )
        v, bd, grad = cand, cbd, cgrad
        history.append(bd.total)
        consecutive += 1
        if consecutive >= opts.grow_after:
            step *= opts.grow_factor
            consecutive = 0
    if not converged:
        mu, rn = engine.mu_and_residual(v, grad)
        scale = 1.0 + math.sqrt(max(bd.kinetic, 0.0))
        converged = rn <= opts.tol_residual * scale
    return v, bd, mu, rn, it, step, converged


def minimize(params: Params, grid: Grid, opts: MinimizeOptions | None = None) -> MinimizeReport:
    """Minimize the discrete GP energy over normalized fields on the grid.

    Raises NonConvergenceError (carrying the last report) if the residual
    tolerance is not met within max_iters, and StepUnderflowError if
    backtracking collapses.
    """
    opts = opts or MinimizeOptions()
    if opts.init is InitKind.FILE and opts.init_path is None:
        raise ValueError("init=FILE requires init_path")
    psi0 = _initial_field(params, grid, opts)
    step = opts.step if opts.step is not None else 0.4 * grid.h**2
    history: list[float] = []

    if opts.anneal is not None and params.Omega > 0:
        ramp = opts.anneal
        current = psi0
        fractions = np.linspace(ramp.start_fraction, 1.0, ramp.stages, endpoint=False)
        for frac in fractions:
            stage_params = derive(params.epsilon, frac * params.Omega)
            eng = _Engine(grid, stage_params)
            v, *_rest = _flow(eng, eng.normalize(eng.to_vector(current)), step,
                              ramp.iters_per_stage, opts, history=[])
            current = eng.to_field(v)
        psi0 = current

    engine = _Engine(grid, params)
    v = engine.normalize(engine.to_vector(psi0))
    v, bd, mu, rn, iters, step, converged = _flow(
        engine, v, step, opts.max_iters, opts, history
    )
    psi = engine.to_field(v)
    report = MinimizeReport(
        psi=psi,
        breakdown=bd,
        mu=mu,
        residual_norm=rn,
        iters=iters,
        energy_history=np.asarray(history),
        sup_density=float(np.max(v.real**2 + v.imag**2)),
        converged=converged,
        params=params,
        final_step=step,
        seed=opts.seed,
    )
    if not converged:
        raise NonConvergenceError(report)
    return report


def check_sup_bound(report: MinimizeReport, tf: TFSolution) -> float:
    """Ratio of the converged sup density to the TF boundary density."""
    return report.sup_density / float(tf.density(1.0))


@dataclass
class L2Report:
    distance: float
    bound_proxy: float


def l2_distance_to_tf(report: MinimizeReport, tf: TFSolution) -> L2Report:
    """L2 distance of |psi|^2 to the TF density, with the energy-gap proxy.

    The proxy sqrt(eps^2 (E - E_TF)) dominates the distance up to a constant
    by the convergence chain of the energy asymptotics.
    """
    grid = report.psi.grid
    dens = np.abs(report.psi.values) ** 2
    diff = np.where(grid.mask, dens - tf.density(grid.R), 0.0)
    distance = math.sqrt(grid.integrate(diff**2))
    gap = report.breakdown.total - tf_energy_unscaled(report.params)
    proxy = math.sqrt(max(report.params.epsilon**2 * gap, 0.0))
    return L2Report(distance=distance, bound_proxy=proxy)


def hole_density_mean(report: MinimizeReport, tf: TFSolution, fraction: float = 0.5) -> float:
    """Mean of |psi|^2 over the disc r < fraction * R_h (the hole interior)."""
    if not tf.has_hole:
        raise ValueError("no hole at this omega")
    grid = report.psi.grid
    sel = grid.mask & (grid.R < fraction * tf.hole_radius)
    w = grid.weights[sel]
    dens = np.abs(report.psi.values[sel]) ** 2
    return float(np.sum(w * dens) / np.sum(w))
