"""Vortex-lattice and giant-vortex trial states for energy upper bounds.

A trial state is psi = c * sqrt(rho) * xi * g with rho the (regularized)
Thomas-Fermi density, g the unit-modulus phase factor with one singularity
per lattice point, xi a linear cutoff that vanishes at the cores, and c the
normalization constant.  The lattice cell area is 2*pi/Omega for every
lattice kind, so one unit of circulation neutralizes the rotation background
per cell.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .field import ComplexField, Grid
from .params import Params, Regime, classify
from .tf import TFSolution, regularized_density, solve_tf


class LatticeKind(Enum):
    TRIANGULAR = "triangular"
    SQUARE = "square"
    HEXAGONAL = "hexagonal"


class LatticeError(ValueError):
    pass


class CoreRadiusError(ValueError):
    pass


@dataclass(frozen=True)
class VortexLattice:
    """Finite regular lattice of unit vortices inside the unit disc.

    ``ell`` is the nearest-neighbor distance; the area owned by each point is
    2*pi/Omega for all kinds (square points for SQUARE, triangular points /
    hexagonal cells for TRIANGULAR, honeycomb points for HEXAGONAL).
    """

    kind: LatticeKind
    ell: float
    points: np.ndarray
    core_radius: float
    cell_area: float
    n_points: int
    n_support: int
    center_offset: tuple[float, float]

    @property
    def nn_distance(self) -> float:
        return self.ell


def lattice_points(
    Omega: float,
    kind: LatticeKind,
    center_offset: tuple[float, float] = (0.0, 0.0),
) -> tuple[np.ndarray, float]:
    """All lattice points with |p| < 1, plus the nearest-neighbor distance.

    The cell-area constraint |Q| = 2*pi/Omega fixes the spacing: SQUARE has
    ell**2 = 2*pi/Omega, TRIANGULAR has (sqrt(3)/2)*ell**2 = 2*pi/Omega, and
    the HEXAGONAL (honeycomb) point arrangement has (3*sqrt(3)/4)*s**2 =
    2*pi/Omega with s the nearest-neighbor distance.  One point sits exactly
    at the offset (the origin by default).
    """
    cell = 2.0 * math.pi / Omega
    ox, oy = center_offset
    if kind is LatticeKind.SQUARE:
        ell = math.sqrt(cell)
        basis = np.array([[ell, 0.0], [0.0, ell]])
        internal = np.array([[0.0, 0.0]])
        nn = ell
    elif kind is LatticeKind.TRIANGULAR:
        ell = math.sqrt(2.0 * cell / math.sqrt(3.0))
        basis = np.array([[ell, 0.0], [0.5 * ell, 0.5 * math.sqrt(3.0) * ell]])
        internal = np.array([[0.0, 0.0]])
        nn = ell
    elif kind is LatticeKind.HEXAGONAL:
        s = math.sqrt(4.0 * cell / (3.0 * math.sqrt(3.0)))
        basis = np.array([[1.5 * s, 0.5 * math.sqrt(3.0) * s],
                          [1.5 * s, -0.5 * math.sqrt(3.0) * s]])
        internal = np.array([[0.0, 0.0], [s, 0.0]])
        nn = s
    else:
        raise LatticeError(f"unknown lattice kind {kind!r}")

    reach = int(math.ceil(2.5 / min(np.linalg.norm(basis[0]), np.linalg.norm(basis[1])))) + 2
    m = np.arange(-reach, reach + 1)
    mm, kk = np.meshgrid(m, m, indexing="ij")
    base = mm[..., None] * basis[0] + kk[..., None] * basis[1]
    pts = (base[:, :, None, :] + internal[None, None, :, :]).reshape(-1, 2)
    pts = pts + np.array([ox, oy])
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) < 1.0]
    return pts, nn


def core_radius(params: Params, c_mid: float = 1.0) -> float:
    """Vortex core radius: epsilon at slow rotation, sqrt(eps/Omega) beyond.

    The two rules coincide at Omega = c_mid/epsilon.  The separation from the
    cell scale, t*sqrt(Omega) = sqrt(min(eps^2*Omega, eps)), is only
    asymptotically small; a hard cap of 0.5/sqrt(Omega) keeps the core discs
    well inside the cells at any usable parameter point.
    """
    if params.Omega <= 0.0:
        raise CoreRadiusError("core radius needs Omega > 0")
    eps = params.epsilon
    t = eps if params.Omega <= c_mid / eps else math.sqrt(eps / params.Omega)
    if t > 0.5 / math.sqrt(params.Omega):
        raise CoreRadiusError(
            f"core radius t={t:.4g} is incompatible with the cell scale "
            f"Omega**-0.5={params.Omega**-0.5:.4g} at (eps={eps}, Omega={params.Omega})"
        )
    return t


def build_lattice(
    params: Params,
    kind: LatticeKind = LatticeKind.SQUARE,
    center_offset: tuple[float, float] = (0.0, 0.0),
) -> VortexLattice:
    """Lattice sized for the rotation rate, with the core radius attached."""
    if params.Omega < 20.0:
        raise LatticeError(
            f"Omega={params.Omega} gives fewer than a handful of cells; need Omega >= 20"
        )
    pts, nn = lattice_points(params.Omega, kind, center_offset)
    tf = solve_tf(params.omega)
    radii = np.hypot(pts[:, 0], pts[:, 1])
    n_support = int(np.count_nonzero(radii >= tf.hole_radius))
    return VortexLattice(
        kind=kind,
        ell=nn,
        points=pts,
        core_radius=core_radius(params),
        cell_area=2.0 * math.pi / params.Omega,
        n_points=len(pts),
        n_support=n_support,
        center_offset=(float(center_offset[0]), float(center_offset[1])),
    )


def phase_factor(grid: Grid, lattice: VortexLattice) -> ComplexField:
    """Unit-modulus product of (z - z_i)/|z - z_i| over all lattice points.

    Evaluated by accumulating arg(z - z_i) instead of multiplying hundreds of
    unit complex numbers.  Nodes within 1e-12 of a vortex get the value 0;
    the cutoff kills those nodes anyway.
    """
    phase = np.zeros((grid.n, grid.n))
    pts = lattice.points
    for start in range(0, len(pts), 64):
        chunk = pts[start:start + 64]
        dx = grid.X[..., None] - chunk[:, 0]
        dy = grid.Y[..., None] - chunk[:, 1]
        phase += np.arctan2(dy, dx).sum(axis=-1)
    values = np.exp(1j * phase)
    if len(pts):
        dist, _ = cKDTree(pts).query(np.column_stack([grid.X.ravel(), grid.Y.ravel()]))
        values[(dist <= 1e-12).reshape(grid.n, grid.n)] = 0.0
    values[~grid.mask] = 0.0
    return ComplexField(grid, values)


def cutoff(grid: Grid, lattice: VortexLattice) -> np.ndarray:
    """Linear ramp |z - z_i|/t inside each core disc, 1 outside all of them."""
    t = lattice.core_radius
    if 2.0 * t >= lattice.nn_distance:
        raise LatticeError(
            f"core discs overlap: 2t={2 * t:.4g} >= nearest-neighbor "
            f"distance {lattice.nn_distance:.4g}"
        )
    if len(lattice.points) == 0:
        return np.ones((grid.n, grid.n))
    dist, _ = cKDTree(lattice.points).query(
        np.column_stack([grid.X.ravel(), grid.Y.ravel()])
    )
    xi = np.minimum(dist.reshape(grid.n, grid.n) / t, 1.0)
    return xi


@dataclass
class TrialState:
    psi: ComplexField
    c: float
    lattice: VortexLattice | None
    rho_used: Callable
    params: Params
    tf: TFSolution


def assemble_trial(
    params: Params,
    kind: LatticeKind = LatticeKind.SQUARE,
    *,
    grid: Grid,
    center_offset: tuple[float, float] = (0.0, 0.0),
    t_override: float | None = None,
    prune_hole_vortices: bool = False,
) -> TrialState:
    """Build the normalized lattice trial state on a grid.

    ``t_override`` replaces the default core radius (used for stationarity
    checks of the core-size choice); ``prune_hole_vortices`` drops lattice
    points strictly inside the density hole, the giant-vortex-like variant.
    """
    regime = classify(params).tag
    if regime not in (Regime.LATTICE_SLOW, Regime.LATTICE_FAST):
        warnings.warn(
            f"lattice trial state outside its regime (got {regime.value}); "
            "energies remain valid upper bounds but the subleading law may not apply",
            stacklevel=2,
        )
    lattice = build_lattice(params, kind, center_offset)
    if t_override is not None:
        lattice = replace(lattice, core_radius=float(t_override))
    tf = solve_tf(params.omega)
    if prune_hole_vortices and tf.has_hole:
        keep = np.hypot(lattice.points[:, 0], lattice.points[:, 1]) >= tf.hole_radius
        lattice = replace(
            lattice, points=lattice.points[keep], n_points=int(keep.sum())
        )
    rho_eval = regularized_density(tf, params.Omega) if params.Omega > 0 else tf.density
    rho = np.where(grid.mask, rho_eval(grid.R), 0.0)
    g = phase_factor(grid, lattice)
    xi = cutoff(grid, lattice)
    raw = np.sqrt(rho) * xi * g.values
    norm2 = grid.integrate(np.abs(raw) ** 2)
    c = 1.0 / math.sqrt(norm2)
    psi = ComplexField(grid, c * raw)
    return TrialState(psi=psi, c=c, lattice=lattice, rho_used=rho_eval,
                      params=params, tf=tf)


def giant_vortex_trial(
    params: Params,
    n_winding: int | None = None,
    *,
    grid: Grid,
) -> TrialState:
    """Trial state with all circulation in a single central phase winding.

    Requires a density hole (omega > omega_h) so that the central singularity
    carries no kinetic cost.  The default winding round(Omega/2) matches the
    rigid-rotation circulation of the disc.
    """
    tf = solve_tf(params.omega)
    if not tf.has_hole:
        raise ValueError(
            f"giant vortex needs omega > omega_h = {tf.omega_h:.6f}, got {params.omega:.6f}"
        )
    if n_winding is None:
        n_winding = int(round(params.Omega / 2.0))
    rho_eval = regularized_density(tf, params.Omega)
    rho = np.where(grid.mask, rho_eval(grid.R), 0.0)
    theta = np.arctan2(grid.Y, grid.X)
    raw = np.sqrt(rho) * np.exp(1j * n_winding * theta)
    raw[~grid.mask] = 0.0
    norm2 = grid.integrate(np.abs(raw) ** 2)
    c = 1.0 / math.sqrt(norm2)
    psi = ComplexField(grid, c * raw)
    return TrialState(psi=psi, c=c, lattice=None, rho_used=rho_eval,
                      params=params, tf=tf)
