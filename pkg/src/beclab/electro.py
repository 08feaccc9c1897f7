"""Electrostatic view of a vortex cell: unit point charge on a neutralizing
uniform background, multipole moments, far fields, and the kinetic-energy
bound for the lattice phase factor.

The potential kernel is log|x - x'|, so a neutral cell's potential decays at
least like |x|^-2 and its field like |x|^-3; cells with more rotational
symmetry (square, hexagon) decay faster because their low moments vanish.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress

from .field import Grid, make_grid
from .params import Params
from .tf import TFSolution
from .trial import LatticeKind, VortexLattice, lattice_points


@dataclass(frozen=True)
class CellCharge:
    """One lattice cell: +1 point charge at the centroid, uniform background
    of density -1/area on the cell polygon.  ``shape`` names the polygon."""

    shape: LatticeKind
    area: float = 1.0

    def __post_init__(self):
        if self.area <= 0:
            raise ValueError("cell area must be positive")

    def vertices(self) -> np.ndarray:
        """Counterclockwise polygon vertices, centroid at the origin."""
        if self.shape is LatticeKind.SQUARE:
            a = math.sqrt(self.area) / 2.0
            return np.array([[a, a], [-a, a], [-a, -a], [a, -a]])
        if self.shape is LatticeKind.TRIANGULAR:
            # Equilateral triangle, area = (sqrt(3)/4) side^2, circumradius side/sqrt(3).
            rc = math.sqrt(4.0 * self.area / math.sqrt(3.0)) / math.sqrt(3.0)
            ang = np.deg2rad([90.0, 210.0, 330.0])
            return rc * np.column_stack([np.cos(ang), np.sin(ang)])
        if self.shape is LatticeKind.HEXAGONAL:
            side = math.sqrt(2.0 * self.area / (3.0 * math.sqrt(3.0)))
            ang = np.deg2rad(np.arange(6) * 60.0)
            return side * np.column_stack([np.cos(ang), np.sin(ang)])
        raise ValueError(f"unknown cell shape {self.shape!r}")


def _triangle_quadrature(v0, v1, v2, order: int):
    """Tensor Gauss-Legendre nodes mapped onto a triangle (Duffy collapse)."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (nodes + 1.0)
    wu = 0.5 * weights
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    # (u, u*v) maps the unit square onto the reference triangle; jacobian u.
    lam1 = U * (1.0 - V)
    lam2 = U * V
    x = v0[0] + lam1 * (v1[0] - v0[0]) + lam2 * (v2[0] - v0[0])
    y = v0[1] + lam1 * (v1[1] - v0[1]) + lam2 * (v2[1] - v0[1])
    area2 = abs((v1[0] - v0[0]) * (v2[1] - v0[1]) - (v2[0] - v0[0]) * (v1[1] - v0[1]))
    w = WU * WV * U * area2
    return x.ravel(), y.ravel(), w.ravel()


def cell_quadrature(cell: CellCharge, order: int = 32):
    """High-order quadrature nodes and weights covering the cell polygon."""
    verts = cell.vertices()
    xs, ys, ws = [], [], []
    origin = np.zeros(2)
    for k in range(len(verts)):
        x, y, w = _triangle_quadrature(origin, verts[k], verts[(k + 1) % len(verts)], order)
        xs.append(x)
        ys.append(y)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(ws)


@dataclass
class MultipoleReport:
    shape: LatticeKind
    area: float
    q: float
    C: np.ndarray
    S: np.ndarray
    decay_exponent: float

    def first_surviving_order(self, tol: float = 1e-9) -> int | None:
        mags = np.hypot(self.C, self.S)
        nz = np.nonzero(mags > tol)[0]
        return int(nz[0] + 1) if len(nz) else None


def multipole_moments(cell: CellCharge, K: int = 8) -> MultipoleReport:
    """Moments q, C_k, S_k (k = 1..K) of the neutral cell distribution.

    q is exactly zero by construction (the background integrates to -1); the
    point charge at the centroid contributes nothing to k >= 1, so the moments
    are background-only quadratures of Re/Im (x + iy)^k / k, exact for the
    polynomial integrands at this quadrature order.
    """
    if not 1 <= K <= 12:
        raise ValueError("K must lie in 1..12 (quadrature accuracy budget)")
    x, y, w = cell_quadrature(cell)
    z = x + 1j * y
    C = np.empty(K)
    S = np.empty(K)
    zk = np.ones_like(z)
    for k in range(1, K + 1):
        zk = zk * z
        mom = -(np.sum(w * zk)) / (cell.area * k)
        C[k - 1] = mom.real
        S[k - 1] = mom.imag
    report = MultipoleReport(shape=cell.shape, area=cell.area, q=0.0, C=C, S=S,
                             decay_exponent=math.nan)
    report.decay_exponent = _fit_decay_exponent(cell)
    return report


def _point_in_polygon(verts: np.ndarray, pts: np.ndarray, pad: float = 0.0) -> np.ndarray:
    """Convex-polygon membership (CCW vertices), inflated by ``pad``."""
    inside = np.ones(len(pts), dtype=bool)
    for k in range(len(verts)):
        a = verts[k]
        b = verts[(k + 1) % len(verts)]
        edge = b - a
        rel = pts - a
        cross = edge[0] * rel[:, 1] - edge[1] * rel[:, 0]
        inside &= cross >= -pad * np.hypot(*edge)
    return inside


def cell_field(cell: CellCharge, points: np.ndarray) -> np.ndarray:
    """Electric field of the neutral cell at points outside the closed cell.

    E(x) = x/|x|^2 minus the background integral of (x - x')/|x - x'|^2.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if _point_in_polygon(cell.vertices(), points, pad=1e-12).any():
        raise ValueError("field evaluation point lies inside the closed cell")
    qx, qy, qw = cell_quadrature(cell)
    dx = points[:, 0][:, None] - qx[None, :]
    dy = points[:, 1][:, None] - qy[None, :]
    d2 = dx**2 + dy**2
    bg_x = (qw * dx / d2).sum(axis=1) / cell.area
    bg_y = (qw * dy / d2).sum(axis=1) / cell.area
    r2 = points[:, 0] ** 2 + points[:, 1] ** 2
    ex = points[:, 0] / r2 - bg_x
    ey = points[:, 1] / r2 - bg_y
    return np.column_stack([ex, ey])


def multipole_field(report: MultipoleReport, points: np.ndarray) -> np.ndarray:
    """Gradient of the truncated multipole potential (for cross-checks)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    z = points[:, 0] + 1j * points[:, 1]
    deriv = report.q / z
    m = report.C + 1j * report.S
    for k in range(1, len(report.C) + 1):
        deriv = deriv + k * m[k - 1] * z ** (-k - 1)
    e = np.conj(deriv)
    return np.column_stack([e.real, e.imag])


def _fit_decay_exponent(cell: CellCharge, radii=(3.0, 10.0), n_radii: int = 8,
                        n_angles: int = 16) -> float:
    rr = np.geomspace(radii[0], radii[1], n_radii)
    ang = np.linspace(0.0, 2.0 * math.pi, n_angles, endpoint=False) + 0.1234
    mags = []
    for r in rr:
        pts = np.column_stack([r * np.cos(ang), r * np.sin(ang)])
        e = cell_field(cell, pts)
        mags.append(math.sqrt(float(np.mean(np.sum(e**2, axis=1)))))
    fit = linregress(np.log(rr), np.log(mags))
    return float(fit.slope)


def point_charge_field(points: np.ndarray) -> np.ndarray:
    """Bare 2D Coulomb field x/|x|^2 of the unit point charge alone."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    r2 = points[:, 0] ** 2 + points[:, 1] ** 2
    return points / r2[:, None]


@dataclass
class KineticBoundReport:
    lhs: float
    rhs: float
    ratio: float
    log_term: float
    slack: float
    identity_residual: float


def vortex_kinetic_bound(
    params: Params,
    lattice: VortexLattice,
    tf: TFSolution,
    *,
    grid: Grid | None = None,
    slack: float = 0.5,
) -> KineticBoundReport:
    """Quadrature of the lattice phase kinetic energy against its bound.

    lhs = integral of xi^2 * rho_TF * |grad(phase) - A|^2 over the disc,
    evaluated from the analytic phase gradient sum_i (z - z_i)^perp/|z - z_i|^2
    (no finite differences), with the cutoff xi of the trial state.
    rhs = (Omega/2)|log(t^2 Omega)| + slack * Omega.

    The conjugate-field identity |grad(phase) - A e_theta| =
    |grad(log-potential) - A e_r| is verified pointwise on a subsample and its
    worst relative deviation is reported.
    """
    if grid is None:
        grid = make_grid(512)
    t = lattice.core_radius
    pts = lattice.points
    X, Y = grid.X, grid.Y
    vx = np.zeros_like(X)
    vy = np.zeros_like(Y)
    # conjugate (radial) field, for the identity check
    ux = np.zeros_like(X)
    uy = np.zeros_like(Y)
    for start in range(0, len(pts), 64):
        chunk = pts[start:start + 64]
        dx = X[..., None] - chunk[:, 0]
        dy = Y[..., None] - chunk[:, 1]
        d2 = np.maximum(dx**2 + dy**2, 1e-30)
        vx += (-dy / d2).sum(axis=-1)
        vy += (dx / d2).sum(axis=-1)
        ux += (dx / d2).sum(axis=-1)
        uy += (dy / d2).sum(axis=-1)
    vx -= -0.5 * params.Omega * Y
    vy -= 0.5 * params.Omega * X
    # A(r) e_r has components (Omega/2) * (x, y): the radial magnitudes cancel.
    ux -= 0.5 * params.Omega * X
    uy -= 0.5 * params.Omega * Y
    r = grid.R

    dist, _ = cKDTree(pts).query(np.column_stack([X.ravel(), Y.ravel()]))
    dist = dist.reshape(grid.n, grid.n)
    xi2 = np.minimum(dist / t, 1.0) ** 2
    rho = np.where(grid.mask, tf.density(r), 0.0)
    integrand = xi2 * rho * (vx**2 + vy**2)
    integrand[dist <= 1e-12] = 0.0
    lhs = grid.integrate(integrand)

    sample = grid.mask & (dist > t)
    sample_idx = np.flatnonzero(sample.ravel())[::37]
    f1 = (vx**2 + vy**2).ravel()[sample_idx]
    f2 = (ux**2 + uy**2).ravel()[sample_idx]
    identity_residual = float(np.max(np.abs(f1 - f2) / np.maximum(f1, 1e-30)))
    if identity_residual > 1e-9:
        raise AssertionError(
            f"conjugate-field identity violated: residual {identity_residual:.3e}"
        )

    log_term = abs(math.log(t**2 * params.Omega))
    rhs = 0.5 * params.Omega * log_term + slack * params.Omega
    ratio = lhs / (0.5 * params.Omega * log_term)
    return KineticBoundReport(lhs=lhs, rhs=rhs, ratio=ratio, log_term=log_term,
                              slack=slack, identity_residual=identity_residual)


def _cell_vertices_for_lattice(kind: LatticeKind, Omega: float):
    """Cell polygons of the lattice tiling, per point (two orientations for
    the honeycomb, whose cells are alternating triangles)."""
    cell_area = 2.0 * math.pi / Omega
    if kind is LatticeKind.SQUARE:
        a = math.sqrt(cell_area) / 2.0
        sq = np.array([[a, a], [-a, a], [-a, -a], [a, -a]])
        return [sq], None
    if kind is LatticeKind.TRIANGULAR:
        # Voronoi cell of the triangular lattice: regular hexagon.
        ell = math.sqrt(2.0 * cell_area / math.sqrt(3.0))
        rc = ell / math.sqrt(3.0)
        ang = np.deg2rad(np.arange(6) * 60.0 + 30.0)
        hexagon = rc * np.column_stack([np.cos(ang), np.sin(ang)])
        return [hexagon], None
    if kind is LatticeKind.HEXAGONAL:
        # Honeycomb cells are the equilateral triangles of the dual tiling,
        # circumradius s, in two orientations (one per sublattice).
        s = math.sqrt(4.0 * cell_area / (3.0 * math.sqrt(3.0)))
        tri_a = s * np.column_stack([np.cos(np.deg2rad([60, 180, 300])),
                                     np.sin(np.deg2rad([60, 180, 300]))])
        tri_b = -tri_a
        return [tri_a, tri_b], s
    raise ValueError(f"unknown kind {kind!r}")


@dataclass
class RiemannGapReport:
    gap: float
    cell_area: float
    n_cells: int
    sum_value: float


def riemann_gap(tf: TFSolution, Omega: float, kind: LatticeKind) -> RiemannGapReport:
    """Excess of the per-cell sup Riemann sum of rho_TF over its integral.

    Uses that rho_TF is radially nondecreasing: the sup over a convex cell is
    attained at the vertex of largest radius (clamped to the disc).
    """
    if Omega < 20.0:
        raise ValueError("need Omega >= 20 so the cells tile the support")
    pts, _nn = lattice_points(Omega, kind)
    cell_area = 2.0 * math.pi / Omega
    shapes, s = _cell_vertices_for_lattice(kind, Omega)
    if kind is LatticeKind.HEXAGONAL:
        # Sublattice membership from integer coordinates in the Bravais basis
        # decides the triangle orientation.
        basis = np.array([[1.5 * s, 0.5 * math.sqrt(3.0) * s],
                          [1.5 * s, -0.5 * math.sqrt(3.0) * s]]).T
        coeffs = np.linalg.solve(basis, pts.T).T
        on_bravais = np.all(np.abs(coeffs - np.rint(coeffs)) < 1e-9, axis=1)
        orientations = np.where(on_bravais, 0, 1)
    else:
        orientations = np.zeros(len(pts), dtype=int)
    total = 0.0
    for i, p in enumerate(pts):
        verts = shapes[orientations[i]]
        corner_r = np.hypot(p[0] + verts[:, 0], p[1] + verts[:, 1]).max()
        total += float(tf.density(min(corner_r, 1.0)))
    gap = cell_area * total - 1.0
    return RiemannGapReport(gap=gap, cell_area=cell_area, n_cells=len(pts),
                            sum_value=cell_area * total)
