"""Unit-disc grid, quadrature weights, covariant derivatives and the GP energy.

The disc is discretized on a Cartesian n x n grid over [-1, 1]^2.  Each node
owns the square cell of side h around it; the quadrature weight is the exact
area of the cell clipped by the unit circle, so the weights sum to the disc
area up to the few boundary slivers folded into their neighbors.  Gradients
use centered differences in the interior and one-sided differences where a
neighbor is missing; the zero covariant radial derivative at the rim is the
natural boundary condition of minimizing the discrete energy (the vector
potential is purely azimuthal, so no extra boundary term is needed).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .geometry import cell_disc_area
from .params import Params

# Cells covering less than this fraction of h^2 are not degrees of freedom;
# their area is folded into adjacent cells to keep the total area exact.
_MIN_CELL_FRACTION = 0.25

GPF_MAGIC = b"GPF1"
GPF_VERSION = 1


class GridError(ValueError):
    pass


class NormalizationError(ValueError):
    pass


class SnapshotFormatError(ValueError):
    pass


@dataclass
class Grid:
    """Masked Cartesian grid on [-1, 1]^2 covering the unit disc.

    ``values[iy, ix]`` conventions apply to every field on this grid: the
    first index runs along y, the second along x.  ``weights`` vanish off the
    mask; ``boundary`` flags masked nodes missing at least one of their four
    neighbors (these use one-sided difference stencils).
    """

    n: int
    h: float
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    X: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    boundary: np.ndarray = field(repr=False)

    def __post_init__(self):
        self._ops: tuple | None = None

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))

    def difference_operators(self):
        """Sparse (Dx, Dy, DxT, DyT) acting on flattened (n*n,) vectors."""
        if self._ops is None:
            dx, dy = _difference_operators(self.mask, self.h)
            self._ops = (dx, dy, dx.T.tocsr(), dy.T.tocsr())
        return self._ops

    def masked_points(self) -> np.ndarray:
        """(M, 2) array of (x, y) coordinates of masked nodes."""
        return np.column_stack([self.X[self.mask], self.Y[self.mask]])


def make_grid(n: int) -> Grid:
    """Build the masked grid with exact clipped-cell quadrature weights.

    n < 64 is rejected: coarser grids under-resolve the one-sided boundary
    stencils.
    """
    if n < 64:
        raise GridError(f"grid must have n >= 64 points per side, got {n}")
    n = int(n)
    h = 2.0 / (n - 1)
    # (k - (n-1)/2) * h is bitwise antisymmetric under k -> n-1-k, which makes
    # the mask and weights exactly symmetric under the dihedral group.
    xs = (np.arange(n) - (n - 1) / 2.0) * h
    ys = xs.copy()
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    R = np.hypot(X, Y)

    half = h / 2.0
    ax, ay = np.abs(X), np.abs(Y)
    far = np.hypot(ax + half, ay + half)
    near = np.hypot(np.maximum(ax - half, 0.0), np.maximum(ay - half, 0.0))
    areas = np.zeros((n, n))
    areas[far <= 1.0] = h * h
    ring = (far > 1.0) & (near < 1.0)
    for iy, ix in np.argwhere(ring):
        areas[iy, ix] = cell_disc_area(X[iy, ix], Y[iy, ix], half)

    mask = areas >= _MIN_CELL_FRACTION * h * h
    weights = np.where(mask, areas, 0.0)
    # Fold sliver-cell areas into their masked 8-neighbors, proportionally to
    # the neighbor areas, so the weights still sum to the disc area.
    for iy, ix in np.argwhere((areas > 0.0) & ~mask):
        y0, y1 = max(iy - 1, 0), min(iy + 2, n)
        x0, x1 = max(ix - 1, 0), min(ix + 2, n)
        nbr_mask = mask[y0:y1, x0:x1]
        nbr_area = areas[y0:y1, x0:x1] * nbr_mask
        total = nbr_area.sum()
        if total > 0.0:
            weights[y0:y1, x0:x1] += areas[iy, ix] * nbr_area / total

    padded = np.zeros((n + 2, n + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    four_nbrs = (
        padded[:-2, 1:-1].astype(np.int8)
        + padded[2:, 1:-1]
        + padded[1:-1, :-2]
        + padded[1:-1, 2:]
    )
    boundary = mask & (four_nbrs < 4)

    return Grid(n=n, h=h, xs=xs, ys=ys, X=X, Y=Y, R=R, mask=mask,
                weights=weights, boundary=boundary)


def _difference_operators(mask: np.ndarray, h: float):
    """First-derivative matrices on a masked grid.

    Centered where both neighbors are masked, one-sided where only one is,
    zero where none.  Rows for unmasked nodes are empty.
    """
    n = mask.shape[0]
    idx = np.arange(n * n).reshape(n, n)

    def build(axis: int):
        fwd = np.zeros_like(mask)
        bwd = np.zeros_like(mask)
        if axis == 1:
            fwd[:, :-1] = mask[:, :-1] & mask[:, 1:]
            bwd[:, 1:] = mask[:, 1:] & mask[:, :-1]
            nbr_f = np.roll(idx, -1, axis=1)
            nbr_b = np.roll(idx, 1, axis=1)
        else:
            fwd[:-1, :] = mask[:-1, :] & mask[1:, :]
            bwd[1:, :] = mask[1:, :] & mask[:-1, :]
            nbr_f = np.roll(idx, -1, axis=0)
            nbr_b = np.roll(idx, 1, axis=0)

        rows, cols, vals = [], [], []
        centered = fwd & bwd
        rows += [idx[centered], idx[centered]]
        cols += [nbr_f[centered], nbr_b[centered]]
        vals += [np.full(centered.sum(), 0.5 / h), np.full(centered.sum(), -0.5 / h)]
        fonly = fwd & ~bwd
        rows += [idx[fonly], idx[fonly]]
        cols += [nbr_f[fonly], idx[fonly]]
        vals += [np.full(fonly.sum(), 1.0 / h), np.full(fonly.sum(), -1.0 / h)]
        bonly = bwd & ~fwd
        rows += [idx[bonly], idx[bonly]]
        cols += [idx[bonly], nbr_b[bonly]]
        vals += [np.full(bonly.sum(), 1.0 / h), np.full(bonly.sum(), -1.0 / h)]

        mat = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n * n, n * n),
        )
        return mat.tocsr()

    return build(axis=1), build(axis=0)


@dataclass
class ComplexField:
    """Complex order parameter sampled on a grid; zero off the mask."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError("field values must be an (n, n) array")

    def norm2(self) -> float:
        return self.grid.integrate(np.abs(self.values) ** 2)

    def normalized(self) -> "ComplexField":
        nrm = np.sqrt(self.norm2())
        if nrm == 0.0:
            raise NormalizationError("cannot normalize a zero field")
        return ComplexField(self.grid, self.values / nrm)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy())


def uniform_field(grid: Grid) -> ComplexField:
    """Normalized constant field (the zero-rotation ground state profile)."""
    values = np.where(grid.mask, 1.0 / np.sqrt(grid.area), 0.0).astype(np.complex128)
    return ComplexField(grid, values)


def random_field(grid: Grid, seed: int) -> ComplexField:
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    values[~grid.mask] = 0.0
    return ComplexField(grid, values).normalized()


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    centrifugal: float
    interaction: float

    @property
    def total(self) -> float:
        return self.kinetic + self.centrifugal + self.interaction


def vector_potential(grid: Grid, Omega: float) -> tuple[np.ndarray, np.ndarray]:
    """Components of A = (Omega/2) e_z ^ r at the nodes."""
    return -0.5 * Omega * grid.Y, 0.5 * Omega * grid.X


def _covariant_gradient(psi: ComplexField, Omega: float):
    grid = psi.grid
    dx, dy, _, _ = grid.difference_operators()
    ax, ay = vector_potential(grid, Omega)
    v = psi.values
    flat = v.ravel()
    gx = (dx @ flat).reshape(grid.n, grid.n) - 1j * ax * v
    gy = (dy @ flat).reshape(grid.n, grid.n) - 1j * ay * v
    return gx, gy


def _check_normalized(psi: ComplexField, allow_unnormalized: bool):
    if allow_unnormalized:
        return
    nrm = np.sqrt(psi.norm2())
    if abs(nrm - 1.0) > 1e-8:
        raise NormalizationError(
            f"field norm is {nrm:.12g}, expected 1 within 1e-8 "
            "(pass allow_unnormalized=True for diagnostics on raw fields)"
        )


def gp_energy(psi: ComplexField, params: Params, *, allow_unnormalized: bool = False) -> EnergyBreakdown:
    """Discrete GP energy: covariant kinetic, centrifugal and interaction terms."""
    _check_normalized(psi, allow_unnormalized)
    grid = psi.grid
    gx, gy = _covariant_gradient(psi, params.Omega)
    dens = np.abs(psi.values) ** 2
    kinetic = grid.integrate(np.abs(gx) ** 2 + np.abs(gy) ** 2)
    centrifugal = -0.25 * params.Omega**2 * grid.integrate(grid.R**2 * dens)
    interaction = grid.integrate(dens**2) / params.epsilon**2
    return EnergyBreakdown(kinetic=kinetic, centrifugal=centrifugal, interaction=interaction)


def gp_gradient(psi: ComplexField, params: Params) -> np.ndarray:
    """L2 gradient of the discrete energy: (1/w) dE/d(conj psi) on the mask.

    This is the exact derivative of ``gp_energy`` as a function of the node
    values, so stationarity of the descent flow and the chemical-potential
    identity hold to roundoff.
    """
    grid = psi.grid
    dx, dy, dxT, dyT = grid.difference_operators()
    ax, ay = vector_potential(grid, params.Omega)
    v = psi.values
    gx, gy = _covariant_gradient(psi, params.Omega)
    zx = grid.weights * gx
    zy = grid.weights * gy
    grad = (dxT @ zx.ravel() + dyT @ zy.ravel()).reshape(grid.n, grid.n)
    grad = grad + 1j * (ax * zx + ay * zy)
    grad += grid.weights * (-0.25 * params.Omega**2 * grid.R**2) * v
    grad += grid.weights * (2.0 / params.epsilon**2) * np.abs(v) ** 2 * v
    out = np.zeros_like(v)
    out[grid.mask] = grad[grid.mask] / grid.weights[grid.mask]
    return out


@dataclass
class ResidualReport:
    field: ComplexField
    mu: float
    residual_norm: float


def gp_residual(psi: ComplexField, params: Params, *, allow_unnormalized: bool = False) -> ResidualReport:
    """Stationarity residual of the GP equation and the chemical potential.

    mu is the Rayleigh-type quotient <psi, grad E> and satisfies
    mu = E_total + eps^-2 ||psi||_4^4 exactly for the discrete functional.
    """
    _check_normalized(psi, allow_unnormalized)
    grid = psi.grid
    grad = gp_gradient(psi, params)
    mu = float(np.sum(grid.weights * np.conj(psi.values) * grad).real)
    res = grad - mu * psi.values
    res[~grid.mask] = 0.0
    norm = float(np.sqrt(grid.integrate(np.abs(res) ** 2)))
    return ResidualReport(field=ComplexField(grid, res), mu=mu, residual_norm=norm)


def save_field(psi: ComplexField, path: str | Path) -> None:
    """Write a GPF1 snapshot: bit-exact, NaN at masked-out nodes.

    Layout: magic ``GPF1``, little-endian u32 version=1, u32 n, four f64
    domain bounds (xmin, xmax, ymin, ymax), then n*n (re, im) f64 pairs in
    row-major order (rows run along y from ymin, columns along x from xmin).
    """
    grid = psi.grid
    header = GPF_MAGIC + struct.pack("<II", GPF_VERSION, grid.n)
    header += struct.pack("<4d", -1.0, 1.0, -1.0, 1.0)
    data = np.empty((grid.n, grid.n, 2), dtype="<f8")
    data[..., 0] = np.where(grid.mask, psi.values.real, np.nan)
    data[..., 1] = np.where(grid.mask, psi.values.imag, np.nan)
    Path(path).write_bytes(header + data.tobytes(order="C"))


def load_field(path: str | Path, grid: Grid | None = None) -> ComplexField:
    """Read a GPF1 snapshot; rebuilds (or validates) the matching grid."""
    raw = Path(path).read_bytes()
    if len(raw) < 44 or raw[:4] != GPF_MAGIC:
        raise SnapshotFormatError(f"{path}: not a GPF1 snapshot")
    version, n = struct.unpack("<II", raw[4:12])
    if version != GPF_VERSION:
        raise SnapshotFormatError(f"{path}: unsupported GPF version {version}")
    bounds = struct.unpack("<4d", raw[12:44])
    if bounds != (-1.0, 1.0, -1.0, 1.0):
        raise SnapshotFormatError(f"{path}: unexpected domain bounds {bounds}")
    expected = 44 + 16 * n * n
    if len(raw) != expected:
        raise SnapshotFormatError(f"{path}: expected {expected} bytes, got {len(raw)}")
    if grid is None:
        grid = make_grid(n)
    elif grid.n != n:
        raise SnapshotFormatError(f"snapshot has n={n}, grid has n={grid.n}")
    data = np.frombuffer(raw[44:], dtype="<f8").reshape(n, n, 2)
    nan_pattern = np.isnan(data[..., 0]) | np.isnan(data[..., 1])
    if not np.array_equal(nan_pattern, ~grid.mask):
        raise SnapshotFormatError(f"{path}: NaN pattern does not match the disc mask")
    values = np.where(grid.mask, data[..., 0] + 1j * data[..., 1], 0.0)
    return ComplexField(grid, values)
