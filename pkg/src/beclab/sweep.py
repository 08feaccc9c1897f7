"""Parameter sweeps, the asymptotic-ratio study, and the crossover locator.

A sweep runs (epsilon, Omega) pairs through the TF closed forms, trial
states and the minimizer, and persists one CSV row per pair with a fixed,
versioned column order.  Per-row failures are recorded in the status column;
the sweep keeps going.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import tf as tf_mod
from .field import Grid, make_grid, save_field
from .gp import InitKind, MinimizeOptions, MinimizeReport, NonConvergenceError, minimize
from .params import Params, classify, derive
from .trial import LatticeKind, assemble_trial, giant_vortex_trial
from .vortex import extract_vortices

SCHEMA = "beclab.sweep.v1"

CSV_COLUMNS = [
    "epsilon", "Omega", "omega", "delta", "gamma", "regime",
    "E_TF", "E_trial_square", "E_trial_triangular", "E_trial_hexagonal",
    "E_GP", "kinetic", "centrifugal", "interaction",
    "n_vortices", "subleading_ratio_gp", "subleading_ratio_trial",
    "sup_ratio", "runtime_s", "seed", "status",
]


def scaling_path(eps0: float, Omega0: float, steps: int) -> list[tuple[float, float]]:
    """The paper-style path epsilon -> epsilon/2, Omega -> 2*Omega."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return [(eps0 / 2**k, Omega0 * 2**k) for k in range(steps)]


@dataclass
class SweepSpec:
    pairs: list[tuple[float, float]]
    n: int = 256
    kinds: tuple[LatticeKind, ...] = (LatticeKind.SQUARE,)
    minimizer: MinimizeOptions = dc_field(default_factory=lambda: MinimizeOptions(
        init=InitKind.TRIAL_LATTICE, tol_residual=3e-4))
    outdir: str | Path | None = None
    seed: int = 0
    run_minimizer: bool = True
    dump_fields: bool = False
    workers: int = 1


@dataclass
class SweepRow:
    epsilon: float
    Omega: float
    status: str
    params: Params | None = None
    regime: str = ""
    E_TF: float = math.nan
    E_trial: dict = dc_field(default_factory=dict)
    E_GP: float = math.nan
    kinetic: float = math.nan
    centrifugal: float = math.nan
    interaction: float = math.nan
    n_vortices: int | None = None
    subleading_ratio_gp: float = math.nan
    subleading_ratio_trial: float = math.nan
    sup_ratio: float = math.nan
    runtime_s: float = math.nan
    seed: int = 0

    def csv_record(self) -> dict:
        def fmt(x):
            if x is None or (isinstance(x, float) and math.isnan(x)):
                return "NA"
            return repr(x) if isinstance(x, float) else str(x)

        p = self.params
        rec = {
            "epsilon": fmt(self.epsilon),
            "Omega": fmt(self.Omega),
            "omega": fmt(p.omega) if p else "NA",
            "delta": fmt(p.delta) if p else "NA",
            "gamma": fmt(p.gamma) if p else "NA",
            "regime": self.regime or "NA",
            "E_TF": fmt(self.E_TF),
            "E_trial_square": fmt(self.E_trial.get(LatticeKind.SQUARE)),
            "E_trial_triangular": fmt(self.E_trial.get(LatticeKind.TRIANGULAR)),
            "E_trial_hexagonal": fmt(self.E_trial.get(LatticeKind.HEXAGONAL)),
            "E_GP": fmt(self.E_GP),
            "kinetic": fmt(self.kinetic),
            "centrifugal": fmt(self.centrifugal),
            "interaction": fmt(self.interaction),
            "n_vortices": fmt(self.n_vortices),
            "subleading_ratio_gp": fmt(self.subleading_ratio_gp),
            "subleading_ratio_trial": fmt(self.subleading_ratio_trial),
            "sup_ratio": fmt(self.sup_ratio),
            "runtime_s": fmt(round(self.runtime_s, 3) if not math.isnan(self.runtime_s) else self.runtime_s),
            "seed": str(self.seed),
            "status": self.status,
        }
        return rec


def _subleading_ratio(energy: float, e_tf: float, params: Params) -> float:
    if params.Omega <= 0 or params.gamma <= 0 or params.gamma >= 1:
        return math.nan
    denom = 0.5 * params.Omega * abs(math.log(params.gamma))
    return (energy - e_tf) / denom


def _run_pair(pair: tuple[float, float], spec: SweepSpec, grid: Grid) -> SweepRow:
    eps, Om = pair
    row = SweepRow(epsilon=eps, Omega=Om, status="OK", seed=spec.seed)
    start = time.perf_counter()
    try:
        params = derive(eps, Om)
    except ValueError:
        row.status = "REJECTED"
        return row
    row.params = params
    row.regime = classify(params).tag.value
    tf = tf_mod.solve_tf(params.omega)
    row.E_TF = tf_mod.tf_energy_unscaled(params)
    try:
        for kind in spec.kinds:
            if params.Omega >= 20.0:
                trial = assemble_trial(params, kind, grid=grid)
                from .field import gp_energy

                row.E_trial[kind] = gp_energy(trial.psi, params).total
        if spec.run_minimizer:
            opts = spec.minimizer
            if params.Omega < 20.0 and opts.init is InitKind.TRIAL_LATTICE:
                from dataclasses import replace

                opts = replace(opts, init=InitKind.UNIFORM)
            try:
                report = minimize(params, grid, opts)
            except NonConvergenceError as err:
                report = err.report
                row.status = "NONCONVERGED"
            row.E_GP = report.breakdown.total
            row.kinetic = report.breakdown.kinetic
            row.centrifugal = report.breakdown.centrifugal
            row.interaction = report.breakdown.interaction
            row.sup_ratio = report.sup_density / float(tf.density(1.0))
            row.subleading_ratio_gp = _subleading_ratio(row.E_GP, row.E_TF, params)
            vs = extract_vortices(report.psi, Omega=params.Omega)
            row.n_vortices = len(vs.entries)
            if spec.dump_fields and spec.outdir is not None:
                save_field(report.psi, Path(spec.outdir) / f"field_{eps}_{Om}.gpf")
        if LatticeKind.SQUARE in row.E_trial:
            row.subleading_ratio_trial = _subleading_ratio(
                row.E_trial[LatticeKind.SQUARE], row.E_TF, params
            )
    except Exception as exc:  # per-row failures are data
        row.status = f"FAILED:{type(exc).__name__}"
    row.runtime_s = time.perf_counter() - start
    return row


def max_workers(requested: int) -> int:
    cap = os.environ.get("BECLAB_THREADS")
    if cap:
        return max(1, min(requested, int(cap)))
    return max(1, requested)


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """Execute every pair (optionally in parallel worker slots) and persist."""
    grid = make_grid(spec.n)
    workers = max_workers(spec.workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: _run_pair(p, spec, grid), spec.pairs))
    else:
        rows = [_run_pair(p, spec, grid) for p in spec.pairs]
    if spec.outdir is not None:
        outdir = Path(spec.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        write_rows(rows, outdir / "sweep.csv")
    return rows


def write_rows(rows: list[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema={SCHEMA}\n")
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row.csv_record())


class NoCrossingError(RuntimeError):
    pass


@dataclass
class CrossoverResult:
    Omega_star: float
    predicted: float
    epsilon: float
    evaluations: list[tuple[float, float]]

    @property
    def ratio_to_predicted(self) -> float:
        return self.Omega_star / self.predicted


def locate_crossover(
    epsilon: float,
    Omega_range: tuple[float, float],
    *,
    n: int = 192,
    kind: LatticeKind = LatticeKind.SQUARE,
    rel_tol: float = 0.02,
    grid: Grid | None = None,
) -> CrossoverResult:
    """Bisect for the rotation rate where the giant-vortex trial state first
    beats the lattice trial state in energy.

    Raises NoCrossingError when the energy difference has the same sign on
    both ends of the range.
    """
    from .field import gp_energy

    if grid is None:
        grid = make_grid(n)
    evals: list[tuple[float, float]] = []

    def diff(Om: float) -> float:
        params = derive(epsilon, Om)
        lattice = gp_energy(assemble_trial(params, kind, grid=grid).psi, params).total
        giant = gp_energy(giant_vortex_trial(params, grid=grid).psi, params).total
        d = lattice - giant
        evals.append((Om, d))
        return d

    lo, hi = Omega_range
    if lo >= hi:
        raise ValueError("Omega_range must be increasing")
    f_lo, f_hi = diff(lo), diff(hi)
    if f_lo == 0.0:
        f_lo = -1e-300
    if f_hi == 0.0:
        f_hi = 1e-300
    if (f_lo < 0) == (f_hi < 0):
        raise NoCrossingError(
            f"trial-energy difference keeps its sign on [{lo}, {hi}] "
            f"({f_lo:+.4g} and {f_hi:+.4g})"
        )
    while hi / lo > 1.0 + rel_tol:
        mid = math.sqrt(lo * hi)
        f_mid = diff(mid)
        if (f_mid < 0) == (f_lo < 0):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    predicted = 1.0 / (epsilon**2 * abs(math.log(epsilon)))
    return CrossoverResult(
        Omega_star=math.sqrt(lo * hi),
        predicted=predicted,
        epsilon=epsilon,
        evaluations=evals,
    )
