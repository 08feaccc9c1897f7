"""Numerical laboratory for vortex lattices in fast rotating Bose-Einstein
condensates confined to the unit disc."""

from .params import Params, Regime, RegimeReport, classify, derive
from .tf import OMEGA_HOLE, TFSolution, regularized_density, solve_tf, tf_energy_unscaled
from .field import (
    ComplexField,
    EnergyBreakdown,
    Grid,
    gp_energy,
    gp_residual,
    load_field,
    make_grid,
    save_field,
    uniform_field,
)
from .trial import (
    LatticeKind,
    TrialState,
    VortexLattice,
    assemble_trial,
    build_lattice,
    core_radius,
    cutoff,
    giant_vortex_trial,
    phase_factor,
)
from .gp import (
    InitKind,
    MinimizeOptions,
    MinimizeReport,
    NonConvergenceError,
    check_sup_bound,
    l2_distance_to_tf,
    minimize,
)
from .vortex import (
    Annulus,
    Box,
    VortexSet,
    extract_vortices,
    good_bad_cells,
    vorticity_measure,
    winding_field,
)
from .electro import (
    CellCharge,
    MultipoleReport,
    cell_field,
    multipole_moments,
    riemann_gap,
    vortex_kinetic_bound,
)
from .sweep import SweepSpec, SweepRow, locate_crossover, run_sweep, scaling_path

__version__ = "0.1.0"
