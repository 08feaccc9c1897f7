"""Command-line surface: tf, trial, minimize, vortices, electro, sweep, crossover.

Outputs are plot-ready CSV (comma separator, dot decimal) or JSON; complex
fields travel as GPF1 snapshots.  The sweep subcommand reads a flat
key-value config file with [grid], [minimizer] and [sweep] sections; every
key can be overridden by the command-line flag of the same name.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import electro as electro_mod
from . import gp as gp_mod
from . import sweep as sweep_mod
from . import tf as tf_mod
from .field import gp_energy, load_field, make_grid, save_field
from .params import classify, derive
from .trial import LatticeKind, assemble_trial, giant_vortex_trial
from .vortex import Annulus, Box, extract_vortices, vorticity_measure

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CROSSING = 2
EXIT_NONCONVERGED = 3


def _kind(name: str) -> LatticeKind:
    return LatticeKind(name.lower())


def _emit(record: dict, fmt: str, out):
    if fmt == "json":
        json.dump(record, out, indent=2, default=float)
        out.write("\n")
    else:
        writer = csv.writer(out)
        writer.writerow(record.keys())
        writer.writerow(record.values())


def cmd_tf(args, out) -> int:
    params = derive(args.epsilon, args.Omega)
    sol = tf_mod.solve_tf(params.omega)
    radii = np.linspace(0.0, 1.0, 512)
    density = sol.density(radii)
    scalars = {
        "omega": sol.omega,
        "scaled_energy": sol.scaled_energy,
        "unscaled_energy": tf_mod.tf_energy_unscaled(params),
        "scaled_mu": sol.scaled_chemical_potential,
        "hole_radius": sol.hole_radius,
    }
    if args.format == "json":
        record = dict(scalars)
        record["density_at"] = {"r": radii.tolist(), "rho": density.tolist()}
        json.dump(record, out, indent=2)
        out.write("\n")
    else:
        writer = csv.writer(out)
        writer.writerow(list(scalars) + ["r", "density"])
        for r, rho in zip(radii, density):
            writer.writerow(list(scalars.values()) + [r, rho])
    return EXIT_OK


def cmd_trial(args, out) -> int:
    params = derive(args.epsilon, args.Omega)
    grid = make_grid(args.n)
    if args.giant:
        state = giant_vortex_trial(params, args.winding, grid=grid)
        lattice_info = {"t": math.nan, "ell": math.nan, "N": 0, "N_support": 0}
    else:
        state = assemble_trial(
            params, _kind(args.kind), grid=grid,
            prune_hole_vortices=args.prune_hole_vortices,
        )
        lat = state.lattice
        lattice_info = {"t": lat.core_radius, "ell": lat.ell,
                        "N": lat.n_points, "N_support": lat.n_support}
    breakdown = gp_energy(state.psi, params)
    record = {
        "epsilon": params.epsilon,
        "Omega": params.Omega,
        "kind": "giant" if args.giant else args.kind,
        "kinetic": breakdown.kinetic,
        "centrifugal": breakdown.centrifugal,
        "interaction": breakdown.interaction,
        "total": breakdown.total,
        "c": state.c,
        **lattice_info,
    }
    if args.dump_field:
        save_field(state.psi, args.dump_field)
    _emit(record, args.format, out)
    return EXIT_OK


def cmd_minimize(args, out) -> int:
    params = derive(args.epsilon, args.Omega)
    grid = make_grid(args.n)
    opts = gp_mod.MinimizeOptions(
        max_iters=args.max_iters,
        step=args.step,
        tol_residual=args.tol,
        init=gp_mod.InitKind(args.init),
        seed=args.seed,
        init_path=args.init_file,
        lattice_kind=_kind(args.kind),
    )
    code = EXIT_OK
    try:
        report = gp_mod.minimize(params, grid, opts)
    except gp_mod.NonConvergenceError as err:
        report = err.report
        code = EXIT_NONCONVERGED
    record = {
        "epsilon": params.epsilon,
        "Omega": params.Omega,
        "converged": report.converged,
        "iters": report.iters,
        "kinetic": report.breakdown.kinetic,
        "centrifugal": report.breakdown.centrifugal,
        "interaction": report.breakdown.interaction,
        "total": report.breakdown.total,
        "mu": report.mu,
        "residual_norm": report.residual_norm,
        "sup_density": report.sup_density,
        "seed": report.seed,
    }
    if args.dump_field:
        save_field(report.psi, args.dump_field)
    if args.history:
        with open(args.history, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "energy"])
            writer.writerows(enumerate(report.energy_history))
    _emit(record, args.format, out)
    return code


def _parse_region(text: str):
    parts = text.split(":")
    if parts[0] == "annulus" and len(parts) == 3:
        return Annulus(float(parts[1]), float(parts[2]))
    if parts[0] == "box" and len(parts) == 5:
        return Box(*(float(p) for p in parts[1:]))
    raise argparse.ArgumentTypeError(
        f"bad region {text!r}: expected annulus:R1:R2 or box:X0:X1:Y0:Y1"
    )


def cmd_vortices(args, out) -> int:
    params = derive(args.epsilon, args.Omega)
    psi = load_field(args.field)
    vs = extract_vortices(psi, args.threshold, Omega=params.Omega)
    writer = csv.writer(out)
    writer.writerow(["x", "y", "degree"])
    for v in vs.entries:
        writer.writerow([v.position[0], v.position[1], v.degree])
    if args.region is not None:
        sol = tf_mod.solve_tf(params.omega)
        report = vorticity_measure(vs, params, sol, args.region)
        json.dump({
            "region": report.region,
            "measure_value": report.measure_value,
            "reference_value": report.reference_value,
            "ratio": report.ratio,
            "degree_sum": report.degree_sum,
            "n_vortices": report.n_vortices,
        }, out if args.measure_out is None else open(args.measure_out, "w"), indent=2)
        out.write("\n")
    return EXIT_OK


def cmd_electro(args, out) -> int:
    if args.mode == "bound":
        if args.epsilon is None or args.Omega is None:
            raise SystemExit("electro bound requires --epsilon and --Omega")
        params = derive(args.epsilon, args.Omega)
        from .trial import build_lattice

        lattice = build_lattice(params, _kind(args.cell))
        sol = tf_mod.solve_tf(params.omega)
        grid = make_grid(args.n)
        report = electro_mod.vortex_kinetic_bound(params, lattice, sol, grid=grid)
        json.dump({"lhs": report.lhs, "rhs": report.rhs, "ratio": report.ratio,
                   "log_term": report.log_term}, out, indent=2)
        out.write("\n")
        return EXIT_OK
    cell = electro_mod.CellCharge(shape=_kind(args.cell), area=args.area)
    report = electro_mod.multipole_moments(cell, args.K)
    json.dump({
        "cell": args.cell,
        "area": report.area,
        "q": report.q,
        "C": report.C.tolist(),
        "S": report.S.tolist(),
        "decay_exponent": report.decay_exponent,
        "first_surviving_order": report.first_surviving_order(),
    }, out, indent=2)
    out.write("\n")
    return EXIT_OK


def _load_config(path: str | None) -> dict:
    merged: dict = {}
    if path is None:
        return merged
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise SystemExit(f"config file {path!r} not found")
    for section in ("grid", "minimizer", "sweep"):
        if parser.has_section(section):
            merged.update(dict(parser.items(section)))
    return merged


def _parse_pairs(text: str) -> list[tuple[float, float]]:
    pairs = []
    for item in text.split(","):
        eps, om = item.split(":")
        pairs.append((float(eps), float(om)))
    return pairs


def cmd_sweep(args, out) -> int:
    cfg = _load_config(args.config)

    def pick(flag_value, key, cast, default):
        if flag_value is not None:
            return flag_value
        if key in cfg:
            return cast(cfg[key])
        return default

    pairs_text = pick(args.pairs, "pairs", str, None)
    path_text = pick(args.path, "path", str, None)
    if pairs_text is None and path_text is None:
        raise SystemExit("sweep needs --pairs or --path (flag or config)")
    if path_text is not None:
        eps0, om0, steps = path_text.split(":")
        pairs = sweep_mod.scaling_path(float(eps0), float(om0), int(steps))
    else:
        pairs = _parse_pairs(pairs_text)

    opts = gp_mod.MinimizeOptions(
        init=gp_mod.InitKind(pick(args.init, "init", str, "trial")),
        tol_residual=pick(args.tol, "tol", float, 3e-4),
        max_iters=pick(args.max_iters, "max_iters", int, 200_000),
        seed=pick(args.seed, "seed", int, 0),
    )
    spec = sweep_mod.SweepSpec(
        pairs=pairs,
        n=pick(args.n, "n", int, 256),
        minimizer=opts,
        outdir=pick(args.outdir, "outdir", str, "sweep_out"),
        seed=opts.seed,
        run_minimizer=not args.no_minimizer,
        dump_fields=args.dump_fields,
        workers=pick(args.workers, "workers", int, 1),
    )
    rows = sweep_mod.run_sweep(spec)
    for row in rows:
        out.write(f"{row.epsilon}\t{row.Omega}\t{row.status}\tE_GP={row.E_GP}\n")
    out.write(f"wrote {Path(spec.outdir) / 'sweep.csv'}\n")
    return EXIT_OK


def cmd_crossover(args, out) -> int:
    try:
        result = sweep_mod.locate_crossover(
            args.epsilon, (args.omega_lo, args.omega_hi),
            n=args.n, kind=_kind(args.kind),
        )
    except sweep_mod.NoCrossingError as err:
        json.dump({"error": "NO_CROSSING", "detail": str(err)}, out, indent=2)
        out.write("\n")
        return EXIT_NO_CROSSING
    json.dump({
        "epsilon": result.epsilon,
        "Omega_star": result.Omega_star,
        "predicted": result.predicted,
        "ratio_to_predicted": result.ratio_to_predicted,
    }, out, indent=2)
    out.write("\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beclab",
        description="Vortex lattices in fast rotating condensates: TF closed forms, "
                    "trial states, GP minimization, vorticity and electrostatics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tf", help="Thomas-Fermi closed forms")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--Omega", type=float, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.set_defaults(func=cmd_tf)

    p = sub.add_parser("trial", help="lattice or giant-vortex trial state energy")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--Omega", type=float, required=True)
    p.add_argument("--kind", choices=["square", "triangular", "hexagonal"], default="square")
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--giant", action="store_true")
    p.add_argument("--winding", type=int, default=None)
    p.add_argument("--prune-hole-vortices", action="store_true")
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.add_argument("--dump-field", default=None)
    p.set_defaults(func=cmd_trial)

    p = sub.add_parser("minimize", help="normalized gradient-flow ground state")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--Omega", type=float, required=True)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--init", choices=[k.value for k in gp_mod.InitKind], default="uniform")
    p.add_argument("--kind", choices=["square", "triangular", "hexagonal"], default="square",
                   help="lattice kind for init=trial")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init-file", default=None)
    p.add_argument("--max-iters", type=int, default=200_000)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--dump-field", default=None)
    p.add_argument("--history", default=None)
    p.add_argument("--format", choices=["csv", "json"], default="json")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("vortices", help="winding-number extraction from a snapshot")
    p.add_argument("--field", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--Omega", type=float, required=True)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--region", type=_parse_region, default=None)
    p.add_argument("--measure-out", default=None)
    p.set_defaults(func=cmd_vortices)

    p = sub.add_parser("electro", help="multipole moments / vortex kinetic bound")
    p.add_argument("mode", nargs="?", choices=["moments", "bound"], default="moments")
    p.add_argument("--cell", choices=["square", "triangular", "hexagonal"], default="square")
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--area", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--Omega", type=float, default=None)
    p.add_argument("--n", type=int, default=256)
    p.set_defaults(func=cmd_electro)

    p = sub.add_parser("sweep", help="run (epsilon, Omega) pairs and persist CSV")
    p.add_argument("--config", default=None)
    p.add_argument("--pairs", default=None, help="e.g. 0.08:40,0.05:60")
    p.add_argument("--path", default=None, help="eps0:Omega0:steps scaling path")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--init", default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--outdir", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-minimizer", action="store_true")
    p.add_argument("--dump-fields", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("crossover", help="lattice/giant-vortex trial-energy crossing")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--omega-lo", type=float, required=True)
    p.add_argument("--omega-hi", type=float, required=True)
    p.add_argument("--n", type=int, default=192)
    p.add_argument("--kind", choices=["square", "triangular", "hexagonal"], default="square")
    p.set_defaults(func=cmd_crossover)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, sys.stdout)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
