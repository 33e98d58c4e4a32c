import argparse
import json
import logging
import logging.config
import os
import sys
from typing import Optional, Sequence

import numpy as np
from pydantic import ValidationError

from sepradar.config import Settings, get_settings
from sepradar.estimators.baseline2d import aggregate_surface, default_grids, default_search_box, estimate_2d
from sepradar.estimators.separable import estimate_separable
from sepradar.exceptions import SepRadarError
from sepradar.fusion.geometry import node_parameters
from sepradar.fusion.service import localize, velocity_from_dopplers
from sepradar.harness import storage
from sepradar.harness.report import write_gnuplot_script
from sepradar.harness.sweep import RMSE_COLUMNS, default_batch_sweep, default_doppler_sweep, run_sweep
from sepradar.processing.batching import make_batches
from sepradar.processing.projection import build_basis
from sepradar.schemas import Geometry, LocalizeSpec, SceneConfig, SweepSpec, TargetState
from sepradar.scene.service import build_scene_config, draw_target_delay, synthesize_network, synthesize_node
from sepradar.scene.waveform import generate_waveform

logger = logging.getLogger(__name__)


def configure_logging(settings: Settings) -> None:
    if os.path.exists(settings.log_config):
        logging.config.fileConfig(settings.log_config, disable_existing_loggers=False)
    else:
        logging.basicConfig(level=settings.log_level, format="%(levelname)-5.5s [%(name)s] %(message)s")


def _load(path: Optional[str], model):
    if path is None:
        return None
    with open(path) as f:
        return model.model_validate(json.load(f))


def _dump(payload: dict, path: str) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
    logger.info("Wrote %s", path)


# Commands
def cmd_simulate(args, settings: Settings) -> None:
    cfg = _load(args.config, SceneConfig)
    if cfg is None:
        cfg = build_scene_config(
            n_samples=settings.batch_size * 4,
            dt=settings.dt,
            clutter_order=settings.clutter_order,
            target_delay=draw_target_delay(
                args.seed, settings.clutter_order, settings.dt, settings.sweep_fractional_delay
            ),
            target_doppler=settings.sweep_omega0,
            seed=args.seed,
        )
    elif args.seed is not None:
        cfg = cfg.model_copy(update={"seed": args.seed})

    pre_roll = max(cfg.max_lag, settings.clutter_order)
    waveform = generate_waveform(cfg.n_samples + pre_roll, cfg.seed, cfg.dt, -pre_roll * cfg.dt)
    node = synthesize_node(cfg, waveform, pre_roll)
    storage.write_node(node, args.out)
    _dump(cfg.model_dump(), os.path.join(args.out, "scene.json"))


def cmd_estimate(args, settings: Settings) -> None:
    node = storage.read_node(args.signals or args.out)
    clutter_order = settings.clutter_order if args.clutter_order is None else args.clutter_order
    batches = make_batches(node, args.batches, clutter_order)
    bases = [build_basis(batch) for batch in batches]
    os.makedirs(args.out, exist_ok=True)
    report = {}

    if args.method in ("sep", "both"):
        sep = estimate_separable(batches, bases)
        storage.write_stat_csv(sep.profile, os.path.join(args.out, "profile.csv"))
        report["separable"] = {
            "tau_hat": sep.tau_hat,
            "omega_hat": sep.omega_hat,
            "phase_intercept": sep.line.intercept,
            "flags": [flag.value for flag in sep.flags],
            "bytes": storage.transmission_bytes(sep.profile),
        }

    if args.method in ("2d", "both"):
        est = estimate_2d(batches, bases, default_search_box(batches))
        tau_grid, omega_grid = default_grids(batches)
        surface = aggregate_surface(batches, bases, tau_grid, omega_grid)
        storage.write_stat_csv(surface, os.path.join(args.out, "surface.csv"))
        report["baseline2d"] = {
            "tau_hat": est.tau_hat,
            "omega_hat": est.omega_hat,
            "refine_iterations": est.refine_iterations,
            "flags": [flag.value for flag in est.flags],
            "bytes": storage.transmission_bytes(surface),
        }

    _dump(report, os.path.join(args.out, "estimates.json"))
    print(json.dumps(report, indent=2))


def _sweep(args, spec: SweepSpec, name: str, xlabel: str) -> None:
    outcome = run_sweep(spec, threads=args.threads, progress=True)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"{name}.csv")
    outcome.table.to_csv(csv_path, index=False)
    outcome.trials.to_csv(os.path.join(args.out, f"{name}_trials.csv"), index=False)
    batch_counts = spec.batch_counts if spec.swept_variable == "omega0" else None
    write_gnuplot_script(csv_path, RMSE_COLUMNS, name.replace("_", " "), xlabel=xlabel, batch_counts=batch_counts)
    print(outcome.table.to_string(index=False))


def _sweep_spec(args, default) -> SweepSpec:
    spec = _load(args.config, SweepSpec)
    if spec is None:
        return default(trials=args.trials, master_seed=args.seed)
    update = {}
    if args.trials is not None:
        update["trials"] = args.trials
    if args.seed is not None:
        update["master_seed"] = args.seed
    return SweepSpec.model_validate({**spec.model_dump(), **update})


def cmd_sweep_batches(args, settings: Settings) -> None:
    spec = _sweep_spec(args, default_batch_sweep)
    _sweep(args, spec, "sweep_batches", "number of batches M")


def cmd_sweep_doppler(args, settings: Settings) -> None:
    spec = _sweep_spec(args, default_doppler_sweep)
    _sweep(args, spec, "sweep_doppler", "target Doppler (rad/s)")


def demo_localize_spec(settings: Settings) -> LocalizeSpec:
    """Four nodes around the illuminator, target close enough to sit in every clutter span."""
    return LocalizeSpec(
        geometry=Geometry(
            io_pos=(0.0, 0.0),
            node_pos=[(1000.0, 0.0), (-1000.0, 0.0), (0.0, 1000.0), (0.0, -1000.0)],
            carrier=2 * np.pi * 6e8,
        ),
        target=TargetState(pos=(100.0, 80.0), vel=(-8.0, 6.0)),
        dt=settings.dt,
        clutter_order=settings.clutter_order,
        x_range=(-50.0, 250.0),
        y_range=(-70.0, 230.0),
    )


def cmd_localize(args, settings: Settings) -> None:
    spec = _load(args.config, LocalizeSpec) or demo_localize_spec(settings)
    seed = spec.seed if args.seed is None else args.seed
    geom = spec.geometry

    truths = node_parameters(geom, spec.target)
    cfgs = [
        build_scene_config(
            n_samples=spec.n_samples,
            dt=spec.dt,
            clutter_order=spec.clutter_order,
            target_delay=tau,
            target_doppler=omega,
            seed=seed + k,
            dnr_db=spec.dnr_db,
            cnr_db=spec.cnr_db,
            tnr_db=settings.sweep_tnr_db if spec.tnr_db is None else spec.tnr_db,
        )
        for k, (tau, omega) in enumerate(truths)
    ]
    pre_roll = spec.clutter_order
    waveform = generate_waveform(spec.n_samples + pre_roll, seed, spec.dt, -pre_roll * spec.dt)
    nodes = synthesize_network(cfgs, waveform, pre_roll)

    profiles, omegas = [], []
    for k, node in enumerate(nodes):
        batches = make_batches(node, spec.n_batches, spec.clutter_order)
        bases = [build_basis(batch) for batch in batches]
        est = estimate_separable(batches, bases)
        profiles.append(est.profile)
        omegas.append(est.omega_hat)
        logger.info("Node %d: tau %.4g s (true %.4g), omega %.4g rad/s (true %.4g)",
                    k, est.tau_hat, truths[k][0], est.omega_hat, truths[k][1])

    xs = np.linspace(*spec.x_range, spec.grid_points)
    ys = np.linspace(*spec.y_range, spec.grid_points)
    loc = localize(profiles, geom, (xs, ys))
    vel = velocity_from_dopplers(geom, loc.pos_hat, omegas)

    result = {
        "pos_hat": loc.pos_hat,
        "vel_hat": vel.vel_hat,
        "pos_true": spec.target.pos,
        "vel_true": spec.target.vel,
        "velocity_residual": vel.residual_norm,
    }
    os.makedirs(args.out, exist_ok=True)
    _dump(result, os.path.join(args.out, "localization.json"))
    print(json.dumps(result, indent=2))


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "sweep-batches": cmd_sweep_batches,
    "sweep-doppler": cmd_sweep_doppler,
    "localize": cmd_localize,
}


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file for the command")
    common.add_argument("--seed", type=int, help="Scene or master seed")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per swept value")
    common.add_argument("--out", default=settings.output_dir, help="Output directory")
    common.add_argument("--threads", type=int, default=settings.threads, help="Worker threads for trials")

    parser = argparse.ArgumentParser(
        prog="sepradar",
        description="Delay-Doppler estimation for passive radar: separable vs. 2-D incoherent search",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="Synthesize a scene and write its signal files")

    estimate = sub.add_parser("estimate", parents=[common], help="Estimate delay and Doppler from signal files")
    estimate.add_argument("--method", choices=["2d", "sep", "both"], default="both")
    estimate.add_argument("--batches", type=int, default=4, help="Number of batches M")
    estimate.add_argument("--clutter-order", type=int, help="Clutter order L")
    estimate.add_argument("--signals", help="Directory holding reference.bin and surveillance.bin")

    sub.add_parser("sweep-batches", parents=[common], help="RMSE against the number of batches")
    sub.add_parser("sweep-doppler", parents=[common], help="RMSE against the target Doppler")
    sub.add_parser("localize", parents=[common], help="Multi-node localization demo")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = get_settings()
    configure_logging(settings)
    args = build_parser(settings).parse_args(argv)
    if args.command == "simulate" and args.seed is None and args.config is None:
        args.seed = settings.master_seed

    try:
        COMMANDS[args.command](args, settings)
    except SepRadarError as exc:
        logger.error(exc.detail)
        return exc.exit_code
    except (ValidationError, json.JSONDecodeError) as exc:
        logger.error("Invalid config: %s", exc)
        return 2
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
