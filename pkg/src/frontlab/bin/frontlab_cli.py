"""
frontlab CLI: run one analysis on a model descriptor and write its results.

Usage:
  frontlab decompose --config model.json    Validate H, G (or F) and dump the probe table
  frontlab front     --config model.json    Composite (or --refine) front profile
  frontlab branches  --config model.json    Front branches and the take-off curve
  frontlab fold      --config model.json    gamma_double and the fold level
  frontlab spectrum  --config model.json    Dispersion relation and spectral regime
  frontlab evans     --config model.json    Evans function along a line / winding count
  frontlab oracle    --config model.json    Eigenvalues of the discretized linearization
  frontlab simulate  --config model.json    Time evolution and verdict
  frontlab classify  --config model.json    Destabilization type D or E
  frontlab sweep     --config grid.yaml     Parameter sweep (see frontlab.sweep)

Results go to --output-dir (default FRONTLAB_OUTPUT_DIR or ./frontlab-out) as
CSV tables and JSON reports, with a provenance.json per run.

Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np
from dotenv import load_dotenv

from frontlab import __version__, reports
from frontlab.config import ModelConfig, Settings, load_model_config, load_settings
from frontlab.errors import FrontLabError, PreconditionError
from frontlab.existence import (
    FrontProfile,
    TypeD,
    build_composite_front,
    classify_destabilization_type,
    find_branches,
    find_fold,
    refine_front_bvp,
    regular_front_v_peak,
    takeoff_curve,
)
from frontlab.model import V_FLOOR, validate_reaction_spec
from frontlab.simulation import SimConfig, run_and_classify
from frontlab.spectrum.essential import classify_regime, dispersion_table, stability_verdict
from frontlab.spectrum.evans import LinearizationContext, circle_contour, evans_scan, winding_count
from frontlab.spectrum.oracle import discrete_spectrum_oracle
from frontlab.sweep import load_sweep_grid, run_sweep

logger = logging.getLogger("frontlab.cli")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


# --- shared helpers ---

def _front_level(config: ModelConfig, args: argparse.Namespace) -> float:
    if args.v0 is not None:
        return args.v0
    if not config.params.is_super_slow:
        return regular_front_v_peak(config.params, config.spec)
    branches = find_branches(config.params, config.spec)
    if len(branches) < args.branch:
        raise PreconditionError(f"branch {args.branch} does not exist ({len(branches)} branch(es) at this gamma)")
    return branches[args.branch - 1].v0


def _front(config: ModelConfig, args: argparse.Namespace) -> FrontProfile:
    v0 = _front_level(config, args)
    front = build_composite_front(v0, config.params, config.spec)
    if args.refine:
        front = refine_front_bvp(front, config.params, config.spec)
    return front


def _add_front_options(parser: argparse.ArgumentParser, refine_default: bool) -> None:
    parser.add_argument("--branch", type=int, choices=(1, 2), default=1, help="front branch (super-slow regime)")
    parser.add_argument("--v0", type=float, help="explicit jump level; overrides --branch")
    parser.add_argument(
        "--refine", action=argparse.BooleanOptionalAction, default=refine_default,
        help="refine the composite front by collocation",
    )


# --- commands: (args, config, out) -> one-line summary ---

def cmd_decompose(args, config: ModelConfig, out: Path) -> str:
    report = validate_reaction_spec(config.spec)
    reports.write_table(out / "probes.csv", reports.probe_frame(config.spec))
    reports.write_json(out / "validation.json", {"reaction": config.spec.describe(), **report.to_dict()})
    report.raise_if_failed()
    return f"reaction spec valid (H0={config.spec.H0:.6g}, G1={config.spec.G1:.6g})"


def cmd_front(args, config: ModelConfig, out: Path) -> str:
    front = _front(config, args)
    reports.write_table(out / "profile.csv", reports.profile_frame(front), header=front.metadata())
    reports.write_json(out / "front.json", front.metadata())
    return f"{front.construction.value} front at v0={front.v0:.6g}"


def cmd_branches(args, config: ModelConfig, out: Path) -> str:
    branches = find_branches(config.params, config.spec, v_max=args.v_max)
    samples = takeoff_curve(config.params, config.spec, np.linspace(V_FLOOR, args.v_max, 2001))
    reports.write_table(out / "branches.csv", reports.branches_frame(branches))
    reports.write_table(out / "takeoff.csv", reports.takeoff_frame(samples))
    reports.write_json(out / "branches.json", {"gamma": config.params.gamma, "branches": branches})
    return f"{len(branches)} branch(es): " + ", ".join(f"v{b.branch_index}={b.v0:.6g}" for b in branches)


def cmd_fold(args, config: ModelConfig, out: Path) -> str:
    fold = find_fold(config.params, config.spec)
    reports.write_json(out / "fold.json", fold)
    return f"gamma_double={fold.gamma_double:.6g}, v_fold={fold.v_fold:.6g}"


def cmd_spectrum(args, config: ModelConfig, out: Path) -> str:
    reports.write_table(out / "dispersion.csv", reports.dispersion_frame(dispersion_table(config.params, config.spec)))
    stable, margins = stability_verdict(config.params, config.spec)
    report = classify_regime(config.params, config.spec) if stable else None
    reports.write_json(out / "spectrum.json", {
        "stable": stable,
        "margins": margins,
        "regime": report.regime if report else None,
        "report": report,
    })
    return f"regime {report.regime.value}" if report else "background states are unstable"


def cmd_evans(args, config: ModelConfig, out: Path) -> str:
    front = _front(config, args)
    ctx = LinearizationContext.build(front, config.params, config.spec)
    start, stop, n = args.real
    lam_grid = np.linspace(start, stop, int(n)) + 1j * args.imag
    evaluations = evans_scan(lam_grid, ctx)
    payload = {"front": front.metadata(), "points": len(evaluations)}
    summary = f"D evaluated at {len(evaluations)} point(s)"
    if args.contour is not None:
        re, im, radius = args.contour
        count = winding_count(circle_contour(complex(re, im), radius, n=args.contour_points), ctx)
        payload["contour"] = {"center": complex(re, im), "radius": radius, "zeros": count}
        summary += f"; {count} zero(s) inside the contour"
    reports.write_table(out / "evans.csv", reports.evans_frame(evaluations))
    reports.write_json(out / "evans.json", payload)
    return summary


def cmd_oracle(args, config: ModelConfig, out: Path) -> str:
    front = _front(config, args)
    ctx = LinearizationContext.build(front, config.params, config.spec)
    eigenvalues = discrete_spectrum_oracle(ctx, N=args.N, shifts=args.shift or None)
    reports.write_table(out / "oracle.csv", reports.oracle_frame(eigenvalues))
    reports.write_json(out / "oracle.json", {"front": front.metadata(), "N": args.N, "eigenvalues": eigenvalues})
    points = [e for e in eigenvalues if e.label == "point"]
    return f"{len(points)} point eigenvalue(s), {len(eigenvalues) - len(points)} in clusters"


def cmd_simulate(args, config: ModelConfig, out: Path) -> str:
    sim = SimConfig(L=args.L, N=args.N, dt=args.dt, T_final=args.T, snapshot_every=args.snapshot_every)
    v0 = _front_level(config, args)
    outcome = run_and_classify(sim, config.params, config.spec, v0)
    reports.write_table(out / "series.csv", outcome.series)
    for t, U, V in outcome.snapshots:
        reports.write_table(out / "snapshots" / f"t_{t:012.4f}.csv", reports.snapshot_frame(outcome.x, U, V))
    reports.write_json(out / "simulate.json", {"v0": v0, "config": sim, **outcome.summary()})
    return f"verdict {outcome.verdict.value}"


def cmd_classify(args, config: ModelConfig, out: Path) -> str:
    result = classify_destabilization_type(config.spec, config.params, gamma_scan=args.gamma_scan)
    kind = "D" if isinstance(result, TypeD) else "E"
    reports.write_json(out / "classify.json", {"type": kind, "result": result})
    return f"type {kind}"


COMMANDS: dict[str, Callable] = {
    "decompose": cmd_decompose,
    "front": cmd_front,
    "branches": cmd_branches,
    "fold": cmd_fold,
    "spectrum": cmd_spectrum,
    "evans": cmd_evans,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
}


def _run_sweep(args, settings: Settings, out: Path) -> tuple[str, str | None]:
    grid = load_sweep_grid(args.config)     # validated before any output is written
    frame = run_sweep(grid, workers=args.workers or settings.workers)
    reports.write_table(out / "sweep.csv", frame)
    failed = int((frame["status"] != "ok").sum())
    return f"{len(frame)} point(s), {failed} failed", None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frontlab",
        description="Fronts in singularly perturbed bistable reaction-diffusion systems",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="model descriptor (JSON/YAML); FRONTLAB_CONFIG_FILE if omitted")
    common.add_argument("--output-dir", help="result directory (default FRONTLAB_OUTPUT_DIR or ./frontlab-out)")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("decompose", parents=[common], help="validate the reaction terms")
    _add_front_options(sub.add_parser("front", parents=[common], help="front profile"), refine_default=False)

    p = sub.add_parser("branches", parents=[common], help="front branches")
    p.add_argument("--v-max", type=float, default=50.0)

    sub.add_parser("fold", parents=[common], help="saddle-node of fronts")
    sub.add_parser("spectrum", parents=[common], help="essential spectrum")

    p = sub.add_parser("evans", parents=[common], help="Evans function")
    _add_front_options(p, refine_default=True)
    p.add_argument("--real", type=float, nargs=3, metavar=("START", "STOP", "N"), default=(-0.5, 0.5, 21))
    p.add_argument("--imag", type=float, default=0.0)
    p.add_argument("--contour", type=float, nargs=3, metavar=("RE", "IM", "RADIUS"))
    p.add_argument("--contour-points", type=int, default=64)

    p = sub.add_parser("oracle", parents=[common], help="direct eigenvalue computation")
    _add_front_options(p, refine_default=True)
    p.add_argument("--N", type=int, default=4096)
    p.add_argument("--shift", type=float, action="append", help="shift-invert target (repeatable)")

    p = sub.add_parser("simulate", parents=[common], help="time evolution")
    _add_front_options(p, refine_default=False)
    p.add_argument("--L", type=float, default=50.0)
    p.add_argument("--N", type=int, default=2048)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--T", type=float, default=200.0)
    p.add_argument("--snapshot-every", type=int, default=0)

    p = sub.add_parser("classify", parents=[common], help="destabilization type")
    p.add_argument("--gamma-scan", type=float, nargs="+")

    p = sub.add_parser("sweep", parents=[common], help="parameter sweep over a grid file")
    p.add_argument("--workers", type=int, help="worker processes (default FRONTLAB_WORKERS or CPU count)")
    return parser


def dispatch(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    args.config = args.config or settings.config_file
    if not args.config:
        print("Error: --config is required (or set FRONTLAB_CONFIG_FILE)", file=sys.stderr)
        return 2
    out = Path(args.output_dir or settings.output_dir)

    try:
        if args.command == "sweep":
            summary, digest = _run_sweep(args, settings, out)
        else:
            config = load_model_config(args.config)
            summary, digest = COMMANDS[args.command](args, config, out), config.digest
    except FrontLabError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"Error ({type(e).__name__}): {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"Error: cannot write results to {out}: {e}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"Error ({type(e).__name__}): {e}", file=sys.stderr)
        return 3

    reports.write_json(
        out / "provenance.json",
        reports.provenance(args.command, args.config, digest, out, time.perf_counter() - started, __version__),
    )
    print(f"{args.command}: {summary} -> {out}")
    return 0


def main(argv: list[str] | None = None) -> None:
    load_dotenv()
    settings = load_settings()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.log_level,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    sys.exit(dispatch(args, settings))


if __name__ == "__main__":
    main()
