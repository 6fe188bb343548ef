# ---------------------------------------------
# COMMAND-LINE ENTRY POINT
# ---------------------------------------------
import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np
import pandas as pd

from src.core import sle
from src.core.controllers import ExperimentController
from src.core.exceptions import LabError
from src.core.explorer import LEFTMOST, RIGHTMOST, explore_from_corner, path_to_frame
from src.core.grid import build_from_spec, load_domain_file
from src.core.ising import BoundaryCondition, beta_critical, sample
from src.core.models import SUITES, ExperimentSpec
from src.core.utils import parse_delta_list, parse_points, plot_driving, plot_exploration, plot_trace
from src.data.config_manager import ConfigManager
from src.utils.output_stream import configure_logging

logger = logging.getLogger(__name__)


def _deltas(text: str) -> List[str]:
    try:
        return [str(d) for d in parse_delta_list(text)]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _points(text: str) -> List[float]:
    try:
        return list(parse_points(text))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ising_crossing_lab",
                                     description="Ising crossings, explorers and the CDE driving process.")
    parser.add_argument("--workers", type=int, default=None, help="worker processes")
    parser.add_argument("--out", default=None, help="output directory (overrides ISING_LAB_OUTPUT)")
    parser.add_argument("--config", default="config.json", help="configuration file")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    parser.add_argument("--quiet", action="store_true", help="hide progress bars")
    parser.add_argument("--excel", default=None, help="also export the result rows to this .xlsx file")
    sub = parser.add_subparsers(dest="command", required=True)

    def lattice_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--domain", required=True, help="domain JSON file")
        p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--beta", type=float, default=None, help="inverse temperature (critical by default)")
        p.add_argument("--boundary", choices=("free", "mixed"), default="free")
        p.add_argument("--thermalize", type=int, default=None, help="Wolff steps before the first sample")
        p.add_argument("--decorrelation", type=int, default=None, help="Wolff steps between samples")
        p.add_argument("--metropolis-per-wolff", type=int, default=None)

    p = sub.add_parser("crossing", help="plus/star crossing estimates per mesh size")
    lattice_flags(p)
    p.add_argument("--delta-list", type=_deltas, required=True)

    p = sub.add_parser("explore", help="explorer hit estimates with identity checks")
    lattice_flags(p)
    p.add_argument("--delta", type=_deltas, required=True)
    p.add_argument("--explorers", default="leftmost,rightmost")
    p.add_argument("--check-identities", action="store_true")
    p.add_argument("--hair", action="store_true", help="gap statistic of the shared no-return edges instead")

    p = sub.add_parser("sle-hit", help="CDE hitting probability")
    p.add_argument("--points", type=_points, required=True, help="x_b,x_c,x_d")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("sle-validate", help="validation suites against closed forms")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("modulus", help="discrete extremal length")
    p.add_argument("--domain", required=True)
    p.add_argument("--delta", type=_deltas, required=True)

    p = sub.add_parser("closure", help="lattice star crossing against the CDE")
    lattice_flags(p)
    p.add_argument("--delta", type=_deltas, required=True)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--observation", default="0.5,0.25", help="fractions of [bc] sent to infinity")

    p = sub.add_parser("rerun", help="re-run the spec stored in a run manifest")
    p.add_argument("--manifest", required=True)

    p = sub.add_parser("compare", help="z-scores between two result files")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--threshold", type=float, default=3.0)

    p = sub.add_parser("plot-data", help="TSV data for external plotting")
    p.add_argument("--what", choices=("path", "driving", "trace"), required=True)
    p.add_argument("--run", default=None, help="run manifest supplying domain, mesh and seed")
    p.add_argument("--domain", default=None)
    p.add_argument("--delta", type=_deltas, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--output", default=None, help="TSV file; stdout when omitted")
    p.add_argument("--html", default=None, help="also write a plotly figure")
    return parser


# ---------------------------------------------
# COMMANDS
# ---------------------------------------------

def _spec_from_args(args: argparse.Namespace, config: ConfigManager) -> ExperimentSpec:
    workers = args.workers or config.get("harness", "workers", 1)
    common = {"n_samples": args.samples, "seed": args.seed, "workers": workers}
    if args.command in ("crossing", "explore", "closure"):
        common.update(domain=args.domain, beta=args.beta, boundary=args.boundary, n_thermalize=args.thermalize,
                      decorrelation_steps=args.decorrelation, metropolis_per_wolff=args.metropolis_per_wolff)
    if args.command == "crossing":
        return ExperimentSpec(kind="lattice-crossing", deltas=args.delta_list, **common)
    if args.command == "explore" and args.hair:
        return ExperimentSpec(kind="lattice-hair", deltas=args.delta, **common)
    if args.command == "explore":
        return ExperimentSpec(kind="lattice-explorer-hit", deltas=args.delta,
                              explorers=args.explorers.split(","), check_identities=args.check_identities, **common)
    if args.command == "closure":
        return ExperimentSpec(kind="closure", deltas=args.delta, dt=args.dt,
                              observation=list(parse_points(args.observation)), **common)
    if args.command == "sle-hit":
        return ExperimentSpec(kind="sle-hit", points=args.points, dt=args.dt, **common)
    return ExperimentSpec(kind="validation", suite=args.suite, dt=args.dt, **common)


def run_spec(controller: ExperimentController, spec: ExperimentSpec) -> int:
    """Run one spec, print its table and persist it. Returns the exit code."""
    if spec.kind == "lattice-crossing":
        table = pd.DataFrame([e.to_record() | {"delta": e.label} for e in controller.run_lattice_crossing(spec)])
    elif spec.kind == "lattice-explorer-hit":
        table = pd.DataFrame([e.to_record() | {"delta": e.label} for e in controller.run_explorer_hit(spec)])
    elif spec.kind == "sle-hit":
        table = pd.DataFrame([controller.run_sle_hit(spec).to_record()])
    elif spec.kind == "lattice-hair":
        table = controller.run_hair(spec)
    elif spec.kind == "modulus":
        table = controller.run_modulus(spec)
    elif spec.kind == "closure":
        table = controller.run_closure(spec)
    else:
        report = controller.run_validation(spec)
        print(report["rows"].to_string(index=False))
        print(f"suite={report['suite']} passed={report['passed']}")
        return 0 if report["passed"] else 1
    print(table.to_string(index=False))
    if controller.records or controller.tables:
        controller.persist(spec)
    if spec.kind == "closure" and not table["passed"].all():
        return 1
    if spec.kind == "lattice-hair" and not table["non_increasing"].all():
        return 1
    return 0


def _plot_data(args: argparse.Namespace, controller: ExperimentController) -> int:
    domain_file, delta, seed = args.domain, args.delta[0] if args.delta else None, args.seed
    dt = args.dt
    if args.run:
        with open(args.run, "r") as f:
            stored = json.load(f).get("spec", {})
        domain_file = domain_file or stored.get("domain")
        delta = delta or (stored.get("deltas") or [None])[0]
        seed = stored.get("seed") if seed is None else seed
        dt = dt if dt is not None else stored.get("dt")
    seed = 0 if seed is None else seed
    rng = np.random.default_rng(seed)
    dt = dt if dt is not None else controller.config.get("sle", "dt", 1e-3)

    if args.what == "path":
        if not domain_file or delta is None:
            raise LabError("plot-data --what path needs a domain and a mesh size")
        domain, marking = build_from_spec(load_domain_file(domain_file), delta)
        state = sample(domain, BoundaryCondition.free(), beta_critical(), rng=rng)
        frames = []
        for rule in (LEFTMOST, RIGHTMOST):
            frame = path_to_frame(explore_from_corner(state, marking, rule), domain)
            frame.insert(0, "explorer", rule)
            frames.append(frame)
        data = pd.concat(frames, ignore_index=True)
        if args.html:
            spins = pd.DataFrame([(*domain.vertex_position(i), int(s)) for i, s in enumerate(state.spins)],
                                 columns=["x", "y", "spin"])
            fig = plot_exploration(spins, [(rule, f) for rule, f in zip((LEFTMOST, RIGHTMOST), frames)])
            fig.write_html(args.html)
    else:
        driving = sle.simulate_driving(controller.sle_params(), args.t_end, dt, rng)
        if args.what == "driving":
            data = driving
            fig = plot_driving(driving) if args.html else None
        else:
            points = sle.trace_points(driving)
            data = pd.DataFrame({"x": np.real(points), "y": np.imag(points)})
            fig = plot_trace(points) if args.html else None
        if fig is not None:
            fig.write_html(args.html)
    data.to_csv(args.output or sys.stdout, sep="\t", index=False)
    return 0


def dispatch(args: argparse.Namespace) -> int:
    config = ConfigManager(args.config)
    controller = ExperimentController(config, output_dir=args.out, progress=not args.quiet)
    if args.command == "compare":
        report = controller.compare_runs(args.left, args.right, args.threshold)
        print(report.to_string(index=False))
        return 0 if report["passed"].all() else 1
    if args.command == "plot-data":
        return _plot_data(args, controller)
    if args.command == "modulus":
        load_domain_file(args.domain)
        spec = ExperimentSpec(kind="modulus", domain=args.domain, deltas=args.delta)
    elif args.command == "rerun":
        with open(args.manifest, "r") as f:
            spec = ExperimentSpec.from_dict(json.load(f)["spec"])
    else:
        if getattr(args, "domain", None):
            load_domain_file(args.domain)
        spec = _spec_from_args(args, config)
    code = run_spec(controller, spec)
    if args.excel:
        controller.export_to_excel(args.excel)
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run one command.

    Returns:
        int: 0 on success, 2 for a missing file, 1 for any other failure.
    """
    args = build_parser().parse_args(argv)
    config = ConfigManager(args.config)
    level = "DEBUG" if args.verbose else config.get("logging", "level", "INFO")
    configure_logging(level, config.get("logging", "format"))
    try:
        return dispatch(args)
    except FileNotFoundError as e:
        print(f"error=FileNotFound path={e.filename or e}")
        return 2
    except LabError as e:
        logger.error("%s", e)
        print(f"error={type(e).__name__} message={e}")
        return 1
    except Exception as e:
        logger.exception("Unexpected failure")
        print(f"error={type(e).__name__} message={e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
