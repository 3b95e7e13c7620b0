"""Command-line front end: ``picplace {bench,place,legalize,metrics,run-all}``.

Exit codes: 0 success, 1 invalid input, 2 divergence, 3 legalization failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import fields

import numpy as np
import yaml

from .arrays import design_arrays
from .benchgen import ButterflySpec, ClementsSpec, gen_butterfly, gen_clements
from .frames import emit_frames
from .legalize import legalize
from .metrics import LossModel, evaluate
from .netlist import Design, NetlistError, dump_design, load_design
from .optimizer import OPTIMIZERS
from .placer import PlacementResult, RunConfig, run_global
from .spacing import VARIANTS

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED, EXIT_LEGALIZE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------- parser


def _placement_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global placement")
    g.add_argument("--seed", type=int, default=0, help="RNG seed for initialization")
    g.add_argument("--iters", type=int, default=1500, help="iteration budget T")
    g.add_argument("--init", choices=["center-random", "manual"], default="center-random",
                   help="start clustered at the die centre or from the file's positions")
    g.add_argument("--wl", choices=["coswa", "wa", "lse", "quadratic"], default="coswa", help="wirelength model")
    g.add_argument("--alpha", type=float, default=1.4, help="cosWA span exponent")
    g.add_argument("--gamma0", type=float, default=None, help="base smoothing length (default 0.1 bin)")
    g.add_argument("--angle-margin", type=float, default=0.0, help="cosine margin c of the bend penalty")
    g.add_argument("--theta2-raw", action="store_true",
                   help="use +w instead of -w for the second port's angle")
    g.add_argument("--spacing", choices=list(VARIANTS), default="full", help="spacing model variant")
    g.add_argument("--lambda-ns", type=float, default=1.0, help="spacing penalty weight")
    g.add_argument("--spacing-refresh", type=int, default=100, help="crossing congestion refresh period")
    g.add_argument("--spacing-literal", action="store_true",
                   help="penalize clearance beyond the demand instead of the shortfall")
    g.add_argument("--target-density", type=float, default=1.0, help="bin target density")
    g.add_argument("--grid", type=int, default=None, help="density grid size (power of two)")
    g.add_argument("--rho", type=float, default=2000.0, help="quadratic density coefficient")
    g.add_argument("--overflow-stop", type=float, default=0.07, help="stop once overflow falls below this")
    g.add_argument("--optimizer", choices=list(OPTIMIZERS), default="bnag")
    g.add_argument("--eta0", type=float, default=1.0, help="initial step scale")
    g.add_argument("--eta-min", type=float, default=0.1, help="final step scale")
    g.add_argument("--s0", type=float, default=0.05, help="initial projection sharpness")
    g.add_argument("--sT", type=float, default=1.0, help="final projection sharpness")
    g.add_argument("--frames", metavar="DIR", help="write SVG snapshots into DIR")
    g.add_argument("--trace", metavar="PATH", help="write the run trace as JSON lines")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    kw = {k: v for k, v in vars(args).items() if k in names}
    try:
        return RunConfig(**kw)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _loss_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("loss model")
    g.add_argument("--prop-loss", type=float, default=2.0, help="propagation loss, dB/cm")
    g.add_argument("--bend-loss", type=float, default=0.01, help="loss per 90 degree bend, dB")
    g.add_argument("--crossing-loss", type=float, default=0.2, help="loss per crossing, dB")
    g.add_argument("--timing", action="store_true",
                   help="include wall time in the metrics report (makes it non-reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="picplace", description="Analytical placement for photonic circuits.")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="generate a benchmark netlist")
    kind = b.add_mutually_exclusive_group(required=True)
    kind.add_argument("--clements", type=int, metavar="N", help="Clements mesh with N modes")
    kind.add_argument("--butterfly", type=int, metavar="N", help="butterfly network with N ports")
    b.add_argument("--size", choices=["S", "L"], default="S", help="size class")
    b.add_argument("--utilization", type=float, default=None, help="override the size class utilization")
    b.add_argument("--seed", type=int, default=None, help="butterfly output permutation seed")
    b.add_argument("-o", "--output", help="output YAML (stdout when omitted)")

    p = sub.add_parser("place", help="global placement")
    p.add_argument("input", help="netlist YAML")
    p.add_argument("-o", "--output", required=True, help="placed YAML")
    p.add_argument("--metrics", metavar="PATH", help="also write metrics JSON for the placed layout")
    _placement_flags(p)
    _loss_flags(p)

    lg = sub.add_parser("legalize", help="remove overlaps from a placed netlist")
    lg.add_argument("input", help="placed YAML")
    lg.add_argument("-o", "--output", required=True, help="legalized YAML")
    lg.add_argument("--violations", metavar="PATH", help="write remaining violations as JSON")

    m = sub.add_parser("metrics", help="evaluate a placed netlist")
    m.add_argument("input", help="placed YAML")
    m.add_argument("-o", "--output", help="metrics JSON (stdout when omitted)")
    _loss_flags(m)

    r = sub.add_parser("run-all", help="place, legalize and evaluate in one go")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("input", nargs="?", help="netlist YAML")
    src.add_argument("--clements", type=int, metavar="N", help="generate a Clements mesh instead")
    r.add_argument("--size", choices=["S", "L"], default="S", help="size class for --clements")
    r.add_argument("--out-dir", required=True, help="directory for all artifacts")
    r.add_argument("--seeds", type=int, default=1, help="run seeds seed .. seed+N-1")
    _placement_flags(r)
    _loss_flags(r)
    return parser


# --------------------------------------------------------------------------- helpers


def _load(path: str) -> Design:
    if not os.path.exists(path):
        raise CliError(f"{path}: no such file")
    try:
        return load_design(path)
    except NetlistError as exc:
        raise CliError(f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise CliError(f"{path}: not valid YAML ({exc})") from exc


def _write(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _placement_meta(path: str) -> dict:
    with open(path) as fh:
        doc = yaml.safe_load(fh) or {}
    return dict(doc.get("placement_meta") or {})


def _loss(args) -> LossModel:
    try:
        return LossModel(args.prop_loss, args.bend_loss, args.crossing_loss)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _report(design: Design, positions: np.ndarray, args, wall_time: float | None = None) -> str:
    rep = evaluate(design, positions, _loss(args), wall_time)
    return rep.to_json(timing=args.timing) + "\n"


def _write_trace(path: str, result: PlacementResult) -> None:
    lines = [json.dumps(r.to_dict()) for r in result.trace]
    _write(path, "\n".join(lines) + ("\n" if lines else ""))


def _global(design: Design, config: RunConfig, args) -> PlacementResult:
    result = run_global(design, config)
    if args.trace:
        _write_trace(args.trace, result)
    if args.frames:
        try:
            emit_frames(result.trace, design, args.frames, result.state.filler_size)
        except OSError as exc:
            raise CliError(f"{args.frames}: cannot write frames ({exc})") from exc
    return result


def _gp_meta(result: PlacementResult, config: RunConfig) -> dict:
    return {"iterations": int(result.iterations), "final_overflow": float(result.overflow),
            "seed": int(config.seed), "status": result.status}


def _full(design: Design, movable: np.ndarray) -> np.ndarray:
    return design_arrays(design).full_positions(movable)


# --------------------------------------------------------------------------- commands


def cmd_bench(args) -> int:
    try:
        if args.clements is not None:
            design = gen_clements(ClementsSpec(args.clements, args.size, utilization=args.utilization))
        else:
            design = gen_butterfly(ButterflySpec(args.butterfly, args.size, seed=args.seed,
                                                 utilization=args.utilization))
    except (ValueError, NetlistError) as exc:
        raise CliError(str(exc)) from exc
    text = dump_design(design)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_place(args) -> int:
    design = _load(args.input)
    config = config_from_args(args)
    t0 = time.perf_counter()
    result = _global(design, config, args)
    elapsed = time.perf_counter() - t0
    placed = design.with_positions(_full(design, result.state.movable))
    _write(args.output, dump_design(placed, _gp_meta(result, config)))
    if args.metrics:
        _write(args.metrics, _report(design, _full(design, result.state.movable), args, elapsed))
    if result.status == "diverged":
        raise CliError(f"{args.input}: {result.message}", EXIT_DIVERGED)
    return EXIT_OK


def _legalized(design: Design, movable: np.ndarray, meta: dict):
    res = legalize(design, movable)
    meta = dict(meta)
    meta.update({"legalization": res.status, "total_displacement": res.total_displacement,
                 "max_displacement": res.max_displacement})
    out = design.with_positions(_full(design, res.positions))
    return res, out, meta


def cmd_legalize(args) -> int:
    design = _load(args.input)
    xy = design.positions()
    if np.isnan(xy).any():
        raise CliError(f"{args.input}: every component needs a position before legalization")
    res, out, meta = _legalized(design, xy[design.movable_indices], _placement_meta(args.input))
    _write(args.output, dump_design(out, meta))
    if args.violations:
        _write(args.violations, json.dumps(res.violations, indent=2) + "\n")
    if res.status != "success":
        print(json.dumps(res.violations, indent=2), file=sys.stderr)
        raise CliError(f"{args.input}: legalization failed with {len(res.violations)} violations", EXIT_LEGALIZE)
    return EXIT_OK


def cmd_metrics(args) -> int:
    design = _load(args.input)
    xy = design.positions()
    if np.isnan(xy).any():
        raise CliError(f"{args.input}: every component needs a position to be evaluated")
    text = _report(design, xy, args)
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _run_one(design: Design, config: RunConfig, args, out_dir: str) -> int:
    sub = argparse.Namespace(**vars(args))
    sub.trace = args.trace and os.path.join(out_dir, os.path.basename(args.trace))
    sub.frames = args.frames and os.path.join(out_dir, os.path.basename(os.path.normpath(args.frames)))
    t0 = time.perf_counter()
    result = _global(design, config, sub)
    meta = _gp_meta(result, config)
    _write(os.path.join(out_dir, "placed.yaml"),
           dump_design(design.with_positions(_full(design, result.state.movable)), meta))
    if result.status == "diverged":
        print(f"error: {result.message}", file=sys.stderr)
        return EXIT_DIVERGED
    res, out, meta = _legalized(design, result.state.movable, meta)
    _write(os.path.join(out_dir, "legalized.yaml"), dump_design(out, meta))
    elapsed = time.perf_counter() - t0
    _write(os.path.join(out_dir, "metrics.json"), _report(design, _full(design, res.positions), args, elapsed))
    if res.status != "success":
        print(json.dumps(res.violations, indent=2), file=sys.stderr)
        print(f"error: legalization failed with {len(res.violations)} violations", file=sys.stderr)
        return EXIT_LEGALIZE
    return EXIT_OK


def cmd_run_all(args) -> int:
    if args.clements is not None:
        try:
            design = gen_clements(ClementsSpec(args.clements, args.size))
        except (ValueError, NetlistError) as exc:
            raise CliError(str(exc)) from exc
    else:
        design = _load(args.input)
    if args.seeds < 1:
        raise CliError("--seeds must be >= 1")
    _write(os.path.join(args.out_dir, "netlist.yaml"), dump_design(design))
    worst = EXIT_OK
    for k in range(args.seeds):
        config = config_from_args(argparse.Namespace(**{**vars(args), "seed": args.seed + k}))
        out_dir = args.out_dir if args.seeds == 1 else os.path.join(args.out_dir, f"seed_{args.seed + k}")
        worst = max(worst, _run_one(design, config, args, out_dir))
    return worst


COMMANDS = {"bench": cmd_bench, "place": cmd_place, "legalize": cmd_legalize, "metrics": cmd_metrics,
            "run-all": cmd_run_all}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (NetlistError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
