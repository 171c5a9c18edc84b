"""Command line entry point.

Exit codes: 0 ok, 1 infeasible or fail verdict, 2 parse error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from .bench import bench, write_instances
from .classify import classify_items, select_threshold_pair
from .corridor import (Corridor, CorridorError, check_corridor, dump_corridors, load_polygons,
                       placements_in, split_into_LU)
from .corridor_dp import DPCaps, color_items, solve_corridor
from .errors import BudgetExceeded
from .exact import ExactConfig, optimal_pack
from .geom import Packing, validate_packing
from .instance import Instance, ParseError, parse_instance, parse_packing, serialize_packing
from .packers import BoxRegion, PackingFailure, PreconditionError, nfdh, steinberg
from .pipeline import PipelineCaps, run_pipeline
from .render import render_svg

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_BUDGET = 0, 1, 2, 3

_CAP_KEYS = {
    "chords": ("dp", "chord_cap"),
    "boundary": ("dp", "boundary_cap"),
    "cells": ("dp", "cell_budget"),
    "items": ("exact", "max_items"),
    "side": ("exact", "max_side"),
    "nodes": ("exact", "node_limit"),
}


def parse_caps(text: str | None) -> tuple[ExactConfig, DPCaps]:
    """``"cells=1000,items=8"`` style overrides for the search budgets."""
    exact, dp = {}, {}
    for part in filter(None, (text or "").split(",")):
        key, _, value = part.partition("=")
        if key not in _CAP_KEYS or not value.isdigit():
            raise argparse.ArgumentTypeError(f"bad cap {part!r}; keys: {', '.join(_CAP_KEYS)}")
        target, field = _CAP_KEYS[key]
        (exact if target == "exact" else dp)[field] = int(value)
    return ExactConfig(**exact), DPCaps(**dp)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _read_instance(path: str, rotate: bool) -> Instance:
    text = sys.stdin.read() if path == "-" else Path(path).read_text()
    inst = parse_instance(text)
    if rotate and not inst.rotate:
        inst = Instance(inst.side, inst.items, True, inst.weighted)
    return inst


def _read_corridors(path: str, side: int) -> list[Corridor]:
    return [check_corridor(poly, None, None, side) for poly in load_polygons(Path(path).read_text())]


def _emit(args, packing: Packing, inst: Instance, corridors=(), labels=None) -> None:
    report = validate_packing(inst.items, packing)
    if not report.valid:
        raise AssertionError(f"refusing to write an invalid packing: {report.violations}")
    if args.format == "svg":
        sys.stdout.write(render_svg(packing, inst.index, labels, corridors))
    else:
        sys.stdout.write(serialize_packing(packing))


def _labels(inst: Instance, eps: Fraction):
    if not inst.items:
        return None
    pair = select_threshold_pair(list(inst.items), eps, inst.side, inst.weighted)
    return classify_items(list(inst.items), pair, inst.side).labels


def cmd_solve(args) -> int:
    inst = _read_instance(args.instance, args.rotate)
    exact, dp = parse_caps(args.caps)
    caps = PipelineCaps(exact, dp, args.c_eps, args.branch)
    corridors = _read_corridors(args.corridors, inst.side) if args.corridors else None
    res = run_pipeline(inst, args.eps, args.seed, caps, corridors)
    for rec in res.log:
        print(f"{rec.stage}\t{rec.profit}\t{rec.note}", file=sys.stderr)
    _emit(args, res.packing, inst, corridors or (), _labels(inst, args.eps))
    return EXIT_OK


def cmd_exact(args) -> int:
    inst = _read_instance(args.instance, args.rotate)
    exact, _ = parse_caps(args.caps)
    cfg = ExactConfig(exact.max_items, exact.max_side, inst.rotate, exact.node_limit)
    profit, packing = optimal_pack(inst.items, inst.side, cfg)
    print(f"optimum\t{profit}", file=sys.stderr)
    _emit(args, packing, inst)
    return EXIT_OK


def _box(args, inst: Instance) -> BoxRegion:
    if args.box:
        return BoxRegion(0, 0, args.box[0], args.box[1])
    return BoxRegion(0, 0, inst.side, inst.side)


def cmd_nfdh(args) -> int:
    inst = _read_instance(args.instance, False)
    box = _box(args, inst)
    try:
        res = nfdh(list(inst.items), box, args.eps)
    except PreconditionError as exc:
        print(f"precondition failed: {exc} (items {exc.offenders})", file=sys.stderr)
        return EXIT_FAIL
    packing = Packing(inst.side, res.placements)
    print(f"packed\t{len(res.placements)}\tarea\t{sum(inst.index[i].area for i in res.item_ids())}", file=sys.stderr)
    _emit(args, packing, inst)
    return EXIT_OK


def cmd_steinberg(args) -> int:
    inst = _read_instance(args.instance, False)
    box = _box(args, inst)
    try:
        packing = steinberg(list(inst.items), box, inst.side)
    except (PreconditionError, PackingFailure) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FAIL
    _emit(args, packing, inst)
    return EXIT_OK


def cmd_dp(args) -> int:
    inst = _read_instance(args.instance, False)
    corridors = _read_corridors(args.corridor, inst.side)
    if len(corridors) != 1:
        print("expected exactly one corridor", file=sys.stderr)
        return EXIT_PARSE
    _, dp = parse_caps(args.caps)
    coloring = color_items(list(inst.items), args.gamma, args.seed)
    res = solve_corridor(corridors[0], list(inst.items), coloring, args.gamma, dp, trace=args.trace)
    for line in res.trace:
        print(line, file=sys.stderr)
    print(f"verdict\t{'success' if res.success else 'fail'}\tcells\t{res.cells}", file=sys.stderr)
    if not res.success:
        return EXIT_FAIL
    _emit(args, res.packing, inst, corridors)
    return EXIT_OK


def cmd_split_lu(args) -> int:
    inst = _read_instance(args.instance, False)
    packing = parse_packing(Path(args.packing).read_text())
    corridors = _read_corridors(args.corridors, inst.side)
    out, kept = [], []
    for corr in corridors:
        res = split_into_LU(corr, inst.index, _inside(corr, inst, packing), args.mode)
        out += res.corridors
        kept += list(res.retained.placements)
        print(f"corridor s={corr.s}\tdeleted_pieces={list(res.deleted_pieces)}\t"
              f"deleted_fraction={res.deleted_fraction}\tshapes={[s.value for s in res.shapes]}", file=sys.stderr)
    if args.format == "svg":
        sys.stdout.write(render_svg(Packing(inst.side, tuple(kept)), inst.index, None, out))
    else:
        sys.stdout.write(dump_corridors(out))
    return EXIT_OK


def _inside(corr: Corridor, inst: Instance, packing: Packing) -> Packing:
    return placements_in(corr, inst.index, packing)


def cmd_bench(args) -> int:
    directory = Path(args.directory)
    if args.generate:
        write_instances(directory, args.generate, args.seed)
    exact, dp = parse_caps(args.caps)
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else [args.seed]
    report = bench(directory, args.eps, seeds, PipelineCaps(exact, dp, args.c_eps))
    sys.stdout.write(report.to_text(timing=args.timing))
    return EXIT_OK


def cmd_render(args) -> int:
    inst = _read_instance(args.instance, False)
    packing = parse_packing(Path(args.packing).read_text()) if args.packing else Packing(inst.side, ())
    corridors = _read_corridors(args.corridors, inst.side) if args.corridors else ()
    sys.stdout.write(render_svg(packing, inst.index, _labels(inst, args.eps), corridors))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps", type=_fraction, default=Fraction(1, 2), help="accuracy parameter 1/m (default 1/2)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--caps", default=None, help="budget overrides, e.g. cells=5000,items=8,boundary=4")
    common.add_argument("--rotate", action="store_true", help="allow 90 degree rotations")
    common.add_argument("--format", choices=("text", "svg"), default="text")

    parser = argparse.ArgumentParser(prog="geoknap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("solve", parents=[common], help="run the full pipeline")
    p.add_argument("instance")
    p.add_argument("--corridors", help="corridor dump to use instead of synthetic boxes")
    p.add_argument("--c-eps", type=_fraction, default=Fraction(4), help="branch threshold factor")
    p.add_argument("--branch", choices=("auto", "dp", "slices"), default="auto")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("exact", parents=[common], help="exact optimum")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_exact)

    for verb, fn in (("nfdh", cmd_nfdh), ("steinberg", cmd_steinberg)):
        p = sub.add_parser(verb, parents=[common], help=f"pack the instance with {verb}")
        p.add_argument("instance")
        p.add_argument("--box", type=int, nargs=2, metavar=("W", "H"), help="container (default N x N)")
        p.set_defaults(fn=fn)

    p = sub.add_parser("dp", parents=[common], help="colour-coding DP in one path corridor")
    p.add_argument("corridor")
    p.add_argument("instance")
    p.add_argument("--gamma", type=int, required=True)
    p.add_argument("--trace", action="store_true", help="print every DP cell and its verdict")
    p.set_defaults(fn=cmd_dp)

    p = sub.add_parser("split-lu", parents=[common], help="split corridors into boxes, L and U")
    p.add_argument("corridors")
    p.add_argument("instance")
    p.add_argument("packing")
    p.add_argument("--mode", choices=("derandomized", "enumerate_offsets"), default="derandomized")
    p.set_defaults(fn=cmd_split_lu)

    p = sub.add_parser("bench", parents=[common], help="compare the pipeline with the exact optimum")
    p.add_argument("directory")
    p.add_argument("--seeds", help="comma separated seeds (default: --seed)")
    p.add_argument("--generate", type=int, default=0, help="first write this many random instances")
    p.add_argument("--c-eps", type=_fraction, default=Fraction(4))
    p.add_argument("--timing", action="store_true", help="add wall-clock seconds per row")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("render", parents=[common], help="SVG of a packing and/or corridors")
    p.add_argument("instance")
    p.add_argument("packing", nargs="?")
    p.add_argument("--corridors")
    p.set_defaults(fn=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (ParseError, argparse.ArgumentTypeError, CorridorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
