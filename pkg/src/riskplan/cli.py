"""Command line entry point: ``riskplan plan|count|bench|render|negcycle``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path as FsPath

from . import bench as bench_mod
from .domain import GridError, grid_to_graph
from .formats import (
    Config,
    InvariantError,
    ParseError,
    ResultFile,
    check_result,
    parse_config,
    parse_map,
    parse_result,
    parse_rewards,
    serialize_result,
)
from .oracles import count_simple_paths, negative_cycle_demo
from .planners import EnumerationLimits, Mode, exact_enumerate, max_utility_select, risk_aware_dijkstra
from .render import render_svg
from .reward import RewardError, synth_reward_map
from .risk import RiskModelError

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT, EXIT_TRUNCATED = 0, 1, 2, 3
SYNTH = "SYNTH"


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load(args):
    grid = parse_map(_read(args.map))
    config = parse_config(_read(args.config)) if args.config else Config()
    if getattr(args, "gamma", None) is not None:
        if not 0 <= args.gamma <= 1:
            raise InvariantError("gamma", f"must lie in [0, 1], got {args.gamma}")
        config = Config(config.connectivity, args.gamma, config.model, config.limits)
    graph = grid_to_graph(grid, config.connectivity)
    source = getattr(args, "rewards", SYNTH)
    if source == SYNTH:
        rewards = synth_reward_map(graph, grid, gamma=config.gamma)
    else:
        rewards = parse_rewards(_read(source), grid, graph, config.gamma)
    return grid, graph, config, rewards


def cmd_plan(args) -> int:
    grid, graph, config, rewards = _load(args)
    mode = Mode.EXACT if args.mode == "exact" else Mode.APPROXIMATE
    evaluator = config.model.bind(graph, grid)
    if mode is Mode.EXACT:
        result, _ = exact_enumerate(graph, rewards, evaluator, config.limits)
    else:
        ensemble = risk_aware_dijkstra(graph, evaluator)
        result = max_utility_select(ensemble, graph, rewards, evaluator)
    rf = ResultFile(mode.value, result, config, grid, rewards)
    problems = check_result(rf)
    if problems:
        raise InvariantError("result", "; ".join(problems))
    _write(args.out, serialize_result(rf))
    if args.svg:
        _write(args.svg, render_svg(grid, graph, rewards, {mode.value: result.path}, layer=args.layer))
    return EXIT_TRUNCATED if result.truncated else EXIT_OK


def cmd_count(args) -> int:
    grid, graph, config, _ = _load(args)
    t0 = time.perf_counter()
    count, truncated = count_simple_paths(graph, graph.v_start, cap=config.limits.max_paths)
    elapsed = time.perf_counter() - t0
    flag = " (TRUNCATED)" if truncated else ""
    print(f"simple paths from start: {count}{flag}")
    print(f"enumeration time: {elapsed:.3f} s")
    return EXIT_TRUNCATED if truncated else EXIT_OK


def cmd_bench(args) -> int:
    text = bench_mod.bench(
        args.trials,
        seed=args.seed,
        max_size=args.max_size,
        density=args.density,
        limits=EnumerationLimits(max_paths=args.max_paths),
        timings=not args.no_timings,
    )
    _write(args.out, text)
    return EXIT_OK


def cmd_render(args) -> int:
    grid, graph, config, rewards = _load(args)
    paths = {}
    for path in args.result or []:
        rf = parse_result(_read(path))
        if rf.grid != grid:
            raise InvariantError("result", f"{path} was planned on a different map")
        label = rf.mode if rf.mode not in paths else FsPath(path).stem
        paths[label] = rf.result.path
    _write(args.svg, render_svg(grid, graph, rewards, paths, layer=args.layer))
    return EXIT_OK


def cmd_negcycle(args) -> int:
    demo = negative_cycle_demo()
    print("walk prefix              risk      reward    risk/reward")
    for prefix, risk, reward in demo.chain:
        print(f"{'-'.join(map(str, prefix)):<24} {risk:<9.4f} {reward:<9.4f} {risk / reward:.4f}")
    print("edge weights:")
    for u, v, w in demo.digraph.edges:
        print(f"  {u} -> {v}: {w:+.4f}")
    if demo.cycle is None:
        print("no negative cycle")
        return EXIT_INVARIANT
    cyc = demo.cycle
    print(f"negative cycle: {' -> '.join(map(str, cyc + cyc[:1]))}, total {demo.digraph.total(cyc):+.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def map_args(p, rewards=True):
        p.add_argument("--map", required=True, help="text map ('#' obstacle, '.' free, 'S' start, 'P' PoI)")
        p.add_argument("--config", help="JSON config (defaults when omitted)")
        if rewards:
            p.add_argument("--rewards", default=SYNTH, help="CSV reward grid, or SYNTH (default)")
            p.add_argument("--gamma", type=float, help="discount factor, overrides the config")

    p = sub.add_parser("plan", help="plan a path and write a JSON result")
    map_args(p)
    p.add_argument("--mode", choices=["exact", "approx"], default="approx")
    p.add_argument("--out", help="result file (stdout when omitted)")
    p.add_argument("--svg", help="also render the map and path to this SVG file")
    p.add_argument("--layer", type=int, help="layer to render for 3-D maps")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("count", help="count simple paths leaving the start")
    map_args(p, rewards=False)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("bench", help="compare exact and approximate planners on random grids")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=4)
    p.add_argument("--density", type=float, default=0.25)
    p.add_argument("--max-paths", type=int, default=EnumerationLimits.max_paths)
    p.add_argument("--no-timings", action="store_true", help="blank the runtime columns for byte-stable output")
    p.add_argument("--out", help="CSV file (stdout when omitted)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="draw a map, its rewards and planned paths as SVG")
    map_args(p)
    p.add_argument("--result", action="append", help="result file whose path to overlay (repeatable)")
    p.add_argument("--svg", required=True)
    p.add_argument("--layer", type=int)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("negcycle", help="show why shortest-path algorithms fail on utilities")
    p.set_defaults(func=cmd_negcycle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantError, GridError, RewardError, RiskModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
