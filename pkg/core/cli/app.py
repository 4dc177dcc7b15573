"""Command-line surface: gen, compile, eval, simulate, verify, render, bench."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import core.utils.settings as settings
from core.errors import (
    ContractViolation,
    DocumentError,
    GenerationError,
    MazePolicyError,
    UnsupportedDimensionError,
)
from core.io.documents import (
    emit_maze,
    emit_policy,
    emit_trace,
    parse_maze_document,
    parse_policy,
    parse_trace,
)
from core.io.generator import GeneratorConfig, generate_maze
from core.maze.model import Maze, Point, format_point
from core.oracle.verification import verify_maze
from core.policy.compiler import compile_policy
from core.policy.nodes import describe_path
from core.policy.runtime import (
    EpisodeStatus,
    NoiseConfig,
    first_action,
    run_episode,
    run_noisy_episode,
)
from core.render.base import RenderContext
from core.render.registry import RendererRegistry, register_default_renderers
from core.utils.display_utils import DisplayUtils

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3

logger = logging.getLogger("MazePolicy")

BENCH_COLUMNS = [
    "seed",
    "dimension",
    "obstacles",
    "valid_corners",
    "extended_corners",
    "nodes",
    "leaves",
    "grid_depth",
    "dir_depth",
    "total_depth",
    "compile_ms",
    "mean_step_us",
]


def ranged_type(value_type, min_value, max_value):
    def range_checker(arg: str):
        try:
            f = value_type(arg)
        except ValueError:
            raise argparse.ArgumentTypeError(f"must be a valid {value_type.__name__}")

        if f < min_value or f > max_value:
            raise argparse.ArgumentTypeError(
                f"must be within range [{min_value}, {max_value}]"
            )

        return f

    return range_checker


def point_type(arg: str) -> Point:
    try:
        return tuple(int(v) for v in arg.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {arg!r}")


def points_type(arg: str) -> List[Point]:
    return [point_type(part) for part in arg.split(";") if part.strip()]


def alpha_type(arg: str) -> Fraction:
    try:
        alpha = Fraction(arg)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number or fraction, got {arg!r}")
    if not 0 <= alpha < 1:
        raise argparse.ArgumentTypeError("must lie in [0, 1)")
    return alpha


def int_list_type(arg: str) -> List[int]:
    try:
        return [int(v) for v in arg.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {arg!r}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")


def _anchors(args: argparse.Namespace, maze: Maze, from_document=()) -> List[Point]:
    anchors = list(from_document) + list(args.anchors or [])
    if args.anchor_origin:
        anchors.append(tuple(0 for _ in range(maze.dimension)))
    return anchors


def _check_state(maze: Maze, state: Point) -> Point:
    if len(state) != maze.dimension:
        raise ContractViolation(
            f"state {format_point(state)} has dimension {len(state)}, maze has {maze.dimension}"
        )
    if maze.contains_obstacle(state):
        raise ContractViolation(f"state {format_point(state)} lies inside an obstacle")
    return state


def _load_policy(args: argparse.Namespace):
    maze = None
    if getattr(args, "maze", None):
        maze = parse_maze_document(_read(args.maze)).maze
    return parse_policy(_read(args.policy), maze=maze)


# ── Subcommands ─────────────────────────────────────────────────────


def cmd_gen(args: argparse.Namespace) -> int:
    config = GeneratorConfig(
        seed=args.seed,
        dimension=args.dimension,
        obstacle_count=args.obstacles,
        coord_lo=args.lo,
        coord_hi=args.hi,
        max_extent=args.max_extent,
    )
    _write(args.output, emit_maze(generate_maze(config)))
    return EXIT_OK


def cmd_compile(args: argparse.Namespace) -> int:
    document = parse_maze_document(_read(args.maze))
    anchors = _anchors(args, document.maze, document.anchors)
    compilation = compile_policy(document.maze, anchors, dag=args.dag_dir_tree)
    _write(args.output, emit_policy(compilation.tree, document.maze, anchors))
    stats = DisplayUtils.format_compile_stats(compilation)
    print(stats, file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    policy = _load_policy(args)
    state = _check_state(policy.maze, args.state)
    leaf, visits = policy.tree.evaluate(state)
    action = first_action(policy.tree, state)
    print(leaf.describe())
    print(f"first action: {action if action is not None else 'none'}")
    print(f"tree nodes visited: {visits}")
    for line in describe_path(policy.tree, state):
        print(f"  {line}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    policy = _load_policy(args)
    state = _check_state(policy.maze, args.state)
    if args.alpha:
        noise = NoiseConfig(alpha=args.alpha, seed=args.seed)
        trace = run_noisy_episode(policy.maze, policy.tree, state, noise, args.max_steps)
    else:
        trace = run_episode(policy.maze, policy.tree, state, args.max_steps)
    _write(args.output, emit_trace(trace))
    summary = (
        f"cost {trace.total_cost}, {len(trace.corner_waypoints)} waypoint(s), "
        f"{trace.tree_node_visits} tree node visit(s), status {trace.status.value}"
    )
    print(summary, file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK if trace.status is EpisodeStatus.REACHED_GOAL else EXIT_VERIFY_FAILED


def cmd_verify(args: argparse.Namespace) -> int:
    document = parse_maze_document(_read(args.maze))
    anchors = _anchors(args, document.maze, document.anchors)
    tree = None
    if args.policy:
        policy = parse_policy(_read(args.policy), maze=document.maze)
        tree, anchors = policy.tree, list(policy.anchors)
    report = verify_maze(
        document.maze,
        anchors=anchors,
        tree=tree,
        padding=args.padding,
        dag=args.dag_dir_tree,
        alpha=args.alpha,
        episodes=args.episodes,
        seed=args.seed if args.seed is not None else 0,
        workers=args.workers,
    )
    DisplayUtils.log_summary(report)
    _write(args.output, DisplayUtils.format_report(report, args.format))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def cmd_render(args: argparse.Namespace) -> int:
    register_default_renderers()
    renderer = RendererRegistry.create(args.format)
    maze = tree = trace = None
    anchors: Tuple[Point, ...] = ()
    if args.policy:
        policy = _load_policy(args)
        maze, tree, anchors = policy.maze, policy.tree, policy.anchors
    elif args.maze:
        document = parse_maze_document(_read(args.maze))
        maze, anchors = document.maze, document.anchors
    if args.trace:
        trace = parse_trace(_read(args.trace))
    text = renderer.render(RenderContext(maze=maze, tree=tree, trace=trace, anchors=anchors))
    _write(_render_target(args, renderer.file_extension), text)
    return EXIT_OK


def _render_target(args: argparse.Namespace, extension: str) -> Optional[str]:
    """``-o DIR`` writes ``<input stem><extension>`` inside DIR."""
    if args.output is None or not Path(args.output).is_dir():
        return args.output
    source = Path(args.policy or args.maze or args.trace)
    stem = source.name.split(".")[0] or "render"
    return str(Path(args.output) / f"{stem}{extension}")


def bench_row(maze: Maze, seed: int, samples: int, dag: bool) -> Dict[str, object]:
    """Compile one maze and time episodes from ``samples`` free states."""
    compilation = compile_policy(maze, dag=dag)
    rng = np.random.Generator(np.random.PCG64(seed))
    lo = np.array([min(v) - 1 for v in compilation.grid.lists])
    hi = np.array([max(v) + 1 for v in compilation.grid.lists])
    starts = []
    while len(starts) < samples:
        s = tuple(int(v) for v in rng.integers(lo, hi, endpoint=True))
        if not maze.contains_obstacle(s):
            starts.append(s)

    steps = 0
    started = time.perf_counter()
    for s in starts:
        steps += run_episode(maze, compilation.tree, s).total_cost
    elapsed = time.perf_counter() - started

    stats = compilation.tree.stats
    return {
        "seed": seed,
        "dimension": maze.dimension,
        "obstacles": maze.k,
        "valid_corners": len(compilation.grid),
        "extended_corners": compilation.grid.extended_count,
        "nodes": stats.node_count,
        "leaves": stats.leaf_count,
        "grid_depth": stats.grid_depth,
        "dir_depth": stats.dir_depth,
        "total_depth": stats.total_depth,
        "compile_ms": round(compilation.seconds * 1000, 3),
        "mean_step_us": round(elapsed * 1e6 / steps, 3) if steps else 0.0,
    }


def cmd_bench(args: argparse.Namespace) -> int:
    rows = []
    for d in args.dimensions:
        for k in args.obstacles:
            for seed in range(args.seed, args.seed + args.mazes):
                config = GeneratorConfig(
                    seed=seed,
                    dimension=d,
                    obstacle_count=k,
                    coord_lo=args.lo,
                    coord_hi=args.hi,
                    max_extent=args.max_extent,
                )
                rows.append(bench_row(generate_maze(config), seed, args.samples, args.dag_dir_tree))
                logger.debug(f"Bench row: {rows[-1]}")
    if args.format == "json":
        text = json.dumps(rows, indent=2)
    elif args.format == "csv":
        text = DisplayUtils.to_csv(rows, BENCH_COLUMNS)
    else:
        text = DisplayUtils.format_table(rows, BENCH_COLUMNS)
    _write(args.output, text)
    return EXIT_OK


# ── Parser ──────────────────────────────────────────────────────────


def _add_anchor_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--anchors",
        type=points_type,
        default=None,
        help="Extra states whose coordinates join the lists, e.g. '0,0;5,-2'",
    )
    parser.add_argument(
        "--anchor-origin",
        action="store_true",
        help="Add the all-zeros state as an anchor",
    )
    parser.add_argument(
        "--dag-dir-tree",
        action="store_true",
        default=settings.dag_dir_tree,
        help="Share repeated direction-tree suffixes",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maze-policy",
        description="Compile (k,d)-mazes into optimal decision-tree policies and verify them",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="Warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate a seeded random maze")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--dimension", "-d", type=ranged_type(int, 1, 8), default=2)
    gen.add_argument("--obstacles", "-k", type=ranged_type(int, 0, 10000), default=3)
    gen.add_argument("--lo", type=int, default=-10)
    gen.add_argument("--hi", type=int, default=10)
    gen.add_argument("--max-extent", type=ranged_type(int, 1, 10**6), default=6)
    gen.add_argument("-o", "--output")
    gen.set_defaults(handler=cmd_gen)

    comp = sub.add_parser("compile", help="Compile a maze into a policy document")
    comp.add_argument("maze")
    comp.add_argument("-o", "--output")
    _add_anchor_flags(comp)
    comp.set_defaults(handler=cmd_compile)

    ev = sub.add_parser("eval", help="Show the policy decision at one state")
    ev.add_argument("policy")
    ev.add_argument("--state", type=point_type, required=True)
    ev.add_argument("--maze", help="Maze document the policy must have been compiled from")
    ev.set_defaults(handler=cmd_eval)

    sim = sub.add_parser("simulate", help="Run one episode and write its trace")
    sim.add_argument("policy")
    sim.add_argument("--state", type=point_type, required=True)
    sim.add_argument("--maze")
    sim.add_argument("--alpha", type=alpha_type, default=Fraction(0))
    sim.add_argument("--seed", type=int)
    sim.add_argument("--max-steps", type=ranged_type(int, 1, 10**12), default=None)
    sim.add_argument("-o", "--output")
    sim.set_defaults(handler=cmd_simulate)

    ver = sub.add_parser("verify", help="Check a compiled policy against the BFS oracle")
    ver.add_argument("maze")
    ver.add_argument("--policy", help="Verify this policy document instead of a fresh compile")
    ver.add_argument("--padding", type=ranged_type(int, 1, 1000), default=None)
    ver.add_argument("--alpha", type=alpha_type, default=None)
    ver.add_argument("--episodes", type=ranged_type(int, 1, 10**7), default=None)
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--workers", type=ranged_type(int, 1, 256), default=1)
    ver.add_argument("--format", choices=["table", "json", "csv"], default="table")
    ver.add_argument("-o", "--output")
    _add_anchor_flags(ver)
    ver.set_defaults(handler=cmd_verify)

    ren = sub.add_parser("render", help="Draw a policy tree (DOT) or a 2D maze (SVG)")
    ren.add_argument("--format", choices=["dot", "svg"], required=True)
    ren.add_argument("--policy")
    ren.add_argument("--maze")
    ren.add_argument("--trace")
    ren.add_argument("-o", "--output", help="Output file, or a directory to write <input name><extension> into")
    ren.set_defaults(handler=cmd_render)

    bench = sub.add_parser("bench", help="Depth, size and step-time sweep over random mazes")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--mazes", type=ranged_type(int, 1, 100000), default=10)
    bench.add_argument("--dimensions", type=int_list_type, default=[1, 2, 3])
    bench.add_argument("--obstacles", type=int_list_type, default=[1, 4, 16])
    bench.add_argument("--lo", type=int, default=-10)
    bench.add_argument("--hi", type=int, default=10)
    bench.add_argument("--max-extent", type=ranged_type(int, 1, 10**6), default=6)
    bench.add_argument("--samples", type=ranged_type(int, 1, 10**6), default=100)
    bench.add_argument("--dag-dir-tree", action="store_true", default=settings.dag_dir_tree)
    bench.add_argument("--format", choices=["table", "json", "csv"], default="csv")
    bench.add_argument("-o", "--output")
    bench.set_defaults(handler=cmd_bench)

    return parser


def configure_logging(args: argparse.Namespace) -> None:
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = getattr(logging, settings.log_level, logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv`` and dispatch; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    if args.command == "simulate" and args.alpha and args.seed is None:
        parser.print_usage(sys.stderr)
        print("simulate: --seed is required when --alpha is non-zero", file=sys.stderr)
        return EXIT_USAGE

    configure_logging(args)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except (DocumentError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_IO
    except (ContractViolation, GenerationError, UnsupportedDimensionError, ValueError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE
    except MazePolicyError as e:
        logger.error(f"{args.command}: {type(e).__name__}: {e}")
        return EXIT_VERIFY_FAILED


def main() -> None:
    sys.exit(run())
