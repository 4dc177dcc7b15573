"""The invariant suite run by ``verify``: compiled policy vs the BFS oracle.

Each check is a plain function over a VerificationContext and returns a
CheckResult; ``verify_maze`` runs them in a fixed order so reports are
identical from run to run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

import core.utils.settings as settings
from core.errors import BlockedMoveError, MazePolicyError
from core.grid.corner_grid import finite_corners_of_surface
from core.grid.segments import surface_contains
from core.maze.model import Maze, Point, manhattan
from core.oracle.values import (
    Box,
    NoisyValueField,
    ValueField,
    bfs_values,
    box_soundness_check,
    bounding_box,
    noisy_values,
)
from core.planning.corner_mdp import UNREACHABLE, bellman_check, is_reachable
from core.policy.compiler import Compilation, compile_policy
from core.policy.macros import MacroAction, direct_go_to
from core.policy.nodes import LeafKind, PolicyTree
from core.policy.runtime import (
    EpisodeStatus,
    Trace,
    first_action,
    monte_carlo_cost,
    noisy_value,
    pi_tilde,
    run_episodes,
)

logger = logging.getLogger(__name__)

# Offending states quoted per failed check.
MAX_EXAMPLES = 3
MC_RELATIVE_TOLERANCE = Fraction(3, 100)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def as_rows(self) -> List[Dict[str, object]]:
        return [
            {"check": r.name, "passed": r.passed, "detail": r.detail}
            for r in self.results
        ]


@dataclass(eq=False)
class VerificationContext:
    """Compiled policy, oracle box and lazily computed ground truth."""

    compilation: Compilation
    box: Box
    tree: PolicyTree
    alpha: Optional[Fraction] = None
    episodes: int = 0
    seed: int = 0
    direct_path_samples: int = 2000
    workers: int = 1

    @property
    def maze(self) -> Maze:
        return self.compilation.maze

    @cached_property
    def oracle(self) -> ValueField:
        return bfs_values(self.maze, self.box)

    @cached_property
    def free_states(self) -> List[Point]:
        return list(self.oracle.free_states())

    @cached_property
    def traces(self) -> List[Trace]:
        return run_episodes(self.maze, self.tree, self.free_states, workers=self.workers)

    @cached_property
    def noisy(self) -> NoisyValueField:
        return noisy_values(self.maze, self.box, self.alpha)


def _result(name: str, bad: Sequence[str], total: int) -> CheckResult:
    if not bad:
        return CheckResult(name, True, f"{total} checked")
    shown = "; ".join(bad[:MAX_EXAMPLES])
    more = f" (+{len(bad) - MAX_EXAMPLES} more)" if len(bad) > MAX_EXAMPLES else ""
    return CheckResult(name, False, f"{len(bad)}/{total} failed: {shown}{more}")


def check_maze_valid(ctx: VerificationContext) -> CheckResult:
    return _result("maze_valid", ctx.maze.validate(), 1)


def check_corner_bellman(ctx: VerificationContext) -> CheckResult:
    comp = ctx.compilation
    return _result("corner_bellman", bellman_check(comp.mdp, comp.solution), len(comp.grid))


def check_corner_values(ctx: VerificationContext) -> CheckResult:
    """Corner-MDP values equal oracle values at every valid corner."""
    comp = ctx.compilation
    bad = []
    for idx, corner in enumerate(comp.grid.corners):
        expected = ctx.oracle.value(corner)
        if comp.solution.values[idx] != expected:
            bad.append(f"{corner}: corner MDP {comp.solution.values[idx]}, oracle {expected}")
    return _result("corner_values", bad, len(comp.grid))


def check_surface_argmin(ctx: VerificationContext) -> CheckResult:
    """Oracle value = min over valid surface corners of d(s, c) + V(c)."""
    grid, solution = ctx.compilation.grid, ctx.compilation.solution
    bad = []
    for s in ctx.free_states:
        costs = [
            manhattan(s, c) + solution.value_of(c)
            for c in finite_corners_of_surface(grid.surface(s))
            if grid.is_corner(c) and is_reachable(solution.value_of(c))
        ]
        best = min(costs) if costs else UNREACHABLE
        if best != ctx.oracle.value(s):
            bad.append(f"{s}: surface argmin {best}, oracle {ctx.oracle.value(s)}")
    return _result("surface_argmin", bad, len(ctx.free_states))


def check_tree_matches_reference(ctx: VerificationContext) -> CheckResult:
    """The tree's leaf decision equals the reference policy at every state."""
    comp = ctx.compilation
    bad = []
    for s in ctx.free_states:
        leaf, _ = ctx.tree.evaluate(s)
        reference = pi_tilde(comp.maze, comp.grid, comp.solution, s)
        if (leaf.kind, leaf.target) != (reference.kind, reference.target):
            bad.append(f"{s}: tree {leaf.describe()}, reference {reference.kind.value} {reference.target}")
    return _result("tree_matches_reference", bad, len(ctx.free_states))


def check_leaf_cells(ctx: VerificationContext) -> CheckResult:
    """Each state lands in a leaf whose cell contains it; go-to leaves cover its surface."""
    grid = ctx.compilation.grid
    bad = []
    for s in ctx.free_states:
        leaf, _ = ctx.tree.evaluate(s)
        if not surface_contains(leaf.cell, s):
            bad.append(f"{s}: outside its leaf cell")
        elif leaf.kind is LeafKind.GO_TO_CORNER and leaf.cell != grid.surface(s):
            bad.append(f"{s}: leaf cell differs from its surface")
    return _result("leaf_cells", bad, len(ctx.free_states))


def check_episode_optimality(ctx: VerificationContext) -> CheckResult:
    """Episode cost equals the oracle value at every free state in the box."""
    bad = []
    for s, trace in zip(ctx.free_states, ctx.traces):
        expected = ctx.oracle.value(s)
        if trace.status is EpisodeStatus.UNREACHABLE:
            if expected != UNREACHABLE:
                bad.append(f"{s}: policy gives up, oracle {expected}")
        elif trace.total_cost != expected:
            bad.append(f"{s}: episode cost {trace.total_cost}, oracle {expected}")
        elif trace.final_state != ctx.maze.goal:
            bad.append(f"{s}: episode ended at {trace.final_state}")
    return _result("episode_optimality", bad, len(ctx.free_states))


def check_waypoint_cost(ctx: VerificationContext) -> CheckResult:
    """Episode cost telescopes over the corner waypoint chain."""
    bad = [
        f"{t.start}: cost {t.total_cost}, waypoints {t.waypoint_cost()}"
        for t in ctx.traces
        if t.status is EpisodeStatus.REACHED_GOAL and t.total_cost != t.waypoint_cost()
    ]
    return _result("waypoint_cost", bad, len(ctx.traces))


def check_single_descent(ctx: VerificationContext) -> CheckResult:
    """An episode descends the tree once, whatever its length."""
    limit = ctx.tree.stats.total_depth
    bad = [
        f"{t.start}: {t.tree_node_visits} node visits, depth {limit}"
        for t in ctx.traces
        if t.tree_node_visits > limit
    ]
    return _result("single_descent", bad, len(ctx.traces))


def check_depth_bounds(ctx: VerificationContext) -> CheckResult:
    stats = ctx.tree.stats
    bad = []
    if stats.grid_depth > stats.grid_bound:
        bad.append(f"grid depth {stats.grid_depth} > {stats.grid_bound}")
    if stats.dir_depth > stats.dir_bound:
        bad.append(f"dir depth {stats.dir_depth} > {stats.dir_bound}")
    if stats.total_depth > stats.grid_bound + stats.dir_bound:
        bad.append(f"total depth {stats.total_depth} > {stats.grid_bound + stats.dir_bound}")
    return _result("depth_bounds", bad, 3)


def _replay(maze: Maze, s: Point, macros: Sequence[MacroAction]) -> int:
    steps = 0
    for macro in macros:
        while s[macro.feature] != macro.stop:
            moved = maze.transition(s, macro.action)
            if moved == s:
                raise BlockedMoveError(f"{macro.action} blocked at {s}")
            s = moved
            steps += 1
    return steps


def check_direct_paths(ctx: VerificationContext) -> CheckResult:
    """Straight macro paths to surface corners and between adjacent corners are never blocked."""
    grid = ctx.compilation.grid
    states = ctx.free_states
    if len(states) > ctx.direct_path_samples:
        rng = np.random.Generator(np.random.PCG64(ctx.seed))
        picks = np.sort(rng.choice(len(states), size=ctx.direct_path_samples, replace=False))
        states = [states[i] for i in picks]

    # the goal is absorbing and never executes a macro
    goal = ctx.maze.goal
    pairs = [
        (s, c)
        for s in states
        if s != goal
        for c in finite_corners_of_surface(grid.surface(s))
        if grid.is_corner(c)
    ]
    pairs += [
        (c, nb)
        for c in grid.corners
        if c != goal
        for nb, _ in grid.adjacent_corners(c)
    ]

    bad = []
    for s, t in pairs:
        try:
            steps = _replay(ctx.maze, s, direct_go_to(s, t))
        except BlockedMoveError as e:
            bad.append(f"{s}->{t}: {e}")
            continue
        if steps != manhattan(s, t):
            bad.append(f"{s}->{t}: {steps} steps, distance {manhattan(s, t)}")
    return _result("direct_paths", bad, len(pairs))


def check_box_soundness(ctx: VerificationContext) -> CheckResult:
    report = box_soundness_check(ctx.maze, ctx.box, ctx.oracle)
    if report.ok:
        return CheckResult("box_soundness", True, f"box {ctx.box.lo}..{ctx.box.hi}")
    return CheckResult(
        "box_soundness",
        False,
        f"{report.worst_state}: {report.inner_value} in box, {report.outer_value} in grown box",
    )


def check_noisy_values(ctx: VerificationContext) -> CheckResult:
    """Noisy optimal values are the deterministic ones scaled by 1/(1 - alpha)."""
    bad = []
    for s in ctx.free_states:
        expected = noisy_value(ctx.oracle.value(s), ctx.alpha)
        if ctx.noisy.value(s) != expected:
            bad.append(f"{s}: noisy {ctx.noisy.value(s)}, expected {expected}")
    return _result("noisy_values", bad, len(ctx.free_states))


def check_noisy_greedy(ctx: VerificationContext) -> CheckResult:
    """The tree's action is greedy for the noisy values wherever it moves."""
    bad = []
    checked = 0
    for s in ctx.free_states:
        action = first_action(ctx.tree, s)
        if action is None:
            continue
        checked += 1
        if action not in ctx.noisy.greedy.get(s, frozenset()):
            bad.append(f"{s}: {action} not greedy")
    return _result("noisy_greedy", bad, checked)


def check_noisy_monte_carlo(ctx: VerificationContext) -> CheckResult:
    """Mean noisy episode cost from the farthest state matches V/(1 - alpha)."""
    reachable = [
        (ctx.oracle.value(s), s)
        for s in ctx.free_states
        if is_reachable(ctx.oracle.value(s))
    ]
    value, start = max(reachable, key=lambda vs: (vs[0], tuple(-x for x in vs[1])))
    if value == 0:
        return CheckResult("noisy_monte_carlo", True, "goal is the only reachable state")
    expected = noisy_value(value, ctx.alpha)
    mean = monte_carlo_cost(ctx.maze, ctx.tree, start, ctx.alpha, ctx.episodes, ctx.seed)
    gap = abs(mean - expected) / expected
    detail = (
        f"start {start}: mean {float(mean):.4f} over {ctx.episodes} episodes, "
        f"expected {float(expected):.4f}"
    )
    return CheckResult("noisy_monte_carlo", gap <= MC_RELATIVE_TOLERANCE, detail)


DETERMINISTIC_CHECKS: List[Callable[[VerificationContext], CheckResult]] = [
    check_maze_valid,
    check_corner_bellman,
    check_box_soundness,
    check_corner_values,
    check_surface_argmin,
    check_tree_matches_reference,
    check_leaf_cells,
    check_episode_optimality,
    check_waypoint_cost,
    check_single_descent,
    check_depth_bounds,
    check_direct_paths,
]

NOISY_CHECKS: List[Callable[[VerificationContext], CheckResult]] = [
    check_noisy_values,
    check_noisy_greedy,
    check_noisy_monte_carlo,
]


def build_context(
    maze: Maze,
    anchors: Sequence[Point] = (),
    tree: Optional[PolicyTree] = None,
    padding: Optional[int] = None,
    dag: bool = False,
    alpha: Optional[Fraction] = None,
    episodes: Optional[int] = None,
    seed: int = 0,
    workers: int = 1,
) -> VerificationContext:
    """Compile ``maze`` and size the oracle box; ``tree`` replaces the fresh policy."""
    compilation = compile_policy(maze, anchors, dag=dag)
    padding = settings.padding if padding is None else padding
    box = bounding_box(maze, list(anchors), padding=padding)
    return VerificationContext(
        compilation=compilation,
        box=box,
        tree=tree if tree is not None else compilation.tree,
        alpha=None if alpha is None else Fraction(alpha),
        episodes=settings.mc_episodes if episodes is None else episodes,
        seed=seed,
        workers=workers,
    )


def run_checks(ctx: VerificationContext) -> VerificationReport:
    checks = list(DETERMINISTIC_CHECKS)
    if ctx.alpha is not None:
        checks += NOISY_CHECKS
    report = VerificationReport()
    for check in checks:
        try:
            result = check(ctx)
        except MazePolicyError as e:
            result = CheckResult(check.__name__.removeprefix("check_"), False, f"{type(e).__name__}: {e}")
        if not result.passed:
            logger.error(f"Check {result.name} failed: {result.detail}")
        else:
            logger.debug(f"Check {result.name} passed: {result.detail}")
        report.results.append(result)
    return report


def verify_maze(maze: Maze, **options) -> VerificationReport:
    """Compile and verify one maze; ``options`` are those of ``build_context``."""
    return run_checks(build_context(maze, **options))
