"""Executing compiled policies on the maze MDP, with optional uniform noise.

An episode descends the tree once at the start state. Every later decision
comes from the corner successor table, so the decision cost per step is
O(1) however long the episode runs.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, List, NamedTuple, Optional, Sequence

import numpy as np

import core.utils.settings as settings
from core.errors import BlockedMoveError, ContractViolation, RunawayEpisodeError
from core.grid.corner_grid import CornerGrid, finite_corners_of_surface
from core.maze.model import Action, Maze, Point, manhattan
from core.oracle.values import bounding_box
from core.planning.corner_mdp import UNREACHABLE, Cost, CornerMdpSolution, is_reachable
from core.policy.macros import MacroAction, direct_go_to
from core.policy.nodes import LeafKind, PolicyTree

logger = logging.getLogger(__name__)


class EpisodeStatus(Enum):
    REACHED_GOAL = "reached_goal"
    UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class NoiseConfig:
    """Stay in place with probability ``alpha`` on every primitive step."""

    alpha: Fraction
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        if not 0 <= self.alpha < 1:
            raise ContractViolation(f"alpha must lie in [0, 1), got {self.alpha}")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


@dataclass
class Trace:
    """One executed episode."""

    states: List[Point]
    actions: List[Action] = field(default_factory=list)
    total_cost: int = 0
    tree_node_visits: int = 0
    corner_waypoints: List[Point] = field(default_factory=list)
    status: EpisodeStatus = EpisodeStatus.REACHED_GOAL
    alpha: Fraction = Fraction(0)
    seed: Optional[int] = None

    @property
    def start(self) -> Point:
        return self.states[0]

    @property
    def final_state(self) -> Point:
        return self.states[-1]

    def waypoint_cost(self) -> int:
        """d(s0, w1) + sum of d(w_j, w_j+1): the deterministic cost of the waypoint chain."""
        cost = 0
        previous = self.start
        for corner in self.corner_waypoints:
            cost += manhattan(previous, corner)
            previous = corner
        return cost


class Decision(NamedTuple):
    kind: LeafKind
    target: Optional[Point] = None


def default_max_steps(maze: Maze, s0: Point, alpha: Fraction = Fraction(0)) -> int:
    """factor x (oracle-box diameter + 1), scaled by ceil(1/(1-alpha)) x 10 under noise."""
    box = bounding_box(maze, [s0], padding=settings.padding)
    budget = settings.max_steps_factor * (box.manhattan_diameter + 1)
    if alpha:
        budget *= math.ceil(1 / (1 - Fraction(alpha))) * 10
    return budget


def pi_tilde(
    maze: Maze, grid: CornerGrid, solution: CornerMdpSolution, s: Point
) -> Decision:
    """Reference policy: follow the corner MDP at corners, else the best surface corner."""
    s = tuple(s)
    if s == maze.goal:
        return Decision(LeafKind.AT_GOAL)
    if grid.is_corner(s):
        nxt = solution.successor_of(s)
        if nxt is None:
            return Decision(LeafKind.UNREACHABLE)
        return Decision(LeafKind.CORNER_STEP, nxt)
    candidates = [
        c
        for c in finite_corners_of_surface(grid.surface(s))
        if grid.is_corner(c) and is_reachable(solution.value_of(c))
    ]
    if not candidates:
        return Decision(LeafKind.UNREACHABLE)
    best = min(candidates, key=lambda c: (manhattan(s, c) + solution.value_of(c), c))
    return Decision(LeafKind.GO_TO_CORNER, best)


def noisy_value(v: Cost, alpha: Fraction) -> Cost:
    """Expected cost under stay-in-place noise: v / (1 - alpha), exactly."""
    alpha = Fraction(alpha)
    if not 0 <= alpha < 1:
        raise ContractViolation(f"alpha must lie in [0, 1), got {alpha}")
    if v == UNREACHABLE:
        return UNREACHABLE
    return Fraction(v) / (1 - alpha)


class EpisodeRunner:
    """Runs one policy on one maze; ``stall`` decides whether a step is swallowed."""

    def __init__(
        self,
        maze: Maze,
        tree: PolicyTree,
        max_steps: int,
        stall: Optional[Callable[[], bool]] = None,
    ):
        self.maze = maze
        self.tree = tree
        self.max_steps = max_steps
        self.stall = stall
        self.logger = logging.getLogger(__name__)

    def run(self, s0: Point) -> Trace:
        s0 = tuple(s0)
        if self.maze.contains_obstacle(s0):
            raise ContractViolation(f"start state {s0} lies inside an obstacle")
        leaf, visits = self.tree.evaluate(s0)
        trace = Trace(states=[s0], tree_node_visits=visits)

        if leaf.kind is LeafKind.AT_GOAL:
            return trace
        if leaf.kind is LeafKind.UNREACHABLE:
            trace.status = EpisodeStatus.UNREACHABLE
            return trace

        self._execute(trace, leaf.macros)
        corner = leaf.target
        trace.corner_waypoints.append(corner)

        while corner != self.maze.goal:
            nxt = self.tree.successor.get(corner)
            if nxt is None:
                trace.status = EpisodeStatus.UNREACHABLE
                return trace
            self._execute(trace, direct_go_to(corner, nxt))
            corner = nxt
            trace.corner_waypoints.append(corner)
        return trace

    def _execute(self, trace: Trace, macros: Sequence[MacroAction]) -> None:
        s = trace.states[-1]
        for macro in macros:
            action = macro.action
            while s[macro.feature] != macro.stop:
                if trace.total_cost >= self.max_steps:
                    self.logger.warning(
                        f"Episode from {trace.start} hit max_steps={self.max_steps}"
                    )
                    raise RunawayEpisodeError(self.max_steps, s)
                trace.total_cost += 1
                trace.actions.append(action)
                if self.stall is not None and self.stall():
                    trace.states.append(s)
                    continue
                moved = self.maze.transition(s, action)
                if moved == s:
                    raise BlockedMoveError(f"action {action} blocked at {s}")
                s = moved
                trace.states.append(s)


def run_episode(
    maze: Maze, tree: PolicyTree, s0: Point, max_steps: Optional[int] = None
) -> Trace:
    if max_steps is None:
        max_steps = default_max_steps(maze, s0)
    return EpisodeRunner(maze, tree, max_steps).run(s0)


def run_noisy_episode(
    maze: Maze,
    tree: PolicyTree,
    s0: Point,
    noise: NoiseConfig,
    max_steps: Optional[int] = None,
) -> Trace:
    if max_steps is None:
        max_steps = default_max_steps(maze, s0, noise.alpha)
    rng = noise.generator()
    alpha = noise.alpha
    trace = EpisodeRunner(
        maze, tree, max_steps, stall=lambda: rng.random() < alpha
    ).run(s0)
    trace.alpha = alpha
    trace.seed = noise.seed
    return trace


def monte_carlo_cost(
    maze: Maze,
    tree: PolicyTree,
    s0: Point,
    alpha: Fraction,
    episodes: int,
    seed: int,
) -> Fraction:
    """Mean noisy episode cost; episode seeds are split off one root seed."""
    children = np.random.SeedSequence(seed).spawn(episodes)
    max_steps = default_max_steps(maze, s0, Fraction(alpha))
    total = 0
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        trace = EpisodeRunner(
            maze, tree, max_steps, stall=lambda rng=rng: rng.random() < alpha
        ).run(s0)
        total += trace.total_cost
    return Fraction(total, episodes)


def first_action(tree: PolicyTree, s: Point) -> Optional[Action]:
    """The primitive action the compiled policy takes at ``s`` (None at goal or if stuck)."""
    leaf, _ = tree.evaluate(s)
    if leaf.kind in (LeafKind.AT_GOAL, LeafKind.UNREACHABLE):
        return None
    for macro in leaf.macros:
        if s[macro.feature] != macro.stop:
            return macro.action
    return None


def run_episodes(
    maze: Maze,
    tree: PolicyTree,
    starts: Sequence[Point],
    max_steps: Optional[int] = None,
    workers: int = 1,
) -> List[Trace]:
    """Episodes from many starts over one shared tree, results in input order."""
    if workers <= 1:
        return [run_episode(maze, tree, s, max_steps) for s in starts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda s: run_episode(maze, tree, s, max_steps), starts))
