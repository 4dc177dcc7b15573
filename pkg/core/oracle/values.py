"""Brute-force ground truth on a finite window of the lattice.

Values here never consult corners, surfaces or the compiled tree; they are
the independent reference the rest of the package is checked against.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

import core.utils.settings as settings
from core.errors import ContractViolation, ConvergenceError
from core.maze.model import Action, Maze, Point
from core.planning.corner_mdp import UNREACHABLE, Cost

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Box:
    """Inclusive integer bounds [lo_i, hi_i] per feature."""

    lo: Point
    hi: Point

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi):
            raise ContractViolation("box bounds have different dimensions")
        for lo, hi in zip(self.lo, self.hi):
            if lo > hi:
                raise ContractViolation(f"empty box side [{lo}, {hi}]")

    @property
    def dimension(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def manhattan_diameter(self) -> int:
        return sum(hi - lo for lo, hi in zip(self.lo, self.hi))

    def contains(self, p: Sequence[int]) -> bool:
        return all(lo <= x <= hi for lo, x, hi in zip(self.lo, p, self.hi))

    def to_index(self, p: Sequence[int]) -> Tuple[int, ...]:
        return tuple(x - lo for x, lo in zip(p, self.lo))

    def expanded(self, amount: int) -> Box:
        return Box(
            tuple(lo - amount for lo in self.lo), tuple(hi + amount for hi in self.hi)
        )

    def states(self) -> Iterator[Point]:
        """Every lattice point in the box, lexicographic order."""
        return itertools.product(
            *(range(lo, hi + 1) for lo, hi in zip(self.lo, self.hi))
        )


def bounding_box(
    maze: Maze, extra_states: Iterable[Sequence[int]] = (), padding: int = 1
) -> Box:
    """Hull of obstacle corners, goal and extra states, grown by ``padding``."""
    if padding < 1:
        raise ContractViolation(f"padding must be >= 1, got {padding}")
    points: List[Sequence[int]] = [maze.goal]
    for obstacle in maze.obstacles:
        points.extend((obstacle.a, obstacle.b))
    points.extend(extra_states)
    lo = tuple(min(p[i] for p in points) - padding for i in range(maze.dimension))
    hi = tuple(max(p[i] for p in points) + padding for i in range(maze.dimension))
    return Box(lo, hi)


def obstacle_mask(maze: Maze, box: Box) -> np.ndarray:
    """Boolean array over the box, True strictly inside some obstacle."""
    shape = box.shape
    mask = np.zeros(shape, dtype=bool)
    for obstacle in maze.obstacles:
        inside = np.ones(shape, dtype=bool)
        for i in range(box.dimension):
            axis = np.arange(box.lo[i], box.hi[i] + 1)
            cond = (axis > obstacle.a[i]) & (axis < obstacle.b[i])
            view = [1] * box.dimension
            view[i] = shape[i]
            inside &= cond.reshape(view)
        mask |= inside
    return mask


@dataclass(frozen=True, eq=False)
class ValueField:
    """Exact optimal cost-to-goal for every free state in a box.

    ``distance`` holds -1 for free states that cannot reach the goal inside
    the box and for obstacle-interior states (told apart by ``obstacle``).
    """

    box: Box
    distance: np.ndarray = field(repr=False)
    obstacle: np.ndarray = field(repr=False)

    def is_obstacle(self, s: Point) -> bool:
        return bool(self.obstacle[self._index(s)])

    def value(self, s: Point) -> Optional[Cost]:
        """Exact value, UNREACHABLE, or None for an obstacle-interior state."""
        idx = self._index(s)
        if self.obstacle[idx]:
            return None
        d = int(self.distance[idx])
        return UNREACHABLE if d < 0 else d

    def free_states(self) -> Iterator[Point]:
        for s in self.box.states():
            if not self.obstacle[self.box.to_index(s)]:
                yield s

    def _index(self, s: Point) -> Tuple[int, ...]:
        if not self.box.contains(s):
            raise ContractViolation(f"state {s} lies outside the oracle box")
        return self.box.to_index(s)


def _dilate(frontier: np.ndarray) -> np.ndarray:
    """States one unit step away from any frontier state."""
    grown = np.zeros_like(frontier)
    for axis in range(frontier.ndim):
        head = [slice(None)] * frontier.ndim
        tail = [slice(None)] * frontier.ndim
        head[axis] = slice(1, None)
        tail[axis] = slice(None, -1)
        grown[tuple(head)] |= frontier[tuple(tail)]
        grown[tuple(tail)] |= frontier[tuple(head)]
    return grown


def bfs_values(maze: Maze, box: Box) -> ValueField:
    """Level-synchronous BFS from the goal over in-box free states.

    A state v precedes u under the reversed transition exactly when they
    are unit neighbours, both free and v is not the goal, so each BFS level
    is one dilation of the frontier.
    """
    if not box.contains(maze.goal):
        raise ContractViolation(f"goal {maze.goal} lies outside the oracle box")
    mask = obstacle_mask(maze, box)
    free = ~mask
    distance = np.full(box.shape, -1, dtype=np.int64)
    frontier = np.zeros(box.shape, dtype=bool)
    frontier[box.to_index(maze.goal)] = True
    distance[box.to_index(maze.goal)] = 0

    level = 0
    while frontier.any():
        level += 1
        frontier = _dilate(frontier) & free & (distance < 0)
        distance[frontier] = level

    logger.debug(
        f"BFS oracle on box {box.lo}..{box.hi}: {box.size} states, "
        f"max distance {int(distance.max())}"
    )
    return ValueField(box=box, distance=distance, obstacle=mask)


@dataclass(frozen=True, eq=False)
class NoisyValueField:
    """Optimal values of the uniformly noisy maze and the greedy action sets."""

    box: Box
    alpha: Fraction
    values: Dict[Point, Cost] = field(repr=False)
    greedy: Dict[Point, FrozenSet[Action]] = field(repr=False)
    iterations: int
    residual: Fraction

    def value(self, s: Point) -> Optional[Cost]:
        return self.values.get(tuple(s))


def noisy_values(
    maze: Maze,
    box: Box,
    alpha: Fraction,
    tolerance: Optional[Fraction] = None,
    max_iterations: Optional[int] = None,
) -> NoisyValueField:
    """Value iteration for the stay-in-place noise model, in exact rationals.

    The backup of action a at s is 1 + alpha V(s) + (1 - alpha) V(T(s, a)).
    Solving the self-loop out gives V(s) = min_a (1 + (1 - alpha) V(T(s, a))) / (1 - alpha)
    over the actions that move, which is the operator iterated here. Values
    start at 0 on the goal and UNREACHABLE elsewhere; sweeps are Jacobi
    style over the states whose neighbours changed, so results do not depend
    on visiting order. Iteration stops once a sweep changes nothing (residual
    0); ``tolerance`` bounds the Q-value gap admitted into a greedy set.
    """
    alpha = Fraction(alpha)
    if not 0 <= alpha < 1:
        raise ContractViolation(f"alpha must lie in [0, 1), got {alpha}")
    tolerance = settings.noisy_tolerance if tolerance is None else Fraction(tolerance)
    max_iterations = (
        settings.noisy_max_iterations if max_iterations is None else max_iterations
    )
    if not box.contains(maze.goal):
        raise ContractViolation(f"goal {maze.goal} lies outside the oracle box")

    mask = obstacle_mask(maze, box)
    free = [s for s in box.states() if not mask[box.to_index(s)]]
    stay = 1 - alpha

    def moves(s: Point) -> Iterator[Tuple[Action, Point]]:
        for a in maze.actions():
            nxt = maze.transition(s, a)
            if nxt != s and box.contains(nxt):
                yield a, nxt

    successors = {s: list(moves(s)) for s in free}
    predecessors: Dict[Point, List[Point]] = {s: [] for s in free}
    for s, outs in successors.items():
        for _, nxt in outs:
            predecessors[nxt].append(s)

    values: Dict[Point, Cost] = {s: UNREACHABLE for s in free}
    values[maze.goal] = Fraction(0)
    active = set(predecessors[maze.goal])
    iterations = 0
    residual: Fraction = Fraction(0)

    while active:
        if iterations >= max_iterations:
            raise ConvergenceError(iterations, residual)
        iterations += 1
        updates = {}
        residual = Fraction(0)
        for s in sorted(active):
            if s == maze.goal:
                continue
            best = min(
                (
                    (1 + stay * values[nxt]) / stay
                    for _, nxt in successors[s]
                    if values[nxt] != UNREACHABLE
                ),
                default=UNREACHABLE,
            )
            if best < values[s]:
                updates[s] = best
                if values[s] != UNREACHABLE:
                    residual = max(residual, values[s] - best)
        values.update(updates)
        active = {p for s in updates for p in predecessors[s]}
    # no state left to improve: exact fixed point
    residual = Fraction(0)

    greedy: Dict[Point, FrozenSet[Action]] = {}
    for s in free:
        if s == maze.goal:
            greedy[s] = frozenset(maze.actions())
            continue
        if values[s] == UNREACHABLE:
            greedy[s] = frozenset()
            continue
        q = {}
        for a in maze.actions():
            nxt = maze.transition(s, a)
            target = values.get(nxt, UNREACHABLE) if box.contains(nxt) else UNREACHABLE
            q[a] = (
                UNREACHABLE
                if target == UNREACHABLE
                else 1 + alpha * values[s] + stay * target
            )
        best = min(q.values())
        greedy[s] = frozenset(a for a, v in q.items() if v - best <= tolerance)

    logger.info(
        f"Noisy value iteration (alpha={alpha}) converged in {iterations} sweeps "
        f"over {len(free)} states"
    )
    return NoisyValueField(
        box=box,
        alpha=alpha,
        values=values,
        greedy=greedy,
        iterations=iterations,
        residual=residual,
    )


@dataclass(frozen=True)
class SoundnessReport:
    ok: bool
    worst_state: Optional[Point] = None
    inner_value: Optional[Cost] = None
    outer_value: Optional[Cost] = None


def box_soundness_check(
    maze: Maze, box: Box, values: Optional[ValueField] = None, growth: int = 2
) -> SoundnessReport:
    """Compare values on ``box`` with values on the box grown by ``growth``.

    Disagreement means optimal paths leave the window, so the window is too
    small to serve as ground truth.
    """
    inner = values if values is not None else bfs_values(maze, box)
    outer = bfs_values(maze, box.expanded(growth))
    worst: Optional[Point] = None
    worst_gap: float = 0
    for s in inner.free_states():
        a, b = inner.value(s), outer.value(s)
        if a == b:
            continue
        gap = abs(a - b) if a != UNREACHABLE and b != UNREACHABLE else UNREACHABLE
        if worst is None or gap > worst_gap:
            worst, worst_gap = s, gap
    if worst is None:
        return SoundnessReport(ok=True)
    logger.warning(
        f"Oracle box {box.lo}..{box.hi} looks too small: value at {worst} "
        f"is {inner.value(worst)} inside vs {outer.value(worst)} outside"
    )
    return SoundnessReport(
        ok=False,
        worst_state=worst,
        inner_value=inner.value(worst),
        outer_value=outer.value(worst),
    )
