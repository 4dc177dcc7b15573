"""Coordinate lists, surfaces, corners and corner adjacency."""

from __future__ import annotations

import bisect
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from core.errors import ContractViolation
from core.grid.segments import NEG_INF, POS_INF, Segment, Surface
from core.maze.model import Maze, Point

logger = logging.getLogger(__name__)

CoordinateList = Tuple[int, ...]


def build_lists(
    maze: Maze, anchors: Optional[Sequence[Point]] = None
) -> List[CoordinateList]:
    """Sorted, deduplicated per-feature coordinates of obstacles, goal and anchors."""
    lists = []
    for i in range(maze.dimension):
        values = {maze.goal[i]}
        for obstacle in maze.obstacles:
            values.add(obstacle.a[i])
            values.add(obstacle.b[i])
        for anchor in anchors or ():
            if len(anchor) != maze.dimension:
                raise ContractViolation(
                    f"anchor {tuple(anchor)} has dimension {len(anchor)}, "
                    f"maze has {maze.dimension}"
                )
            values.add(int(anchor[i]))
        lists.append(tuple(sorted(values)))
    return lists


def surface(lists: Sequence[CoordinateList], x: Point) -> Surface:
    """Singleton where x_i is a list value, else the tightest neighbors."""
    if len(x) != len(lists):
        raise ContractViolation(
            f"point {tuple(x)} has dimension {len(x)}, lists have {len(lists)}"
        )
    segments = []
    for values, xi in zip(lists, x):
        pos = bisect.bisect_left(values, xi)
        if pos < len(values) and values[pos] == xi:
            segments.append(Segment.singleton(xi))
            continue
        lo = values[pos - 1] if pos > 0 else NEG_INF
        hi = values[pos] if pos < len(values) else POS_INF
        segments.append(Segment.open(lo, hi))
    return tuple(segments)


def finite_corners_of_surface(s: Surface) -> List[Point]:
    """Finite corners of a surface in lexicographic order (1 to 2^d of them)."""
    return [tuple(c) for c in itertools.product(*(seg.finite_endpoints() for seg in s))]


def segment_blocked(maze: Maze, c: Point, feature: int, u: int, w: int) -> bool:
    """True iff some integer point strictly between u and w on ``feature`` is in an obstacle.

    The other coordinates are taken from ``c``. Interval logic only, so the
    cost is O(k * d) whatever the gap.
    """
    lo, hi = min(u, w), max(u, w)
    for obstacle in maze.obstacles:
        if not all(
            obstacle.a[j] < c[j] < obstacle.b[j]
            for j in range(maze.dimension)
            if j != feature
        ):
            continue
        # integers strictly inside both (a_i, b_i) and (lo, hi)
        if max(obstacle.a[feature], lo) + 1 <= min(obstacle.b[feature], hi) - 1:
            return True
    return False


@dataclass(frozen=True)
class CornerGrid:
    """Valid (finite, obstacle-free) corners of a maze, indexed as MDP states."""

    maze: Maze
    lists: Tuple[CoordinateList, ...]
    corners: Tuple[Point, ...]
    excluded_count: int
    index: Dict[Point, int] = field(compare=False, repr=False)

    @property
    def total_count(self) -> int:
        """Number of finite corners, obstacle interiors included."""
        return math.prod(len(values) for values in self.lists)

    @property
    def extended_count(self) -> int:
        """Corner count over the sentinel-extended lists."""
        return math.prod(len(values) + 2 for values in self.lists)

    @property
    def goal_index(self) -> int:
        return self.index[self.maze.goal]

    def __len__(self) -> int:
        return len(self.corners)

    def is_corner(self, p: Point) -> bool:
        return p in self.index

    def surface(self, x: Point) -> Surface:
        return surface(self.lists, x)

    def is_adjacent(self, c1: Point, c2: Point) -> bool:
        """Corners one list step apart on a single feature with no obstacle between."""
        for c in (c1, c2):
            if self.maze.contains_obstacle(c):
                raise ContractViolation(f"corner {c} lies inside an obstacle")
        differing = [i for i in range(self.maze.dimension) if c1[i] != c2[i]]
        if len(differing) != 1:
            return False
        i = differing[0]
        values = self.lists[i]
        p1 = bisect.bisect_left(values, c1[i])
        p2 = bisect.bisect_left(values, c2[i])
        if p1 >= len(values) or values[p1] != c1[i]:
            return False
        if p2 >= len(values) or values[p2] != c2[i]:
            return False
        if abs(p1 - p2) != 1:
            return False
        return not segment_blocked(self.maze, c1, i, c1[i], c2[i])

    def adjacent_corners(self, c: Point) -> Iterator[Tuple[Point, int]]:
        """Adjacent valid corners of ``c`` with their edge cost, lexicographic order."""
        found = []
        for i, values in enumerate(self.lists):
            pos = bisect.bisect_left(values, c[i])
            for npos in (pos - 1, pos + 1):
                if not 0 <= npos < len(values):
                    continue
                neighbor = c[:i] + (values[npos],) + c[i + 1 :]
                if neighbor not in self.index:
                    continue
                if segment_blocked(self.maze, c, i, c[i], values[npos]):
                    continue
                found.append((neighbor, abs(values[npos] - c[i])))
        yield from sorted(found)


def enumerate_valid_corners(
    maze: Maze, lists: Sequence[CoordinateList]
) -> CornerGrid:
    """Index every finite corner that is not strictly inside an obstacle."""
    corners = []
    excluded = 0
    for candidate in itertools.product(*lists):
        if maze.contains_obstacle(candidate):
            excluded += 1
            continue
        corners.append(tuple(candidate))
    grid = CornerGrid(
        maze=maze,
        lists=tuple(tuple(values) for values in lists),
        corners=tuple(corners),
        excluded_count=excluded,
        index={c: idx for idx, c in enumerate(corners)},
    )
    logger.info(
        f"Corner grid: lists {[len(v) for v in lists]}, "
        f"{len(corners)} valid corners, {excluded} inside obstacles"
    )
    return grid
