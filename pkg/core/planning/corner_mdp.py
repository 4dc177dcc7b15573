"""Reduced MDP over valid corners and its exact shortest-path solution."""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from core.grid.corner_grid import CornerGrid
from core.maze.model import Maze, Point

logger = logging.getLogger(__name__)

# Finite costs are exact ints; UNREACHABLE compares greater than all of them.
Cost = Union[int, float]
UNREACHABLE: float = math.inf


def is_reachable(value: Cost) -> bool:
    return value != UNREACHABLE


@dataclass(frozen=True)
class CornerMdp:
    """Corners with their "go to adjacent corner" actions and Manhattan edge costs."""

    grid: CornerGrid
    edges: Tuple[Tuple[Tuple[int, int], ...], ...]

    @property
    def goal_index(self) -> int:
        return self.grid.goal_index

    def out_degree(self, idx: int) -> int:
        return len(self.edges[idx])

    def edge_cost(self, src: int, dst: int) -> Optional[int]:
        for neighbor, cost in self.edges[src]:
            if neighbor == dst:
                return cost
        return None


@dataclass(frozen=True)
class CornerMdpSolution:
    """Optimal cost-to-goal and successor corner for every valid corner."""

    grid: CornerGrid
    values: Tuple[Cost, ...]
    successor: Tuple[Optional[int], ...]

    def value_of(self, corner: Point) -> Cost:
        return self.values[self.grid.index[corner]]

    def successor_of(self, corner: Point) -> Optional[Point]:
        nxt = self.successor[self.grid.index[corner]]
        return None if nxt is None else self.grid.corners[nxt]

    @property
    def unreachable_count(self) -> int:
        return sum(1 for v in self.values if not is_reachable(v))


def build(maze: Maze, grid: CornerGrid) -> CornerMdp:
    """Edges are exactly the adjacency relation of the grid."""
    edges = []
    for corner in grid.corners:
        edges.append(
            tuple((grid.index[nb], cost) for nb, cost in grid.adjacent_corners(corner))
        )
    edge_count = sum(len(e) for e in edges)
    logger.info(f"Corner MDP: {len(grid)} states, {edge_count} directed edges")
    return CornerMdp(grid=grid, edges=tuple(edges))


def solve(mdp: CornerMdp) -> CornerMdpSolution:
    """Dijkstra from the goal over the symmetric edge set.

    Successors are the lexicographically smallest neighbor on a shortest path.
    """
    grid = mdp.grid
    n = len(grid)
    values: List[Cost] = [UNREACHABLE] * n
    goal = mdp.goal_index
    values[goal] = 0
    queue: List[Tuple[int, int]] = [(0, goal)]

    while queue:
        dist, idx = heapq.heappop(queue)
        if dist > values[idx]:
            continue
        for neighbor, cost in mdp.edges[idx]:
            candidate = dist + cost
            if candidate < values[neighbor]:
                values[neighbor] = candidate
                heapq.heappush(queue, (candidate, neighbor))

    successor: List[Optional[int]] = [None] * n
    for idx in range(n):
        if idx == goal or not is_reachable(values[idx]):
            continue
        best = None
        for neighbor, cost in mdp.edges[idx]:
            if values[neighbor] + cost != values[idx]:
                continue
            if best is None or grid.corners[neighbor] < grid.corners[best]:
                best = neighbor
        successor[idx] = best

    unreachable = sum(1 for v in values if not is_reachable(v))
    if unreachable:
        logger.warning(f"{unreachable} of {n} corners cannot reach the goal")
    return CornerMdpSolution(grid=grid, values=tuple(values), successor=tuple(successor))


def bellman_check(mdp: CornerMdp, sol: CornerMdpSolution) -> List[str]:
    """Every violated solution invariant, one message per offending corner."""
    grid = mdp.grid
    violations: List[str] = []
    goal = mdp.goal_index
    if sol.values[goal] != 0:
        violations.append(f"goal value nonzero at {grid.corners[goal]}")
    if sol.successor[goal] is not None:
        violations.append(f"goal has a successor at {grid.corners[goal]}")

    for idx, corner in enumerate(grid.corners):
        if len(mdp.edges[idx]) > 2 * grid.maze.dimension:
            violations.append(f"out-degree above 2d at {corner}")
        for neighbor, cost in mdp.edges[idx]:
            if cost <= 0:
                violations.append(f"non-positive edge cost at {corner}")
            if mdp.edge_cost(neighbor, idx) != cost:
                violations.append(f"asymmetric edge at {corner}")
        if idx == goal:
            continue
        value = sol.values[idx]
        nxt = sol.successor[idx]
        if not is_reachable(value):
            if nxt is not None:
                violations.append(f"unreachable corner has a successor at {corner}")
            continue
        if nxt is None:
            violations.append(f"missing successor at {corner}")
            continue
        cost = mdp.edge_cost(idx, nxt)
        if cost is None:
            violations.append(f"successor not adjacent at {corner}")
            continue
        if value != cost + sol.values[nxt]:
            violations.append(f"Bellman inconsistency at {corner}")

    # Successor chains must strictly decrease in value, hence cannot cycle.
    for idx, corner in enumerate(grid.corners):
        seen = set()
        current = idx
        while current is not None and current != goal:
            if current in seen:
                violations.append(f"successor cycle through {corner}")
                break
            seen.add(current)
            current = sol.successor[current]
    return violations
