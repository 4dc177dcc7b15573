"""Compile the corner-MDP solution into a decision-tree policy.

The grid phase locates the state's cell by median splits of each
coordinate list; the direction phase runs a chain tournament over the
cell's corners, comparing d(x, c) + V(c).
"""

from __future__ import annotations

import bisect
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

from core.errors import ContractViolation
from core.grid.corner_grid import CornerGrid, finite_corners_of_surface
from core.grid.segments import NEG_INF, POS_INF, Cell, Segment, format_surface
from core.maze.model import Maze, Point
from core.planning.corner_mdp import CornerMdpSolution, is_reachable
from core.policy.macros import MacroAction, direct_go_to
from core.policy.nodes import (
    DepthStats,
    DirNode,
    GridNode,
    Leaf,
    LeafKind,
    Node,
    PolicyTree,
    children,
    iter_unique_nodes,
)

logger = logging.getLogger(__name__)

Bounds = Tuple[Tuple[float, float], ...]


def grid_depth_bound(lists: Sequence[Sequence[int]]) -> int:
    return sum(2 * math.ceil(math.log2(len(values) + 1)) for values in lists)


def dir_depth_bound(dimension: int) -> int:
    return 2**dimension - 1


class PolicyTreeBuilder:
    """Builds one PolicyTree from a solved corner MDP."""

    def __init__(
        self,
        maze: Maze,
        grid: CornerGrid,
        solution: CornerMdpSolution,
        dag: bool = False,
    ):
        self.maze = maze
        self.grid = grid
        self.solution = solution
        self.dag = dag
        self.logger = logging.getLogger(__name__)

    def build(self) -> PolicyTree:
        bounds: Bounds = tuple((NEG_INF, POS_INF) for _ in range(self.maze.dimension))
        root = self.build_grid_tree(bounds, 0)
        stats = self._measure(root)

        if stats.grid_depth > stats.grid_bound:
            raise ContractViolation(
                f"grid depth {stats.grid_depth} exceeds bound {stats.grid_bound}"
            )
        if stats.dir_depth > stats.dir_bound:
            raise ContractViolation(
                f"direction depth {stats.dir_depth} exceeds bound {stats.dir_bound}"
            )
        self.logger.info(
            f"Policy tree: grid depth {stats.grid_depth}/{stats.grid_bound}, "
            f"dir depth {stats.dir_depth}/{stats.dir_bound}, "
            f"{stats.node_count} nodes ({stats.leaf_count} leaves)"
        )

        successor = {
            corner: self.solution.successor_of(corner) for corner in self.grid.corners
        }
        values = {
            corner: self.solution.values[idx]
            for idx, corner in enumerate(self.grid.corners)
        }
        return PolicyTree(
            dimension=self.maze.dimension,
            goal=self.maze.goal,
            lists=self.grid.lists,
            root=root,
            stats=stats,
            successor=successor,
            values=values,
            dag=self.dag,
        )

    def build_grid_tree(self, bounds: Bounds, feature: int) -> Node:
        """Median three-way split over the list values strictly inside ``bounds``."""
        while feature < self.maze.dimension:
            lo, hi = bounds[feature]
            values = self.grid.lists[feature]
            start = bisect.bisect_right(values, lo) if lo != NEG_INF else 0
            end = bisect.bisect_left(values, hi) if hi != POS_INF else len(values)
            inside = values[start:end]
            if inside:
                pivot = inside[(len(inside) - 1) // 2]
                return GridNode(
                    feature=feature,
                    pivot=pivot,
                    less=self.build_grid_tree(
                        _with_bounds(bounds, feature, lo, pivot), feature
                    ),
                    equal=self.build_grid_tree(
                        _with_bounds(bounds, feature, pivot, pivot), feature
                    ),
                    greater=self.build_grid_tree(
                        _with_bounds(bounds, feature, pivot, hi), feature
                    ),
                )
            feature += 1

        cell: Cell = tuple(Segment(lo, hi) for lo, hi in bounds)
        if all(segment.is_singleton for segment in cell):
            return self._corner_leaf(cell)
        candidates = [
            c
            for c in finite_corners_of_surface(cell)
            if self.grid.is_corner(c) and is_reachable(self.solution.value_of(c))
        ]
        return self.build_direction_tree(cell, candidates)

    def build_direction_tree(self, cell: Cell, candidates: List[Point]) -> Node:
        """Chain tournament over ``candidates``; ties go to the earlier corner."""
        if not candidates:
            self.logger.debug(f"No reachable corner on cell {format_surface(cell)}")
            return Leaf(LeafKind.UNREACHABLE, cell)
        memo: Optional[Dict[Tuple[Point, int], Node]] = {} if self.dag else None
        return self._tournament(cell, candidates[0], tuple(candidates[1:]), memo)

    def _tournament(
        self,
        cell: Cell,
        current: Point,
        rest: Tuple[Point, ...],
        memo: Optional[Dict[Tuple[Point, int], Node]],
    ) -> Node:
        if not rest:
            return self._go_to_leaf(cell, current)
        key = (current, len(rest))
        if memo is not None and key in memo:
            return memo[key]
        challenger = rest[0]
        node = DirNode(
            c1=current,
            c2=challenger,
            v1=int(self.solution.value_of(current)),
            v2=int(self.solution.value_of(challenger)),
            cell=cell,
            left=self._tournament(cell, current, rest[1:], memo),
            right=self._tournament(cell, challenger, rest[1:], memo),
        )
        # force linearization now so a bad cell fails at build time
        node.form
        if memo is not None:
            memo[key] = node
        return node

    def _corner_leaf(self, cell: Cell) -> Leaf:
        corner = tuple(int(segment.lo) for segment in cell)
        if corner == self.maze.goal:
            return Leaf(LeafKind.AT_GOAL, cell)
        if not self.grid.is_corner(corner):
            # strictly inside an obstacle
            return Leaf(LeafKind.UNREACHABLE, cell)
        nxt = self.solution.successor_of(corner)
        if nxt is None:
            return Leaf(LeafKind.UNREACHABLE, cell)
        return Leaf(
            LeafKind.CORNER_STEP, cell, target=nxt, macros=tuple(direct_go_to(corner, nxt))
        )

    def _go_to_leaf(self, cell: Cell, target: Point) -> Leaf:
        macros = []
        for i, segment in enumerate(cell):
            if segment.is_singleton:
                continue
            direction = -1 if target[i] == segment.lo else 1
            macros.append(MacroAction(i, direction, target[i]))
        return Leaf(LeafKind.GO_TO_CORNER, cell, target=target, macros=tuple(macros))

    def _measure(self, root: Node) -> DepthStats:
        memo: Dict[int, Tuple[int, int, int]] = {}

        def depths(node: Node) -> Tuple[int, int, int]:
            if id(node) in memo:
                return memo[id(node)]
            kids = children(node)
            if not kids:
                result = (0, 0, 0)
            else:
                sub = [depths(child) for child in kids]
                result = (
                    max(s[0] for s in sub) + (1 if isinstance(node, GridNode) else 0),
                    max(s[1] for s in sub) + (1 if isinstance(node, DirNode) else 0),
                    max(s[2] for s in sub) + 1,
                )
            memo[id(node)] = result
            return result

        grid_depth, dir_depth, total = depths(root)
        tree_nodes = list(iter_unique_nodes(root))
        return DepthStats(
            grid_depth=grid_depth,
            dir_depth=dir_depth,
            total_depth=total,
            node_count=len(tree_nodes),
            leaf_count=sum(1 for n in tree_nodes if isinstance(n, Leaf)),
            grid_bound=grid_depth_bound(self.grid.lists),
            dir_bound=dir_depth_bound(self.maze.dimension),
        )


def _with_bounds(bounds: Bounds, feature: int, lo, hi) -> Bounds:
    return bounds[:feature] + ((lo, hi),) + bounds[feature + 1 :]


def build_policy_tree(
    maze: Maze, grid: CornerGrid, solution: CornerMdpSolution, dag: bool = False
) -> PolicyTree:
    return PolicyTreeBuilder(maze, grid, solution, dag=dag).build()
