"""End-to-end compilation: maze -> lists -> corner MDP -> policy tree."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Sequence, Tuple

from core.grid.corner_grid import CornerGrid, build_lists, enumerate_valid_corners
from core.maze.model import Maze, Point
from core.planning import corner_mdp
from core.planning.corner_mdp import CornerMdp, CornerMdpSolution
from core.policy.nodes import PolicyTree
from core.policy.tree_builder import build_policy_tree

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Compilation:
    maze: Maze
    anchors: Tuple[Point, ...]
    grid: CornerGrid
    mdp: CornerMdp
    solution: CornerMdpSolution
    tree: PolicyTree
    seconds: float = field(default=0.0, compare=False)


def compile_policy(
    maze: Maze, anchors: Sequence[Point] = (), dag: bool = False
) -> Compilation:
    started = time.perf_counter()
    anchors = tuple(tuple(a) for a in anchors)
    lists = build_lists(maze, anchors)
    grid = enumerate_valid_corners(maze, lists)
    mdp = corner_mdp.build(maze, grid)
    solution = corner_mdp.solve(mdp)
    tree = build_policy_tree(maze, grid, solution, dag=dag)
    seconds = time.perf_counter() - started
    logger.info(
        f"Compiled d={maze.dimension} k={maze.k} maze in {seconds * 1000:.1f} ms"
        + (f" with {len(anchors)} anchor(s)" if anchors else "")
    )
    return Compilation(
        maze=maze,
        anchors=anchors,
        grid=grid,
        mdp=mdp,
        solution=solution,
        tree=tree,
        seconds=seconds,
    )
