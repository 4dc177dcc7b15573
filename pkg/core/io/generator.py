"""Seeded random (k,d)-mazes for tests and benchmarks."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List

import numpy as np

from core.errors import ContractViolation, GenerationError
from core.maze.model import Maze, Obstacle

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    dimension: int = 2
    obstacle_count: int = 3
    coord_lo: int = -10
    coord_hi: int = 10
    max_extent: int = 6

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ContractViolation(f"dimension must be >= 1, got {self.dimension}")
        if self.obstacle_count < 0:
            raise ContractViolation(f"obstacle count must be >= 0, got {self.obstacle_count}")
        if self.coord_hi - self.coord_lo < 1:
            raise ContractViolation(
                f"coordinate range [{self.coord_lo}, {self.coord_hi}] is too narrow"
            )
        if self.max_extent < 1:
            raise ContractViolation(f"max extent must be >= 1, got {self.max_extent}")


def generate_maze(config: GeneratorConfig) -> Maze:
    """Sample obstacles, then a goal in free space.

    Obstacle corners are integers in [coord_lo, coord_hi] with extent between
    1 and ``max_extent`` on every feature. Overlapping obstacles are legal.
    The goal is resampled until it lies outside every obstacle interior.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    d = config.dimension
    lo, hi = config.coord_lo, config.coord_hi
    extent_cap = min(config.max_extent, hi - lo)

    obstacles: List[Obstacle] = []
    for _ in range(config.obstacle_count):
        extents = rng.integers(1, extent_cap, size=d, endpoint=True)
        starts = rng.integers(lo, hi - extents, endpoint=True)
        a = tuple(int(v) for v in starts)
        b = tuple(int(v) for v in starts + extents)
        obstacles.append(Obstacle(a, b))

    for attempt in range(1, MAX_ATTEMPTS + 1):
        goal = tuple(int(v) for v in rng.integers(lo, hi, size=d, endpoint=True))
        if not any(o.contains(goal) for o in obstacles):
            break
    else:
        raise GenerationError(
            f"no free goal found after {MAX_ATTEMPTS} attempts (seed {config.seed})"
        )

    maze = Maze(dimension=d, goal=goal, obstacles=tuple(obstacles))
    violations = maze.validate()
    if violations:
        raise GenerationError(f"generated maze is invalid: {'; '.join(violations)}")
    logger.debug(
        f"Generated maze seed={config.seed} d={d} k={len(obstacles)} goal={goal} "
        f"after {attempt} goal draw(s)"
    )
    return maze
