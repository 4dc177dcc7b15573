"""Long acceptance sweeps over seeded random mazes.

Run explicitly: ``uv run pytest tests/integration -v``.
"""

from fractions import Fraction

import numpy as np
import pytest

from core.io.generator import GeneratorConfig, generate_maze
from core.oracle.values import bfs_values, bounding_box
from core.oracle.verification import verify_maze
from core.planning.corner_mdp import UNREACHABLE
from core.policy.compiler import compile_policy
from core.policy.runtime import monte_carlo_cost, noisy_value
from tests.conftest import make_m0

SWEEP = [
    (seed, d, k)
    for d in (1, 2, 3)
    for k in range(1, 7)
    for seed in range(12)
]

NOISE_SWEEP = [
    (seed, alpha)
    for seed in range(10)
    for alpha in (Fraction(1, 4), Fraction(1, 2))
]


def _sweep_maze(seed, dimension, k):
    return generate_maze(
        GeneratorConfig(seed=seed, dimension=dimension, obstacle_count=k, coord_lo=-10, coord_hi=10)
    )


@pytest.mark.parametrize("seed,dimension,k", SWEEP)
def test_random_maze_is_verified(seed, dimension, k):
    """Optimality, corner values and surface argmin against the oracle."""
    report = verify_maze(_sweep_maze(seed, dimension, k), seed=seed)
    assert report.passed, report.failures


@pytest.mark.parametrize("seed,dimension,k", SWEEP)
def test_anchors_keep_optimality(seed, dimension, k):
    """Same mazes recompiled with the origin and one random free state as anchors."""
    maze = _sweep_maze(seed, dimension, k)
    rng = np.random.Generator(np.random.PCG64(seed))
    candidates = [tuple(0 for _ in range(dimension))]
    candidates += [tuple(int(v) for v in rng.integers(-12, 13, size=dimension)) for _ in range(20)]
    anchors = [p for p in candidates if not maze.contains_obstacle(p)][:2]
    report = verify_maze(maze, anchors=anchors, seed=seed)
    assert report.passed, report.failures


def test_monte_carlo_cost_on_m0():
    """Mean noisy cost from (7,0) approaches 9 / (1 - 1/2)."""
    maze = make_m0()
    tree = compile_policy(maze).tree
    mean = monte_carlo_cost(maze, tree, (7, 0), Fraction(1, 2), episodes=10_000, seed=2024)
    assert abs(mean - 18) / 18 <= Fraction(3, 100)


@pytest.mark.parametrize("seed,alpha", NOISE_SWEEP)
def test_noise_law_on_random_mazes(seed, alpha):
    """Noisy values, greedy membership, and Monte Carlo means from five starts."""
    maze = generate_maze(GeneratorConfig(seed=300 + seed, dimension=2, obstacle_count=3))
    report = verify_maze(maze, alpha=alpha, episodes=10_000, seed=seed)
    assert report.passed, report.failures

    tree = compile_policy(maze).tree
    oracle = bfs_values(maze, bounding_box(maze))
    reachable = [
        s for s in oracle.free_states() if s != maze.goal and oracle.value(s) != UNREACHABLE
    ]
    rng = np.random.Generator(np.random.PCG64(seed))
    starts = [reachable[int(i)] for i in rng.choice(len(reachable), size=5, replace=False)]
    for start in starts:
        expected = noisy_value(oracle.value(start), alpha)
        mean = monte_carlo_cost(maze, tree, start, alpha, episodes=10_000, seed=seed)
        assert abs(mean - expected) / expected <= Fraction(3, 100), start


@pytest.mark.parametrize("dag", [False, True])
def test_depth_bounds_with_many_obstacles(dag):
    maze = generate_maze(
        GeneratorConfig(seed=50, dimension=2, obstacle_count=50, coord_lo=-100, coord_hi=100, max_extent=15)
    )
    stats = compile_policy(maze, dag=dag).tree.stats
    assert stats.grid_depth <= stats.grid_bound
    assert stats.dir_depth <= stats.dir_bound
    assert stats.total_depth <= 31
