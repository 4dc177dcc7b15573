"""Tests for the verification suite run by ``verify``."""

from fractions import Fraction

import pytest

from core.maze.model import Maze
from core.oracle.verification import (
    build_context,
    check_box_soundness,
    check_corner_values,
    check_direct_paths,
    check_surface_argmin,
    run_checks,
    verify_maze,
)
from core.policy.compiler import compile_policy


class TestVerifyMaze:
    """Full suite on known mazes."""

    def test_m0_passes(self, m0):
        report = verify_maze(m0)
        assert report.passed, report.failures
        names = [r.name for r in report.results]
        assert "episode_optimality" in names
        assert "noisy_values" not in names

    def test_ring_passes(self, ring):
        assert verify_maze(ring).passed

    def test_three_dimensions(self):
        maze = Maze.create(
            goal=(0, 0, 0), obstacles=[((-1, -1, 1), (2, 2, 3)), ((1, -3, -2), (4, 0, 2))]
        )
        assert verify_maze(maze).passed

    def test_with_anchors_and_shared_trees(self, m0):
        assert verify_maze(m0, anchors=[(7, -2)], dag=True).passed

    def test_noise_checks(self, m0):
        report = verify_maze(m0, alpha=Fraction(1, 2), episodes=2000, seed=5)
        names = [r.name for r in report.results]
        assert {"noisy_values", "noisy_greedy", "noisy_monte_carlo"} <= set(names)
        assert report.passed, report.failures

    def test_deterministic(self, m0):
        assert verify_maze(m0).as_rows() == verify_maze(m0).as_rows()

    def test_foreign_tree_fails(self, m0):
        foreign = compile_policy(Maze.create(goal=(0, 0))).tree
        report = verify_maze(m0, tree=foreign)
        assert not report.passed
        failed = {r.name for r in report.failures}
        assert "tree_matches_reference" in failed
        assert "episode_optimality" in failed


class TestIndividualChecks:
    """Checks are usable one by one."""

    @pytest.fixture
    def ctx(self, m0):
        return build_context(m0)

    def test_corner_values(self, ctx):
        result = check_corner_values(ctx)
        assert result.passed
        assert result.detail == "20 checked"

    def test_surface_argmin(self, ctx):
        assert check_surface_argmin(ctx).passed

    def test_direct_paths_skip_goal(self, ctx):
        result = check_direct_paths(ctx)
        assert result.passed, result.detail
        assert "(0, 0)->" not in result.detail

    def test_direct_paths_goal_beside_corners(self):
        maze = Maze.create(goal=(1, 0), obstacles=[((1, -2), (4, 2))])
        assert check_direct_paths(build_context(maze)).passed

    def test_direct_paths_sampled(self, ctx):
        ctx.direct_path_samples = 10
        assert check_direct_paths(ctx).passed

    def test_box_soundness(self, ctx):
        assert check_box_soundness(ctx).passed

    def test_run_checks_order(self, ctx):
        report = run_checks(ctx)
        assert report.results[0].name == "maze_valid"
        assert report.results[-1].name == "direct_paths"
