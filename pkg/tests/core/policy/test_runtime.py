"""Tests for episode execution, the reference policy and the noise model."""

from fractions import Fraction

import pytest

from core.errors import ContractViolation, RunawayEpisodeError
from core.maze.model import Action, Maze
from core.policy.compiler import compile_policy
from core.policy.nodes import LeafKind
from core.policy.runtime import (
    EpisodeRunner,
    EpisodeStatus,
    NoiseConfig,
    default_max_steps,
    first_action,
    monte_carlo_cost,
    noisy_value,
    pi_tilde,
    run_episode,
    run_episodes,
    run_noisy_episode,
)


class TestRunEpisode:
    """Deterministic episodes on M0."""

    def test_detour_around_wall(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (7, 0))
        assert trace.total_cost == 9
        assert trace.status is EpisodeStatus.REACHED_GOAL
        assert trace.final_state == (0, 0)
        assert len(trace.states) == 10
        assert trace.corner_waypoints == [
            (6, 0),
            (6, -1),
            (3, -1),
            (1, -1),
            (0, -1),
            (0, 0),
        ]

    def test_cost_is_waypoint_sum(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (7, 0))
        assert trace.waypoint_cost() == trace.total_cost

    def test_start_at_goal(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (0, 0))
        assert trace.total_cost == 0
        assert trace.actions == []

    def test_go_to_corner_then_follow(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (2, -2))
        assert trace.total_cost == 4
        assert trace.corner_waypoints[0] == (1, -1)

    def test_single_descent(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (7, 0))
        assert trace.tree_node_visits <= m0_tree.stats.total_depth

    def test_long_detour_single_descent(self):
        # wall x = 0, |y| <= 59; the way round costs 52 + 60 + 60
        maze = Maze.create(goal=(2, 0), obstacles=[((-1, -60), (1, 60))])
        tree = compile_policy(maze).tree
        trace = run_episode(maze, tree, (-50, 0))
        assert trace.total_cost == 172
        assert len(trace.states) == 173
        assert trace.tree_node_visits <= tree.stats.total_depth

    def test_start_inside_obstacle(self, m0, m0_tree):
        with pytest.raises(ContractViolation):
            run_episode(m0, m0_tree, (4, 0))

    def test_runaway(self, m0, m0_tree):
        with pytest.raises(RunawayEpisodeError):
            EpisodeRunner(m0, m0_tree, max_steps=5).run((7, 0))

    def test_unreachable_start(self, ring, ring_compiled):
        trace = run_episode(ring, ring_compiled.tree, (10, 10))
        assert trace.status is EpisodeStatus.UNREACHABLE
        assert trace.total_cost == 0

    def test_inside_ring(self, ring, ring_compiled):
        trace = run_episode(ring, ring_compiled.tree, (1, 1))
        assert trace.total_cost == 2

    def test_default_budget(self, m0):
        # box [-1,8] x [-2,7]: diameter 18
        assert default_max_steps(m0, (7, 0)) == 10 * 19


class TestPiTilde:
    """The reference policy computed without the tree."""

    def test_decisions(self, m0, m0_compiled):
        grid, sol = m0_compiled.grid, m0_compiled.solution
        assert pi_tilde(m0, grid, sol, (2, -2)).target == (1, -1)
        assert pi_tilde(m0, grid, sol, (0, 0)).kind is LeafKind.AT_GOAL
        assert pi_tilde(m0, grid, sol, (7, 0)).target == (6, 0)
        assert pi_tilde(m0, grid, sol, (3, -1)).kind is LeafKind.CORNER_STEP

    def test_tree_agrees(self, m0, m0_compiled):
        grid, sol, tree = m0_compiled.grid, m0_compiled.solution, m0_compiled.tree
        for x in range(-2, 9):
            for y in range(-3, 8):
                if m0.contains_obstacle((x, y)):
                    continue
                leaf, _ = tree.evaluate((x, y))
                reference = pi_tilde(m0, grid, sol, (x, y))
                assert (leaf.kind, leaf.target) == (reference.kind, reference.target)


class TestFirstAction:
    def test_go_to_corner(self, m0_tree):
        assert first_action(m0_tree, (2, -2)) == Action(0, -1)

    def test_goal(self, m0_tree):
        assert first_action(m0_tree, (0, 0)) is None

    def test_at_corner(self, m0_tree):
        assert first_action(m0_tree, (3, -1)) == Action(0, -1)


class TestNoise:
    """Stay-in-place noise."""

    def test_noisy_value(self):
        assert noisy_value(9, Fraction(1, 2)) == 18
        assert noisy_value(0, Fraction(1, 3)) == 0
        assert noisy_value(4, Fraction(1, 4)) == Fraction(16, 3)
        assert noisy_value(float("inf"), Fraction(1, 2)) == float("inf")

    def test_alpha_out_of_range(self):
        with pytest.raises(ContractViolation):
            NoiseConfig(alpha=Fraction(1), seed=0)
        with pytest.raises(ContractViolation):
            noisy_value(3, Fraction(3, 2))

    def test_zero_noise_matches_deterministic(self, m0, m0_tree):
        plain = run_episode(m0, m0_tree, (7, 0))
        noisy = run_noisy_episode(m0, m0_tree, (7, 0), NoiseConfig(alpha=0, seed=3))
        assert noisy.states == plain.states
        assert noisy.total_cost == plain.total_cost

    def test_seeded_runs_repeat(self, m0, m0_tree):
        noise = NoiseConfig(alpha=Fraction(1, 2), seed=42)
        first = run_noisy_episode(m0, m0_tree, (7, 0), noise)
        second = run_noisy_episode(m0, m0_tree, (7, 0), noise)
        assert first.states == second.states
        assert first.total_cost >= 9
        assert first.final_state == (0, 0)

    def test_stalls_keep_waypoints(self, m0, m0_tree):
        plain = run_episode(m0, m0_tree, (7, 0))
        noisy = run_noisy_episode(
            m0, m0_tree, (7, 0), NoiseConfig(alpha=Fraction(1, 2), seed=7)
        )
        assert noisy.corner_waypoints == plain.corner_waypoints

    def test_noise_at_goal(self, m0, m0_tree):
        trace = run_noisy_episode(
            m0, m0_tree, (0, 0), NoiseConfig(alpha=Fraction(9, 10), seed=1)
        )
        assert trace.total_cost == 0

    def test_monte_carlo_mean(self, m0, m0_tree):
        mean = monte_carlo_cost(m0, m0_tree, (7, 0), Fraction(1, 2), episodes=2000, seed=0)
        assert abs(mean - 18) / 18 <= Fraction(3, 100)


class TestRunEpisodes:
    def test_parallel_matches_sequential(self, m0, m0_tree):
        starts = [(7, 0), (2, -2), (0, 0), (6, 6), (-3, 4)]
        sequential = run_episodes(m0, m0_tree, starts)
        parallel = run_episodes(m0, m0_tree, starts, workers=4)
        assert [t.states for t in parallel] == [t.states for t in sequential]
        assert [t.total_cost for t in sequential] == [9, 4, 0, 12, 7]
