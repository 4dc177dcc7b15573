"""Tests for the brute-force oracle: boxes, BFS, noisy values, window soundness."""

from fractions import Fraction

import pytest

from core.errors import ContractViolation, ConvergenceError
from core.maze.model import Action, Maze, manhattan
from core.oracle.values import (
    Box,
    bfs_values,
    box_soundness_check,
    bounding_box,
    noisy_values,
)
from core.planning.corner_mdp import UNREACHABLE


class TestBoundingBox:
    def test_m0_with_extra_state(self, m0):
        box = bounding_box(m0, [(7, 0)], padding=1)
        assert box == Box((-1, -2), (8, 7))

    def test_goal_only(self):
        assert bounding_box(Maze.create(goal=(5,)), padding=1) == Box((4,), (6,))

    def test_padding_must_be_positive(self, m0):
        with pytest.raises(ContractViolation):
            bounding_box(m0, padding=0)

    def test_box_geometry(self):
        box = Box((-1, -2), (8, 7))
        assert box.shape == (10, 10)
        assert box.size == 100
        assert box.manhattan_diameter == 18
        assert box.expanded(2) == Box((-3, -4), (10, 9))


class TestBfsValues:
    """Exact shortest paths inside a box."""

    def test_m0_detour(self, m0):
        field = bfs_values(m0, bounding_box(m0, [(7, 0)]))
        assert field.value((7, 0)) == 9
        assert field.value((0, 0)) == 0
        assert field.value((3, 0)) == 3

    def test_obstacle_interior(self, m0):
        field = bfs_values(m0, bounding_box(m0))
        assert field.value((4, 0)) is None
        assert field.is_obstacle((4, 0))

    def test_free_maze_is_manhattan(self):
        maze = Maze.create(goal=(1, -2))
        box = Box((-4, -4), (4, 4))
        field = bfs_values(maze, box)
        for s in box.states():
            assert field.value(s) == manhattan(s, (1, -2))

    def test_sealed_region_unreachable(self, ring):
        field = bfs_values(ring, bounding_box(ring))
        assert field.value((6, 6)) == UNREACHABLE
        assert field.value((1, 1)) == 2

    def test_bellman_consistency(self, m0):
        field = bfs_values(m0, bounding_box(m0))
        for s in field.free_states():
            v = field.value(s)
            if v in (0, UNREACHABLE):
                continue
            neighbours = [m0.transition(s, a) for a in m0.actions()]
            assert any(
                field.box.contains(n) and field.value(n) == v - 1 for n in neighbours
            )

    def test_outside_box(self, m0):
        field = bfs_values(m0, bounding_box(m0))
        with pytest.raises(ContractViolation):
            field.value((50, 50))


class TestNoisyValues:
    """Exact value iteration under stay-in-place noise."""

    def test_zero_noise_matches_bfs(self, m0):
        box = bounding_box(m0)
        exact = bfs_values(m0, box)
        noisy = noisy_values(m0, box, Fraction(0))
        for s in exact.free_states():
            assert noisy.value(s) == exact.value(s)

    def test_scaled_by_one_over_one_minus_alpha(self, m0):
        box = bounding_box(m0, [(7, 0)])
        noisy = noisy_values(m0, box, Fraction(1, 2))
        assert noisy.value((7, 0)) == 18
        assert noisy.value((0, 0)) == 0
        assert noisy.residual == 0

    def test_greedy_sets(self, m0):
        noisy = noisy_values(m0, bounding_box(m0), Fraction(1, 4))
        assert noisy.greedy[(1, 1)] == frozenset({Action(0, -1), Action(1, -1)})
        assert Action(0, 1) not in noisy.greedy[(3, 0)]

    def test_unreachable_stays_unreachable(self, ring):
        noisy = noisy_values(ring, bounding_box(ring), Fraction(1, 3))
        assert noisy.value((6, 6)) == UNREACHABLE
        assert noisy.greedy[(6, 6)] == frozenset()

    def test_alpha_out_of_range(self, m0):
        with pytest.raises(ContractViolation):
            noisy_values(m0, bounding_box(m0), Fraction(1))

    def test_iteration_budget(self, m0):
        with pytest.raises(ConvergenceError):
            noisy_values(m0, bounding_box(m0), Fraction(1, 2), max_iterations=2)


class TestBoxSoundness:
    def test_m0_padding_is_enough(self, m0):
        assert box_soundness_check(m0, bounding_box(m0, padding=1)).ok

    def test_ring_padding_is_enough(self, ring):
        assert box_soundness_check(ring, bounding_box(ring, padding=1)).ok

    def test_truncated_box_is_suspect(self, m0):
        report = box_soundness_check(m0, Box((0, 0), (8, 0)))
        assert not report.ok
        assert report.worst_state == (6, 0)
        assert report.inner_value == UNREACHABLE
        assert report.outer_value == 8
