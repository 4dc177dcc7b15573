"""Shared pytest fixtures for maze-policy tests."""

from __future__ import annotations

import pytest

from core.maze.model import Maze
from core.policy.compiler import compile_policy


def make_m0() -> Maze:
    """Goal at the origin, one wall east of it and one north of it."""
    return Maze.create(goal=(0, 0), obstacles=[((3, -1), (6, 1)), ((1, 3), (3, 6))])


def make_ring() -> Maze:
    """Four overlapping bars enclosing the goal; the inside is sealed off."""
    return Maze.create(
        goal=(0, 0),
        obstacles=[
            ((-4, 2), (4, 5)),
            ((-4, -5), (4, -2)),
            ((-5, -4), (-2, 4)),
            ((2, -4), (5, 4)),
        ],
    )


@pytest.fixture
def m0() -> Maze:
    return make_m0()


@pytest.fixture
def m0_compiled(m0):
    """Lists, corner grid, corner-MDP solution and tree for M0."""
    return compile_policy(m0)


@pytest.fixture
def m0_tree(m0_compiled):
    return m0_compiled.tree


@pytest.fixture
def ring() -> Maze:
    return make_ring()


@pytest.fixture
def ring_compiled(ring):
    return compile_policy(ring)
