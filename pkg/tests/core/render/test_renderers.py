"""Tests for DOT and SVG output and the renderer registry."""

import pytest

from core.errors import ContractViolation, UnsupportedDimensionError
from core.maze.model import Maze
from core.policy.runtime import run_episode
from core.render.base import RenderContext
from core.render.dot import DotRenderer, export_dot
from core.render.registry import RendererRegistry, register_default_renderers
from core.render.svg import SvgRenderer, export_svg_2d


class TestDot:
    def test_one_dot_node_per_tree_node(self, m0_tree):
        text = export_dot(m0_tree)
        assert text.startswith("digraph policy {")
        assert text.count("[shape=") == m0_tree.stats.node_count

    def test_grid_fan_out(self, m0_tree):
        text = export_dot(m0_tree)
        assert '"x1 ? 1"' in text
        for mark in ("<", "=", ">"):
            assert f'[label="{mark}"]' in text

    def test_direction_label(self, m0_tree):
        text = export_dot(m0_tree)
        assert '"d(x,(1,-1))+2 <= d(x,(3,-1))+4"' in text
        assert '[label="yes"]' in text

    def test_deterministic(self, m0_tree):
        assert export_dot(m0_tree) == export_dot(m0_tree)


class TestSvg:
    def test_trajectory_points(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (7, 0))
        text = export_svg_2d(m0, trace)
        assert text.count('class="state"') == 10
        assert "<polyline" in text

    def test_maze_only(self, m0):
        text = export_svg_2d(m0)
        assert text.count('fill="#999999"') == 2
        assert 'class="goal"' in text
        assert 'class="state"' not in text
        # one grid line per list coordinate
        assert text.count("<line") == 4 + 5

    def test_anchor_grid_lines(self, m0):
        text = SvgRenderer().render(RenderContext(maze=m0, anchors=((7, -2),)))
        # 7 joins L1, -2 joins L2
        assert text.count("<line") == 5 + 6

    def test_deterministic(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (2, -2))
        assert export_svg_2d(m0, trace) == export_svg_2d(m0, trace)

    def test_three_dimensions_rejected(self):
        maze = Maze.create(goal=(0, 0, 0))
        with pytest.raises(UnsupportedDimensionError):
            export_svg_2d(maze)


class TestRegistry:
    def test_default_formats(self):
        register_default_renderers()
        assert RendererRegistry.get_available_formats() == ["dot", "svg"]
        assert RendererRegistry.is_registered("DOT")

    def test_create(self, m0_tree):
        register_default_renderers()
        renderer = RendererRegistry.create("dot")
        assert isinstance(renderer, DotRenderer)
        assert renderer.file_extension == ".dot"
        assert renderer.render(RenderContext(tree=m0_tree)) == export_dot(m0_tree)

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            RendererRegistry.create("png")

    def test_missing_input(self):
        register_default_renderers()
        with pytest.raises(ContractViolation):
            RendererRegistry.create("svg").render(RenderContext())
