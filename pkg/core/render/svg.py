"""SVG 1.1 drawing of a 2D maze with an optional trajectory.

Gray lines mark the coordinate lists, obstacles are gray rectangles, the goal
is a red mark and the trajectory is a blue polyline with one circle per state.
Output is byte-identical for identical inputs.
"""

from typing import List, Optional, Sequence

from core.errors import UnsupportedDimensionError
from core.grid.corner_grid import build_lists
from core.maze.model import Maze, Point
from core.policy.runtime import Trace
from core.render.base import RenderContext, Renderer

SCALE = 40
MARGIN = 1


def export_svg_2d(
    maze: Maze, trace: Optional[Trace] = None, anchors: Sequence[Point] = ()
) -> str:
    if maze.dimension != 2:
        raise UnsupportedDimensionError(
            f"SVG export needs a 2D maze, got dimension {maze.dimension}"
        )
    lists = build_lists(maze, anchors)
    states = list(trace.states) if trace is not None else []
    xs = list(lists[0]) + [s[0] for s in states]
    ys = list(lists[1]) + [s[1] for s in states]
    x_lo, x_hi = min(xs) - MARGIN, max(xs) + MARGIN
    y_lo, y_hi = min(ys) - MARGIN, max(ys) + MARGIN
    width = (x_hi - x_lo) * SCALE
    height = (y_hi - y_lo) * SCALE

    def px(x: int) -> int:
        return (x - x_lo) * SCALE

    def py(y: int) -> int:
        # SVG y grows downwards
        return (y_hi - y) * SCALE

    parts: List[str] = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for obstacle in sorted(maze.obstacles, key=lambda o: (o.a, o.b)):
        (ax, ay), (bx, by) = obstacle.a, obstacle.b
        parts.append(
            f'<rect x="{px(ax)}" y="{py(by)}" width="{(bx - ax) * SCALE}" '
            f'height="{(by - ay) * SCALE}" fill="#999999"/>'
        )
    for x in lists[0]:
        parts.append(
            f'<line x1="{px(x)}" y1="0" x2="{px(x)}" y2="{height}" '
            f'stroke="#cccccc" stroke-width="1"/>'
        )
    for y in lists[1]:
        parts.append(
            f'<line x1="0" y1="{py(y)}" x2="{width}" y2="{py(y)}" '
            f'stroke="#cccccc" stroke-width="1"/>'
        )

    gx, gy = maze.goal
    parts.append(
        f'<rect class="goal" x="{px(gx) - 6}" y="{py(gy) - 6}" width="12" height="12" '
        f'fill="red"/>'
    )

    if states:
        points = " ".join(f"{px(x)},{py(y)}" for x, y in states)
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="blue" stroke-width="2"/>'
        )
        for x, y in states:
            parts.append(
                f'<circle class="state" cx="{px(x)}" cy="{py(y)}" r="4" fill="blue"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


class SvgRenderer(Renderer):
    @property
    def name(self) -> str:
        return "svg"

    @property
    def file_extension(self) -> str:
        return ".svg"

    def render(self, context: RenderContext) -> str:
        return export_svg_2d(self.require_maze(context), context.trace, context.anchors)
