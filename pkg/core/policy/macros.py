"""Macro actions ``(i, b, while s_i != stop)`` and the coordinate-wise walk."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

from core.maze.model import Action, Point


@dataclass(frozen=True)
class MacroAction:
    """Repeat the primitive action (feature, direction) while s_feature != stop."""

    feature: int
    direction: int
    stop: int

    @property
    def action(self) -> Action:
        return Action(self.feature, self.direction)

    def steps_from(self, s: Point) -> int:
        return abs(s[self.feature] - self.stop)

    def __str__(self) -> str:
        sign = "+" if self.direction > 0 else "-"
        return f"({self.feature + 1},{sign}1, while x{self.feature + 1} != {self.stop})"


def direct_go_to(s: Point, t: Point) -> List[MacroAction]:
    """One macro per differing feature, feature 1 first; d(s, t) primitive steps in total."""
    return [
        MacroAction(i, 1 if ti > si else -1, ti)
        for i, (si, ti) in enumerate(zip(s, t))
        if si != ti
    ]


def macro_steps(s: Point, macros: Tuple[MacroAction, ...]) -> int:
    return sum(m.steps_from(s) for m in macros)
