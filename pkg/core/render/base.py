"""Abstract base class for policy and maze renderers."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Tuple

from core.errors import ContractViolation
from core.maze.model import Maze, Point
from core.policy.nodes import PolicyTree
from core.policy.runtime import Trace


@dataclass(frozen=True)
class RenderContext:
    """Everything a renderer may draw. Renderers declare what they require."""

    maze: Optional[Maze] = None
    tree: Optional[PolicyTree] = None
    trace: Optional[Trace] = None
    anchors: Tuple[Point, ...] = ()


class Renderer(ABC):
    """
    Turns a RenderContext into text.
    Implementations are stateless; one instance may render many contexts.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry key, also accepted by ``render --format``."""
        pass

    @property
    @abstractmethod
    def file_extension(self) -> str:
        """Suffix used when the CLI names the output file, e.g. ``.svg``."""
        pass

    @abstractmethod
    def render(self, context: RenderContext) -> str:
        pass

    def require_maze(self, context: RenderContext) -> Maze:
        if context.maze is None:
            raise ContractViolation(f"{self.name} renderer needs a maze")
        return context.maze

    def require_tree(self, context: RenderContext) -> PolicyTree:
        if context.tree is None:
            raise ContractViolation(f"{self.name} renderer needs a policy")
        return context.tree
