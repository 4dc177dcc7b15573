"""Renderer registry and factory."""

import logging
from typing import Dict, Type

from core.render.base import Renderer

logger = logging.getLogger(__name__)


class RendererRegistry:
    """
    Registry for output renderers.
    Allows the CLI to pick a renderer by format name.
    """

    _renderers: Dict[str, Type[Renderer]] = {}

    @classmethod
    def register(cls, fmt: str, renderer_class: Type[Renderer]) -> None:
        """Register a renderer class.

        Args:
            fmt: Format name, matched case-insensitively
            renderer_class: Renderer subclass to instantiate on create
        """
        cls._renderers[fmt.lower()] = renderer_class
        logger.debug(f"Registered renderer for format: {fmt}")

    @classmethod
    def create(cls, fmt: str) -> Renderer:
        """Create a renderer instance by format name.

        Args:
            fmt: Registered format name, e.g. "dot" or "svg"

        Raises:
            ValueError: if no renderer is registered for fmt
        """
        fmt = fmt.lower()
        if fmt not in cls._renderers:
            available = cls.get_available_formats()
            raise ValueError(f"Unknown render format: {fmt}. Available: {available}")
        renderer_class = cls._renderers[fmt]
        logger.debug(f"Creating {fmt} renderer: {renderer_class.__name__}")
        return renderer_class()

    @classmethod
    def get_available_formats(cls) -> list:
        """Return the registered format names, sorted."""
        return sorted(cls._renderers.keys())

    @classmethod
    def is_registered(cls, fmt: str) -> bool:
        """Check if a format is registered."""
        return fmt.lower() in cls._renderers


def register_default_renderers() -> None:
    """Register the DOT and SVG renderers."""
    from core.render.dot import DotRenderer
    from core.render.svg import SvgRenderer

    RendererRegistry.register("dot", DotRenderer)
    RendererRegistry.register("svg", SvgRenderer)
    logger.debug(f"Registered renderers: {RendererRegistry.get_available_formats()}")
