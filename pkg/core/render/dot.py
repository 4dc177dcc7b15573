"""Graphviz DOT export of a compiled policy tree."""

from typing import List

from core.grid.segments import format_surface
from core.policy.nodes import DirNode, GridNode, PolicyTree
from core.render.base import RenderContext, Renderer


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(tree: PolicyTree) -> str:
    """One DOT node per tree node; shared subtrees appear once."""
    nodes = list(tree.iter_nodes())
    ids = {id(node): f"n{i}" for i, node in enumerate(nodes)}
    lines: List[str] = [
        "digraph policy {",
        "  node [fontname=\"Helvetica\"];",
    ]
    for node in nodes:
        name = ids[id(node)]
        if isinstance(node, GridNode):
            lines.append(f"  {name} [shape=box, label={_quote(node.condition())}];")
        elif isinstance(node, DirNode):
            lines.append(f"  {name} [shape=diamond, label={_quote(node.condition())}];")
        else:
            label = f"{node.describe()}\\n{format_surface(node.cell)}"
            lines.append(f"  {name} [shape=ellipse, style=filled, fillcolor=lightgray, "
                         f"label=\"{label}\"];")
    for node in nodes:
        name = ids[id(node)]
        if isinstance(node, GridNode):
            for child, mark in ((node.less, "<"), (node.equal, "="), (node.greater, ">")):
                lines.append(f"  {name} -> {ids[id(child)]} [label={_quote(mark)}];")
        elif isinstance(node, DirNode):
            lines.append(f"  {name} -> {ids[id(node.left)]} [label=\"yes\"];")
            lines.append(f"  {name} -> {ids[id(node.right)]} [label=\"no\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


class DotRenderer(Renderer):
    @property
    def name(self) -> str:
        return "dot"

    @property
    def file_extension(self) -> str:
        return ".dot"

    def render(self, context: RenderContext) -> str:
        return export_dot(self.require_tree(context))
