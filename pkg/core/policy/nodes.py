"""Compiled policy tree: grid nodes, direction nodes, leaves and their evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Iterator, Optional, Tuple, Union

from core.errors import ContractViolation
from core.grid.segments import Cell, format_surface, is_finite
from core.maze.model import Point, format_point, manhattan
from core.planning.corner_mdp import Cost
from core.policy.macros import MacroAction


class LeafKind(Enum):
    """What a leaf tells the agent to do."""

    AT_GOAL = "at_goal"
    CORNER_STEP = "corner_step"
    GO_TO_CORNER = "go_to_corner"
    UNREACHABLE = "unreachable"


@dataclass(frozen=True)
class LinearForm:
    """Predicate ``sum(w_i * x_i) <= t``."""

    coefficients: Tuple[int, ...]
    constant: int

    def holds(self, x: Point) -> bool:
        return sum(w * v for w, v in zip(self.coefficients, x)) <= self.constant

    def __str__(self) -> str:
        terms = [
            f"{w:+d}*x{i + 1}" for i, w in enumerate(self.coefficients) if w != 0
        ]
        lhs = " ".join(terms) if terms else "0"
        return f"{lhs} <= {self.constant}"


@dataclass(frozen=True, eq=False)
class Leaf:
    kind: LeafKind
    cell: Cell
    target: Optional[Point] = None
    macros: Tuple[MacroAction, ...] = ()

    def describe(self) -> str:
        names = {
            LeafKind.AT_GOAL: "AtGoal",
            LeafKind.CORNER_STEP: "CornerStep",
            LeafKind.GO_TO_CORNER: "GoToCorner",
            LeafKind.UNREACHABLE: "Unreachable",
        }
        if self.target is None:
            return names[self.kind]
        return f"{names[self.kind]} {format_point(self.target)}"


@dataclass(frozen=True, eq=False)
class GridNode:
    """Three-way comparison of x_feature against a list pivot."""

    feature: int
    pivot: int
    less: "Node"
    equal: "Node"
    greater: "Node"

    def condition(self) -> str:
        return f"x{self.feature + 1} ? {self.pivot}"

    def child_for(self, x: Point) -> "Node":
        value = x[self.feature]
        if value < self.pivot:
            return self.less
        if value == self.pivot:
            return self.equal
        return self.greater


@dataclass(frozen=True, eq=False)
class DirNode:
    """Left iff d(x, c1) + v1 <= d(x, c2) + v2, a linear test within ``cell``."""

    c1: Point
    c2: Point
    v1: int
    v2: int
    cell: Cell
    left: "Node"
    right: "Node"

    @cached_property
    def form(self) -> LinearForm:
        return linearize_dir_predicate(self)

    def condition(self) -> str:
        return (
            f"d(x,{format_point(self.c1)})+{self.v1} <= "
            f"d(x,{format_point(self.c2)})+{self.v2}"
        )

    def explicit_holds(self, x: Point) -> bool:
        return manhattan(x, self.c1) + self.v1 <= manhattan(x, self.c2) + self.v2

    def child_for(self, x: Point) -> "Node":
        return self.left if self.form.holds(x) else self.right


Node = Union[GridNode, DirNode, Leaf]


def linearize_dir_predicate(node: DirNode) -> LinearForm:
    """Rewrite the corner comparison as ``w . x <= t`` valid inside the node's cell.

    On an open segment (lo, hi) with {c1_i, c2_i} = {lo, hi},
    |x_i - lo| - |x_i - hi| = 2 x_i - lo - hi.
    """
    coefficients = []
    constant = node.v2 - node.v1
    for i, segment in enumerate(node.cell):
        a, b = node.c1[i], node.c2[i]
        if a == b:
            coefficients.append(0)
            continue
        if segment.is_singleton or not (is_finite(segment.lo) and is_finite(segment.hi)):
            raise ContractViolation(
                f"candidates differ on feature {i + 1} over segment {segment}"
            )
        if (a, b) == (segment.lo, segment.hi):
            coefficients.append(2)
            constant += a + b
        elif (a, b) == (segment.hi, segment.lo):
            coefficients.append(-2)
            constant -= a + b
        else:
            raise ContractViolation(
                f"candidates {node.c1}, {node.c2} are not endpoints of {segment}"
            )
    return LinearForm(tuple(coefficients), constant)


@dataclass(frozen=True)
class DepthStats:
    grid_depth: int
    dir_depth: int
    total_depth: int
    node_count: int
    leaf_count: int
    grid_bound: int
    dir_bound: int

    def as_dict(self) -> Dict[str, int]:
        return {
            "grid_depth": self.grid_depth,
            "dir_depth": self.dir_depth,
            "total_depth": self.total_depth,
            "node_count": self.node_count,
            "leaf_count": self.leaf_count,
            "grid_bound": self.grid_bound,
            "dir_bound": self.dir_bound,
        }


@dataclass(frozen=True, eq=False)
class PolicyTree:
    """A compiled policy plus the corner successor table for O(1) stepping."""

    dimension: int
    goal: Point
    lists: Tuple[Tuple[int, ...], ...]
    root: Node
    stats: DepthStats
    successor: Dict[Point, Optional[Point]] = field(repr=False)
    values: Dict[Point, Cost] = field(repr=False)
    dag: bool = False

    def evaluate(self, s: Point) -> Tuple[Leaf, int]:
        return evaluate_tree(self, s)

    def iter_nodes(self) -> Iterator[Node]:
        return iter_unique_nodes(self.root)


def iter_unique_nodes(root: Node) -> Iterator[Node]:
    """Unique nodes in pre-order; shared subtrees are yielded once."""
    seen = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(reversed(children(node)))


def children(node: Node) -> Tuple[Node, ...]:
    if isinstance(node, GridNode):
        return (node.less, node.equal, node.greater)
    if isinstance(node, DirNode):
        return (node.left, node.right)
    return ()


def evaluate_tree(tree: PolicyTree, s: Point) -> Tuple[Leaf, int]:
    """Descend once from the root; returns the leaf and the number of decisions."""
    if len(s) != tree.dimension:
        raise ContractViolation(
            f"state {tuple(s)} has dimension {len(s)}, policy has {tree.dimension}"
        )
    node = tree.root
    visited = 0
    while not isinstance(node, Leaf):
        visited += 1
        node = node.child_for(s)
    return node, visited


def describe_path(tree: PolicyTree, s: Point) -> Iterator[str]:
    """Human-readable root-to-leaf trace for ``s``."""
    node = tree.root
    while not isinstance(node, Leaf):
        nxt = node.child_for(s)
        if isinstance(node, GridNode):
            value = s[node.feature]
            branch = "<" if value < node.pivot else "=" if value == node.pivot else ">"
            yield f"{node.condition()} -> {branch}"
        else:
            yield f"{node.condition()} -> {'yes' if nxt is node.left else 'no'}"
        node = nxt
    yield f"leaf {node.describe()} on cell {format_surface(node.cell)}"
