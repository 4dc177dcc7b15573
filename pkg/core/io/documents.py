"""JSON documents for mazes, compiled policies and traces.

Canonical encoding: sorted keys, no whitespace, obstacles sorted by (a, b).
The policy digest is the SHA-256 of the canonical maze document.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from core.errors import ContractViolation, DigestMismatchError, DocumentError
from core.grid.segments import NEG_INF, POS_INF, Cell, Segment, is_finite
from core.maze.model import Action, Maze, Obstacle, Point
from core.planning.corner_mdp import UNREACHABLE
from core.policy.macros import MacroAction, direct_go_to
from core.policy.nodes import (
    DepthStats,
    DirNode,
    GridNode,
    Leaf,
    LeafKind,
    Node,
    PolicyTree,
)
from core.policy.runtime import EpisodeStatus, Trace

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MazeDocument:
    maze: Maze
    anchors: Tuple[Point, ...] = field(default_factory=tuple)


def _canonical(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _load_json(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError([f"{what}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}"])


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _int_vector(value: Any, length: Optional[int], where: str, errors: List[str]) -> Optional[Point]:
    if not isinstance(value, list) or not all(_is_int(v) for v in value):
        errors.append(f"{where}: expected an array of integers")
        return None
    if length is not None and len(value) != length:
        errors.append(f"{where}: length mismatch")
        return None
    return tuple(value)


# ── Mazes ───────────────────────────────────────────────────────────


def maze_to_dict(maze: Maze, anchors: Sequence[Point] = ()) -> Dict[str, Any]:
    obstacles = sorted((list(o.a), list(o.b)) for o in maze.obstacles)
    doc: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "dimension": maze.dimension,
        "goal": list(maze.goal),
        "obstacles": [{"a": a, "b": b} for a, b in obstacles],
    }
    if anchors:
        doc["anchors"] = [list(p) for p in sorted(anchors)]
    return doc


def emit_maze(maze: Maze, anchors: Sequence[Point] = ()) -> str:
    return _canonical(maze_to_dict(maze, anchors))


def maze_digest(maze: Maze) -> str:
    return hashlib.sha256(emit_maze(maze).encode("utf-8")).hexdigest()


def maze_from_dict(data: Any) -> MazeDocument:
    """Validate a decoded maze document, reporting every violation at once."""
    errors: List[str] = []
    if not isinstance(data, dict):
        raise DocumentError(["document: expected a JSON object"])
    if data.get("schema_version") != SCHEMA_VERSION:
        errors.append(f"schema_version: expected {SCHEMA_VERSION}")
    dimension = data.get("dimension")
    if not isinstance(dimension, int) or isinstance(dimension, bool) or dimension < 1:
        errors.append("dimension: expected a positive integer")
        dimension = None
    goal = _int_vector(data.get("goal"), dimension, "goal", errors)

    obstacles: List[Obstacle] = []
    raw_obstacles = data.get("obstacles", [])
    if not isinstance(raw_obstacles, list):
        errors.append("obstacles: expected an array")
        raw_obstacles = []
    for j, raw in enumerate(raw_obstacles):
        if not isinstance(raw, dict) or "a" not in raw or "b" not in raw:
            errors.append(f"obstacle {j}: expected an object with a and b")
            continue
        a = _int_vector(raw["a"], dimension, f"obstacle {j}", errors)
        if a is None:
            continue
        b = _int_vector(raw["b"], dimension, f"obstacle {j}", errors)
        if b is not None:
            obstacles.append(Obstacle(a, b))

    anchors: List[Point] = []
    raw_anchors = data.get("anchors")
    if raw_anchors is None:
        raw_anchors = []
    if not isinstance(raw_anchors, list):
        errors.append("anchors: expected an array")
        raw_anchors = []
    for j, raw in enumerate(raw_anchors):
        anchor = _int_vector(raw, dimension, f"anchor {j}", errors)
        if anchor is not None:
            anchors.append(anchor)

    unknown = set(data) - {"schema_version", "dimension", "goal", "obstacles", "anchors"}
    for key in sorted(unknown):
        errors.append(f"{key}: unknown field")

    if errors:
        raise DocumentError(errors)
    maze = Maze(dimension=dimension, goal=goal, obstacles=tuple(obstacles))
    violations = maze.validate()
    if violations:
        raise DocumentError(violations)
    return MazeDocument(maze=maze, anchors=tuple(anchors))


def parse_maze_document(text: str) -> MazeDocument:
    return maze_from_dict(_load_json(text, "maze"))


def parse_maze(text: str) -> Maze:
    return parse_maze_document(text).maze


# ── Policies ────────────────────────────────────────────────────────


def _coord_to_json(value) -> Optional[int]:
    return int(value) if is_finite(value) else None


def _cell_to_json(cell: Cell) -> List[List[Optional[int]]]:
    return [[_coord_to_json(s.lo), _coord_to_json(s.hi)] for s in cell]


def _cell_from_json(raw: Any, dimension: int, where: str, errors: List[str]) -> Optional[Cell]:
    if not isinstance(raw, list) or len(raw) != dimension:
        errors.append(f"{where}: cell must be an array of {dimension} segments")
        return None
    segments = []
    for i, pair in enumerate(raw):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(v is None or _is_int(v) for v in pair)
        ):
            errors.append(f"{where}: segment {i} must be [lo, hi] of integers or null")
            return None
        lo = NEG_INF if pair[0] is None else pair[0]
        hi = POS_INF if pair[1] is None else pair[1]
        if lo > hi:
            errors.append(f"{where}: segment {i} is empty")
            return None
        segments.append(Segment(lo, hi))
    return tuple(segments)


def _node_index(value: Any, count: int) -> bool:
    return _is_int(value) and 0 <= value < count


def _node_violations(raw: Any, i: int, dimension: int, count: int) -> List[str]:
    """Shape errors of one serialized node; children are checked as indices only."""
    where = f"node {i}"
    if not isinstance(raw, dict):
        return [f"{where}: expected an object"]
    errors: List[str] = []
    kind = raw.get("type")
    if kind == "grid":
        feature = raw.get("feature")
        if not _is_int(feature) or not 0 <= feature < dimension:
            errors.append(f"{where}: feature must be an integer in [0, {dimension})")
        if not _is_int(raw.get("pivot")):
            errors.append(f"{where}: pivot must be an integer")
        links: Tuple[str, ...] = ("less", "eq", "greater")
    elif kind == "dir":
        _int_vector(raw.get("c1"), dimension, f"{where} c1", errors)
        _int_vector(raw.get("c2"), dimension, f"{where} c2", errors)
        for key in ("v1", "v2"):
            if not _is_int(raw.get(key)):
                errors.append(f"{where}: {key} must be an integer")
        _cell_from_json(raw.get("cell"), dimension, where, errors)
        links = ("left", "right")
    elif kind == "leaf":
        links = ()
        try:
            leaf_kind: Optional[LeafKind] = LeafKind(raw.get("kind"))
        except (TypeError, ValueError):
            errors.append(f"{where}: unknown leaf kind {raw.get('kind')!r}")
            leaf_kind = None
        cell = _cell_from_json(raw.get("cell"), dimension, where, errors)
        payload = raw.get("payload")
        if leaf_kind in (LeafKind.GO_TO_CORNER, LeafKind.CORNER_STEP):
            _int_vector(payload, dimension, f"{where} payload", errors)
        elif leaf_kind is not None and payload is not None:
            errors.append(f"{where}: {leaf_kind.value} leaf takes no payload")
        if (
            leaf_kind is LeafKind.CORNER_STEP
            and cell is not None
            and not all(s.is_singleton for s in cell)
        ):
            errors.append(f"{where}: corner_step leaf needs a single-corner cell")
    else:
        return [f"{where}: unknown type {kind!r}"]
    for key in links:
        if not _node_index(raw.get(key), count):
            errors.append(f"{where}: {key} must be a node index in [0, {count})")
    return errors


def _successors_from_json(
    raw: Any, dimension: int, errors: List[str]
) -> Tuple[Dict[Point, Optional[Point]], Dict[Point, Any]]:
    successor: Dict[Point, Optional[Point]] = {}
    values: Dict[Point, Any] = {}
    if not isinstance(raw, list):
        errors.append("successors: expected an array")
        return successor, values
    for j, entry in enumerate(raw):
        where = f"successor {j}"
        if not isinstance(entry, dict):
            errors.append(f"{where}: expected an object")
            continue
        missing = [key for key in ("corner", "next", "value") if key not in entry]
        if missing:
            errors.append(f"{where}: missing {', '.join(missing)}")
            continue
        corner = _int_vector(entry["corner"], dimension, f"{where} corner", errors)
        nxt = None
        if entry["next"] is not None:
            nxt = _int_vector(entry["next"], dimension, f"{where} next", errors)
            if nxt is None:
                continue
        value = entry["value"]
        if value is not None and (not _is_int(value) or value < 0):
            errors.append(f"{where}: value must be a non-negative integer or null")
            continue
        if corner is not None:
            successor[corner] = nxt
            values[corner] = UNREACHABLE if value is None else value
    return successor, values


def _value_to_json(value) -> Optional[int]:
    return None if value == UNREACHABLE else int(value)


def policy_to_dict(tree: PolicyTree, maze: Maze, anchors: Sequence[Point] = ()) -> Dict[str, Any]:
    order = list(tree.iter_nodes())
    index = {id(node): i for i, node in enumerate(order)}
    nodes = []
    for node in order:
        if isinstance(node, GridNode):
            nodes.append(
                {
                    "type": "grid",
                    "feature": node.feature,
                    "pivot": node.pivot,
                    "less": index[id(node.less)],
                    "eq": index[id(node.equal)],
                    "greater": index[id(node.greater)],
                }
            )
        elif isinstance(node, DirNode):
            nodes.append(
                {
                    "type": "dir",
                    "c1": list(node.c1),
                    "c2": list(node.c2),
                    "v1": node.v1,
                    "v2": node.v2,
                    "cell": _cell_to_json(node.cell),
                    "left": index[id(node.left)],
                    "right": index[id(node.right)],
                }
            )
        else:
            nodes.append(
                {
                    "type": "leaf",
                    "kind": node.kind.value,
                    "payload": None if node.target is None else list(node.target),
                    "cell": _cell_to_json(node.cell),
                }
            )
    return {
        "schema_version": SCHEMA_VERSION,
        "maze_digest": maze_digest(maze),
        "maze": maze_to_dict(maze, anchors),
        "dag": tree.dag,
        "root": index[id(tree.root)],
        "nodes": nodes,
        "lists": [list(values) for values in tree.lists],
        "successors": [
            {
                "corner": list(corner),
                "next": None if nxt is None else list(nxt),
                "value": _value_to_json(tree.values[corner]),
            }
            for corner, nxt in sorted(tree.successor.items())
        ],
        "stats": tree.stats.as_dict(),
    }


def emit_policy(tree: PolicyTree, maze: Maze, anchors: Sequence[Point] = ()) -> str:
    return _canonical(policy_to_dict(tree, maze, anchors))


@dataclass(frozen=True)
class PolicyDocument:
    tree: PolicyTree
    maze: Maze
    anchors: Tuple[Point, ...]
    digest: str


def _goto_macros(cell: Cell, target: Point) -> Tuple[MacroAction, ...]:
    return tuple(
        MacroAction(i, -1 if target[i] == seg.lo else 1, target[i])
        for i, seg in enumerate(cell)
        if not seg.is_singleton
    )


def parse_policy(text: str, maze: Optional[Maze] = None) -> PolicyDocument:
    """Rebuild a PolicyTree; with ``maze`` given, its digest must match."""
    data = _load_json(text, "policy")
    if not isinstance(data, dict):
        raise DocumentError(["document: expected a JSON object"])
    if data.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError([f"schema_version: expected {SCHEMA_VERSION}"])

    try:
        embedded = maze_from_dict(data.get("maze"))
    except DocumentError as e:
        raise DocumentError([f"maze: {v}" for v in e.violations])
    digest = data.get("maze_digest")
    if digest != maze_digest(embedded.maze):
        raise DigestMismatchError(["maze_digest: does not match the embedded maze"])
    if maze is not None and maze_digest(maze) != digest:
        raise DigestMismatchError(
            ["maze_digest: policy was compiled from a different maze"]
        )

    dimension = embedded.maze.dimension
    errors: List[str] = []
    raw_nodes = data.get("nodes")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        errors.append("nodes: expected a non-empty array")
        raw_nodes = []
    for i, raw in enumerate(raw_nodes):
        errors.extend(_node_violations(raw, i, dimension, len(raw_nodes)))
    if raw_nodes and not _node_index(data.get("root"), len(raw_nodes)):
        errors.append(f"root: must be a node index in [0, {len(raw_nodes)})")

    successor, values = _successors_from_json(data.get("successors"), dimension, errors)

    lists: List[Point] = []
    raw_lists = data.get("lists")
    if not isinstance(raw_lists, list) or len(raw_lists) != dimension:
        errors.append(f"lists: expected {dimension} arrays")
    else:
        for i, entries in enumerate(raw_lists):
            checked = _int_vector(entries, None, f"lists {i}", errors)
            if checked is not None:
                lists.append(checked)

    stat_names = {f.name for f in fields(DepthStats)}
    raw_stats = data.get("stats")
    if (
        not isinstance(raw_stats, dict)
        or set(raw_stats) != stat_names
        or not all(_is_int(v) for v in raw_stats.values())
    ):
        errors.append(f"stats: expected integer fields {', '.join(sorted(stat_names))}")
    if not isinstance(data.get("dag", False), bool):
        errors.append("dag: expected a boolean")
    if errors:
        raise DocumentError(errors)

    built: Dict[int, Node] = {}
    visiting = set()

    def node_at(i: int) -> Node:
        if i in built:
            return built[i]
        if i in visiting:
            raise DocumentError([f"nodes: cycle through node {i}"])
        visiting.add(i)
        raw = raw_nodes[i]
        kind = raw["type"]
        if kind == "grid":
            node: Node = GridNode(
                feature=raw["feature"],
                pivot=raw["pivot"],
                less=node_at(raw["less"]),
                equal=node_at(raw["eq"]),
                greater=node_at(raw["greater"]),
            )
        elif kind == "dir":
            node = DirNode(
                c1=tuple(raw["c1"]),
                c2=tuple(raw["c2"]),
                v1=raw["v1"],
                v2=raw["v2"],
                cell=_cell_from_json(raw["cell"], dimension, f"node {i}", []),
                left=node_at(raw["left"]),
                right=node_at(raw["right"]),
            )
            try:
                node.form
            except ContractViolation as e:
                raise DocumentError([f"node {i}: {e}"])
        else:
            leaf_kind = LeafKind(raw["kind"])
            cell = _cell_from_json(raw["cell"], dimension, f"node {i}", [])
            target = None if raw.get("payload") is None else tuple(raw["payload"])
            macros: Tuple[MacroAction, ...] = ()
            if leaf_kind is LeafKind.GO_TO_CORNER:
                macros = _goto_macros(cell, target)
            elif leaf_kind is LeafKind.CORNER_STEP:
                corner = tuple(int(seg.lo) for seg in cell)
                macros = tuple(direct_go_to(corner, target))
            node = Leaf(leaf_kind, cell, target=target, macros=macros)
        visiting.discard(i)
        built[i] = node
        return node

    root = node_at(data["root"])
    tree = PolicyTree(
        dimension=dimension,
        goal=embedded.maze.goal,
        lists=tuple(lists),
        root=root,
        stats=DepthStats(**raw_stats),
        successor=successor,
        values=values,
        dag=data.get("dag", False),
    )
    logger.debug(f"Loaded policy with {len(built)} nodes, digest {digest[:12]}")
    return PolicyDocument(
        tree=tree, maze=embedded.maze, anchors=embedded.anchors, digest=digest
    )


# ── Traces (JSON lines) ─────────────────────────────────────────────


def emit_trace(trace: Trace) -> str:
    """Header line with the summary, then one line per state."""
    header = {
        "type": "trace",
        "status": trace.status.value,
        "total_cost": trace.total_cost,
        "tree_node_visits": trace.tree_node_visits,
        "corner_waypoints": [list(c) for c in trace.corner_waypoints],
        "alpha": str(trace.alpha),
        "seed": trace.seed,
    }
    lines = [_canonical(header)]
    for t, state in enumerate(trace.states):
        action = trace.actions[t - 1] if t > 0 else None
        lines.append(
            _canonical(
                {
                    "t": t,
                    "state": list(state),
                    "action": None if action is None else [action.feature, action.direction],
                }
            )
        )
    return "\n".join(lines) + "\n"


def parse_trace(text: str) -> Trace:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise DocumentError(["trace: empty document"])
    header = _load_json(lines[0], "trace header")
    if not isinstance(header, dict) or header.get("type") != "trace":
        raise DocumentError(["trace: first line must be the trace header"])
    errors: List[str] = []
    try:
        status = EpisodeStatus(header.get("status"))
    except (TypeError, ValueError):
        errors.append(f"trace header: unknown status {header.get('status')!r}")
        status = EpisodeStatus.REACHED_GOAL
    for key in ("total_cost", "tree_node_visits"):
        value = header.get(key)
        if not _is_int(value) or value < 0:
            errors.append(f"trace header: {key} must be a non-negative integer")
    waypoints: List[Point] = []
    raw_waypoints = header.get("corner_waypoints")
    if not isinstance(raw_waypoints, list):
        errors.append("trace header: corner_waypoints must be an array")
    else:
        for j, raw in enumerate(raw_waypoints):
            corner = _int_vector(raw, None, f"trace header waypoint {j}", errors)
            if corner is not None:
                waypoints.append(corner)
    try:
        alpha = Fraction(header.get("alpha"))
    except (TypeError, ValueError, ZeroDivisionError):
        errors.append("trace header: alpha must be a number or fraction string")
        alpha = Fraction(0)
    seed = header.get("seed")
    if seed is not None and not _is_int(seed):
        errors.append("trace header: seed must be an integer or null")

    states: List[Point] = []
    actions: List[Action] = []
    dimension: Optional[int] = None
    for n, line in enumerate(lines[1:], start=2):
        where = f"trace line {n}"
        row = _load_json(line, where)
        if not isinstance(row, dict):
            errors.append(f"{where}: expected an object")
            continue
        state = _int_vector(row.get("state"), dimension, f"{where} state", errors)
        if state is not None:
            dimension = len(state)
            states.append(state)
        action = row.get("action")
        if action is None:
            continue
        if (
            not isinstance(action, list)
            or len(action) != 2
            or not all(_is_int(v) for v in action)
            or action[0] < 0
            or action[1] not in (1, -1)
        ):
            errors.append(f"{where}: action must be [feature, +1 or -1]")
            continue
        actions.append(Action(action[0], action[1]))
    if not states and not errors:
        errors.append("trace: no states")
    if errors:
        raise DocumentError(errors)
    return Trace(
        states=states,
        actions=actions,
        total_cost=header["total_cost"],
        tree_node_visits=header["tree_node_visits"],
        corner_waypoints=waypoints,
        status=status,
        alpha=alpha,
        seed=seed,
    )
