"""Tests for maze, policy and trace documents."""

import json
from fractions import Fraction

import pytest

from core.errors import DigestMismatchError, DocumentError
from core.io.documents import (
    emit_maze,
    emit_policy,
    emit_trace,
    maze_digest,
    parse_maze,
    parse_maze_document,
    parse_policy,
    parse_trace,
)
from core.maze.model import Maze
from core.policy.compiler import compile_policy
from core.policy.runtime import NoiseConfig, run_episode, run_noisy_episode

M0_DOCUMENT = {
    "schema_version": 1,
    "dimension": 2,
    "goal": [0, 0],
    "obstacles": [{"a": [3, -1], "b": [6, 1]}, {"a": [1, 3], "b": [3, 6]}],
}


class TestMazeDocuments:
    """Parsing and canonical emission of mazes."""

    def test_parse_m0(self, m0):
        maze = parse_maze(json.dumps(M0_DOCUMENT))
        assert maze.dimension == 2
        assert maze.k == 2
        assert set(maze.obstacles) == set(m0.obstacles)

    def test_canonical_form(self):
        text = emit_maze(parse_maze(json.dumps(M0_DOCUMENT, indent=4)))
        assert " " not in text
        doc = json.loads(text)
        # obstacles sorted by (a, b)
        assert doc["obstacles"][0] == {"a": [1, 3], "b": [3, 6]}
        assert emit_maze(parse_maze(text)) == text

    def test_length_mismatch(self):
        doc = dict(M0_DOCUMENT, obstacles=[{"a": [3], "b": [6, 1]}])
        with pytest.raises(DocumentError) as info:
            parse_maze(json.dumps(doc))
        assert info.value.violations == ["obstacle 0: length mismatch"]

    def test_all_violations_reported(self):
        doc = {"schema_version": 1, "dimension": 2, "goal": [0], "obstacles": "x", "extra": 1}
        with pytest.raises(DocumentError) as info:
            parse_maze(json.dumps(doc))
        assert len(info.value.violations) == 3

    def test_invalid_maze(self):
        doc = dict(M0_DOCUMENT, goal=[4, 0])
        with pytest.raises(DocumentError) as info:
            parse_maze(json.dumps(doc))
        assert info.value.violations == ["goal inside obstacle 1"]

    def test_invalid_json(self):
        with pytest.raises(DocumentError):
            parse_maze("{not json")

    def test_anchors(self):
        doc = dict(M0_DOCUMENT, anchors=[[7, -2]])
        document = parse_maze_document(json.dumps(doc))
        assert document.anchors == ((7, -2),)

    def test_digest_ignores_layout(self, m0):
        text = json.dumps(M0_DOCUMENT, indent=2)
        assert maze_digest(parse_maze(text)) == maze_digest(m0)


class TestPolicyDocuments:
    """Self-contained, digest-checked policy documents."""

    def test_round_trip_decisions(self, m0, m0_tree):
        loaded = parse_policy(emit_policy(m0_tree, m0))
        assert loaded.digest == maze_digest(m0)
        assert loaded.tree.stats == m0_tree.stats
        for s in [(7, 0), (2, -2), (0, 0), (3, -1), (6, 6), (-4, 9)]:
            a, va = m0_tree.evaluate(s)
            b, vb = loaded.tree.evaluate(s)
            assert (a.kind, a.target, a.macros, va) == (b.kind, b.target, b.macros, vb)

    def test_canonical_round_trip(self, m0, m0_tree):
        text = emit_policy(m0_tree, m0)
        loaded = parse_policy(text)
        assert emit_policy(loaded.tree, loaded.maze, loaded.anchors) == text

    def test_episodes_from_loaded_policy(self, m0, m0_tree):
        loaded = parse_policy(emit_policy(m0_tree, m0))
        assert run_episode(loaded.maze, loaded.tree, (7, 0)).total_cost == 9

    def test_digest_mismatch(self, m0, m0_tree):
        other = Maze.create(goal=(0, 0), obstacles=[((3, -1), (6, 2))])
        with pytest.raises(DigestMismatchError):
            parse_policy(emit_policy(m0_tree, m0), maze=other)

    def test_matching_maze_accepted(self, m0, m0_tree):
        assert parse_policy(emit_policy(m0_tree, m0), maze=m0).digest == maze_digest(m0)

    def test_tampered_embedded_maze(self, m0, m0_tree):
        doc = json.loads(emit_policy(m0_tree, m0))
        doc["maze"]["goal"] = [0, 1]
        with pytest.raises(DigestMismatchError):
            parse_policy(json.dumps(doc))

    def test_shared_nodes_written_once(self):
        cube = Maze.create(goal=(0, 0, 0), obstacles=[((2, 2, 2), (5, 5, 5))])
        tree = compile_policy(cube, dag=True).tree
        doc = json.loads(emit_policy(tree, cube))
        assert len(doc["nodes"]) == tree.stats.node_count
        assert doc["dag"] is True

    def test_unreachable_values_are_null(self, ring, ring_compiled):
        doc = json.loads(emit_policy(ring_compiled.tree, ring))
        entry = next(e for e in doc["successors"] if e["corner"] == [5, 5])
        assert entry["value"] is None
        assert entry["next"] is None


class TestTraces:
    """JSON-lines traces."""

    def test_round_trip(self, m0, m0_tree):
        trace = run_episode(m0, m0_tree, (7, 0))
        text = emit_trace(trace)
        lines = text.splitlines()
        assert len(lines) == 11
        assert json.loads(lines[0])["total_cost"] == 9
        loaded = parse_trace(text)
        assert loaded.states == trace.states
        assert loaded.actions == trace.actions
        assert loaded.corner_waypoints == trace.corner_waypoints
        assert emit_trace(loaded) == text

    def test_noisy_header(self, m0, m0_tree):
        trace = run_noisy_episode(
            m0, m0_tree, (7, 0), NoiseConfig(alpha=Fraction(1, 4), seed=11)
        )
        header = json.loads(emit_trace(trace).splitlines()[0])
        assert header["alpha"] == "1/4"
        assert header["seed"] == 11

    def test_missing_header(self):
        with pytest.raises(DocumentError):
            parse_trace('{"t":0,"state":[0,0],"action":null}\n')


class TestMalformedDocuments:
    """Malformed fields are reported as DocumentError violations."""

    @pytest.fixture
    def policy_doc(self, m0, m0_tree):
        return json.loads(emit_policy(m0_tree, m0))

    def _violations(self, parse, doc):
        with pytest.raises(DocumentError) as info:
            parse(json.dumps(doc))
        return info.value.violations

    def test_maze_anchors_not_an_array(self):
        doc = dict(M0_DOCUMENT, anchors=5)
        assert self._violations(parse_maze, doc) == ["anchors: expected an array"]

    def test_successor_missing_keys(self, policy_doc):
        policy_doc["successors"] = [{"corner": [0, 0]}]
        violations = self._violations(parse_policy, policy_doc)
        assert violations == ["successor 0: missing next, value"]

    def test_successors_not_an_array(self, policy_doc):
        policy_doc["successors"] = {"corner": [0, 0]}
        assert "successors: expected an array" in self._violations(parse_policy, policy_doc)

    def test_node_not_an_object(self, policy_doc):
        policy_doc["nodes"] = [5]
        policy_doc["root"] = 0
        assert self._violations(parse_policy, policy_doc) == ["node 0: expected an object"]

    def test_every_node_violation_listed(self, policy_doc):
        grid = next(n for n in policy_doc["nodes"] if n["type"] == "grid")
        grid["feature"] = 7
        grid["less"] = -1
        leaf = next(n for n in policy_doc["nodes"] if n["type"] == "leaf")
        leaf["cell"] = "x"
        violations = self._violations(parse_policy, policy_doc)
        assert len(violations) == 3
        assert any("feature must be" in v for v in violations)
        assert any("less must be a node index" in v for v in violations)
        assert any("cell must be an array" in v for v in violations)

    def test_unknown_leaf_kind(self, policy_doc):
        leaf = next(n for n in policy_doc["nodes"] if n["type"] == "leaf")
        leaf["kind"] = "teleport"
        violations = self._violations(parse_policy, policy_doc)
        assert any("unknown leaf kind 'teleport'" in v for v in violations)

    def test_root_and_stats(self, policy_doc):
        policy_doc["root"] = len(policy_doc["nodes"])
        policy_doc["stats"] = {"grid_depth": 1}
        violations = self._violations(parse_policy, policy_doc)
        assert violations[0].startswith("root: must be a node index")
        assert violations[1].startswith("stats: expected integer fields")

    def test_node_cycle(self, policy_doc):
        root = policy_doc["nodes"][policy_doc["root"]]
        root["less"] = policy_doc["root"]
        assert "cycle" in self._violations(parse_policy, policy_doc)[0]

    def test_embedded_maze_errors_prefixed(self, policy_doc):
        policy_doc["maze"]["anchors"] = 5
        assert self._violations(parse_policy, policy_doc) == [
            "maze: anchors: expected an array"
        ]

    def test_trace_row_without_state(self):
        text = '{"type":"trace","status":"reached_goal","total_cost":0,' \
            '"tree_node_visits":0,"corner_waypoints":[],"alpha":"0","seed":null}\n{"t":0}\n'
        with pytest.raises(DocumentError) as info:
            parse_trace(text)
        assert info.value.violations == ["trace line 2 state: expected an array of integers"]

    def test_trace_bad_header_and_action(self):
        text = '{"type":"trace","status":"lost","total_cost":-1,' \
            '"tree_node_visits":0,"corner_waypoints":5,"alpha":"x","seed":"s"}\n' \
            '{"t":0,"state":[0,0],"action":[0,2]}\n'
        with pytest.raises(DocumentError) as info:
            parse_trace(text)
        assert len(info.value.violations) == 6
