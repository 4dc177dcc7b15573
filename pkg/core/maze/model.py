"""The (k,d)-maze MDP: lattice states, 2d move actions, blocked moves, unit cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Sequence, Tuple

from core.errors import ContractViolation, MazeValidationError

Point = Tuple[int, ...]


def as_point(values: Sequence[int]) -> Point:
    """Coerce a sequence of integers into a Point tuple."""
    return tuple(int(v) for v in values)


def manhattan(p: Point, q: Point) -> int:
    return sum(abs(x - y) for x, y in zip(p, q))


def format_point(p: Sequence[int]) -> str:
    """Compact rendering without spaces, e.g. ``(1,-1)``."""
    return "(" + ",".join(str(v) for v in p) + ")"


@dataclass(frozen=True)
class Obstacle:
    """Open hyperrectangle {x : a_i < x_i < b_i for all i}; its boundary is free."""

    a: Point
    b: Point

    def contains(self, p: Point) -> bool:
        return all(lo < x < hi for lo, x, hi in zip(self.a, p, self.b))


@dataclass(frozen=True, order=True)
class Action:
    """Move by ``direction`` (+1 or -1) along ``feature`` (0-based)."""

    feature: int
    direction: int

    def __post_init__(self) -> None:
        if self.direction not in (1, -1):
            raise ContractViolation(f"direction must be +1 or -1, got {self.direction}")

    def flipped(self) -> Action:
        return Action(self.feature, -self.direction)

    def apply(self, s: Point) -> Point:
        moved = list(s)
        moved[self.feature] += self.direction
        return tuple(moved)

    def __str__(self) -> str:
        sign = "+" if self.direction > 0 else "-"
        return f"({self.feature + 1},{sign}1)"


@dataclass(frozen=True)
class Maze:
    """Maze MDP over Z^d with k obstacles and one absorbing goal state."""

    dimension: int
    goal: Point
    obstacles: Tuple[Obstacle, ...] = field(default_factory=tuple)

    @classmethod
    def create(
        cls,
        goal: Sequence[int],
        obstacles: Sequence[Tuple[Sequence[int], Sequence[int]]] = (),
        dimension: int | None = None,
    ) -> Maze:
        """Build and validate a maze from plain coordinate sequences."""
        goal_point = as_point(goal)
        maze = cls(
            dimension=len(goal_point) if dimension is None else dimension,
            goal=goal_point,
            obstacles=tuple(Obstacle(as_point(a), as_point(b)) for a, b in obstacles),
        )
        violations = maze.validate()
        if violations:
            raise MazeValidationError(violations)
        return maze

    @property
    def k(self) -> int:
        return len(self.obstacles)

    def actions(self) -> Iterator[Action]:
        """All 2d actions in (feature, direction) order, -1 before +1."""
        for i in range(self.dimension):
            yield Action(i, -1)
            yield Action(i, 1)

    def _check_dimension(self, p: Sequence[int]) -> None:
        if len(p) != self.dimension:
            raise ContractViolation(
                f"point {tuple(p)} has dimension {len(p)}, maze has {self.dimension}"
            )

    def contains_obstacle(self, p: Point) -> bool:
        """True iff p lies strictly inside some obstacle."""
        self._check_dimension(p)
        return any(obstacle.contains(p) for obstacle in self.obstacles)

    def transition(self, s: Point, a: Action) -> Point:
        """Deterministic move; stays put at the goal or when the target is blocked."""
        self._check_dimension(s)
        if s == self.goal:
            return s
        moved = a.apply(s)
        if any(obstacle.contains(moved) for obstacle in self.obstacles):
            return s
        return moved

    def step_cost(self, s: Point) -> int:
        return 0 if tuple(s) == self.goal else 1

    def validate(self) -> List[str]:
        """Return every violation of the maze invariants; empty means valid."""
        violations: List[str] = []
        if self.dimension < 1:
            violations.append(f"dimension must be >= 1, got {self.dimension}")
            return violations
        if len(self.goal) != self.dimension:
            violations.append(
                f"goal has dimension {len(self.goal)}, expected {self.dimension}"
            )
        for j, obstacle in enumerate(self.obstacles, start=1):
            if len(obstacle.a) != self.dimension or len(obstacle.b) != self.dimension:
                violations.append(f"obstacle {j}: dimension mismatch")
                continue
            for i, (lo, hi) in enumerate(zip(obstacle.a, obstacle.b), start=1):
                if not lo < hi:
                    violations.append(f"obstacle {j}: empty obstacle, feature {i}")
        if not violations:
            for j, obstacle in enumerate(self.obstacles, start=1):
                if obstacle.contains(self.goal):
                    violations.append(f"goal inside obstacle {j}")
        return violations
