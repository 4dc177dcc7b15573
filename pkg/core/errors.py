"""Exception hierarchy shared by every maze-policy package."""

from typing import List, Optional


class MazePolicyError(Exception):
    """Base class for all maze-policy errors."""

    pass


class ContractViolation(MazePolicyError, ValueError):
    """Raised when an operation is called outside its precondition."""

    pass


class MazeValidationError(MazePolicyError):
    """Raised when a maze fails validation."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DocumentError(MazePolicyError):
    """Raised when a maze, policy or trace document cannot be parsed."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DigestMismatchError(DocumentError):
    """Raised when a policy document was compiled from a different maze."""

    pass


class BlockedMoveError(MazePolicyError):
    """Raised when an executed macro action hits an obstacle."""

    pass


class RunawayEpisodeError(MazePolicyError):
    """Raised when an episode exceeds its step budget."""

    def __init__(self, max_steps: int, state: Optional[tuple] = None):
        self.max_steps = max_steps
        self.state = state
        super().__init__(f"episode exceeded {max_steps} steps (last state {state})")


class ConvergenceError(MazePolicyError):
    """Raised when noisy value iteration does not converge."""

    def __init__(self, iterations: int, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"value iteration did not converge after {iterations} iterations "
            f"(residual {residual})"
        )


class GenerationError(MazePolicyError):
    """Raised when random maze generation runs out of retries."""

    pass


class UnsupportedDimensionError(MazePolicyError):
    """Raised when an export needs a dimension the maze does not have."""

    pass
