"""Per-feature segments of surfaces and cells.

Coordinates are extended with the sentinels ``NEG_INF``/``POS_INF``. They
are only ever compared, never used in arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple, Union

ExtendedCoord = Union[int, float]

NEG_INF: float = -math.inf
POS_INF: float = math.inf


def is_finite(value: ExtendedCoord) -> bool:
    return not (isinstance(value, float) and math.isinf(value))


def format_coord(value: ExtendedCoord) -> str:
    if value == NEG_INF:
        return "-inf"
    if value == POS_INF:
        return "inf"
    return str(value)


@dataclass(frozen=True)
class Segment:
    """Either a singleton ``[v, v]`` or an open interval ``(lo, hi)``.

    An open segment always joins two consecutive entries of the
    sentinel-extended coordinate list.
    """

    lo: ExtendedCoord
    hi: ExtendedCoord

    @classmethod
    def singleton(cls, value: int) -> Segment:
        return cls(value, value)

    @classmethod
    def open(cls, lo: ExtendedCoord, hi: ExtendedCoord) -> Segment:
        return cls(lo, hi)

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def finite_endpoints(self) -> List[int]:
        """Candidate corner coordinates along this feature, ascending."""
        if self.is_singleton:
            return [int(self.lo)]
        return [int(v) for v in (self.lo, self.hi) if is_finite(v)]

    def contains(self, x: int) -> bool:
        if self.is_singleton:
            return x == self.lo
        return self.lo < x < self.hi

    def __str__(self) -> str:
        if self.is_singleton:
            return f"{{{self.lo}}}"
        return f"({format_coord(self.lo)},{format_coord(self.hi)})"


# A surface is one segment per feature; a cell of the compiled tree has the same shape.
Surface = Tuple[Segment, ...]
Cell = Surface


def surface_contains(surface: Surface, x) -> bool:
    return all(segment.contains(v) for segment, v in zip(surface, x))


def format_surface(surface: Surface) -> str:
    return " x ".join(str(segment) for segment in surface)
