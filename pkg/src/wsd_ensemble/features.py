"""Window specifications, range categories and binary co-occurrence features."""

from __future__ import annotations

from typing import NamedTuple

from wsd_ensemble.corpus import Instance
from wsd_ensemble.errors import InvalidWindowError

WINDOW_SIZES = (0, 1, 2, 3, 4, 5, 10, 25, 50)
RANGES = ("narrow", "medium", "wide")

_RANGE_OF = {
    0: "narrow", 1: "narrow", 2: "narrow",
    3: "medium", 4: "medium", 5: "medium",
    10: "wide", 25: "wide", 50: "wide",
}


class WindowSpec(NamedTuple):
    """Left and right window sizes, counted in normalized tokens."""

    left: int
    right: int

    def validate(self) -> WindowSpec:
        if self.left not in _RANGE_OF or self.right not in _RANGE_OF:
            raise InvalidWindowError(
                f"window sizes must be drawn from {WINDOW_SIZES}, got {tuple(self)}"
            )
        return self

    @property
    def total(self) -> int:
        return self.left + self.right

    def __str__(self) -> str:
        return f"({self.left},{self.right})"


class RangeCategory(NamedTuple):
    left_range: str
    right_range: str

    def __str__(self) -> str:
        return f"{self.left_range},{self.right_range}"

    @classmethod
    def parse(cls, text: str) -> RangeCategory:
        parts = [p.strip().lower() for p in text.split(",")]
        if len(parts) != 2 or any(p not in RANGES for p in parts):
            raise ValueError(
                f"range category must look like 'narrow,wide', got {text!r}"
            )
        return cls(*parts)


def range_of(size: int) -> str:
    try:
        return _RANGE_OF[size]
    except KeyError:
        raise InvalidWindowError(f"window size {size} not in {WINDOW_SIZES}") from None


def category_of(spec: WindowSpec) -> RangeCategory:
    return RangeCategory(range_of(spec.left), range_of(spec.right))


def grid_specs() -> list[WindowSpec]:
    """All 81 specs, left ascending then right ascending."""
    return [WindowSpec(l, r) for l in WINDOW_SIZES for r in WINDOW_SIZES]


def all_categories() -> list[RangeCategory]:
    return [RangeCategory(l, r) for l in RANGES for r in RANGES]


def specs_in(category: RangeCategory) -> list[WindowSpec]:
    return [spec for spec in grid_specs() if category_of(spec) == category]


def extract(instance: Instance, spec: WindowSpec) -> frozenset[str]:
    """Words within ``spec.left`` tokens left or ``spec.right`` tokens right of the target.

    The target position itself is excluded; windows stop at the instance
    boundaries.
    """
    t = instance.target_index
    tokens = instance.tokens
    left = tokens[max(0, t - spec.left):t]
    right = tokens[t + 1:t + 1 + spec.right]
    return frozenset(left) | frozenset(right)
