"""Rectangles, placements and packings on the integer grid.

Rectangles are half-open ``[x, x+w) x [y, y+h)`` so that touching edges are
legal.  Everything here is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

Rect = tuple[int, int, int, int]  # x, y, w, h


@dataclass(frozen=True)
class Item:
    id: Hashable
    width: int
    height: int
    profit: int = 1

    def __post_init__(self):
        for name in ("width", "height", "profit"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"item {self.id!r}: {name} must be a positive integer, got {value!r}")

    @property
    def area(self) -> int:
        return self.width * self.height

    def dims(self, rotated: bool = False) -> tuple[int, int]:
        return (self.height, self.width) if rotated else (self.width, self.height)


@dataclass(frozen=True)
class Placement:
    item_id: Hashable
    x: int
    y: int
    rotated: bool = False

    def rect(self, item: Item) -> Rect:
        w, h = item.dims(self.rotated)
        return (self.x, self.y, w, h)


@dataclass(frozen=True)
class Packing:
    knapsack_side: int
    placements: tuple[Placement, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "placements", tuple(self.placements))

    def __len__(self):
        return len(self.placements)

    def __iter__(self):
        return iter(self.placements)

    def item_ids(self) -> list:
        return [p.item_id for p in self.placements]

    def profit(self, items: Iterable[Item] | dict) -> int:
        index = items if isinstance(items, dict) else {it.id: it for it in items}
        return sum(index[p.item_id].profit for p in self.placements)

    def rects(self, items: Iterable[Item] | dict) -> list[Rect]:
        index = items if isinstance(items, dict) else {it.id: it for it in items}
        return [p.rect(index[p.item_id]) for p in self.placements]

    def merged(self, other: "Packing") -> "Packing":
        return Packing(self.knapsack_side, self.placements + other.placements)


@dataclass(frozen=True)
class Violation:
    kind: str  # overlap | out_of_bounds | duplicate | unknown_item
    ids: tuple


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.valid


def rects_intersect(a: Rect, b: Rect) -> bool:
    """True iff the open interiors of ``a`` and ``b`` share a point."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    return ax < bx + bw and bx < ax + aw and ay < by + bh and by < ay + ah


def total_area(items: Iterable[Item]) -> int:
    return sum(it.width * it.height for it in items)


def validate_packing(instance: Sequence[Item] | dict, packing: Packing) -> ValidationReport:
    """Report every feasibility violation of ``packing``.

    Placements that reference an unknown id are reported and excluded from
    the geometric checks.
    """
    if packing.knapsack_side < 1:
        raise ValueError("knapsack_side must be >= 1")
    index = instance if isinstance(instance, dict) else {it.id: it for it in instance}
    n = packing.knapsack_side
    violations: list[Violation] = []
    seen: dict = {}
    placed: list[tuple[Hashable, Rect]] = []
    for p in packing.placements:
        item = index.get(p.item_id)
        if item is None:
            violations.append(Violation("unknown_item", (p.item_id,)))
            continue
        if p.item_id in seen:
            violations.append(Violation("duplicate", (p.item_id,)))
            continue
        seen[p.item_id] = True
        r = p.rect(item)
        x, y, w, h = r
        if x < 0 or y < 0 or x + w > n or y + h > n:
            violations.append(Violation("out_of_bounds", (p.item_id,)))
        placed.append((p.item_id, r))
    # sweep on x keeps this near-linear for the shelf-style packings we emit
    order = sorted(range(len(placed)), key=lambda k: placed[k][1][0])
    active: list[int] = []
    for k in order:
        kid, r = placed[k]
        active = [j for j in active if placed[j][1][0] + placed[j][1][2] > r[0]]
        for j in active:
            if rects_intersect(placed[j][1], r):
                violations.append(Violation("overlap", (placed[j][0], kid)))
        active.append(k)
    return ValidationReport(tuple(violations))


def occupancy(rects: Iterable[Rect], side: int, dtype=np.uint8) -> np.ndarray:
    """Grid ``g[y, x]`` counting how many rectangles cover each unit cell."""
    grid = np.zeros((side, side), dtype=dtype)
    for x, y, w, h in rects:
        grid[max(y, 0):y + h, max(x, 0):x + w] += 1
    return grid


def rect_inside_mask(rect: Rect, mask: np.ndarray) -> bool:
    x, y, w, h = rect
    rows, cols = mask.shape
    if x < 0 or y < 0 or x + w > cols or y + h > rows:
        return False
    return bool(mask[y:y + h, x:x + w].all())
