"""Container packers: NFDH shelves, stacks, an area-condition packer and the
strip-removal repacking of a box."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from .geom import Item, Packing, Placement, Rect, rects_intersect


@dataclass(frozen=True)
class BoxRegion:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box needs positive size, got {self.w}x{self.h}")

    @property
    def rect(self) -> Rect:
        return (self.x, self.y, self.w, self.h)

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, rect: Rect) -> bool:
        x, y, w, h = rect
        return self.x <= x and self.y <= y and x + w <= self.x + self.w and y + h <= self.y + self.h


@dataclass(frozen=True)
class NicePacking:
    box: BoxRegion
    placements: tuple[Placement, ...]
    layout: str  # "stack-horizontal" | "stack-vertical" | "shelves"
    unpacked: tuple = ()

    def packing(self, side: int | None = None) -> Packing:
        side = side if side is not None else max(self.box.x + self.box.w, self.box.y + self.box.h)
        return Packing(side, self.placements)

    def item_ids(self) -> list:
        return [p.item_id for p in self.placements]


class PreconditionError(ValueError):
    def __init__(self, message: str, offenders: Sequence = ()):
        super().__init__(message)
        self.offenders = list(offenders)


class StackFailure(ValueError):
    def __init__(self, deficit: int):
        super().__init__(f"items exceed the container by {deficit}")
        self.deficit = deficit


class PackingFailure(RuntimeError):
    pass


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


# ------------------------------------------------------------------- NFDH


def nfdh(items: Sequence[Item], box: BoxRegion, eps) -> NicePacking:
    """Next-Fit Decreasing Height.  Packs a prefix of the items sorted by
    height (non-increasing, ties by id) into shelves from the bottom of ``box``."""
    eps = _frac(eps)
    bad = [it.id for it in items
           if it.width * eps.denominator > eps.numerator * box.w
           or it.height * eps.denominator > eps.numerator * box.h]
    if bad:
        raise PreconditionError(f"{len(bad)} items exceed eps times the box sides", bad)
    order = sorted(items, key=lambda it: (-it.height, _id_key(it.id)))
    placements = []
    shelf_y, shelf_h, cursor = 0, 0, 0
    stopped = len(order)
    for n, it in enumerate(order):
        if shelf_h == 0:
            shelf_h = it.height
        if cursor + it.width > box.w:
            shelf_y += shelf_h
            shelf_h, cursor = it.height, 0
        if shelf_y + it.height > box.h:
            stopped = n
            break
        placements.append(Placement(it.id, box.x + cursor, box.y + shelf_y))
        cursor += it.width
    return NicePacking(box, tuple(placements), "shelves", tuple(it.id for it in order[stopped:]))


def nfdh_bound_holds(items: Sequence[Item], packed_area: int, box: BoxRegion, eps) -> bool:
    """``a(I') >= min(a(I), (1 - 2 eps) w h)`` in exact integers."""
    eps = _frac(eps)
    total = sum(it.area for it in items)
    if packed_area >= total:
        return True
    return packed_area * eps.denominator >= (eps.denominator - 2 * eps.numerator) * box.w * box.h


def _id_key(i: Hashable):
    # mixed id types still sort deterministically
    return (type(i).__name__, i) if not isinstance(i, (int, str)) else (0 if isinstance(i, int) else 1, i)


# ----------------------------------------------------------------- stacks


def stack_pack(items: Sequence[Item], box: BoxRegion, orientation: str = "horizontal",
               from_end: bool = False) -> NicePacking:
    """Stack items on top of each other (horizontal) or side by side
    (vertical), longest first, ties by id.  ``from_end`` starts the stack at
    the top (or right) edge instead."""
    horizontal = orientation in ("horizontal", "hor", "h")
    key = (lambda it: (-it.width, _id_key(it.id))) if horizontal else (lambda it: (-it.height, _id_key(it.id)))
    order = sorted(items, key=key)
    too_long = [it.id for it in order if (it.width > box.w if horizontal else it.height > box.h)]
    if too_long:
        raise PreconditionError("items longer than the container", too_long)
    extent = box.h if horizontal else box.w
    used = sum(it.height if horizontal else it.width for it in order)
    if used > extent:
        raise StackFailure(used - extent)
    placements = []
    pos = 0
    for it in order:
        step = it.height if horizontal else it.width
        off = extent - pos - step if from_end else pos
        if horizontal:
            placements.append(Placement(it.id, box.x, box.y + off))
        else:
            placements.append(Placement(it.id, box.x + off, box.y))
        pos += step
    return NicePacking(box, tuple(placements), "stack-horizontal" if horizontal else "stack-vertical")


# -------------------------------------------------------------- steinberg


def steinberg_condition(items: Sequence[Item], box: BoxRegion) -> str | None:
    """Return the violated inequality, or None when the area condition holds."""
    if not items:
        return None
    max_w = max(it.width for it in items)
    max_h = max(it.height for it in items)
    if max_w > box.w:
        return f"max width {max_w} > {box.w}"
    if max_h > box.h:
        return f"max height {max_h} > {box.h}"
    area = sum(it.area for it in items)
    slack = max(2 * max_w - box.w, 0) * max(2 * max_h - box.h, 0)
    if 2 * area > box.w * box.h - slack:
        return f"2*area {2 * area} > {box.w * box.h} - {slack}"
    return None


class _FreeRects:
    """Maximal free rectangles inside a container (guillotine-free bookkeeping)."""

    def __init__(self, w: int, h: int):
        self.free: list[Rect] = [(0, 0, w, h)]

    def place(self, r: Rect) -> None:
        out = []
        rx, ry, rw, rh = r
        for f in self.free:
            if not rects_intersect(f, r):
                out.append(f)
                continue
            fx, fy, fw, fh = f
            if rx > fx:
                out.append((fx, fy, rx - fx, fh))
            if rx + rw < fx + fw:
                out.append((rx + rw, fy, fx + fw - rx - rw, fh))
            if ry > fy:
                out.append((fx, fy, fw, ry - fy))
            if ry + rh < fy + fh:
                out.append((fx, ry + rh, fw, fy + fh - ry - rh))
        # drop rectangles contained in another
        out = list(dict.fromkeys(out))
        self.free = [a for a in out if not any(
            a != b and b[0] <= a[0] and b[1] <= a[1] and a[0] + a[2] <= b[0] + b[2] and a[1] + a[3] <= b[1] + b[3]
            for b in out)]


def _maxrects(order: Sequence[Item], w: int, h: int, rule: str) -> list[tuple[Hashable, int, int]] | None:
    fr = _FreeRects(w, h)
    out = []
    for it in order:
        best, best_score = None, None
        for fx, fy, fw, fh in fr.free:
            if it.width <= fw and it.height <= fh:
                if rule == "short_side":
                    score = (min(fw - it.width, fh - it.height), max(fw - it.width, fh - it.height))
                elif rule == "bottom_left":
                    score = (fy + it.height, fx)
                else:
                    score = (fw * fh - it.area, min(fw - it.width, fh - it.height))
                if best_score is None or score < best_score:
                    best, best_score = (fx, fy), score
        if best is None:
            return None
        out.append((it.id, best[0], best[1]))
        fr.place((best[0], best[1], it.width, it.height))
    return out


_ORDERS = {
    "area": lambda it: (-it.area, -max(it.width, it.height)),
    "height": lambda it: (-it.height, -it.width),
    "width": lambda it: (-it.width, -it.height),
    "long_side": lambda it: (-max(it.width, it.height), -min(it.width, it.height)),
    "perimeter": lambda it: (-(it.width + it.height), -it.area),
}


def _wide_stack_then_rest(items: Sequence[Item], w: int, h: int):
    """Stack the items wider than half the box at the bottom, then fill the
    rest of the box around them."""
    wide = sorted((it for it in items if 2 * it.width > w), key=lambda it: (-it.width, _id_key(it.id)))
    if not wide:
        return None
    rest = [it for it in items if 2 * it.width <= w]
    fr = _FreeRects(w, h)
    out, y = [], 0
    for it in wide:
        if y + it.height > h:
            return None
        out.append((it.id, 0, y))
        fr.place((0, y, it.width, it.height))
        y += it.height
    for order in _ORDERS.values():
        fr2 = _FreeRects(w, h)
        fr2.free = list(fr.free)
        trial = _maxrects_into(fr2, sorted(rest, key=lambda it: (order(it), _id_key(it.id))))
        if trial is not None:
            return out + trial
    return None


def _maxrects_into(fr: _FreeRects, order: Sequence[Item]):
    out = []
    for it in order:
        cands = [(fy + it.height, fx, fx, fy) for fx, fy, fw, fh in fr.free if it.width <= fw and it.height <= fh]
        if not cands:
            return None
        _, _, x, y = min(cands)
        out.append((it.id, x, y))
        fr.place((x, y, it.width, it.height))
    return out


def steinberg(items: Sequence[Item], box: BoxRegion, side: int | None = None) -> Packing:
    """Pack every item into ``box`` provided the area condition
    ``2 a(I) <= w h - (2 max_w - w)_+ (2 max_h - h)_+`` holds.

    Tries a fixed sequence of constructive layouts (wide/tall stacks first,
    then maximal-free-rectangle placement under several orderings) and
    returns the first complete one.  Inputs that only miss the area
    inequality (an item filling the whole box, say) are still attempted;
    :class:`PreconditionError` names the violated inequality when such an
    attempt fails, and :class:`PackingFailure` is raised if no layout
    succeeds although the condition holds.
    """
    why = steinberg_condition(items, box)
    if why is not None and not why.startswith("2*area"):
        raise PreconditionError(f"condition violated: {why}")
    side = side if side is not None else max(box.x + box.w, box.y + box.h)
    if not items:
        return Packing(side, ())
    attempts = [lambda: _wide_stack_then_rest(items, box.w, box.h)]
    transposed = [Item(it.id, it.height, it.width, it.profit) for it in items]

    def tall():
        got = _wide_stack_then_rest(transposed, box.h, box.w)
        return None if got is None else [(i, y, x) for i, x, y in got]

    attempts.append(tall)
    for name, key in _ORDERS.items():
        for rule in ("bottom_left", "short_side", "area_fit"):
            attempts.append(lambda key=key, rule=rule: _maxrects(
                sorted(items, key=lambda it: (key(it), _id_key(it.id))), box.w, box.h, rule))
    for attempt in attempts:
        got = attempt()
        if got is not None:
            return Packing(side, tuple(Placement(i, box.x + x, box.y + y) for i, x, y in got))
    if why is not None:
        raise PreconditionError(f"condition violated: {why}")
    raise PackingFailure("no layout found although the area condition holds")


# ------------------------------------------------------ strip removal


@dataclass
class RepackResult:
    sub_boxes: list[BoxRegion]
    packings: list[NicePacking]
    dropped: tuple
    dropped_strip: int | None
    strip_profit: list[int] = field(default_factory=list)


def _strip_bounds(extent: int, count: int) -> list[int]:
    return [extent * k // count for k in range(count + 1)]


def strip_remove_repack(box: BoxRegion, items: Sequence[Item], placed: Packing, eps,
                        horizontal: bool | None = None) -> RepackResult:
    """Cut ``box`` into ``1/eps`` strips parallel to its long side, drop the
    items touching the cheapest strip, and repack the rest as stacks.

    Items crossing two strips count towards both.  The repacking stacks all
    survivors in one container when they fit; otherwise each maximal column
    of equal-width items that touch end to end becomes its own stack.
    """
    eps = _frac(eps)
    if eps.numerator != 1:
        raise ValueError("1/eps must be integral")
    index = {it.id: it for it in items}
    if horizontal is None:
        horizontal = box.w >= box.h
    short = box.h if horizontal else box.w
    limit = eps ** 4 * short
    bad = [p.item_id for p in placed
           if min(index[p.item_id].dims(p.rotated)) > limit]
    if bad:
        raise PreconditionError("items thicker than eps^4 times the box", bad)
    for p in placed:
        if not box.contains(p.rect(index[p.item_id])):
            raise PreconditionError("item outside the box", [p.item_id])
    if not placed.placements:
        return RepackResult([], [], (), None, [])
    count = eps.denominator
    bounds = _strip_bounds(short, count)
    base = box.y if horizontal else box.x
    profit = [0] * count
    members: list[set] = [set() for _ in range(count)]
    for p in placed:
        x, y, w, h = p.rect(index[p.item_id])
        lo, hi = (y, y + h) if horizontal else (x, x + w)
        lo -= base
        hi -= base
        for k in range(count):
            if lo < bounds[k + 1] and bounds[k] < hi:
                profit[k] += index[p.item_id].profit
                members[k].add(p.item_id)
    drop = min(range(count), key=lambda k: (profit[k], k))
    dropped = members[drop]
    keep = [p for p in placed if p.item_id not in dropped]
    keep_items = [index[p.item_id] for p in keep]
    orient = "horizontal" if horizontal else "vertical"
    try:
        nice = stack_pack(keep_items, box, orient)
        return RepackResult([box], [nice], tuple(sorted(dropped, key=_id_key)), drop, profit)
    except (StackFailure, PreconditionError):
        pass
    return RepackResult(*_column_stacks(keep, index, horizontal), tuple(sorted(dropped, key=_id_key)), drop, profit)


def _column_stacks(keep: Sequence[Placement], index: dict, horizontal: bool):
    """Group placements into maximal end-to-end runs with a common footprint."""
    def footprint(p):
        x, y, w, h = p.rect(index[p.item_id])
        return (x, w, y, h) if horizontal else (y, h, x, w)

    runs: dict = {}
    for p in sorted(keep, key=lambda p: footprint(p)):
        fx, fw, lo, ext = footprint(p)
        key = (fx, fw)
        chains = runs.setdefault(key, [])
        if chains and chains[-1][1] == lo:
            chains[-1][1] = lo + ext
            chains[-1][2].append(p)
        else:
            chains.append([lo, lo + ext, [p]])
    boxes, packings = [], []
    for (fx, fw), chains in sorted(runs.items()):
        for lo, hi, ps in chains:
            b = BoxRegion(fx, lo, fw, hi - lo) if horizontal else BoxRegion(lo, fx, hi - lo, fw)
            nice = stack_pack([index[p.item_id] for p in ps], b, "horizontal" if horizontal else "vertical")
            boxes.append(b)
            packings.append(nice)
    return boxes, packings
