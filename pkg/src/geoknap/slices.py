"""Slice machinery: dimension levels, estimate bit strings, unit slices,
linear grouping, count rounding, nice slice stacking and the conversion of
slice boxes back into whole items."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np

from .classify import Classification, Label
from .geom import Item, Packing, rects_intersect
from .packers import BoxRegion, PackingFailure, PreconditionError, steinberg, strip_remove_repack


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _id_key(i):
    return (0, i, "") if isinstance(i, int) else (1, 0, str(i))


# ------------------------------------------------------------- levels


def level_breakpoints(eps, side: int) -> list[Fraction]:
    """Exact powers ``(1+eps)^l`` for ``l = 0 .. max_level(side) + 1``."""
    base = 1 + _frac(eps)
    out = [Fraction(1)]
    while out[-1] <= side:
        out.append(out[-1] * base)
    return out


def max_level(eps, side: int) -> int:
    """``floor(log_{1+eps} side)``, computed exactly."""
    return len(level_breakpoints(eps, side)) - 2


def level_of(length: int, eps) -> int:
    base = 1 + _frac(eps)
    lvl, power = 0, base
    while power <= length:
        power *= base
        lvl += 1
    return lvl


@dataclass(frozen=True)
class DimensionClass:
    orientation: str  # "hor" | "ver"
    level: int
    members: tuple


def group_by_dimension(classification: Classification, items: Sequence[Item] | Mapping, eps) -> list[DimensionClass]:
    """Group skewed items by the level of their short side (height for
    horizontal items, width for vertical ones)."""
    index = items if isinstance(items, Mapping) else {it.id: it for it in items}
    buckets: dict = defaultdict(list)
    for iid, label in classification.labels.items():
        if label is Label.HORIZONTAL:
            buckets[("hor", level_of(index[iid].height, eps))].append(iid)
        elif label is Label.VERTICAL:
            buckets[("ver", level_of(index[iid].width, eps))].append(iid)
    return [DimensionClass(o, lvl, tuple(sorted(m, key=_id_key))) for (o, lvl), m in sorted(buckets.items())]


# ---------------------------------------------------------- estimates


@dataclass(frozen=True)
class EstimateCode:
    bits: str
    ks: tuple[int, ...]
    unit: Fraction

    @property
    def estimates(self) -> dict[int, Fraction]:
        return {lvl: k * self.unit for lvl, k in enumerate(self.ks)}

    def __len__(self):
        return len(self.bits)


def estimate_unit(opt_size: int, eps, side: int) -> Fraction:
    """``eps * opt / (4 L)`` with ``L = max(1, floor(log_{1+eps} side))``."""
    lam = max(1, max_level(eps, side))
    return _frac(eps) * opt_size / (4 * lam)


def encode_estimates(group_counts: Mapping[int, int], opt_size: int, eps, side: int) -> EstimateCode:
    """Per level ``l = 0..floor(log_{1+eps} side)`` write ``k_l`` zeros then a
    one, where ``k_l`` is the largest integer with ``k_l * unit <= count_l``."""
    levels = max_level(eps, side) + 1
    stray = [lvl for lvl in group_counts if not 0 <= lvl < levels]
    if stray:
        raise ValueError(f"levels {stray} outside 0..{levels - 1}")
    if opt_size <= 0:
        ks = tuple(0 for _ in range(levels))
        return EstimateCode("1" * levels, ks, Fraction(0))
    unit = estimate_unit(opt_size, eps, side)
    ks = tuple(math.floor(Fraction(group_counts.get(lvl, 0)) / unit) for lvl in range(levels))
    return EstimateCode("".join("0" * k + "1" for k in ks), ks, unit)


def decode_estimates(bits: str, opt_size: int, eps, side: int) -> EstimateCode:
    if bits and bits[-1] != "1":
        raise ValueError("estimate code must end with a separator")
    if set(bits) - {"0", "1"}:
        raise ValueError("estimate code must be a bit string")
    ks = tuple(len(run) for run in bits.split("1")[:-1])
    unit = estimate_unit(opt_size, eps, side) if opt_size > 0 else Fraction(0)
    return EstimateCode(bits, ks, unit)


# -------------------------------------------------------------- slices


@dataclass(frozen=True)
class Slice:
    parent: Hashable
    orientation: str
    length: int
    profit: Fraction
    index: int = 0
    level: int = 0


def build_slices(cls: DimensionClass, estimate, eps, items: Sequence[Item] | Mapping) -> list[Slice]:
    """Cut the ``ceil(estimate / (1+eps))`` narrowest members of ``cls`` (at
    most all of them) into unit slices carrying ``1/(1+eps)^level`` profit each."""
    index = items if isinstance(items, Mapping) else {it.id: it for it in items}
    eps = _frac(eps)
    estimate = _frac(estimate)
    if estimate < 0:
        raise ValueError("estimate must be non-negative")
    take = min(len(cls.members), math.ceil(estimate / (1 + eps)))
    hor = cls.orientation == "hor"
    members = sorted(cls.members, key=lambda i: ((index[i].width if hor else index[i].height), _id_key(i)))
    profit = 1 / (1 + eps) ** cls.level
    out = []
    for iid in members[:take]:
        it = index[iid]
        length, count = (it.width, it.height) if hor else (it.height, it.width)
        out.extend(Slice(iid, cls.orientation, length, profit, k, cls.level) for k in range(count))
    return out


@dataclass(frozen=True)
class SliceClass:
    level: int
    j: int
    rounded_length: int
    members: tuple[Slice, ...]

    @property
    def count(self) -> int:
        return len(self.members)

    @property
    def profit(self) -> Fraction:
        return sum((s.profit for s in self.members), Fraction(0))


def _slice_order(s: Slice):
    return (-s.length, _id_key(s.parent), s.index)


def linear_groups(slices: Sequence[Slice], eps) -> list[list[Slice]]:
    """Sorted slices cut into consecutive groups of ``ceil(n / (1/eps + 1))``."""
    eps = _frac(eps)
    if eps.numerator != 1:
        raise ValueError("1/eps must be integral")
    ordered = sorted(slices, key=_slice_order)
    if not ordered:
        return []
    size = math.ceil(Fraction(len(ordered), eps.denominator + 1))
    return [ordered[k:k + size] for k in range(0, len(ordered), size)]


def linear_grouping(slices: Sequence[Slice], eps) -> list[SliceClass]:
    """Drop the group of longest slices and round every other group up to its maximum."""
    groups = linear_groups(slices, eps)
    level = slices[0].level if slices else 0
    return [SliceClass(level, j, g[0].length, tuple(g)) for j, g in enumerate(groups[1:], start=1)]


def guess_box_counts(true_counts: Mapping[tuple, int], eps, containers: int) -> dict[tuple, Fraction]:
    """Round each ``(level, j, container)`` count down to a multiple of
    ``eps / containers`` times the class total over all containers."""
    eps = _frac(eps)
    if containers < 1:
        raise ValueError("containers must be >= 1")
    totals: dict = defaultdict(int)
    for (lvl, j, _), c in true_counts.items():
        totals[(lvl, j)] += c
    out = {}
    for key, c in true_counts.items():
        total = totals[key[:2]]
        if total == 0:
            out[key] = Fraction(0)
            continue
        unit = eps * total / containers
        out[key] = math.floor(Fraction(c) / unit) * unit
    return out


# ------------------------------------------------------- nice stacking


class SliceInfeasible(ValueError):
    def __init__(self, container, message):
        super().__init__(f"container {container!r}: {message}")
        self.container = container


@dataclass(frozen=True)
class SliceContainer:
    """Region receiving stacked slices.

    ``mask`` marks the usable cells; lanes (rows for horizontal containers,
    columns for vertical ones) are filled starting from ``first_lane`` and
    moving by ``step``; inside a lane a slice is pushed to the low or high
    end of the lane's run of free cells.
    """

    name: Hashable
    mask: np.ndarray
    horizontal: bool
    first_lane: int
    step: int
    push_low: bool
    order: int = 0

    @classmethod
    def from_box(cls, name, box: BoxRegion, side: int, horizontal: bool, push_low: bool = True,
                 from_low_edge: bool = True, order: int = 0) -> "SliceContainer":
        mask = np.zeros((side, side), dtype=bool)
        mask[box.y:box.y + box.h, box.x:box.x + box.w] = True
        lo, hi = (box.y, box.y + box.h) if horizontal else (box.x, box.x + box.w)
        return cls(name, mask, horizontal, lo if from_low_edge else hi - 1, 1 if from_low_edge else -1, push_low, order)

    def lanes(self):
        lane = self.first_lane
        while 0 <= lane < self.mask.shape[0]:
            row = self.mask[lane, :] if self.horizontal else self.mask[:, lane]
            if not row.any():
                return
            yield lane, row
            lane += self.step


def container_for_piece(corr, piece, name=None, order: int = 0) -> SliceContainer:
    """Slice container for one piece of a corridor: lanes start at the piece's
    longer edge and slices are pushed towards the corridor start for the
    first piece and towards its end for the last."""
    edge = piece.longer_edge()
    line = piece.line_a if edge == "a" else piece.line_b
    other = piece.line_b if edge == "a" else piece.line_a
    step = 1 if other > line else -1
    first = line if step == 1 else line - 1
    j = piece.index
    if corr.kind == "path" and j == corr.s - 1 and corr.s > 1:
        target = corr.ends[1]
    else:
        target = corr.ends[0] if corr.kind == "path" else 0
    ys, xs = np.nonzero(piece.mask)
    lo = (xs.min() if piece.horizontal else ys.min()) if xs.size else 0
    hi = (xs.max() + 1 if piece.horizontal else ys.max() + 1) if xs.size else 0
    push_low = abs(target - lo) <= abs(target - hi)
    return SliceContainer(name if name is not None else j, piece.mask, piece.horizontal, first, step, push_low, order)


def _lane_run(row: np.ndarray, push_low: bool) -> tuple[int, int]:
    idx = np.flatnonzero(row)
    if push_low:
        start = idx[0]
        stop = start
        while stop < row.size and row[stop]:
            stop += 1
        return int(start), int(stop)
    stop = idx[-1] + 1
    start = stop - 1
    while start > 0 and row[start - 1]:
        start -= 1
    return int(start), int(stop)


def pack_slices_nicely(containers: Sequence[SliceContainer], lengths: Mapping[Hashable, Sequence[int]],
                       side: int) -> dict[Hashable, list[tuple[int, int, int, int]]]:
    """Stack unit slices in every container, longest first, one per lane.

    ``lengths[name]`` lists the slice lengths for that container.  Containers
    are processed by ``order`` (the middle piece of a U last).  Returns the
    slice rectangles ``(x, y, w, h)`` per container.
    """
    out = {}
    taken = np.zeros((side, side), dtype=bool)
    for cont in sorted(containers, key=lambda c: (c.order, _id_key(c.name))):
        want = sorted(lengths.get(cont.name, ()), reverse=True)
        rects = []
        lanes = cont.lanes()
        for length in want:
            for lane, row in lanes:
                row = row & ~(taken[lane, :] if cont.horizontal else taken[:, lane])
                if not row.any():
                    continue
                start, stop = _lane_run(row, cont.push_low)
                if stop - start < length:
                    raise SliceInfeasible(cont.name, f"slice of length {length} does not fit lane {lane}")
                a = start if cont.push_low else stop - length
                rect = (a, lane, length, 1) if cont.horizontal else (lane, a, 1, length)
                rects.append(rect)
                x, y, w, h = rect
                taken[y:y + h, x:x + w] = True
                break
            else:
                raise SliceInfeasible(cont.name, f"overfull: {len(want)} slices, {len(rects)} lanes")
        out[cont.name] = rects
    return out


# ------------------------------------------------- slices back to items


@dataclass
class SliceAssignment:
    assigned: dict  # item id -> box index
    dropped: tuple
    fractional: Fraction
    shares: dict = field(default_factory=dict)  # item id -> list of (box, amount)


def slices_to_items(items: Sequence[Item], boxes: Sequence[tuple[int, int]], orientation: str = "hor") -> SliceAssignment:
    """Fill slice boxes ``(length, capacity)`` with whole items.

    Items (shortest first) pour their thickness into boxes (shortest first)
    that are long enough; an item split between boxes is dropped.
    """
    hor = orientation == "hor"

    def length(it):
        return it.width if hor else it.height

    def thick(it):
        return it.height if hor else it.width

    index = {it.id: it for it in items}
    order_items = sorted(items, key=lambda it: (length(it), _id_key(it.id)))
    order_boxes = sorted(range(len(boxes)), key=lambda b: (boxes[b][0], b))
    remaining = {b: boxes[b][1] for b in order_boxes}
    shares: dict = defaultdict(list)
    fractional = Fraction(0)
    pos = 0
    for it in order_items:
        # boxes too short now stay too short for every later (longer) item
        while pos < len(order_boxes) and (boxes[order_boxes[pos]][0] < length(it) or remaining[order_boxes[pos]] == 0):
            pos += 1
        if pos == len(order_boxes):
            break
        need = thick(it)
        while need and pos < len(order_boxes):
            b = order_boxes[pos]
            put = min(need, remaining[b])
            shares[it.id].append((b, put))
            remaining[b] -= put
            need -= put
            if remaining[b] == 0:
                pos += 1
        fractional += Fraction(thick(it) - need, thick(it))
    assigned, dropped = {}, []
    for iid, parts in shares.items():
        if len(parts) == 1 and parts[0][1] == thick(index[iid]):
            assigned[iid] = parts[0][0]
        else:
            dropped.append(iid)
    return SliceAssignment(assigned, tuple(sorted(dropped, key=_id_key)), fractional, dict(shares))


# ----------------------------------------------- subcorridor partition


@dataclass
class SubcorridorBoxes:
    boxes: list[BoxRegion]
    packing: Packing
    dropped: tuple


def partition_subcorridor(box: BoxRegion, items: Sequence[Item], placed: Packing, eps) -> SubcorridorBoxes:
    """Rectangular piece to stacked boxes: thin items go through strip removal,
    thicker leftovers are packed with the area-condition packer into the band
    of the removed strip when they fit there, otherwise dropped."""
    eps = _frac(eps)
    index = {it.id: it for it in items}
    horizontal = box.w >= box.h
    short = box.h if horizontal else box.w
    limit = eps ** 4 * short
    thin = [p for p in placed if min(index[p.item_id].dims(p.rotated)) <= limit]
    thick = [p for p in placed if min(index[p.item_id].dims(p.rotated)) > limit]
    res = strip_remove_repack(box, items, Packing(placed.knapsack_side, tuple(thin)), eps, horizontal)
    placements = [pl for nice in res.packings for pl in nice.placements]
    boxes = list(res.sub_boxes)
    dropped = list(res.dropped)
    if thick:
        count = eps.denominator
        k = res.dropped_strip if res.dropped_strip is not None else 0
        lo, hi = short * k // count, short * (k + 1) // count
        band = (BoxRegion(box.x, box.y + lo, box.w, hi - lo) if horizontal
                else BoxRegion(box.x + lo, box.y, hi - lo, box.h)) if hi > lo else None
        leftovers = [index[p.item_id] for p in thick]
        packed = False
        if band is not None:
            occupied = [pl.rect(index[pl.item_id]) for pl in placements]
            if not any(rects_intersect(band.rect, r) for r in occupied):
                try:
                    pk = steinberg(leftovers, band, placed.knapsack_side)
                    placements += list(pk.placements)
                    boxes.append(band)
                    packed = True
                except (PreconditionError, PackingFailure):
                    pass
        if not packed:
            dropped += [p.item_id for p in thick]
    return SubcorridorBoxes(boxes, Packing(placed.knapsack_side, tuple(placements)), tuple(sorted(dropped, key=_id_key)))
