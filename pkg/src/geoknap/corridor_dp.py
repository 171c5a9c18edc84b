"""Colour coding and the long-chord dynamic program for path corridors.

A cell is the region between two non-crossing chords (offset vectors
``lo <= hi``), the cells already taken by items fixed higher up in the
recursion, and the set of colours still to be placed.  A cell is split by a
chord strictly between its two chords: we guess the items that cross it,
then distribute the remaining colours over the two sides.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import _kernels
from .corridor import Corridor, CorridorError, enumerate_long_chords
from .errors import BudgetExceeded
from .geom import Item, Packing, Placement, validate_packing


# ------------------------------------------------------------- colouring


@dataclass(frozen=True)
class Coloring:
    colors: dict
    gamma: int
    seed: int | None = None

    def __getitem__(self, item_id):
        return self.colors[item_id]

    def rainbow(self, ids: Iterable) -> bool:
        seen = [self.colors[i] for i in ids]
        return len(seen) == len(set(seen))


def color_items(items: Sequence[Item] | Sequence[Hashable], gamma: int, seed: int | None = 0) -> Coloring:
    """Independent uniform colours in ``1..gamma``, reproducible from ``seed``."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    rng = random.Random(seed)
    ids = [it.id if isinstance(it, Item) else it for it in items]
    return Coloring({i: rng.randint(1, gamma) for i in ids}, gamma, seed)


def _covers(fn: Sequence[int], subset: Sequence[int]) -> bool:
    return len({fn[i] for i in subset}) == len(subset)


def coloring_family(n: int, k: int, budget: int = 2_000_000, k_max: int = 6,
                    exhaustive_limit: int = 4096, seed: int = 0) -> list[Coloring]:
    """Colourings of ``0..n-1`` with ``k`` colours such that every ``k``-subset
    is rainbow under at least one of them.

    When ``k**n <= exhaustive_limit`` every colouring is a candidate;
    otherwise seeded random candidates are drawn.  A greedy cover picks the
    family, which is then checked against every subset.
    """
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    if k > k_max:
        raise BudgetExceeded(f"k={k} exceeds k_max={k_max}", stage="coloring")
    if k == 1 or n <= k:
        return [Coloring({i: min(i, k - 1) + 1 for i in range(n)}, k, None)]
    subsets = list(itertools.combinations(range(n), k))
    work = len(subsets) * n * k
    if work > budget:
        raise BudgetExceeded(f"{len(subsets)} subsets of size {k} exceed budget {budget}", stage="coloring")
    if k ** n <= exhaustive_limit:
        candidates: Iterable = itertools.product(range(1, k + 1), repeat=n)
    else:
        rng = random.Random(seed)
        # expected cover needs about e^k log C(n,k) members; draw a generous pool
        pool = max(64, int(8 * math.exp(k) * math.log(len(subsets) + 1)))
        candidates = [tuple(rng.randint(1, k) for _ in range(n)) for _ in range(pool)]
    candidates = list(candidates)
    if len(candidates) * len(subsets) > budget * 10:
        raise BudgetExceeded("candidate pool too large", stage="coloring")
    covered_by = [frozenset(s for s, sub in enumerate(subsets) if _covers(fn, sub)) for fn in candidates]
    uncovered = set(range(len(subsets)))
    chosen = []
    while uncovered:
        best = max(range(len(candidates)), key=lambda c: (len(covered_by[c] & uncovered), -c))
        gain = covered_by[best] & uncovered
        if not gain:
            raise BudgetExceeded("candidate pool does not cover every subset", stage="coloring")
        chosen.append(best)
        uncovered -= gain
    family = [Coloring({i: candidates[c][i] for i in range(n)}, k, None) for c in chosen]
    missing = [sub for sub in subsets if not any(_covers([f.colors[i] for i in range(n)], sub) for f in family)]
    if missing:
        raise AssertionError(f"family misses {missing[:3]}")
    return family


# -------------------------------------------------------------------- DP


@dataclass(frozen=True)
class DPCaps:
    chord_cap: int = 10_000
    boundary_cap: int = 6
    cell_budget: int = 200_000


@dataclass(frozen=True)
class DPCell:
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    boundary: tuple[Placement, ...]
    colors: frozenset


@dataclass
class DPResult:
    success: bool
    packing: Packing | None
    cells: int = 0
    trace: list[str] = field(default_factory=list)


def _no_chord_between(lo: Sequence[int], hi: Sequence[int]) -> bool:
    return sum(h - l for l, h in zip(lo, hi)) <= 1


def _free_cells(mask: np.ndarray) -> set:
    ys, xs = np.nonzero(mask)
    return set(zip(xs.tolist(), ys.tolist()))


def base_case_enumerate(region: np.ndarray, items: Sequence[Item], colors: dict, palette, cap: int | None = None):
    """Plain exhaustive search: one item of every colour in ``palette``
    placed at integral positions on the ``True`` cells of ``region``.

    Returns the placements or ``None``.  ``cap`` bounds how many items the
    region is allowed to host; a larger palette fails outright.
    """
    palette = sorted(set(palette))
    if not palette:
        return ()
    if cap is not None and len(palette) > cap:
        return None
    free = _free_cells(region)
    if not free:
        return None
    by_colour = {c: sorted((it for it in items if colors.get(it.id) == c), key=lambda it: repr(it.id)) for c in palette}
    if any(not v for v in by_colour.values()):
        return None
    xs = sorted({x for x, _ in free})
    ys = sorted({y for _, y in free})

    def options(it):
        for y in ys:
            for x in xs:
                cells = [(x + dx, y + dy) for dy in range(it.height) for dx in range(it.width)]
                if all(c in free for c in cells):
                    yield Placement(it.id, x, y), cells

    opts = {c: [o for it in by_colour[c] for o in options(it)] for c in palette}
    order = sorted(palette, key=lambda c: len(opts[c]))
    used: set = set()
    chosen: list[Placement] = []

    def rec(level):
        if level == len(order):
            return True
        for pl, cells in opts[order[level]]:
            if used.isdisjoint(cells):
                used.update(cells)
                chosen.append(pl)
                if rec(level + 1):
                    return True
                chosen.pop()
                used.difference_update(cells)
        return False

    return tuple(chosen) if rec(0) else None


class _Solver:
    def __init__(self, corr: Corridor, items: Sequence[Item], colors: dict, caps: DPCaps, trace: bool):
        self.corr = corr
        self.items = list(items)
        self.index = {it.id: it for it in items}
        self.colors = colors
        self.caps = caps
        self.memo: dict = {}
        self.trace = [] if trace else None
        self.cells = 0
        self.min_area = {}
        for it in items:
            c = colors.get(it.id)
            self.min_area[c] = min(self.min_area.get(c, it.area), it.area)

    # candidate chords strictly between lo and hi, closest to lo first
    def _middle_chords(self, lo, hi, palette_size):
        if self.caps.boundary_cap >= palette_size:
            diff = [h - l for l, h in zip(lo, hi)]
            half = [d // 2 for d in diff]
            if not any(half):
                k = next(i for i, d in enumerate(diff) if d)
                half[k] = 1
            return [tuple(l + d for l, d in zip(lo, half))]
        ranges = [range(l, h + 1) for l, h in zip(lo, hi)]
        mids = [c for c in itertools.product(*ranges) if c != tuple(lo) and c != tuple(hi)]
        mids.sort(key=lambda c: (sum(c) - sum(lo), c))
        return mids[: self.caps.chord_cap]

    def _need_area(self, palette) -> int:
        return sum(self.min_area.get(c, 10 ** 9) for c in palette)

    def solve(self, lo, hi, blocked: np.ndarray, palette: frozenset, boundary: tuple):
        if not palette:
            return ()
        region = self.corr.region_between(lo, hi)
        taken = blocked & region
        key = (lo, hi, np.packbits(taken).tobytes(), palette)
        if key in self.memo:
            return self.memo[key]
        self.cells += 1
        if self.cells > self.caps.cell_budget:
            raise BudgetExceeded(f"cell budget {self.caps.cell_budget} exhausted", stage="corridor-dp")
        free = region & ~taken
        if self._need_area(palette) > int(free.sum()):
            result = None
        elif _no_chord_between(lo, hi):
            pool = [it for it in self.items if self.colors.get(it.id) in palette]
            result = base_case_enumerate(free, pool, self.colors, palette)
        else:
            result = self._split(lo, hi, free, taken, palette)
        self.memo[key] = result
        if self.trace is not None:
            cell = DPCell(lo, hi, boundary, palette)
            self.trace.append(f"{_fmt_cell(cell, int(taken.sum()))} -> {'success' if result is not None else 'fail'}")
        return result

    def _crossing_options(self, free, side_lo, side_hi, palette):
        """Placements inside ``free`` with cells on both sides of the chord."""
        opts = {c: [] for c in palette}
        lo_sum = _window_counter(side_lo)
        hi_sum = _window_counter(side_hi)
        for it in sorted(self.items, key=lambda it: repr(it.id)):
            c = self.colors.get(it.id)
            if c not in palette:
                continue
            fits = _kernels.fit_positions(free, it.width, it.height)
            ys, xs = np.nonzero(fits)
            if ys.size == 0:
                continue
            a = lo_sum(xs, ys, it.width, it.height)
            b = hi_sum(xs, ys, it.width, it.height)
            for x, y in zip(xs[(a > 0) & (b > 0)].tolist(), ys[(a > 0) & (b > 0)].tolist()):
                opts[c].append((Placement(it.id, x, y), (x, y, it.width, it.height)))
        return opts

    def _split(self, lo, hi, free, taken, palette):
        for mid in self._middle_chords(lo, hi, len(palette)):
            side_lo = self.corr.region_between(lo, mid) & free
            side_hi = self.corr.region_between(mid, hi) & free
            opts = self._crossing_options(free, side_lo, side_hi, palette)
            colours = sorted(palette)
            for crossing in self._crossing_sets(colours, opts):
                used = frozenset(self.colors[p.item_id] for p, _ in crossing)
                rest = sorted(palette - used)
                extra = np.zeros_like(free)
                for _, (x, y, w, h) in crossing:
                    extra[y:y + h, x:x + w] = True
                blocked = taken | extra
                area_lo = int((side_lo & ~extra).sum())
                area_hi = int((side_hi & ~extra).sum())
                bnd = tuple(p for p, _ in crossing)
                for bits in range(1 << len(rest)):
                    left = frozenset(c for i, c in enumerate(rest) if bits >> i & 1)
                    right = frozenset(rest) - left
                    if self._need_area(left) > area_lo or self._need_area(right) > area_hi:
                        continue
                    got_lo = self.solve(lo, mid, blocked, left, bnd)
                    if got_lo is None:
                        continue
                    got_hi = self.solve(mid, hi, blocked, right, bnd)
                    if got_hi is None:
                        continue
                    return bnd + tuple(got_lo) + tuple(got_hi)
        return None

    def _crossing_sets(self, colours, opts):
        cap = self.caps.boundary_cap
        chosen: list = []
        occupied: list = []

        def rec(k):
            if k == len(colours):
                yield list(chosen)
                return
            yield from rec(k + 1)
            if len(chosen) >= cap:
                return
            for pl, rect in opts[colours[k]]:
                if any(_overlap(rect, r) for r in occupied):
                    continue
                chosen.append((pl, rect))
                occupied.append(rect)
                yield from rec(k + 1)
                chosen.pop()
                occupied.pop()

        yield from rec(0)


def _overlap(a, b) -> bool:
    return a[0] < b[0] + b[2] and b[0] < a[0] + a[2] and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]


def _window_counter(mask: np.ndarray):
    sat = np.zeros((mask.shape[0] + 1, mask.shape[1] + 1), dtype=np.int64)
    sat[1:, 1:] = mask.astype(np.int64).cumsum(0).cumsum(1)

    def count(xs, ys, w, h):
        return sat[ys + h, xs + w] - sat[ys, xs + w] - sat[ys + h, xs] + sat[ys, xs]

    return count


def _fmt_cell(cell: DPCell, blocked_cells: int) -> str:
    ids = ",".join(repr(p.item_id) for p in sorted(cell.boundary, key=lambda p: repr(p.item_id)))
    cols = ",".join(str(c) for c in sorted(cell.colors))
    return f"cell lo={cell.lo} hi={cell.hi} fixed=[{ids}] blocked={blocked_cells} colors={{{cols}}}"


def solve_corridor(corr: Corridor, items: Sequence[Item], colors: Coloring | dict, gamma,
                   caps: DPCaps = DPCaps(), trace: bool = False) -> DPResult:
    """Pack one item of every colour in ``gamma`` (a count or an explicit
    colour set) into the path corridor ``corr``.

    The root cell lies between the two boundary chords.  Raises
    :class:`BudgetExceeded` when the cell budget runs out; a ``fail``
    verdict means no packing exists within the caps.
    """
    if corr.kind != "path":
        raise CorridorError("the chord DP handles path corridors only")
    colmap = colors.colors if isinstance(colors, Coloring) else dict(colors)
    palette = frozenset(range(1, gamma + 1)) if isinstance(gamma, (int, np.integer)) else frozenset(gamma)
    if not palette:
        return DPResult(True, Packing(corr.side, ()), 0, [])
    stream = enumerate_long_chords(corr, cap=2)
    first, second = list(stream)[:2]
    lo, hi = second.offsets, first.offsets  # stream yields the far boundary first
    pool = [it for it in items if colmap.get(it.id) in palette]
    solver = _Solver(corr, pool, colmap, caps, trace)
    got = solver.solve(tuple(lo), tuple(hi), np.zeros((corr.side, corr.side), dtype=bool), palette, ())
    if got is None:
        return DPResult(False, None, solver.cells, solver.trace or [])
    packing = Packing(corr.side, tuple(sorted(got, key=lambda p: repr(p.item_id))))
    _check_witness(corr, solver.index, colmap, palette, packing)
    return DPResult(True, packing, solver.cells, solver.trace or [])


def _check_witness(corr: Corridor, index: dict, colors: dict, palette, packing: Packing) -> None:
    report = validate_packing(index, packing)
    if not report.valid:
        raise AssertionError(f"DP produced an invalid packing: {report.violations}")
    mask = corr.mask
    for p in packing:
        x, y, w, h = p.rect(index[p.item_id])
        if not mask[y:y + h, x:x + w].all():
            raise AssertionError(f"DP placed {p.item_id!r} outside the corridor")
    got = sorted(colors[p.item_id] for p in packing)
    if got != sorted(palette):
        raise AssertionError(f"DP colours {got} differ from {sorted(palette)}")
