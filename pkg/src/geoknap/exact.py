"""Exact solvers for tiny instances: the optimum packing and one-item-per-colour
feasibility inside a region."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, BudgetRefused
from .geom import Item, Packing, Placement


@dataclass(frozen=True)
class ExactConfig:
    max_items: int = 10
    max_side: int = 16
    allow_rotation: bool = False
    node_limit: int = 50_000_000


class ExactResult(NamedTuple):
    profit: int
    packing: Packing


def _id_order(i):
    return (0, i, "") if isinstance(i, int) else (1, 0, str(i))


def normal_positions(lengths: Iterable[int], side: int) -> np.ndarray:
    """Flags for every coordinate in ``[0, side)`` that is a sum of a sub-multiset of ``lengths``."""
    reach = np.zeros(side + 1, dtype=bool)
    reach[0] = True
    for v in lengths:
        if v <= side:
            reach[v:] |= reach[:-v].copy() if v > 0 else reach[v:]
    return reach[:side]


def _search_size(items: Sequence[Item], side: int, rot: bool) -> float:
    """log10 of a crude upper bound on the branching tree."""
    cells = side * side * (2 if rot else 1) + 1
    return len(items) * math.log10(cells)


def optimal_pack(items: Sequence[Item], side: int, config: ExactConfig = ExactConfig()) -> ExactResult:
    """Maximum-profit packing of ``items`` into the ``side x side`` square.

    Items are branched in order of decreasing area (ties by id), each over
    its normal positions and orientations and finally over leaving it out.
    Among optimal packings the first in that order is returned.
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    rot_ok = config.allow_rotation
    usable = [it for it in items if it.width <= side and it.height <= side]
    est = _search_size(usable, side, rot_ok)
    if len(usable) > config.max_items or side > config.max_side:
        raise BudgetRefused(
            f"instance has {len(usable)} items on a {side}x{side} grid; limits are "
            f"{config.max_items} items and side {config.max_side} (search space ~1e{est:.0f})",
            stage="exact", estimate=est)
    if not usable:
        return ExactResult(0, Packing(side, ()))
    order = sorted(usable, key=lambda it: (-it.area, _id_order(it.id)))
    w = np.array([it.width for it in order], dtype=np.int64)
    h = np.array([it.height for it in order], dtype=np.int64)
    p = np.array([it.profit for it in order], dtype=np.int64)
    rot = np.array([rot_ok and it.width != it.height for it in order], dtype=np.bool_)
    xs = [it.width for it in order] + ([it.height for it in order] if rot_ok else [])
    ys = [it.height for it in order] + ([it.width for it in order] if rot_ok else [])
    normal_x = normal_positions(xs, side)
    normal_y = normal_positions(ys, side)
    density = sorted(range(len(order)), key=lambda k: (-p[k] / (w[k] * h[k]), k))
    profit, best, nodes, hit = _kernels.knapsack_search(
        side, w, h, p, rot, normal_x, normal_y, np.array(density, dtype=np.int64), config.node_limit)
    if hit:
        raise BudgetExceeded(f"node limit {config.node_limit} reached", stage="exact", estimate=est)
    placements = tuple(
        Placement(order[k].id, int(best[k, 0]), int(best[k, 1]), bool(best[k, 2]))
        for k in range(len(order)) if best[k, 0] >= 0)
    return ExactResult(int(profit), Packing(side, placements))


def _colour_set(gamma) -> list:
    if isinstance(gamma, (int, np.integer)):
        return list(range(1, int(gamma) + 1))
    return sorted(set(gamma))


def rainbow_feasible(items: Sequence[Item], colors: dict, region: np.ndarray, gamma,
                     config: ExactConfig = ExactConfig(), blocked: np.ndarray | None = None):
    """Can one item of every colour in ``gamma`` be packed inside ``region``?

    ``gamma`` is a colour count (colours ``1..gamma``) or an explicit set.
    ``region`` is a boolean ``[y, x]`` mask of usable cells; ``blocked``
    optionally removes further cells.  Every integral position is tried.
    Returns ``(verdict, witness Packing or None)``.
    """
    palette = _colour_set(gamma)
    free = np.asarray(region, dtype=bool)
    if blocked is not None:
        free = free & ~np.asarray(blocked, dtype=bool)
    side = free.shape[0]
    if not palette:
        return True, Packing(side, ())
    if side > config.max_side or free.shape[1] > config.max_side:
        raise BudgetRefused(f"region {free.shape} exceeds side limit {config.max_side}", stage="rainbow")
    pool = [it for it in items if colors.get(it.id) in palette]
    if len(pool) > config.max_items:
        raise BudgetRefused(f"{len(pool)} coloured items exceed limit {config.max_items}", stage="rainbow")
    per_colour = []
    for c in palette:
        opts = []
        for it in sorted((it for it in pool if colors[it.id] == c), key=lambda it: _id_order(it.id)):
            for r in ((False, True) if config.allow_rotation and it.width != it.height else (False,)):
                ww, hh = it.dims(r)
                fits = _kernels.fit_positions(free, ww, hh)
                for y, x in zip(*np.nonzero(fits)):
                    opts.append((it.id, int(x), int(y), ww, hh, r))
        if not opts:
            return False, None
        per_colour.append(opts)
    # fewest options first keeps the search narrow
    per_colour.sort(key=len)
    flat = [o for opts in per_colour for o in opts]
    ptr = np.cumsum([0] + [len(opts) for opts in per_colour])
    rects = np.array([[o[1], o[2], o[3], o[4]] for o in flat], dtype=np.int64)
    status, chosen, _ = _kernels.rainbow_search(free.astype(np.uint8), rects, ptr, config.node_limit)
    if status < 0:
        raise BudgetExceeded(f"node limit {config.node_limit} reached", stage="rainbow")
    if status == 0:
        return False, None
    placements = tuple(Placement(flat[k][0], flat[k][1], flat[k][2], flat[k][5]) for k in chosen)
    return True, Packing(side, placements)
