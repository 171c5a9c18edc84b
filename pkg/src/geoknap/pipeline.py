"""End-to-end run at desk scale: reference optimum, thresholds, corridors,
L/U splitting, then either the colour-coding DP or the slices route."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .classify import Label, classify_items, select_threshold_pair
from .corridor import (Corridor, CorridorError, SeparationError, nice_partition,
                       placements_in, split_into_LU)
from .corridor_dp import Coloring, DPCaps, coloring_family, color_items, solve_corridor
from .errors import BudgetExceeded
from .exact import ExactConfig, optimal_pack
from .geom import Item, Packing, Placement, rects_intersect, validate_packing
from .instance import Instance
from .slices import (DimensionClass, SliceInfeasible, build_slices, container_for_piece, decode_estimates,
                     encode_estimates, guess_box_counts, level_of, linear_grouping, pack_slices_nicely,
                     slices_to_items)


@dataclass(frozen=True)
class PipelineCaps:
    exact: ExactConfig = ExactConfig()
    dp: DPCaps = DPCaps()
    c_eps: Fraction = Fraction(4)
    branch: str = "auto"  # auto | dp | slices
    coloring_budget: int = 2_000_000
    max_coloring_trials: int = 20_000


@dataclass(frozen=True)
class StageRecord:
    stage: str
    profit: int
    note: str = ""


@dataclass
class PipelineResult:
    packing: Packing
    log: list[StageRecord] = field(default_factory=list)
    reference_profit: int = 0
    branch: str = ""

    @property
    def profit(self) -> int:
        return self.log[-1].profit if self.log else 0


def _oriented(item: Item, rotated: bool) -> Item:
    return Item(item.id, item.height, item.width, item.profit) if rotated else item


def box_clusters(items: dict, packing: Packing, ids: Sequence, horizontal_of: dict) -> list[tuple[tuple[int, int, int, int], list]]:
    """Greedily merge same-orientation placed items into rectangles that
    contain no other placed item and do not overlap each other."""
    rect_of = {p.item_id: p.rect(items[p.item_id]) for p in packing}
    clusters = [(rect_of[i], [i]) for i in sorted(ids, key=repr)]
    others = [rect_of[i] for i in rect_of if i not in set(ids)]

    def union(a, b):
        x0, y0 = min(a[0], b[0]), min(a[1], b[1])
        x1, y1 = max(a[0] + a[2], b[0] + b[2]), max(a[1] + a[3], b[1] + b[3])
        return (x0, y0, x1 - x0, y1 - y0)

    merged = True
    while merged:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                (ra, ma), (rb, mb) = clusters[i], clusters[j]
                if horizontal_of[ma[0]] != horizontal_of[mb[0]]:
                    continue
                u = union(ra, rb)
                members = set(ma) | set(mb)
                if any(rects_intersect(u, rect_of[k]) for k in rect_of if k not in members and k in set(ids)):
                    continue
                if any(rects_intersect(u, r) for r in others):
                    continue
                if any(rects_intersect(u, clusters[k][0]) for k in range(len(clusters)) if k not in (i, j)):
                    continue
                clusters[i] = (u, sorted(members, key=repr))
                del clusters[j]
                merged = True
                break
            if merged:
                break
    return clusters


def _coloring_for(candidates: list, targets: list, seed: int, caps: PipelineCaps) -> Coloring:
    """A colouring of ``candidates`` under which ``targets`` are rainbow, from
    the covering family when affordable, else by seeded random trials."""
    k = len(targets)
    pos = {iid: n for n, iid in enumerate(candidates)}
    try:
        family = coloring_family(len(candidates), k, budget=caps.coloring_budget)
        for member in family:
            col = {iid: member.colors[pos[iid]] for iid in candidates}
            if len({col[t] for t in targets}) == k:
                return Coloring(col, k, None)
    except BudgetExceeded:
        pass
    for trial in range(caps.max_coloring_trials):
        col = color_items(candidates, k, seed + trial)
        if col.rainbow(targets):
            return col
    raise BudgetExceeded(f"no rainbow colouring in {caps.max_coloring_trials} trials", stage="coloring")


def _free_grid(side: int, rects) -> np.ndarray:
    free = np.ones((side, side), dtype=bool)
    for x, y, w, h in rects:
        free[y:y + h, x:x + w] = False
    return free


def _greedy_add(items: Sequence[Item], side: int, placed: list[Placement], index: dict, prefer: dict) -> list[Placement]:
    """Add items one by one at their preferred spot if free, else the first free spot."""
    free = _free_grid(side, [p.rect(index[p.item_id]) for p in placed])
    out = []
    for it in items:
        spot = prefer.get(it.id)
        choice = None
        if spot is not None:
            x, y, r = spot
            w, h = it.dims(r)
            if x + w <= side and y + h <= side and free[y:y + h, x:x + w].all():
                choice = Placement(it.id, x, y, r)
        if choice is None:
            if it.width <= side and it.height <= side:
                fits = _kernels.fit_positions(free.astype(np.uint8), it.width, it.height)
                ys, xs = np.nonzero(fits)
                if ys.size:
                    k = np.lexsort((xs, ys))[0]
                    choice = Placement(it.id, int(xs[k]), int(ys[k]))
        if choice is not None:
            x, y, w, h = choice.rect(it)
            free[y:y + h, x:x + w] = False
            out.append(choice)
    return out


def _slices_in_corridor(corr: Corridor, pieces, oriented: dict, ref_ids: list, pool: dict, used: set,
                        eps: Fraction, side: int, opt_size: int) -> list[Placement]:
    """Slices route for one corridor: per piece and level, estimate the
    reference count, slice the narrowest candidates, round, stack and
    convert back to whole items."""
    out: list[Placement] = []
    order = {j: (1 if (corr.kind == "path" and corr.s == 3 and j == 1) else 0) for j in range(corr.s)}
    for piece in pieces:
        hor = piece.horizontal
        tag = "hor" if hor else "ver"
        cont = container_for_piece(corr, piece, name=piece.index, order=order[piece.index])
        ref_here = [i for i in piece.item_ids if i in set(ref_ids)]
        if not ref_here:
            continue
        lvl_of = {i: level_of(oriented[i].height if hor else oriented[i].width, eps) for i in ref_here}
        counts: dict = {}
        for i in ref_here:
            counts[lvl_of[i]] = counts.get(lvl_of[i], 0) + 1
        levels = sorted(counts)
        try:
            code = encode_estimates(counts, opt_size, eps, side)
            est = decode_estimates(code.bits, opt_size, eps, side).estimates
        except ValueError:
            est = {lvl: Fraction(c) for lvl, c in counts.items()}
        classes = []
        for lvl in levels:
            members = [iid for iid, it in pool.items() if iid not in used
                       and (it.width > it.height) == hor
                       and level_of(it.height if hor else it.width, eps) == lvl]
            dim = DimensionClass(tag, lvl, tuple(members))
            estimate = min(Fraction(len(members)), max(est.get(lvl, 0), Fraction(counts[lvl])))
            sl = build_slices(dim, estimate, eps, pool)
            for sc in linear_grouping(sl, eps):
                classes.append((lvl, sc))
        if not classes:
            continue
        rounded = guess_box_counts({(lvl, sc.j, 0): sc.count for lvl, sc in classes}, eps, 1)
        classes.sort(key=lambda t: -t[1].rounded_length)
        want = [(lvl, sc, int(math.floor(rounded[(lvl, sc.j, 0)]))) for lvl, sc in classes]
        # shrink counts until the container's lanes can hold every slice
        while True:
            lengths = [sc.rounded_length for _, sc, c in want for _ in range(c)]
            try:
                rects = pack_slices_nicely([cont], {cont.name: lengths}, side)[cont.name]
                break
            except SliceInfeasible:
                k = max(range(len(want)), key=lambda n: (want[n][2] > 0, want[n][1].rounded_length))
                if want[k][2] == 0:
                    rects = []
                    break
                want[k] = (want[k][0], want[k][1], want[k][2] - 1)
        pos = 0
        boxes_by_level: dict = {}
        for lvl, sc, c in want:
            lanes = rects[pos:pos + c]
            pos += c
            if c:
                boxes_by_level.setdefault(lvl, []).append((sc.rounded_length, lanes))
        for lvl, boxes in boxes_by_level.items():
            cands = [pool[iid] for iid in pool if iid not in used and (pool[iid].width > pool[iid].height) == hor
                     and level_of(pool[iid].height if hor else pool[iid].width, eps) == lvl]
            cands = [Item(it.id, it.width, it.height, it.profit) for it in cands]
            assign = slices_to_items(cands, [(length, len(lanes)) for length, lanes in boxes], tag)
            cursor = {b: 0 for b in range(len(boxes))}
            for it in sorted(cands, key=lambda it: ((it.width if hor else it.height), repr(it.id))):
                b = assign.assigned.get(it.id)
                if b is None:
                    continue
                length, lanes = boxes[b]
                thick = it.height if hor else it.width
                mine = lanes[cursor[b]:cursor[b] + thick]
                cursor[b] += thick
                xs = [r[0] for r in mine]
                ys = [r[1] for r in mine]
                if hor:
                    x = mine[0][0] if cont.push_low else mine[0][0] + length - it.width
                    out.append(Placement(it.id, x, min(ys)))
                else:
                    y = mine[0][1] if cont.push_low else mine[0][1] + length - it.height
                    out.append(Placement(it.id, min(xs), y))
                used.add(it.id)
    return out


def run_pipeline(inst: Instance, eps=Fraction(1, 2), seed: int = 0, caps: PipelineCaps = PipelineCaps(),
                 corridors: Sequence[Corridor] | None = None) -> PipelineResult:
    """Run every stage and return a validated packing with a per-stage profit log."""
    eps = Fraction(eps)
    side = inst.side
    index = inst.index
    log: list[StageRecord] = []
    try:
        ref_profit, ref = optimal_pack(inst.items, side, ExactConfig(
            caps.exact.max_items, caps.exact.max_side, inst.rotate, caps.exact.node_limit))
    except BudgetExceeded as exc:
        raise BudgetExceeded(str(exc), stage="reference") from exc
    log.append(StageRecord("reference", ref_profit, f"{len(ref)} items"))
    if not ref.placements:
        return PipelineResult(Packing(side, ()), log + [StageRecord("final", 0)], ref_profit, "none")

    oriented = {p.item_id: _oriented(index[p.item_id], p.rotated) for p in ref}
    ref_rot = {p.item_id: p.rotated for p in ref}
    opt_items = list(oriented.values())
    pair = select_threshold_pair(opt_items, eps, side, weighted=inst.weighted)
    cls = classify_items(opt_items, pair, side)
    skewed = cls.skewed
    log.append(StageRecord("classify", ref_profit - sum(index[i].profit for i in cls.intermediate),
                           f"pair=({pair.eps_large},{pair.eps_small}) skewed={len(skewed)} "
                           f"large={len(cls.large)} small={len(cls.small)} dropped_intermediate={len(cls.intermediate)}"))

    horizontal_of = {i: cls.labels[i] is Label.HORIZONTAL for i in skewed}
    oriented_ref = Packing(side, tuple(Placement(p.item_id, p.x, p.y, False) for p in ref))
    if corridors is None:
        clusters = box_clusters(oriented, oriented_ref, skewed, horizontal_of)
        corridors = [Corridor.box(x, y, w, h, side, horizontal_of[m[0]]) for (x, y, w, h), m in clusters]
        origin = "synthetic"
    else:
        origin = "provided"
    # split every corridor into boxes, L- and U-corridors
    lu: list[tuple[Corridor, Packing]] = []
    kept_ids: set = set()
    orient = {i: horizontal_of.get(i, oriented[i].width >= oriented[i].height) for i in oriented}
    for corr in corridors:
        inside = placements_in(corr, oriented, Packing(side, tuple(p for p in oriented_ref if p.item_id in skewed)))
        if not inside.placements:
            continue
        try:
            res = split_into_LU(corr, oriented, inside, "derandomized", orient)
        except (SeparationError, CorridorError):
            continue
        for sub in res.corridors:
            lu.append((sub, placements_in(sub, oriented, res.retained)))
        kept_ids |= set(res.retained.item_ids())
    log.append(StageRecord("split_lu", sum(index[i].profit for i in kept_ids),
                           f"{origin} corridors={len(corridors)} lu={len(lu)}"))

    opt_size = len(kept_ids)
    threshold = caps.c_eps * Fraction(math.log2(max(side, 2))).limit_denominator(1000)
    branch = caps.branch if caps.branch != "auto" else ("slices" if opt_size >= threshold else "dp")
    placements: list[Placement] = []
    pool = {it.id: _oriented(it, ref_rot.get(it.id, False)) for it in inst.items}
    if branch == "dp" and opt_size:
        # colour every candidate skewed item; the reference items must be rainbow
        cand_cls = classify_items(list(pool.values()), pair, side)
        candidates = sorted(cand_cls.skewed, key=repr)
        targets = sorted(kept_ids, key=repr)
        coloring = _coloring_for(candidates, targets, seed, caps)
        for sub, inside in lu:
            palette = frozenset(coloring.colors[p.item_id] for p in inside)
            if not palette:
                continue
            cand = [pool[i] for i in candidates if coloring.colors[i] in palette]
            try:
                res = solve_corridor(sub, cand, coloring, palette, caps.dp)
            except BudgetExceeded as exc:
                raise BudgetExceeded(str(exc), stage="corridor-dp") from exc
            if res.success:
                placements += list(res.packing)
    elif branch == "slices" and opt_size:
        used: set = set()
        for sub, inside in lu:
            try:
                pieces = nice_partition(sub, oriented, inside, orient)
            except (SeparationError, CorridorError):
                continue
            placements += _slices_in_corridor(sub, pieces, oriented, inside.item_ids(), pool, used,
                                              eps, side, max(opt_size, 1))
    # placements so far use the reference orientation of each item
    placements = [Placement(p.item_id, p.x, p.y, ref_rot.get(p.item_id, False)) for p in placements]
    log.append(StageRecord(branch, sum(index[p.item_id].profit for p in placements), f"{len(placements)} items"))

    # large items are guessed at their reference spots, small ones added greedily
    taken = {p.item_id for p in placements}
    extras = [index[i] for i in cls.large + cls.small if i not in taken]
    prefer = {p.item_id: (p.x, p.y, p.rotated) for p in ref}
    placements += _greedy_add(sorted(extras, key=lambda it: (cls.labels[it.id] is not Label.LARGE, -it.area, repr(it.id))),
                              side, placements, index, prefer)
    packing = Packing(side, tuple(sorted(placements, key=lambda p: repr(p.item_id))))
    report = validate_packing(inst.items, packing)
    if not report.valid:
        raise AssertionError(f"pipeline emitted an invalid packing: {report.violations}")
    log.append(StageRecord("final", packing.profit(index), f"{len(packing)} items"))
    return PipelineResult(packing, log, ref_profit, branch)
