"""Hot inner loops.

Every kernel exists twice: a numba ``@njit`` version and a plain
numpy/Python version with identical semantics.  The numba path is used when
numba imports and ``GEOKNAP_DISABLE_NUMBA`` is unset or ``0``; both paths are
always importable so tests and the benchmark can compare them.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("GEOKNAP_DISABLE_NUMBA", "0") in ("", "0")


def _identity(fn):
    return fn


_jit = njit(cache=True) if HAS_NUMBA else _identity


# ---------------------------------------------------------------- positions


def _fit_positions_py(free, w, h):
    rows, cols = free.shape
    out = np.zeros((max(rows - h + 1, 0), max(cols - w + 1, 0)), dtype=np.bool_)
    if out.size == 0:
        return out
    sat = np.zeros((rows + 1, cols + 1), dtype=np.int64)
    sat[1:, 1:] = np.cumsum(np.cumsum(free.astype(np.int64), axis=0), axis=1)
    window = sat[h:, w:] - sat[:-h, w:] - sat[h:, :-w] + sat[:-h, :-w]
    return window == w * h


@_jit
def _fit_positions_nb(free, w, h):
    rows, cols = free.shape
    oy = rows - h + 1
    ox = cols - w + 1
    if oy < 0:
        oy = 0
    if ox < 0:
        ox = 0
    out = np.zeros((oy, ox), dtype=np.bool_)
    for y in range(oy):
        for x in range(ox):
            ok = True
            for yy in range(y, y + h):
                for xx in range(x, x + w):
                    if free[yy, xx] == 0:
                        ok = False
                        break
                if not ok:
                    break
            out[y, x] = ok
    return out


def fit_positions(free: np.ndarray, w: int, h: int) -> np.ndarray:
    """Boolean array ``out[y, x]``: a ``w x h`` rectangle anchored at ``(x, y)``
    covers only cells where ``free`` is nonzero."""
    free = np.ascontiguousarray(free, dtype=np.uint8)
    if USE_NUMBA:
        return _fit_positions_nb(free, int(w), int(h))
    return _fit_positions_py(free, int(w), int(h))


# ------------------------------------------------------------ rainbow search


def _rainbow_search_py(free, rx, ry, rw, rh, ptr, node_limit):
    levels = len(ptr) - 1
    grid = np.array(free, dtype=np.uint8, copy=True)
    chosen = np.full(levels, -1, dtype=np.int64)
    nodes = 0

    def clear(k):
        return grid[ry[k]:ry[k] + rh[k], rx[k]:rx[k] + rw[k]].all()

    def rec(level):
        nonlocal nodes
        if level == levels:
            return 1
        for k in range(ptr[level], ptr[level + 1]):
            nodes += 1
            if nodes > node_limit:
                return -1
            if not clear(k):
                continue
            grid[ry[k]:ry[k] + rh[k], rx[k]:rx[k] + rw[k]] = 0
            ok = True
            for later in range(level + 1, levels):
                if not any(clear(j) for j in range(ptr[later], ptr[later + 1])):
                    ok = False
                    break
            res = rec(level + 1) if ok else 0
            grid[ry[k]:ry[k] + rh[k], rx[k]:rx[k] + rw[k]] = 1
            if res != 0:
                if res == 1:
                    chosen[level] = k
                return res
        return 0

    status = rec(0)
    return status, chosen, nodes


@_jit
def _rect_clear(grid, x, y, w, h):
    for yy in range(y, y + h):
        for xx in range(x, x + w):
            if grid[yy, xx] == 0:
                return False
    return True


@_jit
def _rect_set(grid, x, y, w, h, v):
    for yy in range(y, y + h):
        for xx in range(x, x + w):
            grid[yy, xx] = v


@_jit
def _rainbow_search_nb(free, rx, ry, rw, rh, ptr, node_limit):
    levels = ptr.shape[0] - 1
    grid = free.copy()
    chosen = np.full(levels, -1, dtype=np.int64)
    if levels == 0:
        return 1, chosen, 0
    cursor = np.zeros(levels, dtype=np.int64)
    cursor[0] = ptr[0]
    nodes = 0
    level = 0
    while level >= 0:
        k = cursor[level]
        if chosen[level] >= 0:
            j = chosen[level]
            _rect_set(grid, rx[j], ry[j], rw[j], rh[j], 1)
            chosen[level] = -1
        if k >= ptr[level + 1]:
            level -= 1
            continue
        cursor[level] = k + 1
        nodes += 1
        if nodes > node_limit:
            return -1, chosen, nodes
        if not _rect_clear(grid, rx[k], ry[k], rw[k], rh[k]):
            continue
        _rect_set(grid, rx[k], ry[k], rw[k], rh[k], 0)
        chosen[level] = k
        ok = True
        for later in range(level + 1, levels):
            found = False
            for j in range(ptr[later], ptr[later + 1]):
                if _rect_clear(grid, rx[j], ry[j], rw[j], rh[j]):
                    found = True
                    break
            if not found:
                ok = False
                break
        if not ok:
            continue
        if level + 1 == levels:
            return 1, chosen, nodes
        level += 1
        cursor[level] = ptr[level]
    return 0, chosen, nodes


def rainbow_search(free, rects, ptr, node_limit=10**8):
    """Pick one rectangle per level so that all picks are pairwise disjoint and
    lie on free cells.

    ``rects`` is an ``(M, 4)`` array of ``x, y, w, h``; level ``l`` owns rows
    ``ptr[l]:ptr[l+1]``.  Returns ``(status, chosen, nodes)`` with status 1
    (found), 0 (exhausted) or -1 (node limit hit).
    """
    free = np.ascontiguousarray(free, dtype=np.uint8)
    rects = np.ascontiguousarray(rects, dtype=np.int64).reshape(-1, 4)
    ptr = np.ascontiguousarray(ptr, dtype=np.int64)
    args = (free, rects[:, 0].copy(), rects[:, 1].copy(), rects[:, 2].copy(), rects[:, 3].copy(), ptr, int(node_limit))
    fn = _rainbow_search_nb if USE_NUMBA else _rainbow_search_py
    status, chosen, nodes = fn(*args)
    return int(status), np.asarray(chosen), int(nodes)


# ----------------------------------------------------- knapsack branch&bound


def _knapsack_py(side, w, h, p, rot, normal_x, normal_y, dens_order, node_limit):
    n = len(w)
    grid = np.zeros((side, side), dtype=np.uint8)
    best = np.full((n, 3), -1, dtype=np.int64)
    cur = np.full((n, 3), -1, dtype=np.int64)
    best_profit = 0
    nodes = 0
    used_area = 0
    limit_hit = False

    def bound(level, profit):
        cap = side * side - used_area
        total = float(profit)
        for k in dens_order:
            if k < level:
                continue
            a = w[k] * h[k]
            if a <= cap:
                cap -= a
                total += p[k]
            else:
                total += p[k] * cap / a
                break
        return total

    def rec(level, profit):
        nonlocal best_profit, nodes, used_area, limit_hit
        if profit > best_profit:
            best_profit = profit
            best[:] = cur
        if level == n or limit_hit:
            return
        if bound(level, profit) <= best_profit:
            return
        for x in range(side):
            if not normal_x[x]:
                continue
            for y in range(side):
                if not normal_y[y]:
                    continue
                for r in range(2 if rot[level] else 1):
                    ww, hh = (h[level], w[level]) if r else (w[level], h[level])
                    if x + ww > side or y + hh > side:
                        continue
                    nodes += 1
                    if nodes > node_limit:
                        limit_hit = True
                        return
                    if grid[y:y + hh, x:x + ww].any():
                        continue
                    grid[y:y + hh, x:x + ww] = 1
                    used_area += ww * hh
                    cur[level] = (x, y, r)
                    rec(level + 1, profit + p[level])
                    cur[level] = (-1, -1, -1)
                    used_area -= ww * hh
                    grid[y:y + hh, x:x + ww] = 0
                    if limit_hit:
                        return
                    if bound(level, profit) <= best_profit:
                        return
        rec(level + 1, profit)

    rec(0, 0)
    return best_profit, best, nodes, limit_hit


@_jit
def _bound_nb(level, profit, cap, w, h, p, dens_order):
    total = float(profit)
    for idx in range(dens_order.shape[0]):
        k = dens_order[idx]
        if k < level:
            continue
        a = w[k] * h[k]
        if a <= cap:
            cap -= a
            total += p[k]
        else:
            total += p[k] * cap / a
            break
    return total


@_jit
def _knapsack_nb(side, w, h, p, rot, normal_x, normal_y, dens_order, node_limit):
    n = w.shape[0]
    grid = np.ones((side, side), dtype=np.uint8)  # 1 = free
    best = np.full((n, 3), -1, dtype=np.int64)
    cur = np.full((n, 3), -1, dtype=np.int64)
    best_profit = 0
    nodes = 0
    used_area = 0
    profit = 0
    # option index per level: 0 .. side*side*2 - 1 encode (x, y, r); side*side*2 = skip
    opt = np.zeros(n + 1, dtype=np.int64)
    n_opts = side * side * 2
    level = 0
    entering = True
    while level >= 0:
        if entering:
            entering = False
            if profit > best_profit:
                best_profit = profit
                for i in range(n):
                    for c in range(3):
                        best[i, c] = cur[i, c]
            if level == n or _bound_nb(level, profit, side * side - used_area, w, h, p, dens_order) <= best_profit:
                level -= 1
                continue
            opt[level] = 0
        # undo the placement made at this level, if any
        if cur[level, 0] >= 0:
            r = cur[level, 2]
            ww = h[level] if r == 1 else w[level]
            hh = w[level] if r == 1 else h[level]
            _rect_set(grid, cur[level, 0], cur[level, 1], ww, hh, 1)
            used_area -= ww * hh
            profit -= p[level]
            cur[level, 0] = -1
            cur[level, 1] = -1
            cur[level, 2] = -1
            if _bound_nb(level, profit, side * side - used_area, w, h, p, dens_order) <= best_profit:
                opt[level] = n_opts + 1
        o = opt[level]
        if o > n_opts:
            level -= 1
            continue
        if o == n_opts:
            opt[level] = o + 1
            level += 1
            entering = True
            continue
        placed = False
        while o < n_opts:
            x = o // (side * 2)
            y = (o // 2) % side
            r = o % 2
            o += 1
            if not normal_x[x] or not normal_y[y]:
                continue
            if r == 1 and not rot[level]:
                continue
            ww = h[level] if r == 1 else w[level]
            hh = w[level] if r == 1 else h[level]
            if x + ww > side or y + hh > side:
                continue
            nodes += 1
            if nodes > node_limit:
                return best_profit, best, nodes, True
            if not _rect_clear(grid, x, y, ww, hh):
                continue
            _rect_set(grid, x, y, ww, hh, 0)
            used_area += ww * hh
            profit += p[level]
            cur[level, 0] = x
            cur[level, 1] = y
            cur[level, 2] = r
            placed = True
            break
        opt[level] = o
        if placed:
            level += 1
            entering = True
    return best_profit, best, nodes, False


def knapsack_search(side, w, h, p, rot, normal_x, normal_y, dens_order, node_limit=10**9):
    """Branch and bound over items in the given order.

    Per item the options are tried in increasing ``(x, y, rotated)`` order and
    skipping the item last; only strictly better solutions replace the
    incumbent, so the result is the lexicographically first optimum in that
    order.  Returns ``(profit, placements[n, 3], nodes, limit_hit)``.
    """
    args = (
        int(side),
        np.ascontiguousarray(w, dtype=np.int64),
        np.ascontiguousarray(h, dtype=np.int64),
        np.ascontiguousarray(p, dtype=np.int64),
        np.ascontiguousarray(rot, dtype=np.bool_),
        np.ascontiguousarray(normal_x, dtype=np.bool_),
        np.ascontiguousarray(normal_y, dtype=np.bool_),
        np.ascontiguousarray(dens_order, dtype=np.int64),
        int(node_limit),
    )
    fn = _knapsack_nb if USE_NUMBA else _knapsack_py
    profit, best, nodes, hit = fn(*args)
    return int(profit), np.asarray(best), int(nodes), bool(hit)
