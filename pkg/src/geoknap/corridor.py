"""Rectilinear corridors: validation, nice partitions, shape classes, the
L/U splitting procedure and long-chord enumeration.

A corridor is stored as a *spine*: pieces ``0..s-1`` alternate between
horizontal and vertical; piece ``j`` lies between two parallel lines with
perpendicular coordinates ``side_a[j]`` and ``side_b[j]``.  Consecutive
lines meet at the bends.  A path corridor additionally has the two end
coordinates (the constant coordinate of ``e_0`` and of ``e_k``).

Any vector of per-piece coordinates between ``side_a`` and ``side_b`` is a
long chord; ``side_a`` itself is one boundary chord and ``side_b`` the other.
Chords are addressed by integer offsets ``t_j = |c_j - side_a[j]|``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .geom import Item, Packing, Placement, Rect

Point = tuple[int, int]
Segment = tuple[Point, Point]


class CorridorError(ValueError):
    pass


class InvalidCorridor(CorridorError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{kind} (edge {idx})" for kind, idx in self.violations))


class SeparationError(CorridorError):
    """Raised when placed items admit no nice partition."""

    def __init__(self, message, item_id=None):
        super().__init__(message)
        self.item_id = item_id


class ShapeClass(str, Enum):
    BOX = "Box"
    L = "L"
    U = "U"
    Z = "Z"
    SPIRAL = "Spiral"
    TWO_SPIRAL = "TwoSpiral"
    OTHER = "Other"


def _sign(v: int) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True, eq=False)
class Corridor:
    kind: str
    first_horizontal: bool
    side_a: tuple[int, ...]
    side_b: tuple[int, ...]
    ends: tuple[int, int] | None
    side: int
    width_bound: Fraction | None = None
    witnesses: tuple[Segment, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "side_a", tuple(int(v) for v in self.side_a))
        object.__setattr__(self, "side_b", tuple(int(v) for v in self.side_b))
        if self.kind not in ("path", "cycle"):
            raise CorridorError(f"unknown corridor kind {self.kind!r}")
        if len(self.side_a) != len(self.side_b) or not self.side_a:
            raise CorridorError("side_a and side_b must be non-empty and of equal length")
        if self.kind == "path" and (self.ends is None or len(self.ends) != 2):
            raise CorridorError("path corridors need two end coordinates")
        if self.kind == "cycle":
            if self.ends is not None:
                raise CorridorError("cycle corridors have no ends")
            if len(self.side_a) % 2 or len(self.side_a) < 4:
                raise CorridorError(f"cycle corridor needs an even number >= 4 of pieces, got {len(self.side_a)}")
        if any(a == b for a, b in zip(self.side_a, self.side_b)):
            raise CorridorError("every piece needs positive thickness")

    def __eq__(self, other):
        if not isinstance(other, Corridor):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def _key(self):
        return (self.kind, self.first_horizontal, self.side_a, self.side_b, self.ends, self.side)

    # ------------------------------------------------------------ basics
    @classmethod
    def box(cls, x: int, y: int, w: int, h: int, side: int, horizontal: bool | None = None) -> "Corridor":
        """Rectangle ``[x, x+w) x [y, y+h)`` as a one-piece path corridor."""
        if horizontal is None:
            horizontal = w >= h
        if horizontal:
            return cls("path", True, (y,), (y + h,), (x, x + w), side)
        return cls("path", False, (x,), (x + w,), (y, y + h), side)

    @property
    def s(self) -> int:
        return len(self.side_a)

    def horizontal(self, j: int) -> bool:
        return self.first_horizontal == (j % 2 == 0)

    @property
    def thickness(self) -> tuple[int, ...]:
        return tuple(abs(b - a) for a, b in zip(self.side_a, self.side_b))

    def coords(self, offsets: Sequence[int]) -> tuple[int, ...]:
        return tuple(a + _sign(b - a) * t for a, b, t in zip(self.side_a, self.side_b, offsets))

    def _pt(self, j: int, perp: int, along: int) -> Point:
        return (along, perp) if self.horizontal(j) else (perp, along)

    def _corner(self, j: int, c_j: int, c_next: int) -> Point:
        # piece j meets piece j+1: perpendicular coordinate of one is the along of the other
        return self._pt(j, c_j, c_next)

    def chord_points(self, coords: Sequence[int]) -> list[Point]:
        s = self.s
        if self.kind == "path":
            pts = [self._pt(0, coords[0], self.ends[0])]
            for j in range(s - 1):
                pts.append(self._corner(j, coords[j], coords[j + 1]))
            pts.append(self._pt(s - 1, coords[s - 1], self.ends[1]))
            return pts
        return [self._corner((j - 1) % s, coords[(j - 1) % s], coords[j]) for j in range(s)]

    def polygon(self) -> list[Point] | tuple[list[Point], list[Point]]:
        """Vertex list with ``e_0`` first (path), or ``(outer, inner)`` (cycle)."""
        a = self.chord_points(self.side_a)
        b = self.chord_points(self.side_b)
        if self.kind == "path":
            return [b[0]] + a + b[::-1][:-1]
        return a, b

    @cached_property
    def mask(self) -> np.ndarray:
        return self.region_between(tuple([0] * self.s), self.thickness)

    @cached_property
    def area(self) -> int:
        return int(self.mask.sum())

    # ------------------------------------------------------------- regions
    def region_between(self, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
        """Cells between the chords at offsets ``lo`` and ``hi`` (componentwise ``lo <= hi``)."""
        return _region_cached(self, tuple(lo), tuple(hi))

    def piece_strip(self, j: int) -> np.ndarray:
        """Cells of the corridor within the band of piece ``j`` (corners included)."""
        lo_p, hi_p = sorted((self.side_a[j], self.side_b[j]))
        refs = []
        s = self.s
        if self.kind == "path":
            if j == 0:
                refs.append(self.ends[0])
            if j == s - 1:
                refs.append(self.ends[1])
        for k in (j - 1, j + 1):
            if self.kind == "path" and not 0 <= k < s:
                continue
            k %= s
            refs += [self.side_a[k], self.side_b[k]]
        lo_a, hi_a = min(refs), max(refs)
        rect = np.zeros((self.side, self.side), dtype=bool)
        if self.horizontal(j):
            rect[lo_p:hi_p, lo_a:hi_a] = True
        else:
            rect[lo_a:hi_a, lo_p:hi_p] = True
        return rect & self.mask

    def neighbours(self, j: int) -> list[int]:
        if self.kind == "path":
            return [k for k in (j - 1, j + 1) if 0 <= k < self.s]
        return sorted({(j - 1) % self.s, (j + 1) % self.s})

    def edge_extent(self, j: int, which: str) -> tuple[int, int]:
        """Along-extent of piece ``j``'s ``a`` or ``b`` side edge of the polygon."""
        coords = self.side_a if which == "a" else self.side_b
        pts = self.chord_points(coords)
        if self.kind == "path":
            p, q = pts[j], pts[j + 1]
        else:
            p, q = pts[j], pts[(j + 1) % self.s]
        k = 0 if self.horizontal(j) else 1
        return tuple(sorted((p[k], q[k])))


def _xor_polyline(mask: np.ndarray, pts: Sequence[Point]) -> None:
    """Even-odd fill: toggle cells left of every vertical edge of the closed polyline."""
    n = len(pts)
    for i in range(n):
        (x1, y1), (x2, y2) = pts[i], pts[(i + 1) % n]
        if x1 == x2 and y1 != y2:
            lo, hi = sorted((y1, y2))
            mask[lo:hi, :x1] ^= True


_REGION_CACHE: dict = {}


def _region_cached(corr: Corridor, lo: tuple, hi: tuple) -> np.ndarray:
    key = (corr._key(), lo, hi)
    hit = _REGION_CACHE.get(key)
    if hit is not None:
        return hit
    if len(_REGION_CACHE) > 200_000:
        _REGION_CACHE.clear()
    mask = np.zeros((corr.side, corr.side), dtype=bool)
    p = corr.chord_points(corr.coords(lo))
    q = corr.chord_points(corr.coords(hi))
    if corr.kind == "path":
        _xor_polyline(mask, p + q[::-1])
    else:
        _xor_polyline(mask, p)
        _xor_polyline(mask, q)
    mask.setflags(write=False)
    _REGION_CACHE[key] = mask
    return mask


# ------------------------------------------------------------- validation


def _edges(pts: Sequence[Point]) -> list[Segment]:
    return [(pts[i], pts[(i + 1) % len(pts)]) for i in range(len(pts))]


def _seg_box(seg: Segment):
    (x1, y1), (x2, y2) = seg
    return min(x1, x2), max(x1, x2), min(y1, y2), max(y1, y2)


def _segments_touch(s1: Segment, s2: Segment) -> bool:
    """Closed axis-parallel segments share a point."""
    a, b = _seg_box(s1), _seg_box(s2)
    return a[0] <= b[1] and b[0] <= a[1] and a[2] <= b[3] and b[2] <= a[3]


def _point_inside(pt, poly) -> bool:
    """Strict interior test for a point with half-integral coordinates allowed."""
    x, y = pt
    inside = False
    for (x1, y1), (x2, y2) in _edges(poly):
        if x1 == x2 and min(y1, y2) < y < max(y1, y2) and x1 > x:
            inside = not inside
    return inside


def _rectilinear_issues(pts: Sequence[Point], side: int, base: int) -> list[tuple[str, int]]:
    out = []
    n = len(pts)
    if n < 4 or n % 2:
        return [("edge_count", base)]
    for i, (x, y) in enumerate(pts):
        if not all(isinstance(v, (int, np.integer)) for v in (x, y)):
            out.append(("non_integral", base + i))
        elif not (0 <= x <= side and 0 <= y <= side):
            out.append(("out_of_bounds", base + i))
    edges = _edges(pts)
    for i, ((x1, y1), (x2, y2)) in enumerate(edges):
        if (x1 == x2) == (y1 == y2):
            out.append(("not_axis_parallel", base + i))
    if out:
        return out
    for i in range(n):
        h1 = edges[i][0][1] == edges[i][1][1]
        h2 = edges[(i + 1) % n][0][1] == edges[(i + 1) % n][1][1]
        if h1 == h2:
            out.append(("collinear_edges", base + i))
    for i in range(n):
        for k in range(i + 2, n):
            if i == 0 and k == n - 1:
                continue
            if _segments_touch(edges[i], edges[k]):
                out.append(("self_intersection", base + i))
    return out


def _is_h(seg: Segment) -> bool:
    return seg[0][1] == seg[1][1]


def _perp(seg: Segment) -> int:
    return seg[0][1] if _is_h(seg) else seg[0][0]


def _span(seg: Segment) -> tuple[int, int]:
    k = 0 if _is_h(seg) else 1
    return tuple(sorted((seg[0][k], seg[1][k])))


def _thin_witness(e1: Segment, e2: Segment, others: Sequence[Segment]) -> Segment | None:
    """Perpendicular segment meeting ``e1`` and ``e2`` and no edge in ``others``."""
    lo = max(_span(e1)[0], _span(e2)[0])
    hi = min(_span(e1)[1], _span(e2)[1])
    c1, c2 = _perp(e1), _perp(e2)
    horizontal = _is_h(e1)
    # half-integral candidates cover every combinatorial position in the open overlap
    for twice in range(2 * lo + 1, 2 * hi):
        u = Fraction(twice, 2)
        seg = ((u, c1), (u, c2)) if horizontal else ((c1, u), (c2, u))
        if not any(_segments_touch(seg, o) for o in others):
            return seg
    return None


def _check_pairs(pairs, all_edges, eps: Fraction, eps_large: Fraction, side: int):
    violations, witnesses = [], []
    structural = eps is None or eps_large is None
    bound = None if structural else eps * eps_large * side
    min_len = None if structural else eps_large * side / 2
    for idx, (i1, e1, i2, e2) in enumerate(pairs):
        if _is_h(e1) != _is_h(e2):
            violations.append(("not_parallel", i1))
            continue
        if not structural:
            for i, e in ((i1, e1), (i2, e2)):
                lo, hi = _span(e)
                if hi - lo < min_len:
                    violations.append(("edge_too_short", i))
            if abs(_perp(e1) - _perp(e2)) >= bound:
                violations.append(("too_thick", i1))
        others = [e for e in all_edges if e is not e1 and e is not e2]
        wit = _thin_witness(e1, e2, others)
        if wit is None:
            violations.append(("no_witness_segment", i1))
        else:
            witnesses.append(wit)
    return violations, witnesses


def _bound(eps, eps_large, side):
    return None if eps is None or eps_large is None else eps * eps_large * side


def check_corridor(polygon, eps, eps_large, side: int, kind: str | None = None) -> Corridor:
    """Validate a path polygon (vertex list, ``e_0`` first) or a cycle
    ``(outer, inner)`` pair and return the corridor with its witness segments.

    Raises :class:`InvalidCorridor` listing every violated clause with the
    offending edge index (inner-polygon edges of a cycle are numbered after
    the outer ones).  With ``eps`` or ``eps_large`` set to None only the
    shape is checked, not thickness or edge lengths.
    """
    eps = None if eps is None else Fraction(eps)
    eps_large = None if eps_large is None else Fraction(eps_large)
    if kind is None:
        kind = "cycle" if len(polygon) == 2 and not isinstance(polygon[0][0], (int, np.integer)) else "path"
    if kind == "path":
        pts = [tuple(p) for p in polygon]
        issues = _rectilinear_issues(pts, side, 0)
        if issues:
            raise InvalidCorridor(issues)
        n = len(pts)
        k = n // 2
        edges = _edges(pts)
        pairs = [(i, edges[i], 2 * k - i, edges[2 * k - i]) for i in range(1, k)]
        violations, witnesses = _check_pairs(pairs, edges, eps, eps_large, side)
        if violations:
            raise InvalidCorridor(violations)
        corr = Corridor(
            "path", _is_h(edges[1]),
            tuple(_perp(edges[i]) for i in range(1, k)),
            tuple(_perp(edges[2 * k - i]) for i in range(1, k)),
            (_perp(edges[0]), _perp(edges[k])), side, _bound(eps, eps_large, side), tuple(witnesses))
        if corr.polygon() != pts:
            raise InvalidCorridor([("not_a_corridor_shape", 0)])
        return corr

    outer, inner = ([tuple(p) for p in poly] for poly in polygon)
    issues = _rectilinear_issues(outer, side, 0) + _rectilinear_issues(inner, side, len(outer))
    if len(outer) != len(inner):
        issues.append(("edge_count_mismatch", 0))
    if issues:
        raise InvalidCorridor(issues)
    n = len(outer)
    eo, ei = _edges(outer), _edges(inner)
    for k, e in enumerate(eo):
        if any(_segments_touch(e, f) for f in ei):
            issues.append(("polygons_intersect", k))
    for k, v in enumerate(inner):
        if not _point_inside(v, outer):
            issues.append(("inner_not_inside", n + k))
    if issues:
        raise InvalidCorridor(issues)
    pairs = [(k, eo[k], n + k, ei[k]) for k in range(n)]
    violations, witnesses = _check_pairs(pairs, eo + ei, eps, eps_large, side)
    if violations:
        raise InvalidCorridor(violations)
    corr = Corridor("cycle", _is_h(eo[0]), tuple(_perp(e) for e in eo), tuple(_perp(e) for e in ei),
                    None, side, _bound(eps, eps_large, side), tuple(witnesses))
    if corr.polygon() != (outer, inner):
        raise InvalidCorridor([("not_a_corridor_shape", 0)])
    return corr


def ring_from_outer(outer: Sequence[Point], thickness: int, side: int) -> Corridor:
    """Cycle corridor of constant ``thickness`` inside the counter-clockwise
    rectilinear polygon ``outer`` (edge ``i`` runs from vertex ``i`` to ``i+1``)."""
    edges = _edges([tuple(p) for p in outer])
    a, b = [], []
    for (x1, y1), (x2, y2) in edges:
        if y1 == y2:
            a.append(y1)
            b.append(y1 + thickness if x2 > x1 else y1 - thickness)
        else:
            a.append(x1)
            b.append(x1 - thickness if y2 > y1 else x1 + thickness)
    return Corridor("cycle", _is_h(edges[0]), tuple(a), tuple(b), None, side)


def staircase_ring(s: int, thickness: int, arm: int, side: int, origin: Point = (0, 0)) -> Corridor:
    """Synthetic cycle corridor with ``s`` pieces: a rectangle whose top-right
    corner is replaced by a staircase of ``(s - 4) / 2`` steps of size ``arm``."""
    if s < 4 or s % 2:
        raise CorridorError("s must be even and >= 4")
    m = (s - 4) // 2
    ox, oy = origin
    width = height = arm * (m + 2)
    pts = [(0, 0), (width, 0)]
    x, y = width, 0
    for _ in range(m):
        y += arm
        pts.append((x, y))
        x -= arm
        pts.append((x, y))
    pts.append((x, height))
    pts.append((0, height))
    pts = [(px + ox, py + oy) for px, py in pts]
    return ring_from_outer(pts, thickness, side)


# ------------------------------------------------------------ subcorridors


@dataclass(frozen=True, eq=False)
class Subcorridor:
    index: int
    horizontal: bool
    mask: np.ndarray
    line_a: int  # perpendicular coordinate of the piece's a-side edge
    line_b: int
    item_ids: tuple = ()

    @property
    def area(self) -> int:
        return int(self.mask.sum())

    def edge_row(self, which: str) -> np.ndarray:
        """Cells of the row (horizontal piece) or column adjacent to edge ``a``/``b``."""
        line = self.line_a if which == "a" else self.line_b
        other = self.line_b if which == "a" else self.line_a
        k = line if other > line else line - 1
        return self.mask[k, :] if self.horizontal else self.mask[:, k]

    def edge_extent(self, which: str) -> tuple[int, int]:
        row = np.flatnonzero(self.edge_row(which))
        if row.size == 0:
            return (0, 0)
        return int(row[0]), int(row[-1]) + 1

    def longer_edge(self) -> str:
        la = self.edge_extent("a")
        lb = self.edge_extent("b")
        return "a" if la[1] - la[0] >= lb[1] - lb[0] else "b"

    def is_acute(self) -> bool:
        x1, x1p = self.edge_extent("a")
        x2, x2p = self.edge_extent("b")
        return (x1 <= x2 <= x2p <= x1p) or (x2 <= x1 <= x1p <= x2p)


def default_orientation(item: Item, rotated: bool = False) -> bool:
    """True for horizontal (wider than tall) items."""
    w, h = item.dims(rotated)
    return w >= h


def _item_pieces(corr: Corridor, items: dict, packing: Packing, strips, orient):
    assign = {}
    for p in packing.placements:
        it = items[p.item_id]
        x, y, w, h = p.rect(it)
        horizontal = orient(it, p.rotated) if callable(orient) else orient[p.item_id]
        host = None
        for j, strip in enumerate(strips):
            if corr.horizontal(j) != horizontal:
                continue
            if y >= 0 and x >= 0 and strip[y:y + h, x:x + w].all() and y + h <= corr.side and x + w <= corr.side:
                host = j
                break
        if host is None:
            raise SeparationError(f"item {p.item_id!r} lies in no piece of matching orientation", p.item_id)
        assign[p.item_id] = (host, (x, y, w, h))
    return assign


def _split_corner(corr: Corridor, j: int, k: int, strips, owner: np.ndarray, assign) -> None:
    """Assign the cells shared by adjacent pieces ``j`` and ``k`` with a monotone staircase."""
    hj = j if corr.horizontal(j) else k
    vj = k if hj == j else j
    corner = strips[hj] & strips[vj]
    ys, xs = np.nonzero(corner)
    if ys.size == 0:
        return
    y0, y1, x0, x1 = ys.min(), ys.max() + 1, xs.min(), xs.max() + 1
    # which side does the horizontal piece come from, which way does the vertical leave
    h_left = bool(strips[hj][y0:y1, :x0].any())
    v_up = bool(strips[vj][y1:, x0:x1].any())
    sub_h = np.zeros((y1 - y0, x1 - x0), dtype=bool)
    sub_v = np.zeros_like(sub_h)
    for host, (x, y, w, h) in assign.values():
        if host not in (hj, vj):
            continue
        cx0, cx1 = max(x, x0), min(x + w, x1)
        cy0, cy1 = max(y, y0), min(y + h, y1)
        if cx0 >= cx1 or cy0 >= cy1:
            continue
        target = sub_h if host == hj else sub_v
        target[cy0 - y0:cy1 - y0, cx0 - x0:cx1 - x0] = True
    # canonical frame: horizontal piece enters from the left, vertical piece leaves upwards
    if not h_left:
        sub_h, sub_v = sub_h[:, ::-1], sub_v[:, ::-1]
    if not v_up:
        sub_h, sub_v = sub_h[::-1, :], sub_v[::-1, :]
    rows, cols = sub_h.shape
    need = np.array([np.flatnonzero(sub_h[r]).max() + 1 if sub_h[r].any() else 0 for r in range(rows)])
    thresh = np.maximum.accumulate(need[::-1])[::-1]  # non-increasing upwards
    canon_h = np.arange(cols)[None, :] < thresh[:, None]
    clash = canon_h & sub_v
    if clash.any():
        raise SeparationError(f"pieces {j} and {k}: horizontal and vertical items cannot be separated")
    if not v_up:
        canon_h = canon_h[::-1, :]
    if not h_left:
        canon_h = canon_h[:, ::-1]
    block = owner[y0:y1, x0:x1]
    inside = corner[y0:y1, x0:x1]
    block[inside & canon_h] = hj
    block[inside & ~canon_h] = vj


def nice_partition(corr: Corridor, items: Sequence[Item] | dict, packing: Packing | None = None,
                   orient=default_orientation) -> list[Subcorridor]:
    """Partition ``corr`` into ``s`` pieces so that every placed item lies in
    a single piece whose orientation matches the item's.

    ``orient`` maps ``(item, rotated)`` to True for horizontal items, or is a
    dict ``id -> bool``.
    """
    index = items if isinstance(items, dict) else {it.id: it for it in items}
    packing = packing or Packing(corr.side, ())
    s = corr.s
    strips = [corr.piece_strip(j) for j in range(s)]
    cover = np.zeros(strips[0].shape, dtype=np.int64)
    for st in strips:
        cover += st
    if (cover[corr.mask] == 0).any() or (cover > 2).any():
        raise CorridorError("piece strips do not cover the corridor properly")
    for j in range(s):
        for k in range(j + 2, s):
            if corr.kind == "cycle" and (k + 1) % s == j:
                continue
            if (strips[j] & strips[k]).any():
                raise CorridorError(f"non-adjacent pieces {j} and {k} overlap")
    assign = _item_pieces(corr, index, packing, strips, orient)
    owner = np.full(strips[0].shape, -1, dtype=np.int64)
    for j, st in enumerate(strips):
        owner[st & (cover == 1)] = j
    pairs = [(j, j + 1) for j in range(s - 1)]
    if corr.kind == "cycle":
        pairs.append((s - 1, 0))
    if s > 1:
        for j, k in pairs:
            _split_corner(corr, j, k, strips, owner, assign)
    pieces = []
    for j in range(s):
        mask = owner == j
        mask.setflags(write=False)
        ids = tuple(i for i, (host, _) in assign.items() if host == j)
        pieces.append(Subcorridor(j, corr.horizontal(j), mask, corr.side_a[j], corr.side_b[j], ids))
    for iid, (host, (x, y, w, h)) in assign.items():
        if not pieces[host].mask[y:y + h, x:x + w].all():
            raise SeparationError(f"item {iid!r} straddles a piece boundary", iid)
    return pieces


# --------------------------------------------------------------- shapes


def _nested(i1: tuple[int, int], i2: tuple[int, int]) -> bool:
    return (i2[0] <= i1[0] and i1[1] <= i2[1]) or (i1[0] <= i2[0] and i2[1] <= i1[1])


def u_forming(corr: Corridor, pieces: Sequence[int]) -> bool:
    """Three consecutive pieces form a U iff the projections of the middle
    piece's two edges are nested."""
    p, m, q = pieces
    ia = tuple(sorted((corr.side_a[p], corr.side_a[q])))
    ib = tuple(sorted((corr.side_b[p], corr.side_b[q])))
    return _nested(ia, ib)


def classify_shape(corr: Corridor, partition: Sequence[Subcorridor] | None = None) -> ShapeClass:
    s = corr.s
    if corr.kind == "path":
        if s == 1:
            return ShapeClass.BOX
        if s == 2:
            return ShapeClass.L
        if s == 3:
            return ShapeClass.U if u_forming(corr, (0, 1, 2)) else ShapeClass.Z
    if partition is None:
        partition = nice_partition(corr, {})
    if corr.kind == "cycle":
        return ShapeClass.OTHER
    obtuse = sum(not p.is_acute() for p in partition)
    if obtuse == 0:
        return ShapeClass.SPIRAL
    if obtuse == 1:
        return ShapeClass.TWO_SPIRAL
    return ShapeClass.OTHER


# ------------------------------------------------------------- splitting


@dataclass
class SplitResult:
    corridors: list[Corridor]
    shapes: list[ShapeClass]
    retained: Packing
    deleted: tuple
    deleted_pieces: tuple[int, ...]
    deleted_fraction: Fraction


def _sub_path(corr: Corridor, run: Sequence[int]) -> Corridor:
    """Path corridor made of consecutive pieces ``run``, its ends pushed through
    the bends with the neighbouring (deleted) pieces."""
    s = corr.s
    first, last = run[0], run[-1]

    def far_end(piece, neighbour, other_ref):
        if corr.kind == "path" and not 0 <= neighbour < s:
            return corr.ends[0] if neighbour < 0 else corr.ends[1]
        nb = neighbour % s
        cands = (corr.side_a[nb], corr.side_b[nb])
        return max(cands, key=lambda c: abs(2 * c - other_ref))

    def ref(piece, toward):
        if corr.kind == "path" and not 0 <= toward < s:
            return 2 * (corr.ends[0] if toward < 0 else corr.ends[1])
        nb = toward % s
        return corr.side_a[nb] + corr.side_b[nb]

    e0 = far_end(first, first - 1, ref(first, first + 1))
    e1 = far_end(last, last + 1, ref(last, last - 1))
    idx = [j % s for j in run]
    return Corridor("path", corr.horizontal(idx[0]), tuple(corr.side_a[j] for j in idx),
                    tuple(corr.side_b[j] for j in idx), (e0, e1), corr.side, corr.width_bound)


def _runs(s: int, deleted: set, cyclic: bool) -> list[list[int]]:
    keep = [j for j in range(s) if j not in deleted]
    if not keep:
        return []
    if not cyclic:
        runs, cur = [], []
        for j in range(s):
            if j in deleted:
                if cur:
                    runs.append(cur)
                cur = []
            else:
                cur.append(j)
        if cur:
            runs.append(cur)
        return runs
    if not deleted:
        raise CorridorError("a cycle corridor cannot be split without deleting a piece")
    start = min(deleted)
    runs, cur = [], []
    for step in range(1, s + 1):
        j = (start + step) % s
        if j in deleted:
            if cur:
                runs.append(cur)
            cur = []
        else:
            # keep indices monotone through the wrap so _sub_path sees consecutive pieces
            cur.append(start + step if start + step < s else start + step - s + (s if cur and cur[-1] >= s - 1 else 0))
    if cur:
        runs.append(cur)
    return runs


def _mod3_groups(labels: Sequence[int]) -> list[set]:
    """``labels[r]`` is the original piece holding relabelled position ``r+1``."""
    groups = []
    for alpha in (1, 2, 0):
        groups.append({labels[r] for r in range(len(labels)) if (r + 1) % 3 == alpha})
    return groups


def _candidate_groups(corr: Corridor, weights: Sequence[int], mode: str) -> list[set]:
    s = corr.s
    if corr.kind == "path":
        return _mod3_groups(list(range(s)))
    if s % 2:
        raise CorridorError("cycle corridor with an odd number of pieces")
    if s == 4:
        return [{j} for j in range(s)]
    if s % 3 == 0 and s in (6, 12):
        return _mod3_groups(list(range(s)))
    if s in (8, 14):
        starts = range(s) if mode == "enumerate_offsets" else [min(range(s), key=lambda j: (weights[j], j))]
        out = []
        for st in starts:
            labels = [(st + r) % s for r in range(s)]
            groups = _mod3_groups(labels)
            groups[2] |= {labels[0]}  # P_1 joins the set that holds P_3
            out += groups
        return out
    if s == 10:
        out = []
        for q1 in range(s):
            q = [(q1 + r) % s for r in range(4)]
            if u_forming(corr, q[0:3]) and u_forming(corr, q[1:4]):
                labels = [(q[2] + r) % s for r in range(s)]
                out += _mod3_groups(labels)
                if mode != "enumerate_offsets":
                    break
        if not out:
            raise CorridorError("no four consecutive U-forming pieces in a 10-piece cycle")
        return out
    # s >= 16: drop one piece, then treat the rest as a path
    firsts = range(s) if mode == "enumerate_offsets" else [min(range(s), key=lambda j: (weights[j], j))]
    out = []
    for d in firsts:
        labels = [(d + r) % s for r in range(1, s)]
        out += [g | {d} for g in _mod3_groups(labels)]
    return out


def split_into_LU(corr: Corridor, items: Sequence[Item] | dict, packing: Packing,
                  mode: str = "derandomized", orient=default_orientation) -> SplitResult:
    """Delete the items of a set of pieces so that the rest of ``corr``
    decomposes into boxes, L- and U-corridors.

    ``mode='derandomized'`` follows the fixed relabelling rules (cheapest
    piece as the new first piece); ``'enumerate_offsets'`` tries every
    relabelling and keeps the cheapest deletion.  Ties go to the lowest index.
    """
    if mode not in ("derandomized", "enumerate_offsets"):
        raise ValueError(f"unknown mode {mode!r}")
    index = items if isinstance(items, dict) else {it.id: it for it in items}
    pieces = nice_partition(corr, index, packing, orient)
    weights = [sum(index[i].profit for i in p.item_ids) for p in pieces]
    groups = _candidate_groups(corr, weights, mode)
    best = min(range(len(groups)), key=lambda g: (sum(weights[j] for j in groups[g]), g))
    deleted = groups[best]
    runs = _runs(corr.s, deleted, corr.kind == "cycle")
    corridors = [_sub_path(corr, run) for run in runs]
    shapes = [classify_shape(c) for c in corridors]
    for c, shape in zip(corridors, shapes):
        if shape not in (ShapeClass.BOX, ShapeClass.L, ShapeClass.U):
            raise CorridorError(f"split produced a {shape.value}-corridor")
    dropped = {i for j in deleted for i in pieces[j].item_ids}
    kept = tuple(p for p in packing.placements if p.item_id not in dropped)
    total = sum(weights)
    lost = sum(weights[j] for j in deleted)
    frac = Fraction(lost, total) if total else Fraction(0)
    return SplitResult(corridors, shapes, Packing(packing.knapsack_side, kept),
                       tuple(sorted(dropped, key=repr)), tuple(sorted(deleted)), frac)


# ---------------------------------------------------------------- chords


@dataclass(frozen=True)
class LongChord:
    offsets: tuple[int, ...]
    segments: tuple[Segment, ...]


def chord_at(corr: Corridor, offsets: Sequence[int]) -> LongChord:
    if corr.kind != "path":
        raise CorridorError("long chords are defined for path corridors")
    pts = corr.chord_points(corr.coords(offsets))
    segs = tuple((pts[i], pts[i + 1]) for i in range(len(pts) - 1))
    return LongChord(tuple(offsets), segs)


class ChordStream:
    """Iterable of long chords; ``cap_exceeded`` is set once iteration ends."""

    def __init__(self, corr: Corridor, cap: int):
        if cap < 1:
            raise ValueError("cap must be >= 1")
        self.corr = corr
        self.cap = cap
        self.cap_exceeded = False
        self.count = 0

    def __iter__(self) -> Iterator[LongChord]:
        corr = self.corr
        thick = corr.thickness
        hi = tuple(thick)
        lo = tuple(0 for _ in thick)
        self.count = 0
        self.cap_exceeded = False
        for offs in itertools.chain([hi, lo], (o for o in itertools.product(*(range(t + 1) for t in thick))
                                               if o != lo and o != hi)):
            if self.count >= self.cap:
                self.cap_exceeded = True
                return
            self.count += 1
            yield chord_at(corr, offs)


def enumerate_long_chords(corr: Corridor, cap: int) -> ChordStream:
    """Every long chord of a path corridor, boundary chords first
    (``l_L`` = the b side, then ``l_R`` = the a side)."""
    return ChordStream(corr, cap)


def chord_count(corr: Corridor) -> int:
    return int(np.prod([t + 1 for t in corr.thickness]))


# ----------------------------------------------------------------- dumps


def dump_corridors(corridors: Sequence[Corridor]) -> str:
    """One polygon per line: ``P`` (path), or ``O``/``I`` (cycle outer/inner)."""
    lines = []
    for c in corridors:
        poly = c.polygon()
        if c.kind == "path":
            lines.append("P " + " ".join(f"{x},{y}" for x, y in poly))
        else:
            lines.append("O " + " ".join(f"{x},{y}" for x, y in poly[0]))
            lines.append("I " + " ".join(f"{x},{y}" for x, y in poly[1]))
    return "\n".join(lines) + ("\n" if lines else "")


def load_polygons(text: str) -> list:
    """Parse a corridor dump back into polygon vertex lists (cycles as pairs)."""
    out, pending = [], None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tag, *verts = line.split()
        try:
            pts = [tuple(int(v) for v in tok.split(",")) for tok in verts]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad vertex ({exc})") from None
        if tag == "P":
            out.append(pts)
        elif tag == "O":
            pending = pts
        elif tag == "I" and pending is not None:
            out.append((pending, pts))
            pending = None
        else:
            raise ValueError(f"line {lineno}: unexpected tag {tag!r}")
    return out


def placements_in(corr: Corridor, items: dict, packing: Packing) -> Packing:
    """Placements of ``packing`` whose rectangle lies inside ``corr``."""
    keep = []
    m = corr.mask
    for p in packing.placements:
        x, y, w, h = p.rect(items[p.item_id])
        if x >= 0 and y >= 0 and x + w <= corr.side and y + h <= corr.side and m[y:y + h, x:x + w].all():
            keep.append(p)
    return Packing(packing.knapsack_side, tuple(keep))


def rect_cells(rect: Rect) -> tuple[slice, slice]:
    x, y, w, h = rect
    return slice(y, y + h), slice(x, x + w)


def populate_uniform(corr: Corridor, per_piece: int, length: int, first_id: int = 0):
    """Place ``per_piece`` unit-thick items of the given ``length`` in the
    corner-free core of every piece.  Returns ``(items, packing)``."""
    strips = [corr.piece_strip(j) for j in range(corr.s)]
    items, placements = [], []
    next_id = first_id
    for j in range(corr.s):
        core = strips[j].copy()
        for k in corr.neighbours(j):
            core &= ~strips[k]
        ys, xs = np.nonzero(core)
        x0, x1, y0, y1 = xs.min(), xs.max() + 1, ys.min(), ys.max() + 1
        horizontal = corr.horizontal(j)
        lanes = range(y0, y1) if horizontal else range(x0, x1)
        span = (x0, x1) if horizontal else (y0, y1)
        placed = 0
        for lane in lanes:
            pos = span[0]
            while placed < per_piece and pos + length <= span[1]:
                if horizontal:
                    items.append(Item(next_id, length, 1))
                    placements.append(Placement(next_id, int(pos), int(lane)))
                else:
                    items.append(Item(next_id, 1, length))
                    placements.append(Placement(next_id, int(lane), int(pos)))
                next_id += 1
                placed += 1
                pos += length
        if placed < per_piece:
            raise CorridorError(f"piece {j} has room for only {placed} items of length {length}")
    return items, Packing(corr.side, tuple(placements))
