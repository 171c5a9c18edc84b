"""Plain-text instance and packing formats.

Instance::

    N 10
    rotate            (optional)
    weighted          (optional)
    items 2
    a 3 4 5           (id width height profit)
    b 1 1 1

Packing::

    N 10
    placements 1
    a 0 0 0           (id x y rotated)
"""

from __future__ import annotations

from dataclasses import dataclass

from .geom import Item, Packing, Placement


class ParseError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class Instance:
    side: int
    items: tuple[Item, ...]
    rotate: bool = False
    weighted: bool = False

    @property
    def index(self) -> dict:
        return {it.id: it for it in self.items}


def _parse_id(tok: str):
    # numeric ids stay ints so that ordering matches the numeric value
    return int(tok) if tok.lstrip("-").isdigit() and str(int(tok)) == tok else tok


def _int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(line, f"{what} {tok!r} is not an integer") from None


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_instance(text: str) -> Instance:
    lines = list(_lines(text))
    if not lines:
        raise ParseError(1, "empty input")
    pos = 0
    lineno, toks = lines[pos]
    if toks[0] != "N" or len(toks) != 2:
        raise ParseError(lineno, "expected 'N <int>'")
    side = _int(toks[1], lineno, "N")
    if side < 1:
        raise ParseError(lineno, "N must be positive")
    pos += 1
    flags = {"rotate": False, "weighted": False}
    while pos < len(lines) and lines[pos][1][0] in flags:
        lineno, toks = lines[pos]
        if len(toks) != 1:
            raise ParseError(lineno, f"flag {toks[0]!r} takes no arguments")
        flags[toks[0]] = True
        pos += 1
    if pos == len(lines):
        raise ParseError(lines[-1][0], "missing 'items <count>'")
    lineno, toks = lines[pos]
    if toks[0] != "items" or len(toks) != 2:
        raise ParseError(lineno, "expected 'items <count>'")
    count = _int(toks[1], lineno, "item count")
    if count < 0:
        raise ParseError(lineno, "item count must be non-negative")
    pos += 1
    body = lines[pos:]
    if len(body) != count:
        where = body[count][0] if len(body) > count else (body[-1][0] if body else lineno)
        raise ParseError(where, f"expected {count} item lines, found {len(body)}")
    items, seen = [], set()
    for lineno, toks in body:
        if len(toks) != 4:
            raise ParseError(lineno, "expected '<id> <w> <h> <p>'")
        iid = _parse_id(toks[0])
        w = _int(toks[1], lineno, "width")
        h = _int(toks[2], lineno, "height")
        p = _int(toks[3], lineno, "profit")
        for name, v in (("width", w), ("height", h), ("profit", p)):
            if v < 1:
                raise ParseError(lineno, f"non-positive {name} {v}")
        if iid in seen:
            raise ParseError(lineno, f"duplicate id {toks[0]!r}")
        seen.add(iid)
        items.append(Item(iid, w, h, p))
    return Instance(side, tuple(items), flags["rotate"], flags["weighted"])


def serialize_instance(inst: Instance) -> str:
    out = [f"N {inst.side}"]
    if inst.rotate:
        out.append("rotate")
    if inst.weighted:
        out.append("weighted")
    out.append(f"items {len(inst.items)}")
    out += [f"{it.id} {it.width} {it.height} {it.profit}" for it in inst.items]
    return "\n".join(out) + "\n"


def serialize_packing(packing: Packing) -> str:
    out = [f"N {packing.knapsack_side}", f"placements {len(packing)}"]
    out += [f"{p.item_id} {p.x} {p.y} {int(p.rotated)}" for p in packing]
    return "\n".join(out) + "\n"


def parse_packing(text: str) -> Packing:
    lines = list(_lines(text))
    if len(lines) < 2:
        raise ParseError(len(lines) + 1, "expected 'N <int>' and 'placements <count>'")
    (l1, t1), (l2, t2) = lines[0], lines[1]
    if t1[0] != "N" or len(t1) != 2:
        raise ParseError(l1, "expected 'N <int>'")
    if t2[0] != "placements" or len(t2) != 2:
        raise ParseError(l2, "expected 'placements <count>'")
    side = _int(t1[1], l1, "N")
    count = _int(t2[1], l2, "placement count")
    body = lines[2:]
    if len(body) != count:
        raise ParseError(body[-1][0] if body else l2, f"expected {count} placement lines, found {len(body)}")
    out = []
    for lineno, toks in body:
        if len(toks) != 4:
            raise ParseError(lineno, "expected '<id> <x> <y> <rotated>'")
        out.append(Placement(_parse_id(toks[0]), _int(toks[1], lineno, "x"), _int(toks[2], lineno, "y"),
                             bool(_int(toks[3], lineno, "rotated"))))
    return Packing(side, tuple(out))
