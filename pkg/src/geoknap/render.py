"""SVG output for packings and corridor sets (origin at the bottom left)."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .corridor import Corridor
from .geom import Packing

PALETTE = {
    "small": "#9ecae1",
    "large": "#fdae6b",
    "horizontal": "#a1d99b",
    "vertical": "#bcbddc",
    "intermediate": "#fc9272",
    None: "#d9d9d9",
}


def _header(side: int, scale: int) -> list[str]:
    size = side * scale
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black" stroke-width="2"/>',
    ]


def render_svg(packing: Packing | None, items: dict | None = None, labels: dict | None = None,
               corridors: Sequence[Corridor] = (), scale: int = 20, side: int | None = None) -> str:
    """One ``rect`` per placement (filled by classification label when
    given) and one closed ``path`` per corridor."""
    if side is None:
        if packing is not None:
            side = packing.knapsack_side
        elif corridors:
            side = corridors[0].side
        else:
            raise ValueError("need a packing, corridors or an explicit side")
    out = _header(side, scale)

    def flip(y):
        return (side - y) * scale

    for corr in corridors:
        poly = corr.polygon()
        rings = [poly] if corr.kind == "path" else list(poly)
        d = " ".join("M " + " L ".join(f"{x * scale} {flip(y)}" for x, y in ring) + " Z" for ring in rings)
        out.append(f'<path d="{d}" fill="#f0f0f0" fill-rule="evenodd" stroke="#636363" stroke-dasharray="4 2"/>')
    if packing is not None:
        items = items or {}
        for p in packing:
            it = items.get(p.item_id)
            if it is None:
                continue
            x, y, w, h = p.rect(it)
            fill = PALETTE.get(getattr(labels.get(p.item_id), "value", None) if labels else None, PALETTE[None])
            out.append(
                f'<rect x="{x * scale}" y="{flip(y + h)}" width="{w * scale}" height="{h * scale}" '
                f'fill="{fill}" stroke="black"><title>{escape(str(p.item_id))}</title></rect>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
