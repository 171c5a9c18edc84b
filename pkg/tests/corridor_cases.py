"""Seeded random path corridors and coloured item sets shared by the DP tests."""

import random

from geoknap.corridor import Corridor
from geoknap.geom import Item


def random_path_corridor(rng: random.Random, side: int = 12) -> Corridor:
    pieces = rng.randint(1, 3)
    while True:
        t = [rng.randint(1, 3) for _ in range(pieces)]
        if pieces == 1:
            lo = rng.randint(0, side - t[0])
            start = rng.randint(0, 4)
            stop = rng.randint(start + 4, side)
            return Corridor("path", rng.random() < 0.5, (lo,), (lo + t[0],), (start, stop), side)
        # bottom arm runs right, then up, then (for three pieces) left or right
        y0 = rng.randint(0, 3)
        xr = rng.randint(6, side)
        a, b = [y0, xr], [y0 + t[0], xr - t[1]]
        start = rng.randint(0, 2)
        if pieces == 2:
            corr = Corridor("path", True, tuple(a), tuple(b), (start, rng.randint(y0 + t[0] + 3, side)), side)
        else:
            ytop = rng.randint(y0 + t[0] + 3, side)
            if rng.random() < 0.5:
                a.append(ytop)
                b.append(ytop - t[2])
                stop = rng.randint(0, xr - t[1] - 3)
            else:
                if xr + 3 > side or ytop - t[2] < y0 + t[0] + 1:
                    continue
                a.append(ytop - t[2])
                b.append(ytop)
                stop = rng.randint(xr + 3, side)
            corr = Corridor("path", True, tuple(a), tuple(b), (start, stop), side)
        if corr.area > 0 and corr.region_between((0,) * pieces, corr.thickness).sum() == corr.area:
            return corr


def dp_instance(seed: int):
    """``(corridor, items, colours, gamma)`` with at most 8 items and gamma at most 4."""
    rng = random.Random(seed)
    corr = random_path_corridor(rng)
    gamma = rng.randint(1, 4)
    items = []
    for i in range(rng.randint(1, 8)):
        if rng.random() < 0.5:
            items.append(Item(i, rng.randint(1, 6), rng.randint(1, 2)))
        else:
            items.append(Item(i, rng.randint(1, 2), rng.randint(1, 6)))
    colors = {it.id: rng.randint(1, gamma) for it in items}
    return corr, items, colors, gamma
