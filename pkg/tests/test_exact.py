import itertools
import random

import numpy as np
import pytest

from geoknap.errors import BudgetExceeded, BudgetRefused
from geoknap.exact import ExactConfig, normal_positions, optimal_pack, rainbow_feasible
from geoknap.geom import Item, validate_packing


def brute_force_optimum(items, side, rotation=False):
    """Try every subset, orientation and integral position on an occupancy grid."""
    best = 0

    def fits(order, grid):
        if not order:
            return True
        it = order[0]
        shapes = {(it.width, it.height)} | ({(it.height, it.width)} if rotation else set())
        for w, h in shapes:
            for y in range(side - h + 1):
                for x in range(side - w + 1):
                    if not grid[y:y + h, x:x + w].any():
                        grid[y:y + h, x:x + w] = True
                        ok = fits(order[1:], grid)
                        grid[y:y + h, x:x + w] = False
                        if ok:
                            return True
        return False

    for r in range(len(items) + 1):
        for subset in itertools.combinations(items, r):
            profit = sum(it.profit for it in subset)
            if profit > best and fits(list(subset), np.zeros((side, side), dtype=bool)):
                best = profit
    return best


def test_item_equal_to_knapsack():
    res = optimal_pack([Item(0, 4, 4, 7)], 4)
    assert res.profit == 7
    assert [(p.x, p.y) for p in res.packing] == [(0, 0)]


def test_oversized_item_ignored():
    res = optimal_pack([Item(0, 5, 1, 9)], 4)
    assert res.profit == 0 and len(res.packing) == 0


def test_two_dominoes_need_rotation():
    items = [Item(0, 2, 1), Item(1, 1, 2)]
    # without rotation the two dominoes cannot share a 2x2 square
    assert optimal_pack(items, 2).profit == brute_force_optimum(items, 2) == 1
    rotated = optimal_pack(items, 2, ExactConfig(allow_rotation=True))
    assert rotated.profit == brute_force_optimum(items, 2, rotation=True) == 2
    assert validate_packing(items, rotated.packing).valid


def test_normal_positions():
    flags = normal_positions([3, 5], 10)
    assert list(np.nonzero(flags)[0]) == [0, 3, 5, 8]


@pytest.mark.parametrize("rotation", [False, True])
def test_matches_brute_force(rotation):
    rng = random.Random(11 + rotation)
    for _ in range(60):
        side = rng.randint(2, 6)
        items = [Item(i, rng.randint(1, side), rng.randint(1, side), rng.randint(1, 6))
                 for i in range(rng.randint(1, 5))]
        res = optimal_pack(items, side, ExactConfig(allow_rotation=rotation))
        assert res.profit == brute_force_optimum(items, side, rotation)
        assert validate_packing(items, res.packing).valid
        assert res.packing.profit(items) == res.profit


def test_deterministic_witness():
    items = [Item(i, 2, 3, 1 + i % 2) for i in range(5)]
    assert optimal_pack(items, 6) == optimal_pack(list(reversed(items)), 6)


def test_budget_refusal_and_node_limit():
    with pytest.raises(BudgetRefused):
        optimal_pack([Item(i, 1, 1) for i in range(11)], 8)
    with pytest.raises(BudgetRefused):
        optimal_pack([Item(0, 1, 1)], 17)
    with pytest.raises(BudgetExceeded):
        optimal_pack([Item(i, 2 + i % 3, 3 + i % 2, 1 + i) for i in range(8)], 9, ExactConfig(node_limit=5))


def test_rainbow_gamma_zero():
    ok, witness = rainbow_feasible([], {}, np.ones((3, 3), bool), 0)
    assert ok and len(witness) == 0


def test_rainbow_single_item():
    ok, witness = rainbow_feasible([Item(0, 2, 1)], {0: 1}, np.ones((3, 3), bool), 1)
    assert ok and len(witness) == 1


def test_rainbow_needs_distinct_colours():
    items = [Item(0, 1, 1), Item(1, 1, 1)]
    ok, _ = rainbow_feasible(items, {0: 1, 1: 1}, np.ones((3, 3), bool), 2)
    assert not ok


def test_rainbow_respects_region_and_blocked():
    region = np.zeros((4, 4), bool)
    region[0, :] = True
    items = [Item(0, 2, 1), Item(1, 2, 1)]
    ok, witness = rainbow_feasible(items, {0: 1, 1: 2}, region, 2)
    assert ok and {p.y for p in witness} == {0}
    blocked = np.zeros_like(region)
    blocked[0, 1] = True
    assert not rainbow_feasible(items, {0: 1, 1: 2}, region, 2, blocked=blocked)[0]


def test_rainbow_explicit_palette():
    items = [Item(0, 1, 1), Item(1, 1, 1)]
    ok, witness = rainbow_feasible(items, {0: 3, 1: 5}, np.ones((1, 1), bool), {5})
    assert ok and witness.item_ids() == [1]
