import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corridor_cases import dp_instance
from geoknap.corridor import Corridor, CorridorError, staircase_ring
from geoknap.corridor_dp import DPCaps, base_case_enumerate, color_items, coloring_family, solve_corridor
from geoknap.errors import BudgetExceeded
from geoknap.exact import ExactConfig, rainbow_feasible
from geoknap.geom import Item


def test_gamma_one_always_rainbow():
    coloring = color_items(range(10), 1, seed=3)
    assert set(coloring.colors.values()) == {1}
    assert coloring.rainbow([4])


def test_same_seed_same_coloring():
    assert color_items(range(20), 4, 7) == color_items(range(20), 4, 7)
    assert color_items(range(20), 4, 7) != color_items(range(20), 4, 8)


def test_rainbow_rate_small_sample():
    # k!/k^k = 2/9 for k = 3; 20000 trials keep the test fast, the acceptance suite runs 10^5
    hits = sum(color_items([0, 1, 2], 3, seed).rainbow([0, 1, 2]) for seed in range(20000))
    assert abs(hits / 20000 - 2 / 9) < 0.02


def test_family_n_equals_k():
    family = coloring_family(3, 3)
    assert len(family) == 1 and family[0].rainbow([0, 1, 2])


def test_family_four_choose_two():
    family = coloring_family(4, 2)
    for pair in itertools.combinations(range(4), 2):
        assert any(f.rainbow(pair) for f in family)
    # one 2-colouring separates at most 4 of the 6 pairs, so two members is optimal
    assert len(family) == 2


def test_family_k_one():
    family = coloring_family(5, 1)
    assert len(family) == 1 and set(family[0].colors.values()) == {1}


def test_family_budget():
    with pytest.raises(BudgetExceeded):
        coloring_family(10, 7)


BOX = Corridor.box(0, 0, 10, 3, 12)


def test_box_two_long_items():
    items = [Item(0, 8, 1), Item(1, 8, 1)]
    colors = {0: 1, 1: 2}
    res = solve_corridor(BOX, items, colors, 2)
    oracle, _ = rainbow_feasible(items, colors, BOX.mask, 2)
    assert res.success and oracle


def test_gamma_zero():
    res = solve_corridor(BOX, [], {}, 0)
    assert res.success and len(res.packing) == 0 and res.cells == 0


def test_corridor_too_thin():
    res = solve_corridor(BOX, [Item(0, 4, 4)], {0: 1}, 1)
    assert not res.success


def test_cycle_rejected():
    with pytest.raises(CorridorError):
        solve_corridor(staircase_ring(4, 2, 8, 32), [], {}, 1)


def test_trace_lines():
    res = solve_corridor(BOX, [Item(0, 8, 1), Item(1, 8, 1)], {0: 1, 1: 2}, 2, trace=True)
    assert res.trace and all(line.startswith("cell lo=") for line in res.trace)
    assert res.trace[-1].endswith("-> success")


def test_cell_budget():
    with pytest.raises(BudgetExceeded):
        solve_corridor(BOX, [Item(0, 8, 1), Item(1, 8, 1)], {0: 1, 1: 2}, 2, DPCaps(cell_budget=1))


def test_base_case_empty_region():
    empty = np.zeros((4, 4), bool)
    assert base_case_enumerate(empty, [Item(0, 1, 1)], {0: 1}, set()) == ()
    assert base_case_enumerate(empty, [Item(0, 1, 1)], {0: 1}, {1}) is None


def test_base_case_single_unit():
    region = np.zeros((4, 4), bool)
    region[2, 3] = True
    got = base_case_enumerate(region, [Item(0, 1, 1)], {0: 1}, {1})
    assert [(p.x, p.y) for p in got] == [(3, 2)]


def test_base_case_end_to_end():
    region = np.zeros((3, 8), bool)
    region[1, :] = True
    got = base_case_enumerate(region, [Item(0, 3, 1), Item(1, 5, 1)], {0: 1, 1: 2}, {1, 2})
    spans = sorted((p.x, p.x + (3 if p.item_id == 0 else 5)) for p in got)
    assert spans[0][1] == spans[1][0] and spans[0][0] == 0 and spans[1][1] == 8


@pytest.mark.parametrize("seed", range(0, 200, 7))
def test_dp_matches_oracle(seed):
    corr, items, colors, gamma = dp_instance(seed)
    res = solve_corridor(corr, items, colors, gamma)
    oracle, _ = rainbow_feasible(items, colors, corr.mask, gamma, ExactConfig(max_side=12))
    assert res.success == oracle


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_adding_an_item_never_hurts(seed, extra_seed):
    corr, items, colors, gamma = dp_instance(seed)
    rng = random.Random(extra_seed)
    extra = Item(100, rng.randint(1, 4), rng.randint(1, 2))
    before = solve_corridor(corr, items, colors, gamma).success
    after = solve_corridor(corr, items + [extra], {**colors, 100: rng.randint(1, gamma)}, gamma).success
    assert after or not before


def test_rainbow_probability_formula():
    for k in range(1, 6):
        perms = sum(len(set(c)) == k for c in itertools.product(range(k), repeat=k))
        assert perms / k ** k == math.factorial(k) / k ** k
