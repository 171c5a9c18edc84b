import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from geoknap.classify import Classification, Label, ThresholdPair
from geoknap.geom import Item, Packing, Placement, validate_packing
from geoknap.packers import BoxRegion
from geoknap.slices import (DimensionClass, Slice, SliceContainer, SliceInfeasible, build_slices, decode_estimates,
                            encode_estimates, group_by_dimension, guess_box_counts, level_breakpoints, level_of,
                            linear_grouping, linear_groups, max_level, pack_slices_nicely, partition_subcorridor,
                            slices_to_items)


def test_levels_eps_one():
    assert [level_of(h, 1) for h in (1, 2, 3, 4)] == [0, 1, 1, 2]
    assert level_breakpoints(1, 4) == [1, 2, 4, 8]


def test_side_one_has_only_level_zero():
    assert max_level(Fraction(1, 2), 1) == 0


@given(st.integers(1, 10**4), st.sampled_from([Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 10)]))
def test_level_brackets_length(length, eps):
    lvl = level_of(length, eps)
    assert (1 + eps) ** lvl <= length < (1 + eps) ** (lvl + 1)


def test_group_by_dimension():
    items = {0: Item(0, 30, 1), 1: Item(1, 30, 3), 2: Item(2, 1, 30), 3: Item(3, 3, 3)}
    labels = {0: Label.HORIZONTAL, 1: Label.HORIZONTAL, 2: Label.VERTICAL, 3: Label.SMALL}
    cls = Classification(labels, ThresholdPair(Fraction(1, 5), Fraction(1, 20)), 100)
    groups = group_by_dimension(cls, items, 1)
    assert groups == [DimensionClass("hor", 0, (0,)), DimensionClass("hor", 1, (1,)), DimensionClass("ver", 0, (2,))]


def test_single_item_single_class():
    cls = Classification({"a": Label.VERTICAL}, ThresholdPair(Fraction(1, 2), Fraction(1, 16)), 16)
    assert len(group_by_dimension(cls, [Item("a", 1, 12)], Fraction(1, 2))) == 1


def test_zero_counts_all_separators():
    code = encode_estimates({}, 8, Fraction(1, 2), 16)
    assert code.bits == "1" * 7 and set(code.ks) == {0}


def test_single_full_level_code():
    # floor(log_1.5 16) = 6 levels above 0, unit = (1/2) * 8 / (4 * 6) = 1/6
    code = encode_estimates({3: 8}, 8, Fraction(1, 2), 16)
    assert code.unit == Fraction(1, 6)
    assert code.ks == (0, 0, 0, 48, 0, 0, 0)
    assert len(code) == 48 + 7


def test_round_trip_underestimates():
    counts = {0: 3, 2: 5, 5: 1}
    code = encode_estimates(counts, 9, Fraction(1, 2), 16)
    back = decode_estimates(code.bits, 9, Fraction(1, 2), 16)
    assert back == code
    for lvl, est in back.estimates.items():
        assert est <= counts.get(lvl, 0)


def test_decode_rejects_garbage():
    with pytest.raises(ValueError):
        decode_estimates("0010", 4, Fraction(1, 2), 16)
    with pytest.raises(ValueError):
        decode_estimates("0121", 4, Fraction(1, 2), 16)


def test_build_slices_zero_estimate():
    cls = DimensionClass("hor", 0, (0,))
    assert build_slices(cls, 0, 1, [Item(0, 9, 1)]) == []


def test_build_slices_clamped_to_class():
    cls = DimensionClass("ver", 0, (0,))
    out = build_slices(cls, 2, 1, [Item(0, 3, 9)])
    assert len(out) == 3 and {s.profit for s in out} == {1} and {s.length for s in out} == {9}


def test_build_slices_narrowest_first():
    cls = DimensionClass("hor", 1, ("w7", "w4"))
    out = build_slices(cls, 1, Fraction(1, 2), [Item("w7", 7, 2), Item("w4", 4, 2)])
    assert {s.parent for s in out} == {"w4"}
    assert {s.profit for s in out} == {Fraction(2, 3)}


def make_slices(lengths):
    return [Slice(k, "hor", L, Fraction(1), 0) for k, L in enumerate(lengths)]


def test_linear_grouping_ten_to_one():
    classes = linear_grouping(make_slices(range(10, 0, -1)), Fraction(1, 2))
    assert [c.rounded_length for c in classes] == [6, 2]
    assert [[s.length for s in c.members] for c in classes] == [[6, 5, 4, 3], [2, 1]]


def test_linear_grouping_equal_lengths():
    slices = make_slices([5] * 12)
    classes = linear_grouping(slices, Fraction(1, 3))
    assert {c.rounded_length for c in classes} == {5}
    assert 12 - sum(c.count for c in classes) == 3


def test_linear_grouping_single_slice_dropped():
    assert linear_grouping(make_slices([4]), Fraction(1, 2)) == []


def test_guess_counts():
    assert guess_box_counts({(0, 1, "a"): 0}, Fraction(1, 2), 1) == {(0, 1, "a"): 0}
    assert guess_box_counts({(0, 1, "a"): 7}, Fraction(1, 2), 1) == {(0, 1, "a"): 7}


@given(st.dictionaries(st.tuples(st.integers(0, 2), st.integers(1, 3), st.integers(0, 3)), st.integers(0, 50)),
       st.sampled_from([Fraction(1, 2), Fraction(1, 4)]))
def test_guess_counts_retain_most(counts, eps):
    out = guess_box_counts(counts, eps, 4)
    for key, val in out.items():
        assert 0 <= val <= counts[key]
    for cls in {k[:2] for k in counts}:
        total = sum(c for k, c in counts.items() if k[:2] == cls)
        kept = sum(v for k, v in out.items() if k[:2] == cls)
        assert kept >= (1 - eps) * total


def test_stack_in_one_box():
    box = SliceContainer.from_box("b", BoxRegion(2, 1, 6, 4), 10, horizontal=True)
    rects = pack_slices_nicely([box], {"b": [3, 5, 4]}, 10)["b"]
    assert rects == [(2, 1, 5, 1), (2, 2, 4, 1), (2, 3, 3, 1)]


def test_stack_overfull_box():
    box = SliceContainer.from_box("b", BoxRegion(0, 0, 6, 2), 10, horizontal=True)
    with pytest.raises(SliceInfeasible):
        pack_slices_nicely([box], {"b": [3, 3, 3]}, 10)
    with pytest.raises(SliceInfeasible):
        pack_slices_nicely([box], {"b": [7]}, 10)


def test_stack_from_high_edge_pushed_right():
    box = SliceContainer.from_box("v", BoxRegion(0, 0, 3, 8), 8, horizontal=False, push_low=False,
                                  from_low_edge=False)
    rects = pack_slices_nicely([box], {"v": [2, 5]}, 8)["v"]
    assert rects == [(2, 3, 1, 5), (1, 6, 1, 2)]


def test_slices_to_items_one_box():
    items = [Item(i, 5, 1 + i) for i in range(3)]
    res = slices_to_items(items, [(5, 6)])
    assert res.assigned == {0: 0, 1: 0, 2: 0} and res.dropped == ()


def test_slices_to_items_straddle():
    items = [Item(i, 5, 2) for i in range(3)]
    res = slices_to_items(items, [(10, 3), (10, 3)])
    assert res.dropped == (1,)
    assert res.assigned == {0: 0, 2: 1}


def test_slices_to_items_zero_capacity():
    res = slices_to_items([Item(0, 3, 1)], [(5, 0)])
    assert res.assigned == {} and res.dropped == ()


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_slices_to_items_respects_boxes(seed):
    rng = random.Random(seed)
    items = [Item(i, rng.randint(1, 10), rng.randint(1, 3)) for i in range(rng.randint(0, 10))]
    boxes = [(rng.randint(1, 10), rng.randint(0, 6)) for _ in range(rng.randint(1, 4))]
    res = slices_to_items(items, boxes)
    used = [0] * len(boxes)
    for iid, b in res.assigned.items():
        assert items[iid].width <= boxes[b][0]
        used[b] += items[iid].height
    assert all(u <= cap for u, (_, cap) in zip(used, boxes))
    # at most one straddler per box boundary
    assert len(res.dropped) <= len(boxes)


def test_partition_subcorridor_keeps_thin_items():
    eps = Fraction(1, 2)
    box = BoxRegion(0, 0, 40, 32)
    items = [Item(i, 20 + i, 1) for i in range(6)] + [Item("thick", 6, 6)]
    placed = Packing(40, [Placement(i, 0, 2 * i) for i in range(6)] + [Placement("thick", 30, 20)])
    res = partition_subcorridor(box, items, placed, eps)
    kept = res.packing.item_ids()
    assert set(kept) | set(res.dropped) == {it.id for it in items}
    assert validate_packing(items, res.packing).valid
    assert "thick" in kept


# ---- linear grouping invariants against a direct re-derivation

@settings(max_examples=200)
@given(st.lists(st.integers(1, 40), min_size=1, max_size=60), st.sampled_from([2, 3, 4, 5]))
def test_linear_grouping_invariants(lengths, m):
    eps = Fraction(1, m)
    slices = make_slices(lengths)
    groups = linear_groups(slices, eps)
    classes = linear_grouping(slices, eps)
    size = math.ceil(len(lengths) / (m + 1))
    assert all(len(g) == size for g in groups[:-1])
    assert len({c.rounded_length for c in classes}) <= m
    dropped = len(lengths) - sum(c.count for c in classes)
    assert dropped <= eps * len(lengths) + size
    for c in classes:
        assert c.rounded_length <= min(s.length for s in groups[c.j - 1])
        assert all(s.length <= c.rounded_length for s in c.members)
