import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from geoknap.geom import Item, Packing, Placement, validate_packing
from geoknap.packers import (BoxRegion, PreconditionError, StackFailure, nfdh, nfdh_bound_holds, stack_pack,
                             steinberg, steinberg_condition, strip_remove_repack)


def inside(packing_like, items, box):
    index = {it.id: it for it in items}
    return all(box.contains(p.rect(index[p.item_id])) for p in packing_like)


def test_nfdh_tight_unit_squares():
    items = [Item(i, 1, 1) for i in range(80)]
    box = BoxRegion(0, 0, 10, 10)
    res = nfdh(items, box, Fraction(1, 10))
    assert len(res.placements) == 80 and res.unpacked == ()


def test_nfdh_empty():
    res = nfdh([], BoxRegion(0, 0, 5, 5), Fraction(1, 2))
    assert res.placements == () and res.unpacked == ()


def test_nfdh_overfull_meets_bound():
    items = [Item(i, 1, 1) for i in range(200)]
    box = BoxRegion(0, 0, 10, 10)
    res = nfdh(items, box, Fraction(1, 10))
    assert len(res.placements) >= 80
    assert nfdh_bound_holds(items, len(res.placements), box, Fraction(1, 10))


def test_nfdh_precondition():
    with pytest.raises(PreconditionError) as info:
        nfdh([Item("big", 6, 1)], BoxRegion(0, 0, 10, 10), Fraction(1, 2))
    assert info.value.offenders == ["big"]


def test_nfdh_offset_box():
    items = [Item(i, 2, 1 + i % 2) for i in range(6)]
    box = BoxRegion(5, 7, 8, 8)
    res = nfdh(items, box, Fraction(1, 4))
    assert inside(res.placements, items, box)
    assert validate_packing(items, res.packing(20)).valid


@settings(max_examples=80)
@given(st.integers(0, 10**6), st.sampled_from([Fraction(1, 2), Fraction(1, 4), Fraction(1, 10)]))
def test_nfdh_area_bound_property(seed, eps):
    rng = random.Random(seed)
    w, h = rng.randint(10, 60), rng.randint(10, 60)
    cap_w, cap_h = int(eps * w), int(eps * h)
    if min(cap_w, cap_h) < 1:
        return
    items = [Item(i, rng.randint(1, cap_w), rng.randint(1, cap_h)) for i in range(rng.randint(0, 80))]
    box = BoxRegion(0, 0, w, h)
    res = nfdh(items, box, eps)
    assert validate_packing(items, res.packing(max(w, h))).valid
    assert inside(res.placements, items, box)
    area = sum(it.area for it in items if it.id in set(res.item_ids()))
    total = sum(it.area for it in items)
    assert area >= min(total, (1 - 2 * eps) * w * h)


def test_stack_exact_fit():
    items = [Item(i, 5, 2) for i in range(3)]
    res = stack_pack(items, BoxRegion(0, 0, 5, 6))
    assert [p.y for p in res.placements] == [0, 2, 4]


def test_stack_deficit():
    with pytest.raises(StackFailure) as info:
        stack_pack([Item(0, 2, 3), Item(1, 2, 4)], BoxRegion(0, 0, 5, 6))
    assert info.value.deficit == 1


def test_stack_sorted_by_width():
    items = [Item("a", 5, 1), Item("b", 3, 1), Item("c", 4, 1)]
    res = stack_pack(items, BoxRegion(0, 0, 5, 3))
    assert res.item_ids() == ["a", "c", "b"]


def test_stack_from_end_vertical():
    items = [Item(0, 1, 4), Item(1, 2, 3)]
    res = stack_pack(items, BoxRegion(0, 0, 5, 4), "vertical", from_end=True)
    assert [(p.item_id, p.x) for p in res.placements] == [(0, 4), (1, 2)]


def test_steinberg_box_sized_item():
    packing = steinberg([Item(0, 6, 4)], BoxRegion(0, 0, 6, 4))
    assert [(p.x, p.y) for p in packing] == [(0, 0)]


def test_steinberg_two_halves():
    items = [Item(0, 3, 4), Item(1, 3, 4)]
    packing = steinberg(items, BoxRegion(0, 0, 6, 4))
    assert validate_packing(items, packing).valid and len(packing) == 2
    assert sorted(p.x for p in packing) == [0, 3]


def test_steinberg_condition_reports_violation():
    assert steinberg_condition([Item(0, 7, 1)], BoxRegion(0, 0, 6, 6)).startswith("max width")
    with pytest.raises(PreconditionError, match="2\\*area"):
        steinberg([Item(i, 4, 4) for i in range(2)], BoxRegion(0, 0, 6, 6))
    # the inequality is sufficient, not necessary: four 3x3 squares tile 6x6
    squares = [Item(i, 3, 3) for i in range(4)]
    assert steinberg_condition(squares, BoxRegion(0, 0, 6, 6)) is not None
    assert validate_packing(squares, steinberg(squares, BoxRegion(0, 0, 6, 6))).valid


def random_steinberg_instance(rng, w, h, n):
    while True:
        items = [Item(i, rng.randint(1, w // 2), rng.randint(1, h // 2)) for i in range(n)]
        if steinberg_condition(items, BoxRegion(0, 0, w, h)) is None:
            return items
        n = max(1, n - 1)


def test_steinberg_fifty_random_items():
    rng = random.Random(2024)
    for _ in range(5):
        items = random_steinberg_instance(rng, 100, 100, 50)
        packing = steinberg(items, BoxRegion(0, 0, 100, 100))
        assert len(packing) == len(items)
        assert validate_packing(items, packing).valid


@settings(max_examples=150)
@given(st.integers(0, 10**6))
def test_steinberg_packs_everything_when_condition_holds(seed):
    rng = random.Random(seed)
    w, h = rng.randint(2, 30), rng.randint(2, 30)
    items = [Item(i, rng.randint(1, w), rng.randint(1, h)) for i in range(rng.randint(1, 10))]
    box = BoxRegion(3, 1, w, h)
    if steinberg_condition(items, box) is not None:
        return
    packing = steinberg(items, box, 40)
    assert len(packing) == len(items)
    assert validate_packing(items, packing).valid
    assert inside(packing, items, box)


def strip_instance(rows):
    box = BoxRegion(0, 0, 400, 256)
    items = [Item(i, 400, 1) for i in range(len(rows))]
    return box, items, Packing(400, [Placement(i, 0, y) for i, y in enumerate(rows)])


def test_strip_loaded_strip_survives():
    box, items, placed = strip_instance([0, 1, 2, 3])
    res = strip_remove_repack(box, items, placed, Fraction(1, 4))
    assert res.dropped == () and res.dropped_strip == 1


def test_strip_uniform_profit_drops_one_quarter():
    box, items, placed = strip_instance([0, 1, 64, 65, 128, 129, 192, 193])
    res = strip_remove_repack(box, items, placed, Fraction(1, 4))
    assert res.dropped == (0, 1)
    assert Fraction(len(res.dropped), len(items)) == Fraction(1, 4)
    kept = [p for nice in res.packings for p in nice.placements]
    assert sorted(p.item_id for p in kept) == list(range(2, 8))
    assert validate_packing(items, Packing(400, kept)).valid


def test_strip_empty_box():
    res = strip_remove_repack(BoxRegion(0, 0, 300, 300), [], Packing(300), Fraction(1, 4))
    assert res.sub_boxes == [] and res.dropped == ()


def test_strip_rejects_thick_items():
    with pytest.raises(PreconditionError):
        strip_remove_repack(BoxRegion(0, 0, 20, 20), [Item(0, 5, 5)], Packing(20, [Placement(0, 0, 0)]), Fraction(1, 2))


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_strip_loss_at_most_one_strip(seed):
    rng = random.Random(seed)
    eps = Fraction(1, rng.choice([2, 3, 4]))
    width, height = 64, 16 * eps.denominator ** 4
    ys = sorted(rng.sample(range(height), rng.randint(1, 12)))
    items = [Item(i, rng.randint(1, width), 1, rng.randint(1, 5)) for i in range(len(ys))]
    placed = Packing(height, [Placement(i, 0, y) for i, y in enumerate(ys)])
    box = BoxRegion(0, 0, width, height)
    res = strip_remove_repack(box, items, placed, eps, horizontal=True)
    lost = sum(items[i].profit for i in res.dropped)
    assert lost * eps.denominator <= sum(it.profit for it in items)
    kept = [p for nice in res.packings for p in nice.placements]
    assert len(kept) + len(res.dropped) == len(items)
    assert validate_packing(items, Packing(height, kept)).valid
    assert inside(kept, items, box)
