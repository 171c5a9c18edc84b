import numpy as np
from hypothesis import given, settings, strategies as st

from geoknap.geom import (Item, Packing, Placement, occupancy, rect_inside_mask, rects_intersect, total_area,
                          validate_packing)


def test_empty_packing_is_valid():
    items = [Item(1, 3, 3), Item(2, 4, 4)]
    assert validate_packing(items, Packing(10)).valid


def test_identical_unit_squares_overlap():
    items = [Item(1, 1, 1), Item(2, 1, 1)]
    report = validate_packing(items, Packing(10, [Placement(1, 0, 0), Placement(2, 0, 0)]))
    assert [v.kind for v in report.violations] == ["overlap"]


def test_out_of_bounds():
    report = validate_packing([Item(1, 5, 5)], Packing(10, [Placement(1, 6, 0)]))
    assert [v.kind for v in report.violations] == ["out_of_bounds"]


def test_duplicate_and_unknown_reported():
    report = validate_packing([Item(1, 1, 1)], Packing(4, [Placement(1, 0, 0), Placement(1, 2, 2), Placement(9, 0, 0)]))
    assert sorted(v.kind for v in report.violations) == ["duplicate", "unknown_item"]


def test_rotation_swaps_dimensions():
    item = Item("a", 5, 1)
    assert validate_packing([item], Packing(5, [Placement("a", 0, 0, True)])).valid
    assert not validate_packing([item], Packing(5, [Placement("a", 1, 0, False)])).valid


def test_total_area():
    assert total_area([]) == 0
    assert total_area([Item(1, 3, 4)]) == 12
    assert total_area([Item(1, 2, 2), Item(2, 5, 1)]) == 9


def test_rects_intersect_cases():
    assert not rects_intersect((0, 0, 2, 2), (2, 0, 2, 2))
    assert rects_intersect((0, 0, 3, 3), (1, 1, 1, 1))
    assert not rects_intersect((0, 0, 2, 2), (5, 5, 1, 1))


def test_item_rejects_nonpositive():
    for bad in ((0, 1, 1), (1, -2, 1), (1, 1, 0)):
        try:
            Item("x", *bad)
        except ValueError:
            continue
        raise AssertionError(f"accepted {bad}")


def test_rect_inside_mask():
    mask = np.zeros((4, 4), dtype=bool)
    mask[1:3, 0:4] = True
    assert rect_inside_mask((0, 1, 4, 2), mask)
    assert not rect_inside_mask((0, 0, 4, 2), mask)
    assert not rect_inside_mask((3, 1, 2, 1), mask)


rect = st.tuples(st.integers(0, 8), st.integers(0, 8), st.integers(1, 5), st.integers(1, 5))


@given(rect, rect)
def test_intersection_matches_cell_grid(a, b):
    grid = occupancy([a, b], 16)
    assert rects_intersect(a, b) == bool((grid > 1).any())
    assert rects_intersect(a, b) == rects_intersect(b, a)


@settings(max_examples=60)
@given(st.lists(rect, min_size=1, max_size=6))
def test_validator_agrees_with_cell_count(rects):
    items = [Item(i, w, h) for i, (_, _, w, h) in enumerate(rects)]
    packing = Packing(12, [Placement(i, x, y) for i, (x, y, _, _) in enumerate(rects)])
    report = validate_packing(items, packing)
    in_bounds = all(x + w <= 12 and y + h <= 12 for x, y, w, h in rects)
    grid = occupancy(rects, 16)
    assert report.valid == (in_bounds and grid.max() <= 1)
