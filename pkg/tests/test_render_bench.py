import re
from fractions import Fraction

from geoknap.bench import bench, bench_instances, write_instances
from geoknap.corridor import Corridor
from geoknap.geom import Item, Packing, Placement
from geoknap.instance import Instance
from geoknap.render import render_svg

L = Corridor("path", True, (0, 10), (2, 8), (0, 20), 32)


def test_empty_packing_is_frame_only():
    svg = render_svg(Packing(10), {})
    assert svg.count("<rect") == 1 and "<path" not in svg


def test_origin_item_is_flipped():
    svg = render_svg(Packing(10, [Placement(0, 0, 0)]), {0: Item(0, 3, 4)}, scale=1)
    assert '<rect x="0" y="6" width="3" height="4"' in svg


def test_one_path_per_corridor():
    svg = render_svg(None, corridors=[L, Corridor.box(20, 20, 10, 2, 32)])
    assert svg.count("<path") == 2
    assert len(re.findall(r" Z", svg)) == 2


def test_empty_dir(tmp_path):
    report = bench(tmp_path)
    assert report.rows == [] and report.max_ratio is None


def test_trivial_batch_ratio_one():
    named = [(f"t{k}", Instance(4, (Item(0, 4, 4, k + 1),))) for k in range(3)]
    report = bench_instances(named)
    assert [r.ratio for r in report.rows] == [1, 1, 1]


def test_report_reproducible(tmp_path):
    write_instances(tmp_path, 6, seed=3)
    first = bench(tmp_path, Fraction(1, 2), [0, 1]).to_text()
    second = bench(tmp_path, Fraction(1, 2), [0, 1]).to_text()
    assert first == second
    assert first.count("\n") == 6 * 2 + 2


def test_parse_errors_become_rows(tmp_path):
    (tmp_path / "bad.txt").write_text("N 4\nitems 1\n1 0 1 1\n")
    report = bench(tmp_path)
    assert report.rows[0].status.startswith("parse_error")
