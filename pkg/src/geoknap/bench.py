"""Batch comparison of the pipeline against the exact optimum."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .errors import BudgetExceeded
from .geom import Item, validate_packing
from .instance import Instance, ParseError, parse_instance, serialize_instance
from .pipeline import PipelineCaps, run_pipeline


@dataclass(frozen=True)
class BenchRow:
    instance: str
    seed: int
    optimum: int | None
    profit: int | None
    ratio: Fraction | None
    seconds: float
    branch: str = ""
    other_branch_profit: int | None = None
    status: str = "ok"


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def ok_rows(self) -> list[BenchRow]:
        return [r for r in self.rows if r.status == "ok"]

    @property
    def max_ratio(self) -> Fraction | None:
        ratios = [r.ratio for r in self.ok_rows]
        return max(ratios) if ratios else None

    @property
    def mean_ratio(self) -> Fraction | None:
        ratios = [r.ratio for r in self.ok_rows]
        return sum(ratios) / len(ratios) if ratios else None

    def to_text(self, timing: bool = False) -> str:
        head = "instance\tseed\toptimum\tprofit\tratio\tbranch\tother_branch\tstatus"
        lines = [head + ("\tseconds" if timing else "")]
        for r in self.rows:
            cells = [r.instance, str(r.seed), _s(r.optimum), _s(r.profit),
                     f"{float(r.ratio):.4f}" if r.ratio is not None else "-", r.branch or "-",
                     _s(r.other_branch_profit), r.status]
            if timing:
                cells.append(f"{r.seconds:.3f}")
            lines.append("\t".join(cells))
        mx, mean = self.max_ratio, self.mean_ratio
        lines.append(f"# rows={len(self.rows)} ok={len(self.ok_rows)} "
                     f"max_ratio={float(mx):.4f} mean_ratio={float(mean):.4f}" if mx is not None
                     else f"# rows={len(self.rows)} ok=0")
        return "\n".join(lines) + "\n"


def _s(v) -> str:
    return "-" if v is None else str(v)


def skewed_instance(seed: int, side: int = 16, max_items: int = 8) -> Instance:
    """Random instance of long unit-thick items (each longer than half the knapsack)."""
    rng = random.Random(seed)
    items = []
    for i in range(rng.randint(2, max_items)):
        length = rng.randint(side // 2 + 1, side)
        items.append(Item(i, length, 1) if rng.random() < 0.5 else Item(i, 1, length))
    return Instance(side, tuple(items))


def write_instances(directory: Path, count: int, seed: int = 0, side: int = 16, max_items: int = 8) -> list[Path]:
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in range(count):
        path = directory / f"inst{k:03d}.txt"
        path.write_text(serialize_instance(skewed_instance(seed * 100_003 + k, side, max_items)))
        paths.append(path)
    return paths


def bench_instances(named: Sequence[tuple[str, Instance]], eps=Fraction(1, 2), seeds: Sequence[int] = (0,),
                    caps: PipelineCaps = PipelineCaps()) -> BenchReport:
    rows = []
    for name, inst in sorted(named, key=lambda t: t[0]):
        for seed in seeds:
            start = time.perf_counter()
            try:
                res = run_pipeline(inst, eps, seed, caps)
                if not validate_packing(inst.items, res.packing).valid:
                    raise AssertionError("invalid packing")
                other = "slices" if res.branch == "dp" else "dp"
                try:
                    alt = run_pipeline(inst, eps, seed, PipelineCaps(caps.exact, caps.dp, caps.c_eps, other,
                                                                     caps.coloring_budget, caps.max_coloring_trials))
                    alt_profit = alt.profit
                except BudgetExceeded:
                    alt_profit = None
                ratio = Fraction(res.reference_profit, max(res.profit, 1))
                rows.append(BenchRow(name, seed, res.reference_profit, res.profit, ratio,
                                     time.perf_counter() - start, res.branch, alt_profit))
            except BudgetExceeded as exc:
                rows.append(BenchRow(name, seed, None, None, None, time.perf_counter() - start,
                                     status=f"budget_exceeded: {exc}"))
            except Exception as exc:  # recorded per row so a batch never aborts
                rows.append(BenchRow(name, seed, None, None, None, time.perf_counter() - start,
                                     status=f"failed: {type(exc).__name__}: {exc}"))
    return BenchReport(rows)


def bench(directory: Path | str, eps=Fraction(1, 2), seeds: Sequence[int] = (0,),
          caps: PipelineCaps = PipelineCaps()) -> BenchReport:
    """Run every ``*.txt`` instance in ``directory`` for every seed."""
    directory = Path(directory)
    named, bad = [], []
    for path in sorted(directory.glob("*.txt")):
        try:
            named.append((path.stem, parse_instance(path.read_text())))
        except ParseError as exc:
            bad.append(BenchRow(path.stem, -1, None, None, None, 0.0, status=f"parse_error: {exc}"))
    report = bench_instances(named, eps, seeds, caps)
    report.rows = sorted(report.rows + bad, key=lambda r: (r.instance, r.seed))
    return report
