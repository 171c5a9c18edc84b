"""Item classification (small / large / horizontal / vertical / intermediate)
and the shifting choice of the threshold pair."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from .geom import Item


class Label(str, Enum):
    SMALL = "small"
    LARGE = "large"
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    INTERMEDIATE = "intermediate"


def _frac(value) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class ThresholdPair:
    eps_large: Fraction
    eps_small: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps_large", _frac(self.eps_large))
        object.__setattr__(self, "eps_small", _frac(self.eps_small))
        if not (0 < self.eps_small < self.eps_large <= 1):
            raise ValueError(f"need 0 < eps_small < eps_large <= 1, got {self}")

    def admissible(self, eps) -> bool:
        eps = _frac(eps)
        return self.eps_small <= eps * eps * self.eps_large


@dataclass(frozen=True)
class Classification:
    labels: dict  # item id -> Label
    pair: ThresholdPair
    side: int

    def ids(self, *labels: Label) -> list:
        return [i for i, lab in self.labels.items() if lab in labels]

    @property
    def small(self):
        return self.ids(Label.SMALL)

    @property
    def large(self):
        return self.ids(Label.LARGE)

    @property
    def horizontal(self):
        return self.ids(Label.HORIZONTAL)

    @property
    def vertical(self):
        return self.ids(Label.VERTICAL)

    @property
    def skewed(self):
        return self.ids(Label.HORIZONTAL, Label.VERTICAL)

    @property
    def intermediate(self):
        return self.ids(Label.INTERMEDIATE)


def _le(length: int, frac: Fraction, side: int) -> bool:
    # length <= frac * side, by cross-multiplication
    return length * frac.denominator <= frac.numerator * side


def label_item(item: Item, pair: ThresholdPair, side: int) -> Label:
    w, h = item.width, item.height
    w_small, h_small = _le(w, pair.eps_small, side), _le(h, pair.eps_small, side)
    w_large, h_large = not _le(w, pair.eps_large, side), not _le(h, pair.eps_large, side)
    if w_small and h_small:
        return Label.SMALL
    if w_large and h_large:
        return Label.LARGE
    if w_large and h_small:
        return Label.HORIZONTAL
    if h_large and w_small:
        return Label.VERTICAL
    return Label.INTERMEDIATE


def classify_items(items: Sequence[Item], pair: ThresholdPair, side: int) -> Classification:
    if side < 1:
        raise ValueError("side must be >= 1")
    return Classification({it.id: label_item(it, pair, side) for it in items}, pair, side)


def cubic_step(eps: Fraction, value: Fraction) -> Fraction:
    """Default chain step ``eps**3 * value``; keeps each pair admissible."""
    return eps ** 3 * value


def _check_eps(eps) -> Fraction:
    eps = _frac(eps)
    if eps <= 0 or eps > Fraction(1, 2) or eps.numerator != 1:
        raise ValueError(f"eps must be 1/m for an integer m >= 2, got {eps}")
    return eps


def candidate_threshold_pairs(eps, step: Callable[[Fraction, Fraction], Fraction] = cubic_step) -> list[ThresholdPair]:
    """The ``2/eps`` consecutive pairs of the chain ``e_1 = eps, e_{i+1} = step(eps, e_i)``."""
    eps = _check_eps(eps)
    k = 2 * eps.denominator
    chain = [eps]
    for _ in range(k):
        chain.append(_frac(step(eps, chain[-1])))
    pairs = [ThresholdPair(chain[i], chain[i + 1]) for i in range(k)]
    bad = [p for p in pairs if not p.admissible(eps)]
    if bad:
        raise ValueError(f"step function produced inadmissible pairs: {bad}")
    return pairs


def intermediate_weight(items: Sequence[Item], pair: ThresholdPair, side: int, weighted: bool = False) -> int:
    total = 0
    for it in items:
        if label_item(it, pair, side) is Label.INTERMEDIATE:
            total += it.profit if weighted else 1
    return total


def select_threshold_pair(opt_items: Sequence[Item], eps, side: int, weighted: bool = False,
                          step: Callable[[Fraction, Fraction], Fraction] = cubic_step) -> ThresholdPair:
    """First candidate pair whose intermediate items in ``opt_items`` weigh at
    most ``eps`` times the total (count, or profit when ``weighted``)."""
    if not opt_items:
        raise ValueError("opt_items must be non-empty")
    eps = _check_eps(eps)
    total = sum(it.profit for it in opt_items) if weighted else len(opt_items)
    for pair in candidate_threshold_pairs(eps, step):
        if intermediate_weight(opt_items, pair, side, weighted) <= eps * total:
            return pair
    raise AssertionError("averaging argument violated: no admissible threshold pair found")
