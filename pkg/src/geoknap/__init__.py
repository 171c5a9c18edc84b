"""Desk-scale toolkit for 2D geometric knapsack: exact oracle, item
classification, corridor decomposition, shelf packers, the slices pipeline
and a colour-coding DP over long chords."""

from .geom import Item, Packing, Placement, ValidationReport, Violation, rects_intersect, total_area, validate_packing

__all__ = [
    "Item",
    "Packing",
    "Placement",
    "ValidationReport",
    "Violation",
    "rects_intersect",
    "total_area",
    "validate_packing",
]
