"""Axis-aligned rectangle arithmetic.

Coordinates are continuous, so area is width times height with no +1
pixel correction. This convention matters for tiny regions such as line
numbers. Degenerate (zero-area) boxes are legal inputs and have IoU 0
with every box, including themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Box


@dataclass(frozen=True)
class Overlap:
    """Intersection/union areas of two boxes and the resulting IoU."""

    intersection_area: float
    union_area: float
    iou: float


def area(box: Box) -> float:
    """Area of a box; 0 for degenerate boxes."""
    return (box.x_max - box.x_min) * (box.y_max - box.y_min)


def intersection_area(a: Box, b: Box) -> float:
    """Area of the intersection of two boxes; 0 when disjoint."""
    width = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    height = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if width <= 0 or height <= 0:
        return 0.0
    return width * height


def overlap(a: Box, b: Box) -> Overlap:
    """Compute intersection area, union area and IoU in one pass."""
    inter = intersection_area(a, b)
    union = area(a) + area(b) - inter
    return Overlap(
        intersection_area=inter,
        union_area=union,
        iou=inter / union if union > 0 else 0.0,
    )


def iou(a: Box, b: Box) -> float:
    """Intersection over union, in [0, 1]; 0 when the union is degenerate."""
    return overlap(a, b).iou


def minimal_bounding_rect(boxes: Sequence[Box] | Iterable[Box]) -> Box:
    """Smallest box containing every input box.

    Raises ValueError("no member boxes") on empty input.
    """
    boxes = list(boxes)
    if not boxes:
        raise ValueError("no member boxes")
    return Box(
        x_min=min(b.x_min for b in boxes),
        y_min=min(b.y_min for b in boxes),
        x_max=max(b.x_max for b in boxes),
        y_max=max(b.y_max for b in boxes),
    )
