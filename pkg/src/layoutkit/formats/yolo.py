"""YOLO label text format: one line per region.

Lines read ``class_id x_center y_center width height`` with coordinates
normalized to [0, 1] by the image dimensions and written with 6 decimal
places. Parsing inverts exporting up to that quantization; class ids are
preserved exactly.
"""

from __future__ import annotations

from ..errors import FormatError
from ..model import Box, Page, Region, Source, class_index, scheme_classes

_SCHEMES = ("coarse", "mono")


def export_yolo(page: Page, scheme: str) -> str:
    """Render a page's regions as YOLO label lines.

    A page without regions yields the empty string. Region boxes must
    lie within the page bounds.
    """
    if scheme not in _SCHEMES:
        raise ValueError(f"unsupported YOLO scheme {scheme!r}; expected {_SCHEMES}")
    width = float(page.image_width_px)
    height = float(page.image_height_px)
    lines = []
    for region in page.regions:
        box = region.box
        if box.x_max > width or box.y_max > height:
            raise FormatError(
                f"region {region.id!r} box exceeds page bounds "
                f"({width:g} x {height:g})"
            )
        if scheme == "mono":
            cid = 0
        else:
            try:
                cid = class_index("coarse", region.coarse_class)
            except ValueError as exc:
                raise FormatError(f"region {region.id!r}: {exc}") from None
        values = (
            (box.x_min + box.x_max) / 2 / width,
            (box.y_min + box.y_max) / 2 / height,
            (box.x_max - box.x_min) / width,
            (box.y_max - box.y_min) / height,
        )
        for value in values:
            if not 0.0 <= value <= 1.0:
                raise FormatError(
                    f"region {region.id!r}: normalized value {value} outside [0, 1]"
                )
        lines.append(
            f"{cid} " + " ".join(f"{value:.6f}" for value in values)
        )
    return "".join(line + "\n" for line in lines)


def parse_yolo(
    text: str,
    *,
    image_width_px: int,
    image_height_px: int,
    scheme: str,
    id_prefix: str = "yolo",
) -> list[Region]:
    """Parse YOLO label lines back into regions.

    Returned regions have source ``manual`` (label files carry no
    confidence), no fine class, and ids ``{id_prefix}_0``, ... in line
    order. Denormalized coordinates are clamped to the page bounds to
    absorb the 6-decimal quantization.
    """
    if scheme not in _SCHEMES:
        raise ValueError(f"unsupported YOLO scheme {scheme!r}; expected {_SCHEMES}")
    classes = scheme_classes(scheme)
    width = float(image_width_px)
    height = float(image_height_px)
    regions = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 5:
            raise FormatError(f"line {line_no}: expected 5 fields, got {len(fields)}")
        try:
            cid = int(fields[0])
        except ValueError:
            raise FormatError(f"line {line_no}: class id {fields[0]!r} is not an integer") from None
        if not 0 <= cid < len(classes):
            raise FormatError(
                f"line {line_no}: class id {cid} invalid under scheme {scheme!r}"
            )
        try:
            xc, yc, w, h = (float(f) for f in fields[1:])
        except ValueError:
            raise FormatError(f"line {line_no}: malformed coordinates") from None
        for value in (xc, yc, w, h):
            if not 0.0 <= value <= 1.0:
                raise FormatError(
                    f"line {line_no}: normalized value {value} outside [0, 1]"
                )
        x_min = max(0.0, (xc - w / 2) * width)
        y_min = max(0.0, (yc - h / 2) * height)
        x_max = min(width, (xc + w / 2) * width)
        y_max = min(height, (yc + h / 2) * height)
        regions.append(
            Region(
                id=f"{id_prefix}_{len(regions)}",
                # clamping can invert a degenerate edge by a rounding hair
                box=Box(x_min, y_min, max(x_min, x_max), max(y_min, y_max)),
                coarse_class=classes[cid],  # type: ignore[arg-type]
                source=Source.MANUAL,
            )
        )
    return regions
