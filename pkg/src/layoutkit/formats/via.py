"""Reader for VIA 2.x annotation project files.

VIA projects carry rectangle regions with a class attribute but no
words, so parsed pages have empty word lists; words arrive separately
through canonical page files or word-list files. The attribute holding
the region class varies between projects and is therefore a parameter.

VIA image metadata records the file size, not the pixel dimensions.
Dimensions are resolved, in order, from the ``dimensions`` argument,
from ``file_attributes`` keys (width/height, or the canonical field
names), and as a last resort from the extent of the annotated regions.
"""

from __future__ import annotations

import json
import math
from pathlib import PurePosixPath
from typing import Mapping, Optional, Sequence

from ..errors import FormatError
from ..model import Box, Page, Region, region_from_fine, parse_fine_class

DEFAULT_CLASS_ATTRIBUTE = "label"

_WIDTH_KEYS = ("width", "image_width", "image_width_px")
_HEIGHT_KEYS = ("height", "image_height", "image_height_px")


def _dimension(attrs: Mapping[str, object], keys: Sequence[str]) -> Optional[int]:
    for key in keys:
        if key in attrs:
            value = attrs[key]
            try:
                number = int(value)  # type: ignore[arg-type]
            except (TypeError, ValueError):
                raise FormatError(
                    f"file attribute {key!r} is not an integer: {value!r}"
                ) from None
            if number > 0:
                return number
    return None


def parse_via(
    data: bytes,
    *,
    class_attr: str = DEFAULT_CLASS_ATTRIBUTE,
    dimensions: Optional[Mapping[str, tuple[int, int]]] = None,
) -> list[Page]:
    """Parse a VIA 2.x project into pages, one per image entry.

    Regions get their fine class from ``class_attr`` and the derived
    coarse class; ids are r0, r1, ... in annotation order. Pages are
    returned sorted by filename. Unknown class strings, non-rectangle
    shapes and malformed structure raise FormatError.
    """
    try:
        obj = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise FormatError(f"invalid VIA project: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"invalid VIA project: JSON error at offset {exc.pos}: {exc.msg}"
        ) from None
    if not isinstance(obj, dict):
        raise FormatError("invalid VIA project: expected a JSON object")
    if "_via_img_metadata" in obj:
        metadata = obj["_via_img_metadata"]
    else:
        # bare image-metadata export, without the project wrapper
        metadata = {k: v for k, v in obj.items() if not k.startswith("_via_")}
    if not isinstance(metadata, dict):
        raise FormatError("_via_img_metadata: expected an object")

    def sort_key(key: str) -> tuple[str, str]:
        entry = metadata[key]
        filename = entry.get("filename") if isinstance(entry, dict) else None
        return (str(filename) if filename is not None else str(key), str(key))

    pages = []
    for key in sorted(metadata, key=sort_key):
        entry = metadata[key]
        if not isinstance(entry, dict) or "filename" not in entry:
            raise FormatError(f"image entry {key!r}: missing filename")
        filename = str(entry["filename"])
        regions_raw = entry.get("regions", [])
        if not isinstance(regions_raw, list):
            raise FormatError(f"image {filename!r}: regions must be a list")

        regions = []
        for idx, region in enumerate(regions_raw):
            where = f"image {filename!r} region {idx}"
            if not isinstance(region, dict):
                raise FormatError(f"{where}: expected an object")
            shape = region.get("shape_attributes")
            if not isinstance(shape, dict):
                raise FormatError(f"{where}: missing shape_attributes")
            if shape.get("name") != "rect":
                raise FormatError(
                    f"{where}: non-rectangle shape {shape.get('name')!r}"
                )
            try:
                x = float(shape["x"])
                y = float(shape["y"])
                width = float(shape["width"])
                height = float(shape["height"])
            except (KeyError, TypeError, ValueError):
                raise FormatError(f"{where}: malformed rect coordinates") from None
            attrs = region.get("region_attributes")
            if not isinstance(attrs, dict) or class_attr not in attrs:
                raise FormatError(
                    f"{where}: missing region attribute {class_attr!r}"
                )
            try:
                fine = parse_fine_class(str(attrs[class_attr]))
            except ValueError as exc:
                raise FormatError(f"{where}: {exc}") from None
            try:
                box = Box(x, y, x + width, y + height)
            except ValueError as exc:
                raise FormatError(f"{where}: {exc}") from None
            regions.append(region_from_fine(id=f"r{idx}", box=box, fine_class=fine))

        file_attrs = entry.get("file_attributes", {})
        if not isinstance(file_attrs, dict):
            file_attrs = {}
        if dimensions and filename in dimensions:
            width_px, height_px = dimensions[filename]
        else:
            width_px = _dimension(file_attrs, _WIDTH_KEYS) or 0
            height_px = _dimension(file_attrs, _HEIGHT_KEYS) or 0
        if width_px <= 0 or height_px <= 0:
            # last resort: the smallest page containing every region
            width_px = max(
                [1] + [int(math.ceil(r.box.x_max)) for r in regions]
            )
            height_px = max(
                [1] + [int(math.ceil(r.box.y_max)) for r in regions]
            )
        pages.append(
            Page(
                id=PurePosixPath(filename).stem,
                image_path=filename,
                image_width_px=width_px,
                image_height_px=height_px,
                words=(),
                regions=tuple(regions),
            )
        )
    return pages
