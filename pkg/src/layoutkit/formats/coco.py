"""COCO dataset export for detector training and evaluation tooling.

One file for a whole document set: images, annotations with absolute
(x, y, width, height) pixel boxes, and categories numbered from 1 in the
scheme's enumeration order.
"""

from __future__ import annotations

from typing import Sequence

from .._jsonutil import dumps_canonical
from ..errors import FormatError
from ..model import Document, MonoClass, class_index, scheme_classes

_SCHEMES = ("coarse", "mono")


def export_coco(documents: Sequence[Document], scheme: str) -> bytes:
    """Serialize documents to a single COCO dataset file."""
    if scheme not in _SCHEMES:
        raise ValueError(f"unsupported COCO scheme {scheme!r}; expected {_SCHEMES}")
    images = []
    annotations = []
    seen: set[str] = set()
    for document in documents:
        for page in document.pages:
            if page.id in seen:
                raise FormatError(f"duplicate page id across documents: {page.id!r}")
            seen.add(page.id)
            image_id = len(images) + 1
            images.append(
                {
                    "id": image_id,
                    "file_name": page.image_path,
                    "width": page.image_width_px,
                    "height": page.image_height_px,
                }
            )
            for region in page.regions:
                cls = MonoClass.REGION if scheme == "mono" else region.coarse_class
                try:
                    category_id = class_index(scheme, cls) + 1
                except ValueError as exc:
                    raise FormatError(f"region {region.id!r}: {exc}") from None
                box = region.box
                annotations.append(
                    {
                        "id": len(annotations) + 1,
                        "image_id": image_id,
                        "category_id": category_id,
                        "bbox": [box.x_min, box.y_min, box.width, box.height],
                        "area": box.width * box.height,
                        "iscrowd": 0,
                    }
                )
    categories = [
        {"id": class_index(scheme, cls) + 1, "name": cls.value}
        for cls in scheme_classes(scheme)
    ]
    return dumps_canonical(
        {"images": images, "annotations": annotations, "categories": categories}
    )
