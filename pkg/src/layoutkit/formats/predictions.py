"""Token-prediction and detection files.

Both are line-delimited JSON with one page per line, so corpora of
hundreds of pages can stream. A first line that carries no ``page_id``
is a header record; detection files require one declaring the class
scheme their integer class ids use, token files may carry one for
provenance. Writers sort records by page id, making re-runs
byte-identical.
"""

from __future__ import annotations

import json
from typing import Iterator, Mapping, Optional, Sequence

from .._jsonutil import dumps_jsonl_record
from ..errors import FormatError
from ..model import (
    Page,
    Region,
    Source,
    class_index,
    parse_coarse_class,
    scheme_classes,
)
from ..regions import WordLabel
from .canonical import SCHEMA_VERSION, _box

_SCHEMES = ("coarse", "mono")


def _records(data: bytes) -> Iterator[tuple[int, dict]]:
    for line_no, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {line_no}: invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise FormatError(f"line {line_no}: expected an object")
        yield line_no, obj


def _split_header(data: bytes) -> tuple[Optional[dict], list[tuple[int, dict]]]:
    records = list(_records(data))
    if records and "page_id" not in records[0][1]:
        return records[0][1], records[1:]
    return None, records


def parse_token_predictions(
    data: bytes, pages: Sequence[Page]
) -> dict[str, dict[str, Optional[str]]]:
    """Parse word labels, returning a complete map for every given page.

    Record shape: {"page_id": ..., "labels": [{"word_id", "label",
    "confidence"?}, ...]}. Words the file does not label map to None, as
    do the words of pages absent from the file; a label may be a coarse
    class string, "none" or null. Each word may be labeled at most once.
    """
    by_page = {page.id: page for page in pages}
    result: dict[str, dict[str, Optional[str]]] = {
        page.id: {word.id: None for word in page.words} for page in pages
    }
    labeled: set[tuple[str, str]] = set()
    _, records = _split_header(data)
    for line_no, obj in records:
        page_id = obj.get("page_id")
        if not isinstance(page_id, str):
            raise FormatError(f"line {line_no}: page_id must be a string")
        page = by_page.get(page_id)
        if page is None:
            raise FormatError(f"line {line_no}: unknown page id {page_id!r}")
        labels = obj.get("labels")
        if not isinstance(labels, list):
            raise FormatError(f"line {line_no}: labels must be a list")
        words = result[page_id]
        for i, entry in enumerate(labels):
            where = f"line {line_no} labels[{i}]"
            if not isinstance(entry, dict):
                raise FormatError(f"{where}: expected an object")
            word_id = entry.get("word_id")
            if not isinstance(word_id, str):
                raise FormatError(f"{where}: word_id must be a string")
            if word_id not in words:
                raise FormatError(
                    f"{where}: word id {word_id!r} not on page {page_id!r}"
                )
            if (page_id, word_id) in labeled:
                raise FormatError(
                    f"{where}: word {word_id!r} labeled more than once"
                )
            labeled.add((page_id, word_id))
            label = entry.get("label")
            if label in (None, "none"):
                parsed = None
            elif isinstance(label, str):
                try:
                    parsed = parse_coarse_class(label).value
                except ValueError as exc:
                    raise FormatError(f"{where}: {exc}") from None
            else:
                raise FormatError(f"{where}: label must be a string or null")
            confidence = entry.get("confidence")
            if confidence is not None:
                if isinstance(confidence, bool) or not isinstance(
                    confidence, (int, float)
                ):
                    raise FormatError(f"{where}: confidence must be a number")
                if not 0.0 <= float(confidence) <= 1.0:
                    raise FormatError(
                        f"{where}: confidence {confidence} outside [0, 1]"
                    )
            words[word_id] = parsed
    return result


def parse_detections(
    data: bytes, pages: Sequence[Page]
) -> dict[str, list[Region]]:
    """Parse detected regions, sorted by descending score per page.

    The file must start with a header record declaring the class scheme,
    e.g. {"schema_version": 1, "kind": "detections", "scheme": "coarse"}.
    Detections read {"box": [x_min, y_min, x_max, y_max], "class_id": n,
    "score": s}; scores must lie in [0, 1].
    """
    header, records = _split_header(data)
    if header is None or "scheme" not in header:
        raise FormatError("missing header record declaring the class scheme")
    scheme = header["scheme"]
    if scheme not in _SCHEMES:
        raise FormatError(f"header scheme {scheme!r} invalid; expected {_SCHEMES}")
    classes = scheme_classes(scheme)
    by_page = {page.id: page for page in pages}
    result: dict[str, list[Region]] = {page.id: [] for page in pages}
    seen_pages: set[str] = set()
    for line_no, obj in records:
        page_id = obj.get("page_id")
        if not isinstance(page_id, str):
            raise FormatError(f"line {line_no}: page_id must be a string")
        if page_id not in by_page:
            raise FormatError(f"line {line_no}: unknown page id {page_id!r}")
        if page_id in seen_pages:
            raise FormatError(f"line {line_no}: duplicate record for page {page_id!r}")
        seen_pages.add(page_id)
        detections = obj.get("detections")
        if not isinstance(detections, list):
            raise FormatError(f"line {line_no}: detections must be a list")
        regions = []
        for i, entry in enumerate(detections):
            where = f"line {line_no} detections[{i}]"
            if not isinstance(entry, dict):
                raise FormatError(f"{where}: expected an object")
            box = _box(entry.get("box"), f"{where}.box")
            class_id = entry.get("class_id")
            if isinstance(class_id, bool) or not isinstance(class_id, int):
                raise FormatError(f"{where}: class_id must be an integer")
            if not 0 <= class_id < len(classes):
                raise FormatError(
                    f"{where}: class id {class_id} invalid under scheme {scheme!r}"
                )
            score = entry.get("score")
            if isinstance(score, bool) or not isinstance(score, (int, float)):
                raise FormatError(f"{where}: score must be a number")
            if not 0.0 <= float(score) <= 1.0:
                raise FormatError(f"{where}: score {score} outside [0, 1]")
            regions.append(
                Region(
                    id=f"det_{i}",
                    box=box,
                    coarse_class=classes[class_id],  # type: ignore[arg-type]
                    source=Source.DETECTED,
                    score=float(score),
                )
            )
        regions.sort(key=lambda r: -(r.score or 0.0))
        result[page_id] = regions
    return result


def write_token_predictions(
    labels_by_page: Mapping[str, Sequence[WordLabel]],
    *,
    config: Optional[Mapping[str, object]] = None,
) -> bytes:
    """Serialize word labels, one page per line, pages sorted by id."""
    header: dict[str, object] = {"schema_version": SCHEMA_VERSION, "kind": "token_labels"}
    header.update(config or {})
    chunks = [dumps_jsonl_record(header)]
    for page_id in sorted(labels_by_page):
        chunks.append(
            dumps_jsonl_record(
                {
                    "page_id": page_id,
                    "labels": [
                        {"word_id": wl.word_id, "label": wl.label}
                        for wl in labels_by_page[page_id]
                    ],
                }
            )
        )
    return b"".join(chunks)


def write_detections(
    regions_by_page: Mapping[str, Sequence[Region]],
    scheme: str,
    *,
    config: Optional[Mapping[str, object]] = None,
) -> bytes:
    """Serialize regions as a detection file under the given scheme.

    Regions without a score (rebuilt ones) are written with score 1.0,
    matching how the evaluation treats them.
    """
    if scheme not in _SCHEMES:
        raise ValueError(f"unsupported scheme {scheme!r}; expected {_SCHEMES}")
    header: dict[str, object] = {
        "schema_version": SCHEMA_VERSION,
        "kind": "detections",
        "scheme": scheme,
    }
    header.update(config or {})
    chunks = [dumps_jsonl_record(header)]
    for page_id in sorted(regions_by_page):
        detections = []
        for region in regions_by_page[page_id]:
            try:
                class_id = class_index(scheme, region.coarse_class)
            except ValueError as exc:
                raise FormatError(f"region {region.id!r}: {exc}") from None
            detections.append(
                {
                    "box": [
                        region.box.x_min,
                        region.box.y_min,
                        region.box.x_max,
                        region.box.y_max,
                    ],
                    "class_id": class_id,
                    "score": region.score if region.score is not None else 1.0,
                }
            )
        chunks.append(
            dumps_jsonl_record({"page_id": page_id, "detections": detections})
        )
    return b"".join(chunks)
