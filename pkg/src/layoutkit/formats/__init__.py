"""File formats: VIA projects, canonical pages, YOLO, COCO, predictions."""

from ..errors import FormatError
from .canonical import (
    MANIFEST_NAME,
    PAGE_DIR,
    SCHEMA_VERSION,
    parse_word_lists,
    read_corpus,
    read_page,
    read_page_file,
    write_corpus,
    write_page,
)
from .coco import export_coco
from .predictions import (
    parse_detections,
    parse_token_predictions,
    write_detections,
    write_token_predictions,
)
from .via import DEFAULT_CLASS_ATTRIBUTE, parse_via
from .yolo import export_yolo, parse_yolo

__all__ = [
    "DEFAULT_CLASS_ATTRIBUTE",
    "FormatError",
    "MANIFEST_NAME",
    "PAGE_DIR",
    "SCHEMA_VERSION",
    "export_coco",
    "export_yolo",
    "parse_detections",
    "parse_token_predictions",
    "parse_via",
    "parse_word_lists",
    "parse_yolo",
    "read_corpus",
    "read_page",
    "read_page_file",
    "write_corpus",
    "write_detections",
    "write_page",
    "write_token_predictions",
]
