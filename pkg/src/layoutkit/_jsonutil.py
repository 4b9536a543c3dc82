"""Canonical JSON serialization shared by file writers and reports.

Output is deterministic: keys keep insertion order, floats are rounded
to at most 6 fractional digits, and integral values are emitted as JSON
integers. Parsers accept integers wherever a number is expected.
"""

from __future__ import annotations

import json
from typing import Any


def jnum(value: float) -> int | float:
    """Quantize a number for serialization: 6 fractional digits max."""
    quantized = round(float(value), 6)
    if quantized.is_integer():
        return int(quantized)
    return quantized


def _quantize(obj: Any) -> Any:
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return jnum(obj)
    if isinstance(obj, dict):
        return {key: _quantize(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_quantize(item) for item in obj]
    return obj


def dumps_canonical(obj: Any, *, indent: int | None = 2) -> bytes:
    """Serialize to deterministic UTF-8 JSON bytes with a trailing newline."""
    text = json.dumps(_quantize(obj), indent=indent, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def dumps_jsonl_record(obj: Any) -> bytes:
    """Serialize one line-delimited record (no indentation)."""
    text = json.dumps(_quantize(obj), separators=(", ", ": "), ensure_ascii=False)
    return (text + "\n").encode("utf-8")
