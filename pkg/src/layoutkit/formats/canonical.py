"""Canonical page files and the corpus manifest.

This is the toolchain's own interchange format: one JSON file per page,
plus a manifest describing documents, their metadata, their page files
and optional train/test splits. Serialization is deterministic (stable
key order, numbers with at most 6 fractional digits), so re-exports are
byte-identical and golden tests are exact. The full schema is documented
in docs/formats.md and versioned through the schema_version field.

Round-trip contract: read(write(page)) == page field for field, for
pages whose coordinates are representable with 6 fractional digits
(page-pixel data in practice).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .._jsonutil import dumps_canonical
from ..errors import FormatError
from ..model import (
    Box,
    Corpus,
    CorpusOrigin,
    Document,
    FineClass,
    Page,
    Region,
    Source,
    Split,
    Word,
    parse_fine_class,
    parse_region_class,
)

SCHEMA_VERSION = 1

MANIFEST_NAME = "manifest.json"
PAGE_DIR = "pages"


def _require(obj: object, key: str, path: str) -> object:
    if not isinstance(obj, dict):
        raise FormatError(f"{path or 'document root'}: expected an object")
    if key not in obj:
        prefix = f"{path}." if path else ""
        raise FormatError(f"{prefix}{key}: missing required field")
    return obj[key]


def _string(obj: object, key: str, path: str) -> str:
    value = _require(obj, key, path)
    if not isinstance(value, str):
        raise FormatError(f"{path}.{key}: expected a string" if path else f"{key}: expected a string")
    return value


def _number(value: object, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{path}: expected a number")
    return float(value)


def _positive_int(obj: object, key: str, path: str) -> int:
    value = _require(obj, key, path)
    where = f"{path}.{key}" if path else key
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{where}: expected an integer")
    if value <= 0:
        raise FormatError(f"{where}: must be positive")
    return value


def _box(value: object, path: str) -> Box:
    if not isinstance(value, (list, tuple)) or len(value) != 4:
        raise FormatError(f"{path}: expected [x_min, y_min, x_max, y_max]")
    coords = [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]
    try:
        return Box(*coords)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _word(value: object, path: str) -> Word:
    word_id = _string(value, "id", path)
    box = _box(_require(value, "box", path), f"{path}.box")
    text = _string(value, "text", path)
    order = _require(value, "order_index", path)
    if isinstance(order, bool) or not isinstance(order, int):
        raise FormatError(f"{path}.order_index: expected an integer")
    try:
        return Word(id=word_id, box=box, text=text, order_index=order)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def _region(value: object, path: str) -> Region:
    region_id = _string(value, "id", path)
    box = _box(_require(value, "box", path), f"{path}.box")
    fine_raw = _require(value, "fine_class", path)
    fine: Optional[FineClass] = None
    if fine_raw is not None:
        if not isinstance(fine_raw, str):
            raise FormatError(f"{path}.fine_class: expected a string or null")
        try:
            fine = parse_fine_class(fine_raw)
        except ValueError as exc:
            raise FormatError(f"{path}.fine_class: {exc}") from None
    coarse_raw = _string(value, "coarse_class", path)
    try:
        coarse = parse_region_class(coarse_raw)
    except ValueError as exc:
        raise FormatError(f"{path}.coarse_class: {exc}") from None
    word_ids_raw = _require(value, "word_ids", path)
    if not isinstance(word_ids_raw, list) or not all(
        isinstance(w, str) for w in word_ids_raw
    ):
        raise FormatError(f"{path}.word_ids: expected a list of strings")
    source_raw = _string(value, "source", path)
    try:
        source = Source(source_raw)
    except ValueError:
        valid = ", ".join(s.value for s in Source)
        raise FormatError(
            f"{path}.source: unknown source {source_raw!r}; valid: {valid}"
        ) from None
    score_raw = _require(value, "score", path)
    score = None if score_raw is None else _number(score_raw, f"{path}.score")
    try:
        return Region(
            id=region_id,
            box=box,
            coarse_class=coarse,
            fine_class=fine,
            word_ids=tuple(word_ids_raw),
            source=source,
            score=score,
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def write_page(page: Page) -> bytes:
    """Serialize one page to canonical JSON bytes."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "id": page.id,
        "image_path": page.image_path,
        "image_width_px": page.image_width_px,
        "image_height_px": page.image_height_px,
        "words": [
            {
                "id": w.id,
                "box": [w.box.x_min, w.box.y_min, w.box.x_max, w.box.y_max],
                "text": w.text,
                "order_index": w.order_index,
            }
            for w in page.words
        ],
        "regions": [
            {
                "id": r.id,
                "box": [r.box.x_min, r.box.y_min, r.box.x_max, r.box.y_max],
                "fine_class": r.fine_class.value if r.fine_class else None,
                "coarse_class": r.coarse_class.value,
                "word_ids": list(r.word_ids),
                "source": r.source.value,
                "score": r.score,
            }
            for r in page.regions
        ],
    }
    return dumps_canonical(payload)


def read_page(data: bytes) -> Page:
    """Parse canonical page bytes back into a Page."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"invalid page file: {exc}") from None
    version = _require(obj, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise FormatError(f"schema_version: unsupported version {version!r}")
    words_raw = _require(obj, "words", "")
    if not isinstance(words_raw, list):
        raise FormatError("words: expected a list")
    regions_raw = _require(obj, "regions", "")
    if not isinstance(regions_raw, list):
        raise FormatError("regions: expected a list")
    words = tuple(_word(w, f"words[{i}]") for i, w in enumerate(words_raw))
    regions = tuple(_region(r, f"regions[{i}]") for i, r in enumerate(regions_raw))
    try:
        return Page(
            id=_string(obj, "id", ""),
            image_path=_string(obj, "image_path", ""),
            image_width_px=_positive_int(obj, "image_width_px", ""),
            image_height_px=_positive_int(obj, "image_height_px", ""),
            words=words,
            regions=regions,
        )
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def read_page_file(path: Path | str) -> Page:
    return read_page(Path(path).read_bytes())


def write_corpus(corpus: Corpus, out_dir: Path | str) -> list[Path]:
    """Write a corpus as manifest.json plus one page file per page.

    Page ids must be unique across the corpus because they name the page
    files. Returns the list of written paths, manifest first.
    """
    out = Path(out_dir)
    seen: set[str] = set()
    for page in corpus.pages():
        if page.id in seen:
            raise FormatError(f"duplicate page id across corpus: {page.id!r}")
        seen.add(page.id)
    (out / PAGE_DIR).mkdir(parents=True, exist_ok=True)
    manifest: dict[str, object] = {
        "schema_version": SCHEMA_VERSION,
        "documents": [
            {
                "id": doc.id,
                "title": doc.title,
                "year": doc.year,
                "languages": list(doc.languages),
                "public_domain": doc.public_domain,
                "corpus": doc.corpus.value,
                "split": doc.split.value if doc.split else None,
                "pages": [f"{PAGE_DIR}/{p.id}.json" for p in doc.pages],
            }
            for doc in corpus.documents
        ],
    }
    if corpus.splits is not None:
        manifest["splits"] = {
            name: list(page_ids) for name, page_ids in corpus.splits.items()
        }
    written = [out / MANIFEST_NAME]
    (out / MANIFEST_NAME).write_bytes(dumps_canonical(manifest))
    for doc in corpus.documents:
        for page in doc.pages:
            target = out / PAGE_DIR / f"{page.id}.json"
            target.write_bytes(write_page(page))
            written.append(target)
    return written


def _document(entry: object, base: Path, path: str) -> Document:
    split_raw = _require(entry, "split", path)
    split: Optional[Split] = None
    if split_raw is not None:
        try:
            split = Split(split_raw)
        except ValueError:
            raise FormatError(f"{path}.split: expected 'train', 'test' or null") from None
    corpus_raw = _string(entry, "corpus", path)
    try:
        origin = CorpusOrigin(corpus_raw)
    except ValueError:
        raise FormatError(f"{path}.corpus: expected 'internal' or 'external'") from None
    year = _require(entry, "year", path)
    if isinstance(year, bool) or not isinstance(year, int):
        raise FormatError(f"{path}.year: expected an integer")
    public_domain = _require(entry, "public_domain", path)
    if not isinstance(public_domain, bool):
        raise FormatError(f"{path}.public_domain: expected a boolean")
    languages = _require(entry, "languages", path)
    if not isinstance(languages, list) or not all(
        isinstance(lang, str) for lang in languages
    ):
        raise FormatError(f"{path}.languages: expected a list of strings")
    pages_raw = _require(entry, "pages", path)
    if not isinstance(pages_raw, list) or not all(
        isinstance(p, str) for p in pages_raw
    ):
        raise FormatError(f"{path}.pages: expected a list of file paths")
    pages = []
    for page_path in pages_raw:
        target = base / page_path
        if not target.is_file():
            raise FormatError(f"{path}.pages: page file not found: {page_path}")
        pages.append(read_page(target.read_bytes()))
    try:
        return Document(
            id=_string(entry, "id", path),
            title=_string(entry, "title", path),
            year=year,
            languages=tuple(languages),
            public_domain=public_domain,
            corpus=origin,
            pages=tuple(pages),
            split=split,
        )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None


def read_corpus(manifest_path: Path | str) -> Corpus:
    """Load a corpus from its manifest; page paths resolve relative to it."""
    manifest_path = Path(manifest_path)
    try:
        obj = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"invalid manifest: {exc}") from None
    version = _require(obj, "schema_version", "")
    if version != SCHEMA_VERSION:
        raise FormatError(f"schema_version: unsupported version {version!r}")
    entries = _require(obj, "documents", "")
    if not isinstance(entries, list):
        raise FormatError("documents: expected a list")
    base = manifest_path.parent
    documents = tuple(
        _document(entry, base, f"documents[{i}]") for i, entry in enumerate(entries)
    )
    splits: Optional[dict[str, tuple[str, ...]]] = None
    if "splits" in obj:
        splits_raw = obj["splits"]
        if not isinstance(splits_raw, dict):
            raise FormatError("splits: expected an object")
        splits = {}
        for name, page_ids in splits_raw.items():
            if not isinstance(page_ids, list) or not all(
                isinstance(p, str) for p in page_ids
            ):
                raise FormatError(f"splits.{name}: expected a list of page ids")
            splits[name] = tuple(page_ids)
    return Corpus(documents=documents, splits=splits)


def parse_word_lists(data: bytes) -> dict[str, tuple[Word, ...]]:
    """Parse a line-delimited word-list file, one page per line.

    Record shape: {"page_id": ..., "words": [{"id", "box", "text"}, ...]};
    order_index is the list position unless given explicitly.
    """
    result: dict[str, tuple[Word, ...]] = {}
    for line_no, line in enumerate(data.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {line_no}: invalid JSON: {exc.msg}") from None
        page_id = _string(obj, "page_id", f"line {line_no}")
        if page_id in result:
            raise FormatError(f"line {line_no}: duplicate page id {page_id!r}")
        words_raw = _require(obj, "words", f"line {line_no}")
        if not isinstance(words_raw, list):
            raise FormatError(f"line {line_no}.words: expected a list")
        words = []
        for i, entry in enumerate(words_raw):
            path = f"line {line_no}.words[{i}]"
            if isinstance(entry, dict) and "order_index" not in entry:
                entry = dict(entry, order_index=i)
            words.append(_word(entry, path))
        result[page_id] = tuple(words)
    return result
