"""Domain model for page layout annotations.

A page of a digitized document is annotated with axis-aligned rectangular
regions drawn from a closed two-level taxonomy: 18 fine-grained content
classes grouped into 8 coarse-grained classes, with an additional mapping
onto the SegmOnto controlled vocabulary for interchange. Pages also carry
OCR words in reading order; ground-truth regions record which words they
contain.

All types are immutable after construction and safe to share between
threads. Operations in this module are pure functions.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union


class FineClass(str, Enum):
    """Fine-grained region content classes (closed set of 18)."""

    COMMENTARY = "commentary"
    CRITICAL_APPARATUS = "critical_apparatus"
    FOOTNOTES = "footnotes"
    PAGE_NUMBER = "page_number"
    TEXT_NUMBER = "text_number"
    BIBLIOGRAPHY = "bibliography"
    HANDWRITTEN_MARGINALIA = "handwritten_marginalia"
    INDEX = "index"
    OTHERS = "others"
    PRINTED_MARGINALIA = "printed_marginalia"
    TABLE_OF_CONTENTS = "table_of_contents"
    TITLE = "title"
    TRANSLATION = "translation"
    APPENDIX = "appendix"
    INTRODUCTION = "introduction"
    PREFACE = "preface"
    PRIMARY_TEXT = "primary_text"
    RUNNING_HEADER = "running_header"


class CoarseClass(str, Enum):
    """Coarse-grained region classes (closed set of 8).

    Every fine class maps to exactly one coarse class; see
    :func:`coarse_of`.
    """

    COMMENTARY = "commentary"
    CRITICAL_APPARATUS = "critical_apparatus"
    FOOTNOTES = "footnotes"
    NUMBER = "number"
    OTHERS = "others"
    PARATEXT = "paratext"
    PRIMARY_TEXT = "primary_text"
    RUNNING_HEADER = "running_header"


class MonoClass(str, Enum):
    """Single-class scheme used when all regions are labelled identically."""

    REGION = "region"


RegionClass = Union[CoarseClass, MonoClass]


class Source(str, Enum):
    """Provenance of a region."""

    MANUAL = "manual"
    REBUILT = "rebuilt"
    DETECTED = "detected"
    FUSED = "fused"


class CorpusOrigin(str, Enum):
    INTERNAL = "internal"
    EXTERNAL = "external"


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


_FINE_TO_COARSE: dict[FineClass, CoarseClass] = {
    FineClass.COMMENTARY: CoarseClass.COMMENTARY,
    FineClass.CRITICAL_APPARATUS: CoarseClass.CRITICAL_APPARATUS,
    FineClass.FOOTNOTES: CoarseClass.FOOTNOTES,
    FineClass.PAGE_NUMBER: CoarseClass.NUMBER,
    FineClass.TEXT_NUMBER: CoarseClass.NUMBER,
    FineClass.BIBLIOGRAPHY: CoarseClass.OTHERS,
    FineClass.HANDWRITTEN_MARGINALIA: CoarseClass.OTHERS,
    FineClass.INDEX: CoarseClass.OTHERS,
    FineClass.OTHERS: CoarseClass.OTHERS,
    FineClass.PRINTED_MARGINALIA: CoarseClass.OTHERS,
    FineClass.TABLE_OF_CONTENTS: CoarseClass.OTHERS,
    FineClass.TITLE: CoarseClass.OTHERS,
    FineClass.TRANSLATION: CoarseClass.OTHERS,
    FineClass.APPENDIX: CoarseClass.PARATEXT,
    FineClass.INTRODUCTION: CoarseClass.PARATEXT,
    FineClass.PREFACE: CoarseClass.PARATEXT,
    FineClass.PRIMARY_TEXT: CoarseClass.PRIMARY_TEXT,
    FineClass.RUNNING_HEADER: CoarseClass.RUNNING_HEADER,
}

# Serialized SegmOnto forms. Commentary is always a MainZone even though a
# marginal reading exists; consumers using the MarginTextZone convention
# are unsupported.
_FINE_TO_SEGMONTO: dict[FineClass, str] = {
    FineClass.COMMENTARY: "MainZone:commentary",
    FineClass.CRITICAL_APPARATUS: "MarginTextZone:criticalApparatus",
    FineClass.FOOTNOTES: "MarginTextZone:footnotes",
    FineClass.PAGE_NUMBER: "NumberingZone:pageNumber",
    FineClass.TEXT_NUMBER: "NumberingZone:textNumber",
    FineClass.BIBLIOGRAPHY: "MainZone:bibliography",
    FineClass.HANDWRITTEN_MARGINALIA: "MarginTextZone:handwrittenNote",
    FineClass.INDEX: "MainZone:index",
    FineClass.OTHERS: "CustomZone",
    FineClass.PRINTED_MARGINALIA: "MarginTextZone:printedNote",
    FineClass.TABLE_OF_CONTENTS: "MainZone:ToC",
    FineClass.TITLE: "TitlePageZone",
    FineClass.TRANSLATION: "MainZone:translation",
    FineClass.APPENDIX: "MainZone:appendix",
    FineClass.INTRODUCTION: "MainZone:introduction",
    FineClass.PREFACE: "MainZone:preface",
    FineClass.PRIMARY_TEXT: "MainZone:primaryText",
    FineClass.RUNNING_HEADER: "RunningTitleZone",
}


@dataclass(frozen=True)
class SegmOntoLabel:
    """A SegmOnto zone label, serialized as ``ZoneType`` or ``ZoneType:subtype``."""

    zone_type: str
    subtype: Optional[str] = None

    def serialize(self) -> str:
        if self.subtype is None:
            return self.zone_type
        return f"{self.zone_type}:{self.subtype}"

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.serialize()

    @classmethod
    def parse(cls, text: str) -> "SegmOntoLabel":
        """Parse a serialized label. Raises ValueError on empty parts."""
        zone, sep, sub = text.partition(":")
        if not zone or (sep and not sub):
            raise ValueError(f"invalid SegmOnto label: {text!r}")
        return cls(zone_type=zone, subtype=sub if sep else None)


def coarse_of(fine: FineClass) -> CoarseClass:
    """Return the coarse class a fine class belongs to. Total function."""
    return _FINE_TO_COARSE[fine]


def segmonto_of(fine: FineClass) -> SegmOntoLabel:
    """Return the SegmOnto label of a fine class. Total function."""
    return SegmOntoLabel.parse(_FINE_TO_SEGMONTO[fine])


def _normalize_class_string(text: str) -> str:
    # Accept prose spellings ("critical apparatus", "Page Number") as well
    # as the canonical snake_case form, case-insensitively.
    return re.sub(r"[\s\-]+", "_", text.strip().lower())


def parse_fine_class(text: str) -> FineClass:
    """Parse a fine-class string; prose spellings and any case accepted."""
    try:
        return FineClass(_normalize_class_string(text))
    except ValueError:
        valid = ", ".join(c.value for c in FineClass)
        raise ValueError(
            f"unknown fine class {text!r}; valid classes: {valid}"
        ) from None


def parse_coarse_class(text: str) -> CoarseClass:
    """Parse a coarse-class string; prose spellings and any case accepted."""
    try:
        return CoarseClass(_normalize_class_string(text))
    except ValueError:
        valid = ", ".join(c.value for c in CoarseClass)
        raise ValueError(
            f"unknown coarse class {text!r}; valid classes: {valid}"
        ) from None


def parse_region_class(text: str) -> RegionClass:
    """Parse a coarse-class or mono-class string."""
    normalized = _normalize_class_string(text)
    if normalized == MonoClass.REGION.value:
        return MonoClass.REGION
    return parse_coarse_class(text)


SCHEMES = ("fine", "coarse", "mono")


def scheme_classes(scheme: str) -> tuple[RegionClass, ...] | tuple[FineClass, ...]:
    """The ordered class tuple of a labeling scheme."""
    if scheme == "fine":
        return tuple(FineClass)
    if scheme == "coarse":
        return tuple(CoarseClass)
    if scheme == "mono":
        return (MonoClass.REGION,)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def class_index(scheme: str, cls: Union[FineClass, RegionClass]) -> int:
    """Dense 0-based index of a class within a scheme's enumeration order.

    Raises ValueError when the class does not belong to the scheme.
    """
    classes = scheme_classes(scheme)
    try:
        return classes.index(cls)  # type: ignore[arg-type]
    except ValueError:
        raise ValueError(
            f"class {getattr(cls, 'value', cls)!r} does not belong to scheme {scheme!r}"
        ) from None


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in page-pixel coordinates.

    Origin is the top-left corner of the page image and y grows downward.
    Coordinates are continuous: width is ``x_max - x_min`` with no +1
    pixel correction. Degenerate (zero-area) boxes are legal values.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        for name in ("x_min", "y_min", "x_max", "y_max"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"box coordinate {name} is not finite")
            if value < 0:
                raise ValueError(f"box coordinate {name} is negative: {value}")
            object.__setattr__(self, name, value)
        if self.x_min > self.x_max:
            raise ValueError(f"box has x_min {self.x_min} > x_max {self.x_max}")
        if self.y_min > self.y_max:
            raise ValueError(f"box has y_min {self.y_min} > y_max {self.y_max}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min


@dataclass(frozen=True)
class Word:
    """One OCR token: geometry, text and reading-order position."""

    id: str
    box: Box
    text: str
    order_index: int

    def __post_init__(self) -> None:
        if self.order_index < 0:
            raise ValueError(f"word {self.id!r} has negative order_index")


@dataclass(frozen=True)
class Region:
    """A labeled page zone.

    ``word_ids`` lists member words in reading order and may be empty.
    ``score`` is required for detected and fused regions and must be
    absent for manual and rebuilt ones. Consistency between
    ``fine_class`` and ``coarse_class`` is a corpus-level contract
    checked by the validator, not enforced here, so that inconsistent
    hand-authored files can be loaded and reported on.
    """

    id: str
    box: Box
    coarse_class: RegionClass
    fine_class: Optional[FineClass] = None
    word_ids: tuple[str, ...] = ()
    source: Source = Source.MANUAL
    score: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "word_ids", tuple(self.word_ids))
        scored = self.source in (Source.DETECTED, Source.FUSED)
        if scored and self.score is None:
            raise ValueError(
                f"region {self.id!r} with source {self.source.value} requires a score"
            )
        if not scored and self.score is not None:
            raise ValueError(
                f"region {self.id!r} with source {self.source.value} must not carry a score"
            )
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"region {self.id!r} score {self.score} outside [0, 1]")


def region_from_fine(
    id: str,
    box: Box,
    fine_class: FineClass,
    *,
    word_ids: Sequence[str] = (),
    source: Source = Source.MANUAL,
    score: Optional[float] = None,
) -> Region:
    """Build a region from a fine class, deriving the coarse class."""
    return Region(
        id=id,
        box=box,
        coarse_class=coarse_of(fine_class),
        fine_class=fine_class,
        word_ids=tuple(word_ids),
        source=source,
        score=score,
    )


def collapse_mono(region: Region) -> Region:
    """Replace a region's class information with the single mono class.

    Geometry, word membership, source and score are unchanged.
    Idempotent.
    """
    return replace(region, coarse_class=MonoClass.REGION, fine_class=None)


@dataclass(frozen=True)
class Page:
    """One annotated page: image metadata, ordered words, regions.

    Words are stored sorted by ``order_index``, which must be unique and
    contiguous from 0. Box bounds, id uniqueness and word membership are
    corpus-level contracts checked by the validator.
    """

    id: str
    image_path: str
    image_width_px: int
    image_height_px: int
    words: tuple[Word, ...] = ()
    regions: tuple[Region, ...] = ()

    def __post_init__(self) -> None:
        if self.image_width_px <= 0 or self.image_height_px <= 0:
            raise ValueError(f"page {self.id!r} has non-positive image dimensions")
        words = tuple(sorted(self.words, key=lambda w: w.order_index))
        if [w.order_index for w in words] != list(range(len(words))):
            raise ValueError(
                f"page {self.id!r}: word order_index values must be unique and "
                "contiguous from 0"
            )
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "regions", tuple(self.regions))

    def words_by_id(self) -> dict[str, Word]:
        return {w.id: w for w in self.words}


@dataclass(frozen=True)
class Document:
    """A commentary volume: metadata plus its annotated pages."""

    id: str
    title: str
    year: int
    languages: tuple[str, ...]
    public_domain: bool
    corpus: CorpusOrigin
    pages: tuple[Page, ...] = ()
    split: Optional[Split] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "languages", tuple(self.languages))
        object.__setattr__(self, "pages", tuple(self.pages))
        ids = [p.id for p in self.pages]
        if len(set(ids)) != len(ids):
            raise ValueError(f"document {self.id!r} has duplicate page ids")


@dataclass(frozen=True)
class Corpus:
    """A set of documents plus an optional page-level split assignment.

    ``splits`` maps split names ("train", "test") to tuples of page ids.
    It is optional because some corpora are split at document level via
    ``Document.split`` instead.
    """

    documents: tuple[Document, ...]
    splits: Optional[Mapping[str, tuple[str, ...]]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "documents", tuple(self.documents))
        if self.splits is not None:
            frozen = {
                str(name): tuple(page_ids) for name, page_ids in self.splits.items()
            }
            object.__setattr__(self, "splits", frozen)

    def pages(self) -> Iterable[Page]:
        for document in self.documents:
            yield from document.pages
