"""Region procedures: word assignment, labeling, fitting, rebuilding, fusion.

A word belongs to the region that maximizes the fraction of the word box
covered by the region box, provided that fraction reaches the overlap
threshold (0.5 by default). Ties go to the smaller region, then to the
lexicographically smaller region id. Words with degenerate (zero-area)
boxes are never assigned.

Reading order is the order_index assigned upstream by OCR; nothing here
re-sorts words geometrically, which would silently change results on
two-column pages.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Optional, Sequence

from .geometry import area, intersection_area, minimal_bounding_rect
from .model import Box, CoarseClass, Page, Region, Source, Word

DEFAULT_OVERLAP_THRESHOLD = 0.5

BIO_BEGIN = "BEGIN-"
BIO_INSIDE = "INSIDE-"


class Labeling(str, Enum):
    """Word labeling schemes.

    flat labels every word in a region with the region's class; bio labels
    the first word BEGIN-class and the following words INSIDE-class.
    """

    FLAT = "flat"
    BIO = "bio"


@dataclass(frozen=True)
class WordLabel:
    """A (word id, label) pair; label is None for unassigned words."""

    word_id: str
    label: Optional[str]


def strip_bio(label: Optional[str]) -> Optional[str]:
    """Remove a BEGIN-/INSIDE- prefix, turning a bio label into a flat one."""
    if label is None:
        return None
    for prefix in (BIO_BEGIN, BIO_INSIDE):
        if label.startswith(prefix):
            return label[len(prefix):]
    return label


def _assign(
    words: Sequence[Word],
    candidates: Sequence[tuple[str, Box, float]],
    threshold: float,
) -> dict[str, Optional[str]]:
    # candidates: (id, box, area). Each word goes to at most one candidate.
    assignment: dict[str, Optional[str]] = {}
    for word in words:
        word_area = area(word.box)
        best: Optional[tuple[float, float, str]] = None
        if word_area > 0:
            for cand_id, cand_box, cand_area in candidates:
                ratio = intersection_area(word.box, cand_box) / word_area
                if ratio < threshold:
                    continue
                key = (-ratio, cand_area, cand_id)
                if best is None or key < best:
                    best = key
        assignment[word.id] = best[2] if best is not None else None
    return assignment


def assign_words(
    page: Page, *, overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD
) -> dict[str, Optional[str]]:
    """Map each word id to the region id containing it, or None.

    A region "contains" a word when intersection area over word area is
    at least ``overlap_threshold``; among qualifying regions the one with
    the largest ratio wins, ties broken by smaller region area, then by
    region id.
    """
    candidates = [(r.id, r.box, area(r.box)) for r in page.regions]
    return _assign(page.words, candidates, overlap_threshold)


def label_words(
    page: Page,
    scheme: Labeling = Labeling.FLAT,
    *,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> tuple[WordLabel, ...]:
    """Label every word of the page from the region that contains it.

    Returns one WordLabel per word, in reading order. Unassigned words
    get label None under both schemes.
    """
    assignment = assign_words(page, overlap_threshold=overlap_threshold)
    class_by_region = {r.id: r.coarse_class.value for r in page.regions}
    seen_regions: set[str] = set()
    labels = []
    for word in page.words:
        region_id = assignment[word.id]
        if region_id is None:
            labels.append(WordLabel(word.id, None))
            continue
        cls = class_by_region[region_id]
        if scheme is Labeling.FLAT:
            labels.append(WordLabel(word.id, cls))
        else:
            prefix = BIO_INSIDE if region_id in seen_regions else BIO_BEGIN
            seen_regions.add(region_id)
            labels.append(WordLabel(word.id, prefix + cls))
    return tuple(labels)


def fit_region(region: Region, page: Page) -> Region:
    """Shrink or grow a region box to the minimal bounding rectangle of its
    member words (``word_ids``). Class, ids and provenance are unchanged.

    A region with no member words is returned unchanged; page-level
    diagnostics for that case come from :func:`fit_page`. Raises
    ValueError when a word id does not exist on the page.
    """
    if not region.word_ids:
        return region
    by_id = page.words_by_id()
    try:
        boxes = [by_id[word_id].box for word_id in region.word_ids]
    except KeyError as exc:
        raise ValueError(
            f"region {region.id!r} references unknown word id {exc.args[0]!r}"
        ) from None
    return replace(region, box=minimal_bounding_rect(boxes))


@dataclass(frozen=True)
class FitResult:
    """Output of :func:`fit_page`: the refitted page plus diagnostics."""

    page: Page
    empty_region_ids: tuple[str, ...]


def fit_page(
    page: Page,
    *,
    reassign: bool = True,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> FitResult:
    """Fit every region of a page to its contained words.

    With ``reassign`` (the default) word membership is recomputed
    geometrically and stored on the regions before fitting, which is the
    annotation resizing step applied to manually drawn regions. Without
    it, the stored word_ids are trusted. Regions that end up with no
    words are left unchanged and flagged in ``empty_region_ids``.
    """
    regions = page.regions
    if reassign:
        assignment = assign_words(page, overlap_threshold=overlap_threshold)
        members: dict[str, list[str]] = {r.id: [] for r in regions}
        for word in page.words:
            region_id = assignment[word.id]
            if region_id is not None:
                members[region_id].append(word.id)
        regions = tuple(
            replace(r, word_ids=tuple(members[r.id])) for r in regions
        )
    fitted = []
    empty = []
    for region in regions:
        if not region.word_ids:
            empty.append(region.id)
            fitted.append(region)
        else:
            fitted.append(fit_region(region, page))
    return FitResult(
        page=replace(page, regions=tuple(fitted)),
        empty_region_ids=tuple(empty),
    )


def rebuild_regions(
    words: Sequence[Word],
    labels: Mapping[str, Optional[str]],
    *,
    id_prefix: str = "rebuilt",
) -> tuple[Region, ...]:
    """Group consecutive identically labeled words into regions.

    ``labels`` must cover every word with a flat coarse-class label or
    None; maximal runs of the same non-None label become one region each,
    with the minimal bounding rectangle of the run as box. Runs of None
    produce no region but still break runs around them.
    """
    missing = [w.id for w in words if w.id not in labels]
    if missing:
        raise ValueError(f"labels missing for word ids: {missing[:5]}")
    regions: list[Region] = []
    run_words: list[Word] = []
    run_label: Optional[str] = None

    def close_run() -> None:
        if run_label is None or not run_words:
            return
        regions.append(
            Region(
                id=f"{id_prefix}_{len(regions)}",
                box=minimal_bounding_rect([w.box for w in run_words]),
                coarse_class=CoarseClass(run_label),
                word_ids=tuple(w.id for w in run_words),
                source=Source.REBUILT,
            )
        )

    for word in sorted(words, key=lambda w: w.order_index):
        label = labels[word.id]
        if label is not None and (
            label.startswith(BIO_BEGIN) or label.startswith(BIO_INSIDE)
        ):
            raise ValueError(
                f"rebuild requires flat labels, got bio label {label!r}"
            )
        if label != run_label:
            close_run()
            run_words = []
            run_label = label
        run_words.append(word)
    close_run()
    return tuple(regions)


@dataclass(frozen=True)
class FusionResult:
    """Fused regions plus the ids that fell back to the default class."""

    regions: tuple[Region, ...]
    fallback_ids: tuple[str, ...]


def fuse(
    detections: Sequence[Region],
    words: Sequence[Word],
    token_labels: Mapping[str, Optional[str]],
    *,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    vote_fraction: bool = False,
) -> FusionResult:
    """Label detected regions with the majority class of their words.

    Words are assigned to detections with the same overlap rule as
    :func:`assign_words`, applied against the detection boxes. The fused
    class is the most frequent non-None token label among a detection's
    words; ties go to the class of the earliest tied word in reading
    order. A detection with no labeled words is classed ``others`` and
    flagged. The fused score is the detection score, or, with
    ``vote_fraction``, the majority count over the labeled word count.
    """
    candidates = [(d.id, d.box, area(d.box)) for d in detections]
    assignment = _assign(words, candidates, overlap_threshold)
    words_by_detection: dict[str, list[Word]] = {d.id: [] for d in detections}
    for word in sorted(words, key=lambda w: w.order_index):
        det_id = assignment[word.id]
        if det_id is not None:
            words_by_detection[det_id].append(word)

    fused: list[Region] = []
    fallback: list[str] = []
    for detection in detections:
        labeled = [
            (w, token_labels.get(w.id))
            for w in words_by_detection[detection.id]
            if token_labels.get(w.id) is not None
        ]
        if not labeled:
            cls: CoarseClass = CoarseClass.OTHERS
            fallback.append(detection.id)
            score = 0.0 if vote_fraction else float(detection.score or 0.0)
        else:
            counts = Counter(label for _, label in labeled)
            top = max(counts.values())
            tied = {label for label, n in counts.items() if n == top}
            # earliest tied word in reading order decides
            winner = next(label for w, label in labeled if label in tied)
            cls = CoarseClass(winner)
            score = (
                top / len(labeled)
                if vote_fraction
                else float(detection.score or 0.0)
            )
        fused.append(
            Region(
                id=detection.id,
                box=detection.box,
                coarse_class=cls,
                word_ids=tuple(w.id for w in words_by_detection[detection.id]),
                source=Source.FUSED,
                score=score,
            )
        )
    return FusionResult(regions=tuple(fused), fallback_ids=tuple(fallback))
