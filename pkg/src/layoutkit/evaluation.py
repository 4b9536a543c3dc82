"""Region-level mAP and word-level F1 evaluation.

Region scoring follows the standard detection protocol: per class,
predictions are matched greedily to ground truth in descending score
order at a fixed IoU threshold (0.5 by default, compared with >=), and
average precision is the area under the interpolated precision/recall
curve. Two interpolation modes are supported because published scores
differ systematically between them: "allpoint" integrates the exact
precision envelope, "pascal11" samples the envelope at the 11 recalls
0.0, 0.1, ..., 1.0. Reports always record which mode was used.

Classes with zero ground-truth instances are excluded from the mean
rather than scored 0, so that sparse classes absent from a split do not
drag the mAP; the report lists them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ._jsonutil import dumps_canonical
from .geometry import iou
from .model import CoarseClass, MonoClass, Page, Region, collapse_mono
from .regions import DEFAULT_OVERLAP_THRESHOLD, Labeling, label_words

INTERPOLATION_MODES = ("allpoint", "pascal11")

_NONE_LABEL = "none"


@dataclass(frozen=True)
class Match:
    """One prediction's matching outcome against the ground truth."""

    prediction_id: str
    gt_id: Optional[str]
    iou: float
    is_true_positive: bool
    score: float


@dataclass(frozen=True)
class PRPoint:
    """One point of the cumulative precision/recall curve."""

    recall: float
    precision: float


def _effective_score(region: Region) -> float:
    # Rebuilt and manual regions carry no confidence; they count as 1.0.
    return region.score if region.score is not None else 1.0


def match_detections(
    predictions: Sequence[Region],
    ground_truths: Sequence[Region],
    iou_threshold: float,
) -> list[Match]:
    """Greedy one-to-one matching of predictions against ground truth.

    Predictions are visited by descending score (ties by region id); a
    prediction is a true positive when its best-IoU unmatched ground
    truth reaches ``iou_threshold`` (>= applies), and that ground truth
    is then consumed. Caller partitions by class; this function matches
    everything it is given against everything it is given.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold {iou_threshold} outside (0, 1]")
    ordered = sorted(predictions, key=lambda r: (-_effective_score(r), r.id))
    matched: set[str] = set()
    matches: list[Match] = []
    for pred in ordered:
        best_iou = 0.0
        best_gt: Optional[Region] = None
        for gt in ground_truths:
            if gt.id in matched:
                continue
            value = iou(pred.box, gt.box)
            if value > best_iou or (
                value == best_iou and best_gt is not None and gt.id < best_gt.id
            ):
                best_iou = value
                best_gt = gt
        hit = best_gt is not None and best_iou >= iou_threshold
        if hit:
            matched.add(best_gt.id)  # type: ignore[union-attr]
        matches.append(
            Match(
                prediction_id=pred.id,
                gt_id=best_gt.id if hit and best_gt is not None else None,
                iou=best_iou,
                is_true_positive=hit,
                score=_effective_score(pred),
            )
        )
    return matches


def precision_recall_curve(
    matches: Sequence[Match], gt_count: int
) -> tuple[PRPoint, ...]:
    """Cumulative precision/recall after each prediction, in given order."""
    points = []
    tp = 0
    for rank, match in enumerate(matches, start=1):
        if match.is_true_positive:
            tp += 1
        points.append(PRPoint(recall=tp / gt_count if gt_count else 0.0,
                              precision=tp / rank))
    return tuple(points)


def average_precision(
    matches: Sequence[Match],
    gt_count: int,
    interpolation: str = "allpoint",
) -> float:
    """Average precision from matches already ordered by descending score.

    allpoint integrates the exact precision envelope over recall;
    pascal11 averages the envelope at the recalls {0.0, 0.1, ..., 1.0}.
    Returns 0.0 when there are no predictions or no ground truths.
    """
    if interpolation not in INTERPOLATION_MODES:
        raise ValueError(
            f"unknown interpolation {interpolation!r}; expected one of "
            f"{INTERPOLATION_MODES}"
        )
    if gt_count <= 0 or not matches:
        return 0.0
    flags = np.array([m.is_true_positive for m in matches], dtype=bool)
    tp = np.cumsum(flags)
    ranks = np.arange(1, len(matches) + 1)
    precision = tp / ranks
    recall = tp / gt_count
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    if interpolation == "allpoint":
        # Each true positive advances recall by exactly 1/gt_count and
        # contributes the envelope precision at its recall level.
        return float(envelope[flags].sum() / gt_count)
    grid = np.arange(11) / 10.0
    first_at = np.searchsorted(recall, grid, side="left")
    sampled = np.where(first_at < len(matches), envelope[np.minimum(first_at, len(matches) - 1)], 0.0)
    return float(sampled.sum() / 11.0)


@dataclass(frozen=True)
class ClassAP:
    ap: float
    gt_count: int
    prediction_count: int


@dataclass(frozen=True)
class ClassPRF:
    precision: float
    recall: float
    f1: float
    gt_count: int
    prediction_count: int


@dataclass(frozen=True)
class ConfusionMatrix:
    """Word-label confusion counts; rows are ground truth, columns predicted."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


@dataclass(frozen=True)
class EvalReport:
    """Evaluation results plus the exact configuration that produced them."""

    mode: str
    scheme: str
    iou_threshold: Optional[float] = None
    interpolation: Optional[str] = None
    per_class_ap: Mapping[str, ClassAP] = field(default_factory=dict)
    mean_ap: Optional[float] = None
    excluded_classes: tuple[str, ...] = ()
    word_prf: Optional[Mapping[str, ClassPRF]] = None
    macro_f1: Optional[float] = None
    micro_f1: Optional[float] = None
    confusion: Optional[ConfusionMatrix] = None
    config: Mapping[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        payload: dict[str, object] = {
            "schema_version": 1,
            "mode": self.mode,
            "scheme": self.scheme,
        }
        if self.iou_threshold is not None:
            payload["iou_threshold"] = self.iou_threshold
        if self.interpolation is not None:
            payload["interpolation"] = self.interpolation
        payload.update(self.config)
        if self.per_class_ap or self.mean_ap is not None:
            payload["per_class_ap"] = {
                name: {
                    "ap": entry.ap,
                    "gt_count": entry.gt_count,
                    "prediction_count": entry.prediction_count,
                }
                for name, entry in self.per_class_ap.items()
            }
            payload["included_classes"] = list(self.per_class_ap)
            payload["excluded_classes"] = list(self.excluded_classes)
            payload["mean_ap"] = self.mean_ap
        if self.word_prf is not None:
            payload["word_prf"] = {
                name: {
                    "precision": entry.precision,
                    "recall": entry.recall,
                    "f1": entry.f1,
                    "gt_count": entry.gt_count,
                    "prediction_count": entry.prediction_count,
                }
                for name, entry in self.word_prf.items()
            }
            payload["macro_f1"] = self.macro_f1
            payload["micro_f1"] = self.micro_f1
        if self.confusion is not None:
            payload["confusion"] = {
                "labels": list(self.confusion.labels),
                "counts": [list(row) for row in self.confusion.counts],
            }
        return payload

    def to_json_bytes(self) -> bytes:
        return dumps_canonical(self.to_dict())

    def to_table(self) -> str:
        """Aligned plain-text rendering for terminals."""
        lines = [
            f"mode: {self.mode}    scheme: {self.scheme}"
            + (
                f"    iou_threshold: {self.iou_threshold:.6f}"
                if self.iou_threshold is not None
                else ""
            )
            + (
                f"    interpolation: {self.interpolation}"
                if self.interpolation is not None
                else ""
            )
        ]
        for key, value in self.config.items():
            lines[0] += f"    {key}: {value}"
        if self.per_class_ap or self.mean_ap is not None:
            lines.append("")
            lines.append(f"{'class':<22}{'AP':>10}{'gt':>8}{'preds':>8}")
            for name, entry in self.per_class_ap.items():
                lines.append(
                    f"{name:<22}{entry.ap:>10.6f}{entry.gt_count:>8}"
                    f"{entry.prediction_count:>8}"
                )
            if self.excluded_classes:
                lines.append(
                    "excluded (no ground truth): "
                    + ", ".join(self.excluded_classes)
                )
            lines.append(f"{'mAP':<22}{self.mean_ap:>10.6f}")
        if self.word_prf is not None:
            lines.append("")
            lines.append(
                f"{'class':<22}{'P':>10}{'R':>10}{'F1':>10}{'gt':>8}{'preds':>8}"
            )
            for name, entry in self.word_prf.items():
                lines.append(
                    f"{name:<22}{entry.precision:>10.6f}{entry.recall:>10.6f}"
                    f"{entry.f1:>10.6f}{entry.gt_count:>8}{entry.prediction_count:>8}"
                )
            lines.append(f"{'macro F1':<22}{self.macro_f1:>10.6f}")
            lines.append(f"{'micro F1':<22}{self.micro_f1:>10.6f}")
        if self.confusion is not None:
            lines.append("")
            width = max(len(label) for label in self.confusion.labels) + 2
            header = " " * width + "".join(
                f"{label:>{width}}" for label in self.confusion.labels
            )
            lines.append("confusion (rows: ground truth, columns: predicted)")
            lines.append(header)
            for label, row in zip(self.confusion.labels, self.confusion.counts):
                lines.append(
                    f"{label:<{width}}" + "".join(f"{n:>{width}}" for n in row)
                )
        return "\n".join(lines) + "\n"


def _region_class(region: Region, scheme: str):
    if scheme == "mono":
        return MonoClass.REGION
    return region.coarse_class


def map_at(
    predictions: Mapping[str, Sequence[Region]],
    gt_pages: Sequence[Page],
    iou_threshold: float = 0.5,
    interpolation: str = "allpoint",
    *,
    scheme: str = "coarse",
    mode: str = "regions",
    config: Optional[Mapping[str, object]] = None,
) -> EvalReport:
    """Mean average precision of predicted regions over a page set.

    ``predictions`` maps page ids to predicted regions; pages without an
    entry count as having none. AP is computed per class, pooling all
    pages; classes with zero ground-truth instances are excluded from
    the mean and reported separately.
    """
    if scheme not in ("coarse", "mono"):
        raise ValueError(f"unsupported evaluation scheme {scheme!r}")
    pages = sorted(gt_pages, key=lambda p: p.id)
    known = {p.id for p in pages}
    unknown = sorted(set(predictions) - known)
    if unknown:
        raise ValueError(f"predictions reference unknown page ids: {unknown}")

    classes = [MonoClass.REGION] if scheme == "mono" else list(CoarseClass)
    gt_counts = {cls: 0 for cls in classes}
    pred_counts = {cls: 0 for cls in classes}
    pooled: dict[object, list[tuple[str, Match]]] = {cls: [] for cls in classes}

    for page in pages:
        gts = [
            collapse_mono(r) if scheme == "mono" else r for r in page.regions
        ]
        preds = [
            collapse_mono(r) if scheme == "mono" else r
            for r in predictions.get(page.id, ())
        ]
        if scheme == "coarse":
            for region in preds:
                if isinstance(region.coarse_class, MonoClass):
                    raise ValueError(
                        f"prediction {region.id!r} on page {page.id!r} carries "
                        "the mono class; evaluate with scheme='mono'"
                    )
        for cls in classes:
            gts_c = [r for r in gts if r.coarse_class == cls]
            preds_c = [r for r in preds if r.coarse_class == cls]
            gt_counts[cls] += len(gts_c)
            pred_counts[cls] += len(preds_c)
            for match in match_detections(preds_c, gts_c, iou_threshold):
                pooled[cls].append((page.id, match))

    per_class: dict[str, ClassAP] = {}
    excluded: list[str] = []
    for cls in classes:
        if gt_counts[cls] == 0:
            if pred_counts[cls] > 0:
                excluded.append(cls.value)
            continue
        ordered = sorted(
            pooled[cls], key=lambda pm: (-pm[1].score, pm[0], pm[1].prediction_id)
        )
        ap = average_precision(
            [m for _, m in ordered], gt_counts[cls], interpolation
        )
        per_class[cls.value] = ClassAP(
            ap=ap, gt_count=gt_counts[cls], prediction_count=pred_counts[cls]
        )
    mean_ap = (
        sum(entry.ap for entry in per_class.values()) / len(per_class)
        if per_class
        else 0.0
    )
    return EvalReport(
        mode=mode,
        scheme=scheme,
        iou_threshold=iou_threshold,
        interpolation=interpolation,
        per_class_ap=per_class,
        mean_ap=mean_ap,
        excluded_classes=tuple(excluded),
        config=dict(config or {}),
    )


def evaluate_rebuilt(
    token_predictions: Mapping[str, Mapping[str, Optional[str]]],
    gt_pages: Sequence[Page],
    iou_threshold: float = 0.5,
    interpolation: str = "allpoint",
    *,
    config: Optional[Mapping[str, object]] = None,
) -> EvalReport:
    """Score token predictions by rebuilding regions from label runs.

    Consecutive identically labeled words become regions which are then
    matched against ground truth like detections, each with score 1.0;
    this is the region-level evaluation path for token classifiers, and
    it is deliberately harsh: one mislabeled interior word splits a
    region into three.
    """
    from .regions import rebuild_regions

    known = {p.id for p in gt_pages}
    unknown = sorted(set(token_predictions) - known)
    if unknown:
        raise ValueError(f"token predictions reference unknown page ids: {unknown}")
    rebuilt: dict[str, list[Region]] = {}
    for page in gt_pages:
        labels = token_predictions.get(page.id)
        if labels is None:
            continue
        rebuilt[page.id] = list(rebuild_regions(page.words, labels))
    return map_at(
        rebuilt,
        gt_pages,
        iou_threshold,
        interpolation,
        scheme="coarse",
        mode="rebuilt",
        config=config,
    )


_COARSE_VALUES = tuple(c.value for c in CoarseClass)


def _check_label_maps(
    predicted: Mapping[object, Optional[str]],
    ground_truth: Mapping[object, Optional[str]],
) -> None:
    if set(predicted) != set(ground_truth):
        missing = sorted(str(k) for k in set(ground_truth) - set(predicted))[:5]
        extra = sorted(str(k) for k in set(predicted) - set(ground_truth))[:5]
        raise ValueError(
            f"word ids differ between predictions and ground truth "
            f"(missing: {missing}, extra: {extra})"
        )
    for name, labels in (("predicted", predicted), ("ground truth", ground_truth)):
        for key, label in labels.items():
            if label is not None and label not in _COARSE_VALUES:
                raise ValueError(
                    f"{name} label {label!r} for word {key!r} is not a coarse class"
                )


@dataclass(frozen=True)
class WordScores:
    """Per-class word precision/recall/F1 plus macro and micro aggregates."""

    per_class: Mapping[str, ClassPRF]
    macro_f1: float
    micro_f1: float


def word_f1(
    predicted: Mapping[object, Optional[str]],
    ground_truth: Mapping[object, Optional[str]],
) -> WordScores:
    """Word-level precision/recall/F1 between two complete label maps.

    Both maps must cover the same word keys; None marks an unlabeled
    word. The "none" row is reported like a class but excluded from the
    macro average, which runs over the coarse classes present in either
    map. Micro F1 is computed over words with a non-none ground-truth
    label and equals plain accuracy when every such word carries a
    predicted class.
    """
    _check_label_maps(predicted, ground_truth)
    tp: dict[Optional[str], int] = {}
    fp: dict[Optional[str], int] = {}
    fn: dict[Optional[str], int] = {}
    for key, gt_label in ground_truth.items():
        pred_label = predicted[key]
        if pred_label == gt_label:
            tp[gt_label] = tp.get(gt_label, 0) + 1
        else:
            fp[pred_label] = fp.get(pred_label, 0) + 1
            fn[gt_label] = fn.get(gt_label, 0) + 1

    def prf(label: Optional[str]) -> ClassPRF:
        t, f_pos, f_neg = tp.get(label, 0), fp.get(label, 0), fn.get(label, 0)
        precision = t / (t + f_pos) if t + f_pos else 0.0
        recall = t / (t + f_neg) if t + f_neg else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        return ClassPRF(
            precision=precision,
            recall=recall,
            f1=f1,
            gt_count=t + f_neg,
            prediction_count=t + f_pos,
        )

    observed = {label for label in ground_truth.values() if label is not None}
    observed.update(label for label in predicted.values() if label is not None)
    present = [value for value in _COARSE_VALUES if value in observed]
    per_class: dict[str, ClassPRF] = {value: prf(value) for value in present}
    per_class[_NONE_LABEL] = prf(None)
    macro = (
        sum(per_class[value].f1 for value in present) / len(present)
        if present
        else 0.0
    )

    gt_labeled = [key for key, label in ground_truth.items() if label is not None]
    micro_tp = sum(1 for key in gt_labeled if predicted[key] == ground_truth[key])
    micro_fp = sum(
        1
        for key in gt_labeled
        if predicted[key] is not None and predicted[key] != ground_truth[key]
    )
    micro_fn = len(gt_labeled) - micro_tp
    denom = 2 * micro_tp + micro_fp + micro_fn
    micro = 2 * micro_tp / denom if denom else 0.0
    return WordScores(per_class=per_class, macro_f1=macro, micro_f1=micro)


def confusion_matrix(
    predicted: Mapping[object, Optional[str]],
    ground_truth: Mapping[object, Optional[str]],
) -> ConfusionMatrix:
    """Full confusion matrix over the 8 coarse classes plus "none"."""
    _check_label_maps(predicted, ground_truth)
    labels = _COARSE_VALUES + (_NONE_LABEL,)
    index = {value: i for i, value in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for key, gt_label in ground_truth.items():
        row = index[gt_label if gt_label is not None else _NONE_LABEL]
        col = index[predicted[key] if predicted[key] is not None else _NONE_LABEL]
        counts[row][col] += 1
    return ConfusionMatrix(
        labels=labels, counts=tuple(tuple(row) for row in counts)
    )


def evaluate_words(
    token_predictions: Mapping[str, Mapping[str, Optional[str]]],
    gt_pages: Sequence[Page],
    *,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
    config: Optional[Mapping[str, object]] = None,
) -> EvalReport:
    """Word-level scoring of token predictions against ground-truth pages.

    Ground-truth word labels are derived from the pages' regions with the
    flat labeling scheme; predictions for pages missing from the input
    count as all-none.
    """
    known = {p.id for p in gt_pages}
    unknown = sorted(set(token_predictions) - known)
    if unknown:
        raise ValueError(f"token predictions reference unknown page ids: {unknown}")
    pooled_pred: dict[tuple[str, str], Optional[str]] = {}
    pooled_gt: dict[tuple[str, str], Optional[str]] = {}
    for page in sorted(gt_pages, key=lambda p: p.id):
        page_pred = token_predictions.get(page.id, {})
        for word_label in label_words(
            page, Labeling.FLAT, overlap_threshold=overlap_threshold
        ):
            key = (page.id, word_label.word_id)
            pooled_gt[key] = word_label.label
            pooled_pred[key] = page_pred.get(word_label.word_id)
    scores = word_f1(pooled_pred, pooled_gt)
    confusion = confusion_matrix(pooled_pred, pooled_gt)
    merged_config = {"word_overlap_threshold": overlap_threshold}
    merged_config.update(config or {})
    return EvalReport(
        mode="words",
        scheme="coarse",
        word_prf=scores.per_class,
        macro_f1=scores.macro_f1,
        micro_f1=scores.micro_f1,
        confusion=confusion,
        config=merged_config,
    )
