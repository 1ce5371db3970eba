"""Test-time prediction and evaluation for both tasks.

Relations are predicted independently per text-ordered pair by argmax
over the relation head; ties resolve to the first label in the fixed
order (ParentChild, ChildParent, Coref, NoRel). Segment boundaries come
from the same-segment probability of adjacent event pairs that sit in
different sentences: a probability below the threshold ends a segment at
the sentence of the earlier event. The same-segment score z follows its
data-model meaning (z high = one segment), so a break requires LOW z;
the prose around the original inference rule inverts this polarity once,
which we deliberately do not follow.

Relation metrics report per-class precision/recall/F1 for the two
membership labels plus their micro-average over pooled counts.
Segmentation is scored by boundary-level exact match (a +-window
tolerance is configurable, zero by default).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import RELATION_INDEX, RELATION_ORDER, RelationLabel
from .errors import ValidationError
from .segmentation import Segmentation


def predict_relations(model, encoder, doc) -> dict:
    """Relation label per text-ordered pair {(i, j): label}."""
    pairs = list(doc.ordered_pairs())
    if not pairs:
        return {}
    Y, _ = model.pair_scores(encoder, doc, pairs)
    picks = np.argmax(Y, axis=1)  # first maximum wins ties, matching label order
    return {pair: RELATION_ORDER[idx] for pair, idx in zip(pairs, picks)}


def predict_segments(model, encoder, doc, threshold: float = 0.5) -> Segmentation:
    """Boundary predictions from adjacent cross-sentence event pairs."""
    m = len(doc.sentences)
    boundaries = [0] * max(m - 1, 0)
    adjacent = [
        (t, t + 1) for t in range(len(doc.events) - 1)
        if doc.events[t].sentence_index != doc.events[t + 1].sentence_index
    ]
    if adjacent:
        _, Z = model.pair_scores(encoder, doc, adjacent)
        for (t, _), z in zip(adjacent, Z):
            if z < threshold:
                boundaries[doc.events[t].sentence_index] = 1
    return Segmentation.from_boundaries(boundaries, m)


@dataclass
class MetricsReport:
    per_class: dict = field(default_factory=dict)  # label -> {precision, recall, f1, support}
    micro: dict = field(default_factory=dict)
    segmentation: dict = field(default_factory=dict)

    def to_dict(self):
        return {"per_class": self.per_class, "micro": self.micro,
                "segmentation": self.segmentation}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _prf(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def eval_relations(pred: dict, gold: dict) -> MetricsReport:
    """Precision/recall/F1 for the membership labels over one pair universe.

    `pred` and `gold` map pair keys to labels and must cover the same
    pairs. The micro average pools ParentChild and ChildParent counts.
    """
    if set(pred) != set(gold):
        raise ValidationError("prediction and gold pair universes differ")
    report = MetricsReport()
    pooled_tp = pooled_fp = pooled_fn = 0
    for label in (RelationLabel.PARENT_CHILD, RelationLabel.CHILD_PARENT):
        tp = sum(1 for k, lab in pred.items() if lab == label and gold[k] == label)
        fp = sum(1 for k, lab in pred.items() if lab == label and gold[k] != label)
        fn = sum(1 for k, lab in gold.items() if lab == label and pred[k] != label)
        precision, recall, f1 = _prf(tp, fp, fn)
        report.per_class[label] = {
            "precision": precision, "recall": recall, "f1": f1,
            "support": tp + fn,
        }
        pooled_tp += tp; pooled_fp += fp; pooled_fn += fn
    precision, recall, f1 = _prf(pooled_tp, pooled_fp, pooled_fn)
    report.micro = {"precision": precision, "recall": recall, "f1": f1,
                    "support": pooled_tp + pooled_fn}
    return report


def eval_segmentation(pred, gold, window: int = 0) -> dict:
    """Boundary-level P/R/F1 between two 0/1 boundary sequences.

    With window=0 only exact positions match; a positive window lets a
    predicted boundary match an unused gold boundary within +-window
    sentences (greedy left-to-right matching).
    """
    pred_b = list(getattr(pred, "boundaries", pred))
    gold_b = list(getattr(gold, "boundaries", gold))
    if len(pred_b) != len(gold_b):
        raise ValidationError(
            f"boundary sequences differ in length ({len(pred_b)} vs {len(gold_b)})")
    pred_pos = [i for i, b in enumerate(pred_b) if b]
    gold_pos = [i for i, b in enumerate(gold_b) if b]
    unused = list(gold_pos)
    tp = 0
    for p in pred_pos:
        match = next((g for g in unused if abs(g - p) <= window), None)
        if match is not None:
            unused.remove(match)
            tp += 1
    fp = len(pred_pos) - tp
    fn = len(gold_pos) - tp
    precision, recall, f1 = _prf(tp, fp, fn)
    return {"precision": precision, "recall": recall, "f1": f1,
            "tp": tp, "fp": fp, "fn": fn,
            "gold_boundaries": len(gold_pos), "predicted_boundaries": len(pred_pos)}


def gold_relations(doc) -> dict:
    return {pair: doc.pair_labels[pair].relation for pair in doc.ordered_pairs()}


def evaluate_corpus(model, encoder, docs, threshold: float = 0.5,
                    window: int = 0) -> MetricsReport:
    """Aggregate relation and segmentation metrics over documents."""
    pred_all, gold_all = {}, {}
    seg_tp = seg_fp = seg_fn = 0
    for doc in docs:
        preds = predict_relations(model, encoder, doc)
        for pair, label in preds.items():
            pred_all[(doc.id,) + pair] = label
            gold_all[(doc.id,) + pair] = doc.pair_labels[pair].relation
        reference = doc.gold_boundaries if doc.gold_boundaries is not None else doc.boundaries
        if reference is not None and len(doc.sentences) > 1:
            seg = predict_segments(model, encoder, doc, threshold=threshold)
            stats = eval_segmentation(seg.boundaries, reference, window=window)
            seg_tp += stats["tp"]; seg_fp += stats["fp"]; seg_fn += stats["fn"]
    report = eval_relations(pred_all, gold_all)
    precision, recall, f1 = _prf(seg_tp, seg_fp, seg_fn)
    report.segmentation = {"precision": precision, "recall": recall, "f1": f1}
    return report
