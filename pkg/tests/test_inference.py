import numpy as np
import pytest

from evseg.corpus import RELATION_INDEX, RelationLabel
from evseg.errors import ValidationError
from evseg.inference import (
    eval_relations,
    eval_segmentation,
    gold_relations,
    predict_relations,
    predict_segments,
)

from helpers import make_doc

PC = RelationLabel.PARENT_CHILD
CP = RelationLabel.CHILD_PARENT
COREF = RelationLabel.COREF
NOREL = RelationLabel.NO_REL


class FixedModel:
    """Stub scorer emitting preset distributions in pair order."""

    def __init__(self, ys=None, zs=None):
        self.ys = ys
        self.zs = zs

    def pair_scores(self, encoder, doc, pairs):
        n = len(pairs)
        Y = np.array(self.ys[:n]) if self.ys else np.full((n, 4), 0.25)
        Z = np.array(self.zs[:n]) if self.zs else np.full(n, 0.5)
        return Y, Z


class GoldModel:
    """Oracle pass-through: emits one-hot gold labels and gold z."""

    def pair_scores(self, encoder, doc, pairs):
        Y = np.zeros((len(pairs), 4))
        Z = np.zeros(len(pairs))
        for row, pair in enumerate(pairs):
            lab = doc.pair_labels[pair]
            Y[row, RELATION_INDEX[lab.relation]] = 1.0
            Z[row] = 1.0 if lab.same_segment else 0.0
        return Y, Z


class TestPredictRelations:
    def test_argmax(self):
        doc = make_doc(events=[(1, 0), (2, 1)])
        model = FixedModel(ys=[[0.4, 0.3, 0.2, 0.1]])
        assert predict_relations(model, None, doc)[(0, 1)] == PC

    def test_tie_breaks_to_first_label(self):
        doc = make_doc(events=[(1, 0), (2, 1)])
        model = FixedModel()  # uniform
        assert predict_relations(model, None, doc)[(0, 1)] == PC

    def test_gold_pass_through(self):
        doc = make_doc(events=[(1, 0), (2, 1), (3, 2)],
                       relations=[(1, 2, "PC"), (2, 3, "COREF")],
                       boundaries=[0, 1])
        preds = predict_relations(GoldModel(), None, doc)
        assert preds == gold_relations(doc)
        report = eval_relations(preds, gold_relations(doc))
        assert report.micro["f1"] == 1.0


class TestPredictSegments:
    def test_boundary_from_low_z(self):
        doc = make_doc(n_sentences=3, events=[(1, 0), (2, 1), (3, 2)])
        model = FixedModel(zs=[0.9, 0.2])
        seg = predict_segments(model, None, doc)
        assert seg.boundaries == (0, 1)

    def test_all_same_segment(self):
        doc = make_doc(n_sentences=3, events=[(1, 0), (2, 1), (3, 2)])
        model = FixedModel(zs=[1.0, 1.0])
        seg = predict_segments(model, None, doc)
        assert seg.boundaries == (0, 0)
        assert seg.segments == ((0, 2),)

    def test_same_sentence_pairs_skipped(self):
        doc = make_doc(n_sentences=2, events=[(1, 0), (2, 0), (3, 1)])
        model = FixedModel(zs=[0.9])  # only one cross-sentence adjacent pair
        seg = predict_segments(model, None, doc)
        assert seg.boundaries == (0,)

    def test_zero_events_single_segment(self):
        doc = make_doc(n_sentences=4)
        seg = predict_segments(FixedModel(), None, doc)
        assert seg.segments == ((0, 3),)


class TestEvalRelations:
    def test_perfect(self):
        gold = {(0, 1): PC, (0, 2): CP, (1, 2): NOREL}
        report = eval_relations(dict(gold), gold)
        assert report.per_class[PC]["f1"] == 1.0
        assert report.micro["f1"] == 1.0

    def test_partial_credit_arithmetic(self):
        gold = {}
        pred = {}
        for n in range(10):
            gold[("pc", n)] = PC
            pred[("pc", n)] = PC if n < 4 else NOREL
        # one spurious PC prediction on a NoRel pair
        gold[("extra", 0)] = NOREL
        pred[("extra", 0)] = PC
        report = eval_relations(pred, gold)
        stats = report.per_class[PC]
        assert stats["precision"] == pytest.approx(0.8)
        assert stats["recall"] == pytest.approx(0.4)
        assert stats["f1"] == pytest.approx(2 * 0.8 * 0.4 / 1.2)

    def test_zero_predictions_zero_f1(self):
        gold = {(0, 1): PC, (0, 2): PC}
        pred = {(0, 1): NOREL, (0, 2): NOREL}
        report = eval_relations(pred, gold)
        assert report.per_class[PC]["precision"] == 0.0
        assert report.per_class[PC]["f1"] == 0.0

    def test_universe_mismatch(self):
        with pytest.raises(ValidationError, match="universe"):
            eval_relations({(0, 1): PC}, {(0, 2): PC})

    def test_micro_between_class_f1s(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            gold, pred = {}, {}
            key = 0
            for cls in (PC, CP):
                support = int(rng.integers(1, 20))
                correct = int(rng.integers(1, support + 1))
                spurious = int(rng.integers(0, 10))
                for n in range(support):
                    gold[key] = cls
                    pred[key] = cls if n < correct else NOREL
                    key += 1
                for _ in range(spurious):
                    gold[key] = NOREL
                    pred[key] = cls
                    key += 1
            report = eval_relations(pred, gold)
            f1s = [report.per_class[PC]["f1"], report.per_class[CP]["f1"]]
            assert min(f1s) - 1e-12 <= report.micro["f1"] <= max(f1s) + 1e-12


class TestEvalSegmentation:
    def test_identical(self):
        assert eval_segmentation([0, 1, 0, 1], [0, 1, 0, 1])["f1"] == 1.0

    def test_strict_miss(self):
        assert eval_segmentation([0, 0, 1, 0], [0, 1, 0, 0])["f1"] == 0.0

    def test_partial(self):
        stats = eval_segmentation([0, 1, 0, 0, 0, 0], [0, 1, 0, 0, 1, 0])
        assert stats["precision"] == 1.0
        assert stats["recall"] == pytest.approx(0.5)
        assert stats["f1"] == pytest.approx(2 / 3)

    def test_window_tolerance(self):
        assert eval_segmentation([0, 0, 1, 0], [0, 1, 0, 0], window=1)["f1"] == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ValidationError, match="length"):
            eval_segmentation([0, 1], [0, 1, 0])
