import math

import numpy as np
import pytest

from evseg.corpus import RELATION_INDEX, RELATION_ORDER, RelationLabel
from evseg.encoders import BuiltinEncoder, PairEncoder
from evseg.errors import ConfigError
from evseg.joint import (
    JointModel,
    TrainConfig,
    loss_cons,
    loss_total,
    predict_pair,
    soft_featurize,
    train_joint,
    triple_losses,
)
from evseg.rectifier import RectifierNet
from evseg.subgraphs import FEATURE_DIM, PairAssignment, featurize_subgraph

from helpers import make_corpus, make_doc
from oracles import finite_difference, relative_error

PC = RelationLabel.PARENT_CHILD
NOREL = RelationLabel.NO_REL
FLOOR = -math.log(1 / (1 + math.exp(-1)))  # loss_cons with every hinge dead


class SeededEncoder(PairEncoder):
    """Deterministic random event vectors, small enough for grad checks."""

    def __init__(self, event_dim=3, seed=0):
        self.event_dim = event_dim
        self.seed = seed

    def event_vector(self, doc, event_index):
        rng = np.random.default_rng((self.seed, hash(doc.id) & 0xFFFF, event_index))
        return rng.normal(size=self.event_dim)


def labeled_doc(doc_id="d0"):
    return make_doc(doc_id=doc_id, n_sentences=3,
                    events=[(1, 0), (2, 1), (3, 2)],
                    relations=[(1, 2, "PC"), (2, 3, "PC"), (1, 3, "PC")],
                    boundaries=[0, 0])


class TestPredictPair:
    def test_untrained_model_is_uniform(self):
        doc = labeled_doc()
        enc = BuiltinEncoder(hash_dim=32, seed=1)
        model = JointModel(pair_dim=enc.pair_dim, seed=3)
        y, z = predict_pair(model, enc, doc, 0, 1)
        assert np.allclose(y, 0.25)
        assert z == pytest.approx(0.5)

    def test_pure_function(self):
        doc = labeled_doc()
        enc = BuiltinEncoder(hash_dim=32, seed=1)
        model = JointModel(pair_dim=enc.pair_dim, seed=3)
        first = predict_pair(model, enc, doc, 0, 2)
        second = predict_pair(model, enc, doc, 0, 2)
        assert np.array_equal(first[0], second[0]) and first[1] == second[1]

    def test_requires_text_order(self):
        doc = labeled_doc()
        enc = BuiltinEncoder(hash_dim=32, seed=1)
        model = JointModel(pair_dim=enc.pair_dim)
        with pytest.raises(ValueError):
            predict_pair(model, enc, doc, 2, 0)

    def test_simplex_outputs(self):
        doc = labeled_doc()
        enc = BuiltinEncoder(hash_dim=16, seed=2)
        rng = np.random.default_rng(5)
        model = JointModel(pair_dim=enc.pair_dim, seed=4)
        for key in model.params:
            model.params[key] = rng.normal(scale=0.5, size=model.params[key].shape)
        y, z = predict_pair(model, enc, doc, 0, 1)
        assert y.sum() == pytest.approx(1.0)
        assert (y > 0).all() and 0.0 < z < 1.0


class TestSoftFeaturize:
    def test_one_hot_matches_hard_featurizer(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            rels = [RELATION_ORDER[r] for r in rng.integers(0, 4, size=3)]
            zs = rng.integers(0, 2, size=3).astype(bool)
            preds = []
            for rel, z in zip(rels, zs):
                y = np.zeros(4)
                y[RELATION_INDEX[rel]] = 1.0
                preds.append((y, float(z)))
            psi = soft_featurize(*preds)
            hard = featurize_subgraph(
                PairAssignment(rels[0], bool(zs[0])),
                PairAssignment(rels[1], bool(zs[1])),
                [PairAssignment(rels[2], bool(zs[2]))])
            assert np.allclose(psi, hard)

    def test_uniform_predictions(self):
        uniform = (np.full(4, 0.25), 0.5)
        psi = soft_featurize(uniform, uniform, uniform)
        slots = psi[10:]
        assert np.isclose(slots[slots > 0], 0.125).all()
        assert np.count_nonzero(slots) == 8

    def test_value_slots_sum_to_one(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            preds = []
            for _ in range(3):
                y = rng.dirichlet(np.ones(4))
                preds.append((y, float(rng.random())))
            psi = soft_featurize(*preds)
            assert psi[10:].sum() == pytest.approx(1.0)


class TestLossCons:
    def test_floor_when_inactive(self):
        net = RectifierNet(np.zeros((10, FEATURE_DIM)), np.full(10, -1.0))
        psi = np.zeros(FEATURE_DIM)
        assert loss_cons(net, psi) == pytest.approx(FLOOR, abs=1e-9)

    def test_unit_hinge_sum(self):
        net = RectifierNet(np.zeros((1, FEATURE_DIM)), np.array([1.0]))
        psi = np.zeros(FEATURE_DIM)
        assert loss_cons(net, psi) == pytest.approx(math.log(2.0), abs=1e-12)

    def test_gradient_wrt_psi_matches_fd(self):
        from evseg.joint import _loss_cons_grad_psi
        rng = np.random.default_rng(2)
        checked = 0
        while checked < 10:
            net = RectifierNet(rng.normal(scale=0.6, size=(4, FEATURE_DIM)),
                               rng.normal(scale=0.3, size=4))
            psi = rng.random(FEATURE_DIM)
            if np.min(np.abs(psi @ net.weights.T + net.biases)) < 1e-4:
                continue
            _, g = _loss_cons_grad_psi(net, psi)
            fd = finite_difference(lambda v: loss_cons(net, v), psi)
            assert relative_error(g[0], fd) <= 1e-4
            checked += 1

    def test_directional_sensitivity_to_violations(self):
        # penalizing PC/PC antecedents whose third pair lacks PC mass
        w = np.zeros(FEATURE_DIM)
        w[0] = 2.0; w[5] = 2.0
        from evseg.subgraphs import assignment_slot
        w[10 + assignment_slot(PairAssignment(PC, False))] = -4.0
        w[10 + assignment_slot(PairAssignment(PC, True))] = -4.0
        net = RectifierNet(w[None, :], np.array([-2.0]))

        norel = np.array([0.05, 0.05, 0.05, 0.85])
        z = 0.5

        def cons_at(pc_mass):
            y_ante = np.array([pc_mass, (1 - pc_mass) / 3,
                               (1 - pc_mass) / 3, (1 - pc_mass) / 3])
            psi = soft_featurize((y_ante, z), (y_ante, z), (norel, z))
            return loss_cons(net, psi)

        values = [cons_at(m) for m in (0.5, 0.7, 0.9)]
        assert values[0] < values[1] < values[2]


class TestLossTotal:
    def setup_method(self):
        self.doc = labeled_doc()
        self.enc = SeededEncoder(event_dim=4, seed=1)
        self.model = JointModel(pair_dim=self.enc.pair_dim, seed=2)
        rng = np.random.default_rng(3)
        for key in self.model.params:
            self.model.params[key] = rng.normal(scale=0.4,
                                                size=self.model.params[key].shape)
        self.net = RectifierNet(np.zeros((2, FEATURE_DIM)), np.full(2, -1.0))

    def test_matches_hand_computed_components(self):
        cfg = TrainConfig(lambda_sub=1.0, lambda_seg=1.0, lambda_cons=0.0)
        losses = loss_total(self.model, None, self.enc, self.doc, (0, 1, 2), cfg)
        expected_sub = 0.0
        expected_seg = 0.0
        for (a, b) in ((0, 1), (1, 2), (0, 2)):
            y, z = predict_pair(self.model, self.enc, self.doc, a, b)
            lab = self.doc.pair_labels[(a, b)]
            expected_sub += -math.log(y[RELATION_INDEX[lab.relation]])
            expected_seg += -math.log(z if lab.same_segment else 1 - z)
        assert losses["sub"] == pytest.approx(expected_sub / 3)
        assert losses["seg"] == pytest.approx(expected_seg / 3)
        assert losses["total"] == pytest.approx(losses["sub"] + losses["seg"])

    def test_constraint_floor_with_dead_net(self):
        cfg = TrainConfig()
        losses = loss_total(self.model, self.net, self.enc, self.doc, (0, 1, 2), cfg)
        assert losses["cons"] == pytest.approx(FLOOR, abs=1e-9)

    def test_lambda_linearity(self):
        cfg1 = TrainConfig(lambda_sub=1.0, lambda_seg=1.0, lambda_cons=1.0)
        cfg2 = TrainConfig(lambda_sub=2.0, lambda_seg=2.0, lambda_cons=2.0)
        l1 = loss_total(self.model, self.net, self.enc, self.doc, (0, 1, 2), cfg1)
        l2 = loss_total(self.model, self.net, self.enc, self.doc, (0, 1, 2), cfg2)
        assert l2["total"] == pytest.approx(2 * l1["total"])

    def test_negative_lambda_rejected(self):
        with pytest.raises(ConfigError):
            TrainConfig(lambda_sub=-0.1)


class TestGradients:
    def test_full_gradient_matches_fd(self):
        rng = np.random.default_rng(7)
        cfg = TrainConfig(lambda_sub=1.0, lambda_seg=0.7, lambda_cons=0.9)
        checked = 0
        while checked < 5:
            pair_dim = 10
            model = JointModel(pair_dim=pair_dim, seed=int(rng.integers(1000)))
            for key in model.params:
                model.params[key] = rng.normal(scale=0.5, size=model.params[key].shape)
            net = RectifierNet(rng.normal(scale=0.4, size=(3, FEATURE_DIM)),
                               rng.normal(scale=0.2, size=3))
            U = rng.normal(size=(3, pair_dim))
            rel_gold = rng.integers(0, 4, size=3)
            z_gold = rng.integers(0, 2, size=3).astype(float)
            rows = np.array([[0, 1, 2]])

            if np.min(np.abs(U @ model.params["W1"].T + model.params["c1"])) < 1e-5:
                continue
            if np.min(np.abs(U @ model.params["V1"].T + model.params["d1"])) < 1e-5:
                continue

            losses, grads = triple_losses(model, net, U, rel_gold, z_gold, rows, cfg)

            names = JointModel.PARAM_NAMES
            shapes = [model.params[n].shape for n in names]

            def unpack(flat):
                out = {}
                pos = 0
                for name, shape in zip(names, shapes):
                    size = int(np.prod(shape))
                    out[name] = flat[pos:pos + size].reshape(shape)
                    pos += size
                return out

            def loss_at(flat):
                probe = JointModel(pair_dim=pair_dim, params=unpack(flat))
                l, _ = triple_losses(probe, net, U, rel_gold, z_gold, rows, cfg,
                                     want_grads=False)
                return l["total"]

            flat = np.concatenate([model.params[n].ravel() for n in names])
            fd = finite_difference(loss_at, flat, h=1e-6)
            analytic = np.concatenate([grads[n].ravel() for n in names])
            assert relative_error(analytic, fd) <= 1e-4
            checked += 1


class TestTrainJoint:
    def corpus(self):
        docs = [labeled_doc(f"d{i}") for i in range(6)]
        return make_corpus(docs, split=0.2)

    def test_deterministic(self):
        enc = BuiltinEncoder(hash_dim=16, seed=0)
        cfg = TrainConfig(epochs=3, seed=11, lambda_cons=0.0, batch_size=4)
        a = train_joint(self.corpus(), None, enc, cfg)
        b = train_joint(self.corpus(), None, enc, cfg)
        assert a.dev_f1 == b.dev_f1
        for key in a.model.params:
            assert np.array_equal(a.model.params[key], b.model.params[key])

    def test_lambda_cons_requires_constraints(self):
        enc = BuiltinEncoder(hash_dim=16, seed=0)
        with pytest.raises(ConfigError, match="constraint"):
            train_joint(self.corpus(), None, enc, TrainConfig(epochs=1))

    def test_single_task_arm_runs(self):
        enc = BuiltinEncoder(hash_dim=16, seed=0)
        cfg = TrainConfig(epochs=2, lambda_seg=0.0, lambda_cons=0.0, seed=1)
        result = train_joint(self.corpus(), None, enc, cfg)
        assert 0.0 <= result.dev_f1 <= 1.0
        assert len(result.history) == 2

    def test_full_arm_with_constraints(self):
        enc = BuiltinEncoder(hash_dim=16, seed=0)
        net = RectifierNet(np.zeros((2, FEATURE_DIM)), np.full(2, -0.5))
        cfg = TrainConfig(epochs=2, seed=1)
        result = train_joint(self.corpus(), net, enc, cfg)
        assert np.isfinite(result.model.params["W1"]).all()


class TestTrainableEncoder:
    def small_corpus(self, n=6):
        return make_corpus([labeled_doc(f"d{i}") for i in range(n)], split=0.2)

    def test_table_gradient_matches_fd(self):
        from evseg.encoders import TrainableEncoder
        from evseg.joint import _TrainablePairBatcher

        corpus = self.small_corpus()
        enc = TrainableEncoder(embed_dim=4, vocab_size=48, window=2, seed=3)
        doc = corpus.documents[0]
        batcher = _TrainablePairBatcher()
        pairs = [(0, 1), (1, 2), (0, 2)]
        for (i, j) in pairs:
            batcher.add_pair(enc, doc, 0, i, j)
        batcher.finalize(enc)

        model = JointModel(pair_dim=enc.pair_dim, seed=1)
        rng = np.random.default_rng(2)
        for key in model.params:
            model.params[key] = rng.normal(scale=0.4, size=model.params[key].shape)
        net = RectifierNet(rng.normal(scale=0.3, size=(2, FEATURE_DIM)),
                           rng.normal(scale=0.2, size=2))
        cfg = TrainConfig(lambda_sub=1.0, lambda_seg=0.8, lambda_cons=0.7)
        rel_gold = np.array([RELATION_INDEX[doc.pair_labels[p].relation] for p in pairs])
        z_gold = np.array([1.0, 1.0, 1.0])
        rows = np.arange(3)

        def loss_at(flat):
            enc.table = flat.reshape(enc.vocab_size, enc.embed_dim)
            U = batcher.batch(enc, rows)
            losses, _ = triple_losses(model, net, U, rel_gold, z_gold,
                                      np.array([[0, 1, 2]]), cfg, want_grads=False)
            return losses["total"]

        U = batcher.batch(enc, rows)
        _, _, dU = triple_losses(model, net, U, rel_gold, z_gold,
                                 np.array([[0, 1, 2]]), cfg, want_input_grads=True)
        analytic = np.asarray(batcher.backward(enc, rows, dU)).ravel()
        fd = finite_difference(loss_at, enc.table.ravel().copy(), h=1e-6)
        assert relative_error(analytic, fd) <= 1e-4

    def test_training_is_deterministic_and_updates_table(self):
        from evseg.encoders import TrainableEncoder

        corpus = self.small_corpus()
        cfg = TrainConfig(epochs=3, seed=5, lambda_cons=0.0, batch_size=4)
        enc_a = TrainableEncoder(embed_dim=8, vocab_size=64, seed=5)
        before = enc_a.table.copy()
        a = train_joint(corpus, None, enc_a, cfg)
        enc_b = TrainableEncoder(embed_dim=8, vocab_size=64, seed=5)
        b = train_joint(corpus, None, enc_b, cfg)
        assert not np.array_equal(before, enc_a.table)
        assert np.array_equal(enc_a.table, enc_b.table)
        for key in a.model.params:
            assert np.array_equal(a.model.params[key], b.model.params[key])

    def test_checkpoint_round_trip(self, tmp_path):
        from evseg.encoders import TrainableEncoder
        from evseg.joint import load_checkpoint, save_model

        corpus = self.small_corpus()
        enc = TrainableEncoder(embed_dim=8, vocab_size=64, seed=5)
        result = train_joint(corpus, None, enc,
                             TrainConfig(epochs=1, seed=5, lambda_cons=0.0))
        path = tmp_path / "model.json"
        save_model(result, path, encoder=enc)
        model, enc_payload = load_checkpoint(path)
        rebuilt = TrainableEncoder.from_dict(enc_payload)
        assert np.array_equal(rebuilt.table, enc.table)
        doc = corpus.documents[0]
        y1, z1 = predict_pair(result.model, enc, doc, 0, 1)
        y2, z2 = predict_pair(model, rebuilt, doc, 0, 1)
        assert np.allclose(y1, y2) and z1 == pytest.approx(z2)
