import math

import numpy as np
import pytest

from evseg.corpus import RelationLabel
from evseg.errors import ConfigError
from evseg.rectifier import (
    ConstraintSet,
    RectifierNet,
    accuracy,
    bce_loss,
    check_structure,
    constraints_to_net,
    extract_constraints,
    forward,
    grad,
    load_constraints,
    save_constraints,
    train,
)
from evseg.subgraphs import FEATURE_DIM, PairAssignment, assignment_slot, featurize_subgraph

from oracles import finite_difference, relative_error

PC = RelationLabel.PARENT_CHILD
NOREL = RelationLabel.NO_REL


def zero_net(k=10, bias=0.0):
    return RectifierNet(np.zeros((k, FEATURE_DIM)), np.full(k, bias))


def transitivity_row():
    """Single hand-built row penalizing PC(i,j), PC(j,k) without PC(i,k)."""
    w = np.zeros(FEATURE_DIM)
    w[0] = 2.0   # PC bit of pair (i, j)
    w[5] = 2.0   # PC bit of pair (j, k)
    w[10 + assignment_slot(PairAssignment(PC, False))] = -4.0
    w[10 + assignment_slot(PairAssignment(PC, True))] = -4.0
    return RectifierNet(w[None, :], np.array([-2.0]))


def random_feature(rng):
    from evseg.subgraphs import WELL_FORMED
    relations = [PC, RelationLabel.CHILD_PARENT, RelationLabel.COREF, NOREL]
    a_ij = PairAssignment(rng.choice(relations), bool(rng.integers(2)))
    a_jk = PairAssignment(rng.choice(relations), bool(rng.integers(2)))
    mask = int(rng.integers(1, 256))
    values = [a for b, a in enumerate(WELL_FORMED) if mask & (1 << b)]
    return featurize_subgraph(a_ij, a_jk, values)


class TestForward:
    def test_inactive_hinges_hit_floor(self):
        net = zero_net(bias=-1.0)
        x = np.zeros(FEATURE_DIM)
        assert forward(net, x) == pytest.approx(1 / (1 + math.exp(-1)), abs=1e-9)

    def test_ten_active_hinges(self):
        net = zero_net(k=10, bias=1.0)
        x = np.zeros(FEATURE_DIM)
        assert forward(net, x) == pytest.approx(1 / (1 + math.exp(9)), rel=1e-6)

    def test_transitivity_row_separates(self):
        net = transitivity_row()
        violating = featurize_subgraph(PairAssignment(PC, True), PairAssignment(PC, True),
                                       [PairAssignment(NOREL, False)])
        satisfying = featurize_subgraph(PairAssignment(PC, True), PairAssignment(PC, True),
                                        [PairAssignment(PC, True)])
        assert forward(net, violating) < 0.5 < forward(net, satisfying)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="42"):
            forward(zero_net(), np.zeros(7))

    def test_probability_range_and_monotonicity(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            net = RectifierNet(rng.normal(size=(5, FEATURE_DIM)), rng.normal(size=5))
            x = random_feature(rng)
            p = forward(net, x)
            assert 0.0 < p < 1.0 <= math.inf
            # raising any bias never increases p
            bumped = RectifierNet(net.weights, net.biases + 0.5)
            assert forward(bumped, x) <= p + 1e-12


class TestGrad:
    def test_dead_units_zero_gradient(self):
        net = zero_net(bias=-1.0)
        X = np.ones((4, FEATURE_DIM))
        dW, db = grad(net, X, np.array([1.0, 0.0, 1.0, 0.0]))
        assert np.all(dW == 0.0) and np.all(db == 0.0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            k = int(rng.integers(1, 6))
            net = RectifierNet(rng.normal(scale=0.7, size=(k, FEATURE_DIM)),
                               rng.normal(scale=0.5, size=k))
            X = np.stack([random_feature(rng) for _ in range(6)])
            t = rng.integers(0, 2, size=6).astype(float)
            if np.min(np.abs(X @ net.weights.T + net.biases)) < 1e-5:
                continue  # avoid finite differences across a hinge kink
            dW, db = grad(net, X, t)

            def loss_at(flat):
                w = flat[: k * FEATURE_DIM].reshape(k, FEATURE_DIM)
                b = flat[k * FEATURE_DIM:]
                return bce_loss(RectifierNet(w, b), X, t)

            flat = np.concatenate([net.weights.ravel(), net.biases])
            fd = finite_difference(loss_at, flat)
            analytic = np.concatenate([dW.ravel(), db])
            assert relative_error(analytic, fd) <= 1e-4

    def test_duplicated_example_same_gradient(self):
        rng = np.random.default_rng(1)
        net = RectifierNet(rng.normal(size=(3, FEATURE_DIM)), rng.normal(size=3))
        x = random_feature(rng)
        single = grad(net, x[None, :], np.array([1.0]))
        double = grad(net, np.stack([x, x]), np.array([1.0, 1.0]))
        assert np.allclose(single[0], double[0]) and np.allclose(single[1], double[1])


class TestCheckStructure:
    def test_zero_net_accepts_everything(self):
        net = zero_net(bias=0.0)
        rng = np.random.default_rng(2)
        assert all(check_structure(net, random_feature(rng), "hard") for _ in range(20))

    def test_transitivity_row_rejects_violation(self):
        net = transitivity_row()
        violating = featurize_subgraph(PairAssignment(PC, True), PairAssignment(PC, True),
                                       [PairAssignment(NOREL, True)])
        assert not check_structure(net, violating, "hard")
        assert not check_structure(net, violating, "soft")

    def test_hard_accept_implies_probability_floor(self):
        rng = np.random.default_rng(3)
        floor = 1 / (1 + math.exp(-1))
        for _ in range(200):
            net = RectifierNet(rng.normal(size=(4, FEATURE_DIM)), rng.normal(size=4))
            x = random_feature(rng)
            if check_structure(net, x, "hard"):
                assert forward(net, x) >= floor - 1e-12


class TestTrain:
    def test_smoke_one_epoch(self):
        rng = np.random.default_rng(4)
        X = np.stack([random_feature(rng) for _ in range(10)])
        t = np.array([1, 0, 1, 0, 1, 0, 1, 0, 1, 0], dtype=float)
        result = train((X, t), k=4, lr=1e-3, max_epochs=1, seed=0)
        assert np.isfinite(result.net.weights).all()
        assert result.epochs_run == 1

    def test_single_class_refused(self):
        rng = np.random.default_rng(5)
        X = np.stack([random_feature(rng) for _ in range(8)])
        with pytest.raises(ConfigError, match="single label"):
            train((X, np.ones(8)), k=2, max_epochs=1)

    def test_deterministic_under_seed(self):
        rng = np.random.default_rng(6)
        X = np.stack([random_feature(rng) for _ in range(40)])
        t = (np.arange(40) % 2).astype(float)
        a = train((X, t), k=3, max_epochs=50, seed=9)
        b = train((X, t), k=3, max_epochs=50, seed=9)
        assert np.array_equal(a.net.weights, b.net.weights)
        assert np.array_equal(a.net.biases, b.net.biases)
        assert a.heldout_accuracy == b.heldout_accuracy


class TestConstraintSet:
    def test_round_trip_bit_for_bit(self, tmp_path):
        rng = np.random.default_rng(7)
        net = RectifierNet(rng.normal(size=(10, FEATURE_DIM)), rng.normal(size=10))
        cons = extract_constraints(net, meta={"seed": 7, "lr": 0.001})
        path = tmp_path / "constraints.json"
        save_constraints(cons, path)
        loaded = load_constraints(path)
        assert loaded.k == 10 and loaded.dim == FEATURE_DIM
        rebuilt = constraints_to_net(loaded)
        assert np.array_equal(rebuilt.weights, net.weights)
        assert np.array_equal(rebuilt.biases, net.biases)
        assert loaded.meta["lr"] == 0.001

    def test_exported_rows_verbatim(self):
        net = transitivity_row()
        cons = extract_constraints(net)
        assert np.array_equal(cons.rows[0][0], net.weights[0])
        assert cons.rows[0][1] == net.biases[0]
