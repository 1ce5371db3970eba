"""Joint pairwise classifier for relations and segmentation.

Each event pair runs through two single-hidden-layer heads on top of a
shared pair representation: a 4-way relation head (softmax) and a
same-segment head (sigmoid). Hidden widths follow the average of the
layer's input and output sizes. Training consumes three text-ordered
events at a time so the frozen constraint net can score the soft
featurization of the triple, and minimizes

    L = lambda_sub * L_annotation_relations
      + lambda_seg * L_annotation_segments
      + lambda_cons * L_constraints

with AMSGrad. All gradients are analytic; finite-difference agreement is
covered by the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import RELATION_INDEX, RELATION_ORDER, RelationLabel
from .errors import ConfigError
from .rectifier import RectifierNet, _sigmoid, constraints_to_net, pre_activations
from .subgraphs import FEATURE_DIM, WELL_FORMED, assignment_slot

PROB_CLAMP = 1e-12
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

# (psi position, relation index, same-segment flag) for the 8 value slots
SOFT_SLOTS = tuple(
    (10 + assignment_slot(a), RELATION_INDEX[a.relation], a.same_segment)
    for a in WELL_FORMED
)


@dataclass
class TrainConfig:
    lambda_sub: float = 1.0
    lambda_seg: float = 1.0
    lambda_cons: float = 1.0
    lr: float = 1e-3
    epochs: int = 40
    seed: int = 0
    batch_size: int = 32
    max_triples_per_doc: int = 5000
    norel_keep_prob: float = 1.0
    class_weights: tuple = None  # optional CE weights in RELATION_ORDER
    dev_fraction: float = 0.1

    def __post_init__(self):
        for name in ("lambda_sub", "lambda_seg", "lambda_cons"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.epochs < 1:
            raise ConfigError("epochs must be at least 1")
        if self.lr <= 0:
            raise ConfigError("learning rate must be positive")
        if not 0.0 <= self.norel_keep_prob <= 1.0:
            raise ConfigError("norel_keep_prob must lie in [0, 1]")


class JointModel:
    """Relation + segmentation heads over a fixed pair representation."""

    PARAM_NAMES = ("W1", "c1", "W2", "c2", "V1", "d1", "v2", "d2")

    def __init__(self, pair_dim: int, seed: int = 0, params: dict = None):
        self.pair_dim = pair_dim
        self.hidden_rel = (pair_dim + len(RELATION_ORDER)) // 2
        self.hidden_seg = (pair_dim + 1) // 2
        self.seed = seed
        if params is not None:
            self.params = {k: np.asarray(v, dtype=float) for k, v in params.items()}
        else:
            rng = np.random.default_rng(seed)
            s1 = 1.0 / math.sqrt(pair_dim)
            self.params = {
                # hidden layers seeded, output layers zero so that an
                # untrained model scores uniformly
                "W1": rng.uniform(-s1, s1, size=(self.hidden_rel, pair_dim)),
                "c1": np.zeros(self.hidden_rel),
                "W2": np.zeros((len(RELATION_ORDER), self.hidden_rel)),
                "c2": np.zeros(len(RELATION_ORDER)),
                "V1": rng.uniform(-s1, s1, size=(self.hidden_seg, pair_dim)),
                "d1": np.zeros(self.hidden_seg),
                "v2": np.zeros(self.hidden_seg),
                "d2": np.zeros(1),
            }

    def forward(self, U):
        """Batched scores for pair representations U of shape (n, pair_dim).

        Returns (Y, Z, cache) where Y rows are relation distributions and
        Z holds same-segment probabilities.
        """
        U = np.atleast_2d(np.asarray(U, dtype=float))
        p = self.params
        pre1 = U @ p["W1"].T + p["c1"]
        h1 = np.maximum(pre1, 0.0)
        logits = h1 @ p["W2"].T + p["c2"]
        shifted = logits - logits.max(axis=1, keepdims=True)
        expo = np.exp(shifted)
        Y = expo / expo.sum(axis=1, keepdims=True)
        pre2 = U @ p["V1"].T + p["d1"]
        g1 = np.maximum(pre2, 0.0)
        zeta = g1 @ p["v2"] + p["d2"][0]
        Z = _sigmoid(zeta)
        cache = {"U": U, "pre1": pre1, "h1": h1, "Y": Y,
                 "pre2": pre2, "g1": g1, "Z": Z}
        return Y, Z, cache

    def pair_scores(self, encoder, doc, pairs):
        U = np.stack([encoder.pair_representation(doc, i, j) for (i, j) in pairs])
        Y, Z, _ = self.forward(U)
        return Y, Z

    def to_dict(self):
        return {
            "pair_dim": self.pair_dim,
            "seed": self.seed,
            "params": {k: v.tolist() for k, v in self.params.items()},
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(pair_dim=payload["pair_dim"], seed=payload.get("seed", 0),
                   params=payload["params"])


def predict_pair(model: JointModel, encoder, doc, i: int, j: int):
    """Scores for a single text-ordered pair: (4 relation probs, z)."""
    if i >= j:
        raise ValueError("predict_pair expects a text-ordered pair (i < j)")
    Y, Z = model.pair_scores(encoder, doc, [(i, j)])
    return Y[0], float(Z[0])


def soft_featurize(preds_ij, preds_jk, preds_ik) -> np.ndarray:
    """Soft 42-dim featurization of three pair predictions.

    Each argument is a (y, z) tuple. The value slots of the third pair
    distribute its relation mass over the same/cross segment outcomes,
    so they degenerate to the hard binary featurization on one-hot
    inputs.
    """
    Y3 = np.stack([np.asarray(p[0], dtype=float) for p in (preds_ij, preds_jk, preds_ik)])
    Z3 = np.array([preds_ij[1], preds_jk[1], preds_ik[1]], dtype=float)
    return _soft_featurize_batch(Y3[None, :, :], Z3[None, :])[0]


def _soft_featurize_batch(Y3, Z3):
    """Y3: (T, 3, 4), Z3: (T, 3) -> psi (T, 42)."""
    T = Y3.shape[0]
    psi = np.zeros((T, FEATURE_DIM))
    psi[:, 0:4] = Y3[:, 0, :]
    psi[:, 4] = Z3[:, 0]
    psi[:, 5:9] = Y3[:, 1, :]
    psi[:, 9] = Z3[:, 1]
    for pos, r_idx, same in SOFT_SLOTS:
        gate = Z3[:, 2] if same else 1.0 - Z3[:, 2]
        psi[:, pos] = Y3[:, 2, r_idx] * gate
    return psi


def loss_cons(net: RectifierNet, psi) -> float:
    """Constraint penalty -log sigmoid(1 - sum_k relu(w_k . psi + b_k))."""
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    hinge = np.maximum(pre_activations(net, psi), 0.0).sum(axis=1)
    p = np.clip(_sigmoid(1.0 - hinge), PROB_CLAMP, None)
    out = -np.log(p)
    return float(out[0]) if out.shape[0] == 1 else out


def _loss_cons_grad_psi(net, psi):
    """Mean L_cons over the batch and its gradient w.r.t. psi."""
    psi = np.atleast_2d(psi)
    a = pre_activations(net, psi)
    hinge_sum = np.maximum(a, 0.0).sum(axis=1)
    p = _sigmoid(1.0 - hinge_sum)
    losses = -np.log(np.clip(p, PROB_CLAMP, None))
    # d(-log sigmoid(1 - s))/ds = 1 - sigmoid(1 - s)
    coeff = (1.0 - p)[:, None] * (a > 0.0)
    g_psi = coeff @ net.weights
    return losses, g_psi


def _softmax_backward(Y, dY):
    inner = (dY * Y).sum(axis=1, keepdims=True)
    return Y * (dY - inner)


def triple_losses(model: JointModel, net, U, rel_gold, z_gold, triple_rows, cfg,
                  want_grads: bool = True, want_input_grads: bool = False):
    """Losses (and parameter gradients) for a batch of event triples.

    `U` holds unique pair representations, `triple_rows` is (T, 3) row
    indices into U ordered as pairs (i,j), (j,k), (i,k). Loss terms are
    averaged per triple; the relation and segment annotation losses
    average over the three pairs of each triple. With
    `want_input_grads` the gradient w.r.t. U is returned as well, so a
    trainable encoder can continue the backward pass.
    """
    p = model.params
    Y, Z, cache = model.forward(U)
    T = triple_rows.shape[0]
    rows = triple_rows.reshape(-1)

    rel_idx = rel_gold[rows]
    probs = np.clip(Y[rows, rel_idx], PROB_CLAMP, None)
    if cfg.class_weights is not None:
        w = np.asarray(cfg.class_weights, dtype=float)[rel_idx]
    else:
        w = np.ones_like(probs)
    loss_sub = float(np.sum(w * -np.log(probs)) / (3 * T))

    z_true = z_gold[rows]
    z_pred = np.clip(Z[rows], PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss_seg = float(np.sum(-z_true * np.log(z_pred)
                            - (1.0 - z_true) * np.log(1.0 - z_pred)) / (3 * T))

    if net is not None and cfg.lambda_cons > 0:
        Y3 = Y[triple_rows]              # (T, 3, 4)
        Z3 = Z[triple_rows]              # (T, 3)
        psi = _soft_featurize_batch(Y3, Z3)
        cons_losses, g_psi = _loss_cons_grad_psi(net, psi)
        loss_con = float(cons_losses.mean())
    else:
        psi = None
        loss_con = 0.0

    total = (cfg.lambda_sub * loss_sub + cfg.lambda_seg * loss_seg
             + cfg.lambda_cons * loss_con)
    losses = {"sub": loss_sub, "seg": loss_seg, "cons": loss_con, "total": total}
    if not want_grads:
        return losses, None

    # gradient w.r.t. logits and z-logits, accumulated over loss terms
    dlogits = np.zeros_like(Y)
    dzeta = np.zeros_like(Z)

    onehot = np.zeros_like(Y[rows])
    onehot[np.arange(rows.size), rel_idx] = 1.0
    coeff_sub = cfg.lambda_sub / (3 * T)
    contrib = coeff_sub * w[:, None] * (Y[rows] - onehot)
    np.add.at(dlogits, rows, contrib)

    coeff_seg = cfg.lambda_seg / (3 * T)
    np.add.at(dzeta, rows, coeff_seg * (Z[rows] - z_true))

    if psi is not None:
        scale = cfg.lambda_cons / T
        dY3 = np.zeros((T, 3, 4))
        dZ3 = np.zeros((T, 3))
        dY3[:, 0, :] = g_psi[:, 0:4]
        dZ3[:, 0] = g_psi[:, 4]
        dY3[:, 1, :] = g_psi[:, 5:9]
        dZ3[:, 1] = g_psi[:, 9]
        Z_ik = Z3[:, 2]
        for pos, r_idx, same in SOFT_SLOTS:
            gate = Z_ik if same else 1.0 - Z_ik
            dY3[:, 2, r_idx] += g_psi[:, pos] * gate
            sign = 1.0 if same else -1.0
            dZ3[:, 2] += sign * g_psi[:, pos] * Y3[:, 2, r_idx]
        # route through softmax/sigmoid at the triple's pair rows
        dY_rows = (scale * dY3).reshape(-1, 4)
        dlog_rows = _softmax_backward(Y[rows], dY_rows)
        np.add.at(dlogits, rows, dlog_rows)
        dz_rows = (scale * dZ3).reshape(-1) * Z[rows] * (1.0 - Z[rows])
        np.add.at(dzeta, rows, dz_rows)

    U_arr, h1, g1 = cache["U"], cache["h1"], cache["g1"]
    grads = {}
    grads["W2"] = dlogits.T @ h1
    grads["c2"] = dlogits.sum(axis=0)
    dh1 = dlogits @ p["W2"]
    dh1[cache["pre1"] <= 0.0] = 0.0
    grads["W1"] = dh1.T @ U_arr
    grads["c1"] = dh1.sum(axis=0)

    grads["v2"] = g1.T @ dzeta
    grads["d2"] = np.array([dzeta.sum()])
    dg1 = np.outer(dzeta, p["v2"])
    dg1[cache["pre2"] <= 0.0] = 0.0
    grads["V1"] = dg1.T @ U_arr
    grads["d1"] = dg1.sum(axis=0)
    if want_input_grads:
        dU = dh1 @ p["W1"] + dg1 @ p["V1"]
        return losses, grads, dU
    return losses, grads


def loss_total(model: JointModel, net, encoder, doc, triple, cfg: TrainConfig):
    """Total loss for one text-ordered event triple of a document."""
    i, j, k = triple
    pairs = [(i, j), (j, k), (i, k)]
    U = np.stack([encoder.pair_representation(doc, a, b) for (a, b) in pairs])
    rel_gold = np.array([RELATION_INDEX[doc.pair_labels[pq].relation] for pq in pairs])
    z_gold = np.array([1.0 if doc.pair_labels[pq].same_segment else 0.0 for pq in pairs])
    losses, _ = triple_losses(model, net, U, rel_gold, z_gold,
                              np.array([[0, 1, 2]]), cfg, want_grads=False)
    return losses


class AmsGrad:
    """AMSGrad: Adam with a running maximum of the second-moment estimate."""

    def __init__(self, params, lr):
        self.lr = lr
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.v_hat = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params, grads):
        self.step_count += 1
        bc1 = 1 - ADAM_BETA1 ** self.step_count
        bc2 = 1 - ADAM_BETA2 ** self.step_count
        for key, g in grads.items():
            m = self.m[key]; v = self.v[key]; vh = self.v_hat[key]
            m *= ADAM_BETA1; m += (1 - ADAM_BETA1) * g
            v *= ADAM_BETA2; v += (1 - ADAM_BETA2) * g * g
            np.maximum(vh, v, out=vh)
            params[key] -= self.lr * (m / bc1) / (np.sqrt(vh / bc2) + ADAM_EPS)


def _norel_only(doc, i, j, k):
    return all(doc.pair_labels[pq].relation == RelationLabel.NO_REL
               for pq in ((i, j), (j, k), (i, k)))


def collect_triples(doc, cap, rng, norel_keep_prob=1.0):
    """Text-ordered triples of a document, capped by uniform sampling."""
    n = len(doc.events)
    triples = [(i, j, k) for i in range(n) for j in range(i + 1, n)
               for k in range(j + 1, n)]
    if norel_keep_prob < 1.0:
        triples = [t for t in triples
                   if not _norel_only(doc, *t) or rng.random() < norel_keep_prob]
    if len(triples) > cap:
        triples = sorted(rng.sample(triples, cap))
    return triples


@dataclass
class JointTrainResult:
    model: JointModel
    dev_f1: float
    best_epoch: int
    history: list = field(default_factory=list)
    config: dict = field(default_factory=dict)


def _micro_f1_pc_cp(pred_idx, gold_idx):
    """Micro-averaged F1 over the two membership classes."""
    tp = fp = fn = 0
    for cls in (RELATION_INDEX[RelationLabel.PARENT_CHILD],
                RELATION_INDEX[RelationLabel.CHILD_PARENT]):
        tp += int(np.sum((pred_idx == cls) & (gold_idx == cls)))
        fp += int(np.sum((pred_idx == cls) & (gold_idx != cls)))
        fn += int(np.sum((pred_idx != cls) & (gold_idx == cls)))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


class _FrozenPairBatcher:
    """Serves precomputed pair representations; no encoder gradient."""

    def __init__(self):
        self.U_rows = []

    def add_pair(self, encoder, doc, pos, i, j):
        self.U_rows.append(encoder.pair_representation(doc, i, j))

    def finalize(self, encoder):
        self.U = np.stack(self.U_rows)

    def batch(self, encoder, rows):
        return self.U[rows]

    def backward(self, encoder, rows, dU):
        return None


class _TrainablePairBatcher:
    """Recomputes pair representations from the live embedding table and
    routes the loss gradient back into it."""

    def __init__(self):
        self.event_row = {}
        self.event_weights = []   # (bucket ids, weights) per unique event
        self.event_pos = []
        self.pair_events = []     # (event row a, event row b) per pair

    def _event_of(self, encoder, doc, pos, idx):
        key = (pos, idx)
        row = self.event_row.get(key)
        if row is None:
            row = len(self.event_weights)
            self.event_row[key] = row
            trigger, context, pos_vec = encoder.event_buckets(doc, idx)
            buckets = {}
            for b in trigger:
                buckets[b] = buckets.get(b, 0.0) + 1.0 / len(trigger)
            if context:
                w = encoder.context_weight / len(context)
                for b in context:
                    buckets[b] = buckets.get(b, 0.0) + w
            ids = np.fromiter(buckets.keys(), dtype=int)
            weights = np.fromiter(buckets.values(), dtype=float)
            self.event_weights.append((ids, weights))
            self.event_pos.append(pos_vec)
        return row

    def add_pair(self, encoder, doc, pos, i, j):
        self.pair_events.append((self._event_of(encoder, doc, pos, i),
                                 self._event_of(encoder, doc, pos, j)))

    def finalize(self, encoder):
        from scipy import sparse

        n_events = len(self.event_weights)
        indptr = [0]
        indices = []
        data = []
        for ids, weights in self.event_weights:
            indices.extend(ids.tolist())
            data.extend(weights.tolist())
            indptr.append(len(indices))
        self.token_matrix = sparse.csr_matrix(
            (data, indices, indptr), shape=(n_events, encoder.vocab_size))
        self.pos_block = np.stack(self.event_pos)
        self.pair_events = np.array(self.pair_events)
        self.embed_dim = encoder.embed_dim

    def batch(self, encoder, rows):
        pairs = self.pair_events[rows]
        self._events, local = np.unique(pairs.reshape(-1), return_inverse=True)
        self._local = local.reshape(-1, 2)
        A = self.token_matrix[self._events]
        H = np.hstack([A @ encoder.table, self.pos_block[self._events]])
        self._A = A
        self._H = H
        a, b = self._local[:, 0], self._local[:, 1]
        Ha, Hb = H[a], H[b]
        return np.hstack([Ha, Hb, Ha * Hb, Ha - Hb])

    def backward(self, encoder, rows, dU):
        d = self._H.shape[1]
        a, b = self._local[:, 0], self._local[:, 1]
        Ha, Hb = self._H[a], self._H[b]
        dUa, dUb = dU[:, :d], dU[:, d:2 * d]
        dUp, dUd = dU[:, 2 * d:3 * d], dU[:, 3 * d:]
        dH = np.zeros_like(self._H)
        np.add.at(dH, a, dUa + dUp * Hb + dUd)
        np.add.at(dH, b, dUb + dUp * Ha - dUd)
        return (self._A.T @ dH[:, :self.embed_dim])


def train_joint(corpus, constraints, encoder, cfg: TrainConfig) -> JointTrainResult:
    """Train the joint model on the corpus training split.

    The last `dev_fraction` of the training documents are held out for
    model selection by PC/CP micro-F1. `constraints` may be a
    ConstraintSet, a RectifierNet, or None when lambda_cons is zero.
    Encoders flagged as trainable (see TrainableEncoder) are fine-tuned
    alongside the heads; fixed encoders are cached up front.
    """
    import random as pyrandom

    if cfg.lambda_cons > 0 and constraints is None:
        raise ConfigError("lambda_cons > 0 requires a constraint set")
    net = None
    if constraints is not None and cfg.lambda_cons > 0:
        net = constraints if isinstance(constraints, RectifierNet) \
            else constraints_to_net(constraints)

    train_docs = corpus.train_documents()
    if not train_docs:
        raise ConfigError("empty training split")
    n_dev = max(1, int(round(len(train_docs) * cfg.dev_fraction)))
    if len(train_docs) > n_dev:
        fit_docs = train_docs[:-n_dev]
        dev_docs = train_docs[-n_dev:]
    else:
        fit_docs = train_docs
        dev_docs = train_docs

    rng = pyrandom.Random(cfg.seed)
    need_z = cfg.lambda_seg > 0
    trainable = bool(getattr(encoder, "trainable", False))
    batcher = _TrainablePairBatcher() if trainable else _FrozenPairBatcher()

    pair_rows = {}   # (doc position, i, j) -> pair row
    rel_gold, z_gold = [], []
    triple_rows = []

    def row_of(pos, doc, i, j):
        key = (pos, i, j)
        row = pair_rows.get(key)
        if row is None:
            row = len(rel_gold)
            pair_rows[key] = row
            batcher.add_pair(encoder, doc, pos, i, j)
            lab = doc.pair_labels[(i, j)]
            rel_gold.append(RELATION_INDEX[lab.relation])
            if lab.same_segment is None:
                if need_z:
                    raise ConfigError(
                        f"doc {doc.id}: same_segment missing; run the segment labeler "
                        "or set lambda_seg to 0")
                z_gold.append(0.0)
            else:
                z_gold.append(1.0 if lab.same_segment else 0.0)
        return row

    for pos, doc in enumerate(fit_docs):
        for (i, j, k) in collect_triples(doc, cfg.max_triples_per_doc, rng,
                                         cfg.norel_keep_prob):
            triple_rows.append((row_of(pos, doc, i, j),
                                row_of(pos, doc, j, k),
                                row_of(pos, doc, i, k)))
    if not triple_rows:
        raise ConfigError("training split yields no event triples")

    batcher.finalize(encoder)
    rel_gold = np.array(rel_gold)
    z_gold = np.array(z_gold)
    triple_rows = np.array(triple_rows)

    dev_pairs = []
    dev_gold = []
    for doc in dev_docs:
        pairs = list(doc.ordered_pairs())
        if not pairs:
            continue
        dev_pairs.append((doc, pairs))
        dev_gold.extend(RELATION_INDEX[doc.pair_labels[pq].relation] for pq in pairs)
    dev_gold = np.array(dev_gold)

    def dev_f1(model):
        if dev_gold.size == 0:
            return 0.0
        preds = []
        for doc, pairs in dev_pairs:
            Y, _ = model.pair_scores(encoder, doc, pairs)
            preds.extend(np.argmax(Y, axis=1))
        return _micro_f1_pc_cp(np.array(preds), dev_gold)

    model = JointModel(pair_dim=encoder.pair_dim, seed=cfg.seed)
    opt_params = dict(model.params)
    if trainable:
        opt_params["encoder_table"] = encoder.table
    optimizer = AmsGrad(opt_params, cfg.lr)
    np_rng = np.random.default_rng(cfg.seed)

    def snapshot():
        state = {k: v.copy() for k, v in model.params.items()}
        if trainable:
            state["encoder_table"] = encoder.table.copy()
        return state

    best = (dev_f1(model), 0, snapshot())
    history = []
    n_triples = triple_rows.shape[0]
    for epoch in range(1, cfg.epochs + 1):
        order = np_rng.permutation(n_triples)
        epoch_loss = 0.0
        for lo in range(0, n_triples, cfg.batch_size):
            batch = triple_rows[order[lo:lo + cfg.batch_size]]
            rows = np.unique(batch.reshape(-1))
            local = np.searchsorted(rows, batch)
            U_batch = batcher.batch(encoder, rows)
            losses, grads, dU = triple_losses(
                model, net, U_batch, rel_gold[rows], z_gold[rows], local, cfg,
                want_input_grads=True)
            table_grad = batcher.backward(encoder, rows, dU)
            if table_grad is not None:
                grads["encoder_table"] = table_grad
            optimizer.step(opt_params, grads)
            epoch_loss += losses["total"] * batch.shape[0]
        score = dev_f1(model)
        history.append({"epoch": epoch, "loss": epoch_loss / n_triples, "dev_f1": score})
        if score >= best[0]:
            best = (score, epoch, snapshot())

    state = best[2]
    if trainable:
        encoder.table[...] = state.pop("encoder_table")
    model.params = state
    return JointTrainResult(model=model, dev_f1=best[0], best_epoch=best[1],
                            history=history, config=asdict(cfg))


def save_model(result_or_model, path, extra=None, encoder=None):
    """Write a model checkpoint; a trainable encoder's state rides along."""
    model = getattr(result_or_model, "model", result_or_model)
    payload = model.to_dict()
    if extra:
        payload["meta"] = extra
    if encoder is not None and getattr(encoder, "trainable", False):
        payload["encoder"] = encoder.to_dict()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_model(path) -> JointModel:
    model, _ = load_checkpoint(path)
    return model


def load_checkpoint(path):
    """Returns (model, encoder payload or None)."""
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return JointModel.from_dict(payload), payload.get("encoder")
