"""Two-layer rectifier network that learns linear-inequality constraints.

The network scores a 42-dim subgraph feature vector x with

    p = sigmoid(1 - sum_k relu(w_k . x + b_k))

so p is the probability that the structure is legitimate. Each hidden
unit corresponds to one linear inequality w_k . x + b_k >= 0: an input
satisfies all learned constraints exactly when every hinge is inactive,
which pins p at its maximum sigmoid(1). Training minimizes binary
cross-entropy between p and the structure label with full-batch Adam.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .subgraphs import FEATURE_DIM, examples_to_arrays

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
PROB_CLAMP = 1e-12


def _sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class RectifierNet:
    weights: np.ndarray  # (K, dim)
    biases: np.ndarray   # (K,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        self.biases = np.asarray(self.biases, dtype=float)
        if self.weights.ndim != 2 or self.weights.shape[0] != self.biases.shape[0]:
            raise ConfigError("weight/bias shapes disagree")
        if self.weights.shape[0] < 1:
            raise ConfigError("need at least one constraint row")
        if not (np.isfinite(self.weights).all() and np.isfinite(self.biases).all()):
            raise ConfigError("non-finite parameters")

    @property
    def k(self):
        return self.weights.shape[0]

    @property
    def dim(self):
        return self.weights.shape[1]


def pre_activations(net: RectifierNet, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != net.dim:
        raise ValueError(f"expected {net.dim}-dim input, got {x.shape}")
    return x @ net.weights.T + net.biases


def forward(net: RectifierNet, x):
    """Legitimacy probability; accepts a single vector or a batch."""
    hinge = np.maximum(pre_activations(net, x), 0.0)
    p = _sigmoid(1.0 - hinge.sum(axis=-1))
    return float(p) if np.ndim(x) == 1 else p


def bce_loss(net: RectifierNet, X, t) -> float:
    p = np.clip(forward(net, X), PROB_CLAMP, 1.0 - PROB_CLAMP)
    t = np.asarray(t, dtype=float)
    return float(np.mean(-t * np.log(p) - (1.0 - t) * np.log(1.0 - p)))


def grad(net: RectifierNet, X, t, margin: float = 0.0):
    """Analytic gradients of the mean BCE loss w.r.t. (weights, biases).

    The hinge subgradient at exactly zero is taken as zero. A positive
    `margin` shifts the hinges during training only (see `train`); the
    default reproduces the plain scoring formula.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    a = pre_activations(net, X) + margin   # (N, K)
    p = _sigmoid(1.0 - np.maximum(a, 0.0).sum(axis=1))
    # dL/da_k = (t - p) on active hinges, averaged over the batch
    coeff = ((t - p)[:, None] * (a > 0.0)) / X.shape[0]
    dW = coeff.T @ X
    db = coeff.sum(axis=0)
    return dW, db


def check_structure(net: RectifierNet, x, mode: str = "hard") -> bool:
    """Constraint check for one structure.

    Each hinge measures a constraint violation, so hard mode accepts x
    exactly when every pre-activation is non-positive (all hinges dead,
    which pins forward() at its sigmoid(1) maximum). Soft mode accepts
    when the legitimacy probability reaches 0.5.
    """
    if mode == "hard":
        return bool((pre_activations(net, x) <= 0.0).all())
    if mode == "soft":
        return forward(net, x) >= 0.5
    raise ValueError(f"unknown mode {mode!r}")


def accuracy(net: RectifierNet, X, t) -> float:
    p = forward(net, np.atleast_2d(X))
    return float(np.mean((p >= 0.5) == (np.asarray(t) > 0.5)))


@dataclass
class TrainResult:
    net: RectifierNet
    heldout_accuracy: float
    best_epoch: int
    epochs_run: int
    final_train_loss: float


def train(examples, k: int = 10, lr: float = 1e-3, max_epochs: int = 1000,
          seed: int = 0, dim: int = FEATURE_DIM, batch_size: int = 128,
          margin: float = 0.25) -> TrainResult:
    """Fit the rectifier net with minibatch Adam.

    A seeded 90/10 shuffle provides an internal held-out split; the
    returned parameters are the ones with the best held-out accuracy
    (latest epoch on ties). `batch_size` <= 0 trains full-batch, which
    needs far more epochs to move the parameters anywhere useful.

    `margin` shifts the hinges inside the training surrogate only, so
    that legitimate structures end up satisfying every inequality with
    slack instead of sitting exactly on the boundary; scoring and
    checking always use the unshifted formula. Without the margin,
    hard-mode checks flap on structures whose hinge equilibrium is at
    zero.
    """
    if isinstance(examples, tuple):
        X, t = examples
        X = np.asarray(X, dtype=float)
        t = np.asarray(t, dtype=float)
    else:
        X, t = examples_to_arrays(examples)
    if X.ndim != 2 or X.shape[1] != dim:
        raise ConfigError(f"expected (n, {dim}) examples, got {X.shape}")
    classes = np.unique(t)
    if len(classes) < 2:
        raise ConfigError(
            f"training data contains a single label ({classes}); "
            "both legitimate and illegitimate structures are required")

    rng = np.random.default_rng(seed)
    order = rng.permutation(X.shape[0])
    n_held = max(1, int(round(X.shape[0] * 0.1)))
    held, kept = order[:n_held], order[n_held:]
    X_train, t_train = X[kept], t[kept]
    X_held, t_held = X[held], t[held]

    scale = 1.0 / np.sqrt(dim)
    weights = rng.uniform(-scale, scale, size=(k, dim))
    biases = np.zeros(k)
    m_w = np.zeros_like(weights); v_w = np.zeros_like(weights)
    m_b = np.zeros_like(biases); v_b = np.zeros_like(biases)

    net = RectifierNet(weights, biases)
    best = (accuracy(net, X_held, t_held), 0, weights.copy(), biases.copy())
    n_train = X_train.shape[0]
    if batch_size is None or batch_size <= 0 or batch_size > n_train:
        batch_size = n_train
    step = 0
    for epoch in range(1, max_epochs + 1):
        epoch_order = rng.permutation(n_train)
        for lo in range(0, n_train, batch_size):
            batch = epoch_order[lo:lo + batch_size]
            dW, db = grad(net, X_train[batch], t_train[batch], margin=margin)
            step += 1
            for theta, g, m, v in ((weights, dW, m_w, v_w), (biases, db, m_b, v_b)):
                m *= ADAM_BETA1; m += (1 - ADAM_BETA1) * g
                v *= ADAM_BETA2; v += (1 - ADAM_BETA2) * g * g
                m_hat = m / (1 - ADAM_BETA1 ** step)
                v_hat = v / (1 - ADAM_BETA2 ** step)
                theta -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
        acc = accuracy(net, X_held, t_held)
        if acc >= best[0]:
            best = (acc, epoch, weights.copy(), biases.copy())

    final_loss = bce_loss(net, X_train, t_train)
    best_net = RectifierNet(best[2], best[3])
    return TrainResult(net=best_net, heldout_accuracy=best[0], best_epoch=best[1],
                       epochs_run=max_epochs, final_train_loss=final_loss)


@dataclass
class ConstraintSet:
    rows: list  # of (weight vector, bias) tuples
    dim: int = FEATURE_DIM
    meta: dict = field(default_factory=dict)

    @property
    def k(self):
        return len(self.rows)


def extract_constraints(net: RectifierNet, meta: dict | None = None) -> ConstraintSet:
    rows = [(net.weights[i].copy(), float(net.biases[i])) for i in range(net.k)]
    return ConstraintSet(rows=rows, dim=net.dim, meta=dict(meta or {}))


def constraints_to_net(cons: ConstraintSet) -> RectifierNet:
    weights = np.array([w for w, _ in cons.rows], dtype=float)
    biases = np.array([b for _, b in cons.rows], dtype=float)
    return RectifierNet(weights, biases)


def save_constraints(cons: ConstraintSet, path) -> None:
    payload = {
        "k": cons.k,
        "dim": cons.dim,
        "rows": [{"w": list(map(float, w)), "b": b} for w, b in cons.rows],
        "meta": cons.meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_constraints(path) -> ConstraintSet:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    rows = [(np.array(row["w"], dtype=float), float(row["b"])) for row in payload["rows"]]
    if len(rows) != payload["k"]:
        raise ConfigError(f"constraint file announces k={payload['k']} but has {len(rows)} rows")
    return ConstraintSet(rows=rows, dim=int(payload["dim"]), meta=payload.get("meta", {}))
