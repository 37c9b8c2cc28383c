"""Dense feed-forward binary classifier trained with backpropagation and Adam.

Dropout is inverted: in train mode kept activations are scaled by
1/(1 - rate), so infer mode uses the weights as they are. Each layer's
``dropout_rate`` applies to that layer's input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

EPS_CLIP = 1e-7
ACTIVATIONS = ("relu", "sigmoid")


@dataclass(frozen=True)
class LayerSpec:
    units: int
    activation: str = "relu"
    dropout_rate: float = 0.0
    l2_lambda: float = 0.0

    def __post_init__(self):
        if self.units < 1:
            raise ValueError("units must be positive")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be >= 0")


def reference_layers(hidden: int = 16, dropout: float = 0.3, l2: float = 0.0) -> list[LayerSpec]:
    """One relu hidden layer between two dropout layers, then a sigmoid unit."""
    return [LayerSpec(hidden, "relu", dropout, l2), LayerSpec(1, "sigmoid", dropout, l2)]


def deep_layers(depth: int = 10, units: int = 64, dropout: float = 0.3, l2: float = 0.0) -> list[LayerSpec]:
    """Approximation of a many-layer comparison net (10 x 64 relu by default)."""
    hidden = [LayerSpec(units, "relu", dropout if i == 0 else 0.0, l2) for i in range(depth)]
    return hidden + [LayerSpec(1, "sigmoid", dropout, l2)]


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class Network:
    """Weights are stored as (fan_in, fan_out) matrices, one per layer."""

    def __init__(self, n_inputs: int, layers: Sequence[LayerSpec], seed: int = 0):
        layers = list(layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        if layers[-1].units != 1 or layers[-1].activation != "sigmoid":
            raise ValueError("output layer must have 1 sigmoid unit")
        if n_inputs < 1:
            raise ValueError("n_inputs must be positive")
        self.n_inputs = n_inputs
        self.layers = layers
        self.seed = seed
        rng = np.random.default_rng(seed)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        fan_in = n_inputs
        for spec in layers:
            limit = math.sqrt(6.0 / fan_in)
            self.weights.append(rng.uniform(-limit, limit, size=(fan_in, spec.units)))
            self.biases.append(np.zeros(spec.units))
            fan_in = spec.units

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def l2_penalty(self) -> float:
        return float(sum(s.l2_lambda * np.sum(w * w) for s, w in zip(self.layers, self.weights)))

    def copy(self) -> "Network":
        other = object.__new__(Network)
        other.n_inputs, other.layers, other.seed = self.n_inputs, list(self.layers), self.seed
        other.weights = [w.copy() for w in self.weights]
        other.biases = [b.copy() for b in self.biases]
        return other


@dataclass
class ForwardCache:
    inputs: list[np.ndarray]   # layer inputs after dropout
    masks: list[np.ndarray | None]
    pre: list[np.ndarray]      # pre-activations
    p: np.ndarray


def _as_batch(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != net.n_inputs:
        raise ValueError(f"expected {net.n_inputs} input columns, got shape {x.shape}")
    return x


def forward(net: Network, x, mode: str = "infer", rng: np.random.Generator | None = None):
    """Return (probabilities of shape (n,), cache)."""
    if mode not in ("train", "infer"):
        raise ValueError("mode must be 'train' or 'infer'")
    a = _as_batch(net, x)
    inputs, masks, pre = [], [], []
    for spec, w, b in zip(net.layers, net.weights, net.biases):
        mask = None
        if mode == "train" and spec.dropout_rate > 0:
            if rng is None:
                raise ValueError("train mode with dropout needs an rng")
            keep = 1.0 - spec.dropout_rate
            mask = (rng.random(a.shape) < keep) / keep
            a = a * mask
        inputs.append(a)
        masks.append(mask)
        z = a @ w + b
        pre.append(z)
        a = np.maximum(z, 0.0) if spec.activation == "relu" else sigmoid(z)
    p = a[:, 0]
    return p, ForwardCache(inputs, masks, pre, p)


def binary_cross_entropy(p, y, net: Network | None = None) -> float:
    """Mean log-loss with probabilities clipped to [1e-7, 1 - 1e-7], plus the L2 penalty."""
    p = np.clip(np.asarray(p, dtype=float), EPS_CLIP, 1.0 - EPS_CLIP)
    y = np.asarray(y, dtype=float)
    loss = float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log1p(-p))))
    return loss + (net.l2_penalty() if net is not None else 0.0)


def backward(net: Network, cache: ForwardCache | None, y) -> list[np.ndarray]:
    """Gradients of ``binary_cross_entropy(p, y, net)``, ordered like ``net.params``."""
    if cache is None:
        raise ValueError("backward needs the cache of a forward call")
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    dz = ((cache.p - y) / n).reshape(-1, 1)
    grads: list[np.ndarray] = []
    for i in range(len(net.layers) - 1, -1, -1):
        spec, w = net.layers[i], net.weights[i]
        dw = cache.inputs[i].T @ dz + 2.0 * spec.l2_lambda * w
        db = dz.sum(axis=0)
        grads = [dw, db] + grads
        if i == 0:
            break
        da = dz @ w.T
        if cache.masks[i] is not None:
            da = da * cache.masks[i]
        z_prev = cache.pre[i - 1]
        if net.layers[i - 1].activation == "relu":
            dz = da * (z_prev > 0)
        else:
            s = sigmoid(z_prev)
            dz = da * s * (1.0 - s)
    return grads


@dataclass
class AdamState:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> list[np.ndarray]:
    """Update ``params`` in place with bias-corrected Adam and return them."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1, c2 = 1.0 - b1 ** state.t, 1.0 - b2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return params


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 128
    validation_fraction: float = 0.2
    seed: int = 0
    patience: int | None = 10
    learning_rate: float = 0.001

    def __post_init__(self):
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")


@dataclass
class TrainHistory:
    epoch: list[int] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    train_acc: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    best_epoch: int = 0
    n_update: int = 0
    n_validation: int = 0

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w") as fh:
            fh.write("epoch,train_loss,val_loss,train_acc,val_acc\n")
            for row in zip(self.epoch, self.train_loss, self.val_loss, self.train_acc, self.val_acc):
                fh.write(",".join([str(row[0])] + [repr(float(v)) for v in row[1:]]) + "\n")


def _evaluate(net: Network, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    if len(y) == 0:
        return math.nan, math.nan
    p, _ = forward(net, x)
    return binary_cross_entropy(p, y, net), float(np.mean((p >= 0.5) == (y == 1)))


def validation_split(n: int, fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded (update_idx, validation_idx) partition of ``n`` rows."""
    n_val = int(round(fraction * n))
    perm = np.random.default_rng([seed, 1]).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def train(net: Network, x, y, cfg: TrainConfig = TrainConfig()) -> tuple[Network, TrainHistory]:
    """Mini-batch Adam on ``net`` (modified in place); validation rows never update weights.

    With ``patience`` set and a validation partition, training stops after
    that many epochs without a lower validation loss and the best weights
    are restored.
    """
    x = _as_batch(net, x)
    y = np.asarray(y, dtype=float).reshape(-1)
    upd, val = validation_split(len(y), cfg.validation_fraction, cfg.seed)
    if upd.size == 0:
        raise ValueError("empty training partition")
    xu, yu, xv, yv = x[upd], y[upd], x[val], y[val]
    rng = np.random.default_rng([cfg.seed, 2])
    state = AdamState(learning_rate=cfg.learning_rate)
    hist = TrainHistory(n_update=len(upd), n_validation=len(val))
    best_loss, best, stale = math.inf, None, 0
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(yu))
        for start in range(0, len(order), cfg.batch_size):
            b = order[start:start + cfg.batch_size]
            _, cache = forward(net, xu[b], "train", rng)
            adam_step(state, net.params, backward(net, cache, yu[b]))
        tl, ta = _evaluate(net, xu, yu)
        vl, va = _evaluate(net, xv, yv)
        hist.epoch.append(epoch)
        hist.train_loss.append(tl)
        hist.train_acc.append(ta)
        hist.val_loss.append(vl)
        hist.val_acc.append(va)
        if cfg.patience is None or not len(val):
            continue
        if vl < best_loss:
            best_loss, best, stale = vl, net.copy(), 0
            hist.best_epoch = epoch
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    if best is not None:
        net.weights, net.biases = best.weights, best.biases
    else:
        hist.best_epoch = hist.epoch[-1]
    return net, hist


def predict_proba(net: Network, x) -> np.ndarray:
    p, _ = forward(net, x, "infer")
    return p


# -- persistence ---------------------------------------------------------------

def save_network(net: Network, path: str | Path) -> None:
    """Plain-text model: header, one ``layer`` line per layer, then row-major values."""
    lines = ["hoopcast-network 1", f"inputs {net.n_inputs}", f"seed {net.seed}",
             f"layers {len(net.layers)}"]
    for s in net.layers:
        lines.append(f"layer {s.units} {s.activation} {s.dropout_rate!r} {s.l2_lambda!r}")
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"weights {i} {w.shape[0]} {w.shape[1]}")
        lines.append(" ".join(repr(float(v)) for v in w.ravel()))
        lines.append(f"bias {i} {b.shape[0]}")
        lines.append(" ".join(repr(float(v)) for v in b))
    Path(path).write_text("\n".join(lines) + "\n")


def load_network(path: str | Path) -> Network:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != "hoopcast-network 1":
        raise ValueError(f"{path}: not a hoopcast network file")
    it = iter(lines[1:])
    n_inputs = int(next(it).split()[1])
    seed = int(next(it).split()[1])
    n_layers = int(next(it).split()[1])
    specs = []
    for _ in range(n_layers):
        _, units, act, rate, lam = next(it).split()
        specs.append(LayerSpec(int(units), act, float(rate), float(lam)))
    net = Network(n_inputs, specs, seed=seed)
    for i in range(n_layers):
        _, _, rows, cols = next(it).split()
        net.weights[i] = np.array(next(it).split(), dtype=float).reshape(int(rows), int(cols))
        _, _, size = next(it).split()
        net.biases[i] = np.array(next(it).split(), dtype=float).reshape(int(size))
    return net
