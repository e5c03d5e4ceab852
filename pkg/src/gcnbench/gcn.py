"""Two-layer graph convolutional network: forward pass, masked cross-entropy,
analytic backpropagation, and full-batch gradient-descent training.

The network computes

    Z = softmax(S @ relu(S @ X @ theta1) @ theta2)

where S is the renormalized propagation matrix, and is trained on the
cross-entropy summed over labeled rows only.  All math is float64 with
fixed accumulation order, so runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import LabelMatrix
from .graph import PropagationMatrix


@dataclass
class Hyperparams:
    """Training knobs; the defaults suit the two-layer network at desk scale."""

    lr: float = 0.2
    epochs: int = 200
    seed: int = 0
    hidden: int = 16
    weight_decay: float = 0.0

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError(f"learning rate must be >= 0, got {self.lr}")
        if self.epochs < 0:
            raise ValueError(f"epoch count must be >= 0, got {self.epochs}")
        if self.hidden < 1:
            raise ValueError(f"hidden width must be >= 1, got {self.hidden}")
        if self.weight_decay < 0:
            raise ValueError(f"weight decay must be >= 0, got {self.weight_decay}")


@dataclass
class GcnModel:
    """The two parameter matrices of the network."""

    theta1: np.ndarray
    theta2: np.ndarray

    def __post_init__(self):
        self.theta1 = np.asarray(self.theta1, dtype=np.float64)
        self.theta2 = np.asarray(self.theta2, dtype=np.float64)
        if self.theta1.ndim != 2 or self.theta2.ndim != 2:
            raise ValueError("parameter matrices must be 2-D")
        if self.theta1.shape[1] != self.theta2.shape[0]:
            raise ValueError(
                f"shape mismatch: theta1 is {self.theta1.shape}, theta2 is {self.theta2.shape}"
            )
        if not (np.isfinite(self.theta1).all() and np.isfinite(self.theta2).all()):
            raise ValueError("parameters must be finite")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.theta1.shape[0], self.theta1.shape[1], self.theta2.shape[1])


@dataclass
class ForwardCache:
    """Layer intermediates kept for backprop.

    SX = S @ X and SH1 = S @ H1 are stored alongside the activations because
    the gradient of each parameter matrix contracts against them.
    """

    A1: np.ndarray
    H1: np.ndarray
    A2: np.ndarray
    Z: np.ndarray
    SX: np.ndarray
    SH1: np.ndarray


@dataclass
class Gradients:
    g_theta1: np.ndarray
    g_theta2: np.ndarray


def init_model(L1: int, L2: int, C: int, seed: int) -> GcnModel:
    """Glorot-uniform initialization: entries in +-sqrt(6/(fan_in+fan_out))."""
    if min(L1, L2, C) < 1:
        raise ValueError(f"dimensions must be positive, got {(L1, L2, C)}")
    rng = np.random.default_rng(seed)
    lim1 = np.sqrt(6.0 / (L1 + L2))
    lim2 = np.sqrt(6.0 / (L2 + C))
    theta1 = rng.uniform(-lim1, lim1, size=(L1, L2))
    theta2 = rng.uniform(-lim2, lim2, size=(L2, C))
    return GcnModel(theta1=theta1, theta2=theta2)


def relu(x):
    """max(0, x), elementwise."""
    return np.maximum(x, 0.0)


def softmax(z, axis=-1):
    """Row probabilities e^z_i / sum_j e^z_j, computed with max-subtraction.

    The shift leaves the result mathematically unchanged and prevents
    overflow for large inputs.
    """
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def log_softmax(z, axis=-1):
    """log of softmax as a log-sum-exp composite; never takes ln of an underflowed 0."""
    z = np.asarray(z, dtype=np.float64)
    shifted = z - z.max(axis=axis, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))


def _label_array(Y) -> np.ndarray:
    return Y.Y if isinstance(Y, LabelMatrix) else np.asarray(Y, dtype=np.float64)


def forward(model: GcnModel, S: PropagationMatrix, X) -> ForwardCache:
    """Run both graph-convolution layers.

    A1 = (S @ X) @ theta1, H1 = relu(A1), A2 = (S @ H1) @ theta2,
    Z = row-softmax(A2).  The sparse product is applied first in each
    layer; that multiplication order is fixed.
    """
    X = np.asarray(X, dtype=np.float64)
    L1, _, _ = model.dims
    if X.ndim != 2 or X.shape != (S.n, L1):
        raise ValueError(f"X must be {S.n}x{L1}, got {X.shape}")
    SX = S.matmul(X)
    A1 = SX @ model.theta1
    H1 = relu(A1)
    SH1 = S.matmul(H1)
    A2 = SH1 @ model.theta2
    return ForwardCache(A1=A1, H1=H1, A2=A2, Z=softmax(A2), SX=SX, SH1=SH1)


def loss(cache: ForwardCache, Y, labeled) -> float:
    """Cross-entropy summed over labeled rows; unlabeled rows contribute nothing."""
    labeled = np.asarray(labeled, dtype=np.int64)
    if len(labeled) == 0:
        return 0.0
    y = _label_array(Y)
    log_z = log_softmax(cache.A2[labeled])
    return float(-(y[labeled] * log_z).sum())


def backward(model: GcnModel, S: PropagationMatrix, X, cache: ForwardCache, Y, labeled,
             weight_decay: float = 0.0) -> Gradients:
    """Analytic gradients of the masked cross-entropy by the chain rule.

    G2 = (Z - Y) on labeled rows and 0 elsewhere; g_theta2 = SH1^T @ G2.
    G1 = (S @ (G2 @ theta2^T)) masked by the ReLU indicator A1 > 0
    (S is symmetric, so no transpose is needed); g_theta1 = SX^T @ G1.
    With weight decay, wd * theta is added to each gradient, matching the
    objective used by train().
    """
    X = np.asarray(X, dtype=np.float64)
    L1, L2, C = model.dims
    if cache.Z.shape != (S.n, C) or cache.A1.shape != (S.n, L2) or X.shape != (S.n, L1):
        raise ValueError("cache does not match this model/graph/feature combination")
    labeled = np.asarray(labeled, dtype=np.int64)
    y = _label_array(Y)
    G2 = np.zeros_like(cache.Z)
    if len(labeled):
        G2[labeled] = cache.Z[labeled] - y[labeled]
    g_theta2 = cache.SH1.T @ G2
    G1 = S.matmul(G2 @ model.theta2.T) * (cache.A1 > 0)
    g_theta1 = cache.SX.T @ G1
    if weight_decay > 0:
        g_theta1 = g_theta1 + weight_decay * model.theta1
        g_theta2 = g_theta2 + weight_decay * model.theta2
    return Gradients(g_theta1=g_theta1, g_theta2=g_theta2)


def train(model: GcnModel, S: PropagationMatrix, X, Y, labeled,
          hp: Hyperparams) -> tuple[GcnModel, list[float]]:
    """Full-batch gradient descent: theta <- theta - lr * grad for hp.epochs steps.

    Returns the trained model (the input model is left untouched) and a
    trace of epochs+1 objective values, the initial one first.  The trace
    records the training objective, i.e. the masked cross-entropy plus the
    weight-decay penalty 0.5 * wd * (|theta1|^2 + |theta2|^2) when enabled.
    Raises if the objective ever becomes non-finite.
    """
    current = GcnModel(theta1=model.theta1.copy(), theta2=model.theta2.copy())
    wd = hp.weight_decay

    def objective(m, cache):
        value = loss(cache, Y, labeled)
        if wd > 0:
            value += 0.5 * wd * (float((m.theta1 ** 2).sum()) + float((m.theta2 ** 2).sum()))
        return value

    cache = forward(current, S, X)
    trace = [objective(current, cache)]
    if not np.isfinite(trace[0]):
        raise ValueError("training diverged: non-finite loss at epoch 0")
    for epoch in range(hp.epochs):
        grads = backward(current, S, X, cache, Y, labeled, weight_decay=wd)
        t1 = current.theta1 - hp.lr * grads.g_theta1
        t2 = current.theta2 - hp.lr * grads.g_theta2
        if not (np.isfinite(t1).all() and np.isfinite(t2).all()):
            raise ValueError(f"training diverged: non-finite parameters at epoch {epoch + 1}")
        current = GcnModel(theta1=t1, theta2=t2)
        cache = forward(current, S, X)
        trace.append(objective(current, cache))
        if not np.isfinite(trace[-1]):
            raise ValueError(f"training diverged: non-finite loss at epoch {epoch + 1}")
    return current, trace


def predict(cache: ForwardCache) -> np.ndarray:
    """Per-row argmax of Z; ties break toward the lowest class index."""
    return np.argmax(cache.Z, axis=1)
