"""Chebyshev-basis Kolmogorov-Arnold network with manual backpropagation.

Instead of fixed activations on learned linear weights, every edge (i, j)
of a layer carries its own learnable univariate function, parameterized as
an order-K Chebyshev expansion evaluated at tanh-squashed inputs::

    y[j] = sum_i sum_k  coeffs[i, j, k] * T_k(tanh(x[i]))

The full classifier stacks such layers with batch normalization and
inverted dropout after each hidden stage; the final layer emits two logits
(unburned, burned).  Forward and backward passes are written out by hand
so gradients can be validated against finite differences.

Numerical conventions:

- Parameters (coefficients, batch-norm state, standardization statistics)
  are stored as float32, matching the model file payload, so a save/load
  round trip is bitwise exact.
- All arithmetic is carried out in float64 after upcasting.
- Contractions use ``np.einsum`` without BLAS dispatch, which keeps
  per-sample results bitwise independent of batch composition; inference
  over tiles therefore reproduces whole-grid inference exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ModelFormatError

MODEL_MAGIC = b"CKANMODL"
MODEL_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# Chebyshev basis
# ---------------------------------------------------------------------------

def chebyshev_basis(x, degree: int) -> np.ndarray:
    """Evaluate first-kind Chebyshev polynomials T_0 .. T_degree at ``x``.

    Uses the three-term recurrence T_{k+1} = 2x T_k - T_{k-1}.  ``x`` may
    be a scalar or an array and must already lie in [-1, 1] (callers
    guarantee this via tanh squashing); the result appends one axis of
    length ``degree + 1``.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(x.shape + (degree + 1,), dtype=np.float64)
    out[..., 0] = 1.0
    if degree >= 1:
        out[..., 1] = x
    for k in range(2, degree + 1):
        out[..., k] = 2.0 * x * out[..., k - 1] - out[..., k - 2]
    return out


def chebyshev_basis_derivative(x, degree: int) -> np.ndarray:
    """d/dx of T_0 .. T_degree at ``x`` via dT_k/dx = k * U_{k-1}(x).

    U is the second-kind recurrence U_0 = 1, U_1 = 2x,
    U_{k+1} = 2x U_k - U_{k-1}.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros(x.shape + (degree + 1,), dtype=np.float64)
    if degree >= 1:
        u_prev = np.ones_like(x)  # U_0
        out[..., 1] = u_prev
        if degree >= 2:
            u = 2.0 * x  # U_1
            out[..., 2] = 2.0 * u
            for k in range(3, degree + 1):
                u_prev, u = u, 2.0 * x * u - u_prev
                out[..., k] = k * u
    return out


# ---------------------------------------------------------------------------
# Layers
# ---------------------------------------------------------------------------

class ChebyLayer:
    """One KAN layer: a grid of per-edge Chebyshev expansions.

    ``coeffs`` has shape (in_dim, out_dim, degree + 1), float32.  The
    forward pass caches tanh(x) and the basis tensor so ``backward`` can
    run without recomputation; inference callers pass ``cache=False`` to
    keep the layer read-only and thread-safe.
    """

    def __init__(self, in_dim: int, out_dim: int, degree: int, coeffs: np.ndarray | None = None):
        if degree < 1:
            raise ValueError("degree must be >= 1")
        if in_dim < 1 or out_dim < 1:
            raise ValueError("layer dimensions must be >= 1")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.degree = degree
        if coeffs is None:
            coeffs = np.zeros((in_dim, out_dim, degree + 1), dtype=np.float32)
        coeffs = np.asarray(coeffs, dtype=np.float32)
        if coeffs.shape != (in_dim, out_dim, degree + 1):
            raise ValueError(
                f"coeffs shape {coeffs.shape} != {(in_dim, out_dim, degree + 1)}"
            )
        if not np.isfinite(coeffs).all():
            raise ValueError("coefficients must be finite")
        self.coeffs = coeffs
        self._cache: tuple[np.ndarray, np.ndarray] | None = None

    @classmethod
    def initialize(cls, in_dim: int, out_dim: int, degree: int, rng: np.random.Generator) -> "ChebyLayer":
        """Uniform init in +-1/(in_dim * (degree + 1)), keeping outputs order one."""
        scale = 1.0 / (in_dim * (degree + 1))
        coeffs = rng.uniform(-scale, scale, size=(in_dim, out_dim, degree + 1))
        return cls(in_dim, out_dim, degree, coeffs.astype(np.float32))

    def forward(self, x: np.ndarray, cache: bool = True) -> np.ndarray:
        """Map a (batch, in_dim) array to (batch, out_dim)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(f"expected (batch, {self.in_dim}) input, got {x.shape}")
        t = np.tanh(x)
        basis = chebyshev_basis(t, self.degree)
        y = np.einsum("bik,iok->bo", basis, self.coeffs.astype(np.float64))
        self._cache = (t, basis) if cache else None
        return y

    def backward(self, upstream_grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (input_grad, coeff_grad) for the cached forward pass.

        input_grad has shape (batch, in_dim); coeff_grad matches
        ``self.coeffs``.  The chain rule combines dT_k = k U_{k-1} with
        d tanh(x) = 1 - tanh(x)^2.
        """
        if self._cache is None:
            raise RuntimeError("layer backward called without a cached forward pass")
        t, basis = self._cache
        grad = np.asarray(upstream_grad, dtype=np.float64)
        if grad.shape != (t.shape[0], self.out_dim):
            raise ValueError(f"upstream grad shape {grad.shape} != {(t.shape[0], self.out_dim)}")
        coeffs = self.coeffs.astype(np.float64)
        coeff_grad = np.einsum("bo,bik->iok", grad, basis)
        per_basis = np.einsum("bo,iok->bik", grad, coeffs)
        dbasis = chebyshev_basis_derivative(t, self.degree)
        input_grad = (per_basis * dbasis).sum(axis=2) * (1.0 - t * t)
        return input_grad, coeff_grad


class BatchNormState:
    """Per-feature batch normalization with running statistics.

    Train mode normalizes by the batch mean and (biased) variance and
    blends them into the running statistics with ``momentum``; inference
    normalizes by the running statistics alone.  Both modes then apply
    gamma/beta.  A variance of zero collapses to ``beta`` thanks to the
    epsilon floor.
    """

    def __init__(self, dim: int, momentum: float = 0.1, epsilon: float = 1e-5):
        if not 0.0 < momentum < 1.0:
            raise ValueError("momentum must lie in (0, 1)")
        if epsilon <= 0:
            raise ValueError("epsilon must be positive")
        self.dim = dim
        self.momentum = momentum
        self.epsilon = epsilon
        self.gamma = np.ones(dim, dtype=np.float32)
        self.beta = np.zeros(dim, dtype=np.float32)
        self.running_mean = np.zeros(dim, dtype=np.float32)
        self.running_var = np.ones(dim, dtype=np.float32)
        self._cache = None

    def forward(self, x: np.ndarray, mode: str) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ValueError(f"expected (batch, {self.dim}) input, got {x.shape}")
        gamma = self.gamma.astype(np.float64)
        beta = self.beta.astype(np.float64)
        if mode == "train":
            if x.shape[0] < 2:
                raise ValueError("train-mode batch normalization needs batch size >= 2")
            mean = x.mean(axis=0)
            var = x.var(axis=0)
            inv_std = 1.0 / np.sqrt(var + self.epsilon)
            xhat = (x - mean) * inv_std
            m = self.momentum
            self.running_mean = ((1.0 - m) * self.running_mean.astype(np.float64) + m * mean).astype(np.float32)
            self.running_var = ((1.0 - m) * self.running_var.astype(np.float64) + m * var).astype(np.float32)
            self._cache = (xhat, inv_std)
            return gamma * xhat + beta
        if mode == "infer":
            inv_std = 1.0 / np.sqrt(self.running_var.astype(np.float64) + self.epsilon)
            xhat = (x - self.running_mean.astype(np.float64)) * inv_std
            self._cache = None
            return gamma * xhat + beta
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")

    def backward(self, upstream_grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (input_grad, gamma_grad, beta_grad) for a train-mode pass."""
        if self._cache is None:
            raise RuntimeError("batch-norm backward called without a cached train-mode forward")
        xhat, inv_std = self._cache
        grad = np.asarray(upstream_grad, dtype=np.float64)
        n = xhat.shape[0]
        gamma_grad = (grad * xhat).sum(axis=0)
        beta_grad = grad.sum(axis=0)
        dxhat = grad * self.gamma.astype(np.float64)
        input_grad = (inv_std / n) * (
            n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0)
        )
        return input_grad, gamma_grad, beta_grad


def batchnorm_forward(state: BatchNormState, x: np.ndarray, mode: str) -> np.ndarray:
    return state.forward(x, mode)


def dropout(
    x: np.ndarray,
    rate: float,
    rng: np.random.Generator | None,
    mode: str,
) -> np.ndarray:
    """Inverted dropout: zero with probability ``rate``, scale survivors.

    Scaling by 1/(1 - rate) keeps the expected output equal to the input,
    so inference is the identity regardless of rate.
    """
    out, _ = dropout_with_mask(x, rate, rng, mode)
    return out


def dropout_with_mask(x, rate, rng, mode):
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must lie in [0, 1), got {rate}")
    if mode not in ("train", "infer"):
        raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
    x = np.asarray(x, dtype=np.float64)
    if mode == "infer" or rate == 0.0:
        return x, None
    if rng is None:
        raise ValueError("train-mode dropout needs a random generator")
    keep = rng.random(x.shape) >= rate
    scale = 1.0 / (1.0 - rate)
    return x * keep * scale, keep


# ---------------------------------------------------------------------------
# Full model
# ---------------------------------------------------------------------------

@dataclass
class ModelGradients:
    """Gradients from one backward pass, shaped like the parameters."""

    coeff_grads: list[np.ndarray]
    gamma_grads: list[np.ndarray]
    beta_grads: list[np.ndarray]
    input_grad: np.ndarray


class ChebyKanModel:
    """Stack of Chebyshev-KAN layers forming a two-class pixel classifier.

    The stored ``feature_means``/``feature_stds`` standardize inputs; they
    are fitted once on training data and never recomputed at inference.
    ``band_names`` records the raster bands, in order, the model expects.
    """

    def __init__(
        self,
        layer_dims: list[int],
        degree: int,
        dropout_rate: float,
        feature_means: np.ndarray,
        feature_stds: np.ndarray,
        band_names: list[str],
        seed: int,
        bn_momentum: float = 0.1,
        bn_epsilon: float = 1e-5,
        layers: list[ChebyLayer] | None = None,
        batch_norms: list[BatchNormState] | None = None,
    ):
        if len(layer_dims) < 2:
            raise ValueError("need at least an input and an output layer dimension")
        if layer_dims[-1] != 2:
            raise ValueError("final layer must emit 2 logits")
        if not 0.0 <= dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        feature_means = np.asarray(feature_means, dtype=np.float32)
        feature_stds = np.asarray(feature_stds, dtype=np.float32)
        if feature_means.shape != (layer_dims[0],) or feature_stds.shape != (layer_dims[0],):
            raise ValueError("standardization statistics must match the input width")
        if not (feature_stds > 0).all():
            raise ValueError("feature_stds must be positive")
        if len(band_names) != layer_dims[0]:
            raise ValueError("band_names must match the input width")

        self.layer_dims = list(layer_dims)
        self.degree = degree
        self.dropout_rate = float(dropout_rate)
        self.feature_means = feature_means
        self.feature_stds = feature_stds
        self.band_names = list(band_names)
        self.seed = int(seed)
        self.bn_momentum = float(bn_momentum)
        self.bn_epsilon = float(bn_epsilon)

        n_layers = len(layer_dims) - 1
        if layers is None:
            layers = [
                ChebyLayer(layer_dims[i], layer_dims[i + 1], degree) for i in range(n_layers)
            ]
        if batch_norms is None:
            batch_norms = [
                BatchNormState(layer_dims[i + 1], bn_momentum, bn_epsilon)
                for i in range(n_layers - 1)
            ]
        if len(layers) != n_layers or len(batch_norms) != n_layers - 1:
            raise ValueError("layer/batch-norm counts do not match layer_dims")
        for i, layer in enumerate(layers):
            if (layer.in_dim, layer.out_dim) != (layer_dims[i], layer_dims[i + 1]):
                raise ValueError(f"layer {i} dims do not chain with layer_dims")
        self.layers = layers
        self.batch_norms = batch_norms
        self._dropout_masks: list = []

    @classmethod
    def initialize(
        cls,
        layer_dims: list[int],
        degree: int,
        dropout_rate: float,
        feature_means: np.ndarray,
        feature_stds: np.ndarray,
        band_names: list[str],
        seed: int,
        rng: np.random.Generator,
        bn_momentum: float = 0.1,
        bn_epsilon: float = 1e-5,
    ) -> "ChebyKanModel":
        layers = [
            ChebyLayer.initialize(layer_dims[i], layer_dims[i + 1], degree, rng)
            for i in range(len(layer_dims) - 1)
        ]
        return cls(
            layer_dims,
            degree,
            dropout_rate,
            feature_means,
            feature_stds,
            band_names,
            seed,
            bn_momentum,
            bn_epsilon,
            layers=layers,
        )

    # -- forward / backward -------------------------------------------------

    def forward(
        self,
        features: np.ndarray,
        mode: str = "infer",
        rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        """Run the network; returns (batch, 2) float64 logits.

        Inference (``mode='infer'``) is a pure function of the model and
        features: no caches are written, dropout is the identity, and
        batch statistics are never recomputed.
        """
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.layer_dims[0]:
            raise ValueError(
                f"feature width {x.shape[1] if x.ndim == 2 else '?'} does not match "
                f"model input width {self.layer_dims[0]}"
            )
        caching = mode == "train"
        z = (x - self.feature_means.astype(np.float64)) / self.feature_stds.astype(np.float64)
        self._dropout_masks = []
        for i, layer in enumerate(self.layers[:-1]):
            z = layer.forward(z, cache=caching)
            z = self.batch_norms[i].forward(z, mode)
            z, mask = dropout_with_mask(z, self.dropout_rate if mode == "train" else 0.0, rng, mode)
            if caching:
                self._dropout_masks.append(mask)
        return self.layers[-1].forward(z, cache=caching)

    def backward(self, logit_grads: np.ndarray) -> ModelGradients:
        """Backpropagate loss gradients through a cached train-mode forward."""
        grad, last_coeff_grad = self.layers[-1].backward(logit_grads)
        coeff_grads = [None] * len(self.layers)
        gamma_grads = [None] * len(self.batch_norms)
        beta_grads = [None] * len(self.batch_norms)
        coeff_grads[-1] = last_coeff_grad
        for i in range(len(self.layers) - 2, -1, -1):
            mask = self._dropout_masks[i]
            if mask is not None:
                grad = grad * mask / (1.0 - self.dropout_rate)
            grad, gamma_grads[i], beta_grads[i] = self.batch_norms[i].backward(grad)
            grad, coeff_grads[i] = self.layers[i].backward(grad)
        input_grad = grad / self.feature_stds.astype(np.float64)
        return ModelGradients(coeff_grads, gamma_grads, beta_grads, input_grad)

    def predict_classes(self, features: np.ndarray) -> np.ndarray:
        """Argmax of infer-mode logits; exact ties resolve to class 0."""
        logits = self.forward(features, mode="infer")
        return (logits[:, 1] > logits[:, 0]).astype(np.int64)

    # -- parameter plumbing ---------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        """Trainable arrays in the fixed order used by the optimizer."""
        params = [layer.coeffs for layer in self.layers]
        for bn in self.batch_norms:
            params.extend([bn.gamma, bn.beta])
        return params

    def set_parameters(self, params: list[np.ndarray]) -> None:
        n_layers = len(self.layers)
        for i, layer in enumerate(self.layers):
            layer.coeffs = np.asarray(params[i], dtype=np.float32)
        for j, bn in enumerate(self.batch_norms):
            bn.gamma = np.asarray(params[n_layers + 2 * j], dtype=np.float32)
            bn.beta = np.asarray(params[n_layers + 2 * j + 1], dtype=np.float32)

    def gradient_arrays(self, grads: ModelGradients) -> list[np.ndarray]:
        arrays = list(grads.coeff_grads)
        for g, b in zip(grads.gamma_grads, grads.beta_grads):
            arrays.extend([g, b])
        return arrays

    def identifier(self) -> str:
        """Short content hash of the serialized model, used in provenance."""
        return hashlib.sha256(_serialize(self)).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Loss and optimizer
# ---------------------------------------------------------------------------

def cross_entropy_loss(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy and its gradient w.r.t. the logits.

    Gradient is (softmax - onehot) / batch, so the mean loss and the
    returned gradients are consistent.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels)
    if logits.ndim != 2 or logits.shape[1] != 2:
        raise ValueError(f"expected (batch, 2) logits, got {logits.shape}")
    if logits.shape[0] == 0:
        raise ValueError("empty batch")
    if not np.isin(labels, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    labels = labels.astype(np.int64)
    shift = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shift).sum(axis=1, keepdims=True))
    log_softmax = shift - log_norm
    n = logits.shape[0]
    loss = float(-log_softmax[np.arange(n), labels].mean())
    grad = np.exp(log_softmax)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n


@dataclass
class AdamState:
    """First/second moment buffers plus the shared step counter."""

    step: int = 0
    first: list[np.ndarray] = field(default_factory=list)
    second: list[np.ndarray] = field(default_factory=list)


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> list[np.ndarray]:
    """One Adam update with bias correction; returns the new parameters.

    Moments are kept in float64; each returned array is cast back to the
    dtype of the incoming parameter so float32 storage stays float32.
    """
    if len(params) != len(grads):
        raise ValueError("params and grads must pair up")
    if not state.first:
        state.first = [np.zeros(p.shape, dtype=np.float64) for p in params]
        state.second = [np.zeros(p.shape, dtype=np.float64) for p in params]
    state.step += 1
    t = state.step
    updated = []
    for i, (p, g) in enumerate(zip(params, grads)):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m = state.first[i] = beta1 * state.first[i] + (1.0 - beta1) * g
        v = state.second[i] = beta2 * state.second[i] + (1.0 - beta2) * g * g
        m_hat = m / (1.0 - beta1**t)
        v_hat = v / (1.0 - beta2**t)
        new_p = p.astype(np.float64) - lr * m_hat / (np.sqrt(v_hat) + eps)
        updated.append(new_p.astype(p.dtype))
    return updated


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------
#
# File layout:
#   bytes 0..7    magic "CKANMODL"
#   bytes 8..11   format version, little-endian uint32
#   bytes 12..15  header length H, little-endian uint32
#   H bytes       JSON header: layer_dims, degree, dropout_rate, band_names,
#                 seed, bn_momentum, bn_epsilon
#   rest          little-endian float32 payload, in order:
#                 feature_means, feature_stds,
#                 per hidden batch-norm: gamma, beta, running_mean, running_var,
#                 per layer: coeffs (C order, shape in x out x (degree+1))

def _serialize(model: ChebyKanModel) -> bytes:
    header = json.dumps(
        {
            "layer_dims": model.layer_dims,
            "degree": model.degree,
            "dropout_rate": model.dropout_rate,
            "band_names": model.band_names,
            "seed": model.seed,
            "bn_momentum": model.bn_momentum,
            "bn_epsilon": model.bn_epsilon,
        },
        sort_keys=True,
    ).encode("utf-8")
    chunks = [
        MODEL_MAGIC,
        np.uint32(MODEL_FORMAT_VERSION).tobytes(),
        np.uint32(len(header)).tobytes(),
        header,
        np.ascontiguousarray(model.feature_means, dtype="<f4").tobytes(),
        np.ascontiguousarray(model.feature_stds, dtype="<f4").tobytes(),
    ]
    for bn in model.batch_norms:
        for arr in (bn.gamma, bn.beta, bn.running_mean, bn.running_var):
            chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    for layer in model.layers:
        chunks.append(np.ascontiguousarray(layer.coeffs, dtype="<f4").tobytes())
    return b"".join(chunks)


def save_model(model: ChebyKanModel, path: str | Path) -> None:
    """Write the model file atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(_serialize(model))
    os.replace(tmp, path)


def load_model(path: str | Path) -> ChebyKanModel:
    """Read a model file back; inverse of :func:`save_model`."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:8] != MODEL_MAGIC:
        raise ModelFormatError(f"{path}: not a model file")
    version = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"{path}: unsupported model format version {version}")
    header_len = int(np.frombuffer(raw[12:16], dtype="<u4")[0])
    if len(raw) < 16 + header_len:
        raise ModelFormatError(f"{path}: truncated model header")
    try:
        header = json.loads(raw[16 : 16 + header_len].decode("utf-8"))
        layer_dims = [int(d) for d in header["layer_dims"]]
        degree = int(header["degree"])
        dropout_rate = float(header["dropout_rate"])
        band_names = [str(b) for b in header["band_names"]]
        seed = int(header["seed"])
        bn_momentum = float(header["bn_momentum"])
        bn_epsilon = float(header["bn_epsilon"])
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"{path}: corrupt model header: {exc}") from exc

    n_layers = len(layer_dims) - 1
    counts = [layer_dims[0], layer_dims[0]]
    counts += [layer_dims[i + 1] for i in range(n_layers - 1) for _ in range(4)]
    counts += [
        layer_dims[i] * layer_dims[i + 1] * (degree + 1) for i in range(n_layers)
    ]
    expected = 16 + header_len + 4 * sum(counts)
    if len(raw) < expected:
        raise ModelFormatError(f"{path}: truncated model payload")
    if len(raw) > expected:
        raise ModelFormatError(f"{path}: model payload too long")

    offset = 16 + header_len

    def take(n: int) -> np.ndarray:
        nonlocal offset
        arr = np.frombuffer(raw, dtype="<f4", count=n, offset=offset).copy()
        offset += 4 * n
        return arr

    feature_means = take(layer_dims[0])
    feature_stds = take(layer_dims[0])
    batch_norms = []
    for i in range(n_layers - 1):
        bn = BatchNormState(layer_dims[i + 1], bn_momentum, bn_epsilon)
        bn.gamma = take(bn.dim)
        bn.beta = take(bn.dim)
        bn.running_mean = take(bn.dim)
        bn.running_var = take(bn.dim)
        batch_norms.append(bn)
    layers = []
    for i in range(n_layers):
        shape = (layer_dims[i], layer_dims[i + 1], degree + 1)
        layers.append(
            ChebyLayer(layer_dims[i], layer_dims[i + 1], degree, take(int(np.prod(shape))).reshape(shape))
        )
    return ChebyKanModel(
        layer_dims,
        degree,
        dropout_rate,
        feature_means,
        feature_stds,
        band_names,
        seed,
        bn_momentum,
        bn_epsilon,
        layers=layers,
        batch_norms=batch_norms,
    )
