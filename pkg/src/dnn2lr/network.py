"""Embedding network over categorical fields, with input-gradient readout.

Each field owns an embedding table; a row embeds as the concatenation of its
per-field vectors, which feeds a ReLU multilayer perceptron with either a
sigmoid output (binary classification, cross-entropy loss) or an identity
output (regression, squared-error loss). Everything is float64 numpy.

The model exposes d(output)/d(embedding) per sample and field, which is what
the inconsistency analysis consumes. The gradient can be taken on the
probability or on the logit; for identity-output networks the two coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import UNSEEN_ID
from .errors import ConfigError, EncodingError, IngestionError, TrainingError
from .metrics import auc

ALLOWED_BATCH_SIZES = (256, 512, 1024, 4096)
GRADIENT_SPACES = ("probability", "logit")

OUTPUT_SIGMOID = "sigmoid"
OUTPUT_IDENTITY = "identity"

_PROB_FLOOR = 1e-12


def stable_sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _PROB_FLOOR, 1.0 - _PROB_FLOOR)


@dataclass
class TrainConfig:
    """Optimizer settings for the embedding network."""

    learning_rate: float = 0.001
    l2: float = 0.0001
    batch_size: int = 256
    epochs: int = 30
    patience: int = 5
    seed: int = 0

    def validate(self) -> None:
        if self.batch_size not in ALLOWED_BATCH_SIZES:
            raise ConfigError(
                f"batch_size must be one of {ALLOWED_BATCH_SIZES}, got {self.batch_size}"
            )
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.l2 < 0:
            raise ConfigError("l2 must be non-negative")
        if self.epochs < 1 or self.patience < 1:
            raise ConfigError("epochs and patience must be at least 1")


class EmbeddingDnn:
    """Concatenated per-field embeddings feeding a ReLU MLP."""

    def __init__(
        self,
        vocab_sizes: list[int],
        embedding_dim: int = 10,
        hidden: tuple[int, ...] = (400, 100),
        output: str = OUTPUT_SIGMOID,
        seed: int = 0,
    ):
        if output not in (OUTPUT_SIGMOID, OUTPUT_IDENTITY):
            raise ConfigError(f"unknown output mode {output!r}")
        if embedding_dim < 1 or any(v < 2 for v in vocab_sizes) or not vocab_sizes:
            raise ConfigError("need embedding_dim >= 1 and vocab sizes >= 2")
        self.vocab_sizes = [int(v) for v in vocab_sizes]
        self.embedding_dim = int(embedding_dim)
        self.hidden = tuple(int(h) for h in hidden)
        self.output = output
        rng = np.random.default_rng(seed)
        self.embeddings = [
            rng.uniform(-0.05, 0.05, size=(v, self.embedding_dim)) for v in self.vocab_sizes
        ]
        for table in self.embeddings:
            table[UNSEEN_ID, :] = 0.0  # unseen values must contribute nothing
        dims = [self.input_dim, *self.hidden, 1]
        self.weights = [
            rng.normal(0.0, np.sqrt(2.0 / dims[i]), size=(dims[i], dims[i + 1]))
            for i in range(len(dims) - 1)
        ]
        self.biases = [np.zeros(dims[i + 1]) for i in range(len(dims) - 1)]

    @classmethod
    def additive(
        cls,
        vocab_sizes: list[int],
        embedding_dim: int = 4,
        field_units: tuple[int, ...] = (8, 4),
        output: str = OUTPUT_SIGMOID,
        seed: int = 0,
    ) -> "EmbeddingDnn":
        """Build a network that is additive across fields by construction.

        Hidden weights are block-diagonal: field f's embedding only reaches
        field f's slice of each hidden layer, and the output layer sums the
        per-field subnetworks. Such a model cannot express any cross-field
        interaction, which makes it the canonical zero-inconsistency case.
        """
        n = len(vocab_sizes)
        hidden = tuple(n * u for u in field_units)
        model = cls(vocab_sizes, embedding_dim, hidden, output=output, seed=seed)
        per_field_in = [embedding_dim, *field_units[:-1]]
        for layer, out_units in enumerate(field_units):
            mask = np.zeros_like(model.weights[layer])
            size_in = per_field_in[layer]
            for f in range(n):
                mask[f * size_in : (f + 1) * size_in, f * out_units : (f + 1) * out_units] = 1.0
            model.weights[layer] *= mask
        return model

    @property
    def n_fields(self) -> int:
        return len(self.vocab_sizes)

    @property
    def input_dim(self) -> int:
        return self.n_fields * self.embedding_dim

    # ------------------------------------------------------------------ #
    # forward passes

    def _check_ids(self, ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(ids)
        if ids.ndim != 2 or ids.shape[1] != self.n_fields:
            raise EncodingError(f"expected an id matrix with {self.n_fields} columns")
        for f, size in enumerate(self.vocab_sizes):
            column = ids[:, f]
            if column.size and (column.min() < 0 or column.max() >= size):
                raise EncodingError(f"field {f}: id outside [0, {size})")
        return ids.astype(np.int64, copy=False)

    def embed(self, ids: np.ndarray) -> np.ndarray:
        """Concatenate per-field embedding rows: (B, n) ids -> (B, n*m)."""
        ids = self._check_ids(ids)
        m = self.embedding_dim
        x = np.empty((ids.shape[0], self.input_dim), dtype=np.float64)
        for f in range(self.n_fields):
            x[:, f * m : (f + 1) * m] = self.embeddings[f][ids[:, f]]
        return x

    def forward_embedded(self, x: np.ndarray) -> np.ndarray:
        """Run the MLP head on pre-embedded inputs (used by gradient checks)."""
        a = np.asarray(x, dtype=np.float64)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < last:
                a = np.maximum(a, 0.0)
        z = a[:, 0]
        return stable_sigmoid(z) if self.output == OUTPUT_SIGMOID else z

    def _forward_cache(self, ids: np.ndarray):
        x = self.embed(ids)
        pre: list[np.ndarray] = []
        post: list[np.ndarray] = [x]
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w + b
            pre.append(z)
            a = np.maximum(z, 0.0) if i < last else z
            post.append(a)
        z_out = pre[-1][:, 0]
        y_hat = stable_sigmoid(z_out) if self.output == OUTPUT_SIGMOID else z_out
        return y_hat, x, pre, post

    def forward(self, ids: np.ndarray, batch_size: int = 8192) -> np.ndarray:
        """Model output per row: probabilities in (0, 1), or raw regression values."""
        ids = self._check_ids(ids)
        chunks = []
        for start in range(0, ids.shape[0], batch_size):
            y_hat, *_ = self._forward_cache(ids[start : start + batch_size])
            chunks.append(y_hat)
        if not chunks:
            return np.empty(0, dtype=np.float64)
        return np.concatenate(chunks)

    # ------------------------------------------------------------------ #
    # gradients

    def embedding_gradients(
        self, ids: np.ndarray, space: str = "probability", batch_size: int = 4096
    ) -> np.ndarray:
        """d(output)/d(embedding) per sample and field: returns (B, n, m).

        space="probability" differentiates the sigmoid output; space="logit"
        stops at the pre-sigmoid score. Identity-output networks return the
        same thing for both.
        """
        if space not in GRADIENT_SPACES:
            raise ConfigError(f"gradient space must be one of {GRADIENT_SPACES}, got {space!r}")
        ids = self._check_ids(ids)
        total = ids.shape[0]
        out = np.empty((total, self.n_fields, self.embedding_dim), dtype=np.float64)
        for start in range(0, total, batch_size):
            part = ids[start : start + batch_size]
            y_hat, x, pre, _post = self._forward_cache(part)
            if self.output == OUTPUT_SIGMOID and space == "probability":
                delta = (y_hat * (1.0 - y_hat))[:, None]
            else:
                delta = np.ones((part.shape[0], 1), dtype=np.float64)
            for i in range(len(self.weights) - 1, 0, -1):
                delta = delta @ self.weights[i].T
                delta *= pre[i - 1] > 0
            dx = delta @ self.weights[0].T
            out[start : start + part.shape[0]] = dx.reshape(
                part.shape[0], self.n_fields, self.embedding_dim
            )
        return out

    # ------------------------------------------------------------------ #
    # parameter plumbing

    def _parameters(self) -> list[np.ndarray]:
        return [*self.embeddings, *self.weights, *self.biases]

    def _decay_flags(self) -> list[bool]:
        # L2 applies to embeddings and weights, never to biases.
        return [True] * (len(self.embeddings) + len(self.weights)) + [False] * len(self.biases)

    def snapshot(self) -> list[np.ndarray]:
        return [p.copy() for p in self._parameters()]

    def restore(self, saved: list[np.ndarray]) -> None:
        for p, s in zip(self._parameters(), saved):
            p[...] = s


def _batch_gradients(model: EmbeddingDnn, ids: np.ndarray, y: np.ndarray):
    """Mean data-loss gradients for one minibatch, plus the mean loss value."""
    y_hat, x, pre, post = model._forward_cache(ids)
    k = ids.shape[0]
    if model.output == OUTPUT_SIGMOID:
        loss = float(-np.mean(y * np.log(y_hat) + (1.0 - y) * np.log(1.0 - y_hat)))
        delta = ((y_hat - y) / k)[:, None]  # d(mean BCE)/d(logit)
    else:
        diff = y_hat - y
        loss = float(np.mean(diff * diff))
        delta = (2.0 * diff / k)[:, None]
    grads_w = [np.empty(0)] * len(model.weights)
    grads_b = [np.empty(0)] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = post[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (pre[i - 1] > 0)
    dx = delta @ model.weights[0].T
    m = model.embedding_dim
    grads_e = []
    for f in range(model.n_fields):
        g = np.zeros_like(model.embeddings[f])
        np.add.at(g, ids[:, f], dx[:, f * m : (f + 1) * m])
        grads_e.append(g)
    return loss, [*grads_e, *grads_w, *grads_b]


def train(
    model: EmbeddingDnn,
    train_ids: np.ndarray,
    train_labels: np.ndarray,
    valid_ids: np.ndarray,
    valid_labels: np.ndarray,
    config: TrainConfig | None = None,
) -> list[dict]:
    """Adam with minibatches, early stopping on the validation metric.

    Classification tracks validation AUC (higher is better); regression tracks
    validation MSE (lower is better). The parameters giving the best metric
    are kept: after training returns, the model holds that snapshot, not the
    last epoch. Returns one history row per epoch with train_loss and
    valid_metric.
    """
    config = config or TrainConfig()
    config.validate()
    ids = model._check_ids(train_ids)
    y = np.asarray(train_labels, dtype=np.float64).ravel()
    y_valid = np.asarray(valid_labels, dtype=np.float64).ravel()
    if ids.shape[0] != y.size:
        raise TrainingError("train ids and labels disagree in length")
    if model.output == OUTPUT_SIGMOID and len(set(y_valid.tolist())) < 2:
        raise TrainingError("validation split has a single class; AUC is undefined")

    params = model._parameters()
    decay = model._decay_flags()
    m_state = [np.zeros_like(p) for p in params]
    v_state = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    rng = np.random.default_rng(config.seed)
    history: list[dict] = []
    best_score = -np.inf
    best_params: list[np.ndarray] | None = None
    stall = 0

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(ids.shape[0])
        loss_sum = 0.0
        for start in range(0, ids.shape[0], config.batch_size):
            batch = order[start : start + config.batch_size]
            loss, grads = _batch_gradients(model, ids[batch], y[batch])
            loss_sum += loss * batch.size
            step += 1
            correct1 = 1.0 - beta1**step
            correct2 = 1.0 - beta2**step
            for p, g, mm, vv, dec in zip(params, grads, m_state, v_state, decay):
                if dec and config.l2 > 0.0:
                    g = g + config.l2 * p
                mm *= beta1
                mm += (1.0 - beta1) * g
                vv *= beta2
                vv += (1.0 - beta2) * g * g
                p -= config.learning_rate * (mm / correct1) / (np.sqrt(vv / correct2) + eps)
        epoch_loss = loss_sum / ids.shape[0]
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"non-finite training loss at epoch {epoch}")
        valid_out = model.forward(valid_ids)
        if model.output == OUTPUT_SIGMOID:
            metric = auc(y_valid, valid_out)
            score = metric
        else:
            metric = float(np.mean((valid_out - y_valid) ** 2))
            score = -metric
        history.append({"epoch": epoch, "train_loss": epoch_loss, "valid_metric": metric})
        if score > best_score:
            best_score = score
            best_params = model.snapshot()
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break
    if best_params is not None:
        model.restore(best_params)
    return history


# ---------------------------------------------------------------------- #
# binary model file: int64 header (n, m, vocab sizes, layer dims, output
# flag), then float64 blocks for embeddings and per-layer weights/biases.
# Everything little-endian.

_OUTPUT_FLAGS = {OUTPUT_SIGMOID: 0, OUTPUT_IDENTITY: 1}


def save_model(model: EmbeddingDnn, path) -> None:
    dims = [model.input_dim, *model.hidden, 1]
    header = [
        model.n_fields,
        model.embedding_dim,
        *model.vocab_sizes,
        len(dims),
        *dims,
        _OUTPUT_FLAGS[model.output],
    ]
    blocks = [np.asarray(header, dtype="<i8").tobytes()]
    for table in model.embeddings:
        blocks.append(table.astype("<f8").tobytes())
    for w, b in zip(model.weights, model.biases):
        blocks.append(w.astype("<f8").tobytes())
        blocks.append(b.astype("<f8").tobytes())
    with open(path, "wb") as handle:
        handle.write(b"".join(blocks))


def load_model(path) -> EmbeddingDnn:
    with open(path, "rb") as handle:
        raw = handle.read()
    ints = np.frombuffer(raw, dtype="<i8")
    if ints.size < 2:
        raise IngestionError(f"{path}: truncated model file")
    n, m = int(ints[0]), int(ints[1])
    cursor = 2
    if ints.size < cursor + n + 1:
        raise IngestionError(f"{path}: truncated model file")
    vocab_sizes = [int(v) for v in ints[cursor : cursor + n]]
    cursor += n
    n_dims = int(ints[cursor])
    cursor += 1
    if ints.size < cursor + n_dims + 1:
        raise IngestionError(f"{path}: truncated model file")
    dims = [int(d) for d in ints[cursor : cursor + n_dims]]
    cursor += n_dims
    flag = int(ints[cursor])
    cursor += 1
    output = {v: k for k, v in _OUTPUT_FLAGS.items()}.get(flag)
    if output is None or dims[0] != n * m or dims[-1] != 1:
        raise IngestionError(f"{path}: inconsistent model header")
    model = EmbeddingDnn(vocab_sizes, m, tuple(dims[1:-1]), output=output, seed=0)
    floats = np.frombuffer(raw, dtype="<f8", offset=cursor * 8)
    expected = sum(p.size for p in model._parameters())
    if floats.size != expected:
        raise IngestionError(
            f"{path}: parameter block holds {floats.size} values, expected {expected}"
        )
    at = 0
    for f in range(n):
        size = vocab_sizes[f] * m
        model.embeddings[f][...] = floats[at : at + size].reshape(vocab_sizes[f], m)
        at += size
    for i in range(len(dims) - 1):
        size = dims[i] * dims[i + 1]
        model.weights[i][...] = floats[at : at + size].reshape(dims[i], dims[i + 1])
        at += size
        model.biases[i][...] = floats[at : at + dims[i + 1]]
        at += dims[i + 1]
    return model
