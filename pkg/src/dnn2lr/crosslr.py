"""Sparse logistic regression over original fields plus cross features.

The model is a flat sum of lookups: one weight per (field, value), one weight
per (cross field, value combination), plus a bias. Training happens in two
phases. Phase 1 fits the original-field weights and the bias. Phase 2 fits
cross-feature weights with phase 1's parameters frozen bit-for-bit, so adding
candidates can only ever add terms on top of the plain scorecard.

Cross-feature values are keyed by the tuple of constituent ids; a combination
never seen in training contributes exactly 0 (its weight was never created).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TrainingError
from .metrics import auc
from .network import stable_sigmoid

LR_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0)
L2_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0)


@dataclass
class LrConfig:
    """Optimizer settings shared by both logistic phases."""

    learning_rate: float = 0.1
    l2: float = 0.0001
    batch_size: int = 256
    epochs: int = 30
    patience: int = 5
    seed: int = 0

    def validate(self) -> None:
        if self.learning_rate <= 0 or self.l2 < 0 or self.batch_size < 1:
            raise ConfigError("bad logistic-regression optimizer settings")
        if self.epochs < 1 or self.patience < 1:
            raise ConfigError("epochs and patience must be at least 1")


def _normalize_fields(candidate) -> tuple[int, ...]:
    fields = tuple(getattr(candidate, "fields", candidate))
    return tuple(sorted(int(f) for f in fields))


def materialize(row_ids, fields: tuple[int, ...]) -> str:
    """Cross-feature value of one row: "field:id" pairs joined by "|".

    Fields appear in ascending order regardless of how the candidate was
    declared, so the same combination always materializes identically.
    """
    row = np.asarray(row_ids).ravel()
    return "|".join(f"{f}:{int(row[f])}" for f in sorted(int(f) for f in fields))


class SparseLrModel:
    """Lookup-sum logistic model: original fields, cross fields, bias."""

    def __init__(self, vocab_sizes: list[int]):
        if not vocab_sizes or any(v < 2 for v in vocab_sizes):
            raise ConfigError("vocab sizes must all be at least 2")
        self.vocab_sizes = [int(v) for v in vocab_sizes]
        self.field_weights = [np.zeros(v, dtype=np.float64) for v in self.vocab_sizes]
        self.bias = 0.0
        self.cross_fields: list[tuple[int, ...]] = []
        self.cross_weights: list[dict[tuple[int, ...], float]] = []

    @property
    def n_fields(self) -> int:
        return len(self.vocab_sizes)

    def _check_ids(self, ids) -> np.ndarray:
        ids = np.asarray(ids)
        if ids.ndim != 2 or ids.shape[1] != self.n_fields:
            raise ConfigError(f"expected an id matrix with {self.n_fields} columns")
        return ids

    def original_logits(self, ids) -> np.ndarray:
        """Sum of original-field lookups, bias not included."""
        ids = self._check_ids(ids)
        out = np.zeros(ids.shape[0], dtype=np.float64)
        for f in range(self.n_fields):
            out += self.field_weights[f][ids[:, f]]
        return out

    def cross_index(self, fields: tuple[int, ...]) -> int:
        fields = _normalize_fields(fields)
        try:
            return self.cross_fields.index(fields)
        except ValueError:
            raise ConfigError(f"model has no cross field {fields}") from None

    def cross_column(self, ids, which: int) -> np.ndarray:
        """Per-row logit contribution of one attached cross field."""
        ids = self._check_ids(ids)
        fields = self.cross_fields[which]
        table = self.cross_weights[which]
        sub = ids[:, list(fields)]
        return np.asarray([table.get(tuple(int(v) for v in row), 0.0) for row in sub])

    def logits(self, ids, active: list[tuple[int, ...]] | None = None) -> np.ndarray:
        """Full score: originals, then bias, then cross columns in given order."""
        out = self.original_logits(ids) + self.bias
        which = (
            range(len(self.cross_fields))
            if active is None
            else [self.cross_index(f) for f in active]
        )
        for j in which:
            out = out + self.cross_column(ids, j)
        return out

    def predict(self, ids, active: list[tuple[int, ...]] | None = None) -> np.ndarray:
        return stable_sigmoid(self.logits(ids, active=active))

    def attach_cross(self, fields: tuple[int, ...], table: dict[tuple[int, ...], float]) -> None:
        fields = _normalize_fields(fields)
        if fields in self.cross_fields:
            raise ConfigError(f"cross field {fields} attached twice")
        self.cross_fields.append(fields)
        self.cross_weights.append(dict(table))


def _check_binary(y: np.ndarray, where: str) -> None:
    if len(set(np.asarray(y, dtype=np.float64).ravel().tolist())) < 2:
        raise TrainingError(f"{where} split has a single class; AUC is undefined")


def train_phase1(
    model: SparseLrModel,
    train_ids: np.ndarray,
    train_labels: np.ndarray,
    valid_ids: np.ndarray,
    valid_labels: np.ndarray,
    config: LrConfig | None = None,
) -> list[dict]:
    """Fit original-field weights and the bias by minibatch SGD.

    Early stopping mirrors the network trainer: the snapshot with the best
    validation AUC wins, patience counts consecutive non-improvements.
    """
    config = config or LrConfig()
    config.validate()
    ids = model._check_ids(train_ids)
    y = np.asarray(train_labels, dtype=np.float64).ravel()
    y_valid = np.asarray(valid_labels, dtype=np.float64).ravel()
    _check_binary(y_valid, "validation")
    rng = np.random.default_rng(config.seed)
    best_auc = -np.inf
    best: tuple[list[np.ndarray], float] | None = None
    stall = 0
    history: list[dict] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(ids.shape[0])
        loss_sum = 0.0
        for start in range(0, ids.shape[0], config.batch_size):
            batch = order[start : start + config.batch_size]
            rows = ids[batch]
            p = stable_sigmoid(model.original_logits(rows) + model.bias)
            yb = y[batch]
            loss_sum -= float(np.sum(yb * np.log(p) + (1.0 - yb) * np.log(1.0 - p)))
            residual = (p - yb) / batch.size
            for f in range(model.n_fields):
                grad = np.bincount(
                    rows[:, f], weights=residual, minlength=model.vocab_sizes[f]
                )
                model.field_weights[f] -= config.learning_rate * (
                    grad + config.l2 * model.field_weights[f]
                )
            model.bias -= config.learning_rate * float(residual.sum())
        epoch_loss = loss_sum / ids.shape[0]
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"non-finite training loss at epoch {epoch}")
        valid_auc = auc(y_valid, model.predict(valid_ids, active=[]))
        history.append({"epoch": epoch, "train_loss": epoch_loss, "valid_auc": valid_auc})
        if valid_auc > best_auc:
            best_auc = valid_auc
            best = ([w.copy() for w in model.field_weights], model.bias)
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break
    if best is not None:
        for w, saved in zip(model.field_weights, best[0]):
            w[...] = saved
        model.bias = best[1]
    return history


def _encode_cross(train_sub: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dense codes for the distinct id-combinations present in training."""
    uniq, codes = np.unique(train_sub, axis=0, return_inverse=True)
    return uniq, codes.astype(np.int64).ravel()


def _lookup_codes(sub: np.ndarray, key_to_code: dict) -> np.ndarray:
    out = np.full(sub.shape[0], -1, dtype=np.int64)
    for i, row in enumerate(sub):
        out[i] = key_to_code.get(tuple(int(v) for v in row), -1)
    return out


def train_phase2(
    model: SparseLrModel,
    train_ids: np.ndarray,
    train_labels: np.ndarray,
    valid_ids: np.ndarray,
    valid_labels: np.ndarray,
    candidates,
    config: LrConfig | None = None,
) -> list[dict]:
    """Fit one weight table per candidate cross field, everything else frozen.

    The original-field weights and the bias are read, never written: their
    contribution enters as a fixed base logit. Cross weights start at zero,
    so an untrained candidate contributes nothing. Early stopping tracks the
    validation AUC of the full model (base plus all candidate columns).
    """
    config = config or LrConfig()
    config.validate()
    ids = model._check_ids(train_ids)
    y = np.asarray(train_labels, dtype=np.float64).ravel()
    y_valid = np.asarray(valid_labels, dtype=np.float64).ravel()
    _check_binary(y_valid, "validation")
    fields_list = [_normalize_fields(c) for c in candidates]
    if len(set(fields_list)) != len(fields_list):
        raise ConfigError("duplicate candidate cross fields")
    base_train = model.original_logits(ids) + model.bias
    valid = model._check_ids(valid_ids)
    base_valid = model.original_logits(valid) + model.bias

    uniqs: list[np.ndarray] = []
    train_codes: list[np.ndarray] = []
    valid_codes: list[np.ndarray] = []
    weights: list[np.ndarray] = []
    for fields in fields_list:
        sub = ids[:, list(fields)]
        uniq, codes = _encode_cross(sub)
        uniqs.append(uniq)
        train_codes.append(codes)
        key_to_code = {tuple(int(v) for v in row): i for i, row in enumerate(uniq)}
        valid_codes.append(_lookup_codes(valid[:, list(fields)], key_to_code))
        weights.append(np.zeros(uniq.shape[0], dtype=np.float64))

    def valid_logits() -> np.ndarray:
        out = base_valid.copy()
        for w, codes in zip(weights, valid_codes):
            out += np.where(codes >= 0, w[np.clip(codes, 0, None)], 0.0)
        return out

    rng = np.random.default_rng(config.seed)
    best_auc = -np.inf
    best: list[np.ndarray] | None = None
    stall = 0
    history: list[dict] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(ids.shape[0])
        loss_sum = 0.0
        for start in range(0, ids.shape[0], config.batch_size):
            batch = order[start : start + config.batch_size]
            logit = base_train[batch].copy()
            for w, codes in zip(weights, train_codes):
                logit += w[codes[batch]]
            p = stable_sigmoid(logit)
            yb = y[batch]
            loss_sum -= float(np.sum(yb * np.log(p) + (1.0 - yb) * np.log(1.0 - p)))
            residual = (p - yb) / batch.size
            for w, codes in zip(weights, train_codes):
                grad = np.bincount(codes[batch], weights=residual, minlength=w.size)
                w -= config.learning_rate * (grad + config.l2 * w)
        epoch_loss = loss_sum / ids.shape[0]
        if not np.isfinite(epoch_loss):
            raise TrainingError(f"non-finite training loss at epoch {epoch}")
        valid_auc = auc(y_valid, stable_sigmoid(valid_logits()))
        history.append({"epoch": epoch, "train_loss": epoch_loss, "valid_auc": valid_auc})
        if valid_auc > best_auc:
            best_auc = valid_auc
            best = [w.copy() for w in weights]
            stall = 0
        else:
            stall += 1
            if stall >= config.patience:
                break
    if best is not None:
        weights = best
    for fields, uniq, w in zip(fields_list, uniqs, weights):
        table = {tuple(int(v) for v in row): float(w[i]) for i, row in enumerate(uniq)}
        model.attach_cross(fields, table)
    return history


def tune_phase1(
    train_ids: np.ndarray,
    train_labels: np.ndarray,
    valid_ids: np.ndarray,
    valid_labels: np.ndarray,
    vocab_sizes: list[int],
    config: LrConfig | None = None,
    lr_grid: tuple[float, ...] = LR_GRID,
    l2_grid: tuple[float, ...] = L2_GRID,
) -> tuple[float, float, float]:
    """Grid-search learning rate and L2 for phase 1 by validation AUC.

    Returns (learning_rate, l2, auc). Ties keep the earliest grid point, so
    the result is deterministic for a fixed grid order.
    """
    base = config or LrConfig()
    best: tuple[float, float, float] | None = None
    for lr in lr_grid:
        for l2 in l2_grid:
            trial = LrConfig(
                learning_rate=lr,
                l2=l2,
                batch_size=base.batch_size,
                epochs=base.epochs,
                patience=base.patience,
                seed=base.seed,
            )
            model = SparseLrModel(vocab_sizes)
            history = train_phase1(
                model, train_ids, train_labels, valid_ids, valid_labels, trial
            )
            score = max(h["valid_auc"] for h in history)
            if best is None or score > best[2]:
                best = (lr, l2, score)
    assert best is not None
    return best
