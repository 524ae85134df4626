"""Interpretation inconsistency: where the network's local story disagrees
with its average story.

For sample k and field f the local weight vector is the gradient of the model
output with respect to that field's embedding. Averaging those vectors over
every sample sharing the same feature value gives the global weight vector
for that value. A field whose local and global vectors disagree (projected
onto the sample's own embedding) is being used non-additively, so it is a
candidate constituent for a cross feature.

The headline quantity is the inconsistency matrix D of shape (K, n):

    D[k, f] = ( (w_local - w_global) . e )^2          mode="scalar"
    D[k, f] = sum_j ( (w_local_j - w_global_j) e_j )^2  mode="elementwise"

The scalar reading (squared difference of the two interpretation scalars) is
the default; the elementwise reading is kept behind a flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .network import EmbeddingDnn

INCONSISTENCY_MODES = ("scalar", "elementwise")


@dataclass
class InconsistencyResult:
    """Per-sample inconsistency plus the pieces it was computed from."""

    d: np.ndarray  # (K, n) inconsistency values
    local: np.ndarray  # (K, n, m) local weight vectors
    global_table: list[np.ndarray]  # per field: (V_f, m) mean weight per value


def local_weight_matrix(
    model: EmbeddingDnn, ids: np.ndarray, space: str = "probability"
) -> np.ndarray:
    """Per-sample, per-field gradient vectors: (K, n, m)."""
    return model.embedding_gradients(ids, space=space)


def local_interpretation(
    model: EmbeddingDnn, row_ids: np.ndarray, field: int, space: str = "probability"
) -> float:
    """Contribution scalar w . e for one sample and field."""
    row = np.asarray(row_ids).reshape(1, -1)
    w = model.embedding_gradients(row, space=space)[0, field]
    e = model.embed(row)[0, field * model.embedding_dim : (field + 1) * model.embedding_dim]
    return float(w @ e)


def global_weight_table(
    local: np.ndarray, ids: np.ndarray, vocab_sizes: list[int]
) -> list[np.ndarray]:
    """Mean local weight vector per feature value.

    Values that never occur in ``ids`` keep a zero row; they are never looked
    up by expand_global, so the zeros are inert placeholders.
    """
    _, n, m = local.shape
    ids = np.asarray(ids)
    tables = []
    for f in range(n):
        sums = np.zeros((vocab_sizes[f], m), dtype=np.float64)
        np.add.at(sums, ids[:, f], local[:, f, :])
        counts = np.bincount(ids[:, f], minlength=vocab_sizes[f]).astype(np.float64)
        seen = counts > 0
        sums[seen] /= counts[seen, None]
        tables.append(sums)
    return tables


def expand_global(global_table: list[np.ndarray], ids: np.ndarray) -> np.ndarray:
    """Look the per-value means back up per sample: (K, n, m)."""
    ids = np.asarray(ids)
    k, n = ids.shape
    m = global_table[0].shape[1]
    out = np.empty((k, n, m), dtype=np.float64)
    for f in range(n):
        out[:, f, :] = global_table[f][ids[:, f]]
    return out


def inconsistency_values(
    local: np.ndarray, global_rows: np.ndarray, emb: np.ndarray, mode: str = "scalar"
) -> np.ndarray:
    """Combine local weights, per-sample global weights, and embeddings into D."""
    if mode not in INCONSISTENCY_MODES:
        raise ConfigError(f"mode must be one of {INCONSISTENCY_MODES}, got {mode!r}")
    diff = local - global_rows
    if mode == "scalar":
        return np.einsum("kfm,kfm->kf", diff, emb) ** 2
    return np.einsum("kfm,kfm->kf", diff * emb, diff * emb)


def compute_inconsistency(
    model: EmbeddingDnn,
    ids: np.ndarray,
    space: str = "probability",
    mode: str = "scalar",
) -> InconsistencyResult:
    """Full pipeline step: gradients, per-value means, then D over ``ids``.

    ``ids`` should be the validation split; the averages that define the
    global weights are taken over exactly the rows passed in.
    """
    ids = np.asarray(ids)
    local = local_weight_matrix(model, ids, space=space)
    table = global_weight_table(local, ids, model.vocab_sizes)
    global_rows = expand_global(table, ids)
    m = model.embedding_dim
    emb = model.embed(ids).reshape(ids.shape[0], model.n_fields, m)
    d = inconsistency_values(local, global_rows, emb, mode=mode)
    return InconsistencyResult(d=d, local=local, global_table=table)


def feasible_matrix(d: np.ndarray, eta: float) -> np.ndarray:
    """Boolean mask of the ceil(eta * N) largest entries of D, ties included.

    The cut value is the m-th largest entry of the flattened matrix; every
    entry >= cut is marked, so tied entries at the threshold are all kept.
    """
    if not 0.0 < eta < 1.0:
        raise ConfigError(f"eta must lie strictly between 0 and 1, got {eta}")
    d = np.asarray(d, dtype=np.float64)
    total = d.size
    if total == 0:
        raise ConfigError("empty inconsistency matrix")
    # The 1e-9 nudge keeps ceil() honest when eta * N is an exact integer
    # that float arithmetic lands a hair above (0.05 * 80000 -> 4000.0000...05).
    count = max(1, math.ceil(eta * total - 1e-9))
    flat = d.ravel()
    cut = np.partition(flat, total - count)[total - count]
    return d >= cut
