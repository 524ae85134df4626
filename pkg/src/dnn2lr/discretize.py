"""Equal-frequency binning of numerical fields.

A numerical column is turned into categorical bin labels "b0", "b1", ... by
cut points fitted on the training split. The bin index of a value v is the
number of cut points strictly below v, so a value sitting exactly on a cut
falls in the lower bin. Missing values stay missing and become their own
category downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MISSING, escape, unescape
from .errors import DiscretizationError, IngestionError, UndefinedMetricError
from .metrics import auc

GRANULARITIES = (10, 100, 1000)


@dataclass(frozen=True)
class BinEdges:
    """Fitted cut points for one field at one granularity."""

    field: int
    granularity: int
    cuts: tuple[float, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.cuts, self.cuts[1:])):
            raise DiscretizationError(f"field {self.field}: cuts must be strictly increasing")

    def n_bins(self) -> int:
        return len(self.cuts) + 1


def parse_numeric(cells: list[str], field_name: str = "") -> np.ndarray:
    """Convert raw cells to floats; empty cells become NaN."""
    out = np.empty(len(cells), dtype=np.float64)
    for i, cell in enumerate(cells):
        text = cell.strip()
        if text == MISSING:
            out[i] = np.nan
            continue
        try:
            out[i] = float(text)
        except ValueError:
            label = field_name or "numerical field"
            raise IngestionError(f"{label}: cannot parse {cell!r} as a number") from None
    return out


def fit_equal_frequency(values: np.ndarray, granularity: int, field: int = 0) -> BinEdges:
    """Fit up to granularity-1 cut points at the empirical quantiles i/g.

    Duplicate quantiles collapse, so heavily repeated values produce fewer,
    wider bins instead of empty ones. A column with fewer than two distinct
    observed values gets no cuts at all (single bin).
    """
    if granularity < 2:
        raise DiscretizationError(f"granularity must be >= 2, got {granularity}")
    values = np.asarray(values, dtype=np.float64)
    observed = values[~np.isnan(values)]
    if observed.size == 0:
        raise DiscretizationError(f"field {field}: all values missing, cannot bin")
    if np.unique(observed).size < 2:
        return BinEdges(field=field, granularity=granularity, cuts=())
    probs = np.arange(1, granularity) / granularity
    cuts = np.unique(np.quantile(observed, probs))
    return BinEdges(field=field, granularity=granularity, cuts=tuple(float(c) for c in cuts))


def bin_index(edges: BinEdges, values: np.ndarray) -> np.ndarray:
    """Bin index per value: the count of cuts strictly below it. NaN -> -1."""
    values = np.asarray(values, dtype=np.float64)
    cuts = np.asarray(edges.cuts, dtype=np.float64)
    idx = np.searchsorted(cuts, values, side="left").astype(np.int64)
    idx[np.isnan(values)] = -1
    return idx


def apply_edges(edges: BinEdges, values: np.ndarray) -> list[str]:
    """Render values as bin labels; NaN renders as the missing marker."""
    idx = bin_index(edges, values)
    return [MISSING if i < 0 else f"b{i}" for i in idx]


def _single_field_valid_auc(
    train_codes: np.ndarray,
    train_labels: np.ndarray,
    valid_codes: np.ndarray,
    valid_labels: np.ndarray,
    n_codes: int,
) -> float:
    # One weight per bin plus a bias, fitted by full-batch gradient descent.
    # Deterministic on purpose: zero init, fixed step count, no shuffling.
    w = np.zeros(n_codes)
    b = 0.0
    y = np.asarray(train_labels, dtype=np.float64)
    k = y.size
    for _ in range(300):
        z = w[train_codes] + b
        p = 1.0 / (1.0 + np.exp(-z))
        residual = p - y
        grad_w = np.bincount(train_codes, weights=residual, minlength=n_codes) / k
        w -= 0.5 * (grad_w + 1e-6 * w)
        b -= 0.5 * float(residual.mean())
    scores = w[valid_codes] + b
    try:
        return auc(valid_labels, scores)
    except UndefinedMetricError:
        return 0.5


def select_granularity(
    train_values: np.ndarray,
    train_labels: np.ndarray,
    valid_values: np.ndarray,
    valid_labels: np.ndarray,
    field: int = 0,
    candidates: tuple[int, ...] = GRANULARITIES,
) -> tuple[int, BinEdges]:
    """Pick the granularity whose binned single-field model scores best.

    For each candidate g the column is binned, a one-field logistic model is
    fitted on the training split, and validation AUC decides. Ties go to the
    smallest granularity (candidates are scanned in increasing order and only
    a strictly better AUC replaces the incumbent).
    """
    best: tuple[int, BinEdges] | None = None
    best_auc = -np.inf
    for g in sorted(candidates):
        edges = fit_equal_frequency(train_values, g, field=field)
        # Missing values get their own trailing code.
        missing_code = edges.n_bins()
        tr = bin_index(edges, train_values)
        va = bin_index(edges, valid_values)
        tr = np.where(tr < 0, missing_code, tr)
        va = np.where(va < 0, missing_code, va)
        score = _single_field_valid_auc(tr, train_labels, va, valid_labels, missing_code + 1)
        if score > best_auc:
            best = (g, edges)
            best_auc = score
    assert best is not None
    return best


def save_edges(path, edges_by_name: dict[str, BinEdges]) -> None:
    """Persist fitted cuts as TSV lines ``field<TAB>g<TAB>cut1,cut2,...``."""
    with open(path, "w", encoding="utf-8") as handle:
        for name, edges in edges_by_name.items():
            cuts = ",".join(repr(float(c)) for c in edges.cuts)
            handle.write(f"{escape(name)}\t{edges.granularity}\t{cuts}\n")


def load_edges(path, name_to_index: dict[str, int]) -> dict[str, BinEdges]:
    out: dict[str, BinEdges] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise IngestionError(f"{path}: line {lineno}: expected 3 columns")
            name = unescape(parts[0])
            if name not in name_to_index:
                raise IngestionError(f"{path}: line {lineno}: unknown field {name!r}")
            cuts = tuple(float(c) for c in parts[2].split(",")) if parts[2] else ()
            out[name] = BinEdges(field=name_to_index[name], granularity=int(parts[1]), cuts=cuts)
    return out
