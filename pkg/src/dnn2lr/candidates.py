"""Candidate cross fields: counting co-occurring high-inconsistency fields.

Each validation sample contributes every subset (order 2 to 4) of its feasible
fields; subsets are counted across samples and the most frequent ones become
the candidate set handed to the logistic phase. This collapses the raw
combinatorial space (choose(n, 2..4)) to a shortlist whose size is ruled by
epsilon, conventionally a small multiple of n.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConfigError, IngestionError

MIN_ORDER = 2
MAX_ORDER = 4
DEFAULT_FIELD_CAP = 20


@dataclass(frozen=True)
class CrossFieldCandidate:
    """An unordered tuple of original field indices plus its sample count."""

    fields: tuple[int, ...]
    count: int

    @property
    def order(self) -> int:
        return len(self.fields)


def candidate_space_size(n_fields: int, order: int) -> int:
    """Number of possible cross fields of one order: choose(n, order)."""
    if order < MIN_ORDER or order > MAX_ORDER:
        raise ConfigError(f"order must be between {MIN_ORDER} and {MAX_ORDER}, got {order}")
    return math.comb(n_fields, order)


def enumerate_candidates(
    feasible: np.ndarray,
    inconsistency: np.ndarray | None = None,
    field_cap: int = DEFAULT_FIELD_CAP,
    max_order: int = MAX_ORDER,
) -> Counter:
    """Count field subsets of order 2..max_order over per-sample feasible sets.

    feasible is the (K, n) boolean matrix; inconsistency supplies the values
    used to keep only the ``field_cap`` highest-d fields when a sample has
    more feasible fields than that (ties broken toward the lower field index).
    Samples with fewer than two feasible fields contribute nothing.
    """
    feasible = np.asarray(feasible, dtype=bool)
    if feasible.ndim != 2:
        raise ConfigError("feasible matrix must be 2-dimensional")
    if max_order < MIN_ORDER or max_order > MAX_ORDER:
        raise ConfigError(f"max_order must be between {MIN_ORDER} and {MAX_ORDER}")
    if inconsistency is not None and np.asarray(inconsistency).shape != feasible.shape:
        raise ConfigError("inconsistency matrix must match the feasible matrix shape")
    counts: Counter = Counter()
    for k in range(feasible.shape[0]):
        fields = np.flatnonzero(feasible[k])
        if fields.size > field_cap:
            if inconsistency is None:
                raise ConfigError(
                    f"sample {k} has {fields.size} feasible fields; "
                    "inconsistency values are required to apply the cap"
                )
            row = np.asarray(inconsistency)[k, fields]
            # Stable sort on -d keeps ascending field order among ties.
            keep = np.argsort(-row, kind="stable")[:field_cap]
            fields = np.sort(fields[keep])
        if fields.size < MIN_ORDER:
            continue
        members = [int(f) for f in fields]
        for order in range(MIN_ORDER, min(max_order, len(members)) + 1):
            counts.update(combinations(members, order))
    return counts


def top_epsilon(counts: Counter, epsilon: int) -> list[CrossFieldCandidate]:
    """Keep the epsilon most frequent subsets.

    Ordering: higher count first, then lower order, then lexicographic field
    tuple. If fewer than epsilon subsets were ever counted, a warning is
    emitted and the full list is returned.
    """
    if epsilon < 1:
        raise ConfigError(f"epsilon must be at least 1, got {epsilon}")
    ranked = sorted(counts.items(), key=lambda item: (-item[1], len(item[0]), item[0]))
    if len(ranked) < epsilon:
        warnings.warn(
            f"only {len(ranked)} candidate cross fields exist, fewer than epsilon={epsilon}",
            stacklevel=2,
        )
    return [CrossFieldCandidate(fields=f, count=c) for f, c in ranked[:epsilon]]


def save_candidates(path, candidates: list[CrossFieldCandidate]) -> None:
    """One TSV line per candidate: comma-joined field indices, then the count."""
    with open(path, "w", encoding="utf-8") as handle:
        for cand in candidates:
            handle.write(",".join(str(f) for f in cand.fields) + f"\t{cand.count}\n")


def load_candidates(path) -> list[CrossFieldCandidate]:
    out: list[CrossFieldCandidate] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise IngestionError(f"{path}: line {lineno}: expected 2 columns")
            fields = tuple(int(f) for f in parts[0].split(","))
            if not MIN_ORDER <= len(fields) <= MAX_ORDER:
                raise IngestionError(f"{path}: line {lineno}: bad candidate order")
            out.append(CrossFieldCandidate(fields=fields, count=int(parts[1])))
    return out
