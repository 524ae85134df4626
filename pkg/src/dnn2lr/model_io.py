"""The exported white-box model: a self-contained text artifact.

The file carries everything needed to score raw rows: the schema, the bin
edges for numerical fields, one weight line per (field, value), the selected
cross fields with one weight line per value combination, and the bias. Tab
separated, values escaped, floats written with repr so reading them back is
lossless and export is byte-deterministic.

Line grammar::

    bias<TAB>w
    field<TAB>index<TAB>name<TAB>kind
    edges<TAB>name<TAB>granularity<TAB>cut,cut,...
    w<TAB>name<TAB>value<TAB>weight
    cross<TAB>name,name[,name[,name]]
    cw<TAB>name,name<TAB>value|value<TAB>weight

An empty value string is the missing-value category. Combinations absent
from the file score zero, mirroring training-time behaviour for unseen
values.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .crosslr import SparseLrModel
from .data import (
    MISSING,
    MISSING_ID,
    NUMERICAL,
    UNSEEN_ID,
    FieldSchema,
    Vocabulary,
    escape,
    unescape,
)
from .discretize import BinEdges, apply_edges, parse_numeric
from .errors import ConfigError, IngestionError
from .network import stable_sigmoid

_HEADER = "# white-box logistic scorecard"


def export_model(
    path,
    model: SparseLrModel,
    fields: list[FieldSchema],
    vocab: Vocabulary,
    edges_by_name: dict[str, BinEdges],
    selected: list[tuple[int, ...]],
) -> None:
    """Write the final model with only the selected cross fields attached."""
    if len(fields) != model.n_fields:
        raise ConfigError("schema and model disagree on the number of fields")
    names = [f.name for f in sorted(fields, key=lambda f: f.index)]
    lines = [_HEADER, f"bias\t{model.bias!r}"]
    for f in sorted(fields, key=lambda f: f.index):
        lines.append(f"field\t{f.index}\t{escape(f.name)}\t{f.kind}")
        if f.kind == NUMERICAL:
            if f.name not in edges_by_name:
                raise ConfigError(f"no bin edges for numerical field {f.name!r}")
            e = edges_by_name[f.name]
            cuts = ",".join(repr(float(c)) for c in e.cuts)
            lines.append(f"edges\t{escape(f.name)}\t{e.granularity}\t{cuts}")
        weights = model.field_weights[f.index]
        for fid in range(weights.size):
            if fid == UNSEEN_ID:
                continue  # no raw value exists for the unseen id
            value = MISSING if fid == MISSING_ID else vocab.decode(f.index, fid)
            lines.append(f"w\t{escape(f.name)}\t{escape(value)}\t{float(weights[fid])!r}")
    for fields_tuple in selected:
        which = model.cross_index(fields_tuple)
        members = model.cross_fields[which]
        member_names = ",".join(escape(names[f]) for f in members)
        lines.append(f"cross\t{member_names}")
        table = model.cross_weights[which]
        for key in sorted(table):
            rendered = "|".join(
                escape(MISSING if fid == MISSING_ID else vocab.decode(f, fid))
                for f, fid in zip(members, key)
            )
            lines.append(f"cw\t{member_names}\t{rendered}\t{table[key]!r}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _split_escaped(text: str, sep: str) -> list[str]:
    """Split on sep, honouring backslash escapes produced by escape()."""
    parts: list[str] = []
    current: list[str] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            current.append(ch)
            current.append(text[i + 1])
            i += 2
            continue
        if ch == sep:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return parts


@dataclass
class ExportedModel:
    """In-memory form of the exported artifact, able to score raw rows."""

    fields: list[FieldSchema]
    bias: float = 0.0
    edges_by_name: dict[str, BinEdges] = dataclass_field(default_factory=dict)
    weights: dict[tuple[str, str], float] = dataclass_field(default_factory=dict)
    crosses: list[tuple[tuple[str, ...], dict[tuple[str, ...], float]]] = dataclass_field(
        default_factory=list
    )

    def _categories(self, rows: list[list[str]]) -> list[list[str]]:
        """Raw cells -> category strings (numerical fields go through bins)."""
        by_index = sorted(self.fields, key=lambda f: f.index)
        columns: list[list[str]] = []
        for f in by_index:
            cells = [row[f.index] for row in rows]
            if f.kind == NUMERICAL:
                values = parse_numeric(cells, field_name=f.name)
                columns.append(apply_edges(self.edges_by_name[f.name], values))
            else:
                columns.append(list(cells))
        return [[columns[f][k] for f in range(len(by_index))] for k in range(len(rows))]

    def logits(self, rows: list[list[str]], include_cross: bool = True) -> np.ndarray:
        cats = self._categories(rows)
        name_pos = {f.name: f.index for f in self.fields}
        out = np.full(len(rows), self.bias, dtype=np.float64)
        for k, row in enumerate(cats):
            total = 0.0
            for f in self.fields:
                total += self.weights.get((f.name, row[f.index]), 0.0)
            if include_cross:
                for member_names, table in self.crosses:
                    key = tuple(row[name_pos[name]] for name in member_names)
                    total += table.get(key, 0.0)
            out[k] += total
        return out

    def score_rows(self, rows: list[list[str]], include_cross: bool = True) -> np.ndarray:
        """Probabilities for raw rows ordered by the model's own schema."""
        return stable_sigmoid(self.logits(rows, include_cross=include_cross))


def load_exported(path) -> ExportedModel:
    model = ExportedModel(fields=[])
    seen_bias = False
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            tag = parts[0]
            try:
                if tag == "bias" and len(parts) == 2:
                    model.bias = float(parts[1])
                    seen_bias = True
                elif tag == "field" and len(parts) == 4:
                    model.fields.append(
                        FieldSchema(name=unescape(parts[2]), index=int(parts[1]), kind=parts[3])
                    )
                elif tag == "edges" and len(parts) == 4:
                    name = unescape(parts[1])
                    index = next(f.index for f in model.fields if f.name == name)
                    cuts = tuple(float(c) for c in parts[3].split(",")) if parts[3] else ()
                    model.edges_by_name[name] = BinEdges(
                        field=index, granularity=int(parts[2]), cuts=cuts
                    )
                elif tag == "w" and len(parts) == 4:
                    model.weights[(unescape(parts[1]), unescape(parts[2]))] = float(parts[3])
                elif tag == "cross" and len(parts) == 2:
                    names = tuple(unescape(p) for p in _split_escaped(parts[1], ","))
                    model.crosses.append((names, {}))
                elif tag == "cw" and len(parts) == 4:
                    names = tuple(unescape(p) for p in _split_escaped(parts[1], ","))
                    key = tuple(unescape(p) for p in _split_escaped(parts[2], "|"))
                    for member_names, table in model.crosses:
                        if member_names == names:
                            table[key] = float(parts[3])
                            break
                    else:
                        raise IngestionError("cw line before its cross line")
                else:
                    raise IngestionError(f"unrecognized line tag {tag!r}")
            except (ValueError, StopIteration) as err:
                raise IngestionError(f"{path}: line {lineno}: {err}") from None
            except IngestionError as err:
                raise IngestionError(f"{path}: line {lineno}: {err}") from None
    if not model.fields or not seen_bias:
        raise IngestionError(f"{path}: not a model file (missing field or bias lines)")
    model.fields.sort(key=lambda f: f.index)
    return model
