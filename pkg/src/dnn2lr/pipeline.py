"""Staged pipeline: files in a work directory are the inter-stage contract.

Each stage reads the artifacts of earlier stages and writes its own, so a run
can be resumed or audited per stage. A missing prerequisite fails with
"missing: <stage>" naming the stage that should have produced it. Re-running
a stage with unchanged inputs rewrites byte-identical artifacts: every stage
derives its randomness from the root seed salted with the stage name, and all
floats are serialized with repr.

Artifact map (inside the work directory)::

    ingest       train.csv valid.csv test.csv
    discretize   edges.tsv vocab.tsv encoded_train.csv encoded_valid.csv encoded_test.csv
    train-dnn    dnn.bin dnn_history.csv
    inconsistency  inconsistency_d.csv feasible.csv
    candidates   candidates.tsv
    train-lr     lr_full.txt
    search       selected.tsv search_log.txt
    export-model model_final.txt
    evaluate     report.txt
"""

from __future__ import annotations

import csv
import zlib
from pathlib import Path

import numpy as np

from . import model_io
from .candidates import enumerate_candidates, load_candidates, save_candidates, top_epsilon
from .config import PipelineConfig
from .crosslr import LrConfig, SparseLrModel, train_phase1, train_phase2, tune_phase1
from .data import NUMERICAL, Dataset, RawTable, Vocabulary, load_csv, save_csv, split_table
from .discretize import apply_edges, load_edges, parse_numeric, save_edges, select_granularity
from .errors import Dnn2LrError, IngestionError, StageError
from .inconsistency import compute_inconsistency, feasible_matrix
from .metrics import auc, ks
from .network import EmbeddingDnn, TrainConfig, load_model, save_model, train
from .search import beam_select, greedy_select, precompute_logit_columns


class Workspace:
    """Path bundle for one work directory."""

    def __init__(self, workdir):
        self.root = Path(workdir)
        self.train_csv = self.root / "train.csv"
        self.valid_csv = self.root / "valid.csv"
        self.test_csv = self.root / "test.csv"
        self.edges_tsv = self.root / "edges.tsv"
        self.vocab_tsv = self.root / "vocab.tsv"
        self.encoded_train = self.root / "encoded_train.csv"
        self.encoded_valid = self.root / "encoded_valid.csv"
        self.encoded_test = self.root / "encoded_test.csv"
        self.dnn_bin = self.root / "dnn.bin"
        self.dnn_history = self.root / "dnn_history.csv"
        self.d_csv = self.root / "inconsistency_d.csv"
        self.feasible_csv = self.root / "feasible.csv"
        self.candidates_tsv = self.root / "candidates.tsv"
        self.lr_full = self.root / "lr_full.txt"
        self.selected_tsv = self.root / "selected.tsv"
        self.search_log = self.root / "search_log.txt"
        self.model_final = self.root / "model_final.txt"
        self.report = self.root / "report.txt"


def _require(stage: str, *paths: Path) -> None:
    for path in paths:
        if not path.exists():
            raise StageError(f"missing: {stage}")


def _stage_seed(config: PipelineConfig, stage: str) -> int:
    """Stage-salted seed: one root seed, independent streams per stage."""
    return zlib.crc32(f"{config.seed}:{stage}".encode("utf-8"))


def _write_encoded(path: Path, dataset: Dataset, names: list[str], label: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(names + [label])
        for row, y in zip(dataset.ids, dataset.labels):
            writer.writerow([int(v) for v in row] + [int(y)])


def _read_encoded(path: Path, n_fields: int, split: str = "") -> Dataset:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if len(header) != n_fields + 1:
            raise IngestionError(f"{path}: expected {n_fields + 1} columns")
        ids, labels = [], []
        for cells in reader:
            ids.append([int(v) for v in cells[:-1]])
            labels.append(int(cells[-1]))
    return Dataset(
        ids=np.asarray(ids, dtype=np.int32),
        labels=np.asarray(labels, dtype=np.int8),
        split=split,
    )


def _write_matrix(path: Path, matrix: np.ndarray, names: list[str], as_int: bool) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(names)
        for row in matrix:
            writer.writerow([int(v) for v in row] if as_int else [repr(float(v)) for v in row])


def _read_matrix(path: Path, dtype) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        next(reader)
        return np.asarray([[dtype(v) for v in row] for row in reader])


# ---------------------------------------------------------------------- #
# stages


def stage_ingest(config: PipelineConfig) -> None:
    """Load the raw CSV, shuffle, and write the three split files."""
    ws = Workspace(config.workdir)
    if config.data is None:
        raise IngestionError("no data file configured (set data = <path> or pass --data)")
    if not Path(config.data).exists():
        raise IngestionError(f"data file not found: {config.data}")
    table = load_csv(config.data, config.fields, config.label)
    train_part, valid_part, test_part = split_table(
        table, config.split, seed=_stage_seed(config, "ingest")
    )
    ws.root.mkdir(parents=True, exist_ok=True)
    save_csv(ws.train_csv, train_part, label=config.label)
    save_csv(ws.valid_csv, valid_part, label=config.label)
    save_csv(ws.test_csv, test_part, label=config.label)


def _load_splits(config: PipelineConfig) -> tuple[RawTable, RawTable, RawTable]:
    ws = Workspace(config.workdir)
    _require("ingest", ws.train_csv, ws.valid_csv, ws.test_csv)
    out = []
    for path, split in ((ws.train_csv, "train"), (ws.valid_csv, "valid"), (ws.test_csv, "test")):
        table = load_csv(path, config.fields, config.label)
        table.split = split
        out.append(table)
    return tuple(out)


def stage_discretize(config: PipelineConfig) -> None:
    """Bin numerical fields, build the vocabulary, write encoded id tables."""
    ws = Workspace(config.workdir)
    train_part, valid_part, test_part = _load_splits(config)
    edges_by_name = {}
    for f in config.fields:
        if f.kind != NUMERICAL:
            continue
        train_values = parse_numeric(train_part.column(f.index), field_name=f.name)
        valid_values = parse_numeric(valid_part.column(f.index), field_name=f.name)
        _, edges = select_granularity(
            train_values,
            np.asarray(train_part.labels),
            valid_values,
            np.asarray(valid_part.labels),
            field=f.index,
            candidates=config.granularities,
        )
        edges_by_name[f.name] = edges
        for part in (train_part, valid_part, test_part):
            values = parse_numeric(part.column(f.index), field_name=f.name)
            binned = apply_edges(edges, values)
            for row, bin_label in zip(part.rows, binned):
                row[f.index] = bin_label
    save_edges(ws.edges_tsv, edges_by_name)
    names = [f.name for f in config.fields]
    vocab = Vocabulary.build(names, train_part.rows)
    vocab.save(ws.vocab_tsv)
    _write_encoded(ws.encoded_train, vocab.encode_table(train_part), names, config.label)
    _write_encoded(ws.encoded_valid, vocab.encode_table(valid_part), names, config.label)
    _write_encoded(ws.encoded_test, vocab.encode_table(test_part), names, config.label)


def _load_vocab(config: PipelineConfig) -> Vocabulary:
    ws = Workspace(config.workdir)
    _require("discretize", ws.vocab_tsv)
    return Vocabulary.load(ws.vocab_tsv, [f.name for f in config.fields])


def _load_encoded(config: PipelineConfig) -> tuple[Dataset, Dataset, Dataset]:
    ws = Workspace(config.workdir)
    _require("discretize", ws.encoded_train, ws.encoded_valid, ws.encoded_test)
    n = len(config.fields)
    return (
        _read_encoded(ws.encoded_train, n, "train"),
        _read_encoded(ws.encoded_valid, n, "valid"),
        _read_encoded(ws.encoded_test, n, "test"),
    )


def stage_train_dnn(config: PipelineConfig) -> None:
    """Fit the embedding network and persist it with its training history."""
    ws = Workspace(config.workdir)
    vocab = _load_vocab(config)
    train_set, valid_set, _ = _load_encoded(config)
    seed = _stage_seed(config, "train-dnn")
    model = EmbeddingDnn(
        vocab.sizes(),
        embedding_dim=config.dnn.embedding_dim,
        hidden=config.dnn.hidden,
        output="sigmoid",
        seed=seed,
    )
    history = train(
        model,
        train_set.ids,
        train_set.labels,
        valid_set.ids,
        valid_set.labels,
        TrainConfig(
            learning_rate=config.dnn.learning_rate,
            l2=config.dnn.l2,
            batch_size=config.dnn.batch_size,
            epochs=config.dnn.epochs,
            patience=config.dnn.patience,
            seed=seed,
        ),
    )
    save_model(model, ws.dnn_bin)
    with open(ws.dnn_history, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["epoch", "train_loss", "valid_metric"])
        for row in history:
            writer.writerow([row["epoch"], repr(row["train_loss"]), repr(row["valid_metric"])])


def stage_inconsistency(config: PipelineConfig) -> None:
    """Compute the inconsistency matrix D and the feasible mask D* on valid."""
    ws = Workspace(config.workdir)
    _require("train-dnn", ws.dnn_bin)
    _, valid_set, _ = _load_encoded(config)
    model = load_model(ws.dnn_bin)
    result = compute_inconsistency(
        model, valid_set.ids, space=config.gradient_space, mode=config.inconsistency_mode
    )
    feasible = feasible_matrix(result.d, config.eta)
    names = [f.name for f in config.fields]
    _write_matrix(ws.d_csv, result.d, names, as_int=False)
    _write_matrix(ws.feasible_csv, feasible.astype(np.int8), names, as_int=True)


def stage_candidates(config: PipelineConfig) -> None:
    """Count feasible co-occurrences and keep the top-epsilon cross fields."""
    ws = Workspace(config.workdir)
    _require("inconsistency", ws.d_csv, ws.feasible_csv)
    d = _read_matrix(ws.d_csv, float)
    feasible = _read_matrix(ws.feasible_csv, int).astype(bool)
    counts = enumerate_candidates(feasible, d, field_cap=config.feasible_cap)
    top = top_epsilon(counts, config.resolve_epsilon(len(config.fields)))
    save_candidates(ws.candidates_tsv, top)


def _lr_config(config: PipelineConfig, seed: int) -> LrConfig:
    return LrConfig(
        learning_rate=config.lr.learning_rate,
        l2=config.lr.l2,
        batch_size=config.lr.batch_size,
        epochs=config.lr.epochs,
        patience=config.lr.patience,
        seed=seed,
    )


def save_lr_full(path, model: SparseLrModel) -> None:
    """Internal id-keyed dump of the fully trained two-phase model."""
    lines = [f"bias\t{model.bias!r}"]
    for f, weights in enumerate(model.field_weights):
        for fid in range(weights.size):
            lines.append(f"w\t{f}\t{fid}\t{float(weights[fid])!r}")
    for fields, table in zip(model.cross_fields, model.cross_weights):
        key = ",".join(str(f) for f in fields)
        lines.append(f"cross\t{key}")
        for ids_tuple in sorted(table):
            rendered = ",".join(str(i) for i in ids_tuple)
            lines.append(f"cw\t{key}\t{rendered}\t{table[ids_tuple]!r}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def load_lr_full(path, vocab_sizes: list[int]) -> SparseLrModel:
    model = SparseLrModel(vocab_sizes)
    tables: dict[tuple[int, ...], dict[tuple[int, ...], float]] = {}
    order: list[tuple[int, ...]] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            tag = parts[0]
            try:
                if tag == "bias":
                    model.bias = float(parts[1])
                elif tag == "w":
                    model.field_weights[int(parts[1])][int(parts[2])] = float(parts[3])
                elif tag == "cross":
                    fields = tuple(int(v) for v in parts[1].split(","))
                    tables[fields] = {}
                    order.append(fields)
                elif tag == "cw":
                    fields = tuple(int(v) for v in parts[1].split(","))
                    key = tuple(int(v) for v in parts[2].split(","))
                    tables[fields][key] = float(parts[3])
                else:
                    raise IngestionError(f"unrecognized line tag {tag!r}")
            except (IndexError, KeyError, ValueError) as err:
                raise IngestionError(f"{path}: line {lineno}: {err}") from None
    for fields in order:
        model.attach_cross(fields, tables[fields])
    return model


def stage_train_lr(config: PipelineConfig) -> None:
    """Two-phase logistic regression over originals plus candidate crosses."""
    ws = Workspace(config.workdir)
    _require("candidates", ws.candidates_tsv)
    vocab = _load_vocab(config)
    train_set, valid_set, _ = _load_encoded(config)
    cands = load_candidates(ws.candidates_tsv)
    seed = _stage_seed(config, "train-lr")
    lr_config = _lr_config(config, seed)
    if config.lr.grid_tune:
        best_lr, best_l2, _ = tune_phase1(
            train_set.ids,
            train_set.labels,
            valid_set.ids,
            valid_set.labels,
            vocab.sizes(),
            config=lr_config,
        )
        lr_config.learning_rate = best_lr
        lr_config.l2 = best_l2
    model = SparseLrModel(vocab.sizes())
    train_phase1(
        model, train_set.ids, train_set.labels, valid_set.ids, valid_set.labels, lr_config
    )
    train_phase2(
        model, train_set.ids, train_set.labels, valid_set.ids, valid_set.labels, cands, lr_config
    )
    save_lr_full(ws.lr_full, model)


def stage_search(config: PipelineConfig) -> None:
    """Select cross features on the validation split; log every step."""
    ws = Workspace(config.workdir)
    _require("train-lr", ws.lr_full)
    vocab = _load_vocab(config)
    _, valid_set, _ = _load_encoded(config)
    model = load_lr_full(ws.lr_full, vocab.sizes())
    base, columns = precompute_logit_columns(model, valid_set.ids)
    if config.beam_width > 1:
        result = beam_select(
            base,
            columns,
            valid_set.labels,
            width=config.beam_width,
            max_selected=config.max_selected,
            threads=config.threads,
        )
    else:
        result = greedy_select(
            base,
            columns,
            valid_set.labels,
            max_selected=config.max_selected,
            threads=config.threads,
        )
    names = [f.name for f in config.fields]
    with open(ws.selected_tsv, "w", encoding="utf-8") as handle:
        for step in result.steps:
            fields = model.cross_fields[step.candidate]
            handle.write(",".join(str(f) for f in fields) + f"\t{step.auc!r}\n")
    with open(ws.search_log, "w", encoding="utf-8") as handle:
        handle.write(f"base_auc = {result.base_auc!r}\n")
        for i, step in enumerate(result.steps, start=1):
            fields = model.cross_fields[step.candidate]
            pretty = "*".join(names[f] for f in fields)
            handle.write(f"step {i}: add {pretty} -> valid_auc = {step.auc!r}\n")
        handle.write(f"final_auc = {result.auc!r}\n")


def load_selected(path) -> list[tuple[int, ...]]:
    out = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                out.append(tuple(int(v) for v in line.split("\t")[0].split(",")))
    return out


def stage_export_model(config: PipelineConfig) -> None:
    """Write the deployable white-box model with selected crosses only."""
    ws = Workspace(config.workdir)
    _require("search", ws.selected_tsv)
    _require("train-lr", ws.lr_full)
    vocab = _load_vocab(config)
    name_to_index = {f.name: f.index for f in config.fields}
    edges_by_name = (
        load_edges(ws.edges_tsv, name_to_index) if ws.edges_tsv.exists() else {}
    )
    model = load_lr_full(ws.lr_full, vocab.sizes())
    selected = load_selected(ws.selected_tsv)
    model_io.export_model(
        ws.model_final, model, config.fields, vocab, edges_by_name, selected
    )


def evaluate_model(model_path, data_path, label: str = "y") -> dict:
    """Score a raw CSV with an exported model; schema comes from the model."""
    exported = model_io.load_exported(model_path)
    table = load_csv(data_path, exported.fields, label)
    scores = exported.score_rows(table.rows)
    labels = np.asarray(table.labels)
    return {"auc": auc(labels, scores), "ks": ks(labels, scores)}


def stage_evaluate(config: PipelineConfig) -> dict:
    """Test-split metrics for the final model and its plain-LR ablation."""
    ws = Workspace(config.workdir)
    _require("export-model", ws.model_final)
    _require("ingest", ws.test_csv)
    exported = model_io.load_exported(ws.model_final)
    table = load_csv(ws.test_csv, config.fields, config.label)
    labels = np.asarray(table.labels)
    plain_scores = exported.score_rows(table.rows, include_cross=False)
    final_scores = exported.score_rows(table.rows, include_cross=True)
    names = [f.name for f in config.fields]
    selected = ";".join(
        "*".join(names[i] for i in fields) for fields in load_selected(ws.selected_tsv)
    )
    report = {
        "plain_lr_test_auc": auc(labels, plain_scores),
        "plain_lr_test_ks": ks(labels, plain_scores),
        "final_test_auc": auc(labels, final_scores),
        "final_test_ks": ks(labels, final_scores),
        "selected_cross_fields": selected if selected else "none",
    }
    with open(ws.report, "w", encoding="utf-8") as handle:
        for key, value in report.items():
            rendered = value if isinstance(value, str) else repr(value)
            handle.write(f"{key} = {rendered}\n")
    return report


STAGES = {
    "ingest": stage_ingest,
    "discretize": stage_discretize,
    "train-dnn": stage_train_dnn,
    "inconsistency": stage_inconsistency,
    "candidates": stage_candidates,
    "train-lr": stage_train_lr,
    "search": stage_search,
    "export-model": stage_export_model,
    "evaluate": stage_evaluate,
}

STAGE_ORDER = list(STAGES)


def run_stage(config: PipelineConfig, stage: str):
    if stage not in STAGES:
        raise StageError(f"unknown stage {stage!r}")
    config.validate()
    return STAGES[stage](config)


def run_all(config: PipelineConfig) -> dict:
    """Run every stage in order; equivalent to running them one by one."""
    config.validate()
    report: dict = {}
    for stage in STAGE_ORDER:
        try:
            result = STAGES[stage](config)
        except Dnn2LrError as err:
            raise StageError(f"stage {stage} failed: {err}") from err
        if stage == "evaluate":
            report = result
    return report
