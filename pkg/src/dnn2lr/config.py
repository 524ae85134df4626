"""Pipeline configuration: a small key = value file format plus validation.

The config declares the schema (field kinds in column order), the label
column, paths, the seed, and the knobs of every stage. Validation happens
up front so a bad value fails before any work starts.

Example::

    label = y
    field.age = numerical
    field.housing = categorical
    data = loans.csv
    workdir = work
    seed = 7
    eta = 0.05
    epsilon = 3n
    dnn.hidden = 400,100
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

from .data import CATEGORICAL, NUMERICAL, FieldSchema, check_schema
from .errors import ConfigError

_EPSILON_RULE = re.compile(r"^(\d*)n$")


@dataclass
class DnnSettings:
    embedding_dim: int = 10
    hidden: tuple[int, ...] = (400, 100)
    learning_rate: float = 0.001
    l2: float = 0.0001
    batch_size: int = 256
    epochs: int = 30
    patience: int = 5


@dataclass
class LrSettings:
    learning_rate: float = 0.1
    l2: float = 0.0001
    batch_size: int = 256
    epochs: int = 30
    patience: int = 5
    grid_tune: bool = False


@dataclass
class PipelineConfig:
    fields: list[FieldSchema] = dataclass_field(default_factory=list)
    label: str = "y"
    data: Path | None = None
    workdir: Path = Path("work")
    seed: int = 0
    eta: float = 0.05
    epsilon: str = "3n"
    split: tuple[float, float, float] = (0.6, 0.2, 0.2)
    beam_width: int = 1
    max_selected: int | None = None
    threads: int = 1
    gradient_space: str = "probability"
    inconsistency_mode: str = "scalar"
    granularities: tuple[int, ...] = (10, 100, 1000)
    feasible_cap: int = 20
    dnn: DnnSettings = dataclass_field(default_factory=DnnSettings)
    lr: LrSettings = dataclass_field(default_factory=LrSettings)

    def resolve_epsilon(self, n_fields: int) -> int:
        """Turn the epsilon rule into a count: "3n" scales with the schema."""
        text = str(self.epsilon).strip()
        match = _EPSILON_RULE.match(text)
        if match:
            factor = int(match.group(1)) if match.group(1) else 1
            value = factor * n_fields
        else:
            try:
                value = int(text)
            except ValueError:
                raise ConfigError(f"epsilon must be an integer or '<k>n', got {text!r}") from None
        if value < 1:
            raise ConfigError(f"epsilon resolves to {value}, must be at least 1")
        return value

    def validate(self) -> None:
        check_schema(self.fields)
        if not 0.0 < self.eta < 1.0:
            raise ConfigError(f"eta must lie strictly between 0 and 1, got {self.eta}")
        self.resolve_epsilon(len(self.fields))
        f1, f2, f3 = self.split
        if min(f1, f2, f3) <= 0 or abs(f1 + f2 + f3 - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must be positive and sum to 1, got {self.split}")
        if self.beam_width < 1:
            raise ConfigError("beam_width must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.max_selected is not None and self.max_selected < 0:
            raise ConfigError("max_selected must be non-negative")
        if self.gradient_space not in ("probability", "logit"):
            raise ConfigError("gradient_space must be probability or logit")
        if self.inconsistency_mode not in ("scalar", "elementwise"):
            raise ConfigError("inconsistency_mode must be scalar or elementwise")
        if self.feasible_cap < 2:
            raise ConfigError("feasible_cap must be at least 2")
        if any(g < 2 for g in self.granularities) or not self.granularities:
            raise ConfigError("granularities must all be at least 2")


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}")


def _parse_int_tuple(text: str, key: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {text!r}") from None


def parse_config_text(text: str, origin: str = "<config>") -> PipelineConfig:
    config = PipelineConfig()
    setters = {
        "label": lambda v: setattr(config, "label", v),
        "data": lambda v: setattr(config, "data", Path(v)),
        "workdir": lambda v: setattr(config, "workdir", Path(v)),
        "seed": lambda v: setattr(config, "seed", int(v)),
        "eta": lambda v: setattr(config, "eta", float(v)),
        "epsilon": lambda v: setattr(config, "epsilon", v),
        "beam_width": lambda v: setattr(config, "beam_width", int(v)),
        "max_selected": lambda v: setattr(config, "max_selected", int(v) if v else None),
        "threads": lambda v: setattr(config, "threads", int(v)),
        "gradient_space": lambda v: setattr(config, "gradient_space", v),
        "inconsistency_mode": lambda v: setattr(config, "inconsistency_mode", v),
        "feasible_cap": lambda v: setattr(config, "feasible_cap", int(v)),
        "granularities": lambda v: setattr(
            config, "granularities", _parse_int_tuple(v, "granularities")
        ),
        "split": lambda v: setattr(
            config, "split", tuple(float(part) for part in v.split(","))
        ),
        "dnn.embedding_dim": lambda v: setattr(config.dnn, "embedding_dim", int(v)),
        "dnn.hidden": lambda v: setattr(config.dnn, "hidden", _parse_int_tuple(v, "dnn.hidden")),
        "dnn.learning_rate": lambda v: setattr(config.dnn, "learning_rate", float(v)),
        "dnn.l2": lambda v: setattr(config.dnn, "l2", float(v)),
        "dnn.batch_size": lambda v: setattr(config.dnn, "batch_size", int(v)),
        "dnn.epochs": lambda v: setattr(config.dnn, "epochs", int(v)),
        "dnn.patience": lambda v: setattr(config.dnn, "patience", int(v)),
        "lr.learning_rate": lambda v: setattr(config.lr, "learning_rate", float(v)),
        "lr.l2": lambda v: setattr(config.lr, "l2", float(v)),
        "lr.batch_size": lambda v: setattr(config.lr, "batch_size", int(v)),
        "lr.epochs": lambda v: setattr(config.lr, "epochs", int(v)),
        "lr.patience": lambda v: setattr(config.lr, "patience", int(v)),
        "lr.grid_tune": lambda v: setattr(config.lr, "grid_tune", _parse_bool(v, "lr.grid_tune")),
    }
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}: line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key.startswith("field."):
            name = key[len("field.") :].strip()
            if not name:
                raise ConfigError(f"{origin}: line {lineno}: empty field name")
            if value not in (NUMERICAL, CATEGORICAL):
                raise ConfigError(
                    f"{origin}: line {lineno}: field kind must be "
                    f"{NUMERICAL} or {CATEGORICAL}, got {value!r}"
                )
            config.fields.append(FieldSchema(name=name, index=len(config.fields), kind=value))
            continue
        setter = setters.get(key)
        if setter is None:
            raise ConfigError(f"{origin}: line {lineno}: unknown key {key!r}")
        try:
            setter(value)
        except ConfigError:
            raise
        except (TypeError, ValueError) as err:
            raise ConfigError(f"{origin}: line {lineno}: bad value for {key}: {err}") from None
    return config


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), origin=str(path))
