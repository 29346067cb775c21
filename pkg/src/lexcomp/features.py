"""Feature assembly: labeled instances to a numeric matrix with missing cells.

An instance is one target (a single word or a two-word expression) in a
one-sentence context, tagged with the subcorpus it came from and optionally
a gold complexity score. Features come in six groups:

  length       sentence length in tokens
  corpus_id    one-hot over the three subcorpora
  frequency    corpus-derived frequency lists (lexicon tables)
  norm         lexical norms (lexicon tables)
  psychometric behavioral measures (lexicon tables)
  association  collocation measures from corpus counts (two-word task only)

Lexicon-backed values resolve surface form first, lemma second. For the
two-word task every lexicon-backed feature is doubled into a _min and a
_max column over the per-word values; when only one word resolves both
columns carry that value, and when neither resolves both are missing.
Missing stays missing: this module never imputes.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from . import assoc
from .corpus import tokenize
from .errors import ConfigurationError, DataError, FormatError
from .lexicon import Resources, lookup

log = logging.getLogger(__name__)

CORPORA = ("bible", "biomed", "europarl")
TASKS = ("single", "bigram")
GROUP_ORDER = ("length", "corpus_id", "frequency", "norm", "psychometric", "association")

# Short spellings accepted anywhere a group list is read (CLI, config files).
GROUP_ALIASES = {
    "length": "length",
    "corpus": "corpus_id",
    "corpus_id": "corpus_id",
    "freq": "frequency",
    "frequency": "frequency",
    "norms": "norm",
    "norm": "norm",
    "psych": "psychometric",
    "psychometric": "psychometric",
    "assoc": "association",
    "association": "association",
}


def normalize_group(name: str) -> str:
    try:
        return GROUP_ALIASES[name.strip().lower()]
    except KeyError:
        raise ConfigurationError(
            f"unknown feature group {name!r}; expected one of {sorted(set(GROUP_ALIASES))}"
        ) from None


@dataclass(frozen=True)
class TargetInstance:
    id: str
    corpus_id: str
    sentence: tuple[str, ...]
    target: tuple[str, ...]
    gold: Optional[float] = None

    def __post_init__(self):
        if len(self.target) not in (1, 2):
            raise DataError(
                f"instance {self.id!r}: target must be 1 or 2 tokens, got {len(self.target)}")
        if self.corpus_id not in CORPORA:
            raise DataError(
                f"instance {self.id!r}: unknown corpus {self.corpus_id!r}; "
                f"expected one of {CORPORA}")
        if self.gold is not None and not math.isfinite(self.gold):
            raise DataError(f"instance {self.id!r}: non-finite gold score")

    @property
    def task(self) -> str:
        return "single" if len(self.target) == 1 else "bigram"


@dataclass(frozen=True)
class FeatureSpec:
    """One column of the schema plus how to fill it.

    Exactly one routing field is set for lexicon and association columns:
    `table` names a lexicon table, `corpus` a one-hot corpus, and
    (`model`, `measure`) an association measure over a frequency model.
    """

    name: str
    group: str
    aggregation: str = "single"  # "single" | "min" | "max"
    table: Optional[str] = None
    corpus: Optional[str] = None
    model: Optional[str] = None
    measure: Optional[str] = None


@dataclass(frozen=True)
class FeatureSchema:
    task: str
    specs: tuple[FeatureSpec, ...]

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigurationError(f"unknown task {self.task!r}; expected one of {TASKS}")
        names = [s.name for s in self.specs]
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ConfigurationError(f"duplicate feature names in schema: {dupes}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.specs)

    @property
    def groups(self) -> tuple[str, ...]:
        seen: list[str] = []
        for s in self.specs:
            if s.group not in seen:
                seen.append(s.group)
        return tuple(seen)

    def columns_in_group(self, group: str) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.specs) if s.group == group)

    def drop_group(self, group: str) -> "FeatureSchema":
        if group not in self.groups:
            raise ConfigurationError(f"schema has no group {group!r}")
        return FeatureSchema(
            task=self.task,
            specs=tuple(s for s in self.specs if s.group != group),
        )


def build_schema(task: str, groups: Sequence[str], resources: Resources) -> FeatureSchema:
    """Construct the ordered schema for a task from the enabled groups.

    Group order is fixed (length, corpus one-hots, frequency, norm,
    psychometric, association) regardless of the order groups are named in.
    Association features require the two-word task.
    """
    if task not in TASKS:
        raise ConfigurationError(f"unknown task {task!r}; expected one of {TASKS}")
    enabled = {normalize_group(g) for g in groups}
    if not enabled:
        raise ConfigurationError("no feature groups enabled")
    if "association" in enabled and task == "single":
        raise ConfigurationError(
            "association features apply to the two-word task only")

    specs: list[FeatureSpec] = []
    for group in GROUP_ORDER:
        if group not in enabled:
            continue
        if group == "length":
            specs.append(FeatureSpec(name="sentence_length", group="length"))
        elif group == "corpus_id":
            for c in CORPORA:
                specs.append(FeatureSpec(name=f"corpus_{c}", group="corpus_id", corpus=c))
        elif group in ("frequency", "norm", "psychometric"):
            tables = resources.tables_in_group(group)
            if not tables:
                raise ConfigurationError(
                    f"group {group!r} enabled but the manifest provides no {group} tables")
            for table in tables:
                if task == "single":
                    specs.append(FeatureSpec(name=table.name, group=group, table=table.name))
                else:
                    specs.append(FeatureSpec(
                        name=f"{table.name}_min", group=group,
                        aggregation="min", table=table.name))
                    specs.append(FeatureSpec(
                        name=f"{table.name}_max", group=group,
                        aggregation="max", table=table.name))
        elif group == "association":
            if not resources.frequency_models:
                raise ConfigurationError(
                    "association group enabled but the manifest provides no frequency models")
            for model_name in resources.frequency_models:
                for measure in assoc.MEASURES:
                    specs.append(FeatureSpec(
                        name=f"{model_name}_{measure}", group="association",
                        model=model_name, measure=measure))
    return FeatureSchema(task=task, specs=tuple(specs))


def _resolve(resources: Resources, table_name: str, word: str) -> Optional[float]:
    table = resources.table(table_name)
    return lookup(table, word, lemma=resources.lemmas.lemma_of(word))


def _association_values(resources: Resources, model_name: str,
                        target: tuple[str, ...]) -> dict[str, Optional[float]]:
    model = resources.frequency_models.get(model_name)
    if model is None:
        raise ConfigurationError(f"no frequency model named {model_name!r} is loaded")
    w1, w2 = target
    try:
        table = assoc.contingency(
            f1=model.unigram(w1),
            f2=model.unigram(w2),
            f12=model.bigram(w1, w2),
            n=model.total_bigrams,
        )
    except DataError:
        # Unigram marginals with a bigram-position n can disagree for
        # degenerate corpora (e.g. "a a"); the pair just has no measures.
        return {m: None for m in assoc.MEASURES}
    return assoc.all_measures(table)


def featurize(instance: TargetInstance, resources: Resources,
              schema: FeatureSchema) -> np.ndarray:
    """One instance to one float64 vector; NaN encodes missing."""
    if instance.task != schema.task:
        raise ConfigurationError(
            f"instance {instance.id!r} is a {instance.task}-task target "
            f"but the schema is for the {schema.task} task")

    table_cache: dict[str, tuple[Optional[float], Optional[float]]] = {}
    assoc_cache: dict[str, dict[str, Optional[float]]] = {}

    def doubled(table_name: str) -> tuple[Optional[float], Optional[float]]:
        """(min, max) over the resolved per-word values of a bigram target."""
        if table_name not in table_cache:
            values = [_resolve(resources, table_name, w) for w in instance.target]
            present = [v for v in values if v is not None]
            if len(present) == 2:
                pair = (min(present), max(present))
            elif len(present) == 1:
                pair = (present[0], present[0])
            else:
                pair = (None, None)
            table_cache[table_name] = pair
        return table_cache[table_name]

    row = np.full(len(schema.specs), np.nan)
    for i, spec in enumerate(schema.specs):
        value: Optional[float]
        if spec.group == "length":
            value = float(len(instance.sentence))
        elif spec.group == "corpus_id":
            value = 1.0 if instance.corpus_id == spec.corpus else 0.0
        elif spec.group == "association":
            if spec.model not in assoc_cache:
                assoc_cache[spec.model] = _association_values(
                    resources, spec.model, instance.target)
            value = assoc_cache[spec.model][spec.measure]
        elif schema.task == "single":
            value = _resolve(resources, spec.table, instance.target[0])
        else:
            lo, hi = doubled(spec.table)
            value = lo if spec.aggregation == "min" else hi
        if value is not None:
            row[i] = value
    return row


@dataclass(frozen=True)
class FeatureMatrix:
    schema: FeatureSchema
    rows: np.ndarray                 # (n, len(schema.specs)) float64, NaN = missing
    gold: Optional[np.ndarray] = None
    ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.rows.ndim != 2 or self.rows.shape[1] != len(self.schema.specs):
            raise ConfigurationError(
                f"matrix width {self.rows.shape} does not fit a "
                f"{len(self.schema.specs)}-column schema")
        if self.gold is not None and len(self.gold) != len(self.rows):
            raise ConfigurationError("gold vector length does not match row count")
        if self.ids and len(self.ids) != len(self.rows):
            raise ConfigurationError("id list length does not match row count")

    def drop_group(self, group: str) -> "FeatureMatrix":
        """Same rows with one feature group's columns removed."""
        keep = [i for i, s in enumerate(self.schema.specs) if s.group != group]
        if len(keep) == len(self.schema.specs):
            raise ConfigurationError(f"schema has no group {group!r}")
        return FeatureMatrix(
            schema=self.schema.drop_group(group),
            rows=self.rows[:, keep],
            gold=self.gold,
            ids=self.ids,
        )


def assemble_matrix(instances: Sequence[TargetInstance], resources: Resources,
                    schema: FeatureSchema) -> FeatureMatrix:
    """Featurize a batch; row order preserves instance order.

    All instances must belong to the schema's task. The gold vector is
    attached only when every instance carries a gold score.
    """
    for inst in instances:
        if inst.task != schema.task:
            raise ConfigurationError(
                f"instance {inst.id!r} is a {inst.task}-task target "
                f"but the schema is for the {schema.task} task")
    rows = np.empty((len(instances), len(schema.specs)))
    for r, inst in enumerate(instances):
        rows[r] = featurize(inst, resources, schema)
    gold = None
    if instances and all(inst.gold is not None for inst in instances):
        gold = np.array([inst.gold for inst in instances], dtype=float)
    return FeatureMatrix(
        schema=schema,
        rows=rows,
        gold=gold,
        ids=tuple(inst.id for inst in instances),
    )


# ---------------------------------------------------------------------------
# Dataset and matrix file formats


def read_dataset(path: str | Path,
                 score_interval: tuple[float, float] = (0.0, 1.0),
                 ) -> list[TargetInstance]:
    """Read instances from a TSV with header columns
    id, corpus, sentence, token and optionally complexity.

    Two-word targets are space-separated in the token column. Gold scores
    must be finite and inside score_interval. A target that does not occur
    contiguously in the tokenized sentence is kept with a warning.
    """
    path = Path(path)
    instances: list[TargetInstance] = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        col = {name.strip().lower(): i for i, name in enumerate(header)}
        required = ("id", "corpus", "sentence", "token")
        missing = [c for c in required if c not in col]
        if missing:
            raise FormatError(f"{path}: header lacks column(s) {missing}; found {header}")
        has_gold = "complexity" in col

        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < len(required):
                raise FormatError(f"{path}:{lineno}: expected at least "
                                  f"{len(required)} columns, got {len(parts)}")
            try:
                target = tuple(tokenize(parts[col["token"]]))
                gold = None
                if has_gold and col["complexity"] < len(parts):
                    cell = parts[col["complexity"]].strip()
                    if cell:
                        gold = float(cell)
                        lo, hi = score_interval
                        if not (lo <= gold <= hi):
                            raise DataError(
                                f"gold score {gold} outside [{lo}, {hi}]")
                inst = TargetInstance(
                    id=parts[col["id"]],
                    corpus_id=parts[col["corpus"]].strip().lower(),
                    sentence=tuple(tokenize(parts[col["sentence"]])),
                    target=target,
                    gold=gold,
                )
            except (DataError, ValueError) as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from exc
            if not _target_in_sentence(inst.target, inst.sentence):
                log.warning("%s:%d: target %r not found in sentence, instance kept",
                            path, lineno, " ".join(inst.target))
            instances.append(inst)
    if not instances:
        raise DataError(f"{path}: no instances")
    return instances


def _target_in_sentence(target: tuple[str, ...], sentence: tuple[str, ...]) -> bool:
    k = len(target)
    return any(sentence[i:i + k] == target for i in range(len(sentence) - k + 1))


def dataset_task(instances: Sequence[TargetInstance]) -> str:
    """Task of a homogeneous batch; mixed batches are a configuration error."""
    tasks = {inst.task for inst in instances}
    if len(tasks) != 1:
        raise ConfigurationError(
            "dataset mixes single-word and two-word targets; split it by task")
    return tasks.pop()


def format_cell(value: float) -> str:
    """One matrix cell: empty for missing, shortest round-trip repr otherwise."""
    return "" if math.isnan(value) else repr(float(value))


def write_matrix(matrix: FeatureMatrix, out: TextIO) -> None:
    """Dump rows as TSV; header is exactly the schema names."""
    out.write("\t".join(matrix.schema.names) + "\n")
    for row in matrix.rows:
        out.write("\t".join(format_cell(v) for v in row) + "\n")


def read_matrix_rows(path: str | Path, names: Sequence[str]) -> np.ndarray:
    """Read a matrix TSV whose header must equal `names` exactly."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != list(names):
            raise FormatError(
                f"{path}: header does not match the expected schema; "
                f"expected {list(names)}, found {header}")
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip("\n"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != len(names):
                raise FormatError(f"{path}:{lineno}: expected {len(names)} "
                                  f"columns, got {len(parts)}")
            try:
                rows.append([float(p) if p != "" else math.nan for p in parts])
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return np.array(rows, dtype=float).reshape(len(rows), len(names))


# ---------------------------------------------------------------------------
# Schema config files and schema serialization


def load_schema_config(path: str | Path) -> dict:
    """Read a schema config JSON: {"task", "groups", optional "manifest"}.

    The manifest path, when given, is resolved against the config file's
    directory and returned absolute.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    if "task" not in config or "groups" not in config:
        raise ConfigurationError(f"{path}: schema config needs 'task' and 'groups'")
    task = config["task"]
    if task not in TASKS:
        raise ConfigurationError(f"{path}: unknown task {task!r}")
    groups = [normalize_group(g) for g in config["groups"]]
    manifest = config.get("manifest")
    if manifest is not None:
        manifest = str((path.parent / manifest).resolve())
    return {"task": task, "groups": groups, "manifest": manifest}


def schema_to_dict(schema: FeatureSchema) -> dict:
    features = []
    for s in schema.specs:
        entry: dict = {"name": s.name, "group": s.group, "aggregation": s.aggregation}
        for key in ("table", "corpus", "model", "measure"):
            value = getattr(s, key)
            if value is not None:
                entry[key] = value
        features.append(entry)
    return {"task": schema.task, "features": features}


def schema_from_dict(d: dict) -> FeatureSchema:
    try:
        specs = tuple(
            FeatureSpec(
                name=e["name"],
                group=e["group"],
                aggregation=e.get("aggregation", "single"),
                table=e.get("table"),
                corpus=e.get("corpus"),
                model=e.get("model"),
                measure=e.get("measure"),
            )
            for e in d["features"]
        )
        return FeatureSchema(task=d["task"], specs=specs)
    except KeyError as exc:
        raise FormatError(f"schema description missing key {exc}") from exc
