"""External word lists: frequency lists, lexical norms, psychometric tables.

Tables are TSV files with a header row and configurable key/value columns,
so one multi-column norms file can be loaded once per value column. Values
are resolved by a two-step procedure: the orthographic form first, then the
lemma when the form itself is not listed. Lemmatization is a plain
dictionary lookup (surface<TAB>lemma TSV); a surface absent from the
dictionary is its own lemma.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .corpus import FrequencyModel, load_counts
from .errors import ConfigurationError, FormatError

log = logging.getLogger(__name__)

GROUPS = ("frequency", "norm", "psychometric")


@dataclass(frozen=True)
class LexiconTable:
    name: str
    group: str
    entries: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ConfigurationError(
                f"table {self.name!r}: unknown group {self.group!r}; expected one of {GROUPS}"
            )


@dataclass(frozen=True)
class LemmaDictionary:
    entries: Mapping[str, str] = field(default_factory=dict)

    def lemma_of(self, surface: str) -> str:
        """Lemma for a surface form; unknown surfaces lemmatize to themselves."""
        return self.entries.get(surface, surface)


def lookup(table: LexiconTable, surface: str, lemma: Optional[str] = None) -> Optional[float]:
    """Two-step value resolution: surface form first, then the lemma.

    Absence is a value (None), never an error; a surface hit always shadows
    a lemma hit.
    """
    value = table.entries.get(surface)
    if value is not None:
        return value
    if lemma is not None:
        return table.entries.get(lemma)
    return None


def load_lexicon(
    path: str | Path,
    name: str,
    group: str,
    key_column: int = 0,
    value_column: int = 1,
) -> LexiconTable:
    """Load one table from a TSV file with a header row.

    Keys are lowercased. Duplicate keys keep the first occurrence; rows with
    missing or non-numeric values are skipped. Both cases log a warning.
    Raises FormatError when no row is usable at all.
    """
    entries: dict[str, float] = {}
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        next(fh, None)  # header
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) <= max(key_column, value_column):
                log.warning("%s:%d: too few columns, row skipped", path, lineno)
                continue
            key = parts[key_column].strip().lower()
            if not key:
                log.warning("%s:%d: empty key, row skipped", path, lineno)
                continue
            try:
                value = float(parts[value_column])
            except ValueError:
                log.warning("%s:%d: non-numeric value %r, row skipped",
                            path, lineno, parts[value_column])
                continue
            if not math.isfinite(value):
                log.warning("%s:%d: non-finite value %r, row skipped",
                            path, lineno, parts[value_column])
                continue
            if key in entries:
                log.warning("%s:%d: duplicate key %r, first value kept", path, lineno, key)
                continue
            entries[key] = value
    if not entries:
        raise FormatError(f"{path}: no parsable rows")
    return LexiconTable(name=name, group=group, entries=entries)


def load_lemma_dictionary(path: str | Path) -> LemmaDictionary:
    """Load a surface<TAB>lemma TSV (header row expected, like every table)."""
    entries: dict[str, str] = {}
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        next(fh, None)
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2 or not parts[0] or not parts[1]:
                log.warning("%s:%d: malformed lemma row skipped", path, lineno)
                continue
            surface = parts[0].strip().lower()
            lemma = parts[1].strip().lower()
            if surface and lemma and surface not in entries:
                entries[surface] = lemma
    return LemmaDictionary(entries=entries)


@dataclass(frozen=True)
class Resources:
    """Everything featurization needs: tables, lemmas, frequency models."""

    tables: tuple[LexiconTable, ...] = ()
    lemmas: LemmaDictionary = field(default_factory=LemmaDictionary)
    frequency_models: Mapping[str, FrequencyModel] = field(default_factory=dict)

    def tables_in_group(self, group: str) -> tuple[LexiconTable, ...]:
        return tuple(t for t in self.tables if t.group == group)

    def table(self, name: str) -> LexiconTable:
        for t in self.tables:
            if t.name == name:
                return t
        raise ConfigurationError(f"no lexicon table named {name!r} is loaded")


def load_resources(manifest_path: str | Path) -> Resources:
    """Load a resource manifest and every file it references.

    The manifest is JSON:

        {
          "lemma_dictionary": "lemmas.tsv",
          "tables": [
            {"name": "coca", "group": "frequency", "path": "coca.tsv",
             "key_column": 0, "value_column": 1},
            ...
          ],
          "frequency_models": [
            {"name": "toy", "prefix": "counts/toy"}
          ]
        }

    Relative paths resolve against the manifest's own directory.
    """
    manifest_path = Path(manifest_path)
    with open(manifest_path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    base = manifest_path.parent

    tables = []
    seen_names = set()
    for entry in manifest.get("tables", []):
        try:
            name = entry["name"]
            group = entry["group"]
            path = base / entry["path"]
        except KeyError as exc:
            raise ConfigurationError(f"{manifest_path}: table entry missing key {exc}") from exc
        if name in seen_names:
            raise ConfigurationError(f"{manifest_path}: duplicate table name {name!r}")
        seen_names.add(name)
        tables.append(load_lexicon(
            path,
            name=name,
            group=group,
            key_column=int(entry.get("key_column", 0)),
            value_column=int(entry.get("value_column", 1)),
        ))

    lemmas = LemmaDictionary()
    if manifest.get("lemma_dictionary"):
        lemmas = load_lemma_dictionary(base / manifest["lemma_dictionary"])

    models: dict[str, FrequencyModel] = {}
    for entry in manifest.get("frequency_models", []):
        try:
            name = entry["name"]
            prefix = base / entry["prefix"]
        except KeyError as exc:
            raise ConfigurationError(
                f"{manifest_path}: frequency model entry missing key {exc}") from exc
        if name in models:
            raise ConfigurationError(f"{manifest_path}: duplicate frequency model {name!r}")
        models[name] = load_counts(prefix)

    return Resources(tables=tuple(tables), lemmas=lemmas, frequency_models=models)
