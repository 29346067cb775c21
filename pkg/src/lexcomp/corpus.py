"""Tokenization and unigram/bigram frequency models over plain-text corpora.

A corpus is UTF-8 text with one sentence per line. Tokens are lowercased,
whitespace-delimited pieces with leading/trailing punctuation removed;
internal hyphens and apostrophes survive, so forms like "state-of-the-art"
stay intact. Bigrams are strictly adjacent token pairs and never cross a
sentence boundary.
"""

from __future__ import annotations

import json
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import DataError

Token = str
Bigram = tuple[str, str]


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[Token]:
    """Split a raw sentence into normalized tokens.

    Splits on Unicode whitespace, trims punctuation from both ends of each
    piece, lowercases, and drops pieces that end up empty. Numerals are
    ordinary tokens.
    """
    tokens = []
    for piece in text.split():
        start, end = 0, len(piece)
        while start < end and _is_punct(piece[start]):
            start += 1
        while end > start and _is_punct(piece[end - 1]):
            end -= 1
        word = piece[start:end].lower()
        if word:
            tokens.append(word)
    return tokens


@dataclass(frozen=True)
class FrequencyModel:
    """Immutable unigram/bigram counts for one corpus.

    Counts are plain Python ints, so corpora beyond 2**31 tokens are fine.
    """

    unigram_counts: Mapping[str, int] = field(default_factory=dict)
    bigram_counts: Mapping[Bigram, int] = field(default_factory=dict)
    total_unigrams: int = 0
    total_bigrams: int = 0

    def unigram(self, form: str) -> int:
        return self.unigram_counts.get(form, 0)

    def bigram(self, first: str, second: str) -> int:
        return self.bigram_counts.get((first, second), 0)

    def merge(self, other: "FrequencyModel") -> "FrequencyModel":
        """Combine two partial counts; merging chunked counts of a corpus
        gives exactly the sequential result."""
        uni = Counter(self.unigram_counts)
        uni.update(other.unigram_counts)
        bi = Counter(self.bigram_counts)
        bi.update(other.bigram_counts)
        return FrequencyModel(
            unigram_counts=dict(uni),
            bigram_counts=dict(bi),
            total_unigrams=self.total_unigrams + other.total_unigrams,
            total_bigrams=self.total_bigrams + other.total_bigrams,
        )


def count_frequencies(sentences: Iterable[Sequence[Token]]) -> FrequencyModel:
    """Count every token and every adjacent within-sentence pair."""
    unigrams: Counter = Counter()
    bigrams: Counter = Counter()
    for sentence in sentences:
        unigrams.update(sentence)
        bigrams.update(zip(sentence, sentence[1:]))
    return FrequencyModel(
        unigram_counts=dict(unigrams),
        bigram_counts=dict(bigrams),
        total_unigrams=sum(unigrams.values()),
        total_bigrams=sum(bigrams.values()),
    )


def sentence_length(instance) -> int:
    """Token count of an instance's (already tokenized) sentence."""
    return len(instance.sentence)


def read_corpus(path: str | Path) -> list[list[Token]]:
    """Read a one-sentence-per-line text file into tokenized sentences."""
    sentences = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            sentences.append(tokenize(line))
    return sentences


def save_counts(model: FrequencyModel, prefix: str | Path) -> None:
    """Dump a model as <prefix>.unigrams.tsv, <prefix>.bigrams.tsv and
    <prefix>.meta.json; forms are sorted so dumps are reproducible."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    with open(f"{prefix}.unigrams.tsv", "w", encoding="utf-8") as fh:
        fh.write("form\tcount\n")
        for form in sorted(model.unigram_counts):
            fh.write(f"{form}\t{model.unigram_counts[form]}\n")
    with open(f"{prefix}.bigrams.tsv", "w", encoding="utf-8") as fh:
        fh.write("form1\tform2\tcount\n")
        for pair in sorted(model.bigram_counts):
            fh.write(f"{pair[0]}\t{pair[1]}\t{model.bigram_counts[pair]}\n")
    meta = {
        "total_unigrams": model.total_unigrams,
        "total_bigrams": model.total_bigrams,
    }
    with open(f"{prefix}.meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_counts(prefix: str | Path) -> FrequencyModel:
    """Load a model previously written by save_counts."""
    prefix = Path(prefix)
    unigrams: dict[str, int] = {}
    with open(f"{prefix}.unigrams.tsv", "r", encoding="utf-8") as fh:
        next(fh)
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataError(f"{prefix}.unigrams.tsv:{lineno}: expected 2 columns")
            unigrams[parts[0]] = int(parts[1])
    bigrams: dict[Bigram, int] = {}
    with open(f"{prefix}.bigrams.tsv", "r", encoding="utf-8") as fh:
        next(fh)
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3:
                raise DataError(f"{prefix}.bigrams.tsv:{lineno}: expected 3 columns")
            bigrams[(parts[0], parts[1])] = int(parts[2])
    with open(f"{prefix}.meta.json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    return FrequencyModel(
        unigram_counts=unigrams,
        bigram_counts=bigrams,
        total_unigrams=int(meta["total_unigrams"]),
        total_bigrams=int(meta["total_bigrams"]),
    )
