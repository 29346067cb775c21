import sys
from pathlib import Path

import pytest

from lexcomp.features import TargetInstance
from lexcomp.lexicon import LemmaDictionary, LexiconTable, Resources

TESTS_DIR = Path(__file__).parent
sys.path.insert(0, str(TESTS_DIR))  # oracle_assoc, mini_data

MINI_DIR = TESTS_DIR / "data" / "mini"


@pytest.fixture
def toy_resources() -> Resources:
    """Two small tables, one per group flavor, plus a lemma mapping."""
    return Resources(
        tables=(
            LexiconTable(name="freqlist", group="frequency",
                         entries={"big": 120.0, "cat": 45.0, "dog": 30.0}),
            LexiconTable(name="fam", group="norm",
                         entries={"big": 6.5, "cat": 6.9, "run": 5.0}),
            LexiconTable(name="latency", group="psychometric",
                         entries={"cat": 512.0}),
        ),
        lemmas=LemmaDictionary({"cats": "cat", "ran": "run"}),
    )


@pytest.fixture
def single_instance() -> TargetInstance:
    return TargetInstance(
        id="s1", corpus_id="biomed",
        sentence=("the", "big", "cat"), target=("cat",), gold=0.25)


@pytest.fixture
def bigram_instance() -> TargetInstance:
    return TargetInstance(
        id="b1", corpus_id="europarl",
        sentence=("a", "big", "cat", "sat"), target=("big", "cat"), gold=0.4)
