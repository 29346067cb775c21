"""Lexical complexity prediction for words and two-word expressions.

The pipeline: count corpus frequencies, load lexicons with surface-then-
lemma lookup, derive collocation measures, assemble feature matrices with
explicit missing values, train a histogram gradient-boosted tree
regressor, and evaluate with k-fold cross-validation, feature ablation,
and repeated-target reports. `python -m lexcomp.cli` (or the `lexcomp`
script) exposes each stage.
"""

from . import ablation, assoc, corpus, evaluate, features, gbdt, lexicon, reports, rng
from .errors import (
    ConfigurationError,
    DataError,
    FormatError,
    InconsistentCounts,
    LexcompError,
    TrainError,
    UndefinedCorrelation,
)

__version__ = "0.1.0"

__all__ = [
    "ablation",
    "assoc",
    "corpus",
    "evaluate",
    "features",
    "gbdt",
    "lexicon",
    "reports",
    "rng",
    "ConfigurationError",
    "DataError",
    "FormatError",
    "InconsistentCounts",
    "LexcompError",
    "TrainError",
    "UndefinedCorrelation",
    "__version__",
]
