"""Association measures for two-word expressions.

All eight measures are computed from one 2x2 contingency table derived from
corpus counts: f1 and f2 are the component unigram frequencies, f12 the
bigram frequency, n the corpus size in bigram positions.

        |  w2      ~w2   |
    w1  |  o11     o12   |  r1
    ~w1 |  o21     o22   |  r2
        |  c1      c2    |  n

A measure that hits a division by zero or a logarithm of zero is undefined
for that table and comes back as None rather than raising; downstream code
treats None as a missing feature value. pmi uses log base 2; g2 and
simple_ll use the natural log.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InconsistentCounts

MEASURES = (
    "pmi",
    "t_score",
    "z_score",
    "g2",
    "simple_ll",
    "dice",
    "dp_2_given_1",
    "dp_1_given_2",
)


@dataclass(frozen=True)
class ContingencyTable:
    o11: float
    o12: float
    o21: float
    o22: float

    @property
    def r1(self) -> float:
        return self.o11 + self.o12

    @property
    def r2(self) -> float:
        return self.o21 + self.o22

    @property
    def c1(self) -> float:
        return self.o11 + self.o21

    @property
    def c2(self) -> float:
        return self.o12 + self.o22

    @property
    def n(self) -> float:
        return self.o11 + self.o12 + self.o21 + self.o22

    @property
    def expected11(self) -> float:
        return self.r1 * self.c1 / self.n


def contingency(f1: float, f2: float, f12: float, n: float) -> ContingencyTable:
    """Build the 2x2 table from marginal and joint frequencies.

    Raises InconsistentCounts unless f12 <= min(f1, f2) and
    f1 + f2 - f12 <= n, i.e. unless all four cells are nonnegative.
    """
    if f12 > f1 or f12 > f2:
        raise InconsistentCounts(
            f"joint count {f12} exceeds a marginal ({f1}, {f2})")
    if f1 + f2 - f12 > n:
        raise InconsistentCounts(
            f"marginals {f1} + {f2} - {f12} exceed corpus size {n}")
    if min(f1, f2, f12, n) < 0:
        raise InconsistentCounts("negative frequency")
    return ContingencyTable(
        o11=f12,
        o12=f1 - f12,
        o21=f2 - f12,
        o22=n - f1 - f2 + f12,
    )


def pmi(t: ContingencyTable) -> float | None:
    """Pointwise mutual information, log base 2. Undefined when o11 = 0."""
    if t.o11 == 0 or t.n == 0:
        return None
    e = t.expected11
    if e == 0:
        return None
    return math.log2(t.o11 / e)


def t_score(t: ContingencyTable) -> float | None:
    """(o11 - E) / sqrt(o11). Undefined when o11 = 0."""
    if t.o11 == 0 or t.n == 0:
        return None
    return (t.o11 - t.expected11) / math.sqrt(t.o11)


def z_score(t: ContingencyTable) -> float | None:
    """(o11 - E) / sqrt(E). Undefined when the expected count is 0."""
    if t.n == 0:
        return None
    e = t.expected11
    if e == 0:
        return None
    return (t.o11 - e) / math.sqrt(e)


def g2(t: ContingencyTable) -> float | None:
    """Log-likelihood ratio over all four cells; zero cells contribute 0."""
    if t.n == 0:
        return None
    total = 0.0
    for o, r, c in (
        (t.o11, t.r1, t.c1),
        (t.o12, t.r1, t.c2),
        (t.o21, t.r2, t.c1),
        (t.o22, t.r2, t.c2),
    ):
        if o == 0:
            continue
        e = r * c / t.n
        if e == 0:
            return None
        total += o * math.log(o / e)
    return 2.0 * total


def simple_ll(t: ContingencyTable) -> float | None:
    """2 * (o11 * ln(o11 / E) - (o11 - E)). Undefined when o11 = 0."""
    if t.o11 == 0 or t.n == 0:
        return None
    e = t.expected11
    if e == 0:
        return None
    return 2.0 * (t.o11 * math.log(t.o11 / e) - (t.o11 - e))


def dice(t: ContingencyTable) -> float | None:
    """2 * o11 / (r1 + c1). Undefined when both marginals are 0."""
    denom = t.r1 + t.c1
    if denom == 0:
        return None
    return 2.0 * t.o11 / denom


def dp_2_given_1(t: ContingencyTable) -> float | None:
    """deltaP(w2|w1) = o11/r1 - o21/r2. Undefined when a row is empty."""
    if t.r1 == 0 or t.r2 == 0:
        return None
    return t.o11 / t.r1 - t.o21 / t.r2


def dp_1_given_2(t: ContingencyTable) -> float | None:
    """deltaP(w1|w2) = o11/c1 - o12/c2. Undefined when a column is empty."""
    if t.c1 == 0 or t.c2 == 0:
        return None
    return t.o11 / t.c1 - t.o12 / t.c2


_FUNCS = {
    "pmi": pmi,
    "t_score": t_score,
    "z_score": z_score,
    "g2": g2,
    "simple_ll": simple_ll,
    "dice": dice,
    "dp_2_given_1": dp_2_given_1,
    "dp_1_given_2": dp_1_given_2,
}


def all_measures(t: ContingencyTable) -> dict[str, float | None]:
    """Every measure for one table, keyed by name, in MEASURES order."""
    return {name: _FUNCS[name](t) for name in MEASURES}


def measures_from_counts(
    f1: float, f2: float, f12: float, n: float,
) -> dict[str, float | None]:
    """Convenience wrapper: contingency() then all_measures()."""
    return all_measures(contingency(f1, f2, f12, n))
