"""Outcome codes and confusion distributions.

Every prediction is reduced to one outcome code: ``0`` for a hit, otherwise
the 1-based true and predicted class indices concatenated (``12`` is a
class-1 case predicted as class 2). With more than nine classes the two
indices are separated by ``|`` so the code stays unambiguous.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class OutcomeCode:
    true: int | None = None
    pred: int | None = None
    wide: bool = False

    def __post_init__(self):
        if (self.true is None) != (self.pred is None):
            raise ValueError("a miss needs both a true and a predicted index")
        if self.true is not None and self.true == self.pred:
            raise ValueError("a miss requires true != predicted")

    @property
    def is_hit(self) -> bool:
        return self.true is None

    def __str__(self) -> str:
        if self.is_hit:
            return "0"
        sep = "|" if self.wide else ""
        return f"{self.true}{sep}{self.pred}"

    @property
    def sort_key(self) -> tuple[bool, str]:
        return (not self.is_hit, str(self))


HIT = OutcomeCode()


def parse_code(text: str, n_labels: int) -> OutcomeCode:
    text = str(text).strip()
    if text == "0":
        return HIT
    wide = n_labels > 9
    if wide:
        t, p = text.split("|")
    else:
        if len(text) != 2:
            raise ValueError(f"bad outcome code {text!r}")
        t, p = text[0], text[1]
    return OutcomeCode(int(t), int(p), wide)


def encode_outcome(true_label, pred_label, labels: Sequence) -> OutcomeCode:
    """Outcome code for one prediction against the ordered label universe."""
    if true_label == pred_label:
        if true_label not in labels:
            raise ValueError(f"unknown label {true_label!r}")
        return HIT
    try:
        t = labels.index(true_label) + 1
        p = labels.index(pred_label) + 1
    except ValueError:
        bad = true_label if true_label not in labels else pred_label
        raise ValueError(f"unknown label {bad!r}") from None
    return OutcomeCode(t, p, len(labels) > 9)


def all_codes(n_labels: int) -> list[OutcomeCode]:
    """Every possible code for a label universe, in display order."""
    wide = n_labels > 9
    codes = [OutcomeCode(t, p, wide) for t in range(1, n_labels + 1)
             for p in range(1, n_labels + 1) if t != p]
    return [HIT] + sorted(codes, key=lambda c: c.sort_key)


@dataclass(frozen=True, eq=False)
class ConfusionDistribution:
    """Counts of outcome codes over a set of cases."""

    counts: Mapping[OutcomeCode, int]

    def __post_init__(self):
        clean = {}
        for code, n in self.counts.items():
            if n < 0:
                raise ValueError(f"negative count for code {code}")
            clean[code] = int(n)
        object.__setattr__(self, "counts", dict(sorted(clean.items(),
                                                        key=lambda kv: kv[0].sort_key)))

    @classmethod
    def from_codes(cls, codes: Iterable[OutcomeCode]) -> "ConfusionDistribution":
        return cls(Counter(codes))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConfusionDistribution):
            return NotImplemented
        return self.nonzero() == other.nonzero()

    def __hash__(self):
        return hash(tuple(self.nonzero().items()))

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, code: OutcomeCode) -> int:
        return self.counts.get(code, 0)

    def nonzero(self) -> dict[OutcomeCode, int]:
        return {c: n for c, n in self.counts.items() if n}

    def codes(self) -> list[OutcomeCode]:
        return [c for c, n in self.counts.items() if n]

    def proportion(self, code: OutcomeCode) -> float:
        total = self.total
        return self[code] / total if total else 0.0

    def proportions(self) -> dict[OutcomeCode, float]:
        total = self.total
        if not total:
            return {}
        return {c: n / total for c, n in self.counts.items() if n}

    @property
    def hits(self) -> int:
        return self[HIT]

    @property
    def errors(self) -> int:
        return self.total - self.hits

    @property
    def accuracy(self) -> float:
        return self.hits / self.total if self.total else float("nan")

    def misses(self) -> "ConfusionDistribution":
        return ConfusionDistribution({c: n for c, n in self.counts.items() if not c.is_hit})

    def __add__(self, other: "ConfusionDistribution") -> "ConfusionDistribution":
        merged = Counter(self.counts)
        merged.update(other.counts)
        return ConfusionDistribution(merged)

    def format_cm(self) -> str:
        """``CM={ 0/0.854,12/0.044,21/0.102 }`` style rendering."""
        body = ",".join(f"{c}/{p:.3f}" for c, p in self.proportions().items())
        return f"CM={{ {body} }}"

    def to_json(self) -> dict[str, int]:
        return {str(c): n for c, n in self.counts.items()}

    @classmethod
    def from_json(cls, cells: Mapping[str, int], n_labels: int) -> "ConfusionDistribution":
        return cls({parse_code(k, n_labels): int(v) for k, v in cells.items()})
