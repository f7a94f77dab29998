"""Tabular data loading and predictor discretization.

A :class:`Dataset` is stored column-major: each column is a tuple of cells
where numeric cells are floats, categorical cells are strings and missing
cells are ``None``. Numeric predictors are partitioned into quantile bins
(10/35/65/90% by default); categorical predictors use one bin per category.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"
KINDS = (NUMERIC, CATEGORICAL)

DEFAULT_MISSING = ("", "NA", "?")
DEFAULT_PROBS = (0.10, 0.35, 0.65, 0.90)


class DataError(ValueError):
    """Input data is malformed or inconsistent."""


class UnknownCategoryError(DataError):
    """A categorical value does not belong to any bin of a scheme."""


@dataclass(frozen=True)
class Column:
    name: str
    kind: str


@dataclass(frozen=True, eq=False)
class Dataset:
    columns: tuple[Column, ...]
    data: Mapping[str, tuple]
    target: str
    class_labels: tuple[str, ...] = ()

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError(f"duplicate column names in {names}")
        for c in self.columns:
            if c.kind not in KINDS:
                raise DataError(f"column {c.name!r}: unknown kind {c.kind!r}")
        if self.target not in names:
            raise DataError(f"target column {self.target!r} not found")
        if self.kind(self.target) != CATEGORICAL:
            raise DataError(f"target column {self.target!r} must be categorical")
        lengths = {len(self.data[n]) for n in names}
        if len(lengths) > 1:
            raise DataError("columns have different lengths")
        y = self.data[self.target]
        if any(v is None for v in y):
            raise DataError("target column has missing values")
        labels = tuple(dict.fromkeys(y))
        if self.class_labels and tuple(self.class_labels) != labels:
            raise DataError(
                f"class_labels {self.class_labels} do not match target values {labels}"
            )
        object.__setattr__(self, "class_labels", labels)

    @classmethod
    def from_columns(cls, columns: Mapping[str, Sequence], target: str,
                     kinds: Mapping[str, str] | None = None) -> "Dataset":
        """Build a dataset from raw python values, inferring column kinds."""
        kinds = dict(kinds or {})
        cols, data = [], {}
        for name, values in columns.items():
            kind = kinds.get(name)
            if kind is None:
                kind = CATEGORICAL if name == target else _infer_kind(values)
            cols.append(Column(name, kind))
            data[name] = tuple(_coerce(v, kind) for v in values)
        return cls(tuple(cols), data, target)

    @property
    def n_rows(self) -> int:
        return len(self.data[self.target])

    def __len__(self) -> int:
        return self.n_rows

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def predictors(self) -> list[str]:
        return [c.name for c in self.columns if c.name != self.target]

    def kind(self, name: str) -> str:
        for c in self.columns:
            if c.name == name:
                return c.kind
        raise KeyError(name)

    def column(self, name: str) -> tuple:
        return self.data[name]

    @property
    def y(self) -> tuple[str, ...]:
        return self.data[self.target]

    def row(self, i: int) -> dict:
        return {n: self.data[n][i] for n in self.names}

    def rows(self) -> Iterator[dict]:
        for i in range(self.n_rows):
            yield self.row(i)

    def replace_columns(self, columns: Mapping[str, tuple[str, tuple]]) -> "Dataset":
        """Return a copy with some columns swapped for ``(kind, cells)`` pairs."""
        cols, data = [], dict(self.data)
        for c in self.columns:
            if c.name in columns:
                kind, cells = columns[c.name]
                cols.append(Column(c.name, kind))
                data[c.name] = tuple(cells)
            else:
                cols.append(c)
        return Dataset(tuple(cols), data, self.target)


def _is_number(text: str) -> bool:
    try:
        return math.isfinite(float(text))
    except ValueError:
        return False


def _infer_kind(values: Iterable) -> str:
    for v in values:
        if v is None:
            continue
        if isinstance(v, bool):
            return CATEGORICAL
        if isinstance(v, (int, float)):
            continue
        if not _is_number(str(v)):
            return CATEGORICAL
    return NUMERIC


def _coerce(value, kind: str):
    if value is None:
        return None
    if isinstance(value, float) and math.isnan(value):
        return None
    if kind == NUMERIC:
        return float(value)
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def load_csv(path: str | Path, target: str,
             schema_hints: Mapping[str, str] | None = None,
             missing: Sequence[str] = DEFAULT_MISSING) -> Dataset:
    """Read a headed CSV file into a :class:`Dataset`.

    A column is numeric when every non-missing cell parses as a finite
    number, categorical otherwise; ``schema_hints`` overrides that. Rows
    whose target cell is missing are dropped with a warning.
    """
    path = Path(path)
    missing = set(missing)
    try:
        with path.open(newline="", encoding="utf-8-sig") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise DataError(f"{path}: empty file") from None
            records = []
            for lineno, rec in enumerate(reader, start=2):
                if not rec or (len(rec) == 1 and not rec[0].strip()):
                    continue
                if len(rec) != len(header):
                    raise DataError(
                        f"{path}:{lineno}: expected {len(header)} fields, got {len(rec)}"
                    )
                records.append((lineno, rec))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    if target not in header:
        raise DataError(f"{path}: target column {target!r} not in header {header}")
    t = header.index(target)
    kept = []
    for lineno, rec in records:
        if rec[t].strip() in missing:
            warnings.warn(f"{path}:{lineno}: target cell missing, row rejected",
                          stacklevel=2)
            continue
        kept.append(rec)

    hints = dict(schema_hints or {})
    unknown = set(hints) - set(header)
    if unknown:
        raise DataError(f"schema hints name unknown columns: {sorted(unknown)}")
    raw: dict[str, list] = {}
    kinds: dict[str, str] = {}
    for j, name in enumerate(header):
        cells = [None if rec[j].strip() in missing else rec[j].strip() for rec in kept]
        kind = hints.get(name)
        if kind is None:
            kind = CATEGORICAL if name == target else (
                NUMERIC if all(_is_number(c) for c in cells if c is not None) else CATEGORICAL
            )
        if kind == NUMERIC:
            bad = [c for c in cells if c is not None and not _is_number(c)]
            if bad:
                raise DataError(f"column {name!r} declared numeric but has value {bad[0]!r}")
        raw[name] = cells
        kinds[name] = kind
    cols = tuple(Column(n, kinds[n]) for n in header)
    data = {n: tuple(None if v is None else (float(v) if kinds[n] == NUMERIC else v)
                     for v in raw[n]) for n in header}
    return Dataset(cols, data, target)


# --------------------------------------------------------------------------
# Bins

@dataclass(frozen=True)
class Bin:
    label: str
    lower: float | None = None
    upper: float | None = None
    closed_left: bool = False
    category: str | None = None

    @property
    def degenerate(self) -> bool:
        return self.lower is not None and self.lower == self.upper

    def contains(self, value) -> bool:
        if self.category is not None:
            return value == self.category
        if self.closed_left:
            return self.lower <= value <= self.upper
        return self.lower < value <= self.upper


@dataclass(frozen=True)
class BinScheme:
    predictor: str
    kind: str
    bins: tuple[Bin, ...]
    boundaries: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.bins:
            raise DataError(f"bin scheme for {self.predictor!r} has no bins")
        object.__setattr__(self, "_index", {b.label: i for i, b in enumerate(self.bins)})

    def __len__(self) -> int:
        return len(self.bins)

    @property
    def labels(self) -> list[str]:
        return [b.label for b in self.bins]

    def label_index(self, label: str) -> int:
        return self._index[label]

    def locate(self, value) -> tuple[int, bool]:
        """Index of the bin holding ``value`` and whether it was clamped."""
        if self.kind == CATEGORICAL:
            try:
                return self._index[str(value)], False
            except KeyError:
                raise UnknownCategoryError(
                    f"{self.predictor}: category {value!r} not in scheme"
                ) from None
        value = float(value)
        if not math.isfinite(value):
            raise DataError(f"{self.predictor}: non-finite value {value!r}")
        uppers = self.boundaries[1:]
        if value < self.boundaries[0]:
            return 0, True
        if value > uppers[-1]:
            return len(self.bins) - 1, True
        # first bin is closed on both sides; the rest are ]lo, hi]
        i = int(np.searchsorted(uppers, value, side="left"))
        return i, False

    def to_json(self) -> dict:
        if self.kind == NUMERIC:
            return {"predictor": self.predictor, "kind": NUMERIC,
                    "boundaries": list(self.boundaries)}
        return {"predictor": self.predictor, "kind": CATEGORICAL,
                "categories": [b.category for b in self.bins]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "BinScheme":
        kind = doc.get("kind", NUMERIC if "boundaries" in doc else CATEGORICAL)
        if kind == NUMERIC:
            return scheme_from_boundaries(doc["predictor"], doc["boundaries"])
        return _categorical_scheme(doc["predictor"], doc["categories"])


def format_number(x: float) -> str:
    return f"{x:.4g}"


def scheme_from_boundaries(predictor: str, boundaries: Sequence[float]) -> BinScheme:
    """Build numeric bins from an ordered boundary list.

    The first bin is ``[b0, b1]`` (degenerate when ``b0 == b1``); every later
    bin is ``]b_i, b_i+1]``, and empty ones (``b_i == b_i+1``) are dropped.
    """
    b = [float(x) for x in boundaries]
    if not b:
        raise DataError(f"{predictor}: no boundaries given")
    if any(not math.isfinite(x) for x in b):
        raise DataError(f"{predictor}: non-finite boundary")
    if any(x > y for x, y in zip(b, b[1:])):
        raise DataError(f"{predictor}: boundaries must be non-decreasing: {b}")
    if len(b) == 1:
        b = b * 2
    kept = [b[0], b[1]]
    for x in b[2:]:
        if x > kept[-1]:
            kept.append(x)
    bins = []
    for i, (lo, hi) in enumerate(zip(kept, kept[1:])):
        if i == 0:
            label = (f"[{format_number(lo)}]" if lo == hi
                     else f"[{format_number(lo)} : {format_number(hi)}]")
            bins.append(Bin(label, lo, hi, closed_left=True))
        else:
            bins.append(Bin(f"]{format_number(lo)} : {format_number(hi)}]", lo, hi))
    labels = [x.label for x in bins]
    if len(set(labels)) != len(labels):
        # boundaries closer than the display precision; fall back to full repr
        bins = [Bin(x.label.replace(format_number(x.lower), repr(x.lower))
                    .replace(format_number(x.upper), repr(x.upper)),
                    x.lower, x.upper, x.closed_left) for x in bins]
    return BinScheme(predictor, NUMERIC, tuple(bins), tuple(kept))


def quantile_bins(values: Iterable, probs: Sequence[float] = DEFAULT_PROBS,
                  predictor: str = "") -> BinScheme:
    """Quantile bins over the non-missing ``values``.

    Boundaries are linearly interpolated empirical quantiles (R type 7)
    bracketed by the observed minimum and maximum.
    """
    xs = [float(v) for v in values if v is not None]
    if not xs:
        raise DataError(f"{predictor or 'column'}: no non-missing values to bin")
    arr = np.asarray(xs, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{predictor or 'column'}: non-finite values")
    probs = [float(p) for p in probs]
    if any(not 0 < p < 1 for p in probs) or any(p >= q for p, q in zip(probs, probs[1:])):
        raise DataError(f"probs must be strictly increasing in (0, 1): {probs}")
    qs = np.quantile(arr, probs, method="linear") if probs else []
    bounds = [float(arr.min()), *map(float, qs), float(arr.max())]
    # guard against interpolation round-off breaking monotonicity
    bounds = list(np.maximum.accumulate(bounds))
    return scheme_from_boundaries(predictor, bounds)


def _categorical_scheme(predictor: str, categories: Iterable) -> BinScheme:
    cats = list(dict.fromkeys(str(c) for c in categories))
    return BinScheme(predictor, CATEGORICAL,
                     tuple(Bin(c, category=c) for c in cats))


def categorical_bins(dataset: Dataset, predictor: str) -> BinScheme:
    """One bin per distinct non-missing category, in first-appearance order."""
    if dataset.kind(predictor) != CATEGORICAL:
        raise DataError(f"{predictor!r} is numeric; use quantile_bins")
    return _categorical_scheme(predictor, (v for v in dataset.column(predictor) if v is not None))


def default_scheme(dataset: Dataset, predictor: str,
                   probs: Sequence[float] = DEFAULT_PROBS) -> BinScheme:
    if dataset.kind(predictor) == NUMERIC:
        return quantile_bins(dataset.column(predictor), probs, predictor=predictor)
    return categorical_bins(dataset, predictor)


def default_schemes(dataset: Dataset, overrides: Mapping[str, BinScheme] | None = None,
                    predictors: Iterable[str] | None = None) -> dict[str, BinScheme]:
    overrides = dict(overrides or {})
    out = {}
    for p in (predictors if predictors is not None else dataset.predictors):
        out[p] = overrides.get(p) or default_scheme(dataset, p)
    return out


def find_bin(value, scheme: BinScheme, out_of_range: Counter | None = None) -> Bin:
    """Return the bin containing ``value``.

    Numeric values outside the scheme's range are clamped to the nearest
    end bin; pass a Counter to tally those events per predictor.
    """
    i, clamped = scheme.locate(value)
    if clamped and out_of_range is not None:
        out_of_range[scheme.predictor] += 1
    return scheme.bins[i]


def discretize(dataset: Dataset, schemes: Mapping[str, BinScheme],
               out_of_range: Counter | None = None) -> Dataset:
    """Replace every numeric predictor cell by its bin label."""
    missing = [p for p in dataset.predictors if p not in schemes]
    if missing:
        raise DataError(f"no bin scheme for predictors {missing}")
    counts = Counter() if out_of_range is None else out_of_range
    swapped = {}
    for p in dataset.predictors:
        if dataset.kind(p) != NUMERIC:
            continue
        scheme = schemes[p]
        if scheme.kind != NUMERIC:
            raise DataError(f"{p!r}: numeric column needs a numeric scheme")
        cells = tuple(None if v is None else find_bin(v, scheme, counts).label
                      for v in dataset.column(p))
        swapped[p] = (CATEGORICAL, cells)
    if sum(counts.values()):
        warnings.warn(f"values outside bin ranges were clamped: {dict(counts)}",
                      stacklevel=2)
    return dataset.replace_columns(swapped)


def save_schemes(schemes: Iterable[BinScheme], path: str | Path) -> None:
    Path(path).write_text(json.dumps([s.to_json() for s in schemes], indent=2) + "\n",
                          encoding="utf-8")


def load_schemes(path: str | Path) -> dict[str, BinScheme]:
    """Read bin schemes from JSON.

    Accepts either a list of scheme documents or a mapping of predictor to
    a boundary list (user-defined numeric ranges).
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read bin file {path}: {exc}") from exc
    if isinstance(doc, Mapping):
        return {p: (scheme_from_boundaries(p, b) if isinstance(b, list)
                    else BinScheme.from_json({"predictor": p, **b}))
                for p, b in doc.items()}
    schemes = [BinScheme.from_json(d) for d in doc]
    return {s.predictor: s for s in schemes}
