"""Cross-validated predictions and the built-in learners.

Every case gets a prediction from a model that never saw it: the rows are
shuffled with a seeded generator, cut into ``k`` folds of near-equal size,
and each fold is predicted by a model trained on the others. Predictions
from any external model can be imported instead.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

from .confusion import ConfusionDistribution, encode_outcome
from .ingest import NUMERIC, DataError, Dataset

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood); 64-bit state, portable."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def permutation(n: int, seed: int) -> list[int]:
    perm = list(range(n))
    SplitMix64(seed).shuffle(perm)
    return perm


def kfold_partition(n: int, k: int, seed: int) -> list[int]:
    """Fold number for each of ``n`` cases.

    The first ``n % k`` folds take one extra case, so fold sizes differ by
    at most one.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of cases ({n})")
    folds = [0] * n
    base, extra = divmod(n, k)
    pos = 0
    perm = permutation(n, seed)
    for f in range(k):
        size = base + (f < extra)
        for i in perm[pos:pos + size]:
            folds[i] = f
        pos += size
    return folds


# --------------------------------------------------------------------------
# Learners

class Model(Protocol):
    def predict(self, dataset: Dataset, i: int) -> str: ...


class Learner(Protocol):
    name: str

    def train(self, dataset: Dataset, rows: Sequence[int]) -> Model: ...


def _ranked_labels(dataset: Dataset, rows: Sequence[int]) -> list[tuple[str, int]]:
    counts = Counter(dataset.y[i] for i in rows)
    return [(c, counts[c]) for c in dataset.class_labels if counts[c]]


def _modal(ranked: list[tuple[str, int]]) -> str:
    best, best_n = ranked[0]
    for label, n in ranked[1:]:
        if n > best_n:
            best, best_n = label, n
    return best


@dataclass
class MajorityModel:
    label: str

    def predict(self, dataset: Dataset, i: int) -> str:
        return self.label


class Majority:
    """Always predicts the modal training class; ties go to the earliest label."""

    name = "majority"

    def train(self, dataset: Dataset, rows: Sequence[int]) -> MajorityModel:
        if not rows:
            raise ValueError("cannot train on an empty set")
        return MajorityModel(_modal(_ranked_labels(dataset, rows)))


# zero-probability floor: one unseen category vetoes a class but scores stay comparable
LOG_ZERO = -1e12
VAR_FLOOR = 1e-9


@dataclass
class NaiveBayesModel:
    classes: list[str]
    log_prior: list[float]
    majority: str
    # per predictor: ("numeric", [(mean, var) per class]) or ("categorical", [dict per class])
    tables: dict[str, tuple[str, list]] = field(default_factory=dict)

    def scores(self, dataset: Dataset, i: int) -> list[float] | None:
        scores = list(self.log_prior)
        used = False
        for name, (kind, params) in self.tables.items():
            v = dataset.data[name][i]
            if v is None:
                continue
            used = True
            if kind == NUMERIC:
                for c, p in enumerate(params):
                    if p is None:
                        continue
                    mu, var = p
                    scores[c] += -0.5 * (math.log(2 * math.pi * var) + (v - mu) ** 2 / var)
            else:
                for c, logp in enumerate(params):
                    scores[c] += logp.get(v, LOG_ZERO)
        return scores if used else None

    def predict(self, dataset: Dataset, i: int) -> str:
        scores = self.scores(dataset, i)
        if scores is None:
            warnings.warn(f"row {i}: every predictor missing, predicting majority class",
                          stacklevel=2)
            return self.majority
        best = 0
        for c in range(1, len(scores)):
            if scores[c] > scores[best]:
                best = c
        return self.classes[best]


class NaiveBayes:
    """Naive Bayes without Laplace smoothing.

    Categorical predictors use per-class relative frequencies; numeric ones
    a per-class Gaussian with the unbiased variance estimate.
    """

    name = "nb"

    def train(self, dataset: Dataset, rows: Sequence[int]) -> NaiveBayesModel:
        if not rows:
            raise ValueError("cannot train on an empty set")
        ranked = _ranked_labels(dataset, rows)
        classes = [c for c, _ in ranked]
        index = {c: j for j, c in enumerate(classes)}
        n = len(rows)
        model = NaiveBayesModel(classes, [math.log(k / n) for _, k in ranked], _modal(ranked))
        y = dataset.y
        for name in dataset.predictors:
            col = dataset.data[name]
            if dataset.kind(name) == NUMERIC:
                groups: list[list[float]] = [[] for _ in classes]
                for i in rows:
                    if col[i] is not None:
                        groups[index[y[i]]].append(col[i])
                params = []
                for g in groups:
                    if not g:
                        params.append(None)
                        continue
                    mu = math.fsum(g) / len(g)
                    var = math.fsum((x - mu) ** 2 for x in g) / (len(g) - 1) if len(g) > 1 else 0.0
                    params.append((mu, max(var, VAR_FLOOR)))
                model.tables[name] = (NUMERIC, params)
            else:
                counts = [Counter() for _ in classes]
                for i in rows:
                    if col[i] is not None:
                        counts[index[y[i]]][col[i]] += 1
                logs = []
                for cnt in counts:
                    tot = sum(cnt.values())
                    logs.append({v: math.log(k / tot) for v, k in cnt.items()})
                model.tables[name] = ("categorical", logs)
        return model


LEARNERS = {"nb": NaiveBayes, "majority": Majority}


def make_learner(name: str) -> Learner:
    try:
        return LEARNERS[name]()
    except KeyError:
        raise ValueError(
            f"unknown learner {name!r}; supported: {', '.join(sorted(LEARNERS))} "
            "(other models: import their predictions)"
        ) from None


# --------------------------------------------------------------------------
# Prediction sets

@dataclass(frozen=True)
class PredictionSet:
    true: tuple[str, ...]
    pred: tuple[str, ...]
    labels: tuple[str, ...]
    k: int = 0
    seed: int | None = None
    learner: str | None = None

    def __post_init__(self):
        if len(self.true) != len(self.pred):
            raise DataError("true and predicted columns differ in length")
        universe = set(self.labels)
        for v in (*self.true, *self.pred):
            if v not in universe:
                raise DataError(f"label {v!r} missing from the label universe")

    def __len__(self) -> int:
        return len(self.true)

    @property
    def entries(self) -> list[tuple[int, str, str]]:
        return list(zip(range(len(self.true)), self.true, self.pred))

    def codes(self) -> list:
        labels = list(self.labels)
        return [encode_outcome(t, p, labels) for t, p in zip(self.true, self.pred)]

    @property
    def accuracy(self) -> float:
        return sum(t == p for t, p in zip(self.true, self.pred)) / len(self.true)

    def check_aligned(self, dataset: Dataset) -> None:
        if len(self) != dataset.n_rows:
            raise DataError(f"{len(self)} predictions for {dataset.n_rows} rows")
        for i, (a, b) in enumerate(zip(self.true, dataset.y)):
            if a != b:
                raise DataError(f"row {i}: true label {a!r} != dataset target {b!r}")

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row_id", "true", "pred"])
            for i, t, p in self.entries:
                w.writerow([i, t, p])

    def sidecar(self, dataset: Dataset | None = None) -> dict:
        return {"k": self.k, "seed": self.seed, "learner": self.learner,
                "dataset_hash": dataset_hash(dataset) if dataset is not None else None}

    def write(self, path: str | Path, dataset: Dataset | None = None) -> Path:
        """Write the CSV and its JSON sidecar (same stem, ``.json``)."""
        path = Path(path)
        self.write_csv(path)
        side = path.with_suffix(".json")
        side.write_text(json.dumps(self.sidecar(dataset), indent=2) + "\n", encoding="utf-8")
        return side


def global_distribution(preds: PredictionSet) -> ConfusionDistribution:
    return ConfusionDistribution.from_codes(preds.codes())


def dataset_hash(dataset: Dataset) -> str:
    h = hashlib.sha256()
    h.update(json.dumps([[c.name, c.kind] for c in dataset.columns]).encode())
    for name in dataset.names:
        h.update(json.dumps(dataset.data[name]).encode())
    return h.hexdigest()


def cross_val_predict(dataset: Dataset, learner: Learner, k: int = 10,
                      seed: int = 0) -> PredictionSet:
    """Predict every row with a model trained on the other folds."""
    if len(dataset.class_labels) < 2:
        raise DataError("need at least two classes for cross-validation")
    if k > dataset.n_rows:
        raise DataError(f"k={k} exceeds the number of rows ({dataset.n_rows})")
    folds = kfold_partition(dataset.n_rows, k, seed)
    members: list[list[int]] = [[] for _ in range(k)]
    for i, f in enumerate(folds):
        members[f].append(i)
    pred: list[str | None] = [None] * dataset.n_rows
    for f in range(k):
        test = members[f]
        train = [i for g in range(k) if g != f for i in members[g]]
        absent = set(dataset.class_labels) - {dataset.y[i] for i in train}
        if absent:
            warnings.warn(f"fold {f}: training split lacks classes {sorted(absent)}",
                          stacklevel=2)
        try:
            model = learner.train(dataset, train)
            for i in test:
                pred[i] = model.predict(dataset, i)
        except Exception as exc:
            raise RuntimeError(f"learner {learner.name!r} failed on fold {f}: {exc}") from exc
    return PredictionSet(dataset.y, tuple(pred), dataset.class_labels, k, seed,
                         getattr(learner, "name", type(learner).__name__))


def import_predictions(dataset: Dataset, path: str | Path) -> PredictionSet:
    """Load ``row_id,true,pred`` predictions made by any external model."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8-sig") as fh:
            reader = csv.DictReader(fh)
            fields = [f.strip() for f in reader.fieldnames or []]
            if not {"row_id", "true", "pred"} <= set(fields):
                raise DataError(f"{path}: header must be row_id,true,pred; got {fields}")
            rows = [{k.strip(): (v or "").strip() for k, v in r.items()} for r in reader]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    n = dataset.n_rows
    true: list[str | None] = [None] * n
    pred: list[str | None] = [None] * n
    for r in rows:
        try:
            i = int(r["row_id"])
        except ValueError:
            raise DataError(f"{path}: bad row_id {r['row_id']!r}") from None
        if not 0 <= i < n:
            raise DataError(f"{path}: row_id {i} outside 0..{n - 1}")
        if true[i] is not None:
            raise DataError(f"{path}: duplicate row_id {i}")
        true[i], pred[i] = r["true"], r["pred"]
    gaps = [i for i, t in enumerate(true) if t is None]
    if gaps:
        raise DataError(f"{path}: missing row_id(s) {gaps[:10]}")
    for i, (a, b) in enumerate(zip(true, dataset.y)):
        if a != b:
            raise DataError(
                f"{path}: row {i} true label {a!r} != dataset target {b!r}; files misaligned"
            )
    extra = [p for p in dict.fromkeys(pred) if p not in dataset.class_labels]
    if extra:
        warnings.warn(f"{path}: predicted labels not in dataset: {extra}", stacklevel=2)
    return PredictionSet(tuple(true), tuple(pred), dataset.class_labels + tuple(extra))
