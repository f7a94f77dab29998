"""Classification error dependence plots.

An EDP splits the cross-validated confusion distribution of a model across
the bins of one predictor. The error-zoom variant drops the hits and shows
how each bin's errors split, annotated with its share of all errors.
"""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .confusion import ConfusionDistribution, OutcomeCode, all_codes, parse_code
from .cv import PredictionSet
from .ingest import Bin, BinScheme, DataError, Dataset, default_scheme

GLOBAL = "GLOBAL"


@dataclass(frozen=True)
class BinStats:
    bin: Bin
    distribution: ConfusionDistribution
    count: int
    share: float


@dataclass(frozen=True)
class EDPResult:
    predictor: str
    scheme: BinScheme
    bins: tuple[BinStats, ...]
    global_: ConfusionDistribution
    labels: tuple[str, ...]
    n_rows: int
    n_missing: int = 0
    out_of_range: int = 0

    @property
    def covered(self) -> ConfusionDistribution:
        """Element-wise sum of the per-bin distributions."""
        total = ConfusionDistribution({})
        for b in self.bins:
            total = total + b.distribution
        return total


@dataclass(frozen=True)
class ZoomBin:
    bin: Bin
    errors: ConfusionDistribution
    count: int
    share: float  # of the errors on rows where the predictor is present


@dataclass(frozen=True)
class ZoomView:
    predictor: str
    bins: tuple[ZoomBin, ...]
    global_errors: ConfusionDistribution
    labels: tuple[str, ...]
    total_errors: int

    @property
    def empty(self) -> bool:
        return self.total_errors == 0


def compute_edp(dataset: Dataset, preds: PredictionSet, predictor: str,
                scheme: BinScheme | None = None) -> EDPResult:
    if predictor not in dataset.names:
        raise DataError(f"unknown predictor {predictor!r}")
    if predictor == dataset.target:
        raise DataError(f"{predictor!r} is the target column")
    preds.check_aligned(dataset)
    col = dataset.column(predictor)
    if all(v is None for v in col):
        raise DataError(f"predictor {predictor!r} has no non-missing values")
    if scheme is None:
        scheme = default_scheme(dataset, predictor)
    codes = preds.codes()
    per_bin = [Counter() for _ in scheme.bins]
    clamped = Counter()
    missing = 0
    for v, code in zip(col, codes):
        if v is None:
            missing += 1
            continue
        i, was_clamped = scheme.locate(v)
        if was_clamped:
            clamped[predictor] += 1
        per_bin[i][code] += 1
    n = dataset.n_rows
    stats = tuple(
        BinStats(b, ConfusionDistribution(c), sum(c.values()), sum(c.values()) / n)
        for b, c in zip(scheme.bins, per_bin)
    )
    return EDPResult(predictor, scheme, stats, ConfusionDistribution.from_codes(codes),
                     tuple(preds.labels), n, missing, clamped[predictor])


def error_zoom(edp: EDPResult) -> ZoomView:
    """Keep only the misses; each bin carries its share of the binned errors.

    Errors on rows with a missing predictor stay in the global bar but are
    left out of the share denominator, so bin shares sum to one.
    """
    global_errors = edp.global_.misses()
    total = global_errors.total
    per_bin = [b.distribution.misses() for b in edp.bins]
    binned = sum(e.total for e in per_bin)
    bins = [ZoomBin(b.bin, e, e.total, e.total / binned if binned else 0.0)
            for b, e in zip(edp.bins, per_bin)]
    return ZoomView(edp.predictor, tuple(bins), global_errors, edp.labels, total)


# --------------------------------------------------------------------------
# Export

def edp_to_json(edp: EDPResult) -> dict:
    return {
        "predictor": edp.predictor,
        "labels": list(edp.labels),
        "n_rows": edp.n_rows,
        "n_missing": edp.n_missing,
        "out_of_range": edp.out_of_range,
        "scheme": edp.scheme.to_json(),
        "bins": [{"label": b.bin.label, "count": b.count, "share": b.share,
                  "cells": b.distribution.to_json()} for b in edp.bins],
        "global": {"count": edp.global_.total, "cells": edp.global_.to_json()},
    }


def zoom_to_json(view: ZoomView) -> dict:
    return {
        "predictor": view.predictor,
        "total_errors": view.total_errors,
        "no_errors": view.empty,
        "bins": [{"label": b.bin.label, "errors": b.count, "share_of_errors": b.share,
                  "cells": b.errors.to_json()} for b in view.bins],
        "global": {"errors": view.total_errors, "cells": view.global_errors.to_json()},
    }


def edp_from_json(doc: dict) -> EDPResult:
    labels = tuple(doc["labels"])
    scheme = BinScheme.from_json(doc["scheme"])
    by_label = {b.label: b for b in scheme.bins}
    bins = tuple(
        BinStats(by_label[b["label"]], ConfusionDistribution.from_json(b["cells"], len(labels)),
                 b["count"], b["share"])
        for b in doc["bins"]
    )
    glob = ConfusionDistribution.from_json(doc["global"]["cells"], len(labels))
    return EDPResult(doc["predictor"], scheme, bins, glob, labels, doc["n_rows"],
                     doc.get("n_missing", 0), doc.get("out_of_range", 0))


def write_edp_json(edp: EDPResult, path: str | Path, zoom: ZoomView | None = None) -> None:
    doc = edp_to_json(edp)
    if zoom is not None:
        doc["zoom"] = zoom_to_json(zoom)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_edp_json(path: str | Path) -> EDPResult:
    return edp_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def _code_universe(edp: EDPResult) -> list[OutcomeCode]:
    seen = set(edp.global_.codes())
    for b in edp.bins:
        seen.update(b.distribution.codes())
    return [c for c in all_codes(len(edp.labels)) if c in seen]


def edp_to_csv(edp: EDPResult) -> str:
    """Rows of ``bin,code,count,proportion``; every bin lists every observed code."""
    codes = _code_universe(edp)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["bin", "code", "count", "proportion"])
    for label, dist in [(b.bin.label, b.distribution) for b in edp.bins] + [(GLOBAL, edp.global_)]:
        for c in codes:
            w.writerow([label, str(c), dist[c], repr(dist.proportion(c))])
    return out.getvalue()


def edp_from_csv(text: str, labels: tuple[str, ...]) -> dict[str, ConfusionDistribution]:
    cells: dict[str, dict] = {}
    for r in csv.DictReader(io.StringIO(text)):
        cells.setdefault(r["bin"], {})[parse_code(r["code"], len(labels))] = int(r["count"])
    return {k: ConfusionDistribution(v) for k, v in cells.items()}
