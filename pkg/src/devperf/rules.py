"""Categorical distribution rules over a model's outcome codes.

Each case becomes a transaction of ``predictor=bin`` items tagged with its
outcome code. Antecedents are enumerated breadth-first with apriori support
pruning, and each frequent antecedent's outcome distribution is tested
against the global one with a chi-squared goodness-of-fit test. A rule is
kept only when significant and strictly better (lower p-value) than every
proper sub-antecedent.

Case sets are Python ints used as bitsets: bit ``i`` is row ``i``.
"""
from __future__ import annotations

import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .confusion import ConfusionDistribution, OutcomeCode
from .cv import PredictionSet
from .ingest import NUMERIC, BinScheme, DataError, Dataset, default_scheme, find_bin
from .stats import Chi2Result, chi2_gof


@dataclass(frozen=True, order=True)
class Item:
    predictor: str
    label: str

    def __str__(self) -> str:
        return f"{self.predictor}={self.label}"


@dataclass(frozen=True)
class MiningConfig:
    minsup: float = 0.01
    alpha: float = 0.05
    max_len: int = 4
    pool_min_expected: float | None = None
    improvement: bool = True

    def __post_init__(self):
        if not 0 < self.minsup <= 1:
            raise ValueError("minsup must be in (0, 1]")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must be in (0, 1]")
        if self.max_len < 1:
            raise ValueError("max_len must be >= 1")
        if self.pool_min_expected is not None and self.pool_min_expected <= 0:
            raise ValueError("pool_min_expected must be positive")


@dataclass(frozen=True)
class DistributionRule:
    antecedent: tuple[Item, ...]
    support: float
    size: int
    distribution: ConfusionDistribution
    p_value: float
    chi2: float
    df: int
    log_p: float

    def sort_key(self):
        return (self.log_p, len(self.antecedent), tuple(str(i) for i in self.antecedent))


@dataclass(frozen=True)
class Subgroup:
    antecedent: tuple[Item, ...]
    size: int
    support: float
    distribution: ConfusionDistribution
    p_value: float | None
    chi2: float | None
    df: int | None

    @property
    def empty(self) -> bool:
        return self.size == 0


def _bitset(mask: np.ndarray) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


class MiningTable:
    """Discretized cases: item bitsets plus one bitset per outcome code."""

    def __init__(self, n_rows: int, items: Sequence[Item], covers: Sequence[int],
                 codes: Sequence[OutcomeCode], code_masks: Sequence[int],
                 predictors: Sequence[str], schemes: Mapping[str, BinScheme] | None = None,
                 labels: Sequence[str] = ()):
        self.n_rows = n_rows
        self.items = list(items)
        self.covers = list(covers)
        self.codes = list(codes)
        self.code_masks = list(code_masks)
        self.predictors = list(predictors)
        self.schemes = dict(schemes or {})
        self.labels = tuple(labels)
        self.all_rows = (1 << n_rows) - 1
        self._item_id = {it: i for i, it in enumerate(self.items)}
        pidx = {p: j for j, p in enumerate(self.predictors)}
        self.item_predictor = [pidx[it.predictor] for it in self.items]

    @classmethod
    def from_records(cls, records: Sequence[tuple[Mapping[str, str], OutcomeCode]],
                     predictors: Sequence[str] | None = None,
                     labels: Sequence[str] = ()) -> "MiningTable":
        """Build from ``({predictor: bin_label}, code)`` pairs (missing keys = no item)."""
        if predictors is None:
            predictors = list(dict.fromkeys(p for rec, _ in records for p in rec))
        n = len(records)
        vocab: dict[Item, list[int]] = {}
        for p in predictors:
            for i, (rec, _) in enumerate(records):
                if rec.get(p) is not None:
                    vocab.setdefault(Item(p, str(rec[p])), []).append(i)
        code_rows: dict[OutcomeCode, list[int]] = {}
        for i, (_, code) in enumerate(records):
            code_rows.setdefault(code, []).append(i)
        return cls._assemble(n, vocab, code_rows, predictors, {}, labels)

    @classmethod
    def _assemble(cls, n, vocab, code_rows, predictors, schemes, labels):
        def bits(rows):
            m = np.zeros(n, dtype=bool)
            m[rows] = True
            return _bitset(m)
        codes = sorted(code_rows, key=lambda c: c.sort_key)
        return cls(n, list(vocab), [bits(r) for r in vocab.values()], codes,
                   [bits(code_rows[c]) for c in codes], predictors, schemes, labels)

    @property
    def reference(self) -> ConfusionDistribution:
        return ConfusionDistribution({c: m.bit_count() for c, m in zip(self.codes, self.code_masks)})

    def item_id(self, item: Item) -> int:
        try:
            return self._item_id[item]
        except KeyError:
            raise DataError(f"item {item} not in the table vocabulary") from None

    def cover(self, items: Iterable[Item]) -> int:
        c = self.all_rows
        for it in items:
            c &= self.covers[self.item_id(it)]
        return c

    def distribution(self, cover: int) -> ConfusionDistribution:
        return ConfusionDistribution({c: (cover & m).bit_count()
                                      for c, m in zip(self.codes, self.code_masks)})

    def resolve(self, predictor: str, text: str) -> Item:
        """Map ``predictor=text`` to a vocabulary item.

        ``text`` may be a bin label (whitespace ignored) or, for numeric
        predictors, a raw value that falls inside a bin.
        """
        if predictor not in self.predictors:
            raise DataError(f"unknown predictor {predictor!r}")
        squash = "".join(text.split())
        for it in self.items:
            if it.predictor == predictor and "".join(it.label.split()) == squash:
                return it
        scheme = self.schemes.get(predictor)
        if scheme is not None and scheme.kind == NUMERIC:
            try:
                value = float(text)
            except ValueError:
                pass
            else:
                return Item(predictor, find_bin(value, scheme).label)
        raise DataError(f"no bin {text!r} for predictor {predictor!r}")


def build_mining_table(dataset: Dataset, preds: PredictionSet,
                       schemes: Mapping[str, BinScheme] | None = None) -> MiningTable:
    """Discretize predictors and attach each case's outcome code."""
    preds.check_aligned(dataset)
    schemes = dict(schemes or {})
    n = dataset.n_rows
    vocab: dict[Item, list[int]] = {}
    used = {}
    clamped = Counter()
    for p in dataset.predictors:
        scheme = schemes.get(p) or default_scheme(dataset, p)
        used[p] = scheme
        rows_by_bin: list[list[int]] = [[] for _ in scheme.bins]
        for i, v in enumerate(dataset.column(p)):
            if v is None:
                continue
            j, was_clamped = scheme.locate(v)
            clamped[p] += was_clamped
            rows_by_bin[j].append(i)
        for b, rows in zip(scheme.bins, rows_by_bin):
            vocab[Item(p, b.label)] = rows
    if sum(clamped.values()):
        warnings.warn(f"values outside bin ranges were clamped: {dict(+clamped)}",
                      stacklevel=2)
    code_rows: dict[OutcomeCode, list[int]] = {}
    for i, code in enumerate(preds.codes()):
        code_rows.setdefault(code, []).append(i)
    return MiningTable._assemble(n, vocab, code_rows, dataset.predictors, used, preds.labels)


def _test(table: MiningTable, cover: int, reference: ConfusionDistribution,
          pool: float | None) -> tuple[ConfusionDistribution, Chi2Result]:
    dist = table.distribution(cover)
    return dist, chi2_gof(dist, reference, pool)


def mine_rules(table: MiningTable, config: MiningConfig = MiningConfig(),
               reference: ConfusionDistribution | None = None,
               trace: list | None = None) -> list[DistributionRule]:
    """Levelwise search for significant, improving distribution rules.

    ``trace``, when given, receives every antecedent (tuple of item ids)
    whose support was counted.
    """
    reference = reference if reference is not None else table.reference
    n = table.n_rows
    if n == 0:
        return []
    min_count = max(1, math.ceil(config.minsup * n - 1e-9))
    floor: dict[tuple[int, ...], float] = {}
    rules: list[DistributionRule] = []

    def evaluate(itemset: tuple[int, ...], cover: int, size: int) -> None:
        dist, res = _test(table, cover, reference, config.pool_min_expected)
        if len(itemset) > 1:
            best_sub = min(floor[itemset[:j] + itemset[j + 1:]] for j in range(len(itemset)))
        else:
            best_sub = math.inf
        floor[itemset] = min(res.log_p, best_sub)
        if res.p_value <= config.alpha and (not config.improvement or res.log_p < best_sub):
            rules.append(DistributionRule(
                tuple(table.items[i] for i in itemset), size / n, size, dist,
                res.p_value, res.statistic, res.df, res.log_p))

    level: dict[tuple[int, ...], int] = {}
    for i, cover in enumerate(table.covers):
        size = cover.bit_count()
        if trace is not None:
            trace.append((i,))
        if size >= min_count:
            level[(i,)] = cover
            evaluate((i,), cover, size)

    pred_of = table.item_predictor
    length = 1
    while level and length < config.max_len:
        groups: dict[tuple[int, ...], list[int]] = {}
        for itemset in sorted(level):
            groups.setdefault(itemset[:-1], []).append(itemset[-1])
        nxt: dict[tuple[int, ...], int] = {}
        for prefix, tails in groups.items():
            for a_pos, a in enumerate(tails):
                base = level[prefix + (a,)]
                for b in tails[a_pos + 1:]:
                    if pred_of[a] == pred_of[b]:
                        continue
                    cand = prefix + (a, b)
                    if any(cand[:j] + cand[j + 1:] not in level for j in range(len(prefix))):
                        continue
                    cover = base & table.covers[b]
                    size = cover.bit_count()
                    if trace is not None:
                        trace.append(cand)
                    if size >= min_count:
                        nxt[cand] = cover
                        evaluate(cand, cover, size)
        level = nxt
        length += 1

    rules.sort(key=DistributionRule.sort_key)
    return rules


def query_subgroup(table: MiningTable, antecedent: Iterable[Item],
                   reference: ConfusionDistribution | None = None,
                   pool_min_expected: float | None = None) -> Subgroup:
    """Coverage, distribution and test result for one antecedent, ignoring thresholds."""
    reference = reference if reference is not None else table.reference
    items = tuple(sorted(set(antecedent), key=table.item_id))
    cover = table.cover(items)
    size = cover.bit_count()
    if size == 0:
        return Subgroup(items, 0, 0.0, ConfusionDistribution({}), None, None, None)
    dist, res = _test(table, cover, reference, pool_min_expected)
    return Subgroup(items, size, size / table.n_rows, dist, res.p_value, res.statistic, res.df)


def parse_query(text: str, table: MiningTable) -> tuple[Item, ...]:
    """Parse ``"a=1 & b=x"`` into table items."""
    items = []
    for part in text.split("&"):
        part = part.strip()
        if not part:
            continue
        name, sep, value = part.partition("=")
        if not sep:
            raise DataError(f"condition {part!r} is not of the form name=bin")
        items.append(table.resolve(name.strip(), value.strip()))
    preds = [it.predictor for it in items]
    if len(set(preds)) != len(preds):
        raise DataError("a query may hold at most one condition per predictor")
    return tuple(items)


# --------------------------------------------------------------------------
# Output

def format_rule(rule: DistributionRule | Subgroup) -> str:
    p = rule.p_value
    head = f"Ant sup = {rule.support:.5f}  pvalue = {p:.22f}"
    conds = " & ".join(str(i) for i in rule.antecedent)
    return f"{head}\n{rule.distribution.format_cm()}  <--  {conds}"


def format_rules(rules: Sequence[DistributionRule], reference: ConfusionDistribution) -> str:
    lines = [reference.format_cm(), ""]
    for r in rules:
        lines += [format_rule(r), ""]
    lines.append(f"{len(rules)} rules")
    return "\n".join(lines) + "\n"


def rule_to_json(rule: DistributionRule) -> dict:
    return {
        "antecedent": [{"pred": i.predictor, "bin": i.label} for i in rule.antecedent],
        "support": rule.support,
        "size": rule.size,
        "pvalue": rule.p_value,
        "chi2": rule.chi2,
        "df": rule.df,
        "cm": {str(c): p for c, p in rule.distribution.proportions().items()},
    }


def rules_to_json(rules: Sequence[DistributionRule]) -> str:
    return json.dumps([rule_to_json(r) for r in rules], indent=2) + "\n"
