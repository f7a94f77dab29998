"""Independent reference computations used to freeze expected values.

These deliberately avoid the code paths they check: quantiles come from
the textbook order-statistic formula, rule sets from exhaustive
enumeration over explicit row scans.
"""
import itertools
import math

from devperf.confusion import ConfusionDistribution
from devperf.stats import chi2_gof


def type7_quantile(values, p):
    xs = sorted(values)
    h = (len(xs) - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, len(xs) - 1)
    return xs[lo] + (h - lo) * (xs[hi] - xs[lo])


def brute_force_rules(records, predictors, minsup, alpha, max_len, improvement=True):
    """Every antecedent with at most one bin per predictor, filtered as the miner does.

    ``records`` is a list of ({predictor: bin}, code) pairs. Returns a set of
    (frozenset of (predictor, bin), size, p_value).
    """
    n = len(records)
    reference = ConfusionDistribution.from_codes(code for _, code in records)
    domains = {p: sorted({rec[p] for rec, _ in records if rec.get(p) is not None})
               for p in predictors}
    stats = {}
    for combo in itertools.product(*[[None] + domains[p] for p in predictors]):
        ante = frozenset((p, b) for p, b in zip(predictors, combo) if b is not None)
        if not ante or len(ante) > max_len:
            continue
        rows = [i for i, (rec, _) in enumerate(records)
                if all(rec.get(p) == b for p, b in ante)]
        if len(rows) < minsup * n - 1e-9 or not rows:
            continue
        dist = ConfusionDistribution.from_codes(records[i][1] for i in rows)
        res = chi2_gof(dist, reference)
        stats[ante] = (len(rows), res)
    out = set()
    for ante, (size, res) in stats.items():
        if res.p_value > alpha:
            continue
        if improvement:
            subs = [frozenset(s) for r in range(1, len(ante))
                    for s in itertools.combinations(ante, r)]
            if any(stats[s][1].log_p <= res.log_p for s in subs):
                continue
        out.add((ante, size, res.p_value))
    return out


def as_oracle_set(rules):
    return {(frozenset((i.predictor, i.label) for i in r.antecedent), r.size, r.p_value)
            for r in rules}
