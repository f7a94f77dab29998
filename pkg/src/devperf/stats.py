"""Pearson chi-squared goodness of fit against a reference distribution."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .confusion import ConfusionDistribution, OutcomeCode

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000


def _log_gamma_p_series(a: float, x: float) -> float:
    """log of the regularized lower incomplete gamma P(a, x); best for x < a + 1."""
    ap = a
    term = total = 1.0 / a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return math.log(total) - x + a * math.log(x) - math.lgamma(a)


def _log_gamma_q_cf(a: float, x: float) -> float:
    """log of the regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction."""
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.log(h) - x + a * math.log(x) - math.lgamma(a)


def log_gamma_q(a: float, x: float) -> float:
    """Natural log of the regularized upper incomplete gamma function Q(a, x)."""
    if a <= 0:
        raise ValueError("a must be positive")
    if x < 0:
        raise ValueError("x must be non-negative")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        p = math.exp(_log_gamma_p_series(a, x))
        return math.log1p(-p) if p < 1.0 else -math.inf
    return _log_gamma_q_cf(a, x)


def chi2_logsf(stat: float, df: int) -> float:
    """log P(X >= stat) for X ~ chi2(df)."""
    if df <= 0:
        return 0.0
    if stat <= 0:
        return 0.0
    return log_gamma_q(df / 2.0, stat / 2.0)


def chi2_sf(stat: float, df: int) -> float:
    return math.exp(chi2_logsf(stat, df))


@dataclass(frozen=True)
class Chi2Result:
    statistic: float
    df: int
    log_p: float

    @property
    def p_value(self) -> float:
        # keep p strictly positive even when it underflows; ordering uses log_p
        return max(math.exp(self.log_p), 5e-324)


def chi2_gof(observed: Mapping[OutcomeCode, int] | ConfusionDistribution,
             reference: ConfusionDistribution,
             pool_min_expected: float | None = None) -> Chi2Result:
    """Test observed outcome counts against the reference proportions.

    Expected counts are the observed total times each nonzero reference
    proportion; df is the number of such cells minus one. When
    ``pool_min_expected`` is set, cells whose expected count falls below it
    are merged into a single pseudo-cell first.
    """
    if isinstance(observed, ConfusionDistribution):
        observed = observed.counts
    if any(n < 0 for n in observed.values()):
        raise ValueError("negative observed count")
    ref = reference.nonzero()
    ref_total = sum(ref.values())
    if ref_total <= 0:
        raise ValueError("reference distribution is empty")
    n = sum(observed.values())
    if n <= 0:
        raise ValueError("observed total must be positive")
    stray = [c for c, k in observed.items() if k and c not in ref]
    if stray:
        raise ValueError(f"observed codes absent from reference: {[str(c) for c in stray]}")

    cells = [(observed.get(c, 0), n * k / ref_total) for c, k in ref.items()]
    if pool_min_expected is not None:
        small = [cell for cell in cells if cell[1] < pool_min_expected]
        if len(small) > 1:
            cells = [cell for cell in cells if cell[1] >= pool_min_expected]
            cells.append((sum(o for o, _ in small), sum(e for _, e in small)))
    df = len(cells) - 1
    stat = math.fsum((o - e) ** 2 / e for o, e in cells)
    if df == 0:
        return Chi2Result(stat, 0, 0.0)
    return Chi2Result(stat, df, chi2_logsf(stat, df))
