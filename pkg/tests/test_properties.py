import math
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from devperf.confusion import ConfusionDistribution, all_codes
from devperf.cv import kfold_partition
from devperf.ingest import Dataset, categorical_bins, discretize, find_bin, quantile_bins
from devperf.stats import chi2_gof

from invariants import check_case
from oracles import type7_quantile

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
values = st.lists(finite, min_size=1, max_size=60)


@given(values)
def test_partition_exactly_one_bin(xs):
    scheme = quantile_bins(xs)
    for v in xs:
        hits = [b for b in scheme.bins if b.contains(v)]
        assert len(hits) == 1
        assert find_bin(v, scheme) is hits[0]


@given(values)
def test_quantile_boundaries_ordered(xs):
    scheme = quantile_bins(xs)
    qs = [type7_quantile(xs, p) for p in (0.10, 0.35, 0.65, 0.90)]
    assert qs == sorted(qs)
    b = scheme.boundaries
    assert list(b) == sorted(b)
    assert b[0] == min(xs) and b[-1] == max(xs)
    for bn in scheme.bins:
        assert bn.degenerate or bn.lower < bn.upper


@given(st.lists(st.one_of(st.none(), finite), min_size=2, max_size=40)
       .filter(lambda v: any(x is not None for x in v)))
def test_discretize_round_trip(xs):
    ds = Dataset.from_columns({"x": xs, "y": ["p"] * len(xs)}, "y", kinds={"x": "numeric"})
    scheme = quantile_bins(ds.column("x"), predictor="x")
    out = discretize(ds, {"x": scheme})
    for v, label in zip(xs, out.column("x")):
        assert (label is None) if v is None else find_bin(v, scheme).label == label
    again = discretize(out, {"x": categorical_bins(out, "x")})
    assert again.data == out.data


@given(st.integers(2, 500), st.integers(2, 40), st.integers(0, 2**64 - 1))
def test_fold_balance_and_cover(n, k, seed):
    k = min(k, n)
    folds = kfold_partition(n, k, seed)
    assert len(folds) == n
    sizes = Counter(folds)
    assert set(sizes) == set(range(k))
    assert max(sizes.values()) - min(sizes.values()) <= 1


counts3 = st.lists(st.integers(0, 500), min_size=3, max_size=3)


@given(counts3)
def test_distribution_normalization(cs):
    dist = ConfusionDistribution(dict(zip(all_codes(2)[:3], cs)))
    props = dist.proportions()
    if dist.total:
        assert sum(props.values()) == pytest.approx(1.0, abs=1e-9)
        assert dist.hits + dist.errors == dist.total


@given(st.lists(st.integers(1, 300), min_size=2, max_size=31),
       st.lists(st.integers(0, 300), min_size=31, max_size=31))
@settings(deadline=None)
def test_chi2_statistic_and_pvalue(ref, obs):
    scipy_stats = pytest.importorskip("scipy.stats")
    codes = all_codes(6)[:len(ref)]
    obs = obs[:len(ref)]
    if sum(obs) == 0:
        return
    res = chi2_gof(ConfusionDistribution(dict(zip(codes, obs))),
                   ConfusionDistribution(dict(zip(codes, ref))))
    n, rt = sum(obs), sum(ref)
    direct = math.fsum((o - n * r / rt) ** 2 / (n * r / rt) for o, r in zip(obs, ref))
    assert res.df == len(ref) - 1
    assert res.statistic == pytest.approx(direct, rel=1e-12, abs=1e-12)
    assert res.p_value == pytest.approx(scipy_stats.chi2.sf(res.statistic, res.df), abs=1e-8)


@given(st.lists(st.integers(1, 50), min_size=2, max_size=6), st.integers(1, 5))
def test_chi2_exact_fit(ref, scale):
    codes = all_codes(3)[:len(ref)]
    res = chi2_gof(ConfusionDistribution({c: r * scale for c, r in zip(codes, ref)}),
                   ConfusionDistribution(dict(zip(codes, ref))))
    assert res.statistic == pytest.approx(0.0, abs=1e-9)
    assert res.p_value > 0.99


@given(st.integers(0, 10**6))
@settings(max_examples=60, deadline=None)
def test_pipeline_invariants(seed):
    assert check_case(seed) == []
