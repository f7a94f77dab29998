import random
from collections import Counter

import pytest

from devperf.cv import (LOG_ZERO, Majority, NaiveBayes, PredictionSet, SplitMix64,
                        cross_val_predict, global_distribution, import_predictions,
                        kfold_partition, make_learner, permutation)
from devperf.ingest import DataError, Dataset


def test_splitmix64_reference_stream():
    # first outputs for seed 1234567 as published with the reference C code
    g = SplitMix64(1234567)
    assert [g.next_u64() for _ in range(3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423]


def test_permutation_is_permutation():
    perm = permutation(1000, 42)
    assert sorted(perm) == list(range(1000))
    assert perm != list(range(1000))


@pytest.mark.parametrize("n,k,sizes", [
    (10, 10, [1] * 10),
    (699, 10, [70] * 9 + [69]),  # 699 = 9*70 + 69
    (7, 3, [3, 2, 2]),
])
def test_kfold_sizes(n, k, sizes):
    folds = kfold_partition(n, k, seed=5)
    counts = Counter(folds)
    assert [counts[f] for f in range(k)] == sizes


def test_kfold_deterministic():
    assert kfold_partition(100, 7, 9) == kfold_partition(100, 7, 9)
    assert kfold_partition(100, 7, 9) != kfold_partition(100, 7, 10)


@pytest.mark.parametrize("n,k", [(5, 1), (5, 6), (3, 0)])
def test_kfold_errors(n, k):
    with pytest.raises(ValueError):
        kfold_partition(n, k, 0)


def _separable():
    rng = random.Random(3)
    xs = [rng.gauss(0, 1) for _ in range(20)] + [rng.gauss(100, 1) for _ in range(20)]
    return Dataset.from_columns({"x": xs, "y": ["lo"] * 20 + ["hi"] * 20}, "y")


def test_nb_separable_zero_errors():
    preds = cross_val_predict(_separable(), NaiveBayes(), k=5, seed=1)
    assert preds.accuracy == 1.0
    assert len(preds) == 40


def test_nb_frequency_argmax():
    ds = Dataset.from_columns({"c": ["a"] * 3 + ["b"] * 3, "y": ["C1"] * 3 + ["C2"] * 3}, "y")
    model = NaiveBayes().train(ds, range(6))
    q = Dataset.from_columns({"c": ["a"], "y": ["C1"]}, "y")
    assert model.predict(q, 0) == "C1"


def test_nb_zero_frequency_veto():
    # (x, z, y): (a,p,C1) (a,q,C1) (b,p,C2) (a,p,C2)
    ds = Dataset.from_columns({"x": ["a", "a", "b", "a"], "z": ["p", "q", "p", "p"],
                               "y": ["C1", "C1", "C2", "C2"]}, "y")
    model = NaiveBayes().train(ds, range(4))
    q = Dataset.from_columns({"x": ["b", "a"], "z": ["p", "q"], "y": ["C1", "C2"]}, "y",
                             kinds={"x": "categorical", "z": "categorical"})
    # query (b, p): C1 has P(x=b|C1)=0 -> vetoed; C2 = .5 * .5 * 1
    s = model.scores(q, 0)
    assert s[0] == pytest.approx(2 * -0.6931471805599453 + LOG_ZERO)
    assert s[1] == pytest.approx(2 * -0.6931471805599453)
    assert model.predict(q, 0) == "C2"
    # query (a, q): C1 = .5 * 1 * .5 = .25, C2 has P(z=q|C2)=0
    assert model.predict(q, 1) == "C1"


def test_nb_tie_goes_to_first_label():
    ds = Dataset.from_columns({"c": ["a", "a"], "y": ["C2", "C1"]}, "y")
    model = NaiveBayes().train(ds, range(2))
    assert model.predict(ds, 0) == "C2"


def test_nb_missing_cells_ignored():
    ds = Dataset.from_columns({"x": [1.0, 1.2, 5.0, 5.3, None], "c": ["u", "u", "v", "v", "u"],
                               "y": ["A", "A", "B", "B", "A"]}, "y")
    model = NaiveBayes().train(ds, range(4))
    assert model.predict(ds, 4) == "A"
    allmiss = Dataset.from_columns({"x": [None], "c": [None], "y": ["B"]}, "y",
                                   kinds={"x": "numeric", "c": "categorical"})
    with pytest.warns(UserWarning, match="majority"):
        assert model.predict(allmiss, 0) == "A"


def test_nb_duplication_invariance(breast):
    rows = list(range(0, 699, 2))
    doubled = rows + rows
    m1 = NaiveBayes().train(breast, rows)
    m2 = NaiveBayes().train(breast, doubled)
    for i in range(1, 699, 2):
        assert m1.predict(breast, i) == m2.predict(breast, i)


def test_majority():
    ds = Dataset.from_columns({"x": list(range(10)), "y": ["a"] * 4 + ["b"] * 6}, "y")
    model = Majority().train(ds, range(10))
    assert all(model.predict(ds, i) == "b" for i in range(10))
    acc = sum(model.predict(ds, i) == ds.y[i] for i in range(10)) / 10
    assert acc == 0.6
    tie = Dataset.from_columns({"x": [1, 2], "y": ["q", "p"]}, "y")
    assert Majority().train(tie, [0, 1]).predict(tie, 0) == "q"
    with pytest.raises(ValueError):
        Majority().train(tie, [])


def test_make_learner():
    assert make_learner("nb").name == "nb"
    with pytest.raises(ValueError, match="supported"):
        make_learner("svm")


class Recording:
    name = "recording"

    def __init__(self):
        self.trained = []

    def train(self, dataset, rows):
        self.trained.append(set(rows))
        outer = self

        class M:
            def predict(self, ds, i):
                assert i not in outer.trained[-1]
                return ds.y[0]
        return M()


def test_cross_val_no_leakage_and_cover(iris):
    rec = Recording()
    preds = cross_val_predict(iris, rec, k=10, seed=2)
    assert len(rec.trained) == 10
    assert len(preds) == iris.n_rows
    test_sets = [set(range(iris.n_rows)) - t for t in rec.trained]
    assert sorted(i for s in test_sets for i in s) == list(range(iris.n_rows))


def test_cross_val_deterministic(iris):
    a = cross_val_predict(iris, NaiveBayes(), 10, 7)
    b = cross_val_predict(iris, NaiveBayes(), 10, 7)
    assert a == b


def test_cross_val_missing_class_warns():
    ds = Dataset.from_columns({"x": [1, 2, 3, 4, 5, 6], "y": ["a"] * 5 + ["b"]}, "y")
    with pytest.warns(UserWarning, match="lacks classes"):
        cross_val_predict(ds, Majority(), 3, 0)


def test_cross_val_learner_failure_names_fold(iris):
    class Broken:
        name = "broken"

        def train(self, ds, rows):
            raise ZeroDivisionError("boom")
    with pytest.raises(RuntimeError, match="fold 0"):
        cross_val_predict(iris, Broken(), 5, 0)


def _preds_csv(write_csv, rows):
    return write_csv("p.csv", "row_id,true,pred\n" + "".join(f"{a},{b},{c}\n" for a, b, c in rows))


def test_import_identity(write_csv, iris):
    path = _preds_csv(write_csv, [(i, y, y) for i, y in enumerate(iris.y)])
    preds = import_predictions(iris, path)
    assert preds.k == 0 and preds.seed is None
    assert preds.accuracy == 1.0


def test_import_shuffled_order_ok(write_csv, iris):
    rows = [(i, y, y) for i, y in enumerate(iris.y)]
    random.Random(1).shuffle(rows)
    assert import_predictions(iris, _preds_csv(write_csv, rows)).true == iris.y


def test_import_misaligned(write_csv, iris):
    ys = list(iris.y)
    random.Random(0).shuffle(ys)
    with pytest.raises(DataError, match="misaligned"):
        import_predictions(iris, _preds_csv(write_csv, [(i, y, y) for i, y in enumerate(ys)]))


def test_import_duplicate_and_missing(write_csv):
    ds = Dataset.from_columns({"x": [1, 2, 3], "y": ["a", "b", "a"]}, "y")
    with pytest.raises(DataError, match="duplicate"):
        import_predictions(ds, _preds_csv(write_csv, [(0, "a", "a"), (0, "a", "a"), (2, "a", "a")]))
    with pytest.raises(DataError, match="missing row_id"):
        import_predictions(ds, _preds_csv(write_csv, [(0, "a", "a"), (2, "a", "a")]))


def test_import_unknown_label_extends_universe(write_csv):
    ds = Dataset.from_columns({"x": [1, 2, 3], "y": ["a", "b", "a"]}, "y")
    with pytest.warns(UserWarning, match="not in dataset"):
        preds = import_predictions(ds, _preds_csv(write_csv, [(0, "a", "z"), (1, "b", "b"),
                                                              (2, "a", "a")]))
    assert preds.labels == ("a", "b", "z")
    assert [str(c) for c in preds.codes()] == ["13", "0", "0"]


def test_adult_style_import_global(write_csv):
    y = ["<=50K"] * 898 + [">50K"] * 102
    pred = ["<=50K"] * 854 + [">50K"] * 44 + ["<=50K"] * 102
    ds = Dataset.from_columns({"x": list(range(1000)), "y": y}, "y")
    preds = import_predictions(ds, _preds_csv(write_csv, list(zip(range(1000), y, pred))))
    assert global_distribution(preds).format_cm() == "CM={ 0/0.854,12/0.044,21/0.102 }"


def test_prediction_set_export(tmp_path, iris):
    preds = cross_val_predict(iris, NaiveBayes(), 5, 3)
    side = preds.write(tmp_path / "preds.csv", iris)
    back = import_predictions(iris, tmp_path / "preds.csv")
    assert back.pred == preds.pred
    import json
    meta = json.loads(side.read_text())
    assert meta["k"] == 5 and meta["seed"] == 3 and meta["learner"] == "nb"
    assert len(meta["dataset_hash"]) == 64


def test_prediction_set_rejects_foreign_labels():
    with pytest.raises(DataError):
        PredictionSet(("a",), ("q",), ("a", "b"))
