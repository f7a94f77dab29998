import xml.etree.ElementTree as ET

from devperf.confusion import OutcomeCode, all_codes
from devperf.cv import PredictionSet
from devperf.edp import compute_edp, error_zoom
from devperf.ingest import Dataset, scheme_from_boundaries
from devperf.svg import HIT_COLOR, code_color, render_edp_svg

NS = "{http://www.w3.org/2000/svg}"


def _edp(perfect=False):
    xs = list(range(1, 51))
    y = ["a" if x % 3 else "b" for x in xs]
    pred = y if perfect else ["a" if x % 4 else "b" for x in xs]
    ds = Dataset.from_columns({"x": xs, "y": y}, "y")
    return compute_edp(ds, PredictionSet(ds.y, tuple(pred), ds.class_labels), "x")


def _bars(svg):
    root = ET.fromstring(svg.encode())
    return root, [g for g in root.iter(f"{NS}g") if g.get("class") == "bar"]


def test_five_bins_six_bars():
    edp = _edp()
    assert len(edp.bins) == 5
    root, bars = _bars(render_edp_svg(edp))
    assert root.tag == f"{NS}svg" and root.get("version") == "1.1"
    assert len(bars) == 6
    texts = [t.text for t in root.iter(f"{NS}text")]
    assert "global" in texts
    assert any(t and t.endswith("(10.0%)") for t in texts)


def test_deterministic_bytes():
    assert render_edp_svg(_edp()) == render_edp_svg(_edp())
    assert render_edp_svg(error_zoom(_edp())) == render_edp_svg(error_zoom(_edp()))


def test_zoom_perfect_has_no_errors_marker():
    root, bars = _bars(render_edp_svg(error_zoom(_edp(perfect=True))))
    marks = [t for t in root.iter(f"{NS}text") if t.get("class") == "no-errors"]
    assert len(marks) == 1 and marks[0].text == "no errors"


def test_hit_segment_at_bottom():
    root, bars = _bars(render_edp_svg(_edp()))
    for g in bars:
        segs = [r for r in g.iter(f"{NS}rect") if (r.get("class") or "").startswith("seg")]
        if segs:
            assert segs[0].get("fill") == HIT_COLOR
            assert float(segs[0].get("y")) >= max(float(s.get("y")) for s in segs)


def test_empty_bin_renders():
    ds = Dataset.from_columns({"x": [1, 2, 3], "y": ["a", "b", "a"]}, "y")
    edp = compute_edp(ds, PredictionSet(ds.y, ds.y, ds.class_labels), "x",
                      scheme_from_boundaries("x", [0, 5, 10]))
    root, bars = _bars(render_edp_svg(edp))
    assert len(bars) == 3


def test_special_characters_escaped():
    ds = Dataset.from_columns({"c": ["<a&b>", "x"], "y": ["p", "q"]}, "y")
    svg = render_edp_svg(compute_edp(ds, PredictionSet(ds.y, ds.y, ds.class_labels), "c"))
    ET.fromstring(svg.encode())
    assert "&lt;a&amp;b&gt;" in svg


def test_colours_stable_per_code():
    assert code_color(OutcomeCode(1, 2), 3) == code_color(OutcomeCode(1, 2), 3)
    colours = [code_color(c, 4) for c in all_codes(4)[1:]]
    assert len(set(colours)) == len(colours)


def test_missing_footer():
    ds = Dataset.from_columns({"x": [1, None, 3], "y": ["a", "b", "a"]}, "y")
    svg = render_edp_svg(compute_edp(ds, PredictionSet(ds.y, ds.y, ds.class_labels), "x"))
    assert "1 missing" in svg
