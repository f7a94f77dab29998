"""Stacked-bar SVG rendering for EDPs and their error-zoom views.

Output is plain SVG 1.1 text built by string formatting, so identical
inputs give identical bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .confusion import ConfusionDistribution, OutcomeCode, all_codes
from .edp import EDPResult, ZoomView

HIT_COLOR = "#9ecae1"
MISS_PALETTE = (
    "#e6550d", "#756bb1", "#31a354", "#de2d26", "#636363", "#fdae6b", "#bcbddc",
    "#a1d99b", "#fc9272", "#bdbdbd", "#8c564b", "#e377c2", "#bcbd22", "#17becf",
    "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173", "#3182bd",
)


def code_color(code: OutcomeCode, n_labels: int) -> str:
    """Colour fixed by the code's position among all codes of the label universe."""
    if code.is_hit:
        return HIT_COLOR
    misses = all_codes(n_labels)[1:]
    return MISS_PALETTE[misses.index(code) % len(MISS_PALETTE)]


@dataclass(frozen=True)
class _Bar:
    label: str
    dist: ConfusionDistribution
    caption: str


def _bars(view: EDPResult | ZoomView) -> tuple[list[_Bar], str, str]:
    if isinstance(view, ZoomView):
        bars = [_Bar(b.bin.label, b.errors, f"{b.count} ({100 * b.share:.1f}%)")
                for b in view.bins]
        bars.append(_Bar("global", view.global_errors,
                         f"{view.total_errors} ({100.0 if view.total_errors else 0.0:.1f}%)"))
        return bars, "share of errors", ""
    bars = [_Bar(b.bin.label, b.distribution, f"{b.count} ({100 * b.share:.1f}%)")
            for b in view.bins]
    bars.append(_Bar("global", view.global_, f"{view.global_.total} (100.0%)"))
    footer = f"{view.n_missing} missing" if view.n_missing else ""
    return bars, "proportion of cases", footer


def render_edp_svg(view: EDPResult | ZoomView, title: str | None = None,
                   bar_width: int = 56, height: int = 380) -> str:
    """One stacked bar per bin plus a rightmost global bar, with legend."""
    zoom = isinstance(view, ZoomView)
    n_labels = len(view.labels)
    bars, y_title, footer = _bars(view)
    if title is None:
        title = f"{'Error-zoom EDP' if zoom else 'EDP'} for {view.predictor}"

    gap = 18
    left, top, plot_h = 64, 40, height - 140
    plot_w = len(bars) * (bar_width + gap) + gap
    legend_x = left + plot_w + 24
    codes = sorted({c for b in bars for c in b.dist.codes()}, key=lambda c: c.sort_key)
    width = legend_x + 150
    base = top + plot_h
    height = max(height, top + 30 + 18 * len(codes))

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" '
        '"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">',
        f'<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}" '
        'font-family="Helvetica, Arial, sans-serif" font-size="11">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{left}" y="22" font-size="14" font-weight="bold">{escape(title)}</text>',
    ]
    for t in range(0, 101, 25):
        y = base - plot_h * t / 100
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + plot_w}" y2="{y:.1f}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{left - 6}" y="{y + 4:.1f}" text-anchor="end">{t}%</text>')
    out.append(f'<text x="16" y="{top + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + plot_h / 2:.1f})">{escape(y_title)}</text>')

    for i, bar in enumerate(bars):
        x = left + gap + i * (bar_width + gap)
        if i == len(bars) - 1:
            out.append(f'<line x1="{x - gap / 2:.1f}" y1="{top}" x2="{x - gap / 2:.1f}" '
                       f'y2="{base}" stroke="#999999" stroke-dasharray="4,3"/>')
        out.append('<g class="bar">')
        total = bar.dist.total
        if total == 0:
            out.append(f'<rect x="{x}" y="{top}" width="{bar_width}" height="{plot_h}" '
                       'fill="none" stroke="#bbbbbb" stroke-dasharray="2,2"/>')
        y = float(base)
        for code, n in bar.dist.nonzero().items():
            h = plot_h * n / total
            y -= h
            out.append(f'<rect x="{x}" y="{y:.2f}" width="{bar_width}" height="{h:.2f}" '
                       f'fill="{code_color(code, n_labels)}" class="seg code-{code}">'
                       f'<title>{code}: {n} ({100 * n / total:.1f}%)</title></rect>')
        cx = x + bar_width / 2
        out.append(f'<text x="{cx:.1f}" y="{base + 16}" text-anchor="middle">'
                   f'{escape(bar.label)}</text>')
        out.append(f'<text x="{cx:.1f}" y="{base + 30}" text-anchor="middle" '
                   f'fill="#555555">{escape(bar.caption)}</text>')
        out.append('</g>')

    out.append(f'<line x1="{left}" y1="{base}" x2="{left + plot_w}" y2="{base}" '
               'stroke="#333333"/>')
    out.append(f'<text x="{left + plot_w / 2:.1f}" y="{base + 52}" text-anchor="middle" '
               f'font-weight="bold">{escape(view.predictor)}</text>')
    if zoom and view.empty:
        out.append(f'<text class="no-errors" x="{left + plot_w / 2:.1f}" '
                   f'y="{top + plot_h / 2:.1f}" text-anchor="middle" font-size="16" '
                   'fill="#777777">no errors</text>')
    if footer:
        out.append(f'<text x="{left}" y="{height - 12}" fill="#555555">{escape(footer)}</text>')

    out.append('<g class="legend">')
    out.append(f'<text x="{legend_x}" y="{top}" font-weight="bold">outcome</text>')
    for j, code in enumerate(codes):
        ly = top + 12 + j * 18
        name = "hit" if code.is_hit else f"{code}: {view.labels[code.true - 1]}" \
            f" as {view.labels[code.pred - 1]}"
        out.append(f'<rect x="{legend_x}" y="{ly}" width="12" height="12" '
                   f'fill="{code_color(code, n_labels)}"/>')
        out.append(f'<text x="{legend_x + 18}" y="{ly + 10}">{escape(name)}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"
