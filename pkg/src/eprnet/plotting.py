"""Minimal SVG charts of experiment output directories.

Each plotted value is drawn from the CSV text and echoed verbatim in a
``data-value`` attribute, so numbers in the SVG match the CSV exactly.
Rates use a log10 axis; Jain indices a linear one on [0, 1].
"""

from __future__ import annotations

import math
from html import escape
from pathlib import Path

from .errors import ConfigError
from .harness import BEST, read_csv

KINDS = ("minrate", "median", "jain", "importance")

_RESULT_COLUMN = {"minrate": "min_rate", "median": "median_rate", "jain": "jain"}
_WS_COLUMN = {"minrate": "min_rate_mean", "median": "median_rate_mean", "jain": "jain_mean", "importance": "source_jain_mean"}
_LABEL = {
    "minrate": "minimum rate (pairs/s)",
    "median": "median rate (pairs/s)",
    "jain": "Jain index",
    "importance": "source Jain index",
}
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

W, H = 720, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 50


class _Axis:
    def __init__(self, values, log: bool):
        self.log = log
        if log:
            pos = [v for v in values if v > 0]
            lo = math.floor(math.log10(min(pos))) if pos else -1
            hi = math.ceil(math.log10(max(pos))) if pos else 0
            self.lo, self.hi = lo, max(hi, lo + 1)
        else:
            self.lo, self.hi = 0.0, 1.0

    def y(self, v: float) -> float:
        if self.log:
            t = (math.log10(v) - self.lo) / (self.hi - self.lo) if v > 0 else 0.0
        else:
            t = (v - self.lo) / (self.hi - self.lo)
        return TOP + (1 - t) * (H - TOP - BOTTOM)

    def ticks(self):
        if self.log:
            return [(10.0**e, f"1e{e}") for e in range(int(self.lo), int(self.hi) + 1)]
        return [(t / 5, f"{t / 5:.1f}") for t in range(6)]


def _frame(title: str, ylabel: str, axis: _Axis) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">',
        f'<text x="{W / 2}" y="20" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<line x1="{LEFT}" y1="{H - BOTTOM}" x2="{W - RIGHT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<text x="15" y="{H / 2}" transform="rotate(-90 15 {H / 2})" text-anchor="middle">{escape(ylabel)}</text>',
    ]
    for v, label in axis.ticks():
        y = axis.y(v)
        out.append(f'<line x1="{LEFT - 4}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.2f}" text-anchor="end">{label}</text>')
    return out


def _legend(names) -> list[str]:
    out = []
    for i, name in enumerate(names):
        y = TOP + 16 * i
        color = _COLORS[i % len(_COLORS)]
        out.append(f'<rect x="{W - RIGHT + 10}" y="{y}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{W - RIGHT + 25}" y="{y + 9}">{escape(name)}</text>')
    return out


def bar_chart(title: str, ylabel: str, groups: list[str], series: dict, log: bool) -> str:
    """Grouped bars; ``series[name][group]`` is the CSV text of a value."""
    values = [float(v) for s in series.values() for v in s.values()]
    axis = _Axis(values, log)
    out = _frame(title, ylabel, axis)
    span = (W - LEFT - RIGHT) / max(len(groups), 1)
    bar = span * 0.8 / max(len(series), 1)
    base_y = H - BOTTOM
    for g, group in enumerate(groups):
        x0 = LEFT + g * span + span * 0.1
        out.append(f'<text x="{x0 + span * 0.4:.2f}" y="{base_y + 15}" text-anchor="middle">{escape(group)}</text>')
        for s, (name, vals) in enumerate(series.items()):
            if group not in vals:
                continue
            text = vals[group]
            y = axis.y(float(text))
            out.append(
                f'<rect x="{x0 + s * bar:.2f}" y="{y:.2f}" width="{bar:.2f}" height="{max(base_y - y, 0):.2f}" '
                f'fill="{_COLORS[s % len(_COLORS)]}" data-series="{escape(name)}" data-group="{escape(group)}" '
                f'data-value="{text}"><title>{escape(name)} {escape(group)}: {text}</title></rect>'
            )
    out += _legend(series)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def line_chart(title: str, ylabel: str, xs: list[str], series: dict, log: bool, floor: float | None = None) -> str:
    """Lines over categorical x positions; ``series[name][x]`` is CSV text."""
    values = [float(v) for s in series.values() for v in s.values()]
    if floor is not None and not log:
        values.append(floor)
    axis = _Axis(values, log)
    out = _frame(title, ylabel, axis)
    step = (W - LEFT - RIGHT) / max(len(xs), 1)
    xpos = {x: LEFT + step * (i + 0.5) for i, x in enumerate(xs)}
    for x in xs:
        out.append(f'<text x="{xpos[x]:.2f}" y="{H - BOTTOM + 15}" text-anchor="middle">{escape(x)}</text>')
    out.append(f'<text x="{(W - RIGHT + LEFT) / 2}" y="{H - 10}" text-anchor="middle">k/n</text>')
    if floor is not None:
        y = axis.y(floor)
        out.append(
            f'<line x1="{LEFT}" y1="{y:.2f}" x2="{W - RIGHT}" y2="{y:.2f}" stroke="gray" stroke-dasharray="4 3"/>'
        )
        out.append(f'<text x="{W - RIGHT - 4}" y="{y - 4:.2f}" text-anchor="end" class="floor">minimum {floor:.4f}</text>')
    for s, (name, vals) in enumerate(series.items()):
        color = _COLORS[s % len(_COLORS)]
        pts = [(xpos[x], axis.y(float(vals[x])), vals[x], x) for x in xs if x in vals]
        if len(pts) > 1:
            path = " ".join(f"{px:.2f},{py:.2f}" for px, py, _, _ in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}"/>')
        for px, py, text, x in pts:
            out.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{color}" data-series="{escape(name)}" '
                f'data-x="{escape(x)}" data-value="{text}"><title>{escape(name)} k/n={escape(x)}: {text}</title></circle>'
            )
    out += _legend(series)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _fixed_plots(result_dir: Path, kind: str) -> dict[str, str]:
    if kind == "importance":
        rows = read_csv(result_dir / "importance.csv") if (result_dir / "importance.csv").exists() else []
        if not rows:
            raise ConfigError("no source-importance rows to plot")
        losses = list(dict.fromkeys(r["l_wss"] for r in rows))
        series = {}
        for r in rows:
            if r["source_jain"]:
                series.setdefault(r["strategy"], {})[f"{r['l_wss']} dB"] = r["source_jain"]
        title = f"{rows[0]['topology']}: source-location Jain index"
        return {"importance.svg": bar_chart(title, _LABEL[kind], [f"{x} dB" for x in losses], series, False)}
    rows = read_csv(result_dir / "results.csv")
    if not rows:
        raise ConfigError("no result rows to plot")
    column = _RESULT_COLUMN[kind]
    out = {}
    for l_wss in dict.fromkeys(r["l_wss"] for r in rows):
        sub = [r for r in rows if r["l_wss"] == l_wss]
        sources = list(dict.fromkeys(r["source"] for r in sub))
        series = {}
        for r in sub:
            series.setdefault(r["strategy"], {})[r["source"]] = r[column]
        title = f"{sub[0]['topology']}, l_WSS = {l_wss} dB: {_LABEL[kind]} by source"
        out[f"{kind}_lwss{l_wss}.svg"] = bar_chart(title, _LABEL[kind], sources, series, kind != "jain")
    return out


def _ws_plots(result_dir: Path, kind: str) -> dict[str, str]:
    rows = read_csv(result_dir / "ws_summary.csv")
    if not rows:
        raise ConfigError("no sweep rows to plot")
    column = _WS_COLUMN[kind]
    out = {}
    for n in dict.fromkeys(r["n"] for r in rows):
        for l_wss in dict.fromkeys(r["l_wss"] for r in rows):
            sub = [r for r in rows if r["n"] == n and r["l_wss"] == l_wss and r["strategy"] != BEST and r[column]]
            if not sub:
                continue
            xs = sorted(dict.fromkeys(r["k_over_n"] for r in sub), key=float)
            series = {}
            for r in sub:
                series.setdefault(f"{r['strategy']} b={r['beta']}", {})[r["k_over_n"]] = r[column]
            nn = int(n)
            floor = {"jain": 1 / (nn * (nn - 1) // 2), "importance": 1 / nn}.get(kind)
            title = f"Watts-Strogatz n={n}, l_WSS = {l_wss} dB: {_LABEL[kind]}"
            out[f"{kind}_n{n}_lwss{l_wss}.svg"] = line_chart(
                title, _LABEL[kind], xs, series, kind in ("minrate", "median"), floor
            )
    return out


def plot(result_dir, kind: str, out_dir=None) -> list[Path]:
    """Render ``kind`` charts for an experiment output directory; returns the SVG paths."""
    if kind not in KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}; choose from {', '.join(KINDS)}")
    result_dir = Path(result_dir)
    if not (result_dir / "results.csv").exists():
        raise ConfigError(f"{result_dir} holds no results.csv")
    if (result_dir / "ws_summary.csv").exists():
        charts = _ws_plots(result_dir, kind)
    else:
        charts = _fixed_plots(result_dir, kind)
    if not charts:
        raise ConfigError(f"nothing to plot for {kind!r}")
    out_dir = Path(out_dir) if out_dir else result_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, svg in charts.items():
        path = out_dir / name
        path.write_text(svg)
        paths.append(path)
    return paths
