"""Minimal self-contained SVG line/scatter plots for run-record tables.

No plotting dependencies: records are small (tens of points), so a hand-rolled
SVG with log-axis support covers everything the scenarios emit.
"""

from __future__ import annotations

import math

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 34, 46
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo: float, hi: float, log: bool):
    if log:
        lo_e = math.floor(math.log10(lo))
        hi_e = math.ceil(math.log10(hi))
        step = max(1, (hi_e - lo_e) // 6)
        return [10.0 ** e for e in range(lo_e, hi_e + 1, step)]
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / 5.0
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    t0 = math.ceil(lo / step) * step
    out = []
    while t0 <= hi + 1e-12 * span:
        out.append(0.0 if abs(t0) < 1e-12 * span else t0)
        t0 += step
    return out


def _fmt(v: float) -> str:
    if v == 0:
        return "0"
    a = abs(v)
    if 1e-3 <= a < 1e4:
        s = f"{v:.4g}"
    else:
        s = f"{v:.1e}"
    return s


class _Axis:
    def __init__(self, lo, hi, log, pix_lo, pix_hi):
        if log:
            if lo <= 0:
                raise ValueError("log axis needs positive values")
            self.lo, self.hi = math.log(lo), math.log(hi)
        else:
            self.lo, self.hi = lo, hi
        if self.hi <= self.lo:
            pad = abs(self.lo) * 0.1 + 1e-9
            self.lo, self.hi = self.lo - pad, self.hi + pad
        self.log = log
        self.pix_lo, self.pix_hi = pix_lo, pix_hi

    def __call__(self, v: float) -> float:
        x = math.log(v) if self.log else v
        frac = (x - self.lo) / (self.hi - self.lo)
        return self.pix_lo + frac * (self.pix_hi - self.pix_lo)


def render_svg(path: str, curves, *, title: str = "", xlabel: str = "",
               ylabel: str = "", logx: bool = False, logy: bool = False,
               comment: str | None = None) -> None:
    """Write an SVG line plot.

    curves: list of dicts {"label": str, "x": seq, "y": seq} plus optional
    "lo"/"hi" sequences drawn as a vertical error band per point.  Non-finite
    and (on log axes) non-positive points are dropped per curve.  comment, if
    given, is embedded verbatim as an XML comment (provenance stamp).
    """
    clean = []
    for cv in curves:
        xs, ys = list(map(float, cv["x"])), list(map(float, cv["y"]))
        lo = list(map(float, cv["lo"])) if "lo" in cv else None
        hi = list(map(float, cv["hi"])) if "hi" in cv else None
        keep = []
        for i, (x, y) in enumerate(zip(xs, ys)):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if (logx and x <= 0) or (logy and y <= 0):
                continue
            keep.append(i)
        if keep:
            clean.append({
                "label": str(cv.get("label", "")),
                "x": [xs[i] for i in keep], "y": [ys[i] for i in keep],
                "lo": [lo[i] for i in keep] if lo else None,
                "hi": [hi[i] for i in keep] if hi else None,
            })
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
             f'height="{_H}" viewBox="0 0 {_W} {_H}">']
    if comment:
        # "--" is illegal inside XML comments
        parts.append(f'<!-- {comment.replace("--", "-")} -->')
    parts.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    if not clean:
        parts.append(f'<text x="{_W / 2}" y="{_H / 2}" text-anchor="middle" '
                     f'font-family="sans-serif">no plottable points</text></svg>')
        with open(path, "w") as fh:
            fh.write("\n".join(parts))
        return
    all_x = [x for cv in clean for x in cv["x"]]
    all_y = [y for cv in clean for y in cv["y"]]
    for cv in clean:
        if cv["lo"]:
            all_y += [v for v in cv["lo"] if math.isfinite(v) and (v > 0 or not logy)]
        if cv["hi"]:
            all_y += [v for v in cv["hi"] if math.isfinite(v)]
    ax = _Axis(min(all_x), max(all_x), logx, _ML, _W - _MR)
    ay = _Axis(min(all_y), max(all_y), logy, _H - _MB, _MT)
    font = 'font-family="sans-serif" font-size="12"'
    xlo = math.exp(ax.lo) if logx else ax.lo
    xhi = math.exp(ax.hi) if logx else ax.hi
    ylo = math.exp(ay.lo) if logy else ay.lo
    yhi = math.exp(ay.hi) if logy else ay.hi
    for tv in _ticks(xlo, xhi, logx):
        px = ax(tv)
        parts.append(f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" '
                     f'y2="{_H - _MB}" stroke="#ddd"/>')
        parts.append(f'<text x="{px:.1f}" y="{_H - _MB + 16}" '
                     f'text-anchor="middle" {font}>{_fmt(tv)}</text>')
    for tv in _ticks(ylo, yhi, logy):
        py = ay(tv)
        parts.append(f'<line x1="{_ML}" y1="{py:.1f}" x2="{_W - _MR}" '
                     f'y2="{py:.1f}" stroke="#ddd"/>')
        parts.append(f'<text x="{_ML - 6}" y="{py + 4:.1f}" text-anchor="end" '
                     f'{font}>{_fmt(tv)}</text>')
    parts.append(f'<rect x="{_ML}" y="{_MT}" width="{_W - _ML - _MR}" '
                 f'height="{_H - _MT - _MB}" fill="none" stroke="#444"/>')
    for k, cv in enumerate(clean):
        color = _COLORS[k % len(_COLORS)]
        if cv["lo"] and cv["hi"]:
            for x, lo, hi in zip(cv["x"], cv["lo"], cv["hi"]):
                if not (math.isfinite(lo) and math.isfinite(hi)):
                    continue
                if logy and (lo <= 0 or hi <= 0):
                    continue
                parts.append(f'<line x1="{ax(x):.1f}" y1="{ay(lo):.1f}" '
                             f'x2="{ax(x):.1f}" y2="{ay(hi):.1f}" '
                             f'stroke="{color}" stroke-width="1"/>')
        pts = " ".join(f"{ax(x):.1f},{ay(y):.1f}"
                       for x, y in zip(cv["x"], cv["y"]))
        if len(cv["x"]) > 1:
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"/>')
        for x, y in zip(cv["x"], cv["y"]):
            parts.append(f'<circle cx="{ax(x):.1f}" cy="{ay(y):.1f}" r="3" '
                         f'fill="{color}"/>')
        if cv["label"]:
            ly = _MT + 16 + 16 * k
            parts.append(f'<line x1="{_ML + 8}" y1="{ly - 4}" x2="{_ML + 28}" '
                         f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
            parts.append(f'<text x="{_ML + 34}" y="{ly}" {font}>'
                         f'{cv["label"]}</text>')
    if title:
        parts.append(f'<text x="{_W / 2}" y="20" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')
    if xlabel:
        parts.append(f'<text x="{(_ML + _W - _MR) / 2}" y="{_H - 10}" '
                     f'text-anchor="middle" {font}>{xlabel}</text>')
    if ylabel:
        parts.append(f'<text x="16" y="{(_MT + _H - _MB) / 2}" {font} '
                     f'text-anchor="middle" transform="rotate(-90 16 '
                     f'{(_MT + _H - _MB) / 2})">{ylabel}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
