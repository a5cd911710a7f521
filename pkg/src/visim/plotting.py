"""Minimal deterministic SVG charts.

Values arrive from CSV rows; nothing here recomputes a metric. Output is a
plain SVG string with fixed geometry, so identical inputs give identical bytes.
"""

WIDTH = 640
HEIGHT = 400
MARGIN_L = 60
MARGIN_R = 20
MARGIN_T = 40
MARGIN_B = 50

COLORS = {
    "aodv": "#1f77b4",
    "dsr": "#d62728",
    "dsdv": "#2ca02c",
}
FALLBACK_COLORS = ("#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _color(label: str, i: int) -> str:
    return COLORS.get(label.lower(), FALLBACK_COLORS[i % len(FALLBACK_COLORS)])


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _axis_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / n
    return [lo + i * step for i in range(n + 1)]


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]


def _axes(x_label: str, y_label: str) -> list[str]:
    x0, y0 = MARGIN_L, HEIGHT - MARGIN_B
    x1, y1 = WIDTH - MARGIN_R, MARGIN_T
    return [
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{x_label}</text>',
        f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2})">{y_label}</text>',
    ]


def line_chart(series_by_label: dict[str, list[tuple[float, float]]],
               title: str, x_label: str, y_label: str) -> str:
    """Multi-series line chart; series are (x, y) point lists."""
    xs = [x for pts in series_by_label.values() for x, _ in pts]
    ys = [y for pts in series_by_label.values() for _, y in pts]
    x_lo, x_hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    y_lo, y_hi = 0.0, (max(ys) if ys else 1.0)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0

    def px(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R)

    def py(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B)

    out = _header(title)
    out += _axes(x_label, y_label)
    for t in _axis_ticks(x_lo, x_hi):
        out.append(f'<text x="{_fmt(px(t))}" y="{HEIGHT - MARGIN_B + 16}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="10">{_fmt(t)}</text>')
    for t in _axis_ticks(y_lo, y_hi):
        out.append(f'<text x="{MARGIN_L - 6}" y="{_fmt(py(t) + 3)}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="10">{_fmt(t)}</text>')
    for i, (label, pts) in enumerate(series_by_label.items()):
        if not pts:
            continue
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        color = _color(label, i)
        out.append(f'<polyline points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        ly = MARGIN_T + 14 * (i + 1)
        out.append(f'<line x1="{WIDTH - 150}" y1="{ly - 4}" '
                   f'x2="{WIDTH - 130}" y2="{ly - 4}" stroke="{color}" '
                   f'stroke-width="1.5"/>')
        out.append(f'<text x="{WIDTH - 125}" y="{ly}" '
                   f'font-family="sans-serif" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_chart(values_by_label: dict[str, dict[str, float]],
              title: str, y_label: str) -> str:
    """Grouped bars: outer keys are groups (x axis), inner keys are series."""
    groups = list(values_by_label)
    series = []
    for g in groups:
        for s in values_by_label[g]:
            if s not in series:
                series.append(s)
    y_hi = max((v for g in values_by_label.values() for v in g.values()),
               default=1.0)
    if y_hi <= 0:
        y_hi = 1.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    group_w = plot_w / max(len(groups), 1)
    bar_w = group_w * 0.8 / max(len(series), 1)

    out = _header(title)
    out += _axes("", y_label)
    for t in _axis_ticks(0.0, y_hi):
        y = HEIGHT - MARGIN_B - t / y_hi * plot_h
        out.append(f'<text x="{MARGIN_L - 6}" y="{_fmt(y + 3)}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="10">{t:.3f}</text>')
    for gi, g in enumerate(groups):
        gx = MARGIN_L + gi * group_w
        for si, s in enumerate(series):
            v = values_by_label[g].get(s)
            if v is None:
                continue
            h = v / y_hi * plot_h
            x = gx + group_w * 0.1 + si * bar_w
            y = HEIGHT - MARGIN_B - h
            out.append(f'<rect x="{_fmt(x)}" y="{_fmt(y)}" '
                       f'width="{_fmt(bar_w)}" height="{_fmt(h)}" '
                       f'fill="{_color(s, si)}"/>')
        out.append(f'<text x="{_fmt(gx + group_w / 2)}" '
                   f'y="{HEIGHT - MARGIN_B + 16}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{g}</text>')
    for si, s in enumerate(series):
        ly = MARGIN_T + 14 * (si + 1)
        out.append(f'<rect x="{WIDTH - 150}" y="{ly - 10}" width="12" '
                   f'height="10" fill="{_color(s, si)}"/>')
        out.append(f'<text x="{WIDTH - 133}" y="{ly}" '
                   f'font-family="sans-serif" font-size="11">{s}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
