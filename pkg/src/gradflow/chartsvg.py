"""Self-contained log-log line charts as SVG text.

No plotting dependency: the convergence pictures only need decade grids,
a few polylines with markers, and a legend.  Output is deterministic
(fixed palette, coordinates formatted to hundredths of a pixel), so chart
files can be compared byte for byte across runs.
"""

import math

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

MARGIN_LEFT = 72.0
MARGIN_RIGHT = 24.0
MARGIN_TOP = 44.0
MARGIN_BOTTOM = 56.0


def _fmt(v: float) -> str:
    return "%.2f" % v


def _decade_label(e: int) -> str:
    return "1e%d" % e


def loglog_chart(series, title: str, xlabel: str, ylabel: str,
                 width: int = 640, height: int = 480) -> str:
    """Render (label, xs, ys) triples on decade-gridded log-log axes.

    Every x and y must be strictly positive.  Series are drawn in order
    with a fixed palette, circle markers, and a legend in the top-right
    corner of the plot area.
    """
    series = [(str(label), [float(x) for x in xs], [float(y) for y in ys])
              for label, xs, ys in series]
    if not series:
        raise ValueError("need at least one series")
    for label, xs, ys in series:
        if len(xs) != len(ys) or not xs:
            raise ValueError(f"series {label!r} needs matching nonempty data")
        if any(x <= 0 for x in xs) or any(y <= 0 for y in ys):
            raise ValueError(f"series {label!r} must be strictly positive")

    lxs = [math.log10(x) for _, xs, _ in series for x in xs]
    lys = [math.log10(y) for _, _, ys in series for y in ys]
    x_lo, x_hi = math.floor(min(lxs)), math.ceil(max(lxs))
    y_lo, y_hi = math.floor(min(lys)), math.ceil(max(lys))
    if x_hi == x_lo:
        x_hi += 1
    if y_hi == y_lo:
        y_hi += 1

    plot_w = width - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = height - MARGIN_TOP - MARGIN_BOTTOM

    def px(lx: float) -> float:
        return MARGIN_LEFT + (lx - x_lo) / (x_hi - x_lo) * plot_w

    def py(ly: float) -> float:
        return MARGIN_TOP + (y_hi - ly) / (y_hi - y_lo) * plot_h

    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" '
               f'width="{width}" height="{height}" '
               f'viewBox="0 0 {width} {height}">')
    out.append(f'<rect x="0" y="0" width="{width}" height="{height}" '
               'fill="white"/>')
    out.append(f'<text x="{_fmt(width / 2)}" y="24" text-anchor="middle" '
               'font-family="sans-serif" font-size="15" font-weight="bold">'
               f'{title}</text>')

    for e in range(x_lo, x_hi + 1):
        x = px(float(e))
        out.append(f'<line x1="{_fmt(x)}" y1="{_fmt(MARGIN_TOP)}" '
                   f'x2="{_fmt(x)}" y2="{_fmt(MARGIN_TOP + plot_h)}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(x)}" y="{_fmt(MARGIN_TOP + plot_h + 18)}" '
                   'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{_decade_label(e)}</text>')
    for e in range(y_lo, y_hi + 1):
        y = py(float(e))
        out.append(f'<line x1="{_fmt(MARGIN_LEFT)}" y1="{_fmt(y)}" '
                   f'x2="{_fmt(MARGIN_LEFT + plot_w)}" y2="{_fmt(y)}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<text x="{_fmt(MARGIN_LEFT - 8)}" y="{_fmt(y + 4)}" '
                   'text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{_decade_label(e)}</text>')

    out.append(f'<rect x="{_fmt(MARGIN_LEFT)}" y="{_fmt(MARGIN_TOP)}" '
               f'width="{_fmt(plot_w)}" height="{_fmt(plot_h)}" '
               'fill="none" stroke="#333333" stroke-width="1"/>')
    out.append(f'<text x="{_fmt(MARGIN_LEFT + plot_w / 2)}" '
               f'y="{_fmt(height - 14)}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">{xlabel}</text>')
    out.append(f'<text x="18" y="{_fmt(MARGIN_TOP + plot_h / 2)}" '
               'text-anchor="middle" font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 18 {_fmt(MARGIN_TOP + plot_h / 2)})">'
               f'{ylabel}</text>')

    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_fmt(px(math.log10(x)))},{_fmt(py(math.log10(y)))}"
                       for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   'stroke-width="1.5"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{_fmt(px(math.log10(x)))}" '
                       f'cy="{_fmt(py(math.log10(y)))}" r="3" '
                       f'fill="{color}"/>')

    lx = MARGIN_LEFT + plot_w - 180.0
    ly = MARGIN_TOP + 14.0
    for i, (label, _, _) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        y = ly + 18.0 * i
        out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(y - 4)}" '
                   f'x2="{_fmt(lx + 26)}" y2="{_fmt(y - 4)}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<circle cx="{_fmt(lx + 13)}" cy="{_fmt(y - 4)}" r="3" '
                   f'fill="{color}"/>')
        out.append(f'<text x="{_fmt(lx + 32)}" y="{_fmt(y)}" '
                   'font-family="sans-serif" font-size="11">'
                   f'{label}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
