"""Self-contained SVG convergence plots.

Relative residuals are drawn as solid lines against a log-scale left axis,
problematic-point fractions as dashed lines against a linear right axis.
"""

import math
from xml.sax.saxutils import escape

__all__ = ["render_plot"]

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 70, 30, 50
TINY = 1e-300


def _log_range(values):
    pos = [v for v in values if v > 0 and math.isfinite(v)]
    if not pos:
        return -1, 0
    lo = math.floor(math.log10(min(pos)))
    hi = math.ceil(math.log10(max(pos)))
    return min(lo, hi - 1), max(hi, 0)


def _nice_max(x):
    if x <= 0:
        return 1.0
    e = 10 ** math.floor(math.log10(x))
    for m in (1, 2, 2.5, 5, 10):
        if m * e >= x:
            return m * e
    return 10 * e


def _poly(points, color, dashed=False):
    pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    dash = ' stroke-dasharray="6,4"' if dashed else ""
    return (f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
            f'points="{pts}"/>')


def render_plot(results, path, title=None):
    """Write a convergence/positivity plot of ``results`` (RunResult list) to ``path``."""
    if not results:
        raise ValueError("nothing to plot")
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    n_it = max(max(len(r.rel_residuals) for r in results), 1)
    lo, hi = _log_range([v for r in results for v in r.rel_residuals])
    fmax = _nice_max(max([v for r in results for v in r.problematic_fractions] or [0.0]))

    def sx(k):
        return LEFT + pw * k / n_it

    def sy_log(v):
        t = (math.log10(max(v, TINY)) - lo) / (hi - lo)
        return TOP + ph * (1.0 - min(max(t, 0.0), 1.0))

    def sy_lin(v):
        return TOP + ph * (1.0 - v / fmax)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="18" text-anchor="middle">{escape(title)}</text>')

    step = max(1, (hi - lo) // 8)
    for e in range(lo, hi + 1, step):
        y = sy_log(10.0 ** e)
        out.append(f'<line x1="{LEFT - 4}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text class="ytick-left" x="{LEFT - 6}" y="{y + 4:.2f}" '
                   f'text-anchor="end">1e{e}</text>')
    for q in range(5):
        v = fmax * q / 4
        y = sy_lin(v)
        out.append(f'<line x1="{LEFT + pw}" y1="{y:.2f}" x2="{LEFT + pw + 4}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text class="ytick-right" x="{LEFT + pw + 6}" y="{y + 4:.2f}">{v:g}</text>')
    xstep = max(1, n_it // 10)
    for k in range(0, n_it + 1, xstep):
        x = sx(k)
        out.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 16}" text-anchor="middle">{k}</text>')

    xlabel = "Picard iteration" if results[0].kind == "picard" else "iteration"
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text transform="translate(16,{TOP + ph / 2}) rotate(-90)" '
               f'text-anchor="middle">relative residual</text>')
    out.append(f'<text transform="translate({WIDTH - 14},{TOP + ph / 2}) rotate(90)" '
               f'text-anchor="middle">fraction of problematic points</text>')

    for i, r in enumerate(results):
        color = COLORS[i % len(COLORS)]
        res = [(sx(0), sy_log(1.0))] + [(sx(k), sy_log(v)) for k, v in enumerate(r.rel_residuals, 1)]
        out.append(_poly(res, color))
        frac = [(sx(k), sy_lin(v)) for k, v in enumerate(r.problematic_fractions, 1)]
        if frac:
            out.append(_poly(frac, color, dashed=True))
        ly = TOP + 14 + 16 * i
        out.append(f'<line class="legend" x1="{LEFT + 10}" y1="{ly - 4}" x2="{LEFT + 34}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{LEFT + 40}" y="{ly}">{escape(r.spec.method)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return path
