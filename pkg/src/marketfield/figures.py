"""Figure sampling and CSV/SVG writers."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .config import RunConfig
from .soliton import choice_components, choice_magnitude_pq, demand_curve_family, derived_fields


@dataclass(frozen=True)
class FigureSpec:
    id: int
    quantity: str
    axes: tuple
    title: str


FIGURES = {
    1: FigureSpec(1, "c1", ("s", "t"), "Price choice component C_h^(1)"),
    2: FigureSpec(2, "c2", ("s", "t"), "Quantitative choice component C_h^(2)"),
    3: FigureSpec(3, "c3", ("s", "t"), "Capital-driven choice C_h^(3)"),
    4: FigureSpec(4, "magnitude", ("s", "t"), "Choice value |C_h| in the (P, Q) plane"),
    5: FigureSpec(5, "magnitude_sq", ("p", "q"), "(C_h^(1))^2 + (C_h^(2))^2"),
    6: FigureSpec(6, "derived_c3", ("S", "t"), "Non-price competition C^(3)"),
    7: FigureSpec(7, "p3", ("S", "t"), "Profit component P^(3)"),
    8: FigureSpec(8, "p3_alt", ("S", "t"), "Profit component P^(3), alternate offset"),
}


def figure_spec(fig_id: int) -> FigureSpec:
    try:
        return FIGURES[int(fig_id)]
    except (KeyError, ValueError):
        raise ValueError(f"figure id must be 1..8, got {fig_id!r}") from None


def sample_figure(spec: FigureSpec, config: RunConfig):
    """Sample a figure quantity; returns ``(s, t, values)`` with ``values[i_t, i_s]``."""
    params = config.params()
    s = np.linspace(*config.s_range, config.n_s)
    t = np.linspace(*config.t_range, config.n_t)
    S, T = np.meshgrid(s, t)
    q = spec.quantity
    if q in ("c1", "c2", "c3"):
        values = getattr(choice_components(params, S, T), q)
    elif q == "magnitude":
        values = choice_magnitude_pq(params, S, T)
    elif q == "magnitude_sq":
        values = choice_magnitude_pq(params, S, T) ** 2
    elif q == "derived_c3":
        values = derived_fields(params, S, T, config.x1, config.x2).c3
    elif q == "p3":
        values = derived_fields(params, S, T, config.x1, config.x2).p3
    elif q == "p3_alt":
        values = derived_fields(params, S, T, config.x1_alt, config.x2_alt).p3
    else:
        raise ValueError(f"unknown quantity {q!r}")
    return s, t, values


def _fmt(v):
    return f"{v:.12g}"


def write_grid_csv(path, s, t, values):
    """Header ``s,t,value``; rows ordered with ``t`` outer and ``s`` inner."""
    lines = ["s,t,value"]
    for j, tj in enumerate(t):
        tj = _fmt(tj)
        lines.extend(f"{_fmt(si)},{tj},{_fmt(v)}" for si, v in zip(s, values[j]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def demand_rows(config: RunConfig):
    p = np.linspace(0.0, config.p_max, config.n_pq)
    P, Q = np.meshgrid(p, p)
    ch, R = demand_curve_family(P, Q, config.demand_a)
    return P.ravel(), Q.ravel(), ch.ravel(), R.ravel()


def write_demand_csv(path, config: RunConfig):
    P, Q, ch, R = demand_rows(config)
    lines = ["P,Q,ch,R"]
    lines.extend(f"{_fmt(a)},{_fmt(b)},{_fmt(c)},{_fmt(r)}" for a, b, c, r in zip(P, Q, ch, R))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# Colour ramp: linear interpolation in RGB from LOW (at the minimum value) to
# HIGH (at the maximum value).
LOW = (49, 54, 149)
HIGH = (244, 109, 67)


def _color(frac):
    r, g, b = (round(lo + (hi - lo) * frac) for lo, hi in zip(LOW, HIGH))
    return f"#{r:02x}{g:02x}{b:02x}"


def write_heatmap_svg(path, s, t, values, title="", axes=("s", "t"), cell=3):
    """Minimal self-contained SVG heatmap, one ``rect`` per grid cell."""
    ns, nt = len(s), len(t)
    pad_l, pad_t, pad_b = 50, 30, 40
    width = pad_l + ns * cell + 20
    height = pad_t + nt * cell + pad_b
    vmin, vmax = float(np.min(values)), float(np.max(values))
    span = vmax - vmin or 1.0
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<!-- linear colour map: rgb{LOW} at {vmin:.6g} to rgb{HIGH} at {vmax:.6g} -->",
        f'<text x="{pad_l}" y="18" font-size="12">{escape(title)}</text>',
        '<g shape-rendering="crispEdges">',
    ]
    for j in range(nt):
        # t increases upwards
        y = pad_t + (nt - 1 - j) * cell
        for i in range(ns):
            x = pad_l + i * cell
            out.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{_color((values[j, i] - vmin) / span)}"/>')
    out.append("</g>")
    base = pad_t + nt * cell
    out.append(f'<text x="{pad_l + ns * cell / 2:.1f}" y="{base + 28}" font-size="12">{escape(axes[0])}</text>')
    out.append(f'<text x="10" y="{pad_t + nt * cell / 2:.1f}" font-size="12">{escape(axes[1])}</text>')
    out.append(f'<text x="{pad_l}" y="{base + 14}" font-size="10">{s[0]:.3g}</text>')
    out.append(f'<text x="{pad_l + ns * cell - 20}" y="{base + 14}" font-size="10">{s[-1]:.3g}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


def run_figure(fig_id, config: RunConfig, out_dir=None, fmt=None):
    """Write figure ``fig_id`` as ``figure<N>.csv`` and/or ``figure<N>.svg``; returns the paths."""
    spec = figure_spec(fig_id)
    out_dir = Path(out_dir if out_dir is not None else config.output_dir)
    fmt = fmt or config.format
    out_dir.mkdir(parents=True, exist_ok=True)
    s, t, values = sample_figure(spec, config)
    written = []
    if fmt in ("csv", "both"):
        path = out_dir / f"figure{spec.id}.csv"
        write_grid_csv(path, s, t, values)
        written.append(path)
    if fmt in ("svg", "both"):
        path = out_dir / f"figure{spec.id}.svg"
        write_heatmap_svg(path, s, t, values, title=f"Figure {spec.id}. {spec.title}", axes=spec.axes)
        written.append(path)
    return written


def run_demand(config: RunConfig, out_dir=None):
    out_dir = Path(out_dir if out_dir is not None else config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "demand.csv"
    write_demand_csv(path, config)
    return [path]
