"""Gantt rendering of plans as static SVG or fixed-width text."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .engine import Placement, Plan

SECONDS_PER_COLUMN = 10.0

_ROW_H = 28
_BAR_H = 20
_LEFT = 80
_TOP = 30
_PX_PER_S = 3.0


def _horizon(plan: Plan) -> float:
    ends = [p.cycle_end for p in plan.placements] + [s.end for s in plan.swaps]
    return max(ends, default=0.0)


def render_text(plan: Plan) -> str:
    """One row per robot; each placement is drawn as its brick id padded with '=' over the
    [start, placed_at) window, the return leg as '.', battery swaps as '#'."""
    horizon = _horizon(plan)
    cols = int(math.ceil(horizon / SECONDS_PER_COLUMN))
    label_w = max([len(f"robot {r}") for r in plan.robot_ids] + [5])
    axis = [" "] * cols
    for c in range(0, cols, 10):  # a time label every 10 columns
        for k, ch in enumerate(f"{c * SECONDS_PER_COLUMN:g}"):
            if c + k < cols:
                axis[c + k] = ch
    lines = [f"{'t [s]':<{label_w}} |" + "".join(axis) + f"  ({SECONDS_PER_COLUMN:g} s per column)"]
    for rid in plan.robot_ids:
        row = [" "] * cols
        for item in plan.timeline(rid):
            a = int(item.start // SECONDS_PER_COLUMN)
            if isinstance(item, Placement):
                b = int(math.ceil(item.placed_at / SECONDS_PER_COLUMN))
                e = int(math.ceil(item.cycle_end / SECONDS_PER_COLUMN))
                text = str(item.brick)
                for c in range(a, b):
                    k = c - a
                    row[c] = text[k] if k < len(text) else "="
                for c in range(b, e):
                    row[c] = "."
            else:
                e = int(math.ceil(item.end / SECONDS_PER_COLUMN))
                for c in range(a, e):
                    row[c] = "#"
        lines.append(f"{'robot ' + str(rid):<{label_w}} |" + "".join(row).rstrip())
    lines.append(f"T' = {plan.completion_time:g} s, reward = {plan.reward}")
    return "\n".join(lines) + "\n"


def render_svg(plan: Plan, title: str = "construction plan") -> str:
    horizon = max(_horizon(plan), SECONDS_PER_COLUMN)
    width = int(_LEFT + horizon * _PX_PER_S + 40)
    height = int(_TOP + _ROW_H * max(len(plan.robot_ids), 1) + 40)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">',
        "<style>.brick{fill:#5b8fd6;stroke:#1d3f73}.ret{fill:#c9d8ef}"
        ".swap{fill:#f2b134;stroke:#8a5a00;stroke-dasharray:3 2}.lbl{fill:#fff}</style>",
        f'<text x="{_LEFT}" y="16">{escape(title)} - T\' = {plan.completion_time:g} s, reward {plan.reward}</text>',
    ]
    # time axis every 50 s
    axis_y = _TOP + _ROW_H * max(len(plan.robot_ids), 1) + 12
    t = 0.0
    while t <= horizon:
        x = _LEFT + t * _PX_PER_S
        out.append(f'<line x1="{x:.1f}" y1="{_TOP - 4}" x2="{x:.1f}" y2="{axis_y - 10}" stroke="#ddd"/>')
        out.append(f'<text x="{x:.1f}" y="{axis_y + 4}" text-anchor="middle">{t:g}</text>')
        t += 50.0
    for row, rid in enumerate(plan.robot_ids):
        y = _TOP + row * _ROW_H
        out.append(f'<text x="4" y="{y + _BAR_H - 6}">robot {rid}</text>')
        for item in plan.timeline(rid):
            x = _LEFT + item.start * _PX_PER_S
            if isinstance(item, Placement):
                w = (item.placed_at - item.start) * _PX_PER_S
                rw = (item.cycle_end - item.placed_at) * _PX_PER_S
                out.append(f'<rect class="brick" x="{x:.1f}" y="{y}" width="{w:.1f}" height="{_BAR_H}">'
                           f'<title>brick {item.brick}: {item.start:g}-{item.placed_at:g} s</title></rect>')
                if rw > 0:
                    out.append(f'<rect class="ret" x="{x + w:.1f}" y="{y + 6}" width="{rw:.1f}" height="{_BAR_H - 12}"/>')
                out.append(f'<text class="lbl" x="{x + 3:.1f}" y="{y + _BAR_H - 6}">{item.brick}</text>')
            else:
                w = (item.end - item.start) * _PX_PER_S
                out.append(f'<rect class="swap" x="{x:.1f}" y="{y}" width="{w:.1f}" height="{_BAR_H}">'
                           f'<title>battery swap: {item.start:g}-{item.end:g} s</title></rect>')
                out.append(f'<text x="{x + 3:.1f}" y="{y + _BAR_H - 6}">swap</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_gantt(plan: Plan, fmt: str = "text", title: str = "construction plan") -> str:
    if fmt == "text":
        return render_text(plan)
    if fmt == "svg":
        return render_svg(plan, title)
    raise ValueError(f"unknown Gantt format {fmt!r}")
