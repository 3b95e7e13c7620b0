"""SVG snapshots of a placement run, one file per traced snapshot."""

from __future__ import annotations

import os
from typing import Iterable, Mapping

import numpy as np

from .arrays import design_arrays
from .netlist import Design

CANVAS = 800.0


def _num(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def render_svg(design: Design, movable, fillers=None, filler_size=(0.0, 0.0), title: str = "") -> str:
    """One frame: die outline, fillers (dimmed), components and straight nets.

    The y axis is flipped so the picture matches layout coordinates.
    """
    a = design_arrays(design)
    W, H = design.die.width, design.die.height
    scale = CANVAS / max(W, H)
    pad = 10.0
    vw, vh = W * scale + 2 * pad, H * scale + 2 * pad

    def box(x, y, w, h):
        return (_num(pad + x * scale), _num(pad + (H - y - h) * scale), _num(w * scale), _num(h * scale))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(vw)}" height="{_num(vh)}" '
        f'viewBox="0 0 {_num(vw)} {_num(vh)}">',
        f"<title>{title}</title>",
        '<rect x="{}" y="{}" width="{}" height="{}" fill="white" stroke="black"/>'.format(*box(0, 0, W, H)),
    ]
    fw, fh = filler_size
    for x, y in np.asarray(fillers if fillers is not None else [], dtype=float).reshape(-1, 2):
        out.append('<rect x="{}" y="{}" width="{}" height="{}" fill="#999" fill-opacity="0.15"/>'
                   .format(*box(x, y, fw, fh)))
    xy = a.full_positions(np.asarray(movable, dtype=float).reshape(-1, 2))
    for i, c in enumerate(design.components):
        fill = "#bbb" if c.fixed else "#4a7fc1"
        if c.halo:
            out.append('<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#d55" '
                       'stroke-dasharray="3,2"/>'.format(*box(xy[i, 0] - c.halo, xy[i, 1] - c.halo,
                                                              c.width + 2 * c.halo, c.height + 2 * c.halo)))
        out.append('<rect x="{}" y="{}" width="{}" height="{}" fill="{}" fill-opacity="0.7" stroke="#234">'
                   .format(*box(xy[i, 0], xy[i, 1], c.width, c.height), fill)
                   + f"<title>{c.name}</title></rect>")
    for p, q in a.pins(xy):
        out.append('<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#c60" stroke-width="1"/>'.format(
            _num(pad + p[0] * scale), _num(pad + (H - p[1]) * scale),
            _num(pad + q[0] * scale), _num(pad + (H - q[1]) * scale)))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_frames(trace: Iterable, design: Design, directory, filler_size=(0.0, 0.0)) -> list[str]:
    """Write ``frame_<iteration>.svg`` for every snapshot record in ``trace``.

    Records may be :class:`~picplace.placer.TraceRecord` objects or their dict
    form; records without positions are skipped. Returns the written paths.
    """
    records = [r.to_dict() if hasattr(r, "to_dict") else dict(r) for r in trace]
    snaps = [r for r in records if r.get("movable") is not None]
    if not snaps:
        return []
    os.makedirs(directory, exist_ok=True)
    width = max(4, len(str(max(r["iteration"] for r in snaps))))
    paths = []
    for r in snaps:
        path = os.path.join(directory, f"frame_{r['iteration']:0{width}d}.svg")
        svg = render_svg(design, r["movable"], r.get("fillers"), filler_size,
                         f"{design.name} iteration {r['iteration']}")
        with open(path, "w") as fh:
            fh.write(svg)
        paths.append(path)
    return paths


def frame_names(records: Iterable[Mapping]) -> list[str]:
    its = [r["iteration"] for r in records if r.get("movable") is not None]
    width = max(4, len(str(max(its)))) if its else 4
    return [f"frame_{k:0{width}d}.svg" for k in its]
