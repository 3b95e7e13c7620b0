"""Progressive projection onto alignment / uniform-spacing groups, and halos."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netlist import Design


@dataclass
class ProjectionSchedule:
    s0: float = 0.05
    sT: float = 1.0
    T: int = 1500

    def __post_init__(self):
        if not 0.0 <= self.s0 <= self.sT <= 1.0:
            raise ValueError("need 0 <= s0 <= sT <= 1")
        if self.T < 1:
            raise ValueError("T must be >= 1")


def sharpness(t: float, schedule: ProjectionSchedule) -> float:
    t = min(max(t, 0.0), schedule.T)
    return schedule.s0 + (schedule.sT - schedule.s0) * (1.0 - math.cos(math.pi * t / schedule.T)) / 2.0


@dataclass(frozen=True)
class Group:
    kind: str           # "left", "x-center", "y-center" or "uniform"
    axis: int           # 0 for x, 1 for y
    members: np.ndarray  # indices into the movable array
    names: tuple[str, ...]


def compile_groups(design: Design) -> list[Group]:
    pos = {int(ci): k for k, ci in enumerate(design.movable_indices)}
    out = []
    for g in design.constraints:
        idx = np.array([pos[design.index(m)] for m in g.members], dtype=int)
        if g.kind == "alignment":
            out.append(Group(g.mode, 1 if g.mode == "y-center" else 0, idx, g.members))
        else:
            out.append(Group("uniform", 0 if g.axis == "x" else 1, idx, g.members))
    return out


def project_group(xy: np.ndarray, size: np.ndarray, group: Group, s: float) -> np.ndarray:
    """Move one group's members a fraction ``s`` of the way to their targets.

    ``xy`` holds lower-left corners; only the group's axis changes.
    """
    out = xy.copy()
    if s == 0.0:
        return out
    k, idx = group.axis, group.members
    lo = xy[idx, k]
    half = 0.5 * size[idx, k]
    if group.kind == "left":
        target = np.full_like(lo, lo.min())
    elif group.kind in ("x-center", "y-center"):
        target = np.mean(lo + half) - half
    else:
        c = lo + half
        cmin, cmax = c.min(), c.max()
        if not cmax > cmin:
            return out
        step = (cmax - cmin) / (len(idx) - 1)
        # Nearest-slot snapping is monotone, so when slots are distinct they are
        # exactly the ranks; assigning by rank also settles slot collisions.
        order = sorted(range(len(idx)), key=lambda i: (c[i], group.names[i]))
        rank = np.empty(len(idx))
        rank[order] = np.arange(len(idx))
        target = cmin + step * rank - half
    out[idx, k] = (1.0 - s) * lo + s * target
    return out


def clamp_to_die(xy: np.ndarray, size: np.ndarray, width: float, height: float) -> np.ndarray:
    hi = np.stack([np.maximum(width - size[:, 0], 0.0), np.maximum(height - size[:, 1], 0.0)], axis=1)
    return np.clip(xy, 0.0, hi)


def apply_all(xy: np.ndarray, size: np.ndarray, groups: list[Group], s: float,
              width: float, height: float) -> np.ndarray:
    for g in groups:
        xy = project_group(xy, size, g, s)
    return clamp_to_die(xy, size, width, height)


def group_residual(xy: np.ndarray, size: np.ndarray, group: Group) -> float:
    """Worst violation of a group's constraint in micrometres."""
    k, idx = group.axis, group.members
    lo = xy[idx, k]
    if group.kind == "left":
        return float(lo.max() - lo.min())
    c = lo + 0.5 * size[idx, k]
    if group.kind in ("x-center", "y-center"):
        return float(c.max() - c.min())
    gaps = np.diff(np.sort(c))
    return float(gaps.max() - gaps.min()) if len(gaps) else 0.0


def apply_halos(design: Design, extra: np.ndarray | None = None):
    """Halo-inflated footprints: (offset (n,), size (n, 2)).

    The inflated rectangle of component i starts at ``xy[i] - offset[i]``.
    """
    halo = np.array([c.halo for c in design.components], dtype=float)
    if extra is not None:
        halo = halo + extra
    size = np.array([[c.width, c.height] for c in design.components], dtype=float).reshape(-1, 2)
    return halo, size + 2 * halo[:, None]
