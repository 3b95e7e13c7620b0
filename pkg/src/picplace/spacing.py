"""Routing-informed net spacing: demand, crossing congestion and the penalty.

A net's spacing demand is the larger of its two endpoint demands, where an
endpoint needs ``r_bend + P_num * S_crs / 2`` for port access plus
``#CR * S_crs`` for the crossings its straight-line segment currently has.
The penalty pushes the other pin out along the demanding port's direction
until that clearance is met.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import count_crossings
from .netlist import Component, Design, Port, Tech

VARIANTS = ("none", "pi", "rbend", "portcount", "full")
_ALIASES = {"port-inflation": "pi", "rbend-only": "rbend", "portcount-only": "portcount"}


@dataclass
class SpacingParams:
    weight: float = 1.0
    period: int = 100
    start: int = 100
    variant: str = "full"
    literal: bool = False

    def __post_init__(self):
        self.variant = _ALIASES.get(self.variant, self.variant)
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown spacing variant {self.variant!r}")
        if self.weight < 0:
            raise ValueError("spacing weight must be non-negative")
        if self.period < 1:
            raise ValueError("refresh period must be >= 1")

    @property
    def active(self) -> bool:
        return self.variant in ("rbend", "portcount", "full") and self.weight > 0

    def is_refresh(self, iteration: int) -> bool:
        """Crossing congestion is recomputed at start, start + period, ..."""
        return iteration >= self.start and (iteration - self.start) % self.period == 0


def port_density(component: Component, port: Port, tech: Tech) -> float:
    p_num = sum(1 for p in component.ports if p.dir == port.dir)
    return tech.bend_radius + 0.5 * p_num * tech.crossing_size


def congestion(per_net_crossings, tech: Tech) -> np.ndarray:
    return np.asarray(per_net_crossings, dtype=float) * tech.crossing_size


def net_crossings(pins: np.ndarray):
    """Crossings among pin-to-pin segments, ``pins`` shaped (E, 2, 2)."""
    return count_crossings(pins)


def endpoint_demand(pin_pnum: np.ndarray, tech: Tech, variant: str) -> np.ndarray:
    """(E, 2) crossing-free demand of each endpoint under a spacing variant."""
    half = 0.5 * pin_pnum * tech.crossing_size
    if variant == "rbend":
        return np.full_like(half, tech.bend_radius)
    if variant == "portcount":
        return half
    return tech.bend_radius + half


def net_spacing(pin_pnum: np.ndarray, tech: Tech, r_cong: np.ndarray | None = None, variant: str = "full"):
    """Per-net demand ``S`` and the index (0/1) of the endpoint that sets it."""
    dem = endpoint_demand(pin_pnum, tech, variant)
    if variant == "full" and r_cong is not None:
        dem = dem + np.asarray(r_cong, dtype=float)[:, None]
    which = (dem[:, 1] > dem[:, 0]).astype(int)
    s = dem[np.arange(len(dem)), which]
    return s, which


def clearance_deficit(pins, pin_dir, s, which, literal=False):
    """Signed per-axis shortfall, shape (E, 2), gated to the port's axis.

    Positive entries are violations. With ``literal`` the sign is flipped so
    that clearance *beyond* ``s`` is what gets penalized.
    """
    E = len(s)
    idx = np.arange(E)
    this = pins[idx, which]
    other = pins[idx, 1 - which]
    v = pin_dir[idx, which]
    d = other - this
    proj = v * d
    raw = (proj - s[:, None]) if literal else (s[:, None] - proj)
    gate = np.abs(v) > 0.5
    return raw, gate, v


def spacing_penalty(pins: np.ndarray, pin_dir: np.ndarray, s: np.ndarray, which: np.ndarray,
                    p: SpacingParams):
    """Total penalty and its gradient w.r.t. every pin, (E, 2, 2)."""
    E = len(s)
    grad = np.zeros((E, 2, 2))
    if E == 0 or not p.active:
        return 0.0, grad
    raw, gate, v = clearance_deficit(pins, pin_dir, s, which, p.literal)
    r = np.where(gate, np.maximum(raw, 0.0), 0.0)
    value = p.weight * float(np.sum(r * r))
    # d(raw)/d(d) = -v (deficit form) or +v (literal form); d = other - this
    sign = 1.0 if p.literal else -1.0
    g_d = p.weight * 2.0 * r * sign * v
    idx = np.arange(E)
    grad[idx, 1 - which] += g_d
    grad[idx, which] -= g_d
    return value, grad


def violating_nets(pins, pin_dir, s, which) -> np.ndarray:
    raw, gate, _ = clearance_deficit(pins, pin_dir, s, which)
    return np.any(gate & (raw > 0), axis=1)


def inflate_for_ports(design: Design, tech: Tech | None = None) -> np.ndarray:
    """Halo increment per component: ports on its densest edge times the bend radius."""
    tech = tech or design.tech
    out = np.zeros(len(design.components))
    for i, c in enumerate(design.components):
        counts: dict[str, int] = {}
        for port in c.ports:
            counts[port.dir] = counts.get(port.dir, 0) + 1
        out[i] = max(counts.values(), default=0) * tech.bend_radius
    return out
