"""Flat numpy views of a Design used by the numerical kernels."""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .netlist import DIRECTIONS, Design


@dataclass(frozen=True, eq=False)
class DesignArrays:
    size: np.ndarray        # (n, 2) width, height
    halo: np.ndarray        # (n,)
    fixed: np.ndarray       # (n,) bool
    movable: np.ndarray     # indices of movable components
    fixed_xy: np.ndarray    # (n, 2) positions, NaN for movables without one
    pin_comp: np.ndarray    # (E, 2) component index of each pin
    pin_off: np.ndarray     # (E, 2, 2) port offset of each pin
    pin_dir: np.ndarray     # (E, 2, 2) unit direction of each pin
    pin_pnum: np.ndarray    # (E, 2) same-direction port count on the pin's component
    weight: np.ndarray      # (E,)
    port_count: np.ndarray  # (n,) total ports per component
    densest_edge: np.ndarray  # (n,) max ports sharing one direction

    @property
    def n(self) -> int:
        return len(self.size)

    @property
    def n_movable(self) -> int:
        return len(self.movable)

    @property
    def n_nets(self) -> int:
        return len(self.weight)

    def full_positions(self, movable_xy: np.ndarray) -> np.ndarray:
        xy = self.fixed_xy.copy()
        xy[self.movable] = movable_xy
        return xy

    def pins(self, xy: np.ndarray) -> np.ndarray:
        """(E, 2, 2) pin world coordinates from full (n, 2) positions."""
        return xy[self.pin_comp] + self.pin_off


def design_arrays(design: Design) -> DesignArrays:
    cached = design.__dict__.get("_arrays")
    if cached is not None:
        return cached
    arrays = _build(design)
    object.__setattr__(design, "_arrays", arrays)
    return arrays


def _build(design: Design) -> DesignArrays:
    comps = design.components
    n = len(comps)
    size = np.array([[c.width, c.height] for c in comps], dtype=float).reshape(n, 2)
    halo = np.array([c.halo for c in comps], dtype=float)
    fixed = np.array([c.fixed for c in comps], dtype=bool)
    fixed_xy = design.positions()
    pnum = []
    densest = np.zeros(n)
    port_count = np.zeros(n)
    for i, c in enumerate(comps):
        counts = {d: 0 for d in DIRECTIONS}
        for p in c.ports:
            counts[p.dir] += 1
        pnum.append(counts)
        densest[i] = max(counts.values()) if c.ports else 0
        port_count[i] = len(c.ports)
    E = len(design.nets)
    pin_comp = np.zeros((E, 2), dtype=int)
    pin_off = np.zeros((E, 2, 2))
    pin_dir = np.zeros((E, 2, 2))
    pin_pnum = np.zeros((E, 2))
    weight = np.zeros(E)
    for e, net in enumerate(design.nets):
        weight[e] = net.weight
        for k, pin in enumerate(net.pins):
            ci = design.index(pin.comp)
            port = comps[ci].port(pin.port)
            pin_comp[e, k] = ci
            pin_off[e, k] = (port.dx, port.dy)
            pin_dir[e, k] = DIRECTIONS[port.dir]
            pin_pnum[e, k] = pnum[ci][port.dir]
    return DesignArrays(size, halo, fixed, design.movable_indices, fixed_xy, pin_comp, pin_off, pin_dir,
                        pin_pnum, weight, port_count, densest)
