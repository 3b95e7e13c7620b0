"""Electrostatic density: binning, spectral Poisson solve, fillers, overflow.

Components are positive charges on a regular grid over the die. The
potential solves ``laplacian(psi) = -(rho - mean(rho))`` with zero normal
derivative on the die boundary, expanded in the cosine basis so that the
transforms are DCTs. The energy ``1/2 sum(rho * psi * bin_area)`` is
normalized by the squared total movable area.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft

from .netlist import Design

ASPECT_RANGE = (0.2, 5.0)


@dataclass
class DensityParams:
    grid: int | None = None
    target_density: float = 1.0
    rho: float = 2000.0
    weight: float = 0.0
    stop_overflow: float = 0.07

    def __post_init__(self):
        if self.grid is not None and (self.grid < 8 or self.grid & (self.grid - 1)):
            raise ValueError("grid must be a power of two >= 8")
        if not 0 < self.target_density <= 1:
            raise ValueError("target density must lie in (0, 1]")
        if self.rho < 0 or self.weight < 0:
            raise ValueError("rho and the density weight must be non-negative")


def default_grid(n_components: int) -> int:
    m = 1 << max(0, math.ceil(math.log2(max(2.0 * math.sqrt(max(n_components, 1)), 1.0))))
    return int(min(max(m, 64), 1024))


@dataclass
class FillerSet:
    count: int
    width: float
    height: float

    @property
    def area(self) -> float:
        return self.count * self.width * self.height


class DensityGrid:
    """An m x m bin grid over a die, with cached spectral factors."""

    def __init__(self, width: float, height: float, m: int):
        self.width = float(width)
        self.height = float(height)
        self.m = int(m)
        self.bin_w = self.width / m
        self.bin_h = self.height / m
        self.bin_area = self.bin_w * self.bin_h
        self.edges_x = np.arange(m + 1) * self.bin_w
        self.edges_y = np.arange(m + 1) * self.bin_h
        wu = np.pi * np.arange(m) / self.width
        wv = np.pi * np.arange(m) / self.height
        self.wu, self.wv = wu, wv
        k2 = wu[:, None] ** 2 + wv[None, :] ** 2
        k2[0, 0] = 1.0
        inv = 1.0 / k2
        inv[0, 0] = 0.0
        self._inv_k2 = inv

    @classmethod
    def for_design(cls, design: Design, m: int | None = None) -> "DensityGrid":
        return cls(design.die.width, design.die.height, m or default_grid(len(design.components)))

    @property
    def bin_size(self) -> float:
        return math.sqrt(self.bin_area)

    @property
    def centers(self):
        return (self.edges_x[:-1] + 0.5 * self.bin_w, self.edges_y[:-1] + 0.5 * self.bin_h)

    # ------------------------------------------------------------------ binning

    def effective_rects(self, xy: np.ndarray, size: np.ndarray, halo: np.ndarray | None = None):
        """Stamped rectangles and weights after halo growth and sub-bin expansion.

        Returns (x0, y0, wx, wy, weight). Rectangles narrower than a bin are
        widened to one bin about their centre with the weight scaled down so
        the stamped area is unchanged.
        """
        h = np.zeros(len(xy)) if halo is None else np.asarray(halo, dtype=float)
        w = size[:, 0] + 2 * h
        ht = size[:, 1] + 2 * h
        cx = xy[:, 0] + 0.5 * size[:, 0]
        cy = xy[:, 1] + 0.5 * size[:, 1]
        ew = np.maximum(w, self.bin_w)
        eh = np.maximum(ht, self.bin_h)
        weight = (w / ew) * (ht / eh)
        return cx - 0.5 * ew, cy - 0.5 * eh, ew, eh, weight

    def overlaps(self, x0, y0, wx, wy):
        """Per-rectangle overlap lengths with each column (n, m) and row (n, m)."""
        ex, ey = self.edges_x, self.edges_y
        ox = np.clip(np.minimum((x0 + wx)[:, None], ex[None, 1:]) - np.maximum(x0[:, None], ex[None, :-1]), 0, None)
        oy = np.clip(np.minimum((y0 + wy)[:, None], ey[None, 1:]) - np.maximum(y0[:, None], ey[None, :-1]), 0, None)
        return ox, oy

    def bin_density(self, xy: np.ndarray, size: np.ndarray, halo: np.ndarray | None = None) -> np.ndarray:
        """Area-ratio density map (m, m), indexed [column, row]."""
        if len(xy) == 0:
            return np.zeros((self.m, self.m))
        x0, y0, wx, wy, wt = self.effective_rects(xy, size, halo)
        ox, oy = self.overlaps(x0, y0, wx, wy)
        return (ox * wt[:, None]).T @ oy / self.bin_area

    # ------------------------------------------------------------------ field

    def _coefficients(self, density: np.ndarray) -> np.ndarray:
        m = self.m
        a = fft.dctn(density, type=2) / (m * m)
        a[0, :] *= 0.5
        a[:, 0] *= 0.5
        return a

    @staticmethod
    def _cos_synth(b: np.ndarray, axis: int) -> np.ndarray:
        b = np.moveaxis(b, axis, 0).copy()
        b[1:] *= 0.5
        return np.moveaxis(fft.dct(b, type=3, axis=0), 0, axis)

    @staticmethod
    def _sin_synth(b: np.ndarray, axis: int) -> np.ndarray:
        b = np.moveaxis(b, axis, 0)
        shifted = np.zeros_like(b)
        shifted[:-1] = 0.5 * b[1:]
        return np.moveaxis(fft.dst(shifted, type=3, axis=0), 0, axis)

    def solve_field(self, density: np.ndarray):
        """Potential, field and energy of a density map.

        Returns (psi, xi_x, xi_y, energy) with ``xi = -grad(psi)`` sampled at
        bin centres and ``energy = 1/2 sum(density * psi) * bin_area``.
        """
        a = self._coefficients(density)
        a[0, 0] = 0.0
        pc = a * self._inv_k2
        psi = self._cos_synth(self._cos_synth(pc, 0), 1)
        xi_x = self._cos_synth(self._sin_synth(pc * self.wu[:, None], 0), 1)
        xi_y = self._sin_synth(self._cos_synth(pc * self.wv[None, :], 0), 1)
        energy = 0.5 * float(np.sum(density * psi)) * self.bin_area
        return psi, xi_x, xi_y, energy

    def energy_and_grad(self, xy: np.ndarray, size: np.ndarray, halo: np.ndarray | None, norm: float):
        """Normalized energy ``D`` and dD/d(position) for every rectangle, (n, 2).

        The gradient is the exact derivative of the binned energy: moving a
        rectangle changes only its overlap with the bins holding its edges, so
        dE/dx is the potential difference across the rectangle integrated
        along those edge bins. This is the discrete form of minus the field
        integrated over the rectangle.
        """
        x0, y0, wx, wy, wt = self.effective_rects(xy, size, halo)
        ox, oy = self.overlaps(x0, y0, wx, wy)
        oxw = ox * wt[:, None]
        density = oxw.T @ oy / self.bin_area
        psi, _, _, energy = self.solve_field(density)
        dox = self._edge_rate(x0, wx, ox, self.edges_x) * wt[:, None]
        doy = self._edge_rate(y0, wy, oy, self.edges_y)
        gx = np.sum((dox @ psi) * oy, axis=1)
        gy = np.sum((oxw @ psi) * doy, axis=1)
        return energy / norm, np.stack([gx, gy], axis=1) / norm, density

    @staticmethod
    def _edge_rate(lo, length, overlap, edges):
        """d(overlap)/d(shift) per rectangle and bin: +1 at the bin holding the far edge, -1 at the near edge."""
        hi = lo + length
        far = hi[:, None] < edges[None, 1:]
        near = lo[:, None] > edges[None, :-1]
        return np.where(overlap > 0, far.astype(float) - near.astype(float), 0.0)


def augmented(d_value: float, d_grad: np.ndarray, weight: float, rho: float):
    """``weight * (D + rho/2 * D^2)`` and its gradient from ``D`` and ``grad D``."""
    value = weight * (d_value + 0.5 * rho * d_value * d_value)
    return value, weight * (1.0 + rho * d_value) * d_grad


def overflow(density: np.ndarray, target: float, bin_area: float, movable_area: float) -> float:
    if movable_area <= 0:
        return 0.0
    return float(np.sum(np.maximum(density - target, 0.0)) * bin_area / movable_area)


def make_fillers(design: Design, p: DensityParams, stamped_area: float | None = None) -> FillerSet:
    """Size the filler population for a design.

    Fillers take the mean movable aspect ratio (height / width), clamped to
    ``ASPECT_RANGE`` and turned elongated across the signal-flow axis.
    """
    movable = design.movable
    used = stamped_area if stamped_area is not None else sum(
        (c.width + 2 * c.halo) * (c.height + 2 * c.halo) for c in design.components)
    white = p.target_density * design.die.area - used
    if white <= 0 or not movable:
        return FillerSet(0, 0.0, 0.0)
    lo, hi = ASPECT_RANGE
    a = float(np.clip(np.mean([c.height / c.width for c in movable]), lo, hi))
    aspect = max(a, 1.0 / a) if design.signal_flow == "x" else min(a, 1.0 / a)
    target = 0.25 * float(np.median([c.area for c in movable]))
    count = max(1, int(round(white / target)))
    area = white / count
    w = math.sqrt(area / aspect)
    return FillerSet(count, w, aspect * w)
