"""Smooth two-pin wirelength models and their analytic gradients.

Every model here depends on a net only through ``w = pin2 - pin1``, so the
gradient with respect to the second pin is ``dcost/dw`` and with respect to
the first pin it is the negation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netlist import DIRECTIONS

MODELS = ("coswa", "wa", "lse", "quadratic")
_ALIASES = {"quad": "quadratic", "cos-wa": "coswa", "cosWA": "coswa", "WA": "wa", "LSE": "lse"}

DEGENERATE_EPS = 1e-6
GAMMA_RANGE = (0.1, 5.0)


@dataclass
class WirelengthParams:
    gamma: float = 1.0
    alpha: float = 1.4
    margin: float = 0.0
    model: str = "coswa"
    theta2_raw: bool = False

    def __post_init__(self):
        self.model = _ALIASES.get(self.model, self.model)
        if self.model not in MODELS:
            raise ValueError(f"unknown wirelength model {self.model!r}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError("alpha must lie in [1, 2]")
        if not 0.0 <= self.margin <= 1.0:
            raise ValueError("angle margin must lie in [0, 1]")


def gamma_schedule(overflow: float, bin_size: float, gamma0: float | None = None) -> float:
    """Overflow-annealed smoothing: ``gamma0`` at zero overflow, 50x that at full overflow."""
    lo, hi = GAMMA_RANGE
    g0 = lo * bin_size if gamma0 is None else gamma0
    b = math.log10(hi / lo)
    return g0 * 10.0 ** (b * min(max(overflow, 0.0), 1.0))


def _as_vec(v) -> np.ndarray:
    if isinstance(v, str):
        return np.array(DIRECTIONS[v], dtype=float)
    return np.asarray(v, dtype=float)


# --------------------------------------------------------------------------- pieces


def port_cosines(w: np.ndarray, v1: np.ndarray, v2: np.ndarray, theta2_raw: bool = False):
    """Cosines of the two port angles and their gradients w.r.t. ``w``.

    Arrays are (E, 2). Nets with ``|w| < DEGENERATE_EPS`` get cos = 1 and a
    zero gradient, which makes them penalty-free.
    """
    norm = np.sqrt(np.sum(w * w, axis=-1))
    ok = norm >= DEGENERATE_EPS
    safe = np.where(ok, norm, 1.0)[..., None]
    u = w / safe
    s2 = 1.0 if theta2_raw else -1.0
    cos1 = np.sum(u * v1, axis=-1)
    cos2 = s2 * np.sum(u * v2, axis=-1)
    g1 = (v1 - cos1[..., None] * u) / safe
    g2 = (s2 * v2 - cos2[..., None] * u) / safe
    cos1 = np.where(ok, cos1, 1.0)
    cos2 = np.where(ok, cos2, 1.0)
    g1 = np.where(ok[..., None], g1, 0.0)
    g2 = np.where(ok[..., None], g2, 0.0)
    return cos1, cos2, g1, g2


def _bend_terms(w, v1, v2, c, theta2_raw=False):
    cos1, cos2, g1, g2 = port_cosines(w, v1, v2, theta2_raw)
    r1 = np.maximum(c - cos1, 0.0)
    r2 = np.maximum(c - cos2, 0.0)
    return r1 * r1, r2 * r2, (-2.0 * r1)[..., None] * g1, (-2.0 * r2)[..., None] * g2, cos1, cos2


def bend_penalty(w, v1, v2, c: float = 0.0, theta2_raw: bool = False):
    """Angle penalty ``W_theta`` of one net and its gradient w.r.t. ``w``.

    ``v1``/``v2`` are direction names (``"E"``...) or unit vectors.

    >>> bend_penalty((-10, 0), "E", "W")[0]
    2.0
    """
    w = np.asarray(w, dtype=float)[None]
    t1, t2, d1, d2, _, _ = _bend_terms(w, _as_vec(v1)[None], _as_vec(v2)[None], c, theta2_raw)
    return float(t1[0] + t2[0]), (d1 + d2)[0]


def wa_span(d: np.ndarray, gamma: float):
    """Weighted-average span of two coordinates ``d`` apart, and its derivative.

    For two points the max/min fraction pair collapses to ``d * tanh(d / 2 gamma)``,
    which needs no exponentials at all.
    """
    z = d / (2.0 * gamma)
    t = np.tanh(z)
    return d * t, t + z * (1.0 - t * t)


def lse_span(d: np.ndarray, gamma: float):
    a = np.abs(d)
    return a + 2.0 * gamma * np.log1p(np.exp(-a / gamma)), np.tanh(d / (2.0 * gamma))


# --------------------------------------------------------------------------- per-net models


def coswa_cost(w: np.ndarray, v1: np.ndarray, v2: np.ndarray, p: WirelengthParams):
    """Bending-aware cost per net, vectorized over rows of ``w`` (E, 2).

    The angle factor of a port scales only the axis that port points along;
    the other axis keeps the plain WA span. Returns (cost (E,), dcost/dw (E, 2)).
    """
    t1, t2, d1, d2, _, _ = _bend_terms(w, v1, v2, p.margin, p.theta2_raw)
    h1 = np.abs(v1[:, 0]) > 0.5
    h2 = np.abs(v2[:, 0]) > 0.5
    fx = 1.0 + np.where(h1, t1, 0.0) + np.where(h2, t2, 0.0)
    fy = 1.0 + np.where(h1, 0.0, t1) + np.where(h2, 0.0, t2)
    dfx = np.where(h1[:, None], d1, 0.0) + np.where(h2[:, None], d2, 0.0)
    dfy = (d1 + d2) - dfx

    sx, dsx = wa_span(w[:, 0], p.gamma)
    sy, dsy = wa_span(w[:, 1], p.gamma)
    a = p.alpha
    px = sx ** a
    py = sy ** a
    cost = fx * px + fy * py
    grad = dfx * px[:, None] + dfy * py[:, None]
    grad[:, 0] += fx * a * sx ** (a - 1.0) * dsx
    grad[:, 1] += fy * a * sy ** (a - 1.0) * dsy
    return cost, grad


def baseline_cost(w: np.ndarray, p: WirelengthParams):
    if p.model == "quadratic":
        return np.sum(w * w, axis=1), 2.0 * w
    span = wa_span if p.model == "wa" else lse_span
    sx, dsx = span(w[:, 0], p.gamma)
    sy, dsy = span(w[:, 1], p.gamma)
    return sx + sy, np.stack([dsx, dsy], axis=1)


def net_cost(w, v1, v2, p: WirelengthParams):
    w = np.atleast_2d(np.asarray(w, dtype=float))
    if p.model == "coswa":
        return coswa_cost(w, np.atleast_2d(v1).astype(float), np.atleast_2d(v2).astype(float), p)
    return baseline_cost(w, p)


def coswa_net(pin1, pin2, v1, v2, p: WirelengthParams):
    """Single-net cosWA cost with gradients w.r.t. both pins."""
    w = np.asarray(pin2, dtype=float) - np.asarray(pin1, dtype=float)
    cost, g = coswa_cost(w[None], _as_vec(v1)[None], _as_vec(v2)[None], p)
    return float(cost[0]), -g[0], g[0]


def baseline_net(pin1, pin2, p: WirelengthParams):
    w = np.asarray(pin2, dtype=float) - np.asarray(pin1, dtype=float)
    cost, g = baseline_cost(w[None], p)
    return float(cost[0]), -g[0], g[0]


# --------------------------------------------------------------------------- whole design


def wirelength(pins: np.ndarray, pin_dir: np.ndarray, weight: np.ndarray, p: WirelengthParams):
    """Weighted sum over nets.

    ``pins`` and ``pin_dir`` are (E, 2, 2). Returns the scalar total and the
    gradient w.r.t. every pin, shape (E, 2, 2).
    """
    E = len(weight)
    if E == 0:
        return 0.0, np.zeros((0, 2, 2))
    w = pins[:, 1] - pins[:, 0]
    cost, g = net_cost(w, pin_dir[:, 0], pin_dir[:, 1], p)
    g = g * weight[:, None]
    grad = np.stack([-g, g], axis=1)
    return float(np.sum(weight * cost)), grad


def scatter_pin_grad(pin_grad: np.ndarray, pin_comp: np.ndarray, n: int) -> np.ndarray:
    """Accumulate (E, 2, 2) pin gradients onto (n, 2) component positions."""
    out = np.zeros((n, 2))
    if len(pin_comp):
        np.add.at(out, pin_comp.ravel(), pin_grad.reshape(-1, 2))
    return out


def total_wirelength(arrays, movable_xy: np.ndarray, p: WirelengthParams):
    """Total weighted wirelength and its gradient w.r.t. movable positions (n_movable, 2)."""
    xy = arrays.full_positions(movable_xy)
    value, pg = wirelength(arrays.pins(xy), arrays.pin_dir, arrays.weight, p)
    full = scatter_pin_grad(pg, arrays.pin_comp, arrays.n)
    return value, full[arrays.movable]
