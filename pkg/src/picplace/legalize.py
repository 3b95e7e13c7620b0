"""Greedy macro legalization on halo-inflated footprints.

Stage 1 inserts components largest-first at the legal candidate closest to
their global-placement position, drawing candidates from the Hanan grid of
already placed edges. Stage 2 slides each component along x and y back
toward its target while it stays legal. Rounds repeat with the worst-moved
components inserted first, and the layout with the least total displacement
is kept.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .netlist import Design, NetlistError

TOL = 1e-9


@dataclass
class LegalizeResult:
    positions: np.ndarray          # movable lower-left corners
    total_displacement: float
    max_displacement: float
    status: str
    violations: list = field(default_factory=list)


def _footprints(design: Design):
    halo = np.array([c.halo for c in design.components], dtype=float)
    size = np.array([[c.width, c.height] for c in design.components], dtype=float).reshape(-1, 2)
    return halo, size


def verify_legal(design: Design, positions: np.ndarray) -> list[dict]:
    """Every overlapping pair of halo-inflated footprints and every component
    sticking out of the die. ``positions`` holds all components, (n, 2)."""
    xy = np.asarray(positions, dtype=float)
    halo, size = _footprints(design)
    names = [c.name for c in design.components]
    lo = xy - halo[:, None]
    hi = xy + size + halo[:, None]
    out = []
    n = len(xy)
    for i in range(n):
        ox = np.minimum(hi[i, 0], hi[i + 1:, 0]) - np.maximum(lo[i, 0], lo[i + 1:, 0])
        oy = np.minimum(hi[i, 1], hi[i + 1:, 1]) - np.maximum(lo[i, 1], lo[i + 1:, 1])
        for k in np.nonzero((ox > TOL) & (oy > TOL))[0]:
            j = i + 1 + int(k)
            out.append({"type": "overlap", "a": names[i], "b": names[j], "area": float(ox[k] * oy[k])})
    W, H = design.die.width, design.die.height
    for i in range(n):
        sides = []
        if xy[i, 0] < -TOL:
            sides.append("left")
        if xy[i, 0] + size[i, 0] > W + TOL:
            sides.append("right")
        if xy[i, 1] < -TOL:
            sides.append("bottom")
        if xy[i, 1] + size[i, 1] > H + TOL:
            sides.append("top")
        for side in sides:
            out.append({"type": "boundary", "component": names[i], "side": side})
    return out


class _Board:
    """Placed inflated rectangles, for fast legality queries."""

    def __init__(self, W, H):
        self.W, self.H = W, H
        self.lo = np.zeros((0, 2))
        self.hi = np.zeros((0, 2))

    def add(self, lo, hi):
        self.lo = np.vstack([self.lo, lo])
        self.hi = np.vstack([self.hi, hi])

    def free(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Mask over candidate boxes (k, 2) that overlap nothing placed."""
        if len(self.lo) == 0:
            return np.ones(len(lo), dtype=bool)
        ox = np.minimum(hi[:, None, 0], self.hi[None, :, 0]) - np.maximum(lo[:, None, 0], self.lo[None, :, 0])
        oy = np.minimum(hi[:, None, 1], self.hi[None, :, 1]) - np.maximum(lo[:, None, 1], self.lo[None, :, 1])
        return ~np.any((ox > TOL) & (oy > TOL), axis=1)


def _insert(order, target, size, halo, fixed_lo, fixed_hi, W, H):
    """Stage 1. Returns positions (NaN where nothing legal was found)."""
    board = _Board(W, H)
    if len(fixed_lo):
        board.add(fixed_lo, fixed_hi)
    pos = np.full_like(target, np.nan)
    for i in order:
        w, h = size[i]
        g = halo[i]
        tx = min(max(target[i, 0], 0.0), max(W - w, 0.0))
        ty = min(max(target[i, 1], 0.0), max(H - h, 0.0))
        # Hanan lines: abut each placed edge from either side, plus the die walls
        xs = np.concatenate([[tx, 0.0, W - w], board.hi[:, 0] + g, board.lo[:, 0] - w - g])
        ys = np.concatenate([[ty, 0.0, H - h], board.hi[:, 1] + g, board.lo[:, 1] - h - g])
        xs = np.unique(xs[(xs >= -TOL) & (xs <= W - w + TOL)])
        ys = np.unique(ys[(ys >= -TOL) & (ys <= H - h + TOL)])
        cx, cy = np.meshgrid(xs, ys, indexing="ij")
        cand = np.stack([cx.ravel(), cy.ravel()], axis=1)
        disp = np.abs(cand[:, 0] - target[i, 0]) + np.abs(cand[:, 1] - target[i, 1])
        rank = np.lexsort((cand[:, 1], cand[:, 0], disp))
        cand = cand[rank]
        ok = board.free(cand - g, cand + size[i] + g)
        if not ok.any():
            continue
        p = cand[np.argmax(ok)]
        pos[i] = p
        board.add(p - g, p + size[i] + g)
    return pos


def _slide(pos, target, size, halo, fixed_lo, fixed_hi, sweeps=50):
    """Stage 2: move each component straight toward its target while legal."""
    n = len(pos)
    lo = np.vstack([pos - halo[:, None], fixed_lo])
    hi = np.vstack([pos + size + halo[:, None], fixed_hi])
    for _ in range(sweeps):
        moved = False
        for i in range(n):
            for k in (0, 1):
                delta = target[i, k] - pos[i, k]
                if abs(delta) <= TOL:
                    continue
                o = 1 - k
                others = np.ones(len(lo), dtype=bool)
                others[i] = False
                # blockers share the orthogonal extent
                span = (np.minimum(hi[i, o], hi[:, o]) - np.maximum(lo[i, o], lo[:, o])) > TOL
                block = others & span
                if delta > 0:
                    ahead = block & (lo[:, k] >= hi[i, k] - TOL)
                    room = np.min(lo[ahead, k] - hi[i, k]) if ahead.any() else np.inf
                    step = min(delta, max(room, 0.0))
                else:
                    ahead = block & (hi[:, k] <= lo[i, k] + TOL)
                    room = np.min(lo[i, k] - hi[ahead, k]) if ahead.any() else np.inf
                    step = -min(-delta, max(room, 0.0))
                if abs(step) > TOL:
                    pos[i, k] += step
                    lo[i, k] += step
                    hi[i, k] += step
                    moved = True
        if not moved:
            break
    return pos


def legalize(design: Design, movable_xy: np.ndarray, rounds: int = 3) -> LegalizeResult:
    """Remove overlaps among halo-inflated footprints with small displacement."""
    W, H = design.die.width, design.die.height
    halo_all, size_all = _footprints(design)
    mov = design.movable_indices
    fixed = np.array([i for i in range(len(design.components)) if design.components[i].fixed], dtype=int)
    target = np.asarray(movable_xy, dtype=float).reshape(-1, 2)
    if target.shape != (len(mov), 2):
        raise NetlistError("", "placement does not match the movable components")
    size, halo = size_all[mov], halo_all[mov]
    fxy = design.positions()[fixed] if len(fixed) else np.zeros((0, 2))
    fixed_lo = fxy - halo_all[fixed, None] if len(fixed) else np.zeros((0, 2))
    fixed_hi = fxy + size_all[fixed] + halo_all[fixed, None] if len(fixed) else np.zeros((0, 2))
    names = [design.components[i].name for i in mov]

    order = sorted(range(len(mov)), key=lambda i: (-size[i, 0] * size[i, 1], names[i]))
    best = None
    for _ in range(max(rounds, 1)):
        pos = _insert(order, target, size, halo, fixed_lo, fixed_hi, W, H)
        placed = ~np.isnan(pos).any(axis=1)
        pos = np.where(placed[:, None], pos, target)
        if placed.all():
            pos = _slide(pos, target, size, halo, fixed_lo, fixed_hi)
        disp = np.abs(pos - target).sum(axis=1)
        total = float(disp.sum())
        full = design.positions()
        full[mov] = pos
        viol = verify_legal(design, full)
        legal = placed.all() and not viol
        key = (not legal, total)
        if best is None or key < best[0]:
            best = (key, pos.copy(), disp, viol, legal)
        if legal and total <= TOL:
            break
        # next round: the components that moved most go first
        order = sorted(range(len(mov)), key=lambda i: (-disp[i], -size[i, 0] * size[i, 1], names[i]))
    _, pos, disp, viol, legal = best
    return LegalizeResult(pos, float(disp.sum()), float(disp.max(initial=0.0)), "success" if legal else "failure",
                          viol)


class Legalizer(TransformerMixin, BaseEstimator, auto_wrap_output_keys=None):
    """Estimator wrapper: ``fit`` legalizes the design's current positions."""

    def __init__(self, rounds: int = 3):
        self.rounds = rounds

    def fit(self, X, y=None):
        from .placer import check_design

        design = check_design(X)
        xy = design.positions()[design.movable_indices]
        if np.isnan(xy).any():
            raise NetlistError("components", "legalization needs a position for every component")
        self.design_ = design
        self.result_ = legalize(design, xy, self.rounds)
        self.positions_ = self.result_.positions
        self.status_ = self.result_.status
        return self

    def transform(self, X=None) -> Design:
        check_is_fitted(self, "positions_")
        full = self.design_.positions()
        full[self.design_.movable_indices] = self.positions_
        return self.design_.with_positions(full)
