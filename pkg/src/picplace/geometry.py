"""Straight-segment crossing detection between two-pin nets."""

from __future__ import annotations

import numpy as np

BRUTE_FORCE_LIMIT = 2000
_CHUNK = 256


def _orient(ax, ay, bx, by, cx, cy):
    return np.sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


def crossing_pairs(seg: np.ndarray, i: np.ndarray, j: np.ndarray) -> np.ndarray:
    """Boolean mask: does segment ``i[k]`` cross segment ``j[k]``?

    A pair counts when the segments properly cross at interior points or lie
    on one line and overlap with positive length. Pairs that share an exact
    endpoint, touch at a single endpoint, or involve a zero-length segment do
    not count.
    """
    p, q = seg[i, 0], seg[i, 1]
    r, s = seg[j, 0], seg[j, 1]
    px, py, qx, qy = p[:, 0], p[:, 1], q[:, 0], q[:, 1]
    rx, ry, sx, sy = r[:, 0], r[:, 1], s[:, 0], s[:, 1]

    o1 = _orient(px, py, qx, qy, rx, ry)
    o2 = _orient(px, py, qx, qy, sx, sy)
    o3 = _orient(rx, ry, sx, sy, px, py)
    o4 = _orient(rx, ry, sx, sy, qx, qy)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)

    collinear = (o1 == 0) & (o2 == 0) & (o3 == 0) & (o4 == 0)
    if np.any(collinear):
        # project on whichever axis segment i spans more
        use_x = np.abs(qx - px) >= np.abs(qy - py)
        a0 = np.where(use_x, np.minimum(px, qx), np.minimum(py, qy))
        a1 = np.where(use_x, np.maximum(px, qx), np.maximum(py, qy))
        b0 = np.where(use_x, np.minimum(rx, sx), np.minimum(ry, sy))
        b1 = np.where(use_x, np.maximum(rx, sx), np.maximum(ry, sy))
        overlap = (np.minimum(a1, b1) - np.maximum(a0, b0)) > 0
        proper |= collinear & overlap

    def same(a, b):
        return (a[:, 0] == b[:, 0]) & (a[:, 1] == b[:, 1])

    shared = same(p, r) | same(p, s) | same(q, r) | same(q, s)
    degenerate = same(p, q) | same(r, s)
    return proper & ~shared & ~degenerate


def _brute_force(seg: np.ndarray):
    n = len(seg)
    per = np.zeros(n, dtype=np.int64)
    total = 0
    for start in range(0, n, _CHUNK):
        rows = np.arange(start, min(start + _CHUNK, n))
        ii, jj = np.meshgrid(rows, np.arange(n), indexing="ij")
        keep = jj > ii
        i, j = ii[keep], jj[keep]
        hit = crossing_pairs(seg, i, j)
        total += int(hit.sum())
        np.add.at(per, i[hit], 1)
        np.add.at(per, j[hit], 1)
    return total, per


def _sweep(seg: np.ndarray):
    """Sort by left x extent and test only pairs whose x and y extents overlap."""
    n = len(seg)
    xmin = seg[:, :, 0].min(axis=1)
    xmax = seg[:, :, 0].max(axis=1)
    ymin = seg[:, :, 1].min(axis=1)
    ymax = seg[:, :, 1].max(axis=1)
    order = np.argsort(xmin, kind="stable")
    sxmin = xmin[order]
    # for each segment, the sorted range of segments starting before it ends
    stop = np.searchsorted(sxmin, xmax[order], side="right")
    per = np.zeros(n, dtype=np.int64)
    total = 0
    for k in range(n):
        cand = order[k + 1:stop[k]]
        if len(cand) == 0:
            continue
        a = order[k]
        cand = cand[(ymin[cand] <= ymax[a]) & (ymax[cand] >= ymin[a])]
        if len(cand) == 0:
            continue
        hit = crossing_pairs(seg, np.full(len(cand), a), cand)
        h = cand[hit]
        total += len(h)
        per[a] += len(h)
        np.add.at(per, h, 1)
    return total, per


def count_crossings(segments) -> tuple[int, np.ndarray]:
    """Count crossing pairs among segments given as an (S, 2, 2) array.

    Returns the total number of crossing pairs and, per segment, the number
    of partners it crosses (so the per-segment counts sum to twice the total).
    """
    seg = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if len(seg) < 2:
        return 0, np.zeros(len(seg), dtype=np.int64)
    if len(seg) <= BRUTE_FORCE_LIMIT:
        return _brute_force(seg)
    return _sweep(seg)
