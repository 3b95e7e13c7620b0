"""Routability proxies computed straight from a placement.

Bends are predicted per net from the two port headings, lengths add a
quarter-arc correction per bend, and insertion loss accumulates along the
worst source-to-sink path of the signal-flow graph.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .arrays import design_arrays
from .geometry import count_crossings
from .netlist import Design, Tech
from .spacing import congestion, net_spacing, violating_nets


@dataclass(frozen=True)
class LossModel:
    propagation: float = 2.0   # dB / cm
    bend: float = 0.01         # dB per 90 degree bend
    crossing: float = 0.2      # dB per crossing

    def __post_init__(self):
        if min(self.propagation, self.bend, self.crossing) < 0:
            raise ValueError("loss coefficients must be non-negative")


@dataclass
class MetricsReport:
    crossings: int
    hpwl: float
    ba_tot: float
    il_max: float
    spacing_violations: int
    wall_time: float
    il_cyclic: bool = False

    def to_dict(self, timing: bool = True) -> dict:
        """JSON-ready fields. Wall time is the one non-reproducible number, so
        callers that need byte-identical reports can leave it out."""
        out = {
            "#CR": int(self.crossings),
            "HPWL": float(self.hpwl),
            "BA_tot": float(self.ba_tot),
            "IL_max": float(self.il_max),
            "spacing_violations": int(self.spacing_violations),
        }
        if timing:
            out["wall_time"] = float(self.wall_time)
        out["il_cyclic"] = bool(self.il_cyclic)
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2)


def _sign(v: float, tol: float) -> int:
    return 0 if abs(v) <= tol else (1 if v > 0 else -1)


def predict_bends(p1, v1, p2, v2, tol: float = 1e-9) -> int:
    """Fewest 90 degree turns for a Manhattan route that leaves ``p1`` heading
    ``v1`` and enters ``p2`` heading ``-v2``."""
    h0 = np.asarray(v1, dtype=float)
    hf = -np.asarray(v2, dtype=float)
    d = np.asarray(p2, dtype=float) - np.asarray(p1, dtype=float)
    fwd = _sign(float(d @ h0), tol)
    lat = _sign(float(d[0] * -h0[1] + d[1] * h0[0]), tol)
    turn = float(h0 @ hf)
    if turn > 0.5:                       # same heading at both ends
        if fwd > 0:
            return 0 if lat == 0 else 2
        return 4
    if turn < -0.5:                      # route has to come back
        return 2 if lat != 0 else 4
    # perpendicular headings: one corner if the target lies ahead on both legs
    return 1 if fwd > 0 and _sign(float(d @ hf), tol) > 0 else 3


def net_bends(pins: np.ndarray, pin_dir: np.ndarray) -> np.ndarray:
    return np.array([predict_bends(p[0], v[0], p[1], v[1]) for p, v in zip(pins, pin_dir)], dtype=int)


def net_lengths(pins: np.ndarray, bends: np.ndarray, bend_radius: float) -> np.ndarray:
    d = pins[:, 1] - pins[:, 0]
    manhattan = np.abs(d).sum(axis=1)
    est = manhattan + bends * (math.pi / 2 - 2) * bend_radius
    return np.maximum(est, np.hypot(d[:, 0], d[:, 1]))


def net_losses(length_um: np.ndarray, bends: np.ndarray, crossings: np.ndarray, loss: LossModel) -> np.ndarray:
    return loss.propagation * length_um * 1e-4 + loss.bend * bends + loss.crossing * crossings


def _flow_edges(design: Design, pin_dir: np.ndarray, pins: np.ndarray):
    """Orient every net along the signal flow: the pin whose port faces
    downstream is the source, falling back to the upstream coordinate."""
    k = 0 if design.signal_flow == "x" else 1
    a = design_arrays(design)
    edges = []
    for e in range(len(pins)):
        f0, f1 = pin_dir[e, 0, k], pin_dir[e, 1, k]
        if f0 > 0.5 and f1 < 0.5:
            src = 0
        elif f1 > 0.5 and f0 < 0.5:
            src = 1
        else:
            src = 0 if pins[e, 0, k] <= pins[e, 1, k] else 1
        edges.append((int(a.pin_comp[e, src]), int(a.pin_comp[e, 1 - src])))
    return edges


def longest_path(n_nodes: int, edges: list[tuple[int, int]], weight: np.ndarray):
    """Heaviest directed path; ``None`` when the graph has a cycle."""
    g = nx.DiGraph()
    g.add_nodes_from(range(n_nodes))
    for (u, v), w in zip(edges, weight):
        # parallel nets between the same pair: only the lossier one can be on the worst path
        if not g.has_edge(u, v) or g[u][v]["weight"] < w:
            g.add_edge(u, v, weight=float(w))
    if not nx.is_directed_acyclic_graph(g):
        return None
    return float(nx.dag_longest_path_length(g, weight="weight", default_weight=0.0))


def spacing_violations(design: Design, positions: np.ndarray, tech: Tech | None = None) -> int:
    """Nets whose clearance on the demanding port's axis is below the full
    demand (port density plus current crossing congestion)."""
    tech = tech or design.tech
    a = design_arrays(design)
    pins = a.pins(np.asarray(positions, dtype=float))
    if len(pins) == 0:
        return 0
    _, per_net = count_crossings(pins)
    s, which = net_spacing(a.pin_pnum, tech, congestion(per_net, tech), "full")
    return int(np.sum(violating_nets(pins, a.pin_dir, s, which)))


def evaluate(design: Design, positions: np.ndarray, loss: LossModel | None = None,
             wall_time: float | None = None) -> MetricsReport:
    """``positions`` holds every component, shape (n, 2)."""
    t0 = time.perf_counter()
    loss = loss or LossModel()
    a = design_arrays(design)
    xy = np.asarray(positions, dtype=float)
    pins = a.pins(xy)
    total, per_net = count_crossings(pins)
    bends = net_bends(pins, a.pin_dir)
    lengths = net_lengths(pins, bends, design.tech.bend_radius)
    il = net_losses(lengths, bends, per_net, loss)
    path = longest_path(a.n, _flow_edges(design, a.pin_dir, pins), il)
    cyclic = path is None
    il_max = float(il.max(initial=0.0)) if cyclic else path
    hpwl = float(np.abs(pins[:, 1] - pins[:, 0]).sum()) if len(pins) else 0.0
    viol = spacing_violations(design, xy)
    elapsed = time.perf_counter() - t0 if wall_time is None else wall_time
    return MetricsReport(int(total), hpwl, 90.0 * float(bends.sum()), il_max, viol, float(elapsed), cyclic)
