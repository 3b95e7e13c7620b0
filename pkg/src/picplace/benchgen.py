"""Benchmark generators: Clements MZI meshes and butterfly coupler networks.

Both return a validated :class:`~picplace.netlist.Design` whose movable
components already carry an ideal grid placement, so the same file works for
random-centre and manual initialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .netlist import Component, ConstraintGroup, Design, Die, Net, NetlistError, Pin, Port, Tech

SIZE_CLASSES = {
    # bend radius (um), target utilization
    "S": (5.0, 0.5),
    "L": (10.0, 0.35),
}
MAX_UTILIZATION = 0.85
CROSSING_SIZE = 10.0
TERMINAL = 10.0


@dataclass
class ClementsSpec:
    n: int
    size: str = "S"
    mzi_width: float = 300.0
    mzi_height: float = 50.0
    column_pitch: float | None = None
    utilization: float | None = None

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError("Clements meshes need an even mode count >= 2")
        if self.size not in SIZE_CLASSES:
            raise ValueError("size class must be S or L")


@dataclass
class ButterflySpec:
    n: int
    size: str = "S"
    coupler_width: float = 20.0
    coupler_height: float = 10.0
    stage_pitch: float | None = None
    seed: int | None = None
    utilization: float | None = None

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError("butterfly port count must be a power of two >= 2")
        if self.size not in SIZE_CLASSES:
            raise ValueError("size class must be S or L")

    @property
    def stages(self) -> int:
        return int(math.log2(self.n))


def _two_by_two(name: str, cell: str, w: float, h: float, x: float, y: float) -> Component:
    ports = (
        Port("i0", 0.0, h / 4, "W"),
        Port("i1", 0.0, 3 * h / 4, "W"),
        Port("o0", w, h / 4, "E"),
        Port("o1", w, 3 * h / 4, "E"),
    )
    return Component(name, cell, w, h, ports, x=x, y=y)


def _terminal(name: str, side: str, port_y: float, die_w: float) -> Component:
    t = TERMINAL
    if side == "in":
        return Component(name, "term_in", t, t, (Port("o", t, t / 2, "E"),), fixed=True, x=0.0, y=port_y - t / 2)
    return Component(name, "term_out", t, t, (Port("i", 0.0, t / 2, "W"),), fixed=True,
                     x=die_w - t, y=port_y - t / 2)


def _die(area: float, width: float, size: str, utilization: float | None, min_height: float):
    util = utilization if utilization is not None else SIZE_CLASSES[size][1]
    if util > MAX_UTILIZATION:
        raise NetlistError("", f"area utilization {util:.2f} exceeds {MAX_UTILIZATION}")
    height = area / util / width
    if height < min_height:
        raise NetlistError("", f"die height {height:.1f} cannot hold the mesh columns ({min_height:.1f} needed)")
    return Die(width, height)


def clements_columns(n: int) -> list[list[int]]:
    """Lower mode index (0-based) of every MZI, column by column; empty columns dropped."""
    cols = []
    for c in range(n):
        start = 0 if c % 2 == 0 else 1
        lows = list(range(start, n - 1, 2))
        if lows:
            cols.append(lows)
    return cols


def gen_clements(spec: ClementsSpec | int, size: str = "S") -> Design:
    """Clements rectangular MZI mesh with N fixed inputs (west) and outputs (east).

    Alignment groups: one left-alignment group per column and one y-center
    group per coupled mode pair, each only when it has two or more members.
    """
    if isinstance(spec, int):
        spec = ClementsSpec(spec, size)
    n, w, h = spec.n, spec.mzi_width, spec.mzi_height
    bend, util = SIZE_CLASSES[spec.size]
    cols = clements_columns(n)
    pitch = spec.column_pitch or 1.25 * w
    area = sum(len(c) for c in cols) * w * h + 2 * n * TERMINAL ** 2
    die = _die(area, len(cols) * pitch + 2 * TERMINAL, spec.size, spec.utilization, n * h / 2)
    row = die.height / n
    x_margin = TERMINAL

    mzis: list[Component] = []
    by_col: list[list[str]] = []
    by_pair: dict[int, list[str]] = {}
    # (mode -> list of (component, in_port, out_port)) in column order
    visits: dict[int, list[tuple[str, str, str]]] = {m: [] for m in range(n)}
    for c, lows in enumerate(cols):
        names = []
        cx = x_margin + (c + 0.5) * pitch
        for k in lows:
            name = f"mzi_c{c}_m{k}"
            cy = (k + 1) * row
            mzis.append(_two_by_two(name, "mzi", w, h, cx - w / 2, cy - h / 2))
            names.append(name)
            by_pair.setdefault(k, []).append(name)
            visits[k].append((name, "i0", "o0"))
            visits[k + 1].append((name, "i1", "o1"))
        by_col.append(names)

    comps = list(mzis)
    nets = []
    port_y = {m.name: m for m in mzis}
    for m in range(n):
        seq = visits[m]
        first, last = seq[0], seq[-1]
        fc = port_y[first[0]]
        lc = port_y[last[0]]
        tin = _terminal(f"in{m}", "in", fc.y + fc.port(first[1]).dy, die.width)
        tout = _terminal(f"out{m}", "out", lc.y + lc.port(last[2]).dy, die.width)
        comps += [tin, tout]
        nets.append(Net(f"n_in{m}", (Pin(tin.name, "o"), Pin(first[0], first[1]))))
        for (a, _, a_out), (b, b_in, _) in zip(seq, seq[1:]):
            nets.append(Net(f"n_{a}_{b}_m{m}", (Pin(a, a_out), Pin(b, b_in))))
        nets.append(Net(f"n_out{m}", (Pin(last[0], last[2]), Pin(tout.name, "i"))))

    groups = [ConstraintGroup("alignment", tuple(g), mode="left") for g in by_col if len(g) >= 2]
    groups += [ConstraintGroup("alignment", tuple(by_pair[k]), mode="y-center")
               for k in sorted(by_pair) if len(by_pair[k]) >= 2]
    return Design(
        name=f"clements_{n}x{n}_{spec.size}",
        die=die,
        tech=Tech(bend, CROSSING_SIZE, 0.5),
        components=tuple(comps),
        nets=tuple(nets),
        constraints=tuple(groups),
        signal_flow="x",
    )


def butterfly_permutation(n: int, stage: int) -> np.ndarray:
    """Line map between stage ``stage`` and the next: swap bit 0 with bit ``stage + 1``."""
    lines = np.arange(n)
    b = stage + 1
    lo = lines & 1
    hi = (lines >> b) & 1
    return lines ^ ((lo ^ hi) | ((lo ^ hi) << b))


def gen_butterfly(spec: ButterflySpec | int, size: str = "S") -> Design:
    if isinstance(spec, int):
        spec = ButterflySpec(spec, size)
    n, w, h = spec.n, spec.coupler_width, spec.coupler_height
    stages = spec.stages
    bend, _ = SIZE_CLASSES[spec.size]
    area = stages * (n // 2) * w * h + 2 * n * TERMINAL ** 2
    util = spec.utilization if spec.utilization is not None else SIZE_CLASSES[spec.size][1]
    if util > MAX_UTILIZATION:
        raise NetlistError("", f"area utilization {util:.2f} exceeds {MAX_UTILIZATION}")
    # Stage pitch leaves a bend plus a crossing of clearance on both sides of every
    # coupler, and each stage column gets twice its stacked height. The die is
    # the larger of that and the area-over-utilization rectangle of equal width.
    pitch = spec.stage_pitch or w + 4 * (bend + CROSSING_SIZE)
    width = stages * pitch + 2 * TERMINAL
    die = Die(width, max(area / util / width, 2 * (n // 2) * h * 2))
    row = die.height / n

    comps: list[Component] = []
    groups = []
    # line -> (component, port) feeding / fed at each stage
    for s in range(stages):
        cx = TERMINAL + (s + 0.5) * pitch
        names = []
        for j in range(n // 2):
            cy = (2 * j + 1) * row
            name = f"cpl_s{s}_{j}"
            comps.append(_two_by_two(name, "coupler", w, h, cx - w / 2, cy - h / 2))
            names.append(name)
        if len(names) >= 2:
            groups.append(ConstraintGroup("uniform-spacing", tuple(names), axis="y"))

    def in_port(s, line):
        return f"cpl_s{s}_{line // 2}", f"i{line % 2}"

    def out_port(s, line):
        return f"cpl_s{s}_{line // 2}", f"o{line % 2}"

    nets = []
    terms = []
    for line in range(n):
        cname, pname = in_port(0, line)
        # one terminal per die row: coupler ports sit closer than a terminal is tall
        t = _terminal(f"in{line}", "in", (line + 0.5) * row, die.width)
        terms.append(t)
        nets.append(Net(f"n_in{line}", (Pin(t.name, "o"), Pin(cname, pname))))
    for s in range(stages - 1):
        perm = butterfly_permutation(n, s)
        for line in range(n):
            a = out_port(s, line)
            b = in_port(s + 1, int(perm[line]))
            nets.append(Net(f"n_s{s}_l{line}", (Pin(*a), Pin(*b))))
    out_order = np.arange(n)
    if spec.seed is not None:
        out_order = np.random.default_rng(spec.seed).permutation(n)
    outs = []
    for line in range(n):
        outs.append(_terminal(f"out{line}", "out", (line + 0.5) * row, die.width))
    terms += outs
    for line in range(n):
        cname, pname = out_port(stages - 1, line)
        nets.append(Net(f"n_out{line}", (Pin(cname, pname), Pin(outs[int(out_order[line])].name, "i"))))
    return Design(
        name=f"butterfly_{n}_{spec.size}",
        die=die,
        tech=Tech(bend, CROSSING_SIZE, 0.5),
        components=tuple(comps + terms),
        nets=tuple(nets),
        constraints=tuple(groups),
        signal_flow="x",
    )
