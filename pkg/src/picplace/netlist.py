"""Design data model and the YAML netlist / placement formats.

All lengths are micrometres. Component positions are lower-left corners and
port offsets are measured from that corner.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

__all__ = [
    "DIRECTIONS",
    "NetlistError",
    "Die",
    "Tech",
    "Port",
    "Component",
    "Pin",
    "Net",
    "ConstraintGroup",
    "Design",
    "parse_design",
    "load_design",
    "design_to_dict",
    "dump_design",
    "write_placement",
]

DIRECTIONS: dict[str, tuple[int, int]] = {
    "E": (1, 0),
    "N": (0, 1),
    "W": (-1, 0),
    "S": (0, -1),
}

ALIGN_MODES = ("left", "x-center", "y-center")
AXES = ("x", "y")


class NetlistError(ValueError):
    """Raised for any schema or consistency violation; ``path`` locates the node."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class Die:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise NetlistError("design.die", "width and height must be positive")

    @property
    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Tech:
    bend_radius: float
    crossing_size: float
    waveguide_width: float = 0.5

    def __post_init__(self):
        for name in ("bend_radius", "crossing_size", "waveguide_width"):
            if not getattr(self, name) > 0:
                raise NetlistError(f"design.tech.{name}", "must be positive")


@dataclass(frozen=True)
class Port:
    name: str
    dx: float
    dy: float
    dir: str

    @property
    def vector(self) -> tuple[int, int]:
        return DIRECTIONS[self.dir]


@dataclass(frozen=True)
class Component:
    name: str
    cell: str
    width: float
    height: float
    ports: tuple[Port, ...] = ()
    fixed: bool = False
    x: float | None = None
    y: float | None = None
    halo: float = 0.0

    @property
    def area(self) -> float:
        return self.width * self.height

    def port(self, name: str) -> Port:
        for p in self.ports:
            if p.name == name:
                return p
        raise KeyError(name)

    def port_world(self, name: str, x: float | None = None, y: float | None = None) -> tuple[float, float]:
        p = self.port(name)
        x0 = self.x if x is None else x
        y0 = self.y if y is None else y
        return (x0 + p.dx, y0 + p.dy)


@dataclass(frozen=True)
class Pin:
    comp: str
    port: str


@dataclass(frozen=True)
class Net:
    name: str
    pins: tuple[Pin, Pin]
    weight: float = 1.0


@dataclass(frozen=True)
class ConstraintGroup:
    """``kind`` is ``alignment`` (with ``mode``) or ``uniform-spacing`` (with ``axis``)."""

    kind: str
    members: tuple[str, ...]
    mode: str | None = None
    axis: str | None = None

    @property
    def coord_axis(self) -> str:
        """The coordinate the group acts on."""
        if self.kind == "alignment":
            return "y" if self.mode == "y-center" else "x"
        return self.axis


@dataclass(frozen=True)
class Design:
    name: str
    die: Die
    tech: Tech
    components: tuple[Component, ...]
    nets: tuple[Net, ...] = ()
    constraints: tuple[ConstraintGroup, ...] = ()
    signal_flow: str = "x"
    _index: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        validate(self)
        object.__setattr__(self, "_index", {c.name: i for i, c in enumerate(self.components)})

    def index(self, name: str) -> int:
        return self._index[name]

    def component(self, name: str) -> Component:
        return self.components[self._index[name]]

    @property
    def movable_indices(self) -> np.ndarray:
        return np.array([i for i, c in enumerate(self.components) if not c.fixed], dtype=int)

    @property
    def movable(self) -> list[Component]:
        return [c for c in self.components if not c.fixed]

    def positions(self) -> np.ndarray:
        """(n, 2) lower-left positions; NaN where a movable has none."""
        out = np.full((len(self.components), 2), np.nan)
        for i, c in enumerate(self.components):
            if c.x is not None and c.y is not None:
                out[i] = (c.x, c.y)
        return out

    def with_positions(self, xy: np.ndarray) -> "Design":
        """Copy with every component's x/y replaced by the rows of ``xy``."""
        xy = np.asarray(xy, dtype=float)
        if xy.shape != (len(self.components), 2):
            raise NetlistError("", f"expected positions of shape {(len(self.components), 2)}, got {xy.shape}")
        comps = tuple(replace(c, x=float(p[0]), y=float(p[1])) for c, p in zip(self.components, xy))
        return replace(self, components=comps, _index=None)


def validate(d: Design) -> None:
    seen: dict[str, int] = {}
    for i, c in enumerate(d.components):
        path = f"components[{i}]"
        if c.name in seen:
            raise NetlistError(f"{path}.name", f"duplicate component name {c.name!r}")
        seen[c.name] = i
        if not (c.width > 0 and c.height > 0):
            raise NetlistError(path, "width and height must be positive")
        if c.halo < 0:
            raise NetlistError(f"{path}.halo", "halo must be non-negative")
        if c.fixed and (c.x is None or c.y is None):
            raise NetlistError(path, f"fixed component {c.name!r} needs x and y")
        pnames = set()
        for j, p in enumerate(c.ports):
            ppath = f"{path}.ports[{j}]"
            if p.name in pnames:
                raise NetlistError(f"{ppath}.name", f"duplicate port name {p.name!r}")
            pnames.add(p.name)
            if p.dir not in DIRECTIONS:
                raise NetlistError(f"{ppath}.dir", f"direction must be one of E/N/W/S, got {p.dir!r}")
            _check_port_boundary(c, p, ppath)

    net_names = set()
    used_ports: dict[tuple[str, str], str] = {}
    for i, n in enumerate(d.nets):
        path = f"nets[{i}]"
        if n.name in net_names:
            raise NetlistError(f"{path}.name", f"duplicate net name {n.name!r}")
        net_names.add(n.name)
        if len(n.pins) != 2:
            raise NetlistError(f"{path}.pins", f"net {n.name!r} must have exactly 2 pins, has {len(n.pins)}")
        if not n.weight >= 0:
            raise NetlistError(f"{path}.weight", "weight must be non-negative")
        for j, pin in enumerate(n.pins):
            if pin.comp not in seen:
                raise NetlistError(f"{path}.pins[{j}].comp", f"net {n.name!r} references unknown component {pin.comp!r}")
            comp = d.components[seen[pin.comp]]
            if pin.port not in {p.name for p in comp.ports}:
                raise NetlistError(
                    f"{path}.pins[{j}].port", f"net {n.name!r} references missing port {pin.comp}.{pin.port}"
                )
            key = (pin.comp, pin.port)
            if key in used_ports:
                raise NetlistError(f"{path}.pins[{j}]", f"port {pin.comp}.{pin.port} already used by net {used_ports[key]!r}")
            used_ports[key] = n.name
        if n.pins[0].comp == n.pins[1].comp:
            raise NetlistError(f"{path}.pins", f"net {n.name!r} connects a component to itself")

    aligned: dict[tuple[str, str], int] = {}
    for i, g in enumerate(d.constraints):
        path = f"constraints[{i}]"
        if g.kind == "alignment":
            if g.mode not in ALIGN_MODES:
                raise NetlistError(f"{path}.mode", f"alignment mode must be one of {ALIGN_MODES}")
        elif g.kind == "uniform-spacing":
            if g.axis not in AXES:
                raise NetlistError(f"{path}.axis", "axis must be x or y")
        else:
            raise NetlistError(f"{path}.type", f"unknown constraint type {g.kind!r}")
        if len(g.members) < 2:
            raise NetlistError(f"{path}.members", "a constraint group needs at least 2 members")
        if len(set(g.members)) != len(g.members):
            raise NetlistError(f"{path}.members", "duplicate member")
        for j, m in enumerate(g.members):
            if m not in seen:
                raise NetlistError(f"{path}.members[{j}]", f"unknown component {m!r}")
            if d.components[seen[m]].fixed:
                raise NetlistError(f"{path}.members[{j}]", f"component {m!r} is fixed")
            if g.kind == "alignment":
                key = (m, g.coord_axis)
                if key in aligned:
                    raise NetlistError(
                        f"{path}.members[{j}]",
                        f"{m!r} already aligned on {g.coord_axis} by constraints[{aligned[key]}]",
                    )
                aligned[key] = i

    if d.signal_flow not in AXES:
        raise NetlistError("design.signal_flow", "must be x or y")


def _check_port_boundary(c: Component, p: Port, path: str, tol: float = 1e-9) -> None:
    on_w = abs(p.dx) <= tol
    on_e = abs(p.dx - c.width) <= tol
    on_s = abs(p.dy) <= tol
    on_n = abs(p.dy - c.height) <= tol
    inside = -tol <= p.dx <= c.width + tol and -tol <= p.dy <= c.height + tol
    if not inside or not (on_w or on_e or on_s or on_n):
        raise NetlistError(path, f"port {c.name}.{p.name} at ({p.dx}, {p.dy}) is not on the component boundary")
    outward = {"W": on_w, "E": on_e, "S": on_s, "N": on_n}[p.dir]
    if not outward:
        raise NetlistError(f"{path}.dir", f"port {c.name}.{p.name} direction {p.dir} does not point outward")


# --------------------------------------------------------------------------- parsing


def _req(node: Mapping, key: str, path: str) -> Any:
    if not isinstance(node, Mapping):
        raise NetlistError(path, "expected a mapping")
    if key not in node:
        raise NetlistError(f"{path}.{key}" if path else key, "missing required field")
    return node[key]


def _num(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NetlistError(path, f"expected a number, got {value!r}")
    return float(value)


def _list(value: Any, path: str) -> list:
    if value is None:
        return []
    if not isinstance(value, list):
        raise NetlistError(path, "expected a list")
    return value


def design_from_dict(doc: Mapping) -> Design:
    if not isinstance(doc, Mapping):
        raise NetlistError("", "document root must be a mapping")
    head = _req(doc, "design", "")
    die_n = _req(head, "die", "design")
    tech_n = _req(head, "tech", "design")
    die = Die(_num(_req(die_n, "width", "design.die"), "design.die.width"),
              _num(_req(die_n, "height", "design.die"), "design.die.height"))
    tech = Tech(
        _num(_req(tech_n, "bend_radius", "design.tech"), "design.tech.bend_radius"),
        _num(_req(tech_n, "crossing_size", "design.tech"), "design.tech.crossing_size"),
        _num(tech_n.get("waveguide_width", 0.5), "design.tech.waveguide_width"),
    )

    comps = []
    for i, cn in enumerate(_list(doc.get("components"), "components")):
        path = f"components[{i}]"
        ports = []
        for j, pn in enumerate(_list(cn.get("ports") if isinstance(cn, Mapping) else None, f"{path}.ports")):
            pp = f"{path}.ports[{j}]"
            ports.append(Port(
                str(_req(pn, "name", pp)),
                _num(_req(pn, "dx", pp), f"{pp}.dx"),
                _num(_req(pn, "dy", pp), f"{pp}.dy"),
                str(_req(pn, "dir", pp)),
            ))
        x = cn.get("x")
        y = cn.get("y")
        comps.append(Component(
            name=str(_req(cn, "name", path)),
            cell=str(cn.get("cell", "")),
            width=_num(_req(cn, "width", path), f"{path}.width"),
            height=_num(_req(cn, "height", path), f"{path}.height"),
            ports=tuple(ports),
            fixed=bool(cn.get("fixed", False)),
            x=None if x is None else _num(x, f"{path}.x"),
            y=None if y is None else _num(y, f"{path}.y"),
            halo=_num(cn.get("halo", 0.0), f"{path}.halo"),
        ))

    nets = []
    for i, nn in enumerate(_list(doc.get("nets"), "nets")):
        path = f"nets[{i}]"
        name = str(_req(nn, "name", path))
        pins_n = _list(_req(nn, "pins", path), f"{path}.pins")
        if len(pins_n) != 2:
            raise NetlistError(f"{path}.pins", f"net {name!r} must have exactly 2 pins, has {len(pins_n)}")
        pins = tuple(
            Pin(str(_req(p, "comp", f"{path}.pins[{j}]")), str(_req(p, "port", f"{path}.pins[{j}]")))
            for j, p in enumerate(pins_n)
        )
        nets.append(Net(name, pins, _num(nn.get("weight", 1.0), f"{path}.weight")))

    groups = []
    for i, gn in enumerate(_list(doc.get("constraints"), "constraints")):
        path = f"constraints[{i}]"
        kind = str(_req(gn, "type", path))
        members = tuple(str(m) for m in _list(_req(gn, "members", path), f"{path}.members"))
        if kind == "alignment":
            groups.append(ConstraintGroup(kind, members, mode=str(_req(gn, "mode", path))))
        elif kind == "uniform-spacing":
            groups.append(ConstraintGroup(kind, members, axis=str(_req(gn, "axis", path))))
        else:
            raise NetlistError(f"{path}.type", f"unknown constraint type {kind!r}")

    return Design(
        name=str(head.get("name", "design")),
        die=die,
        tech=tech,
        components=tuple(comps),
        nets=tuple(nets),
        constraints=tuple(groups),
        signal_flow=str(head.get("signal_flow", "x")),
    )


def parse_design(text: str) -> Design:
    """Parse and validate a YAML netlist document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise NetlistError("", f"invalid YAML: {exc}") from exc
    return design_from_dict(doc)


def load_design(path) -> Design:
    with open(path) as fh:
        return parse_design(fh.read())


# --------------------------------------------------------------------------- writing


def _f(v: float) -> float:
    # repr of a Python float round-trips exactly through YAML
    return float(v)


def design_to_dict(d: Design) -> dict:
    comps = []
    for c in d.components:
        node: dict[str, Any] = {"name": c.name, "cell": c.cell, "width": _f(c.width), "height": _f(c.height),
                                "fixed": c.fixed}
        if c.x is not None and c.y is not None:
            node["x"] = _f(c.x)
            node["y"] = _f(c.y)
        if c.halo:
            node["halo"] = _f(c.halo)
        node["ports"] = [{"name": p.name, "dx": _f(p.dx), "dy": _f(p.dy), "dir": p.dir} for p in c.ports]
        comps.append(node)
    nets = []
    for n in d.nets:
        node = {"name": n.name}
        if n.weight != 1.0:
            node["weight"] = _f(n.weight)
        node["pins"] = [{"comp": p.comp, "port": p.port} for p in n.pins]
        nets.append(node)
    groups = []
    for g in d.constraints:
        if g.kind == "alignment":
            groups.append({"type": "alignment", "mode": g.mode, "members": list(g.members)})
        else:
            groups.append({"type": "uniform-spacing", "axis": g.axis, "members": list(g.members)})
    return {
        "design": {
            "name": d.name,
            "die": {"width": _f(d.die.width), "height": _f(d.die.height)},
            "tech": {"bend_radius": _f(d.tech.bend_radius), "crossing_size": _f(d.tech.crossing_size),
                     "waveguide_width": _f(d.tech.waveguide_width)},
            "signal_flow": d.signal_flow,
        },
        "components": comps,
        "nets": nets,
        "constraints": groups,
    }


def dump_design(d: Design, meta: Mapping | None = None) -> str:
    doc = design_to_dict(d)
    if meta is not None:
        doc["placement_meta"] = dict(meta)
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=120)


def write_placement(design: Design, movable_xy: Sequence | np.ndarray, meta: Mapping | None = None) -> str:
    """Serialize ``design`` with the movable components moved to ``movable_xy``.

    ``movable_xy`` is an (n_movable, 2) array of lower-left corners in the order
    of ``design.movable``. Fixed components keep their positions.
    """
    mov = design.movable_indices
    xy = np.asarray(movable_xy, dtype=float).reshape(-1, 2) if len(mov) else np.zeros((0, 2))
    if xy.shape != (len(mov), 2):
        raise NetlistError("", f"placement has {xy.shape[0]} rows for {len(mov)} movable components")
    full = design.positions()
    full[mov] = xy
    return dump_design(design.with_positions(full), meta)
