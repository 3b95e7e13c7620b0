import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from picplace.netlist import Component, Design, Die, Net, Pin, Port, Tech  # noqa: E402

MINIMAL_YAML = """\
design:
  name: tiny
  die: {width: 100, height: 50}
  tech: {bend_radius: 5, crossing_size: 10}
components:
  - name: a
    width: 10
    height: 10
    ports: [{name: o, dx: 10, dy: 5, dir: E}]
  - name: b
    width: 10
    height: 10
    ports: [{name: i, dx: 0, dy: 5, dir: W}]
nets:
  - name: n0
    pins: [{comp: a, port: o}, {comp: b, port: i}]
"""


def box(name, w=10.0, h=10.0, x=None, y=None, fixed=False, halo=0.0, ports=()):
    return Component(name, "box", w, h, tuple(ports), fixed=fixed, x=x, y=y, halo=halo)


def design_of(components, nets=(), width=100.0, height=100.0, constraints=(), tech=None):
    return Design("t", Die(width, height), tech or Tech(5.0, 10.0), tuple(components), tuple(nets),
                  tuple(constraints))


def two_port_chain(n=3, width=200.0, height=100.0):
    """``n`` 10x10 blocks with a west input and an east output, chained by nets."""
    comps = [box(f"c{k}", ports=(Port("i", 0, 5, "W"), Port("o", 10, 5, "E"))) for k in range(n)]
    nets = [Net(f"n{k}", (Pin(f"c{k}", "o"), Pin(f"c{k + 1}", "i"))) for k in range(n - 1)]
    return design_of(comps, nets, width, height)


@pytest.fixture
def minimal_yaml():
    return MINIMAL_YAML


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
