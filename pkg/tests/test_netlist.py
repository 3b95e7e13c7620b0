import numpy as np
import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from picplace.benchgen import gen_clements
from picplace.netlist import NetlistError, dump_design, load_design, parse_design, write_placement

from conftest import MINIMAL_YAML, box, design_of, two_port_chain


def test_minimal_document_parses():
    d = parse_design(MINIMAL_YAML)
    assert len(d.nets) == 1
    assert [c.name for c in d.components] == ["a", "b"]
    assert d.component("a").port("o").vector == (1, 0)


def test_missing_port_names_the_net():
    bad = MINIMAL_YAML.replace("port: i}", "port: o3}")
    with pytest.raises(NetlistError) as exc:
        parse_design(bad)
    assert "n0" in str(exc.value)
    assert "o3" in str(exc.value)
    assert exc.value.path == "nets[0].pins[1].port"


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d["components"][0].update(width=-1), "components[0]"),
    (lambda d: d["components"][0]["ports"][0].update(dir="Q"), "dir"),
    (lambda d: d["components"][0]["ports"][0].update(dx=5), "boundary"),
    (lambda d: d["components"][0]["ports"][0].update(dir="W"), "outward"),
    (lambda d: d["nets"][0]["pins"].pop(), "exactly 2 pins"),
    (lambda d: d["components"][1].update(name="a"), "duplicate"),
    (lambda d: d["design"].pop("die"), "design.die"),
])
def test_schema_errors_carry_a_path(mutate, fragment):
    doc = yaml.safe_load(MINIMAL_YAML)
    mutate(doc)
    with pytest.raises(NetlistError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        parse_design(yaml.safe_dump(doc))


def test_invalid_yaml_is_a_netlist_error():
    with pytest.raises(NetlistError):
        parse_design("design: [unclosed")


def test_clements_8_has_28_mzis():
    d = parse_design(dump_design(gen_clements(8)))
    assert sum(c.cell == "mzi" for c in d.components) == 28


def test_three_component_round_trip():
    d = two_port_chain(3)
    xy = np.array([[1.0, 2.0], [30.5, 40.25], [77.0, 0.125]])
    back = parse_design(write_placement(d, xy))
    assert np.array_equal(back.positions(), xy)


def test_all_fixed_keeps_original_positions():
    d = design_of([box("a", x=1.0, y=2.0, fixed=True), box("b", x=50.0, y=60.0, fixed=True)])
    back = parse_design(write_placement(d, np.zeros((0, 2))))
    assert np.array_equal(back.positions(), d.positions())


def test_fine_coordinate_survives_round_trip():
    d = two_port_chain(2)
    xy = np.array([[123.456789012, 5.0], [50.0, 5.0]])
    back = parse_design(write_placement(d, xy))
    assert abs(back.positions()[0, 0] - 123.456789012) <= 1e-6


def test_wrong_row_count_rejected():
    with pytest.raises(NetlistError):
        write_placement(two_port_chain(3), np.zeros((2, 2)))


def test_meta_is_written(tmp_path):
    text = write_placement(two_port_chain(2), np.zeros((2, 2)), {"iterations": 5})
    path = tmp_path / "p.yaml"
    path.write_text(text)
    assert yaml.safe_load(text)["placement_meta"]["iterations"] == 5
    assert len(load_design(path).components) == 2


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e4, 1e4, allow_nan=False), st.floats(-1e4, 1e4, allow_nan=False)),
                min_size=3, max_size=3))
def test_round_trip_is_exact(points):
    xy = np.array(points, dtype=float)
    back = parse_design(write_placement(two_port_chain(3), xy))
    assert np.array_equal(back.positions(), xy)
