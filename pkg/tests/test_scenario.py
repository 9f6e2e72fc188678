import copy
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from magbeam.errors import ParseError, SchemaError, UnitError
from magbeam.scenario import (BUNDLED, bundled_path, dumps, load_scenario, loads,
                              scenario_from_dict, scenario_to_dict)


def _doc(name="trivial_n1.json"):
    return json.loads(bundled_path(name).read_text())


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_roundtrip(name):
    sc = load_scenario(bundled_path(name))
    again = loads(dumps(sc))
    assert again == sc
    assert dumps(again) == dumps(sc)


def test_paper_scenario_matches_builtin(paper):
    sc = load_scenario(bundled_path("paper_fig2.json"))
    model = sc.model()
    # the file stores henries, the builtin scales microhenries, so allow rounding
    assert np.allclose(model.B_bar, paper.B_bar, rtol=1e-14, atol=0)
    assert sc.solve.beta0 == 60.0


def test_geometry_scenario_synthesizes_inductances():
    doc = _doc()
    del doc["inductances"]
    doc["geometry"] = {
        "transmitters": [{"center_m": [0, 0, 0], "axis": [0, 0, 1], "radius_m": 0.1}],
        "receiver": {"center_m": [0, 0, 0.1], "axis": [0, 0, 1], "radius_m": 0.1},
    }
    sc = scenario_from_dict(doc)
    m, m_tx = sc.inductances
    assert m[0] == pytest.approx(4.9407846307982733e-08, rel=1e-12)
    assert loads(dumps(sc)) == sc


def test_both_inductance_sources_rejected():
    doc = _doc()
    doc["geometry"] = {
        "transmitters": [{"center_m": [0, 0, 0], "axis": [0, 0, 1], "radius_m": 0.1}],
        "receiver": {"center_m": [0, 0, 0.1], "axis": [0, 0, 1], "radius_m": 0.1},
    }
    with pytest.raises(SchemaError):
        scenario_from_dict(doc)


def test_negative_load_names_path():
    doc = _doc()
    doc["receiver"]["load_resistance_ohm"] = -5.0
    with pytest.raises(SchemaError) as info:
        scenario_from_dict(doc)
    assert info.value.path == "receiver.load_resistance_ohm"


def test_unknown_field_rejected():
    doc = _doc()
    doc["receiver"]["colour"] = "red"
    with pytest.raises(SchemaError):
        scenario_from_dict(doc)


def test_dimension_mismatch():
    doc = _doc()
    doc["inductances"]["m_h"] = [1.0, 2.0]
    with pytest.raises(SchemaError) as info:
        scenario_from_dict(doc)
    assert info.value.path == "inductances.m_h"


def test_reversed_sweep():
    doc = _doc()
    doc["solve"]["sweep"] = {"start_w": 2.0, "stop_w": 1.0, "points": 3}
    with pytest.raises(SchemaError):
        scenario_from_dict(doc)


def test_wrong_unit_suffix():
    doc = _doc()
    doc["receiver"]["load_resistance_kohm"] = doc["receiver"].pop("load_resistance_ohm")
    with pytest.raises(UnitError):
        scenario_from_dict(doc)


def test_string_with_unit():
    doc = _doc()
    doc["frequency_rad_per_s"] = "1 MHz"
    with pytest.raises(UnitError):
        scenario_from_dict(doc)


def test_parse_error_location():
    text = '{\n  "name": "x",\n  "schema_version": 1,,\n}'
    with pytest.raises(ParseError) as info:
        loads(text)
    assert info.value.line == 3
    assert info.value.column == 23


def test_invalid_physics_surfaces_as_schema_error():
    doc = _doc()
    doc["inductances"]["m_tx_h"] = [[1e-6]]  # nonzero diagonal
    with pytest.raises(SchemaError):
        scenario_from_dict(doc)


finite = st.floats(0.01, 100.0)


@given(st.lists(st.tuples(finite, finite, st.floats(-5, 5)), min_size=1, max_size=4), finite,
       st.floats(0.0, 10.0))
def test_roundtrip_property(tx, r_load, r_par):
    n = len(tx)
    doc = copy.deepcopy(_doc())
    doc["transmitters"] = [{"resistance_ohm": r, "max_current_a": a} for r, a, _ in tx]
    doc["receiver"] = {"parasitic_resistance_ohm": r_par, "load_resistance_ohm": r_load}
    m = [x[2] * 1e-6 for x in tx]
    doc["inductances"] = {"m_h": m, "m_tx_h": [[0.0] * n for _ in range(n)]}
    sc = scenario_from_dict(doc)
    assert loads(dumps(sc)) == sc
    assert scenario_to_dict(loads(dumps(sc))) == scenario_to_dict(sc)
