"""Scenario files: JSON documents describing one experiment.

Field names carry SI units (``frequency_rad_per_s``, ``m_h``, ``load_resistance_ohm``)
so a value can never be read in the wrong unit.  The schema lives in
``data/scenario.schema.json``.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from .errors import InvalidGeometry, InvalidParams, ParseError, SchemaError, UnitError
from .geometry import DEFAULT_SEGMENTS, Loop, inductance_matrices
from .model import RxCoil, SystemParams, TxCoil, build_system

SCHEMA_VERSION = 1
MODES = ("closedform", "sdp", "equal_current", "oracle")

_UNIT_SUFFIX = re.compile(
    r"_(h|mh|uh|nh|hz|khz|mhz|rad_per_s|rad_s|ohm|ohms|kohm|mohm|v|mv|kv|a|ma|w|mw|kw|"
    r"m|cm|mm|f|uf|nf|pf)$")


def _schema() -> dict:
    text = resources.files("magbeam").joinpath("data/scenario.schema.json").read_text()
    return json.loads(text)


SCHEMA = _schema()


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    points: int

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SolveSpec:
    mode: str = "sdp"
    beta0: Optional[float] = None
    sweep: Optional[Sweep] = None
    modes: Optional[tuple] = None
    tol: float = 1e-7
    seed: int = 0
    oracle_restarts: int = 50

    def sweep_modes(self) -> tuple:
        if self.modes:
            return tuple(self.modes)
        return MODES if self.mode == "all" else (self.mode,)


@dataclass(frozen=True)
class GeometrySpec:
    transmitters: tuple
    receiver: Loop
    segments: int = DEFAULT_SEGMENTS


@dataclass(frozen=True)
class Scenario:
    name: str
    omega: float
    transmitters: tuple
    receiver: RxCoil
    m: Optional[tuple] = None
    m_tx: Optional[tuple] = None
    geometry: Optional[GeometrySpec] = None
    solve: SolveSpec = field(default_factory=SolveSpec)
    description: Optional[str] = None
    schema_version: int = SCHEMA_VERSION

    @property
    def n(self) -> int:
        return len(self.transmitters)

    @cached_property
    def inductances(self):
        """``(m, m_tx)`` in henries, synthesized from geometry when needed."""
        if self.geometry is None:
            return np.array(self.m, dtype=float), np.array(self.m_tx, dtype=float)
        m, m_tx, _, _ = inductance_matrices(self.geometry.transmitters, self.geometry.receiver,
                                            self.geometry.segments)
        return m, m_tx

    def params(self) -> SystemParams:
        m, m_tx = self.inductances
        return SystemParams(self.omega, self.transmitters, self.receiver, m, m_tx)

    def model(self):
        return build_system(self.params())

    def with_solve(self, **changes) -> "Scenario":
        from dataclasses import replace
        return replace(self, solve=replace(self.solve, **changes))


# ----------------------------------------------------------------- checks

def _allowed_keys(node: dict) -> dict:
    if "$ref" in node:
        node = SCHEMA["$defs"][node["$ref"].split("/")[-1]]
    return node


def _check_units(obj, node, path):
    """Catch quantities given in a unit other than the one the schema names."""
    node = _allowed_keys(node)
    if isinstance(obj, dict) and "properties" in node:
        props = node["properties"]
        stems = {_UNIT_SUFFIX.sub("", k): k for k in props}
        for key, value in obj.items():
            where = f"{path}.{key}" if path else key
            if key in props:
                sub = _allowed_keys(props[key])
                wants_number = "number" in np.atleast_1d(sub.get("type", [])).tolist()
                if wants_number and isinstance(value, str):
                    raise UnitError(f"{where}: give a plain number; the unit is fixed by the "
                                    f"field name (got {value!r})")
                _check_units(value, props[key], where)
                continue
            stem = _UNIT_SUFFIX.sub("", key)
            if stem != key and stem in stems:
                raise UnitError(f"{where}: unsupported unit, expected field '{stems[stem]}'")
    elif isinstance(obj, list) and "items" in node:
        for k, value in enumerate(obj):
            _check_units(value, node["items"], f"{path}[{k}]")


def _path(err) -> str:
    parts = []
    for p in err.absolute_path:
        if isinstance(p, int):
            parts.append(f"[{p}]")
        else:
            parts.append(("." if parts else "") + str(p))
    return "".join(parts) or "$"


def validate_document(doc) -> None:
    _check_units(doc, SCHEMA, "")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)),
                                                                e.message))
    if errors:
        err = errors[0]
        path = _path(err)
        raise SchemaError(f"{path}: {err.message}", path=path)
    has_l = "inductances" in doc
    has_g = "geometry" in doc
    if has_l == has_g:
        raise SchemaError("$: exactly one of 'inductances' or 'geometry' is required", path="$")
    solve = doc.get("solve", {})
    n = len(doc["transmitters"])
    if has_l:
        ind = doc["inductances"]
        if len(ind["m_h"]) != n:
            raise SchemaError(f"inductances.m_h: expected {n} entries", path="inductances.m_h")
        if len(ind["m_tx_h"]) != n or any(len(row) != n for row in ind["m_tx_h"]):
            raise SchemaError(f"inductances.m_tx_h: expected a {n}x{n} matrix",
                              path="inductances.m_tx_h")
    else:
        if len(doc["geometry"]["transmitters"]) != n:
            raise SchemaError(f"geometry.transmitters: expected {n} loops",
                              path="geometry.transmitters")
    sw = solve.get("sweep")
    if sw and sw["stop_w"] < sw["start_w"]:
        raise SchemaError("solve.sweep: stop_w must not be below start_w", path="solve.sweep")


# ----------------------------------------------------------- conversions

def _loop_from(d) -> Loop:
    return Loop(tuple(d["center_m"]), tuple(d["axis"]), d["radius_m"], d.get("turns", 1),
                d.get("wire_radius_m", 1e-4))


def _loop_to(loop: Loop) -> dict:
    return {"center_m": list(loop.center), "axis": list(loop.axis), "radius_m": loop.radius,
            "turns": loop.turns, "wire_radius_m": loop.wire_radius}


def scenario_from_dict(doc: dict) -> Scenario:
    validate_document(doc)
    tx = tuple(TxCoil(t["resistance_ohm"], t.get("max_voltage_v"), t.get("max_current_a"),
                      t.get("self_inductance_h"), t.get("capacitance_f"))
               for t in doc["transmitters"])
    r = doc["receiver"]
    rx = RxCoil(r["parasitic_resistance_ohm"], r["load_resistance_ohm"],
                r.get("self_inductance_h"), r.get("capacitance_f"))
    m = m_tx = geom = None
    if "inductances" in doc:
        m = tuple(float(x) for x in doc["inductances"]["m_h"])
        m_tx = tuple(tuple(float(x) for x in row) for row in doc["inductances"]["m_tx_h"])
    else:
        g = doc["geometry"]
        try:
            geom = GeometrySpec(tuple(_loop_from(x) for x in g["transmitters"]),
                                _loop_from(g["receiver"]), g.get("segments", DEFAULT_SEGMENTS))
        except InvalidGeometry as exc:
            raise SchemaError(f"geometry: {exc}", path="geometry") from exc
    s = doc.get("solve", {})
    sweep = None
    if "sweep" in s:
        sweep = Sweep(float(s["sweep"]["start_w"]), float(s["sweep"]["stop_w"]),
                      int(s["sweep"]["points"]))
    solve = SolveSpec(
        mode=s.get("mode", "sdp"),
        beta0=s.get("beta0_w"),
        sweep=sweep,
        modes=tuple(s["modes"]) if "modes" in s else None,
        tol=s.get("tol", 1e-7),
        seed=s.get("seed", 0),
        oracle_restarts=s.get("oracle_restarts", 50),
    )
    sc = Scenario(doc["name"], float(doc["frequency_rad_per_s"]), tx, rx, m, m_tx, geom, solve,
                  doc.get("description"), doc["schema_version"])
    try:
        sc.model()
    except InvalidParams as exc:
        raise SchemaError(f"$: {exc}", path="$") from exc
    except InvalidGeometry as exc:
        raise SchemaError(f"geometry: {exc}", path="geometry") from exc
    return sc


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def scenario_to_dict(sc: Scenario) -> dict:
    doc = {"schema_version": sc.schema_version, "name": sc.name}
    if sc.description is not None:
        doc["description"] = sc.description
    doc["frequency_rad_per_s"] = sc.omega
    doc["transmitters"] = [_drop_none({
        "resistance_ohm": t.resistance, "max_voltage_v": t.max_voltage,
        "max_current_a": t.max_current, "self_inductance_h": t.self_inductance,
        "capacitance_f": t.capacitance}) for t in sc.transmitters]
    doc["receiver"] = _drop_none({
        "parasitic_resistance_ohm": sc.receiver.parasitic_resistance,
        "load_resistance_ohm": sc.receiver.load_resistance,
        "self_inductance_h": sc.receiver.self_inductance,
        "capacitance_f": sc.receiver.capacitance})
    if sc.geometry is None:
        doc["inductances"] = {"m_h": list(sc.m), "m_tx_h": [list(row) for row in sc.m_tx]}
    else:
        doc["geometry"] = {"segments": sc.geometry.segments,
                           "transmitters": [_loop_to(x) for x in sc.geometry.transmitters],
                           "receiver": _loop_to(sc.geometry.receiver)}
    s = sc.solve
    solve = {"mode": s.mode}
    if s.beta0 is not None:
        solve["beta0_w"] = s.beta0
    if s.sweep is not None:
        solve["sweep"] = {"start_w": s.sweep.start, "stop_w": s.sweep.stop,
                          "points": s.sweep.points}
    if s.modes is not None:
        solve["modes"] = list(s.modes)
    solve.update(tol=s.tol, seed=s.seed, oracle_restarts=s.oracle_restarts)
    doc["solve"] = solve
    return doc


def dumps(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def loads(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    if not isinstance(doc, dict):
        raise SchemaError("$: top level must be an object", path="$")
    return scenario_from_dict(doc)


def load_scenario(path) -> Scenario:
    path = Path(path)
    text = path.read_text()
    return loads(text)


def save_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(dumps(sc))


def bundled_path(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``"paper_fig2.json"``."""
    return Path(str(resources.files("magbeam").joinpath("data/" + name)))


BUNDLED = ("paper_fig2.json", "trivial_n1.json", "random_n4_seeded.json")
