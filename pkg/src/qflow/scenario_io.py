"""Reading and writing scenario files.

A scenario file is a JSON document::

    scenario := {"version": "qflow-scenario/1",
                 "dims":   [int, ...],
                 "input":  {"factor": int, "state": state},
                 "rest":   state,
                 "boxes":  [box, ...]}
    box      := {"time": int, "pair": [int, int], "omega": state, "lambda": state?}
    state    := {"amp": [complex, ...]} | {"product": [[complex, ...], ...]}
    complex  := [float, float]        (real part, imaginary part)

Factors are numbered from 1 and amplitudes are big-endian (factor 1 varies
slowest). A box without ``lambda`` is the projector onto ``omega``. With a
single factor, ``rest`` is ``{"amp": [[1, 0]]}``.
"""

from __future__ import annotations

import json
import math
from importlib import resources
from pathlib import Path

import numpy as np

from .coecke import Box, Scenario
from .statevec import FactorSpace, MultiState, StateError, tensor

VERSION = "qflow-scenario/1"


class ScenarioError(ValueError):
    """Invalid scenario text. Carries a field path and, for syntax errors, a position."""

    def __init__(self, message: str, path: str = "", line: int | None = None, column: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if path:
            where.append(f"at {path}")
        super().__init__(f"{message} ({'; '.join(where)})" if where else message)
        self.message = message
        self.path = path
        self.line = line
        self.column = column


class ScenarioSyntaxError(ScenarioError):
    pass


class UnknownVersionError(ScenarioError):
    pass


class MissingFieldError(ScenarioError):
    pass


class MalformedNumberError(ScenarioError):
    pass


class ScenarioDimensionError(ScenarioError):
    pass


class DuplicateTimeError(ScenarioError):
    pass


def _field(obj, key: str, path: str):
    if not isinstance(obj, dict):
        raise ScenarioError("expected an object", path)
    if key not in obj:
        raise MissingFieldError(f"missing field {key!r}", path)
    return obj[key]


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedNumberError(f"expected an integer, got {value!r}", path)
    return value


def _complex(value, path: str) -> complex:
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)
        or not all(math.isfinite(x) for x in value)
    ):
        raise MalformedNumberError(f"expected a [re, im] pair of finite numbers, got {value!r}", path)
    return complex(value[0], value[1])


def _amps(values, path: str) -> np.ndarray:
    if not isinstance(values, list) or not values:
        raise ScenarioError("expected a nonempty list of amplitudes", path)
    return np.array([_complex(v, f"{path}[{k}]") for k, v in enumerate(values)], dtype=complex)


def _state(obj, dims: tuple[int, ...], path: str) -> MultiState:
    if isinstance(obj, dict) and "amp" in obj:
        amp = _amps(obj["amp"], f"{path}.amp")
        if amp.size != math.prod(dims):
            raise ScenarioDimensionError(f"{amp.size} amplitudes for dims {list(dims)}", f"{path}.amp")
        return MultiState(amp, dims)
    if isinstance(obj, dict) and "product" in obj:
        parts = obj["product"]
        if not isinstance(parts, list) or len(parts) != len(dims):
            raise ScenarioDimensionError(f"product needs {len(dims)} factors", f"{path}.product")
        states = []
        for k, (part, d) in enumerate(zip(parts, dims)):
            amp = _amps(part, f"{path}.product[{k}]")
            if amp.size != d:
                raise ScenarioDimensionError(f"factor has {amp.size} amplitudes, expected {d}", f"{path}.product[{k}]")
            states.append(MultiState(amp, (d,)))
        return tensor(*states) if states else MultiState.scalar(1.0)
    raise ScenarioError("state must be {'amp': [...]} or {'product': [[...], ...]}", path)


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError(exc.msg, "", exc.lineno, exc.colno) from None
    version = _field(doc, "version", "$")
    if version != VERSION:
        raise UnknownVersionError(f"unrecognized version {version!r}, expected {VERSION!r}", "$.version")
    raw_dims = _field(doc, "dims", "$")
    if not isinstance(raw_dims, list) or not raw_dims:
        raise ScenarioDimensionError("dims must be a nonempty list", "$.dims")
    dims = tuple(_int(d, f"$.dims[{k}]") for k, d in enumerate(raw_dims))
    if any(d < 1 for d in dims):
        raise ScenarioDimensionError("dims must be positive", "$.dims")
    try:
        space = FactorSpace(dims)
    except StateError as exc:
        raise ScenarioDimensionError(str(exc), "$.dims") from None
    n = len(dims)

    inp = _field(doc, "input", "$")
    factor = _int(_field(inp, "factor", "$.input"), "$.input.factor")
    if not 1 <= factor <= n:
        raise ScenarioDimensionError(f"input factor {factor} out of range 1..{n}", "$.input.factor")
    input_state = _state(_field(inp, "state", "$.input"), (dims[factor - 1],), "$.input.state")
    rest_dims = tuple(d for i, d in enumerate(dims, start=1) if i != factor)
    rest_state = _state(_field(doc, "rest", "$"), rest_dims, "$.rest")

    raw_boxes = _field(doc, "boxes", "$")
    if not isinstance(raw_boxes, list):
        raise ScenarioError("boxes must be a list", "$.boxes")
    boxes, seen = [], {}
    for k, rb in enumerate(raw_boxes):
        path = f"$.boxes[{k}]"
        time = _int(_field(rb, "time", path), f"{path}.time")
        if time < 1:
            raise ScenarioError("box time must be >= 1", f"{path}.time")
        if time in seen:
            raise DuplicateTimeError(f"time rank {time} already used by boxes[{seen[time]}]", f"{path}.time")
        seen[time] = k
        pair = _field(rb, "pair", path)
        if not isinstance(pair, list) or len(pair) != 2:
            raise ScenarioDimensionError("pair must be [i, j]", f"{path}.pair")
        i, j = (_int(p, f"{path}.pair[{q}]") for q, p in enumerate(pair))
        if not 1 <= i < j <= n:
            raise ScenarioDimensionError(f"pair must satisfy 1 <= i < j <= {n}", f"{path}.pair")
        bdims = (dims[i - 1], dims[j - 1])
        omega = _state(_field(rb, "omega", path), bdims, f"{path}.omega")
        lam = _state(rb["lambda"], bdims, f"{path}.lambda") if "lambda" in rb else None
        boxes.append(Box(time, (i, j), omega, lam))
    return Scenario(space, tuple(boxes), factor, input_state, rest_state)


def _state_json(state: MultiState) -> dict:
    return {"amp": [[float(z.real), float(z.imag)] for z in state.amp]}


def scenario_to_dict(scn: Scenario) -> dict:
    boxes = []
    for b in scn.boxes:
        rb = {"time": b.time, "pair": list(b.pair), "omega": _state_json(b.omega)}
        if b.lam is not None:
            rb["lambda"] = _state_json(b.lam)
        boxes.append(rb)
    return {
        "version": VERSION,
        "dims": list(scn.space.dims),
        "input": {"factor": scn.input_factor, "state": _state_json(scn.input_state)},
        "rest": _state_json(scn.rest_state),
        "boxes": boxes,
    }


def serialize_scenario(scn: Scenario) -> str:
    return json.dumps(scenario_to_dict(scn), indent=2) + "\n"


def bundled_names() -> list[str]:
    return sorted(p.name for p in resources.files("qflow.scenarios").iterdir() if p.name.endswith(".scn"))


def read_bundled(name: str) -> str:
    return resources.files("qflow.scenarios").joinpath(name).read_text(encoding="utf-8")


def load_scenario(ref: str) -> Scenario:
    """Load from a path, falling back to a bundled scenario of that name."""
    path = Path(ref)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"))
    name = path.name if path.name.endswith(".scn") else f"{path.name}.scn"
    if name in bundled_names():
        return parse_scenario(read_bundled(name))
    raise FileNotFoundError(f"no scenario file {ref!r} and no bundled scenario {name!r}")
