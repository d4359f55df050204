"""Job configuration: JSON parsing, schema validation and defaults."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Union

import jsonschema

from .chaincost import parse_p, p_label
from .errors import SpecError
from .recurrence import ExtendedLevel
from .spaces import DEFAULT_MAX_NODES
from .systems import SYSTEM_KINDS

_NUM = {"type": "number"}
_NONNEG = {"type": "number", "minimum": 0}
_LEVEL = {"type": ["string", "number"]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system"],
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": list(SYSTEM_KINDS)},
                "name": {"type": "string"},
                "params": {"type": "object"},
                "T": {"type": "number", "exclusiveMinimum": 0},
                "m": {"type": "integer", "minimum": 1},
                "integrator_step": {"type": "number", "exclusiveMinimum": 0},
                "time_grid": {"type": "array", "items": _NUM, "minItems": 2},
                "max_layer_skip": {"type": "integer", "minimum": 1},
                "iterates": {"type": "array", "items": {"type": "integer", "minimum": 1},
                             "minItems": 2, "maxItems": 2},
            },
        },
        "space": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["interval", "circle", "torus", "cloud", "matrix"]},
                "n": {"oneOf": [{"type": "integer", "minimum": 1},
                                {"type": "array", "items": {"type": "integer", "minimum": 1}}]},
                "bounds": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "circumference": {"type": "number", "exclusiveMinimum": 0},
                "circumferences": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "points": {"type": "array"},
                "matrix": {"type": "array", "items": {"type": "array", "items": _NONNEG}},
            },
        },
        "p": {"type": ["string", "number"]},
        "levels": {"oneOf": [{"const": "auto"}, {"type": "array", "items": _LEVEL, "minItems": 1}]},
        "nu": _NONNEG,
        "theta_rec": _NONNEG,
        "eta_def": _NONNEG,
        "cap": {"type": "number", "exclusiveMinimum": 0},
        "outputs": {
            "type": "array",
            "items": {"type": "object", "additionalProperties": False, "required": ["path"],
                      "properties": {"path": {"type": "string"},
                                     "format": {"enum": ["csv", "json", "svg", "dot", "rho"]}}},
        },
        "caps": {"type": "object", "additionalProperties": False,
                 "properties": {"max_nodes": {"type": "integer", "minimum": 1},
                                "max_levels": {"type": "integer", "minimum": 1}}},
        "sweep": {"type": "object", "additionalProperties": False, "required": ["parameter", "values"],
                  "properties": {"parameter": {"type": "string"},
                                 "values": {"type": "array", "minItems": 1}}},
    },
}

BUILTIN_SPACES = ("counterexample_A", "example_non_increasing")


@dataclass
class Output:
    path: str
    format: str


@dataclass
class JobConfig:
    system: dict
    space: Optional[dict] = None
    p: float = 1.0
    levels: Union[str, List[ExtendedLevel]] = "auto"
    nu: float = 0.0
    theta_rec: Optional[float] = None
    eta_def: Optional[float] = None
    cap: Optional[float] = None
    outputs: List[Output] = field(default_factory=list)
    max_nodes: int = DEFAULT_MAX_NODES
    max_levels: int = 256
    sweep: Optional[dict] = None

    @property
    def p_token(self) -> str:
        return p_label(self.p)

    def sweep_spec(self) -> dict:
        if self.sweep is None:
            raise SpecError("config has no 'sweep' section")
        return {"system": self.system, "space": self.space, **self.sweep}


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def _format_of(path: str) -> str:
    ext = path.rsplit(".", 1)[-1].lower() if "." in path else ""
    if ext in ("csv", "json", "svg", "dot", "rho"):
        return ext
    raise SpecError(f"cannot infer output format from {path!r}; give 'format'")


def parse_p_token(p) -> float:
    if isinstance(p, str) and p.strip().lower() not in ("inf", "+inf"):
        s = p.strip()
        if not s.isdigit():
            raise SpecError(f"p must be one of '1'..'64' or 'inf', got {p!r}")
    return parse_p(p)


def parse_levels(tokens) -> List[ExtendedLevel]:
    if isinstance(tokens, str):
        tokens = [t for t in tokens.split(",") if t.strip()]
    if not tokens:
        raise SpecError("empty level list")
    return [ExtendedLevel.parse(t) for t in tokens]


def parse_config(text: str) -> JobConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"config is not valid JSON: {exc}") from None
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise SpecError(f"config invalid at {_pointer(e.absolute_path)}: {e.message}")
    sys_spec = doc["system"]
    if sys_spec["kind"] not in BUILTIN_SPACES and "space" not in doc:
        raise SpecError("config invalid at /space: required for this system kind")
    if sys_spec["kind"] in ("map", "flow", "nonautonomous") and "name" not in sys_spec:
        raise SpecError("config invalid at /system/name: required for this system kind")
    try:
        p = parse_p_token(doc.get("p", "1"))
    except SpecError as exc:
        raise SpecError(f"config invalid at /p: {exc}") from None
    levels = doc.get("levels", "auto")
    if levels != "auto":
        try:
            levels = parse_levels(levels)
        except SpecError as exc:
            raise SpecError(f"config invalid at /levels: {exc}") from None
    outputs = []
    for k, o in enumerate(doc.get("outputs", [])):
        try:
            outputs.append(Output(o["path"], o.get("format") or _format_of(o["path"])))
        except SpecError as exc:
            raise SpecError(f"config invalid at /outputs/{k}: {exc}") from None
    paths = [o.path for o in outputs]
    if len(set(paths)) != len(paths):
        raise SpecError("config invalid at /outputs: output paths must be distinct")
    caps = doc.get("caps", {})
    return JobConfig(
        system=sys_spec, space=doc.get("space"), p=p, levels=levels, nu=float(doc.get("nu", 0.0)),
        theta_rec=doc.get("theta_rec"), eta_def=doc.get("eta_def"), cap=doc.get("cap"),
        outputs=outputs, max_nodes=caps.get("max_nodes", DEFAULT_MAX_NODES),
        max_levels=caps.get("max_levels", 256), sweep=doc.get("sweep"))
