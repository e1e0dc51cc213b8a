"""Run configuration: JSON file format, defaults and validation."""

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import jsonschema

from . import catalog
from .errors import ConfigError
from .homoclinic import EPS_CAP

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_MATRIX_LIST = {"type": "array", "items": {"type": "array", "items": {"type": "array", "items": _NUM}}}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["system"],
    "properties": {
        "system": {
            "oneOf": [
                {"type": "string"},
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["catalog"],
                    "properties": {"catalog": {"type": "string"}, "params": {"type": "object"}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["a_plus", "a_minus"],
                    "properties": {
                        "name": {"type": "string"},
                        "a_plus": _MATRIX_LIST,
                        "a_minus": _MATRIX_LIST,
                        "nonlinearity": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["kind"],
                            "properties": {"kind": {"enum": ["cubic", "radial"]}, "c": _NUM, "rho": _POS},
                        },
                    },
                },
            ]
        },
        "K": {"type": "integer", "minimum": 4},
        "truncation": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["tol"],
                    "properties": {"tol": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["n_minus", "n_plus"],
                    "properties": {
                        "n_minus": {"type": "integer", "minimum": 1},
                        "n_plus": {"type": "integer", "minimum": 1},
                    },
                },
            ]
        },
        "lambda0": _NUM,
        "eps": {"type": "array", "minItems": 1, "items": {"type": "number", "exclusiveMinimum": 0, "maximum": EPS_CAP}},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"margin": _POS, "crossing": _POS, "newton": _POS},
        },
        "output": {"type": "object", "additionalProperties": False, "properties": {"dir": {"type": "string"}}},
    },
}


@dataclass
class Tolerances:
    margin: float = 1e-6
    crossing: float = 1e-8
    newton: float = 1e-10


@dataclass
class RunConfig:
    system: Union[str, dict]
    K: int = 64
    truncation: dict = field(default_factory=lambda: {"tol": 1e-10})
    lambda0: float = 0.0
    eps: list = field(default_factory=lambda: [1e-3])
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, data):
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"schema violation at {path}: {exc.message}") from None
        return cls(
            system=data["system"],
            K=data.get("K", 64),
            truncation=dict(data.get("truncation", {"tol": 1e-10})),
            lambda0=float(data.get("lambda0", 0.0)),
            eps=[float(e) for e in data.get("eps", [1e-3])],
            tolerances=Tolerances(**data.get("tolerances", {})),
            output_dir=data.get("output", {}).get("dir"),
        )

    def to_dict(self):
        d = {
            "system": self.system,
            "K": self.K,
            "truncation": dict(self.truncation),
            "lambda0": self.lambda0,
            "eps": list(self.eps),
            "tolerances": asdict(self.tolerances),
        }
        if self.output_dir is not None:
            d["output"] = {"dir": self.output_dir}
        return d

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def family(self):
        sys = self.system
        if isinstance(sys, str):
            fam = catalog.get(sys)
        elif "catalog" in sys:
            fam = catalog.get(sys["catalog"], sys.get("params"))
        else:
            fam = catalog.tabulated(sys.get("name", "tabulated"), sys["a_plus"], sys["a_minus"], sys.get("nonlinearity"))
        if fam.margin_tol != self.tolerances.margin:
            fam = replace(fam, margin_tol=self.tolerances.margin)
        return fam

    @property
    def samples(self):
        fam_grid = None
        if isinstance(self.system, dict) and "a_plus" in self.system:
            fam_grid = len(self.system["a_plus"]) - 1
        return fam_grid or self.K


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return RunConfig.from_dict(data)
