"""Scenario files: JSON validated against a versioned schema, merged over defaults.

The defaults are the reference scenario: rectangular barrier V0 = 2, d = 1
at a = 0, Gaussian packet k0 = 1, sigma_k = 0.05 starting at x0 = -30.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ScatteringError
from .potential import PotentialSpec, make_rectangular

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": 1,
    "name": "reference",
    "deterministic": True,
    "barrier": {"rectangular": {"V0": 2.0, "d": 1.0, "a": 0.0}},
    "energies": {"min": 0.1, "max": 6.0, "count": 200},
    "decompose": {"energies": [1.0], "grid": {"x_min": -5.0, "x_max": 6.0, "points": 221}},
    "spectrum": {"k0": 1.0, "sigma_k": 0.05, "x0": -30.0, "n_k": 512, "cutoff": 8.0},
    "evolve": {
        "x_domain": [-300.0, 300.0],
        "snapshot_grid": {"x_min": -120.0, "x_max": 120.0, "points": 1201},
        "snapshot_times": [0.0, 15.0, 30.0, 60.0],
        "series_times": [0.0, 5.0, 10.0, 12.5, 15.0, 17.5, 20.0, 25.0, 30.0, 40.0, 60.0],
        "oracle": {"dt": 0.025, "t_end": 40.0, "element": 1.0, "order": 12},
    },
    "timing": {
        "energies": {"values": [0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 1.95,
                                2.05, 2.3, 2.6, 3.0, 3.5, 4.0, 5.0, 6.0, 8.0, 11.0]},
        "omegas": [1e-3, 2e-3, 5e-3, 1e-2],
        "interval": None,
        "hartman": {"V0": 2.0, "E": 1.0, "widths": [6.0, 8.0, 10.0]},
    },
    "bohm": {
        "ensemble": 64,
        "tol_x": None,
        "bracket": None,
        "rtol": 1e-7,
        "margin": 2.0,
        "shape_pair": True,
        "partner": {"outer_height": 1.0, "outer_width": 0.25, "inner_width": 0.5, "match": "packet"},
    },
    "output": {"directory": "out"},
}


class ScenarioError(ScatteringError, ValueError):
    """Scenario failed validation; ``pointer`` locates the offending key."""

    def __init__(self, msg, pointer="/"):
        super().__init__(f"{pointer}: {msg}")
        self.pointer = pointer


def schema():
    text = resources.files(__package__).joinpath("schema/scenario-v1.json").read_text()
    return json.loads(text)


def _pointer(path):
    return "/" + "/".join(str(p) for p in path)


def validate(obj):
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(obj), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        # oneOf failures hide the useful message one level down
        best = jsonschema.exceptions.best_match([err]) if err.context else err
        raise ScenarioError(best.message, _pointer(best.absolute_path))


def _merge(base, over):
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("barrier", "energies"):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _energy_list(block):
    if "values" in block:
        return np.asarray(block["values"], dtype=float)
    return np.linspace(block["min"], block["max"], block["count"])


@dataclass
class Scenario:
    data: dict
    base_dir: Path
    spec: PotentialSpec

    @property
    def name(self):
        return self.data["name"]

    @property
    def energies(self):
        return _energy_list(self.data["energies"])

    @property
    def timing_energies(self):
        return _energy_list(self.data["timing"]["energies"])

    def section(self, key):
        return self.data[key]

    def canonical_json(self):
        """Resolved scenario (barrier inlined), stable key order."""
        data = copy.deepcopy(self.data)
        data["barrier"] = self.spec.to_dict()
        data.pop("output", None)
        return json.dumps(data, sort_keys=True, separators=(",", ":"))

    def digest(self):
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def output_dir(self, override=None):
        if override is not None:
            return Path(override)
        out = Path(self.data["output"]["directory"])
        return out if out.is_absolute() else self.base_dir / out


def _barrier(block, base_dir):
    if "rectangular" in block:
        r = block["rectangular"]
        return make_rectangular(r["V0"], r["d"], r.get("a", 0.0))
    if "file" in block:
        path = Path(block["file"])
        path = path if path.is_absolute() else base_dir / path
        text = path.read_text()
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"barrier file is not JSON: {exc}", "/barrier/file") from exc
        validate({"schema_version": 1, "barrier": obj})
        return _barrier(obj, path.parent)
    return PotentialSpec(block.get("a", 0.0), tuple(tuple(s) for s in block["segments"]))


def from_dict(obj, base_dir=".") -> Scenario:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario must be a JSON object")
    validate(obj)
    data = _merge(DEFAULTS, obj)
    base_dir = Path(base_dir)
    return Scenario(data, base_dir, _barrier(data["barrier"], base_dir))


def load(path=None) -> Scenario:
    """Read and validate a scenario file; ``None`` gives the reference scenario.

    Raises OSError when the file cannot be read and ScenarioError when it is
    malformed.
    """
    if path is None:
        return from_dict({"schema_version": SCHEMA_VERSION}, Path.cwd())
    path = Path(path)
    text = path.read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON: {exc}") from exc
    return from_dict(obj, path.parent)


def reference() -> Scenario:
    return load(None)
