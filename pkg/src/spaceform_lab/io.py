"""Configuration ingestion and grid/mesh/report export.

Config documents are strict JSON validated against a schema (unknown keys
rejected, exclusive seed forms enforced); doubles are serialized with
shortest round-trip formatting so identical runs give byte-identical files.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import jsonschema
import numpy as np

from .errors import BadProjection, IoError, SchemaError
from .grid import ParameterGrid

_NUM = {"type": "number"}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_IVEC3 = {"type": "array", "items": {"type": "integer"}, "minItems": 3, "maxItems": 3}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["seed", "grid"],
    "properties": {
        "seed": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "gallery": {"type": "string"},
                "C": _NUM,
                "triple": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["v", "V", "delta"],
                    "properties": {
                        "v": _VEC3,
                        "V": _VEC3,
                        "delta": _IVEC3,
                    },
                },
            },
            "oneOf": [
                {"required": ["gallery"], "not": {"required": ["triple"]}},
                {"required": ["triple"], "not": {"required": ["gallery"]}},
            ],
        },
        "ambient": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"c": _NUM, "s": {"type": "integer", "enum": [0, 1]}},
        },
        "target": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"c": _NUM, "s": {"type": "integer", "enum": [0, 1]}},
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["lo", "hi", "n"],
            "properties": {
                "lo": _VEC3,
                "hi": _VEC3,
                "n": _IVEC3,
                "base": _IVEC3,
            },
        },
        "ribaucour": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"type": "string"},
                        "K": _NUM,
                        "a": _NUM,
                        "rho": _NUM,
                        "theta": _NUM,
                        "phases": _VEC3,
                    },
                },
                "state": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["gamma", "vprime", "phi", "beta"],
                    "properties": {
                        "gamma": _VEC3,
                        "vprime": _VEC3,
                        "phi": _NUM,
                        "psi": _NUM,
                        "beta": _NUM,
                    },
                },
                "k2_target": _NUM,
            },
            "oneOf": [
                {"required": ["family"], "not": {"required": ["state"]}},
                {"required": ["state"], "not": {"required": ["family"]}},
            ],
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "integrability": _NUM,
                "mask": _NUM,
                "report": _NUM,
            },
        },
        "outputs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "csv": {"type": "string"},
                "obj": {"type": "string"},
                "report": {"type": "string"},
            },
        },
        "rng_seed": {"type": "integer"},
        "max_step": _NUM,
        "theta": _NUM,
    },
}

DEFAULT_TOLERANCES = {"integrability": 1e-8, "mask": None, "report": 1e-6}


@dataclass
class ExperimentConfig:
    seed: dict
    grid: ParameterGrid
    ambient: dict = field(default_factory=lambda: {"c": 0.0, "s": 0})
    target: dict = None
    ribaucour: dict = None
    tolerances: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    rng_seed: int = 0
    max_step: float = 1e-2
    theta: float = math.pi / 4

    def __post_init__(self):
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.tolerances)
        self.tolerances = tol


def _pointer(err: jsonschema.ValidationError) -> str:
    return "/" + "/".join(str(p) for p in err.absolute_path)


def parse_config(doc: dict) -> ExperimentConfig:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        # prefer the deepest context of oneOf failures for a useful pointer
        if err.context:
            err = max(err.context, key=lambda e: len(list(e.absolute_path)))
        raise SchemaError(err.message, _pointer(err))
    numbers = [v for part in ("lo", "hi") for v in doc["grid"][part]]
    if not all(math.isfinite(x) for x in numbers):
        raise SchemaError("grid corners must be finite", "/grid")
    g = doc["grid"]
    grid = ParameterGrid(tuple(g["lo"]), tuple(g["hi"]), tuple(g["n"]),
                         tuple(g["base"]) if "base" in g else None)
    kwargs = {k: doc[k] for k in ("ambient", "target", "ribaucour", "tolerances",
                                  "outputs", "rng_seed", "max_step", "theta")
              if k in doc}
    return ExperimentConfig(seed=doc["seed"], grid=grid, **kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}", "/") from exc
    return parse_config(doc)


def _fmt(x) -> str:
    """Shortest round-trip decimal form of a double."""
    return repr(float(x))


def export_csv(field_values, grid: ParameterGrid, path, masked=None):
    """Write one row per node: u1,u2,u3,x1,...,xm in lexicographic node order.

    Masked nodes are skipped; a fully masked field writes the header only.
    """
    field_values = _as_node_table(field_values, grid)
    m = field_values.shape[-1]
    header = "u1,u2,u3," + ",".join(f"x{i + 1}" for i in range(m))
    pts = grid.points()
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            n1, n2, n3 = grid.n
            for i in range(n1):
                for j in range(n2):
                    for k in range(n3):
                        if masked is not None and masked[i, j, k]:
                            continue
                        row = [_fmt(c) for c in pts[i, j, k]]
                        row += [_fmt(c) for c in field_values[i, j, k]]
                        fh.write(",".join(row) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _as_node_table(values, grid):
    values = np.asarray(values, dtype=float)
    if values.shape[:3] != tuple(grid.n):
        raise IoError(f"field shape {values.shape} does not start with grid {grid.n}")
    if values.ndim == 3:
        values = values[..., None]
    return values.reshape(tuple(grid.n) + (-1,))


def export_obj(positions, grid: ParameterGrid, axis, value, projection, path,
               masked=None):
    """Export one grid slice as a triangulated OBJ mesh.

    ``axis``/``value`` select the slice (nearest node); ``projection`` picks
    three distinct ambient coordinates for x, y, z.  Masked nodes drop every
    incident face.
    """
    if len(set(projection)) != 3:
        raise BadProjection(f"projection coordinates must be distinct, got {projection}")
    positions = np.asarray(positions, dtype=float)
    ax_vals = grid.axis(axis)
    sl = int(np.argmin(np.abs(ax_vals - value)))
    index = [slice(None)] * 3
    index[axis] = sl
    sheet = positions[tuple(index)]
    ok = np.isfinite(sheet).all(axis=-1)
    if masked is not None:
        ok &= ~masked[tuple(index)]
    n1, n2 = sheet.shape[:2]
    vid = np.zeros((n1, n2), dtype=int)
    lines = []
    count = 0
    for i in range(n1):
        for j in range(n2):
            if not ok[i, j]:
                continue
            count += 1
            vid[i, j] = count
            x, y, z = (sheet[i, j, p] for p in projection)
            lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
    for i in range(n1 - 1):
        for j in range(n2 - 1):
            corners = (vid[i, j], vid[i + 1, j], vid[i + 1, j + 1], vid[i, j + 1])
            if all(c > 0 for c in corners):
                a, b, c, d = corners
                lines.append(f"f {a} {b} {c}")
                lines.append(f"f {a} {c} {d}")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + ("\n" if lines else ""))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_report(report_dict, path):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report_dict, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def triple_to_config(t) -> dict:
    """Inline-seed form of a constant triple (the config format's "triple" object)."""
    v, h, V = t.at(t.grid.base)
    if (np.abs(t.v - v.reshape(3, 1, 1, 1)).max() > 0
            or np.abs(t.V - V.reshape(3, 1, 1, 1)).max() > 0
            or np.abs(t.h).max() > 0):
        raise IoError("only constant triples fit the inline config form")
    return {
        "seed": {"triple": {"v": list(v), "V": list(V), "delta": list(t.delta)}},
        "ambient": {"c": t.spec.c, "s": t.spec.s},
        "grid": {"lo": list(t.grid.lo), "hi": list(t.grid.hi),
                 "n": list(t.grid.n), "base": list(t.grid.base)},
    }


def dump_schema(path):
    """Write the config JSON schema (shipped documentation of the format)."""
    write_report(CONFIG_SCHEMA, path)


def max_threads(default=None):
    """Thread cap from SPACEFORM_LAB_THREADS (None = unlimited/default)."""
    raw = os.environ.get("SPACEFORM_LAB_THREADS", "")
    if not raw:
        return default
    try:
        val = int(raw)
    except ValueError:
        return default
    return max(1, val)
