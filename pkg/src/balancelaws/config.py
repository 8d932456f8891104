"""Run configuration: JSON schema, system construction, output files.

One run is one JSON document; the manifest written next to the outputs
echoes the fully resolved configuration (including the derived time
step), so re-running the manifest reproduces every output byte.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from . import systems
from .scheme import SchemeConfig, make_sequence
from .systems import PhaseBox, SystemDef

FLOAT_FMT = "%.17g"


class ConfigError(ValueError):
    pass


_NUMBER_ARRAY = {"type": "array", "items": {"type": "number"}, "minItems": 1}

_PHASE_BOX_SCHEMA = {
    "type": "object",
    "properties": {"center": _NUMBER_ARRAY, "half_widths": _NUMBER_ARRAY},
    "required": ["center", "half_widths"],
    "additionalProperties": False,
}

_SOURCE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["zero", "constant", "exp_decay", "cos"]},
        "amplitude": {"type": "number"},
        "rate": {"type": "number"},
        "omega": {"type": "number"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_DUCT_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["constant", "linear", "gaussian_bump", "cosine_bump"]},
        "a0": {"type": "number"},
        "slope": {"type": "number"},
        "amplitude": {"type": "number"},
        "center": {"type": "number"},
        "width": {"type": "number"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_SYSTEM_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"enum": ["burgers", "scalar", "ode", "p_system", "euler",
                          "euler_duct"]},
        "flux": {"enum": ["burgers", "cubic"]},
        "gamma": {"type": "number"},
        "kappa": {"type": "number"},
        "duct": _DUCT_SCHEMA,
        "source": _SOURCE_SCHEMA,
        "phase_box": _PHASE_BOX_SCHEMA,
    },
    "required": ["name"],
    "additionalProperties": False,
}

_INITIAL_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["constant", "riemann", "sine", "file"]},
        "value": _NUMBER_ARRAY,
        "left": _NUMBER_ARRAY,
        "right": _NUMBER_ARRAY,
        "x0": {"type": "number"},
        "primitive": {"type": "boolean"},
        "offset": _NUMBER_ARRAY,
        "amplitude": _NUMBER_ARRAY,
        "frequency": {"type": "number"},
        "path": {"type": "string"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

RUN_SCHEMA = {
    "type": "object",
    "properties": {
        "system": _SYSTEM_SCHEMA,
        "domain": {"type": "array", "items": {"type": "number"},
                   "minItems": 2, "maxItems": 2},
        "r": {"type": "number", "exclusiveMinimum": 0},
        "s": {"type": "number", "exclusiveMinimum": 0},
        "cfl_safety": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "t_end": {"type": "number", "minimum": 0},
        "sequence": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["van_der_corput", "seeded_uniform"]},
                "seed": {"type": "integer"},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "boundary": {"enum": ["constant", "periodic"]},
        "K": {"type": "number", "exclusiveMinimum": 0},
        "jump_factor": {"type": "number", "exclusiveMinimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "initial_data": _INITIAL_SCHEMA,
        "snapshots": {"type": "array", "items": {"type": "number"}},
        "output_dir": {"type": "string"},
    },
    "required": ["system", "domain", "r", "t_end", "initial_data"],
    "additionalProperties": False,
}

_DEFAULTS = {
    "cfl_safety": 0.9,
    "sequence": {"kind": "van_der_corput"},
    "boundary": "constant",
    "K": 10.0,
    "jump_factor": 0.5,
    "workers": 1,
    "snapshots": [],
    "output_dir": "out",
}


def _phase_box(spec) -> PhaseBox | None:
    if spec is None:
        return None
    return PhaseBox(np.asarray(spec["center"], dtype=float),
                    np.asarray(spec["half_widths"], dtype=float))


def build_system(spec: dict) -> SystemDef:
    name = spec["name"]
    box = _phase_box(spec.get("phase_box"))
    source_spec = spec.get("source", {"kind": "zero"})

    def scalar_source(p):
        params = {k: v for k, v in source_spec.items() if k != "kind"}
        return systems.make_time_source(source_spec["kind"], p=p, **params)

    if name in ("burgers", "scalar"):
        flux = spec.get("flux", "burgers")
        return systems.scalar_system(flux, scalar_source(1), phase_box=box)
    if name == "ode":
        return systems.ode_system(scalar_source(1), phase_box=box)
    if name == "p_system":
        return systems.p_system(gamma=spec.get("gamma", 2.0),
                                kappa=spec.get("kappa", 1.0), phase_box=box)
    if name == "euler":
        return systems.euler_system(gamma=spec.get("gamma", 1.4), phase_box=box)
    if name == "euler_duct":
        duct_spec = dict(spec.get("duct", {"kind": "constant"}))
        kind = duct_spec.pop("kind")
        duct = systems.DUCTS[kind](**duct_spec)
        return systems.euler_duct_system(gamma=spec.get("gamma", 1.4),
                                         duct_spec=duct, phase_box=box)
    raise ConfigError(f"unknown system {name!r}")


def _read_profile_csv(path: str):
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    header = rows[0]
    if header[0] != "x":
        raise ConfigError(f"profile file {path}: first column must be 'x'")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    if data.size == 0:
        raise ConfigError(f"profile file {path} has no rows")
    order = np.argsort(data[:, 0])
    return data[order, 0], data[order, 1:]


def build_initial(spec: dict, system: SystemDef) -> Callable[[float], np.ndarray]:
    kind = spec["kind"]
    primitive = spec.get("primitive", False)

    def to_state(values):
        values = np.asarray(values, dtype=float)
        if primitive:
            if not hasattr(system, "from_primitive"):
                raise ConfigError("primitive data requires an Euler system")
            return system.from_primitive(*values)
        if values.shape != (system.p,):
            raise ConfigError(
                f"initial value {values} has wrong length for p={system.p}")
        return values

    if kind == "constant":
        u = to_state(spec["value"])
        return lambda x: u.copy()
    if kind == "riemann":
        left = to_state(spec["left"])
        right = to_state(spec["right"])
        split = float(spec.get("x0", 0.0))
        return lambda x: (left if x < split else right).copy()
    if kind == "sine":
        offset = to_state(spec["offset"])
        amp = np.asarray(spec["amplitude"], dtype=float)
        freq = float(spec.get("frequency", 1.0))
        if amp.shape != (system.p,):
            raise ConfigError("amplitude length must match p")
        return lambda x: offset + amp * math.sin(math.pi * freq * x)
    if kind == "file":
        xs, values = _read_profile_csv(spec["path"])
        if values.shape[1] != system.p:
            raise ConfigError("profile file has wrong component count")

        def lookup(x):
            idx = int(np.searchsorted(xs, x, side="right")) - 1
            return values[max(idx, 0)].copy()

        return lookup
    raise ConfigError(f"unknown initial data {kind!r}")


@dataclass
class RunSetup:
    raw: dict
    system: SystemDef
    config: SchemeConfig
    u0: Callable[[float], np.ndarray]
    snapshots: list[float]
    output_dir: Path


def load_run_config(source) -> RunSetup:
    """Parse and validate a run configuration (dict, JSON path, or manifest)."""
    if isinstance(source, (str, Path)):
        try:
            with open(source) as handle:
                raw = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
    else:
        raw = source
    if isinstance(raw, dict) and "balancelaws_manifest" in raw:
        raw = raw["config"]
    try:
        jsonschema.validate(raw, RUN_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc

    merged = dict(_DEFAULTS)
    merged.update(raw)
    system = build_system(merged["system"])
    u0 = build_initial(merged["initial_data"], system)
    seq_spec = merged["sequence"]
    sequence = make_sequence(seq_spec["kind"], seq_spec.get("seed"))
    try:
        config = SchemeConfig.create(
            system, tuple(merged["domain"]), merged["r"], merged["t_end"],
            s=merged.get("s"), cfl_safety=merged["cfl_safety"],
            sequence=sequence, boundary=merged["boundary"], K=merged["K"],
            jump_factor=merged["jump_factor"], workers=merged["workers"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    snapshots = sorted(float(t) for t in merged["snapshots"])
    if snapshots and snapshots[-1] > merged["t_end"] + 1e-12:
        raise ConfigError("snapshot times must not exceed t_end")
    merged["s"] = config.s
    return RunSetup(raw=merged, system=system, config=config, u0=u0,
                    snapshots=snapshots, output_dir=Path(merged["output_dir"]))


def manifest_for(setup: RunSetup) -> dict:
    cfg = setup.config
    return {
        "balancelaws_manifest": 1,
        "config": setup.raw,
        "resolved": {
            "s": cfg.s,
            "lambda_star": cfg.lambda_star,
            "steps": max(0, math.ceil(cfg.t_end / cfg.s - 1e-9)),
            "n_half": cfg.n_half,
            "K": cfg.K,
            "sequence": cfg.sequence.describe(),
        },
    }


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------

def write_manifest(path: Path, manifest: dict) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def snapshot_filename(index: int) -> str:
    return f"snapshot_{index:04d}.csv"


def write_snapshot_csv(path: Path, snapshot) -> None:
    p = snapshot.states.shape[1]
    header = "t,x," + ",".join(f"u{i + 1}" for i in range(p))
    lines = [header]
    for x, u in zip(snapshot.x, snapshot.states):
        fields = [FLOAT_FMT % snapshot.t, FLOAT_FMT % x]
        fields += [FLOAT_FMT % v for v in u]
        lines.append(",".join(fields))
    path.write_text("\n".join(lines) + "\n")


def read_snapshot_csv(path) -> tuple[float, np.ndarray, np.ndarray]:
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    header = rows[0]
    if header[:2] != ["t", "x"] or not all(
            name == f"u{i + 1}" for i, name in enumerate(header[2:])):
        raise ConfigError(f"{path}: not a snapshot CSV")
    if len(rows) < 2:
        raise ConfigError(f"{path}: snapshot has no cells")
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return float(data[0, 0]), data[:, 1], data[:, 2:]


def write_diagnostics_ndjson(path: Path, records) -> None:
    lines = []
    for rec in records:
        lines.append(json.dumps({"k": rec.k, "t": rec.t, "L": rec.L,
                                 "Q": rec.Q, "F": rec.F, "TV": rec.TV}))
    path.write_text("\n".join(lines) + ("\n" if lines else ""))


def read_diagnostics_ndjson(path) -> list[dict]:
    records = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if set(obj) != {"k", "t", "L", "Q", "F", "TV"}:
                raise ConfigError(f"{path}: bad diagnostics record {obj}")
            records.append(obj)
    return records


def write_study_csv(path: Path, header: tuple, rows, slope: float | None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(FLOAT_FMT % v for v in row))
    if slope is not None:
        lines.append(f"# slope = {FLOAT_FMT % slope}")
    path.write_text("\n".join(lines) + "\n")
