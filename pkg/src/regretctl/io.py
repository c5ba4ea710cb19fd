"""File formats: plant JSON, controller JSON, sweep and summary CSVs."""
from __future__ import annotations

import csv
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .controller import ControllerRealization
from .errors import DimensionError, RegretCtlError
from .sysmodel import CostWeights, StateSpacePlant

PLANT_KEYS = ("F", "G1", "G2", "H", "L")
TABLE_COLUMNS = ("controller", "frobenius_sq", "operator_sq", "regret")
SWEEP_COLUMNS = ("omega", "trace", "sigma_max_sq", "regret_eig")
SHIPPED_PLANTS = ("scalar", "system1_like", "ac5", "ac15")


class ParseError(RegretCtlError, ValueError):
    """Malformed input file."""

    exit_code = 1


def _is_matrix(v) -> bool:
    return isinstance(v, list) and len(v) > 0 and all(isinstance(r, list) for r in v)


def dumps(data: dict) -> str:
    """JSON with one matrix row per line; deterministic for identical input."""
    parts = []
    for key, val in data.items():
        if _is_matrix(val):
            rows = ",\n    ".join(json.dumps(r) for r in val)
            body = f"[\n    {rows}\n  ]"
        else:
            body = json.dumps(val, indent=2).replace("\n", "\n  ")
        parts.append(f"  {json.dumps(key)}: {body}")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def _read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")
    return data


def _matrix(data, key, path):
    try:
        a = np.asarray(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: entry {key!r} is not a numeric array") from exc
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ParseError(f"{path}: entry {key!r} must be a 2-D array, got {a.ndim}-D")
    return a


def plant_from_dict(data: dict, source="<dict>") -> StateSpacePlant:
    missing = [k for k in PLANT_KEYS if k not in data]
    if missing:
        raise ParseError(f"{source}: missing plant keys {missing}")
    mats = {k: _matrix(data, k, source) for k in PLANT_KEYS}
    weights = None
    if "Q" in data or "R" in data:
        q, m = mats["L"].shape[0], mats["G2"].shape[1]
        Q = _matrix(data, "Q", source) if "Q" in data else np.eye(q)
        R = _matrix(data, "R", source) if "R" in data else np.eye(m)
        weights = CostWeights(Q, R)
    plant = StateSpacePlant(**mats, name=str(data.get("name", "")), weights=weights)
    dims = data.get("dimensions")
    if dims:
        for key in ("n", "n_w", "m", "p", "q"):
            if key in dims and int(dims[key]) != getattr(plant, key):
                raise DimensionError(
                    f"{source}: declared {key}={dims[key]} but matrices give {getattr(plant, key)}"
                )
    return plant


def load_plant(path) -> StateSpacePlant:
    return plant_from_dict(_read_json(path), source=str(path))


def plant_to_dict(plant: StateSpacePlant) -> dict:
    d = plant.to_dict()
    d["dimensions"] = {k: getattr(plant, k) for k in ("n", "n_w", "m", "p", "q")}
    return d


def save_plant(plant: StateSpacePlant, path) -> None:
    Path(path).write_text(dumps(plant_to_dict(plant)))


def shipped_plant_path(name: str) -> Path:
    if name not in SHIPPED_PLANTS:
        raise KeyError(f"unknown shipped plant {name!r}; choose from {SHIPPED_PLANTS}")
    return Path(str(resources.files("regretctl") / "data" / f"{name}.json"))


def load_shipped(name: str) -> StateSpacePlant:
    return load_plant(shipped_plant_path(name))


def load_controller(path) -> ControllerRealization:
    data = _read_json(path)
    try:
        return ControllerRealization.from_dict(data)
    except (DimensionError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def save_controller(K: ControllerRealization, path, diagnostics: dict | None = None) -> None:
    d = K.to_dict()
    if diagnostics is not None:
        d["diagnostics"] = _plain(diagnostics)
    Path(path).write_text(dumps(d))


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def write_table(rows, path) -> None:
    """``rows``: iterable of (name, frobenius_sq, operator_sq, regret)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for name, fro, op, reg in rows:
            w.writerow([name, repr(float(fro)), repr(float(op)), repr(float(reg))])


def write_sweep(per_frequency: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in zip(*(per_frequency[c] for c in SWEEP_COLUMNS)):
            w.writerow([repr(float(v)) for v in row])
