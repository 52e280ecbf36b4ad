"""Model files (JSON), sphere tables and fields (CSV)."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInputError
from .field import Field
from .group_model import GroupModel, QuasiNormSpec, RadialGrid
from .report import fmt_float

__all__ = [
    "load_json",
    "model_from_dict",
    "load_model",
    "model_to_dict",
    "model_hash",
    "grid_from_dict",
    "read_sphere_csv",
    "write_sphere_csv",
    "write_field_csv",
    "read_field_csv",
]


def load_json(path):
    """Parse a JSON file, reporting syntax errors as ``path:line:col``."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(str(e.strerror or e), str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, f"{path}:{e.lineno}:{e.colno}") from None


def _num(d, key, where, kind=float, default=None, required=True):
    if key not in d:
        if required and default is None:
            raise ConfigError("missing field", f"{where}.{key}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", f"{where}.{key}")
    if kind is int:
        if float(v) != int(v):
            raise ConfigError(f"expected an integer, got {v!r}", f"{where}.{key}")
        return int(v)
    return float(v)


def grid_from_dict(d, where="grid"):
    if not isinstance(d, dict):
        raise ConfigError("expected an object", where)
    try:
        return RadialGrid(_num(d, "s_min", where, default=-12.0, required=False),
                          _num(d, "s_max", where, default=8.0, required=False),
                          _num(d, "N", where, int, default=4096, required=False))
    except InvalidInputError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), where) from None


def read_sphere_csv(path):
    """Rows ``coord_1, ..., coord_n, weight``; a non-numeric first row is a header."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or not "".join(row).strip():
                continue
            try:
                rows.append([float(x) for x in row])
            except ValueError:
                if lineno == 1 and not rows:
                    continue
                raise ConfigError(f"non-numeric entry in {row!r}", f"{path}:{lineno}") from None
    if not rows:
        raise ConfigError("empty sphere table", str(path))
    if len({len(r) for r in rows}) != 1:
        raise ConfigError("rows have different lengths", str(path))
    table = np.array(rows)
    return table[:, :-1], table[:, -1]


def write_sphere_csv(model, path):
    if model.nodes is None:
        raise InvalidInputError("abstract models have no sphere nodes")
    d = model.nodes.shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"y{i + 1}" for i in range(d)] + ["weight"])
        for y, wt in zip(model.nodes, model.weights):
            w.writerow([fmt_float(v) for v in y] + [fmt_float(wt)])


def model_from_dict(d, base_dir=".", where="model"):
    """Build ``(GroupModel, RadialGrid)`` from a model definition.

    Norm kinds: ``euclidean`` (``p``), ``anisotropic`` (``nu``, ``power``,
    optional ``sphere_measure``) and ``abstract`` (``Q``, ``sphere_measure``).
    ``sphere_csv`` replaces the built-in quadrature with a node table.
    """
    if not isinstance(d, dict):
        raise ConfigError("expected an object", where)
    grid = grid_from_dict(d.get("grid", {}), f"{where}.grid")
    norm = d.get("norm", {"kind": "euclidean", "p": 2.0})
    if not isinstance(norm, dict) or "kind" not in norm:
        raise ConfigError("expected an object with a 'kind'", f"{where}.norm")
    kind = norm["kind"]
    try:
        if kind == "abstract":
            Q = _num(d, "Q", where)
            mu = _num(norm, "sphere_measure", f"{where}.norm")
            cols = _num(d, "sphere_resolution", where, int, default=1, required=False)
            return GroupModel.abstract(Q, mu, cols), grid
        if kind == "anisotropic":
            nu = norm.get("nu")
            if not isinstance(nu, list) or not nu:
                raise ConfigError("expected a list of dilation weights", f"{where}.norm.nu")
            power = _num(norm, "power", f"{where}.norm", int)
            mu = _num(norm, "sphere_measure", f"{where}.norm", required=False)
            model = GroupModel.anisotropic(nu, power, mu)
            if "Q" in d and abs(_num(d, "Q", where) - model.Q) > 1e-12:
                raise ConfigError(f"Q must equal sum(nu) = {model.Q:g}", f"{where}.Q")
            return model, grid
        if kind != "euclidean":
            raise ConfigError(f"unknown norm kind {kind!r}", f"{where}.norm.kind")
        n = _num(d, "ambient_dim", where, int)
        p = norm.get("p", 2.0)
        p = math.inf if p in ("inf", "Infinity") else _num(norm, "p", f"{where}.norm")
        if "Q" in d and abs(_num(d, "Q", where) - n) > 1e-12:
            raise ConfigError("isotropic Euclidean models need Q = ambient_dim", f"{where}.Q")
        if "sphere_csv" in d:
            nodes, weights = read_sphere_csv(Path(base_dir) / d["sphere_csv"])
            spec = QuasiNormSpec("euclidean", p=p)
            return GroupModel(n, weights, nodes, spec, n, label=f"table-l{p}-n{n}"), grid
        res = _num(d, "sphere_resolution", where, int, default=16, required=False)
        return GroupModel.euclidean(n, p, res), grid
    except ConfigError:
        raise
    except InvalidInputError as e:
        raise ConfigError(str(e), where) from None


def load_model(path):
    """Read a model JSON file; returns ``(model, grid, raw_dict)``."""
    raw = load_json(path)
    model, grid = model_from_dict(raw, Path(path).parent, str(path))
    return model, grid, raw


def model_to_dict(model, grid):
    d = {"Q": model.Q, "grid": grid.to_dict()}
    if model.norm is None:
        d["norm"] = {"kind": "abstract", "sphere_measure": model.sphere_measure}
        d["sphere_resolution"] = model.n_nodes
        return d
    norm = model.norm.to_dict()
    if norm["kind"] == "anisotropic":
        norm["sphere_measure"] = model.sphere_measure
    else:
        d["ambient_dim"] = model.ambient_dim
        if math.isinf(norm.get("p", 0.0)):
            norm["p"] = "inf"
        d["sphere_resolution"] = _resolution_hint(model)
    d["norm"] = norm
    return d


def _resolution_hint(model):
    return int(model.label.rsplit("-r", 1)[1]) if "-r" in model.label else model.n_nodes


def model_hash(model, grid):
    """SHA-256 over Q, the grid and the exact quadrature bytes."""
    h = hashlib.sha256()
    key = {"Q": float(model.Q), "s_min": float(grid.s_min), "s_max": float(grid.s_max),
           "N": int(grid.N)}
    h.update(json.dumps(key, sort_keys=True).encode())
    h.update(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())
    if model.nodes is not None:
        h.update(np.ascontiguousarray(model.nodes, dtype="<f8").tobytes())
    return h.hexdigest()


def write_field_csv(f, path):
    """Rows ``s, node_index, re, im`` in grid-major order."""
    vals = f.values if f.values.ndim == 2 else f.values[:, None]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["s", "node_index", "re", "im"])
        for j, s in enumerate(f.grid.s):
            for i in range(vals.shape[1]):
                v = complex(vals[j, i])
                w.writerow([fmt_float(s), i, fmt_float(v.real), fmt_float(v.imag)])


def read_field_csv(model, grid, path):
    """Inverse of :func:`write_field_csv`; a single node column means radial."""
    data = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"s", "node_index", "re", "im"}:
            raise ConfigError("header must be s,node_index,re,im", f"{path}:1")
        for lineno, row in enumerate(reader, 2):
            try:
                data[(float(row["s"]), int(row["node_index"]))] = complex(
                    float(row["re"]), float(row["im"]))
            except (TypeError, ValueError):
                raise ConfigError(f"bad row {row!r}", f"{path}:{lineno}") from None
    cols = 1 + max(i for _, i in data) if data else 0
    if cols not in (1, model.n_nodes):
        raise ConfigError(f"{cols} node columns, model has {model.n_nodes}", str(path))
    vals = np.zeros((grid.N, cols), dtype=complex)
    for j, s in enumerate(grid.s):
        for i in range(cols):
            try:
                vals[j, i] = data[(float(s), i)]
            except KeyError:
                raise ConfigError(f"missing sample s={s!r}, node {i}", str(path)) from None
    if not np.any(vals.imag):
        vals = vals.real
    return Field(model, grid, vals[:, 0] if cols == 1 else vals, {"source": str(path)})
