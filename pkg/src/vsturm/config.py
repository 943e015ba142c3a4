"""JSON run configuration: schema validation and problem construction.

Top-level keys
--------------
dimension     int, 1..16
potential     {"kind": "zero" | "constant" | "diagonal" | "dense" | "piecewise", ...}
h_left        N x N row-major numbers, symmetric within 1e-12
h_right       same
command       "spectrum" | "predict" | "verify" | "contour" | "transroot" | "identities"
n_range       [lo, hi] integers (predict / verify / contour / transroot)
lambda_max    number (spectrum)
alpha         number (transroot)
delta         number > 0, contour radius scale (default 1.0)
order         1 | 2 | 3 (default 1)
samples       int >= 256, boundary samples per counting circle (default 256)
tolerances    {"rank_tol": ..., "newton_tol": ...}
output_path   string
format        "json" | "csv" (default "json")
canonical     bool, drop timings for byte-identical reruns (default false)

Potential payloads
------------------
constant      {"matrix": [[...]]}
diagonal      {"entries": [entry, ...]}            one entry per channel
dense         {"upper": [entry, ...]}              row-major upper triangle
piecewise     {"breakpoints": [...], "pieces": [{"upper": [entry, ...]}, ...]}

where each scalar entry is {"poly": [c0, c1, ...], "cos": [[k, c], ...],
"sin": [[k, c], ...]} and all three keys are optional.

Unknown keys are rejected with the offending JSON path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .problem import Problem, PotentialSpec
from .trigpoly import TrigPoly

COMMANDS = ("spectrum", "predict", "verify", "contour", "transroot", "identities")

_TOP_KEYS = {"dimension", "potential", "h_left", "h_right", "command",
             "n_range", "lambda_max", "alpha", "delta", "order", "samples",
             "tolerances", "output_path", "format", "canonical"}
_ENTRY_KEYS = {"poly", "cos", "sin"}
_TOL_KEYS = {"rank_tol", "newton_tol"}


class ConfigError(ValueError):
    """Configuration rejected; message names the offending JSON path."""


@dataclass
class RunConfig:
    problem: Problem
    command: str
    n_range: tuple | None
    lambda_max: float | None
    alpha: float | None
    delta: float
    order: int
    samples: int
    rank_tol: float
    newton_tol: float
    output_path: str | None
    format: str
    canonical: bool
    echo: dict


def _fail(path: str, message: str):
    raise ConfigError(f"{path}: {message}")


def _check_keys(obj: dict, allowed: set, path: str):
    for key in obj:
        if key not in allowed:
            _fail(f"{path}.{key}", "unknown key")


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {type(value).__name__}")
    return int(value)


def _matrix(value, n: int, path: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        _fail(path, f"expected {n} rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            _fail(f"{path}[{i}]", f"expected {n} entries")
        rows.append([_number(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    a = np.array(rows)
    if np.abs(a - a.T).max() > 1e-12:
        _fail(path, "matrix is not symmetric within 1e-12")
    return 0.5 * (a + a.T)


def _entry(value, path: str) -> TrigPoly:
    if not isinstance(value, dict):
        _fail(path, "expected an entry object with poly / cos / sin")
    _check_keys(value, _ENTRY_KEYS, path)
    poly = value.get("poly", [])
    if not isinstance(poly, list):
        _fail(f"{path}.poly", "expected a list of coefficients")
    poly = [_number(c, f"{path}.poly[{i}]") for i, c in enumerate(poly)]

    def pairs(name):
        raw = value.get(name, [])
        if not isinstance(raw, list):
            _fail(f"{path}.{name}", "expected a list of [k, c] pairs")
        out = []
        for i, kc in enumerate(raw):
            if not isinstance(kc, list) or len(kc) != 2:
                _fail(f"{path}.{name}[{i}]", "expected a [k, c] pair")
            out.append((_number(kc[0], f"{path}.{name}[{i}][0]"),
                        _number(kc[1], f"{path}.{name}[{i}][1]")))
        return out

    return TrigPoly.from_coeffs(poly=poly, cos=pairs("cos"), sin=pairs("sin"))


def _upper(value, n: int, path: str) -> list:
    need = n * (n + 1) // 2
    if not isinstance(value, list) or len(value) != need:
        _fail(path, f"expected {need} upper-triangle entries")
    return [_entry(e, f"{path}[{i}]") for i, e in enumerate(value)]


def _potential(value, n: int, path: str) -> PotentialSpec:
    if not isinstance(value, dict):
        _fail(path, "expected a potential object")
    kind = value.get("kind")
    if kind == "zero":
        _check_keys(value, {"kind"}, path)
        return PotentialSpec.zero(n)
    if kind == "constant":
        _check_keys(value, {"kind", "matrix"}, path)
        if "matrix" not in value:
            _fail(f"{path}.matrix", "missing")
        return PotentialSpec.constant(_matrix(value["matrix"], n, f"{path}.matrix"))
    if kind == "diagonal":
        _check_keys(value, {"kind", "entries"}, path)
        entries = value.get("entries")
        if not isinstance(entries, list) or len(entries) != n:
            _fail(f"{path}.entries", f"expected {n} diagonal entries")
        return PotentialSpec.diagonal(
            [_entry(e, f"{path}.entries[{i}]") for i, e in enumerate(entries)])
    if kind == "dense":
        _check_keys(value, {"kind", "upper"}, path)
        if "upper" not in value:
            _fail(f"{path}.upper", "missing")
        return PotentialSpec.dense(n, _upper(value["upper"], n, f"{path}.upper"))
    if kind == "piecewise":
        _check_keys(value, {"kind", "breakpoints", "pieces"}, path)
        bps = value.get("breakpoints")
        pieces = value.get("pieces")
        if not isinstance(bps, list):
            _fail(f"{path}.breakpoints", "expected a list")
        bps = [_number(x, f"{path}.breakpoints[{i}]") for i, x in enumerate(bps)]
        if any(bps[i] >= bps[i + 1] for i in range(len(bps) - 1)):
            _fail(f"{path}.breakpoints", "must be strictly increasing")
        if not isinstance(pieces, list) or len(pieces) != len(bps) + 1:
            _fail(f"{path}.pieces", f"expected {len(bps) + 1} pieces")
        built = []
        for i, piece in enumerate(pieces):
            if not isinstance(piece, dict):
                _fail(f"{path}.pieces[{i}]", "expected a piece object")
            _check_keys(piece, {"upper"}, f"{path}.pieces[{i}]")
            built.append(_upper(piece.get("upper"), n, f"{path}.pieces[{i}].upper"))
        try:
            return PotentialSpec.piecewise(n, bps, built)
        except ValueError as exc:
            _fail(path, str(exc))
    _fail(f"{path}.kind", f"unknown potential kind {kind!r}")


_NEEDS_N_RANGE = {"predict", "verify", "contour", "transroot"}


def parse_config(text: str) -> RunConfig:
    """Validate a JSON configuration and build the run description."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"$: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        _fail("$", "expected a JSON object")
    _check_keys(raw, _TOP_KEYS, "$")
    for key in ("dimension", "potential", "h_left", "h_right", "command"):
        if key not in raw:
            _fail(f"$.{key}", "missing required key")
    n = _integer(raw["dimension"], "$.dimension")
    if not (1 <= n <= 16):
        _fail("$.dimension", "must lie in 1..16")
    spec = _potential(raw["potential"], n, "$.potential")
    h_left = _matrix(raw["h_left"], n, "$.h_left")
    h_right = _matrix(raw["h_right"], n, "$.h_right")
    command = raw["command"]
    if command not in COMMANDS:
        _fail("$.command", f"unknown command {command!r}")

    n_range = None
    if "n_range" in raw:
        nr = raw["n_range"]
        if not isinstance(nr, list) or len(nr) != 2:
            _fail("$.n_range", "expected [lo, hi]")
        lo = _integer(nr[0], "$.n_range[0]")
        hi = _integer(nr[1], "$.n_range[1]")
        if not (1 <= lo <= hi):
            _fail("$.n_range", "need 1 <= lo <= hi")
        n_range = (lo, hi)
    if command in _NEEDS_N_RANGE and n_range is None:
        _fail("$.n_range", f"required for command {command!r}")

    lambda_max = None
    if "lambda_max" in raw:
        lambda_max = _number(raw["lambda_max"], "$.lambda_max")
    if command == "spectrum":
        if lambda_max is None:
            _fail("$.lambda_max", "required for command 'spectrum'")
        if lambda_max < 1.0:
            _fail("$.lambda_max", "must be at least 1")

    alpha = _number(raw["alpha"], "$.alpha") if "alpha" in raw else None
    if command == "transroot" and alpha is None:
        _fail("$.alpha", "required for command 'transroot'")

    delta = _number(raw.get("delta", 1.0), "$.delta")
    if delta <= 0.0:
        _fail("$.delta", "must be positive")
    order = _integer(raw.get("order", 1), "$.order")
    if order not in (1, 2, 3):
        _fail("$.order", "must be 1, 2 or 3")
    samples = _integer(raw.get("samples", 256), "$.samples")
    if samples < 256:
        _fail("$.samples", "must be at least 256")

    rank_tol = 1e-6
    newton_tol = 1e-12
    if "tolerances" in raw:
        tols = raw["tolerances"]
        if not isinstance(tols, dict):
            _fail("$.tolerances", "expected an object")
        _check_keys(tols, _TOL_KEYS, "$.tolerances")
        if "rank_tol" in tols:
            rank_tol = _number(tols["rank_tol"], "$.tolerances.rank_tol")
        if "newton_tol" in tols:
            newton_tol = _number(tols["newton_tol"], "$.tolerances.newton_tol")

    output_path = raw.get("output_path")
    if output_path is not None and not isinstance(output_path, str):
        _fail("$.output_path", "expected a string")
    fmt = raw.get("format", "json")
    if fmt not in ("json", "csv"):
        _fail("$.format", "expected 'json' or 'csv'")
    canonical = raw.get("canonical", False)
    if not isinstance(canonical, bool):
        _fail("$.canonical", "expected a boolean")

    problem = Problem(spec, h_left, h_right, n)
    return RunConfig(
        problem=problem, command=command, n_range=n_range,
        lambda_max=lambda_max, alpha=alpha, delta=delta, order=order,
        samples=samples, rank_tol=rank_tol, newton_tol=newton_tol,
        output_path=output_path, format=fmt, canonical=canonical,
        echo=raw)
