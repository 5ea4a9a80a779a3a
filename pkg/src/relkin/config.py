"""Flat key=value scenario files and their three-layer override logic.

A scenario file is diffable, hand-editable UTF-8 text: one ``key = value``
per line, ``#`` comments, and matrix entries spelled ``Y0.row.col = v``
(likewise ``Y1``/``Y2``).  Values from a file override built-in defaults;
explicit overrides (e.g. from CLI flags) override the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from .errors import ConfigError
from .trajectory import PolynomialTrajectory, SimConfig

__all__ = ["ScenarioSettings", "default_config_text", "load_scenario", "parse_config_text"]

_SCALAR_TYPES = {
    "dim": int,
    "k_samples": int,
    "seed": int,
    "n_trials": int,
    "t_start": float,
    "t_end": float,
    "sigma_d": float,
    "sigma_a": float,
    "accel_rotation_angle": float,
}
_MATRIX_KEY = re.compile(r"^Y([0-9])\.(\d+)\.(\d+)$")

DEFAULTS: dict[str, object] = {
    "dim": 2,
    "k_samples": 40,
    "t_start": -5.0,
    "t_end": 5.0,
    "sigma_d": 0.01,
    "sigma_a": 0.001,
    "seed": 0,
    "accel_rotation_angle": 0.0,
    "n_trials": 100,
    "k_sweep": (10, 20, 30, 40, 50),
}


@dataclass
class ScenarioSettings:
    """Typed view of one scenario: simulation config plus ground truth."""

    sim: SimConfig
    trajectory: PolynomialTrajectory
    k_sweep: tuple[int, ...]


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines into a raw string map, rejecting unknown keys."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        if key not in _SCALAR_TYPES and key != "k_sweep" and not _MATRIX_KEY.match(key):
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        values[key] = value
    return values


def _convert(key: str, value: str) -> object:
    try:
        if key == "k_sweep":
            return tuple(int(part.strip()) for part in value.split(",") if part.strip())
        if key in _SCALAR_TYPES:
            return _SCALAR_TYPES[key](value)
        return float(value)  # matrix entry
    except ValueError as exc:
        raise ConfigError(f"invalid value for '{key}': {value}") from exc


def _build_trajectory(entries: Mapping[str, float], dim: int) -> PolynomialTrajectory:
    per_order: dict[int, dict[tuple[int, int], float]] = {}
    for key, value in entries.items():
        match = _MATRIX_KEY.match(key)
        order, row, col = (int(g) for g in match.groups())
        per_order.setdefault(order, {})[(row, col)] = value
    if 0 not in per_order:
        raise ConfigError("scenario defines no trajectory (Y0.<row>.<col> entries missing)")
    n_nodes = 1 + max(col for cells in per_order.values() for (_, col) in cells)
    max_order = max(per_order)
    coeffs = []
    for order in range(max_order + 1):
        mat = np.zeros((dim, n_nodes))
        for (row, col), value in per_order.get(order, {}).items():
            if row >= dim or col >= n_nodes:
                raise ConfigError(f"Y{order}.{row}.{col} is outside the ({dim}, {n_nodes}) shape")
            mat[row, col] = value
        if order in per_order and len(per_order[order]) != dim * n_nodes:
            raise ConfigError(
                f"Y{order} is incomplete: expected {dim * n_nodes} entries, "
                f"got {len(per_order[order])}"
            )
        coeffs.append(mat)
    return PolynomialTrajectory(tuple(coeffs))


def load_scenario(
    config_path: Optional[str] = None, overrides: Optional[Mapping[str, str]] = None
) -> ScenarioSettings:
    """Assemble a scenario from defaults, an optional file, and overrides.

    Precedence (lowest to highest): built-in defaults, the config file
    (the bundled default scenario when ``config_path`` is None), then
    ``overrides`` given as raw strings.
    """
    if config_path is None:
        text, source = default_config_text(), "<bundled default_scenario.cfg>"
    else:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text, source = path.read_text(encoding="utf-8"), str(path)

    raw = parse_config_text(text, source)
    for key, value in (overrides or {}).items():
        if key not in _SCALAR_TYPES and key != "k_sweep" and not _MATRIX_KEY.match(key):
            raise ConfigError(f"unknown override key '{key}'")
        raw[key] = value

    typed: dict[str, object] = dict(DEFAULTS)
    matrix_entries: dict[str, float] = {}
    for key, value in raw.items():
        converted = _convert(key, value)
        if _MATRIX_KEY.match(key):
            matrix_entries[key] = converted  # type: ignore[assignment]
        else:
            typed[key] = converted

    trajectory = _build_trajectory(matrix_entries, int(typed["dim"]))
    sim = SimConfig(
        n_nodes=trajectory.n_nodes,
        dim=int(typed["dim"]),
        k_samples=int(typed["k_samples"]),
        t_start=float(typed["t_start"]),
        t_end=float(typed["t_end"]),
        sigma_d=float(typed["sigma_d"]),
        sigma_a=float(typed["sigma_a"]),
        seed=int(typed["seed"]),
        accel_rotation_angle=float(typed["accel_rotation_angle"]),
        n_trials=int(typed["n_trials"]),
    )
    return ScenarioSettings(sim=sim, trajectory=trajectory, k_sweep=tuple(typed["k_sweep"]))


def default_config_text() -> str:
    """Text of the bundled default scenario file."""
    return resources.files("relkin").joinpath("default_scenario.cfg").read_text("utf-8")
