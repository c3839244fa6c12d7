"""Sweep configuration: validation, the flat key=value file format, and
stable hashing for provenance."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .model import OPEN, ChainParams

METHODS = ("full", "diag", "max", "lindblad")

#: realizations default follows the N * N_r = 1e5 convention
REALIZATION_BUDGET = 100_000

#: largest chain the dense master-equation method accepts
LINDBLAD_MAX_SITES = 24


class ConfigError(ValueError):
    """Malformed sweep configuration; the message is line-anchored when
    the source is a config file."""


def log_grid(w_min: float, w_max: float, points: int = 40) -> tuple[float, ...]:
    """Strictly increasing log-spaced disorder grid."""
    if not (0.0 < w_min < w_max):
        raise ConfigError(f"need 0 < w_min < w_max, got ({w_min}, {w_max})")
    if points < 2:
        raise ConfigError(f"need at least 2 grid points, got {points}")
    return tuple(float(w) for w in np.geomspace(w_min, w_max, points))


def default_realizations(n_sites: int) -> int:
    return max(1, math.ceil(REALIZATION_BUDGET / n_sites))


@dataclass(frozen=True)
class SweepConfig:
    """Full description of one disorder sweep."""

    chain: ChainParams
    w_grid: tuple[float, ...]
    n_realizations: int = 0  # 0 means the N * N_r budget default
    master_seed: int = 0
    methods: tuple[str, ...] = ("full",)
    output_csv: Optional[str] = None
    output_json: Optional[str] = None
    output_realizations: Optional[str] = None
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        grid = tuple(float(w) for w in self.w_grid)
        object.__setattr__(self, "w_grid", grid)
        if len(grid) == 0:
            raise ConfigError("w_grid must not be empty")
        if any(w <= 0.0 for w in grid):
            raise ConfigError("disorder grid values must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("disorder grid must be strictly increasing")
        if self.n_realizations == 0:
            object.__setattr__(
                self, "n_realizations", default_realizations(self.chain.n_sites)
            )
        if self.n_realizations < 1:
            raise ConfigError(f"n_realizations must be >= 1, got {self.n_realizations}")
        methods = tuple(self.methods)
        object.__setattr__(self, "methods", methods)
        if not methods:
            raise ConfigError("at least one method is required")
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        if len(set(methods)) != len(methods):
            raise ConfigError("duplicate methods in config")
        if "lindblad" in methods and self.chain.n_sites > LINDBLAD_MAX_SITES:
            raise ConfigError(
                f"the lindblad method is dense in (N+1)^2 and limited to "
                f"N <= {LINDBLAD_MAX_SITES}, got N = {self.chain.n_sites}"
            )
        if self.chain.boundary != OPEN:
            raise ConfigError("transport sweeps require open boundary conditions")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def config_hash(self) -> str:
        """Stable digest of everything that determines the sweep output."""
        parts = [
            f"n_sites={self.chain.n_sites}",
            f"alpha={self.chain.alpha!r}",
            f"gamma={self.chain.gamma!r}",
            f"omega_nn={self.chain.omega_nn!r}",
            f"gamma_pump={self.chain.gamma_pump!r}",
            f"gamma_drain={self.chain.gamma_drain!r}",
            f"hbar={self.chain.hbar!r}",
            f"w_grid={[repr(w) for w in self.w_grid]}",
            f"n_realizations={self.n_realizations}",
            f"master_seed={self.master_seed}",
            f"methods={list(self.methods)}",
        ]
        return hashlib.sha256("\n".join(parts).encode()).hexdigest()[:16]


_CHAIN_KEYS = {
    "n_sites": int,
    "alpha": float,
    "gamma": float,
    "omega_nn": float,
    "gamma_pump": float,
    "gamma_drain": float,
    "hbar": float,
    "boundary": str,
}

_SWEEP_KEYS = {
    "w_min": float,
    "w_max": float,
    "w_points": int,
    "w_grid": str,
    "n_realizations": int,
    "master_seed": int,
    "methods": str,
    "output_csv": str,
    "output_json": str,
    "output_realizations": str,
    "workers": int,
}


def parse_config_text(text: str, source: str = "<config>") -> SweepConfig:
    """Parse the flat ``key = value`` sweep-config format.

    Lines starting with '#' are comments; unknown keys are rejected
    with the offending line number.
    """
    chain_kwargs: dict = {}
    sweep_kwargs: dict = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.split("#", 1)[0].strip()
        if key in seen:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        if key in _CHAIN_KEYS:
            target, kind = chain_kwargs, _CHAIN_KEYS[key]
        elif key in _SWEEP_KEYS:
            target, kind = sweep_kwargs, _SWEEP_KEYS[key]
        else:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        try:
            target[key] = _parse_value(kind, value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None

    for required in ("n_sites", "alpha"):
        if required not in chain_kwargs:
            raise ConfigError(f"{source}: missing required key {required!r}")
    try:
        chain = ChainParams(**chain_kwargs)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    grid = _resolve_grid(sweep_kwargs, source)
    methods = tuple(
        m.strip() for m in sweep_kwargs.get("methods", "full").split(",") if m.strip()
    )
    try:
        return SweepConfig(
            chain=chain,
            w_grid=grid,
            n_realizations=sweep_kwargs.get("n_realizations", 0),
            master_seed=sweep_kwargs.get("master_seed", 0),
            methods=methods,
            output_csv=sweep_kwargs.get("output_csv"),
            output_json=sweep_kwargs.get("output_json"),
            output_realizations=sweep_kwargs.get("output_realizations"),
            workers=sweep_kwargs.get("workers"),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _parse_value(kind, value: str):
    if kind is float:
        return float("inf") if value.lower() in ("inf", "infinity") else float(value)
    if kind is int:
        return int(value)
    return value


def _resolve_grid(sweep_kwargs: dict, source: str) -> tuple[float, ...]:
    explicit = "w_grid" in sweep_kwargs
    spec_keys = [k for k in ("w_min", "w_max", "w_points") if k in sweep_kwargs]
    if explicit and spec_keys:
        raise ConfigError(f"{source}: give either w_grid or w_min/w_max/w_points, not both")
    if explicit:
        try:
            return tuple(float(tok) for tok in sweep_kwargs["w_grid"].split(",") if tok.strip())
        except ValueError as exc:
            raise ConfigError(f"{source}: bad w_grid: {exc}") from None
    if "w_min" not in sweep_kwargs or "w_max" not in sweep_kwargs:
        raise ConfigError(f"{source}: missing disorder grid (w_min/w_max or w_grid)")
    return log_grid(
        sweep_kwargs["w_min"], sweep_kwargs["w_max"], sweep_kwargs.get("w_points", 40)
    )


def load_config(path: str | Path) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config_text(text, source=str(path))
