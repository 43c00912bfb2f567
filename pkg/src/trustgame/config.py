"""JSON configuration for the command-line tools.

A config is one flat JSON object; vectors are arrays. Unknown keys are
rejected so that typos surface instead of silently falling back to a
default.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ConfigError
from .game import GameParams
from .ibr import IbrConfig

MODES = ("weak", "strong")


@dataclass(frozen=True)
class SweepConfig:
    y_hat: np.ndarray
    mu: np.ndarray
    zeta: np.ndarray
    y_attack: Optional[np.ndarray] = None
    y_bar_0: Optional[np.ndarray] = None
    var_y: Optional[float] = None
    var_yhat: Optional[float] = None
    grid_min: tuple = (-1.0, -1.0)
    grid_max: tuple = (1.0, 1.0)
    grid_step: tuple = (0.05, 0.05)
    init_count: int = 20
    init_radius: Optional[float] = None
    seed: int = 0
    mode: str = "weak"
    ibr: IbrConfig = field(default_factory=IbrConfig)
    slack_tol: float = 1e-6
    zeta_radii: tuple = (0.0, 0.2, 0.4)
    zeta_samples: int = 100
    zeta_seed: int = 0
    zeta_shape: str = "ball"
    epsilon: Optional[float] = None
    workers: int = 1
    backend: Optional[str] = None

    def __post_init__(self):
        k = self.y_hat.size
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.init_count < 1:
            raise ConfigError("init_count must be >= 1")
        if self.init_radius is not None and not self.init_radius > 0:
            raise ConfigError("init_radius must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.slack_tol >= 0:
            raise ConfigError("slack_tol must be nonnegative")
        if self.zeta_samples < 1 or any(r < 0 for r in self.zeta_radii) or not self.zeta_radii:
            raise ConfigError("zeta_radii must be a non-empty list of nonnegative radii and zeta_samples >= 1")
        if self.zeta_shape not in ("ball", "circle"):
            raise ConfigError("zeta_shape must be 'ball' or 'circle'")
        if self.backend not in (None, "numba", "numpy", "python"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        dims = min(k, 2)
        for name in ("grid_min", "grid_max", "grid_step"):
            if len(getattr(self, name)) != dims:
                raise ConfigError(f"{name} needs {dims} entries for k={k}")
        for lo, hi, st in zip(self.grid_min, self.grid_max, self.grid_step):
            if not st > 0:
                raise ConfigError("grid_step must be positive")
            if hi < lo:
                raise ConfigError("grid_max must not be below grid_min")
        try:
            self.base_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def k(self) -> int:
        return self.y_hat.size

    @property
    def radius(self) -> float:
        """Radius of the initial-condition ball; twice ``||y_hat - mu||`` unless set."""
        if self.init_radius is not None:
            return float(self.init_radius)
        r = 2.0 * float(np.linalg.norm(self.y_hat - self.mu))
        return r if r > 0 else 1.0

    def base_params(self) -> GameParams:
        """Game parameters with ``y_attack`` from the config (``mu`` if absent)."""
        y_a = self.mu if self.y_attack is None else self.y_attack
        return GameParams(self.y_hat, self.mu, self.zeta, y_a, self.var_y, self.var_yhat)

    def params(self) -> GameParams:
        if self.y_attack is None:
            raise ConfigError("config needs y_attack")
        return self.base_params()

    def with_overrides(self, **changes) -> "SweepConfig":
        ibr_keys = {"max_iter", "alpha_tol", "tau_one", "divergence_norm"}
        ibr_changes = {k: v for k, v in changes.items() if k in ibr_keys and v is not None}
        rest = {k: v for k, v in changes.items() if k not in ibr_keys and v is not None}
        try:
            ibr = replace(self.ibr, **ibr_changes)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return replace(self, ibr=ibr, **rest)


_VECTORS = ("y_hat", "mu", "zeta", "y_attack", "y_bar_0")
_IBR_KEYS = ("max_iter", "alpha_tol", "tau_one", "divergence_norm")


def _vector(name: str, value: Any) -> np.ndarray:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        raise ConfigError(f"{name} must be a non-empty array of numbers")
    v = np.asarray(value, dtype=np.float64)
    if not np.isfinite(v).all():
        raise ConfigError(f"{name} has non-finite entries")
    return v


def _per_axis(name: str, value: Any, dims: int) -> tuple:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value] * dims
    if not isinstance(value, list):
        raise ConfigError(f"{name} must be a number or an array")
    out = tuple(float(x) for x in value)
    if not all(math.isfinite(x) for x in out):
        raise ConfigError(f"{name} has non-finite entries")
    return out


def config_from_dict(raw: dict) -> SweepConfig:
    """Build and validate a SweepConfig from a parsed JSON object."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(SweepConfig)} - {"ibr"} | set(_IBR_KEYS) | {"zeta_radius"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for name in ("y_hat", "mu", "zeta"):
        if name not in raw:
            raise ConfigError(f"config is missing {name}")

    kw: dict = {}
    for name in _VECTORS:
        if raw.get(name) is not None:
            kw[name] = _vector(name, raw[name])
    dims = min(kw["y_hat"].size, 2)
    for name in ("grid_min", "grid_max", "grid_step"):
        if name in raw:
            kw[name] = _per_axis(name, raw[name], dims)
        else:
            default = {"grid_min": -1.0, "grid_max": 1.0, "grid_step": 0.05}[name]
            kw[name] = (default,) * dims
    if "zeta_radius" in raw and "zeta_radii" in raw:
        raise ConfigError("give zeta_radius or zeta_radii, not both")
    if "zeta_radius" in raw:
        kw["zeta_radii"] = _per_axis("zeta_radius", raw["zeta_radius"], 1)
    elif "zeta_radii" in raw:
        kw["zeta_radii"] = _per_axis("zeta_radii", raw["zeta_radii"], 1)

    typed = {
        "init_count": int, "seed": int, "zeta_samples": int, "zeta_seed": int, "workers": int,
        "init_radius": float, "slack_tol": float, "epsilon": float, "var_y": float, "var_yhat": float,
        "mode": str, "zeta_shape": str, "backend": str,
    }
    for name, kind in typed.items():
        if raw.get(name) is None:
            continue
        value = raw[name]
        if kind is str and not isinstance(value, str):
            raise ConfigError(f"{name} must be a string")
        if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
            raise ConfigError(f"{name} must be an integer")
        if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
            raise ConfigError(f"{name} must be a number")
        kw[name] = kind(value)

    ibr_kw = {}
    for name in _IBR_KEYS:
        if raw.get(name) is not None:
            ibr_kw[name] = raw[name]
    try:
        kw["ibr"] = IbrConfig(**ibr_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid IBR settings: {exc}") from exc
    try:
        return SweepConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SweepConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return config_from_dict(raw)
