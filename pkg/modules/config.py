from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, FrozenSet, Mapping, Optional

import numpy as np

from modules.reservoir import (
    DEFAULT_BANDWIDTH_OVER_KAPPA,
    DEFAULT_CENTER_OVER_KAPPA,
    DEFAULT_N_MODES,
)
from modules.states import DEFAULT_ALPHA, DEFAULT_BETA, EffectiveParams

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("csv", "json", "xlsx")
GAMMA_GRID_KEYS = frozenset({"gamma_min", "gamma_max", "gamma_steps"})
T_GRID_KEYS = frozenset({"t_min", "t_max", "t_steps"})


@dataclass(frozen=True)
class RunConfig:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    gamma: float = 0.0
    kappa: float = 1.0
    t_min: float = 0.0
    t_max: float = 6.0
    t_steps: int = 601
    gamma_min: float = 0.0
    gamma_max: float = 0.0
    gamma_steps: int = 1
    output_format: str = "csv"
    output_path: Optional[str] = None
    seed: int = 42
    samples: int = 1000
    n_modes: int = DEFAULT_N_MODES
    bandwidth_over_kappa: float = DEFAULT_BANDWIDTH_OVER_KAPPA
    center_over_kappa: float = DEFAULT_CENTER_OVER_KAPPA
    eta: float = 1.3
    amplitude_tol: float = 5e-3
    population_tol: float = 5e-3
    phase_tol: float = 1e-10
    explicit: FrozenSet[str] = field(default=frozenset(), compare=False, repr=False)

    def validate(self) -> "RunConfig":
        if self.t_steps < 1 or self.gamma_steps < 1:
            raise ValueError("Time and gamma grids need at least one point.")
        if self.t_min < 0:
            raise ValueError(f"t_min must be nonnegative, got {self.t_min}.")
        if self.t_max < self.t_min:
            raise ValueError(f"t_max ({self.t_max}) is below t_min ({self.t_min}).")
        for name in ("gamma_min", "gamma_max"):
            value = getattr(self, name)
            if not 0.0 <= value <= math.pi + 1e-12:
                raise ValueError(f"{name} must lie in [0, pi], got {value}.")
        if self.gamma_max < self.gamma_min:
            raise ValueError("gamma_max is below gamma_min.")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"Unknown output format '{self.output_format}'; use one of {', '.join(OUTPUT_FORMATS)}.")
        if self.samples < 1:
            raise ValueError("samples must be at least 1.")
        if self.n_modes < 2 or self.bandwidth_over_kappa <= 0:
            raise ValueError("Reservoir needs n_modes >= 2 and a positive bandwidth.")
        self.effective_params()
        return self

    def effective_params(self) -> EffectiveParams:
        return EffectiveParams(alpha=self.alpha, beta=self.beta, gamma=self.gamma, kappa=self.kappa)

    def t_values(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.t_steps)

    def gamma_values(self) -> np.ndarray:
        """The gamma grid when one was configured, otherwise just ``gamma``."""
        if self.explicit & GAMMA_GRID_KEYS:
            return np.linspace(self.gamma_min, self.gamma_max, self.gamma_steps)
        return np.array([self.gamma])

    def sets_time_grid(self) -> bool:
        return bool(self.explicit & T_GRID_KEYS)

    def sets_gamma_grid(self) -> bool:
        return bool(self.explicit & GAMMA_GRID_KEYS)


_FIELD_TYPES = {f.name: f.default for f in fields(RunConfig) if f.name != "explicit"}


def _normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return {"format": "output_format", "out": "output_path"}.get(key, key)


def _coerce(key: str, value: object) -> object:
    default = _FIELD_TYPES[key]
    if value is None or isinstance(default, str) or key == "output_path":
        return None if value is None else str(value).strip()
    if isinstance(default, int) and not isinstance(default, bool):
        number = float(value)
        if number != int(number):
            raise ValueError(f"{key} must be an integer, got {value}.")
        return int(number)
    return float(value)


def parse_config_file(path: str) -> Dict[str, str]:
    """Read ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values: Dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{number}: expected key=value, got '{raw.strip()}'.")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def build_config(
    file_values: Optional[Mapping[str, object]] = None, overrides: Optional[Mapping[str, object]] = None
) -> RunConfig:
    """Defaults, then file values, then overrides (``None`` overrides are ignored)."""
    merged: Dict[str, object] = {}
    for source in (file_values or {}, overrides or {}):
        for raw_key, value in source.items():
            if value is None:
                continue
            key = _normalize_key(raw_key)
            if key not in _FIELD_TYPES:
                raise ValueError(f"Unknown configuration key '{raw_key}'.")
            try:
                merged[key] = _coerce(key, value)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"Bad value for {key}: {value!r} ({exc}).") from exc

    if "alpha" in merged and "beta" not in merged:
        merged["beta"] = math.sqrt(max(0.0, 1.0 - float(merged["alpha"]) ** 2))
    elif "beta" in merged and "alpha" not in merged:
        merged["alpha"] = math.sqrt(max(0.0, 1.0 - float(merged["beta"]) ** 2))

    config = replace(RunConfig(), **merged, explicit=frozenset(merged))
    logger.debug("Run configuration: %s", config)
    return config.validate()
