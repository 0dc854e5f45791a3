"""Tolerance and sampling configuration shared by every stage."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

CONFIG_ENV_VAR = "MATEFORGE_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances (model units / radians) and sweep sampling.

    ``contact_tol`` and ``penetration_tol`` may be given as absolute values;
    when left as None they are derived from the bounding-box diagonal of the
    geometry under test via ``contact_rel`` / ``penetration_rel``.
    """

    angle_tol: float = 1e-3
    dist_tol: float = 1e-3
    contact_tol: Optional[float] = None
    contact_rel: float = 1e-3
    penetration_tol: Optional[float] = None
    penetration_rel: float = 1e-3
    sweep_angles_deg: tuple = (5.0, 10.0, 20.0, 45.0)
    sweep_translation_fracs: tuple = (0.005, 0.01, 0.02, 0.05)
    containment_samples: int = 64
    require_axis_on_candidates: bool = True
    smoothing: float = 0.01
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sweep_angles_deg", tuple(float(a) for a in self.sweep_angles_deg))
        object.__setattr__(
            self, "sweep_translation_fracs", tuple(float(a) for a in self.sweep_translation_fracs)
        )
        for name in ("angle_tol", "dist_tol", "contact_rel", "penetration_rel"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("contact_tol", "penetration_tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.sweep_angles_deg or any(a <= 0 for a in self.sweep_angles_deg):
            raise ConfigError("sweep_angles_deg must be nonempty and positive")
        if not self.sweep_translation_fracs or any(a <= 0 for a in self.sweep_translation_fracs):
            raise ConfigError("sweep_translation_fracs must be nonempty and positive")
        if self.containment_samples < 0:
            raise ConfigError("containment_samples must be >= 0")
        if not 0 <= self.smoothing < 1 / 3:
            raise ConfigError("smoothing must lie in [0, 1/3)")

    def contact_tol_for(self, diagonal: float) -> float:
        if self.contact_tol is not None:
            return self.contact_tol
        return self.contact_rel * diagonal

    def penetration_tol_for(self, diagonal: float) -> float:
        if self.penetration_tol is not None:
            return self.penetration_tol
        return self.penetration_rel * diagonal

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sweep_angles_deg"] = list(self.sweep_angles_deg)
        d["sweep_translation_fracs"] = list(self.sweep_translation_fracs)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ToleranceConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


DEFAULT_CONFIG = ToleranceConfig()


def load_config(path: Optional[str] = None, seed: Optional[int] = None) -> ToleranceConfig:
    """Read a JSON config from ``path`` or ``$MATEFORGE_CONFIG``; defaults otherwise."""
    path = path or os.environ.get(CONFIG_ENV_VAR)
    data: dict = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    if seed is not None:
        data = {**data, "seed": seed}
    try:
        return ToleranceConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
