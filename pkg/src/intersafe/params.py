"""Tunable analysis parameters with the package defaults.

TTC/PET thresholds follow the published working values (10 m candidate
distance, 10 s PET recording window, severe at TTC <= 2 s / PET <= 3 s);
the tolerances that make the geometry numerically usable (v_stop,
theta_par, w_lat, clearance lengths) are engineering choices documented
in the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .model import ObjectClass

_DEFAULT_CLEARANCE = {
    "pedestrian": 0.5,
    "car": 4.5,
    "bus": 12.0,
    "truck": 12.0,
    "motorcyclist": 2.2,
}


@dataclass(frozen=True)
class AnalysisParams:
    d_max: float = 10.0              # candidate pair distance gate (m)
    k_min: int = 3                   # consecutive frames before a pair is surfaced
    v_stop: float = 0.2              # below this speed an object counts as stationary (m/s)
    theta_par_deg: float = 5.0       # motion directions within this angle are parallel
    w_lat: float = 1.0               # lateral tolerance for "same line" tests (m)
    l_clear: dict = field(default_factory=lambda: dict(_DEFAULT_CLEARANCE))
    ttc_severe: float = 2.0          # severe-event TTC threshold (s)
    pet_severe: float = 3.0          # severe-event PET threshold (s)
    pet_window: float = 10.0         # PET recording threshold (s)
    episode_gap: float = 10.0        # events of one pair closer than this merge (s)
    theta_cw: float = 0.5            # crosswalk containment fraction for ped phase
    t_grace: float = 1.0             # tolerated walk-signal overlap before jaywalk (s)
    include_v2v_following: bool = True
    frame_dt: float = 0.1            # nominal sampling interval (s)
    smooth_window: int = 0           # odd moving-average window, 0 disables

    def __post_init__(self):
        if self.d_max <= 0 or self.k_min < 1 or self.v_stop < 0:
            raise ConfigError("invalid candidate-filter parameters")
        if not 0 < self.theta_par_deg < 90 or self.w_lat < 0:
            raise ConfigError("invalid parallel-line tolerances")
        if self.pet_window < 0 or self.ttc_severe < 0 or self.pet_severe < 0:
            raise ConfigError("thresholds must be non-negative")
        if self.smooth_window and (self.smooth_window < 3 or self.smooth_window % 2 == 0):
            raise ConfigError("smooth_window must be odd and >= 3 (or 0)")
        if not 0 < self.theta_cw <= 1:
            raise ConfigError("theta_cw must be in (0, 1]")

    @property
    def sin_theta_par(self) -> float:
        return math.sin(math.radians(self.theta_par_deg))

    def clearance_for(self, cls: ObjectClass) -> float:
        return float(self.l_clear.get(cls.value, _DEFAULT_CLEARANCE["car"]))

    @classmethod
    def from_dict(cls, overrides: dict) -> "AnalysisParams":
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ConfigError(f"unknown parameters: {sorted(unknown)}")
        if "l_clear" in overrides:
            merged = dict(_DEFAULT_CLEARANCE)
            merged.update(overrides["l_clear"])
            overrides = {**overrides, "l_clear": merged}
        return cls(**overrides)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = dict(sorted(v.items())) if isinstance(v, dict) else v
        return out
