"""Domain model: tracked objects, intersection geometry, and the
movement / phase / crosswalk-role classifiers built on top of them.

Conventions used throughout the package:
  * coordinates are meters in a rectilinear plane, times are seconds
    since local midnight at 0.1 s resolution;
  * compass bearings are degrees clockwise from north (N=0, E=90);
  * legs are identified as "N", "E", "S", "W".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import ConfigError

LEGS = ("N", "E", "S", "W")
PED_PHASES = (0, 2, 4, 6, 8)
VEHICLE_PHASES = (1, 2, 3, 4, 5, 6, 7, 8)

#: compass order used for rotating between adjacent legs (clockwise)
_LEG_ORDER = {"N": 0, "E": 1, "S": 2, "W": 3}
_LEG_AT = {v: k for k, v in _LEG_ORDER.items()}

#: entering from leg X implies travelling toward the opposite compass point
BOUND_OF_ENTRY_LEG = {"S": "NB", "N": "SB", "W": "EB", "E": "WB"}
ENTRY_LEG_OF_BOUND = {v: k for k, v in BOUND_OF_ENTRY_LEG.items()}


class ObjectClass(str, Enum):
    PEDESTRIAN = "pedestrian"
    CAR = "car"
    BUS = "bus"
    TRUCK = "truck"
    MOTORCYCLIST = "motorcyclist"

    @property
    def is_vehicle(self) -> bool:
        return self is not ObjectClass.PEDESTRIAN


class Turn(str, Enum):
    LEFT = "L"
    THROUGH = "T"
    RIGHT = "R"


class CrosswalkRole(str, Enum):
    NEAR = "near"
    FAR = "far"
    ADJACENT_PARALLEL = "adjacent_parallel"
    PARALLEL_OPPOSITE = "parallel_opposite"


BOUNDS = ("NB", "SB", "EB", "WB")


@dataclass(frozen=True)
class MovementCode:
    """Compass bound plus turn, rendered like "WBT" or "SBR"."""

    bound: str
    turn: Turn

    def __post_init__(self):
        if self.bound not in BOUNDS:
            raise ValueError(f"invalid bound {self.bound!r}")

    @property
    def code(self) -> str:
        return f"{self.bound}{self.turn.value}"

    @classmethod
    def from_code(cls, code: str) -> "MovementCode":
        if len(code) != 3 or code[:2] not in BOUNDS:
            raise ValueError(f"invalid movement code {code!r}")
        return cls(code[:2], Turn(code[2]))

    def __str__(self) -> str:
        return self.code


ALL_MOVEMENTS = tuple(
    MovementCode(b, t) for b in BOUNDS for t in (Turn.LEFT, Turn.THROUGH, Turn.RIGHT)
)


@dataclass(frozen=True)
class TrackPoint:
    """One timestamped detection of a tracked object."""

    object_id: str
    cls: ObjectClass
    t: float
    x: float
    y: float
    vx: float | None = None
    vy: float | None = None

    def __post_init__(self):
        if self.t < 0 or not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"invalid track point at t={self.t}")
        if self.vx is not None and self.vy is not None:
            if not math.isfinite(math.hypot(self.vx, self.vy)):
                raise ValueError("non-finite velocity")

    @property
    def speed(self) -> float | None:
        if self.vx is None or self.vy is None:
            return None
        return math.hypot(self.vx, self.vy)


class Trajectory:
    """Time-ordered track of one object, stored as numpy columns.

    Missing velocities are NaN until filled by velocity estimation.
    """

    __slots__ = ("object_id", "cls", "t", "x", "y", "vx", "vy")

    def __init__(self, object_id: str, cls: ObjectClass, t, x, y, vx=None, vy=None):
        self.object_id = str(object_id)
        self.cls = ObjectClass(cls)
        self.t = np.asarray(t, dtype=np.float64)
        self.x = np.asarray(x, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        n = len(self.t)
        self.vx = np.full(n, np.nan) if vx is None else np.asarray(vx, dtype=np.float64)
        self.vy = np.full(n, np.nan) if vy is None else np.asarray(vy, dtype=np.float64)
        if not (len(self.x) == len(self.y) == len(self.vx) == len(self.vy) == n):
            raise ValueError("column length mismatch")
        if n and (np.diff(self.t) <= 0).any():
            raise ValueError(f"timestamps not strictly increasing for {object_id}")
        if n and ((self.t < 0).any() or not np.isfinite(self.x).all()
                  or not np.isfinite(self.y).all()):
            raise ValueError(f"invalid coordinates for {object_id}")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def has_velocities(self) -> bool:
        return bool(np.isfinite(self.vx).all() and np.isfinite(self.vy).all())

    @property
    def points(self) -> list[TrackPoint]:
        out = []
        for i in range(len(self.t)):
            vx = self.vx[i] if math.isfinite(self.vx[i]) else None
            vy = self.vy[i] if math.isfinite(self.vy[i]) else None
            out.append(TrackPoint(self.object_id, self.cls, float(self.t[i]),
                                  float(self.x[i]), float(self.y[i]), vx, vy))
        return out

    @classmethod
    def from_points(cls, points: list[TrackPoint]) -> "Trajectory":
        if not points:
            raise ValueError("empty trajectory")
        ids = {p.object_id for p in points}
        classes = {p.cls for p in points}
        if len(ids) > 1 or len(classes) > 1:
            raise ValueError("points from multiple objects")
        pts = sorted(points, key=lambda p: p.t)
        return cls(
            pts[0].object_id, pts[0].cls,
            [p.t for p in pts], [p.x for p in pts], [p.y for p in pts],
            [np.nan if p.vx is None else p.vx for p in pts],
            [np.nan if p.vy is None else p.vy for p in pts],
        )


def _as_polygon(vertices) -> np.ndarray:
    poly = np.asarray(vertices, dtype=np.float64)
    if poly.ndim != 2 or poly.shape[1] != 2 or poly.shape[0] < 3:
        raise ConfigError("polygon needs at least 3 (x, y) vertices")
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    if not np.isfinite(poly).all() or area <= 0.0:
        raise ConfigError("degenerate polygon")
    return poly


@dataclass(frozen=True)
class IntersectionConfig:
    """Geometry and phase mapping of one four-legged intersection.

    ``through_phases`` (bound -> even phase) and ``ped_phase_of_leg``
    (leg -> even phase) are explicit inputs: the numbering of opposing
    movements is a site convention, not something derivable from geometry.
    """

    center: tuple[float, float]
    leg_bearings: dict[str, float]
    crosswalk_polygons: dict[str, np.ndarray]
    analysis_region: np.ndarray
    major_axis: str
    mesh_cell_size: float
    crosswalk_buffer: float
    through_phases: dict[str, int]
    ped_phase_of_leg: dict[str, int]
    right_hand_traffic: bool = True
    entry_band_width: float = 2.0

    def __post_init__(self):
        if set(self.leg_bearings) != set(LEGS) or set(self.crosswalk_polygons) != set(LEGS):
            raise ConfigError("exactly four legs N/E/S/W required")
        if self.major_axis not in ("NS", "EW"):
            raise ConfigError("major_axis must be 'NS' or 'EW'")
        if self.mesh_cell_size <= 0:
            raise ConfigError("mesh_cell_size must be > 0")
        if self.crosswalk_buffer < 0:
            raise ConfigError("crosswalk_buffer must be >= 0")
        object.__setattr__(self, "analysis_region", _as_polygon(self.analysis_region))
        object.__setattr__(
            self, "crosswalk_polygons",
            {leg: _as_polygon(p) for leg, p in self.crosswalk_polygons.items()})
        major = ("NB", "SB") if self.major_axis == "NS" else ("EB", "WB")
        minor = ("EB", "WB") if self.major_axis == "NS" else ("NB", "SB")
        if set(self.through_phases) != set(BOUNDS):
            raise ConfigError("through_phases must map all four bounds")
        if {self.through_phases[b] for b in major} != {2, 6}:
            raise ConfigError("major-road bounds must map to phases 2 and 6")
        if {self.through_phases[b] for b in minor} != {4, 8}:
            raise ConfigError("minor-road bounds must map to phases 4 and 8")
        if set(self.ped_phase_of_leg) != set(LEGS) \
                or sorted(self.ped_phase_of_leg.values()) != [2, 4, 6, 8]:
            raise ConfigError("ped_phase_of_leg must assign phases 2/4/6/8 to the legs")

    @classmethod
    def from_dict(cls, raw: dict) -> "IntersectionConfig":
        try:
            return cls(
                center=tuple(raw["center"]),
                leg_bearings={k: float(v) for k, v in raw["leg_bearings"].items()},
                crosswalk_polygons={k: np.asarray(v, dtype=np.float64)
                                    for k, v in raw["crosswalk_polygons"].items()},
                analysis_region=np.asarray(raw["analysis_region"], dtype=np.float64),
                major_axis=raw["major_axis"],
                mesh_cell_size=float(raw["mesh_cell_size"]),
                crosswalk_buffer=float(raw["crosswalk_buffer"]),
                through_phases={k: int(v) for k, v in raw["through_phases"].items()},
                ped_phase_of_leg={k: int(v) for k, v in raw["ped_phase_of_leg"].items()},
                right_hand_traffic=bool(raw.get("right_hand_traffic", True)),
                entry_band_width=float(raw.get("entry_band_width", 2.0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid intersection config: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "IntersectionConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read intersection config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def region_bbox(self) -> tuple[float, float, float, float]:
        r = self.analysis_region
        return (float(r[:, 0].min()), float(r[:, 1].min()),
                float(r[:, 0].max()), float(r[:, 1].max()))


@dataclass(frozen=True)
class ConflictEvent:
    """One detected P2V or V2V interaction.

    Participants are ordered so id_a < id_b; ``movement`` is always the
    vehicle participant's movement (unset for V2V events).
    """

    kind: str
    metric: str
    value: float
    t: float
    x: float
    y: float
    id_a: str
    cls_a: ObjectClass
    id_b: str
    cls_b: ObjectClass
    severe: bool
    movement: MovementCode | None = None
    p2v_type: int | None = None
    ped_role: CrosswalkRole | None = None
    jaywalk: bool = False

    def __post_init__(self):
        if self.kind not in ("P2V", "V2V"):
            raise ValueError(f"invalid kind {self.kind!r}")
        if self.metric not in ("TTC", "PET"):
            raise ValueError(f"invalid metric {self.metric!r}")

    @property
    def pedestrian_id(self) -> str | None:
        if self.kind != "P2V":
            return None
        return self.id_a if self.cls_a is ObjectClass.PEDESTRIAN else self.id_b

    @property
    def vehicle_id(self) -> str | None:
        if self.kind != "P2V":
            return None
        return self.id_b if self.cls_a is ObjectClass.PEDESTRIAN else self.id_a


def event_kind(cls_a: ObjectClass, cls_b: ObjectClass) -> str | None:
    """P2V, V2V, or None for the (excluded) pedestrian-pedestrian case."""
    peds = (cls_a is ObjectClass.PEDESTRIAN) + (cls_b is ObjectClass.PEDESTRIAN)
    if peds == 2:
        return None
    return "P2V" if peds == 1 else "V2V"


# ---------------------------------------------------------------------------
# classification operations
# ---------------------------------------------------------------------------

def bearing_from_center(cfg: IntersectionConfig, x: float, y: float) -> float:
    dx = x - cfg.center[0]
    dy = y - cfg.center[1]
    return math.degrees(math.atan2(dx, dy)) % 360.0


def nearest_leg(cfg: IntersectionConfig, x: float, y: float) -> str:
    b = bearing_from_center(cfg, x, y)
    best, best_d = None, 1e9
    for leg in LEGS:
        d = abs((b - cfg.leg_bearings[leg] + 180.0) % 360.0 - 180.0)
        if d < best_d:
            best, best_d = leg, d
    return best


def rotate_leg(leg: str, quarter_turns_cw: int) -> str:
    return _LEG_AT[(_LEG_ORDER[leg] + quarter_turns_cw) % 4]


def in_region_mask(traj: Trajectory, cfg: IntersectionConfig) -> np.ndarray:
    region = cfg.analysis_region
    return _kernels.points_in_polygon(traj.x, traj.y, region[:, 0], region[:, 1])


def classify_vehicle_movement(traj: Trajectory,
                              cfg: IntersectionConfig) -> MovementCode | None:
    """Entry/exit-leg movement classification; None when unclassifiable.

    Entry and exit legs are read from the first and last in-region points,
    which must sit inside a band of ``entry_band_width`` meters from the
    region boundary (otherwise the track was clipped mid-intersection).
    """
    if not traj.cls.is_vehicle:
        raise ValueError("classify_vehicle_movement expects a vehicle trajectory")
    mask = in_region_mask(traj, cfg)
    idx = np.nonzero(mask)[0]
    if len(idx) < 2:
        return None
    first, last = idx[0], idx[-1]
    region = cfg.analysis_region
    d = _kernels.polygon_edge_distance(
        np.array([traj.x[first], traj.x[last]]),
        np.array([traj.y[first], traj.y[last]]),
        region[:, 0], region[:, 1])
    if d[0] > cfg.entry_band_width or d[1] > cfg.entry_band_width:
        return None
    entry = nearest_leg(cfg, traj.x[first], traj.y[first])
    exit_ = nearest_leg(cfg, traj.x[last], traj.y[last])
    if entry == exit_:
        return None
    bound = BOUND_OF_ENTRY_LEG[entry]
    delta = (_LEG_ORDER[exit_] - _LEG_ORDER[entry]) % 4
    if delta == 2:
        turn = Turn.THROUGH
    elif delta == 3:
        turn = Turn.RIGHT
    else:
        turn = Turn.LEFT
    return MovementCode(bound, turn)


def vehicle_phase(mv: MovementCode, cfg: IntersectionConfig) -> int:
    """NEMA-style phase: T/R share the bound's through phase, L takes the
    paired odd protected phase (2->5, 6->1, 4->7, 8->3)."""
    tp = cfg.through_phases[mv.bound]
    if mv.turn is Turn.LEFT:
        return (tp + 2) % 8 + 1
    return tp


def movement_phase_table(cfg: IntersectionConfig) -> dict[str, int]:
    return {mv.code: vehicle_phase(mv, cfg) for mv in ALL_MOVEMENTS}


def crosswalk_fractions(traj: Trajectory, cfg: IntersectionConfig) -> dict[str, float]:
    """Fraction of in-region points inside each (buffer-dilated) crosswalk."""
    mask = in_region_mask(traj, cfg)
    n = int(mask.sum())
    if n == 0:
        return {leg: 0.0 for leg in LEGS}
    xs = traj.x[mask]
    ys = traj.y[mask]
    out = {}
    for leg in LEGS:
        poly = cfg.crosswalk_polygons[leg]
        inside = _kernels.points_in_polygon(xs, ys, poly[:, 0], poly[:, 1])
        if cfg.crosswalk_buffer > 0:
            near = _kernels.polygon_edge_distance(
                xs, ys, poly[:, 0], poly[:, 1]) <= cfg.crosswalk_buffer
            inside = inside | near
        out[leg] = float(inside.sum()) / n
    return out


def pedestrian_phase(traj: Trajectory, cfg: IntersectionConfig,
                     theta_cw: float = 0.5) -> int:
    """Even crossing phase of the dominant crosswalk, or 0 when no single
    crosswalk holds at least ``theta_cw`` of the in-region points
    (median walkers, diagonal crossers, off-crosswalk paths)."""
    if traj.cls is not ObjectClass.PEDESTRIAN:
        raise ValueError("pedestrian_phase expects a pedestrian trajectory")
    fractions = crosswalk_fractions(traj, cfg)
    leg = max(LEGS, key=lambda L: fractions[L])
    if fractions[leg] >= theta_cw and fractions[leg] > 0.0:
        return cfg.ped_phase_of_leg[leg]
    return 0


def crosswalk_role(mv: MovementCode, leg: str,
                   cfg: IntersectionConfig) -> CrosswalkRole:
    """Role of a crosswalk leg relative to a vehicle movement's bound."""
    if leg not in LEGS:
        raise ValueError(f"invalid leg {leg!r}")
    entry = ENTRY_LEG_OF_BOUND[mv.bound]
    turn_side = -1 if cfg.right_hand_traffic else 1
    if leg == entry:
        return CrosswalkRole.NEAR
    if leg == rotate_leg(entry, 2):
        return CrosswalkRole.FAR
    if leg == rotate_leg(entry, turn_side):
        return CrosswalkRole.ADJACENT_PARALLEL
    return CrosswalkRole.PARALLEL_OPPOSITE
