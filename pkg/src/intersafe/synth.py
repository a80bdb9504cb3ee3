"""Deterministic synthetic-scenario generator.

Produces trajectory files with known ground truth: Poisson background
traffic (crosswalk pedestrians, lane-following vehicles, the occasional
jaywalker) plus scripted conflicts whose analytic TTC/PET at the scripted
instant equals the manifest value by construction.  Same seed, same
bytes.

Scripted conflict constructions (straight-line kinematics throughout):

  ttc1  a mover approaches a stationary object dead ahead; the mover's
        track is truncated (tracker-dropout style) at range speed*value,
        so the episode's minimum TTC is exactly the target.
  ttc2  a faster follower closes on a leader along one lane line; both
        tracks truncate when the gap is dv*value.
  ttc3  crossing paths: the vehicle passes the conflict point ``value``
        seconds before the pedestrian arrives (a true near-miss, closer
        than the clearance allowance, so the TTC stays finite and bottoms
        out at the separation).
  pet   the leader sweeps the conflict cell and the follower enters it
        exactly ``value`` seconds after the leader left.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .ingest import SignalInterval, SignalLog
from .model import (
    ENTRY_LEG_OF_BOUND,
    IntersectionConfig,
    MovementCode,
    ObjectClass,
    Trajectory,
    Turn,
    crosswalk_role,
)
from .params import AnalysisParams

GRID = 0.1

_DIR = {"NB": (0.0, 1.0), "SB": (0.0, -1.0), "EB": (1.0, 0.0), "WB": (-1.0, 0.0)}

MANIFEST_HEADER = ["script", "metric", "kind", "id_a", "id_b", "value", "t", "x", "y"]


def default_intersection() -> IntersectionConfig:
    raw = json.loads(
        resources.files("intersafe.data").joinpath("intersection.json").read_text())
    return IntersectionConfig.from_dict(raw)


def _snap(t: float) -> float:
    return round(t * 10.0) / 10.0


def _right_of(d: tuple[float, float]) -> tuple[float, float]:
    return (d[1], -d[0])


@dataclass(frozen=True)
class ConflictScript:
    kind: str                       # ttc1 | ttc2 | ttc3 | pet
    t: float                        # requested conflict time (s since midnight)
    value: float                    # target metric value (s)
    movement: str = "WBT"           # vehicle movement providing the geometry
    ped_leg: str | None = None      # pedestrian crosswalk leg (ttc3/pet P2V)
    ped_signal: str | None = None   # place the crossing in this signal state
    cls_a: str = "car"
    cls_b: str = "pedestrian"
    speed_a: float = 8.0
    speed_b: float = 1.4

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class SurgeWindow:
    start: float
    end: float
    multiplier: float
    mode: str = "pedestrian"        # pedestrian | vehicle | both

    def __post_init__(self):
        if self.multiplier < 1.0 or self.end <= self.start:
            raise ConfigError("surge window needs end > start and multiplier >= 1")


@dataclass(frozen=True)
class SignalCycleSpec:
    cycle: float = 90.0
    walk: float = 20.0

    def __post_init__(self):
        if not 0 < self.walk < self.cycle:
            raise ConfigError("walk must be shorter than the cycle")


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int
    t_start: float
    t_end: float
    ped_rate_per_hour: dict = field(default_factory=dict)      # leg -> rate
    vehicle_rate_per_hour: dict = field(default_factory=dict)  # movement -> rate
    jaywalk_rate_per_hour: float = 0.0
    surges: tuple = ()
    scripts: tuple = ()
    signal: SignalCycleSpec | None = None
    lane_offset: float = 3.5
    approach_length: float = 25.0

    def __post_init__(self):
        if self.t_end <= self.t_start:
            raise ConfigError("scenario needs t_end > t_start")

    @classmethod
    def from_json(cls, path) -> "ScenarioSpec":
        raw = json.loads(Path(path).read_text())
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioSpec":
        try:
            return cls(
                seed=int(raw["seed"]),
                t_start=float(raw["t_start"]),
                t_end=float(raw["t_end"]),
                ped_rate_per_hour={k: float(v) for k, v in
                                   raw.get("ped_rate_per_hour", {}).items()},
                vehicle_rate_per_hour={k: float(v) for k, v in
                                       raw.get("vehicle_rate_per_hour", {}).items()},
                jaywalk_rate_per_hour=float(raw.get("jaywalk_rate_per_hour", 0.0)),
                surges=tuple(SurgeWindow(**s) for s in raw.get("surges", [])),
                scripts=tuple(ConflictScript(**s) for s in raw.get("scripts", [])),
                signal=SignalCycleSpec(**raw["signal"]) if raw.get("signal") else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid scenario spec: {exc}") from exc

    def to_dict(self) -> dict:
        out = {
            "seed": self.seed,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "ped_rate_per_hour": dict(sorted(self.ped_rate_per_hour.items())),
            "vehicle_rate_per_hour": dict(sorted(self.vehicle_rate_per_hour.items())),
            "jaywalk_rate_per_hour": self.jaywalk_rate_per_hour,
            "surges": [s.__dict__ for s in self.surges],
            "scripts": [s.to_dict() for s in self.scripts],
        }
        if self.signal:
            out["signal"] = {"cycle": self.signal.cycle, "walk": self.signal.walk}
        return out


@dataclass(frozen=True)
class ManifestRow:
    script: str
    metric: str
    kind: str
    id_a: str
    id_b: str
    value: float
    t: float
    x: float
    y: float


@dataclass
class SynthResult:
    trajectories: list[Trajectory]
    manifest: list[ManifestRow]
    signal_log: SignalLog | None
    cfg: IntersectionConfig


# ---------------------------------------------------------------------------
# path construction
# ---------------------------------------------------------------------------

def _vehicle_path(spec: ScenarioSpec, cfg: IntersectionConfig,
                  mv: MovementCode) -> list[tuple[float, float]]:
    """Lane-following polyline for one movement (center-relative)."""
    cx, cy = cfg.center
    d = _DIR[mv.bound]
    r = _right_of(d)
    lane = (r[0] * spec.lane_offset, r[1] * spec.lane_offset)
    start = (cx - d[0] * spec.approach_length + lane[0],
             cy - d[1] * spec.approach_length + lane[1])
    if mv.turn is Turn.THROUGH:
        end = (cx + d[0] * spec.approach_length + lane[0],
               cy + d[1] * spec.approach_length + lane[1])
        return [start, end]
    if mv.turn is Turn.RIGHT:
        ed = r
    else:
        ed = (-r[0], -r[1])
    exit_lane = (_right_of(ed)[0] * spec.lane_offset,
                 _right_of(ed)[1] * spec.lane_offset)
    corner = (cx + lane[0] + exit_lane[0], cy + lane[1] + exit_lane[1])
    end = (corner[0] + ed[0] * spec.approach_length,
           corner[1] + ed[1] * spec.approach_length)
    return [start, corner, end]


def _ped_path(cfg: IntersectionConfig, leg: str,
              reverse: bool = False, margin: float = 2.0) -> list[tuple[float, float]]:
    """Straight crossing along a leg crosswalk, extended past both ends."""
    poly = cfg.crosswalk_polygons[leg]
    x0, y0 = poly[:, 0].min(), poly[:, 1].min()
    x1, y1 = poly[:, 0].max(), poly[:, 1].max()
    if (x1 - x0) >= (y1 - y0):       # crosswalk runs east-west, ped walks E-W
        mid = 0.5 * (y0 + y1)
        a, b = (x0 - margin, mid), (x1 + margin, mid)
    else:
        mid = 0.5 * (x0 + x1)
        a, b = (mid, y0 - margin), (mid, y1 + margin)
    return [b, a] if reverse else [a, b]


def _path_length(path: list[tuple[float, float]]) -> float:
    return sum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(path, path[1:]))


def _point_at(path: list[tuple[float, float]], s: float) -> tuple[float, float]:
    """Point at arc length s (clamped to the ends)."""
    if s <= 0:
        return path[0]
    for a, b in zip(path, path[1:]):
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        if s <= seg:
            f = s / seg
            return (a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]))
        s -= seg
    return path[-1]


def _arc_length_to(path: list[tuple[float, float]], point: tuple[float, float]) -> float:
    """Arc length from the path start to the (on-path) point."""
    total = 0.0
    for a, b in zip(path, path[1:]):
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        da = math.hypot(point[0] - a[0], point[1] - a[1])
        db = math.hypot(point[0] - b[0], point[1] - b[1])
        if abs(da + db - seg) < 1e-6:
            return total + da
        total += seg
    raise ValueError("point not on path")


def _sample_track(object_id: str, cls: ObjectClass, path, speed: float,
                  t_depart: float, t_cut: float | None = None) -> Trajectory | None:
    """Constant-speed samples on the global 0.1 s tick grid.

    ``t_depart`` is the (possibly off-grid) time the object passes the
    path start; ``t_cut`` truncates the track (dropout).
    """
    length = _path_length(path)
    t_arrive = t_depart + length / speed
    t_hi = t_arrive if t_cut is None else min(t_cut, t_arrive)
    tick0 = math.ceil(round(t_depart / GRID, 6)) * GRID
    ticks = []
    t = tick0
    while t <= t_hi + 1e-9:
        ticks.append(_snap(t))
        t += GRID
    if len(ticks) < 2:
        return None
    xs, ys = [], []
    for tk in ticks:
        px, py = _point_at(path, speed * (tk - t_depart))
        xs.append(px)
        ys.append(py)
    return Trajectory(object_id, cls, np.array(ticks), np.array(xs), np.array(ys))


def _segment_crossing(path, axis: str, coord: float) -> tuple[float, float] | None:
    """(arc_length, ortho coordinate) where the path crosses x=coord or y=coord."""
    total = 0.0
    for a, b in zip(path, path[1:]):
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        pa, pb = (a[0], b[0]) if axis == "x" else (a[1], b[1])
        if pa != pb and min(pa, pb) - 1e-9 <= coord <= max(pa, pb) + 1e-9:
            f = (coord - pa) / (pb - pa)
            if 0.0 <= f <= 1.0:
                other = (a[1] + f * (b[1] - a[1])) if axis == "x" \
                    else (a[0] + f * (b[0] - a[0]))
                return total + f * seg, other
        total += seg
    return None


def _path_intersection(path_a, path_b) -> tuple[tuple[float, float], float, float] | None:
    """Intersection point of two axis-aligned-ish polylines plus the arc
    lengths along each path (first crossing found)."""
    for a0, a1 in zip(path_a, path_a[1:]):
        for b0, b1 in zip(path_b, path_b[1:]):
            d1 = (a1[0] - a0[0], a1[1] - a0[1])
            d2 = (b1[0] - b0[0], b1[1] - b0[1])
            den = d1[0] * d2[1] - d1[1] * d2[0]
            if abs(den) < 1e-12:
                continue
            dx = b0[0] - a0[0]
            dy = b0[1] - a0[1]
            u = (dx * d2[1] - dy * d2[0]) / den
            v = (dx * d1[1] - dy * d1[0]) / den
            if 0.0 <= u <= 1.0 and 0.0 <= v <= 1.0:
                p = (a0[0] + u * d1[0], a0[1] + u * d1[1])
                return p, _arc_length_to(path_a, p), _arc_length_to(path_b, p)
    return None


# ---------------------------------------------------------------------------
# signal placement
# ---------------------------------------------------------------------------

def build_signal_log(spec: ScenarioSpec, cfg: IntersectionConfig) -> SignalLog | None:
    if spec.signal is None:
        return None
    cycle, walk = spec.signal.cycle, spec.signal.walk
    intervals = []
    phases = sorted(set(cfg.ped_phase_of_leg.values()))
    for idx, phase in enumerate(phases):
        offset = idx * cycle / len(phases)
        t = spec.t_start - cycle
        while t < spec.t_end + cycle:
            w0 = t + offset
            intervals.append(SignalInterval(w0, w0 + walk, phase, "walk"))
            intervals.append(SignalInterval(w0 + walk, w0 + cycle, phase, "dont_walk"))
            t += cycle
    return SignalLog(intervals)


def _signal_block(log: SignalLog, phase: int, state: str, around_t: float,
                  need: float) -> tuple[float, float]:
    """The state block of the phase nearest ``around_t`` that is at least
    ``need`` seconds long."""
    blocks = [b for b in log.state_intervals(phase, state) if b[1] - b[0] >= need]
    if not blocks:
        raise DataError(f"no {state} block of {need:.1f}s for phase {phase}")
    return min(blocks, key=lambda b: abs(0.5 * (b[0] + b[1]) - around_t))


# ---------------------------------------------------------------------------
# scripted conflicts
# ---------------------------------------------------------------------------

class _ScriptBuilder:
    def __init__(self, spec: ScenarioSpec, cfg: IntersectionConfig,
                 params: AnalysisParams, signal_log: SignalLog | None):
        self.spec = spec
        self.cfg = cfg
        self.params = params
        self.signal_log = signal_log

    def _ped_conflict_time(self, script: ConflictScript, leg: str, path,
                           arc_cp: float) -> float:
        """Time the pedestrian should pass the conflict point, honoring a
        requested signal state for the crossing."""
        t_cp = script.t
        if script.ped_signal and self.signal_log is not None:
            phase = self.cfg.ped_phase_of_leg[leg]
            duration = _path_length(path) / script.speed_b
            b0, b1 = _signal_block(self.signal_log, phase, script.ped_signal,
                                   script.t, duration + 3.0)
            t_cp = b0 + 1.5 + arc_cp / script.speed_b
            if t_cp + (_path_length(path) - arc_cp) / script.speed_b > b1 - 1.5:
                raise DataError("crossing does not fit the signal block")
        return t_cp

    def build(self, script: ConflictScript, tag: str
              ) -> tuple[list[Trajectory], ManifestRow]:
        if script.value <= 0:
            raise DataError(f"{tag}: metric value must be positive")
        if not self.spec.t_start <= script.t <= self.spec.t_end:
            raise DataError(f"{tag}: scripted time outside the scenario window")
        kind = script.kind
        if kind == "ttc1":
            return self._ttc1(script, tag)
        if kind == "ttc2":
            return self._ttc2(script, tag)
        if kind == "ttc3":
            return self._ttc3(script, tag)
        if kind == "pet":
            return self._pet(script, tag)
        raise ConfigError(f"{tag}: unknown script kind {kind!r}")

    def _ttc1(self, script: ConflictScript, tag: str):
        """Mover truncated at range speed*value from a stationary object."""
        mv = MovementCode.from_code(script.movement)
        path = _vehicle_path(self.spec, self.cfg, mv)
        speed = script.speed_a
        span = speed * script.value
        if span > self.params.d_max - 1.0:
            raise DataError(
                f"{tag}: speed*value = {span:.1f} m exceeds the candidate "
                f"distance gate; lower the speed or the target TTC")
        # stationary object on the straight final segment, short of the end
        arc_obj = _path_length(path) - 6.0
        obj_pos = _point_at(path, arc_obj)
        t_end = _snap(script.t)
        t_depart = t_end - (arc_obj - span) / speed
        mover = _sample_track(f"{tag}a", ObjectClass(script.cls_a), path, speed,
                              t_depart, t_cut=t_end)
        n_still = int(round(12.0 / GRID))
        ticks = _snap(t_end - 8.0) + GRID * np.arange(n_still)
        still = Trajectory(f"{tag}b", ObjectClass(script.cls_b),
                           np.round(ticks, 6), np.full(n_still, obj_pos[0]),
                           np.full(n_still, obj_pos[1]))
        mid = _point_at(path, arc_obj - span / 2.0)
        row = _manifest_row(tag, "TTC", mover, still, script.value, t_end, mid)
        return [mover, still], row

    def _ttc2(self, script: ConflictScript, tag: str):
        """Faster follower; both tracks truncate at gap dv*value."""
        mv = MovementCode.from_code(script.movement)
        if mv.turn is not Turn.THROUGH:
            raise DataError(f"{tag}: ttc2 scripts need a through movement")
        v_lead, v_follow = script.speed_a, script.speed_b
        if v_follow <= v_lead:
            raise DataError(f"{tag}: follower must be faster than leader")
        dv = v_follow - v_lead
        gap_end = dv * script.value
        if gap_end > self.params.d_max - 1.0:
            raise DataError(f"{tag}: final gap {gap_end:.1f} m exceeds the "
                            "candidate distance gate")
        path = _vehicle_path(self.spec, self.cfg, mv)
        t_end = _snap(script.t)
        arc_lead_end = _path_length(path) - 4.0
        lead = _sample_track(f"{tag}a", ObjectClass(script.cls_a), path, v_lead,
                             t_end - arc_lead_end / v_lead, t_cut=t_end)
        follow = _sample_track(f"{tag}b", ObjectClass(script.cls_b), path, v_follow,
                               t_end - (arc_lead_end - gap_end) / v_follow,
                               t_cut=t_end)
        row = _manifest_row(tag, "TTC", lead, follow, script.value, t_end,
                            _point_at(path, arc_lead_end - 0.5 * gap_end))
        return [lead, follow], row

    def _ttc3(self, script: ConflictScript, tag: str):
        """Vehicle clears the conflict point just before the pedestrian.

        The last frame with a finite TTC is the tick T right before the
        vehicle reaches the conflict point; timings are laid out so the
        vehicle crosses at T + half a frame (keeping the approach test
        away from the 0/negative boundary) and the pedestrian at
        T + value, which makes the episode minimum exactly the target.
        """
        half = GRID / 2.0
        mv = MovementCode.from_code(script.movement)
        leg = script.ped_leg or ENTRY_LEG_OF_BOUND[mv.bound]
        veh_path = _vehicle_path(self.spec, self.cfg, mv)
        ped_path = _ped_path(self.cfg, leg)
        hit = _path_intersection(veh_path, ped_path)
        if hit is None:
            raise DataError(f"{tag}: movement {mv.code} does not cross the "
                            f"{leg}-leg crosswalk")
        cp, arc_veh, arc_ped = hit
        clearance = self.params.clearance_for(ObjectClass(script.cls_a))
        if script.value <= half + 0.01:
            raise DataError(f"{tag}: target TTC must exceed half a frame")
        if script.value - half >= clearance / script.speed_a - 0.02:
            raise DataError(
                f"{tag}: target TTC {script.value} is not below the leader "
                f"clearance time {clearance / script.speed_a:.2f}; the episode "
                "would end with an infinite TTC")
        t_cp_ped = self._ped_conflict_time(script, leg, ped_path, arc_ped)
        t_min = _snap(t_cp_ped - script.value)
        t_cp_ped = t_min + script.value
        t_cp_veh = t_min + half
        veh = _sample_track(f"{tag}a", ObjectClass(script.cls_a), veh_path,
                            script.speed_a, t_cp_veh - arc_veh / script.speed_a)
        ped = _sample_track(f"{tag}b", ObjectClass(script.cls_b), ped_path,
                            script.speed_b, t_cp_ped - arc_ped / script.speed_b)
        row = _manifest_row(tag, "TTC", veh, ped, script.value, t_min, cp)
        return [veh, ped], row

    def _pet(self, script: ConflictScript, tag: str):
        """Follower enters the conflict cell ``value`` s after the leader left."""
        if script.value > self.params.pet_window:
            raise DataError(f"{tag}: PET gap exceeds the recording window")
        mv = MovementCode.from_code(script.movement)
        leg = script.ped_leg or ENTRY_LEG_OF_BOUND[mv.bound]
        veh_path = _vehicle_path(self.spec, self.cfg, mv)
        ped_path = _ped_path(self.cfg, leg)
        hit = _path_intersection(veh_path, ped_path)
        if hit is None:
            raise DataError(f"{tag}: movement {mv.code} does not cross the "
                            f"{leg}-leg crosswalk")
        cp, _, arc_ped_cp = hit
        cell = self.cfg.mesh_cell_size
        x0, y0, _, _ = self.cfg.region_bbox()
        cx0 = x0 + math.floor((cp[0] - x0) / cell) * cell
        cy0 = y0 + math.floor((cp[1] - y0) / cell) * cell
        # leader exits the cell at the far boundary along its travel axis
        axis_veh = "x" if _DIR[mv.bound][0] else "y"
        exit_coord = (cx0 if _DIR[mv.bound][0] < 0 else cx0 + cell) if axis_veh == "x" \
            else (cy0 if _DIR[mv.bound][1] < 0 else cy0 + cell)
        # approximate direction at the conflict uses the crossing segment
        veh_cross = _segment_crossing(veh_path, axis_veh, exit_coord)
        axis_ped = "y" if axis_veh == "x" else "x"
        d_ped = 1.0 if ped_path[1][1] > ped_path[0][1] or ped_path[1][0] > ped_path[0][0] else -1.0
        enter_coord = (cy0 if d_ped > 0 else cy0 + cell) if axis_ped == "y" \
            else (cx0 if d_ped > 0 else cx0 + cell)
        ped_cross = _segment_crossing(ped_path, axis_ped, enter_coord)
        if veh_cross is None or ped_cross is None:
            raise DataError(f"{tag}: paths do not sweep the conflict cell")
        arc_veh_exit, _ = veh_cross
        arc_ped_enter, _ = ped_cross
        t_cp_ped = self._ped_conflict_time(script, leg, ped_path, arc_ped_cp)
        t_enter_ped = t_cp_ped - (arc_ped_cp - arc_ped_enter) / script.speed_b
        t_exit_veh = t_enter_ped - script.value
        veh = _sample_track(f"{tag}a", ObjectClass(script.cls_a), veh_path,
                            script.speed_a, t_exit_veh - arc_veh_exit / script.speed_a)
        ped = _sample_track(f"{tag}b", ObjectClass(script.cls_b), ped_path,
                            script.speed_b, t_enter_ped - arc_ped_enter / script.speed_b)
        row = _manifest_row(tag, "PET", veh, ped, script.value, t_enter_ped,
                            (cx0 + cell / 2.0, cy0 + cell / 2.0))
        return [veh, ped], row


def _manifest_row(tag: str, metric: str, traj_a: Trajectory, traj_b: Trajectory,
                  value: float, t: float, location) -> ManifestRow:
    peds = (traj_a.cls is ObjectClass.PEDESTRIAN) + (traj_b.cls is ObjectClass.PEDESTRIAN)
    kind = "P2V" if peds == 1 else "V2V"
    id_a, id_b = sorted([traj_a.object_id, traj_b.object_id])
    return ManifestRow(tag, metric, kind, id_a, id_b, value, t,
                       location[0], location[1])


# ---------------------------------------------------------------------------
# background traffic
# ---------------------------------------------------------------------------

def _rate_segments(spec: ScenarioSpec, mode: str) -> list[tuple[float, float, float]]:
    """(start, end, multiplier) segments covering the scenario window."""
    edges = {spec.t_start, spec.t_end}
    for surge in spec.surges:
        if surge.mode in (mode, "both"):
            edges.add(min(max(surge.start, spec.t_start), spec.t_end))
            edges.add(min(max(surge.end, spec.t_start), spec.t_end))
    cuts = sorted(edges)
    out = []
    for a, b in zip(cuts, cuts[1:]):
        mult = 1.0
        for surge in spec.surges:
            if surge.mode in (mode, "both") and surge.start <= a and b <= surge.end:
                mult = max(mult, surge.multiplier)
        out.append((a, b, mult))
    return out


def _arrivals(rng: np.random.Generator, spec: ScenarioSpec, mode: str,
              rate_per_hour: float) -> list[float]:
    times: list[float] = []
    for a, b, mult in _rate_segments(spec, mode):
        lam = rate_per_hour * mult * (b - a) / 3600.0
        n = int(rng.poisson(lam))
        times.extend(float(t) for t in rng.uniform(a, b, n))
    return sorted(_snap(t) for t in times)


def _background(rng: np.random.Generator, spec: ScenarioSpec,
                cfg: IntersectionConfig) -> list[Trajectory]:
    trajs: list[Trajectory] = []
    counter = 0

    for leg in sorted(spec.ped_rate_per_hour):
        rate = spec.ped_rate_per_hour[leg]
        for t0 in _arrivals(rng, spec, "pedestrian", rate):
            counter += 1
            path = _ped_path(cfg, leg, reverse=bool(rng.integers(2)))
            speed = float(rng.uniform(1.2, 1.6))
            track = _sample_track(f"p{counter:05d}", ObjectClass.PEDESTRIAN,
                                  path, speed, t0)
            if track:
                trajs.append(track)

    if spec.jaywalk_rate_per_hour > 0:
        x0, y0, x1, y1 = cfg.region_bbox()
        shapes = [
            [(x0 + 11, y0 + 11), (x1 - 11, y1 - 11)],        # diagonal crosser
            [(cfg.center[0], y0 + 5), (cfg.center[0], y1 - 5)],  # median walker
            [(x0 + 11, y1 - 11), (x1 - 11, y0 + 11)],
        ]
        for t0 in _arrivals(rng, spec, "pedestrian", spec.jaywalk_rate_per_hour):
            counter += 1
            path = shapes[int(rng.integers(len(shapes)))]
            speed = float(rng.uniform(1.1, 1.5))
            track = _sample_track(f"p{counter:05d}", ObjectClass.PEDESTRIAN,
                                  path, speed, t0)
            if track:
                trajs.append(track)

    counter = 0
    classes = [ObjectClass.CAR] * 8 + [ObjectClass.TRUCK, ObjectClass.MOTORCYCLIST]
    for code in sorted(spec.vehicle_rate_per_hour):
        rate = spec.vehicle_rate_per_hour[code]
        mv = MovementCode.from_code(code)
        path = _vehicle_path(spec, cfg, mv)
        for t0 in _arrivals(rng, spec, "vehicle", rate):
            counter += 1
            speed = float(rng.uniform(7.0, 11.0)) if mv.turn is Turn.THROUGH \
                else float(rng.uniform(5.0, 7.0))
            cls = classes[int(rng.integers(len(classes)))]
            track = _sample_track(f"v{counter:05d}", cls, path, speed, t0)
            if track:
                trajs.append(track)
    return trajs


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def generate(spec: ScenarioSpec, cfg: IntersectionConfig | None = None,
             params: AnalysisParams | None = None) -> SynthResult:
    """Deterministic scenario: same spec and seed, byte-identical output."""
    cfg = cfg or default_intersection()
    params = params or AnalysisParams()
    rng = np.random.default_rng(spec.seed)
    signal_log = build_signal_log(spec, cfg)
    builder = _ScriptBuilder(spec, cfg, params, signal_log)
    trajs: list[Trajectory] = []
    manifest: list[ManifestRow] = []
    for k, script in enumerate(spec.scripts):
        script_trajs, row = builder.build(script, f"s{k:03d}")
        trajs.extend(script_trajs)
        manifest.append(row)
    trajs.extend(_background(rng, spec, cfg))
    trajs.sort(key=lambda tr: tr.object_id)
    manifest.sort(key=lambda r: (r.t, r.script))
    return SynthResult(trajs, manifest, signal_log, cfg)


def write_manifest(rows: list[ManifestRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for r in rows:
            writer.writerow([r.script, r.metric, r.kind, r.id_a, r.id_b,
                             f"{r.value:.3f}", f"{r.t:.3f}",
                             f"{r.x:.3f}", f"{r.y:.3f}"])


def read_manifest(path) -> list[ManifestRow]:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise DataError(f"{path}: malformed manifest header")
        for row in reader:
            if row:
                rows.append(ManifestRow(row[0], row[1], row[2], row[3], row[4],
                                        float(row[5]), float(row[6]),
                                        float(row[7]), float(row[8])))
    return rows


def gameday_scenario() -> ScenarioSpec:
    """The shipped event-day scenario: a 3x pedestrian surge for the two
    hours before a 19:00 start, through-vehicle/far-crosswalk conflicts
    against the walk signal as the dominant scripted type."""
    with resources.files("intersafe.data").joinpath("gameday_scenario.json").open() as fh:
        return ScenarioSpec.from_dict(json.load(fh))


def random_scenario(seed: int, t_start: float = 36000.0,
                    duration: float = 90.0) -> ScenarioSpec:
    """Small randomized scenario for equivalence/property suites."""
    rng = np.random.default_rng(seed)
    ped_rates = {leg: float(rng.uniform(150.0, 400.0)) for leg in ("N", "E", "S", "W")}
    movements = ["NBT", "SBT", "EBT", "WBT", "NBR", "SBR", "EBL", "WBR"]
    veh_rates = {code: float(rng.uniform(80.0, 240.0))
                 for code in movements if rng.random() < 0.8}
    scripts = []
    t = t_start + 25.0
    for k in range(int(rng.integers(1, 4))):
        kind = ["pet", "ttc3", "ttc2"][int(rng.integers(3))]
        mv = ["WBT", "EBT", "NBT", "SBT"][int(rng.integers(4))]
        if kind == "pet":
            scripts.append(ConflictScript(
                kind="pet", t=t, value=float(rng.uniform(1.0, 8.0)), movement=mv,
                speed_a=float(rng.uniform(6.0, 10.0)),
                speed_b=float(rng.uniform(1.2, 1.6))))
        elif kind == "ttc3":
            speed = float(rng.uniform(6.0, 10.0))
            scripts.append(ConflictScript(
                kind="ttc3", t=t, value=float(rng.uniform(0.15, 0.35)), movement=mv,
                speed_a=speed, speed_b=float(rng.uniform(1.2, 1.6))))
        else:
            v_lead = float(rng.uniform(5.0, 7.0))
            v_follow = float(rng.uniform(8.0, 10.0))
            v_max = 8.0 / (v_follow - v_lead)      # keep the final gap inside d_max
            scripts.append(ConflictScript(
                kind="ttc2", t=t, value=float(rng.uniform(1.0, min(3.0, v_max))),
                movement=mv, cls_b="car", speed_a=v_lead, speed_b=v_follow))
        t += 20.0
    return ScenarioSpec(
        seed=seed, t_start=t_start, t_end=t_start + duration,
        ped_rate_per_hour=ped_rates, vehicle_rate_per_hour=veh_rates,
        jaywalk_rate_per_hour=float(rng.uniform(0.0, 80.0)),
        scripts=tuple(scripts))
