"""Conflict enrichment: P2V types 1-6, vehicle movements, jaywalk flags.

The six P2V types pair the vehicle's turn with the pedestrian's crosswalk
role: right turns meet the adjacent-parallel (1) and near (2) crosswalks,
left turns the parallel-opposite (3) and adjacent-parallel (4), through
movements the far (5) and near (6).  Every other (turn, role) combination
is retained untyped so totals stay complete.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import DataError
from .ingest import SignalLog
from .model import (
    ConflictEvent,
    CrosswalkRole,
    IntersectionConfig,
    MovementCode,
    ObjectClass,
    Trajectory,
    Turn,
    classify_vehicle_movement,
    crosswalk_role,
    pedestrian_phase,
)
from .params import AnalysisParams

P2V_TYPE_TABLE: dict[tuple[Turn, CrosswalkRole], int] = {
    (Turn.RIGHT, CrosswalkRole.ADJACENT_PARALLEL): 1,
    (Turn.RIGHT, CrosswalkRole.NEAR): 2,
    (Turn.LEFT, CrosswalkRole.PARALLEL_OPPOSITE): 3,
    (Turn.LEFT, CrosswalkRole.ADJACENT_PARALLEL): 4,
    (Turn.THROUGH, CrosswalkRole.FAR): 5,
    (Turn.THROUGH, CrosswalkRole.NEAR): 6,
}

EVENT_CSV_HEADER = [
    "kind", "metric", "value", "t", "x", "y", "id_a", "class_a",
    "id_b", "class_b", "movement", "p2v_type", "ped_role", "severe", "jaywalk",
]


def classify_p2v_type(mv: MovementCode, ped_leg: str,
                      cfg: IntersectionConfig) -> tuple[int | None, CrosswalkRole]:
    """(type, role) for a vehicle movement against a pedestrian's crosswalk leg."""
    role = crosswalk_role(mv, ped_leg, cfg)
    return P2V_TYPE_TABLE.get((mv.turn, role)), role


def crossing_interval(traj: Trajectory, cfg: IntersectionConfig,
                      leg: str) -> tuple[float, float] | None:
    """First/last time the pedestrian is inside the (dilated) crosswalk."""
    poly = cfg.crosswalk_polygons[leg]
    inside = _kernels.points_in_polygon(traj.x, traj.y, poly[:, 0], poly[:, 1])
    if cfg.crosswalk_buffer > 0:
        inside = inside | (_kernels.polygon_edge_distance(
            traj.x, traj.y, poly[:, 0], poly[:, 1]) <= cfg.crosswalk_buffer)
    idx = np.nonzero(inside)[0]
    if not len(idx):
        return None
    return float(traj.t[idx[0]]), float(traj.t[idx[-1]])


def flag_jaywalk(traj: Trajectory, cfg: IntersectionConfig,
                 signal_log: SignalLog | None = None,
                 params: AnalysisParams | None = None,
                 phase: int | None = None) -> bool:
    """Spatial rule: phase 0 (no dominant crosswalk) is always a jaywalk.
    With a signal log, a crossing that overlaps its phase's dont_walk
    state by more than t_grace is also flagged."""
    params = params or AnalysisParams()
    if phase is None:
        phase = pedestrian_phase(traj, cfg, params.theta_cw)
    if phase == 0:
        return True
    if signal_log is None:
        return False
    leg = next(L for L, p in cfg.ped_phase_of_leg.items() if p == phase)
    interval = crossing_interval(traj, cfg, leg)
    if interval is None:
        return False
    return signal_log.overlap(phase, "dont_walk", *interval) > params.t_grace


class TrajectoryIndex:
    """Per-object classification cache shared across events."""

    def __init__(self, trajs: list[Trajectory], cfg: IntersectionConfig,
                 signal_log: SignalLog | None = None,
                 params: AnalysisParams | None = None):
        self.cfg = cfg
        self.params = params or AnalysisParams()
        self.signal_log = signal_log
        self.by_id = {traj.object_id: traj for traj in trajs}
        self._movement: dict[str, MovementCode | None] = {}
        self._ped_phase: dict[str, int] = {}
        self._jaywalk: dict[str, bool] = {}

    def movement(self, object_id: str) -> MovementCode | None:
        if object_id not in self._movement:
            traj = self.by_id.get(object_id)
            mv = None
            if traj is not None and traj.cls.is_vehicle:
                mv = classify_vehicle_movement(traj, self.cfg)
            self._movement[object_id] = mv
        return self._movement[object_id]

    def ped_phase(self, object_id: str) -> int:
        if object_id not in self._ped_phase:
            traj = self.by_id[object_id]
            self._ped_phase[object_id] = pedestrian_phase(
                traj, self.cfg, self.params.theta_cw)
        return self._ped_phase[object_id]

    def ped_leg(self, object_id: str) -> str | None:
        phase = self.ped_phase(object_id)
        if phase == 0:
            return None
        return next(L for L, p in self.cfg.ped_phase_of_leg.items() if p == phase)

    def jaywalk(self, object_id: str) -> bool:
        if object_id not in self._jaywalk:
            self._jaywalk[object_id] = flag_jaywalk(
                self.by_id[object_id], self.cfg, self.signal_log,
                self.params, phase=self.ped_phase(object_id))
        return self._jaywalk[object_id]


def classify_events(events: list[ConflictEvent],
                    index: TrajectoryIndex) -> list[ConflictEvent]:
    """Annotate detected events with movement, P2V type, role and jaywalk."""
    out = []
    for ev in events:
        if ev.kind != "P2V":
            out.append(ev)
            continue
        ped_id = ev.pedestrian_id
        veh_id = ev.vehicle_id
        mv = index.movement(veh_id)
        leg = index.ped_leg(ped_id)
        p2v_type = None
        role = None
        if mv is not None and leg is not None:
            p2v_type, role = classify_p2v_type(mv, leg, index.cfg)
        out.append(replace(ev, movement=mv, p2v_type=p2v_type, ped_role=role,
                           jaywalk=index.jaywalk(ped_id)))
    return out


def jaywalk_p2v(events: list[ConflictEvent]) -> list[ConflictEvent]:
    return [ev for ev in events if ev.kind == "P2V" and ev.jaywalk]


def movement_histogram(events: list[ConflictEvent]) -> list[tuple[str, int]]:
    """Counts of events per vehicle movement code, descending, ties by code."""
    counts = Counter(ev.movement.code for ev in events if ev.movement is not None)
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def type_histogram(events: list[ConflictEvent]) -> dict[int, int]:
    counts = Counter(ev.p2v_type for ev in events
                     if ev.kind == "P2V" and ev.p2v_type is not None)
    return dict(sorted(counts.items()))


# ---------------------------------------------------------------------------
# event CSV (canonical interchange format)
# ---------------------------------------------------------------------------

def write_events_csv(events: list[ConflictEvent], path) -> None:
    """Fixed formatting: seconds and meters at 3 decimals, booleans as
    true/false, empty string for absent classification fields."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENT_CSV_HEADER)
        for ev in events:
            writer.writerow([
                ev.kind, ev.metric, f"{ev.value:.3f}", f"{ev.t:.3f}",
                f"{ev.x:.3f}", f"{ev.y:.3f}",
                ev.id_a, ev.cls_a.value, ev.id_b, ev.cls_b.value,
                ev.movement.code if ev.movement else "",
                ev.p2v_type if ev.p2v_type is not None else "",
                ev.ped_role.value if ev.ped_role else "",
                "true" if ev.severe else "false",
                "true" if ev.jaywalk else "false",
            ])


def read_events_csv(path) -> list[ConflictEvent]:
    path = Path(path)
    events = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != EVENT_CSV_HEADER:
            raise DataError(f"{path}: malformed events header")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(EVENT_CSV_HEADER):
                raise DataError(f"{path}:{line_no}: wrong field count")
            try:
                events.append(ConflictEvent(
                    kind=row[0], metric=row[1], value=float(row[2]),
                    t=float(row[3]), x=float(row[4]), y=float(row[5]),
                    id_a=row[6], cls_a=ObjectClass(row[7]),
                    id_b=row[8], cls_b=ObjectClass(row[9]),
                    severe=row[13] == "true",
                    movement=MovementCode.from_code(row[10]) if row[10] else None,
                    p2v_type=int(row[11]) if row[11] else None,
                    ped_role=CrosswalkRole(row[12]) if row[12] else None,
                    jaywalk=row[14] == "true",
                ))
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
    return events
