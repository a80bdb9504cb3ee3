"""Trajectory and signal-log file ingestion.

The trajectory CSV schema is the package's ingestion contract (it stands
in for the upstream tracker's database table):

    object_id,class,t,x,y,vx,vy

with t in seconds since local midnight, coordinates in meters, and vx/vy
optionally empty.  Serialization is fixed-format (3 decimals for meters,
1 for seconds) so parse -> serialize -> parse round-trips bit-exact.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import ObjectClass, Trajectory

TRAJECTORY_HEADER = ["object_id", "class", "t", "x", "y", "vx", "vy"]
SIGNAL_HEADER = ["t_start", "t_end", "phase", "state"]
SIGNAL_STATES = {"walk", "dont_walk", "green", "yellow", "red"}


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str


@dataclass(frozen=True)
class ParseResult:
    trajectories: list[Trajectory]
    rejected: list[RejectedRow]

    @property
    def n_points(self) -> int:
        return sum(len(t) for t in self.trajectories)


def _parse_float(text: str, what: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite {what}")
    return value


def parse_trajectories(path) -> ParseResult:
    """Parse a trajectory CSV into per-object, time-sorted trajectories.

    Bad rows (non-finite coordinates, unknown class, duplicate timestamps
    per object) are rejected individually and reported with line numbers;
    a malformed header is fatal.
    """
    path = Path(path)
    rows: dict[str, list[tuple[float, float, float, float, float]]] = {}
    classes: dict[str, ObjectClass] = {}
    seen_t: dict[str, set[float]] = {}
    rejected: list[RejectedRow] = []

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != TRAJECTORY_HEADER:
            raise DataError(
                f"{path}: malformed header {header!r}, "
                f"expected {','.join(TRAJECTORY_HEADER)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 7:
                rejected.append(RejectedRow(line_no, f"expected 7 fields, got {len(row)}"))
                continue
            oid = row[0].strip()
            try:
                cls = ObjectClass(row[1].strip())
                t = _parse_float(row[2], "t")
                x = _parse_float(row[3], "x")
                y = _parse_float(row[4], "y")
                if t < 0:
                    raise ValueError("negative timestamp")
                if (row[5].strip() == "") != (row[6].strip() == ""):
                    raise ValueError("vx/vy must both be present or both empty")
                if row[5].strip() == "":
                    vx = vy = math.nan
                else:
                    vx = _parse_float(row[5], "vx")
                    vy = _parse_float(row[6], "vy")
            except ValueError as exc:
                rejected.append(RejectedRow(line_no, str(exc)))
                continue
            if oid in classes and classes[oid] is not cls:
                rejected.append(RejectedRow(line_no, f"class mismatch for object {oid}"))
                continue
            if t in seen_t.setdefault(oid, set()):
                rejected.append(RejectedRow(line_no, f"duplicate timestamp for {oid} at t={t}"))
                continue
            seen_t[oid].add(t)
            classes[oid] = cls
            rows.setdefault(oid, []).append((t, x, y, vx, vy))

    trajectories = []
    for oid in sorted(rows):
        data = sorted(rows[oid])
        arr = np.array(data, dtype=np.float64)
        trajectories.append(Trajectory(
            oid, classes[oid], arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4]))
    return ParseResult(trajectories, rejected)


def serialize_trajectories(trajectories: list[Trajectory], path) -> None:
    """Write trajectories in the canonical fixed-precision CSV format."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        for traj in sorted(trajectories, key=lambda tr: tr.object_id):
            for i in range(len(traj)):
                vx = f"{traj.vx[i]:.3f}" if math.isfinite(traj.vx[i]) else ""
                vy = f"{traj.vy[i]:.3f}" if math.isfinite(traj.vy[i]) else ""
                writer.writerow([
                    traj.object_id, traj.cls.value, f"{traj.t[i]:.1f}",
                    f"{traj.x[i]:.3f}", f"{traj.y[i]:.3f}", vx, vy,
                ])


def estimate_velocities(traj: Trajectory, force: bool = False,
                        smooth_window: int = 0) -> Trajectory:
    """Fill missing per-point velocities by finite differences.

    Central differences for interior points, one-sided at the ends
    (second-order accurate at the 0.1 s cadence; exact for quadratic
    paths).  Velocities already present are kept unless ``force``.
    An optional odd-length moving average smooths positions first.
    """
    n = len(traj)
    if n < 2:
        raise DataError(f"trajectory {traj.object_id}: need >= 2 points")
    x, y = traj.x, traj.y
    if smooth_window:
        if smooth_window % 2 == 0 or smooth_window < 3:
            raise DataError("smoothing window must be odd and >= 3")
        if n >= smooth_window:
            kernel = np.ones(smooth_window) / smooth_window
            pad = smooth_window // 2
            x = np.convolve(np.pad(x, pad, mode="edge"), kernel, mode="valid")
            y = np.convolve(np.pad(y, pad, mode="edge"), kernel, mode="valid")
    t = traj.t
    vx = np.empty(n)
    vy = np.empty(n)
    vx[0] = (x[1] - x[0]) / (t[1] - t[0])
    vy[0] = (y[1] - y[0]) / (t[1] - t[0])
    vx[-1] = (x[-1] - x[-2]) / (t[-1] - t[-2])
    vy[-1] = (y[-1] - y[-2]) / (t[-1] - t[-2])
    if n > 2:
        dt = t[2:] - t[:-2]
        vx[1:-1] = (x[2:] - x[:-2]) / dt
        vy[1:-1] = (y[2:] - y[:-2]) / dt
    if not force:
        keep = np.isfinite(traj.vx) & np.isfinite(traj.vy)
        vx[keep] = traj.vx[keep]
        vy[keep] = traj.vy[keep]
    return Trajectory(traj.object_id, traj.cls, traj.t, traj.x, traj.y, vx, vy)


@dataclass(frozen=True)
class SignalInterval:
    t_start: float
    t_end: float
    phase: int
    state: str


class SignalLog:
    """Per-phase signal state intervals (walk / dont_walk / green / ...)."""

    def __init__(self, intervals: list[SignalInterval]):
        self.intervals = sorted(intervals, key=lambda iv: (iv.phase, iv.t_start))
        by_phase: dict[int, list[SignalInterval]] = {}
        for iv in self.intervals:
            by_phase.setdefault(iv.phase, []).append(iv)
        for phase, ivs in by_phase.items():
            for a, b in zip(ivs, ivs[1:]):
                if b.t_start < a.t_end:
                    raise DataError(
                        f"overlapping intervals for phase {phase} at t={b.t_start}")
        self._by_phase = by_phase

    def __len__(self) -> int:
        return len(self.intervals)

    def state_intervals(self, phase: int, state: str) -> list[tuple[float, float]]:
        return [(iv.t_start, iv.t_end)
                for iv in self._by_phase.get(phase, []) if iv.state == state]

    def overlap(self, phase: int, state: str, t0: float, t1: float) -> float:
        """Total seconds of [t0, t1] spent in the given phase state."""
        total = 0.0
        for a, b in self.state_intervals(phase, state):
            total += max(0.0, min(b, t1) - max(a, t0))
        return total


def parse_signal_log(path) -> SignalLog:
    path = Path(path)
    intervals = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != SIGNAL_HEADER:
            raise DataError(f"{path}: malformed header {header!r}")
        for line_no, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise DataError(f"{path}:{line_no}: expected 4 fields")
            try:
                t0 = _parse_float(row[0], "t_start")
                t1 = _parse_float(row[1], "t_end")
                phase = int(row[2])
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: {exc}") from None
            state = row[3].strip()
            if state not in SIGNAL_STATES:
                raise DataError(f"{path}:{line_no}: unknown state {state!r}")
            if not t0 < t1:
                raise DataError(f"{path}:{line_no}: t_start must be < t_end")
            intervals.append(SignalInterval(t0, t1, phase, state))
    return SignalLog(intervals)


def write_signal_log(log: SignalLog, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SIGNAL_HEADER)
        for iv in log.intervals:
            writer.writerow([f"{iv.t_start:.1f}", f"{iv.t_end:.1f}", iv.phase, iv.state])
