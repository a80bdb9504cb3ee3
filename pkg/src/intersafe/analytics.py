"""Volume matrices, time-of-day bucketing, aggregated conflict series,
spatial histograms/KDE, and the normalization + correlation statistics.

All bins are half-open [start, end); a crossing's time is the timestamp
of its median track point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy import stats as _scipy_stats

from .errors import ComputationError
from .model import (
    ConflictEvent,
    IntersectionConfig,
    ObjectClass,
    Trajectory,
    classify_vehicle_movement,
    pedestrian_phase,
    vehicle_phase,
)
from .pet import MeshGrid
from .params import AnalysisParams

#: named two-hour windows used for daytime reporting
TIME_BUCKETS = (
    ("Early Morning", 8, 10),
    ("Late Morning", 10, 12),
    ("Early Afternoon", 12, 14),
    ("Late Afternoon", 14, 16),
    ("Evening", 16, 18),
    ("Night", 18, 20),
)

PEDESTRIAN_PHASES = (0, 2, 4, 6, 8)
VEHICLE_PHASE_ROWS = (1, 2, 3, 4, 5, 6, 7, 8)
AGGREGATE_HOURS = tuple(range(7, 18))      # series span 07:00-18:00


def bucket_of(t_seconds: float) -> str | None:
    """Named time-of-day bucket for a seconds-since-midnight timestamp."""
    hour = t_seconds / 3600.0
    for name, start, end in TIME_BUCKETS:
        if start <= hour < end:
            return name
    return None


def mid_crossing_time(traj: Trajectory) -> float:
    return float(traj.t[len(traj) // 2])


@dataclass(frozen=True)
class VolumeMatrix:
    mode: str                       # "pedestrian" | "vehicle"
    phases: tuple[int, ...]         # row labels
    counts: np.ndarray              # (n_phases, 24) hour bins
    unclassified: int               # trajectories without a phase row

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def hour_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def volume_matrix(trajs: list[Trajectory], cfg: IntersectionConfig,
                  mode: str, params: AnalysisParams | None = None) -> VolumeMatrix:
    """Phase x hour-of-day counts, one count per trajectory at its
    mid-crossing time.  Pedestrians are keyed by crossing phase (0 kept
    as the anomalous row); vehicles by their movement's signal phase,
    with unclassifiable movements tallied separately."""
    if mode not in ("pedestrian", "vehicle"):
        raise ValueError(f"invalid mode {mode!r}")
    params = params or AnalysisParams()
    phases = PEDESTRIAN_PHASES if mode == "pedestrian" else VEHICLE_PHASE_ROWS
    row_of = {p: i for i, p in enumerate(phases)}
    counts = np.zeros((len(phases), 24), dtype=np.int64)
    unclassified = 0
    for traj in trajs:
        if mode == "pedestrian" and traj.cls is not ObjectClass.PEDESTRIAN:
            continue
        if mode == "vehicle" and not traj.cls.is_vehicle:
            continue
        hour = int(mid_crossing_time(traj) // 3600)
        if not 0 <= hour < 24:
            unclassified += 1
            continue
        if mode == "pedestrian":
            phase = pedestrian_phase(traj, cfg, params.theta_cw)
        else:
            mv = classify_vehicle_movement(traj, cfg)
            if mv is None:
                unclassified += 1
                continue
            phase = vehicle_phase(mv, cfg)
        counts[row_of[phase], hour] += 1
    return VolumeMatrix(mode, tuple(phases), counts, unclassified)


@dataclass(frozen=True)
class AggregateSeries:
    label: str
    hours: tuple[int, ...]
    mean: np.ndarray
    low: np.ndarray
    high: np.ndarray
    n_days: int


def aggregate_conflicts(day_events: list[tuple[str, str, list[ConflictEvent]]],
                        hours: tuple[int, ...] = AGGREGATE_HOURS,
                        confidence: float = 0.95) -> dict[str, AggregateSeries]:
    """Per-group hourly conflict series with Student-t confidence bands.

    ``day_events`` rows are (date, group_label, events).  Groups with a
    single day get a degenerate band (low = mean = high).
    """
    by_group: dict[str, dict[str, np.ndarray]] = {}
    for date, label, events in day_events:
        day_counts = by_group.setdefault(label, {}).setdefault(
            date, np.zeros(len(hours), dtype=np.int64))
        for ev in events:
            hour = int(ev.t // 3600)
            if hour in hours:
                day_counts[hours.index(hour)] += 1
    out = {}
    for label in sorted(by_group):
        days = sorted(by_group[label])
        data = np.array([by_group[label][d] for d in days], dtype=np.float64)
        n = len(days)
        mean = data.mean(axis=0)
        if n > 1:
            sd = data.std(axis=0, ddof=1)
            t_mult = float(_scipy_stats.t.ppf(0.5 + confidence / 2.0, n - 1))
            half = t_mult * sd / math.sqrt(n)
        else:
            half = np.zeros(len(hours))
        out[label] = AggregateSeries(label, tuple(hours), mean,
                                     mean - half, mean + half, n)
    return out


def spatial_histogram(events: list[ConflictEvent],
                      mesh: MeshGrid) -> tuple[np.ndarray, int]:
    """Event counts per mesh cell plus an overflow count for events
    falling outside the grid."""
    counts = np.zeros(mesh.shape, dtype=np.int64)
    overflow = 0
    for ev in events:
        cell = mesh.cell_of(ev.x, ev.y)
        if cell is None:
            overflow += 1
        else:
            counts[cell[1], cell[0]] += 1
    return counts, overflow


def scott_bandwidth(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float]:
    """Scott's rule per axis for a two-dimensional sample."""
    n = len(xs)
    factor = n ** (-1.0 / 6.0)
    return (float(np.std(xs) * factor), float(np.std(ys) * factor))


def spatial_kde(events: list[ConflictEvent], mesh: MeshGrid,
                bandwidth: float | tuple[float, float] | None = None) -> np.ndarray:
    """Gaussian kernel density of event locations at cell centers.

    Bandwidth defaults to Scott's rule on the event coordinates; a
    degenerate axis falls back to the mesh cell size.  The surface is a
    true density (integrates to ~1 over a sufficiently padded grid).
    """
    if not events:
        raise ComputationError("KDE needs at least one event")
    xs = np.array([ev.x for ev in events])
    ys = np.array([ev.y for ev in events])
    if bandwidth is None:
        hx, hy = scott_bandwidth(xs, ys)
    elif isinstance(bandwidth, tuple):
        hx, hy = bandwidth
    else:
        hx = hy = float(bandwidth)
    hx = hx if hx > 0 else mesh.cell_size
    hy = hy if hy > 0 else mesh.cell_size
    cx = mesh.origin[0] + (np.arange(mesh.n_cols) + 0.5) * mesh.cell_size
    cy = mesh.origin[1] + (np.arange(mesh.n_rows) + 0.5) * mesh.cell_size
    gx = np.exp(-0.5 * ((cx[None, :] - xs[:, None]) / hx) ** 2) / (hx * math.sqrt(2 * math.pi))
    gy = np.exp(-0.5 * ((cy[None, :] - ys[:, None]) / hy) ** 2) / (hy * math.sqrt(2 * math.pi))
    return gy.T @ gx / len(events)        # (n_rows, n_cols)


# ---------------------------------------------------------------------------
# normalization / correlation statistics
# ---------------------------------------------------------------------------

def min_max_normalize(xs) -> np.ndarray:
    """(x - min) / (max - min); constant series are a caller error."""
    xs = np.asarray(xs, dtype=np.float64)
    if len(xs) < 2:
        raise ComputationError("need at least two values to normalize")
    lo, hi = float(xs.min()), float(xs.max())
    if hi == lo:
        raise ComputationError("cannot normalize a constant series")
    return (xs - lo) / (hi - lo)


def pearson_r(xs, ys) -> float:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if len(xs) != len(ys) or len(xs) < 3:
        raise ComputationError("need equal-length series of at least 3 points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    denom = math.sqrt(float((dx * dx).sum()) * float((dy * dy).sum()))
    if denom == 0.0:
        raise ComputationError("correlation undefined for a constant series")
    return float((dx * dy).sum() / denom)


def p_value(r: float, n: int, method: str = "t_dist",
            data: tuple | None = None, n_resamples: int = 20000,
            seed: int = 0) -> float:
    """Two-tailed probability of |r| at least as large as observed.

    t_dist uses the exact null distribution t = r sqrt((n-2)/(1-r^2))
    with n-2 degrees of freedom (|r| = 1 maps to p = 0 by convention).
    The permutation method needs the data pair; it enumerates all n!
    pairings exactly for n <= 8 and falls back to seeded Monte Carlo
    above that, counting the identity pairing in both cases.
    """
    if n < 3:
        raise ComputationError("p-value needs n >= 3")
    if method == "t_dist":
        if abs(r) >= 1.0:
            return 0.0
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        return float(2.0 * _scipy_stats.t.sf(abs(t), n - 2))
    if method != "permutation":
        raise ValueError(f"unknown method {method!r}")
    if data is None:
        raise ComputationError("permutation method needs data=(xs, ys)")
    xs = np.asarray(data[0], dtype=np.float64)
    ys = np.asarray(data[1], dtype=np.float64)
    if len(xs) != n or len(ys) != n:
        raise ComputationError("data length does not match n")
    observed = abs(pearson_r(xs, ys))
    tol = 1e-12
    if n <= 8:
        hits = sum(1 for perm in permutations(range(n))
                   if abs(pearson_r(xs, ys[list(perm)])) >= observed - tol)
        return hits / math.factorial(n)
    rng = np.random.default_rng(seed)
    hits = 1                                # identity pairing always counts
    for _ in range(n_resamples):
        if abs(pearson_r(xs, rng.permutation(ys))) >= observed - tol:
            hits += 1
    return hits / (n_resamples + 1)


def pregame_volume(trajs: list[Trajectory], cfg: IntersectionConfig,
                   game_start_seconds: float, mode: str,
                   window_hours: float = 6.0,
                   params: AnalysisParams | None = None) -> int:
    """Classified crossings with mid-crossing time in the half-open
    window [start - window, start)."""
    params = params or AnalysisParams()
    lo = game_start_seconds - window_hours * 3600.0
    count = 0
    for traj in trajs:
        if mode == "pedestrian" and traj.cls is not ObjectClass.PEDESTRIAN:
            continue
        if mode == "vehicle" and not traj.cls.is_vehicle:
            continue
        mid = mid_crossing_time(traj)
        if not lo <= mid < game_start_seconds:
            continue
        if mode == "pedestrian":
            count += 1
        else:
            if classify_vehicle_movement(traj, cfg) is not None:
                count += 1
    return count


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    p: float
    method: str
    n: int
    points: list[tuple[str, float, float]]   # (label, win_prob_norm, volume_norm)


def correlate_volume_win_prob(labels: list[str], volumes, away_win_probs,
                              method: str = "t_dist") -> CorrelationResult:
    """Min-max normalize both series, then Pearson r and its p-value.

    Swapping in home probabilities (1 - away) flips the sign of r and
    keeps |r| and the p-value unchanged.
    """
    if len(labels) != len(volumes) or len(labels) != len(away_win_probs):
        raise ComputationError("label/series length mismatch")
    if len(volumes) < 3:
        raise ComputationError("need at least 3 games to correlate")
    vol_n = min_max_normalize(volumes)
    prob_n = min_max_normalize(away_win_probs)
    r = pearson_r(prob_n, vol_n)
    p = p_value(r, len(vol_n), method, data=(prob_n, vol_n))
    points = sorted(zip(labels, prob_n.tolist(), vol_n.tolist()),
                    key=lambda row: (row[1], row[0]))
    return CorrelationResult(r, p, method, len(vol_n), points)
