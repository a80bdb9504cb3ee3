"""Frame-by-frame time-to-collision over three interaction geometries:
one participant stationary (case 1), parallel/following motion (case 2),
and crossing paths through a conflict point (case 3).

Candidate pairs are gated by distance (d_max), must be on conflicting
paths (finite TTC under the case analysis), and must persist for k_min
consecutive frames.  Each maximal run of passing frames is one episode
and yields a single event at its minimum-TTC frame, so a near-miss is
counted once rather than once per frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DataError
from .model import ConflictEvent, ObjectClass, Trajectory, event_kind
from .params import AnalysisParams


@dataclass(frozen=True)
class PairState:
    """Kinematic snapshot of two objects at one frame."""

    id_a: str
    id_b: str
    t: float
    cls_a: ObjectClass
    cls_b: ObjectClass
    ax: float
    ay: float
    avx: float
    avy: float
    bx: float
    by: float
    bvx: float
    bvy: float

    @property
    def s(self) -> float:
        return math.hypot(self.bx - self.ax, self.by - self.ay)


@dataclass(frozen=True)
class TtcResult:
    value: float                       # seconds, or +inf for "no collision"
    case_id: int
    conflict_point: tuple[float, float] | None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _evaluate(pair: PairState, params: AnalysisParams) -> TtcResult:
    one = lambda v: np.array([v], dtype=np.float64)
    ttc, case_id, cpx, cpy = _kernels.ttc_batch(
        one(pair.ax), one(pair.ay), one(pair.avx), one(pair.avy),
        one(pair.bx), one(pair.by), one(pair.bvx), one(pair.bvy),
        one(params.clearance_for(pair.cls_a)), one(params.clearance_for(pair.cls_b)),
        params.v_stop, params.sin_theta_par, params.w_lat)
    cp = None
    if math.isfinite(cpx[0]):
        cp = (float(cpx[0]), float(cpy[0]))
    return TtcResult(float(ttc[0]), int(case_id[0]), cp)


def _case_checked(pair: PairState, params: AnalysisParams, expect: int) -> TtcResult:
    result = _evaluate(pair, params)
    if result.case_id != expect:
        raise ValueError(
            f"pair is case {result.case_id}, not case {expect} "
            "(check speeds / direction preconditions)")
    return result


def ttc_case1(pair: PairState, params: AnalysisParams | None = None) -> TtcResult:
    """At least one object stationary.  Finite only when the mover's ray
    of motion passes the stationary object within the lateral tolerance;
    then t = s / |v|."""
    return _case_checked(pair, params or AnalysisParams(), 1)


def ttc_case2(pair: PairState, params: AnalysisParams | None = None) -> TtcResult:
    """Both objects on parallel lines.  Finite only on a (near-)coincident
    line with positive closing speed; then t = s / |dv|.  A follower that
    is slower than its leader, or equal speeds, yield +inf."""
    return _case_checked(pair, params or AnalysisParams(), 2)


def ttc_case3(pair: PairState, params: AnalysisParams | None = None) -> TtcResult:
    """Crossing lines of motion.  Finite when both objects approach the
    conflict point and the leading one does not fully clear it (its
    clearance length at its speed) before the other arrives; the TTC is
    then the later arrival time, max(t1, t2)."""
    return _case_checked(pair, params or AnalysisParams(), 3)


def evaluate_pair(pair: PairState, params: AnalysisParams | None = None) -> TtcResult:
    """Case dispatch on an arbitrary pair state."""
    return _evaluate(pair, params or AnalysisParams())


# ---------------------------------------------------------------------------
# frame assembly and detection
# ---------------------------------------------------------------------------

class _FrameTable:
    """All trajectory points regrouped into concurrent frames.

    Points are snapped to the nominal frame grid (samples within half a
    frame interval share a frame) and ordered by object id inside each
    frame, which makes downstream results independent of input order.
    """

    def __init__(self, trajs: list[Trajectory], params: AnalysisParams):
        order = sorted(range(len(trajs)), key=lambda k: trajs[k].object_id)
        keys, xs, ys, vxs, vys, objs = [], [], [], [], [], []
        self.ids: list[str] = []
        self.cls: list[ObjectClass] = []
        self.is_ped = []
        self.clearance = []
        for rank, k in enumerate(order):
            traj = trajs[k]
            self.ids.append(traj.object_id)
            self.cls.append(traj.cls)
            self.is_ped.append(traj.cls is ObjectClass.PEDESTRIAN)
            self.clearance.append(params.clearance_for(traj.cls))
            key = np.rint(traj.t / params.frame_dt).astype(np.int64)
            dup = np.concatenate(([False], np.diff(key) == 0))
            keep = ~dup
            keys.append(key[keep])
            xs.append(traj.x[keep])
            ys.append(traj.y[keep])
            vxs.append(traj.vx[keep])
            vys.append(traj.vy[keep])
            objs.append(np.full(int(keep.sum()), rank, dtype=np.int64))
        if keys:
            key_all = np.concatenate(keys)
            obj_all = np.concatenate(objs)
            sort = np.lexsort((obj_all, key_all))
            self.key = key_all[sort]
            self.obj = obj_all[sort]
            self.x = np.concatenate(xs)[sort]
            self.y = np.concatenate(ys)[sort]
            self.vx = np.concatenate(vxs)[sort]
            self.vy = np.concatenate(vys)[sort]
        else:
            self.key = np.empty(0, dtype=np.int64)
            self.obj = np.empty(0, dtype=np.int64)
            self.x = self.y = self.vx = self.vy = np.empty(0)
        self.is_ped = np.array(self.is_ped, dtype=bool)
        self.clearance = np.array(self.clearance, dtype=np.float64)

    def frames(self):
        """Yield (frame_key, slice) in time order."""
        if not len(self.key):
            return
        starts = np.nonzero(np.diff(self.key))[0] + 1
        bounds = np.concatenate(([0], starts, [len(self.key)]))
        for a, b in zip(bounds[:-1], bounds[1:]):
            yield int(self.key[a]), slice(int(a), int(b))


def _passing_pairs(table: _FrameTable, sl: slice, params: AnalysisParams):
    """Pairs in one frame that pass the candidate filters with finite TTC.

    Returns (obj_i, obj_j, ttc, cpx, cpy, mx, my) arrays for the frame.
    """
    x = table.x[sl]
    y = table.y[sl]
    obj = table.obj[sl]
    ii, jj = _kernels.frame_pairs(x, y, table.is_ped[obj], params.d_max)
    if not len(ii):
        return None
    vx = table.vx[sl]
    vy = table.vy[sl]
    clr = table.clearance[obj]
    ttc, case_id, cpx, cpy = _kernels.ttc_batch(
        x[ii], y[ii], vx[ii], vy[ii], x[jj], y[jj], vx[jj], vy[jj],
        clr[ii], clr[jj], params.v_stop, params.sin_theta_par, params.w_lat)
    keep = np.isfinite(ttc)
    if not params.include_v2v_following:
        v2v = ~(table.is_ped[obj[ii]] | table.is_ped[obj[jj]])
        keep &= ~(v2v & (case_id == 2))
    if not keep.any():
        return None
    ii, jj = ii[keep], jj[keep]
    return (obj[ii], obj[jj], ttc[keep], cpx[keep], cpy[keep],
            0.5 * (x[ii] + x[jj]), 0.5 * (y[ii] + y[jj]))


def candidate_pairs(trajs: list[Trajectory],
                    params: AnalysisParams | None = None) -> list[PairState]:
    """Pair states surfaced by the candidate filters.

    A pair is surfaced only once it has passed the distance / conflicting-
    path filters on at least k_min consecutive frames; all frames of such
    runs are returned, ordered by (t, id_a, id_b).
    """
    params = params or AnalysisParams()
    _require_velocities(trajs)
    table = _FrameTable(trajs, params)
    runs = _collect_runs(table, params)
    out = []
    for (a, b), episodes in runs.items():
        for ep in episodes:
            if len(ep) < params.k_min:
                continue
            for key, ttc, cpx, cpy, mx, my, sa, sb in ep:
                i, j = int(sa), int(sb)
                out.append(PairState(
                    table.ids[a], table.ids[b], key * params.frame_dt,
                    table.cls[a], table.cls[b],
                    float(table.x[i]), float(table.y[i]),
                    float(table.vx[i]), float(table.vy[i]),
                    float(table.x[j]), float(table.y[j]),
                    float(table.vx[j]), float(table.vy[j])))
    out.sort(key=lambda p: (p.t, p.id_a, p.id_b))
    return out


def _require_velocities(trajs: list[Trajectory]) -> None:
    for traj in trajs:
        if not traj.has_velocities:
            raise DataError(
                f"trajectory {traj.object_id} is missing velocities; "
                "run velocity estimation first")


def _collect_runs(table: _FrameTable, params: AnalysisParams):
    """Group passing pair-frames into maximal consecutive-frame episodes.

    Returns {(obj_a, obj_b): [episode]}, each episode a list of
    (key, ttc, cpx, cpy, mx, my, row_a, row_b) tuples.
    """
    open_runs: dict[tuple[int, int], list] = {}
    last_key: dict[tuple[int, int], int] = {}
    episodes: dict[tuple[int, int], list[list]] = {}

    def close(pair):
        episodes.setdefault(pair, []).append(open_runs.pop(pair))
        del last_key[pair]

    for key, sl in table.frames():
        hit = _passing_pairs(table, sl, params)
        if hit is None:
            continue
        oi, oj, ttc, cpx, cpy, mx, my = hit
        base = sl.start
        local_x = {int(o): base + k for k, o in enumerate(table.obj[sl])}
        for n in range(len(oi)):
            pair = (int(oi[n]), int(oj[n]))
            if pair in open_runs and key != last_key[pair] + 1:
                close(pair)
            row = (key, float(ttc[n]), float(cpx[n]), float(cpy[n]),
                   float(mx[n]), float(my[n]),
                   local_x[pair[0]], local_x[pair[1]])
            open_runs.setdefault(pair, []).append(row)
            last_key[pair] = key
    for pair in list(open_runs):
        close(pair)
    return episodes


def detect_ttc_conflicts(trajs: list[Trajectory],
                         params: AnalysisParams | None = None) -> list[ConflictEvent]:
    """One TTC event per interaction episode, at its minimum-TTC frame.

    All trajectories must carry velocities.  Events are sorted by
    (t, id_a, id_b) and are independent of trajectory input order.
    """
    params = params or AnalysisParams()
    _require_velocities(trajs)
    table = _FrameTable(trajs, params)
    events = []
    for (a, b), eps in _collect_runs(table, params).items():
        kind = event_kind(table.cls[a], table.cls[b])
        if kind is None:
            continue
        for ep in eps:
            if len(ep) < params.k_min:
                continue
            best = min(ep, key=lambda row: (row[1], row[0]))
            key, value, _cpx, _cpy, mx, my = best[:6]
            events.append(ConflictEvent(
                kind=kind, metric="TTC", value=value, t=key * params.frame_dt,
                x=mx, y=my,
                id_a=table.ids[a], cls_a=table.cls[a],
                id_b=table.ids[b], cls_b=table.cls[b],
                severe=value <= params.ttc_severe))
    events.sort(key=lambda e: (e.t, e.id_a, e.id_b))
    return events
