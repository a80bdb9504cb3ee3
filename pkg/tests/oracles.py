"""Independent brute-force oracles used across the test suite.

These deliberately avoid the package's analytic case logic and grid
traversal: the TTC oracle steps constant-velocity motion in 1 ms
increments and reports the first time the objects' (small) contact disks
overlap; the transit oracle resamples trajectories at 1 ms and assigns
cells by point membership.
"""

import numpy as np

from intersafe.model import Trajectory
from intersafe.pet import MERGE_GAP, CellTransit

STEP = 0.001
CONTACT_RADIUS = 0.005          # per object; sum stays below per-step motion


def first_contact_time(ax, ay, avx, avy, bx, by, bvx, bvy,
                       horizon=20.0, radius_sum=2 * CONTACT_RADIUS):
    """First time the two contact disks overlap, or None within horizon."""
    t = np.arange(int(round(horizon / STEP)) + 1) * STEP
    dx = (bx - ax) + (bvx - avx) * t
    dy = (by - ay) + (bvy - avy) * t
    hit = np.nonzero(dx * dx + dy * dy <= radius_sum * radius_sum)[0]
    if len(hit) == 0:
        return None
    return float(t[hit[0]])


def min_pair_distance(ax, ay, avx, avy, bx, by, bvx, bvy, horizon=20.0):
    """Closed-form minimum distance over [0, horizon] (generator helper)."""
    px, py = bx - ax, by - ay
    vx, vy = bvx - avx, bvy - avy
    v2 = vx * vx + vy * vy
    candidates = [0.0, horizon]
    if v2 > 0:
        t_star = -(px * vx + py * vy) / v2
        if 0.0 < t_star < horizon:
            candidates.append(t_star)
    return min(np.hypot(px + vx * t, py + vy * t) for t in candidates)


def membership_transits(trajs, mesh, dt=STEP):
    """Per-cell transit lists from dense point-membership resampling."""
    ox, oy = mesh.origin
    cell = mesh.cell_size
    raw = []
    for traj in sorted(trajs, key=lambda tr: tr.object_id):
        if len(traj) < 2:
            continue
        n = int(round((traj.t[-1] - traj.t[0]) / dt)) + 1
        ts = traj.t[0] + np.arange(n) * dt
        xs = np.interp(ts, traj.t, traj.x)
        ys = np.interp(ts, traj.t, traj.y)
        cols = np.floor((xs - ox) / cell).astype(np.int64)
        rows = np.floor((ys - oy) / cell).astype(np.int64)
        ok = (cols >= 0) & (cols < mesh.n_cols) & (rows >= 0) & (rows < mesh.n_rows)
        code = np.where(ok, rows * mesh.n_cols + cols, -1)
        change = np.nonzero(np.diff(code))[0]
        starts = np.concatenate(([0], change + 1))
        ends = np.concatenate((change, [len(code) - 1]))
        for s, e in zip(starts, ends):
            if code[s] >= 0:
                raw.append(CellTransit(int(cols[s]), int(rows[s]),
                                       traj.object_id, traj.cls,
                                       float(ts[s]), float(ts[e])))
    # same re-entry merge rule as the engine's transit definition
    per_key = {}
    for tr in raw:
        per_key.setdefault((tr.col, tr.row, tr.object_id), []).append(tr)
    by_cell = {}
    for (col, row, _oid), lst in per_key.items():
        lst.sort(key=lambda tr: tr.t_enter)
        current = lst[0]
        for tr in lst[1:]:
            if tr.t_enter - current.t_exit < MERGE_GAP:
                current = CellTransit(col, row, current.object_id, current.cls,
                                      current.t_enter, max(current.t_exit, tr.t_exit))
            else:
                by_cell.setdefault((col, row), []).append(current)
                current = tr
        by_cell.setdefault((col, row), []).append(current)
    for lst in by_cell.values():
        lst.sort(key=lambda tr: (tr.t_enter, tr.t_exit, tr.object_id))
    return by_cell


def uniform_track(oid, cls, t0, p0, v, n, dt=0.1):
    """Constant-velocity trajectory with n samples starting at t0."""
    k = np.arange(n)
    return Trajectory(oid, cls, t0 + k * dt,
                      p0[0] + v[0] * k * dt, p0[1] + v[1] * k * dt,
                      np.full(n, float(v[0])), np.full(n, float(v[1])))
