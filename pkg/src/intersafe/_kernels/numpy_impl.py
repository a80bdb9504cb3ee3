"""Vectorized numpy implementations of the hot kernels.

This is the fallback backend (see package __init__ for selection) and the
reference the numba backend is tested against.
"""

import numpy as np

BACKEND = "numpy"

_EPS = 1e-12


def ttc_batch(ax, ay, avx, avy, bx, by, bvx, bvy, clear_a, clear_b,
              v_stop, sin_par, w_lat):
    """Time-to-collision for an array of object pairs.

    Inputs are flat float64 arrays, one entry per pair: positions and
    velocities of both objects plus per-object clearance lengths.  Returns
    (ttc, case_id, cp_x, cp_y); ttc is +inf when no collision is possible,
    the conflict point is NaN except for finite crossing-geometry results.

    Case 1: at least one object slower than v_stop (stationary).
    Case 2: both moving on parallel lines (|sin| < sin_par).
    Case 3: both moving, lines of motion crossing.
    """
    ax, ay, avx, avy, bx, by, bvx, bvy, clear_a, clear_b = (
        np.asarray(v, dtype=np.float64)
        for v in (ax, ay, avx, avy, bx, by, bvx, bvy, clear_a, clear_b)
    )
    n = ax.shape[0]
    ttc = np.full(n, np.inf)
    case_id = np.zeros(n, dtype=np.int8)
    cp_x = np.full(n, np.nan)
    cp_y = np.full(n, np.nan)

    dx = bx - ax
    dy = by - ay
    s = np.hypot(dx, dy)
    sa = np.hypot(avx, avy)
    sb = np.hypot(bvx, bvy)

    coincident = s < 1e-9
    ttc[coincident] = 0.0

    # ---- case 1: one or both (near-)stationary -------------------------
    m1 = ~coincident & ((sa < v_stop) | (sb < v_stop))
    case_id[m1] = 1
    one_moving = m1 & ~((sa < v_stop) & (sb < v_stop))
    # mover velocity and vector from mover to the stationary object
    a_moves = sa >= v_stop
    mvx = np.where(a_moves, avx, bvx)
    mvy = np.where(a_moves, avy, bvy)
    rx = np.where(a_moves, dx, -dx)
    ry = np.where(a_moves, dy, -dy)
    sp = np.where(a_moves, sa, sb)
    with np.errstate(invalid="ignore", divide="ignore"):
        proj = (mvx * rx + mvy * ry) / sp
        lat1 = np.abs(mvx * ry - mvy * rx) / sp
        hit = one_moving & (proj > 0.0) & (lat1 <= w_lat)
        ttc[hit] = s[hit] / sp[hit]

    # ---- case 2: parallel lines ----------------------------------------
    moving = ~coincident & (sa >= v_stop) & (sb >= v_stop)
    cross = avx * bvy - avy * bvx
    par = moving & (np.abs(cross) < sin_par * sa * sb)
    case_id[par] = 2
    with np.errstate(invalid="ignore", divide="ignore"):
        lat2 = np.abs(avx * dy - avy * dx) / sa
        closing = -(dx * (bvx - avx) + dy * (bvy - avy)) / s
        hit2 = par & (lat2 <= w_lat) & (closing > _EPS)
        ttc[hit2] = s[hit2] / closing[hit2]

    # ---- case 3: crossing lines ----------------------------------------
    m3 = moving & ~par
    case_id[m3] = 3
    with np.errstate(invalid="ignore", divide="ignore"):
        ta = (dx * bvy - dy * bvx) / cross
        tb = (dx * avy - dy * avx) / cross
        approach = m3 & (ta >= 0.0) & (tb >= 0.0)
        # leading object may fully clear the conflict point first
        t_lead = np.minimum(ta, tb)
        t_lag = np.maximum(ta, tb)
        clear_len = np.where(ta <= tb, clear_a, clear_b)
        speed_lead = np.where(ta <= tb, sa, sb)
        cleared = t_lead + clear_len / speed_lead < t_lag
        hit3 = approach & ~cleared
        ttc[hit3] = t_lag[hit3]
        cp_x[hit3] = ax[hit3] + avx[hit3] * ta[hit3]
        cp_y[hit3] = ay[hit3] + avy[hit3] * ta[hit3]

    return ttc, case_id, cp_x, cp_y


def frame_pairs(x, y, is_ped, d_max):
    """Index pairs (i < j) within d_max of each other, excluding ped-ped."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    is_ped = np.asarray(is_ped, dtype=bool)
    n = x.shape[0]
    if n < 2:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    close = dx * dx + dy * dy <= d_max * d_max
    close &= ~(is_ped[:, None] & is_ped[None, :])
    close &= np.triu(np.ones((n, n), dtype=bool), k=1)
    ii, jj = np.nonzero(close)
    return ii.astype(np.int64), jj.astype(np.int64)


def _clip_segment(x0, y0, x1, y1, xmin, ymin, xmax, ymax):
    """Liang-Barsky: param range [u0, u1] of the segment inside the box."""
    dx = x1 - x0
    dy = y1 - y0
    u0, u1 = 0.0, 1.0
    for p, q in ((-dx, x0 - xmin), (dx, xmax - x0),
                 (-dy, y0 - ymin), (dy, ymax - y0)):
        if p == 0.0:
            if q < 0.0:
                return 1.0, 0.0
        else:
            r = q / p
            if p < 0.0:
                if r > u0:
                    u0 = r
            else:
                if r < u1:
                    u1 = r
    return u0, u1


def _crossing_params(c0, c1, origin, cell, u0, u1, p0, dp):
    """Params in (u0, u1) where the segment crosses gridlines on one axis."""
    if dp == 0.0:
        return np.empty(0)
    lo = min(c0, c1)
    hi = max(c0, c1)
    k_lo = int(np.floor((lo - origin) / cell))
    k_hi = int(np.ceil((hi - origin) / cell))
    ks = np.arange(k_lo, k_hi + 1, dtype=np.float64)
    us = (origin + ks * cell - p0) / dp
    return us[(us > u0) & (us < u1)]


def polyline_transits(ts, xs, ys, ox, oy, cell, n_cols, n_rows):
    """Grid cells swept by a timed polyline.

    Uses segment/gridline intersection so fast objects cannot skip cells.
    Returns (col, row, t_enter, t_exit) in path order with contiguous
    same-cell intervals merged.  Portions outside the grid are dropped.
    """
    ts = np.asarray(ts, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    xmax = ox + n_cols * cell
    ymax = oy + n_rows * cell

    cols: list[int] = []
    rows: list[int] = []
    t_en: list[float] = []
    t_ex: list[float] = []

    def emit(col, row, ta, tb):
        if cols and cols[-1] == col and rows[-1] == row and ta - t_ex[-1] < 1e-9:
            t_ex[-1] = tb
        else:
            cols.append(col)
            rows.append(row)
            t_en.append(ta)
            t_ex.append(tb)

    for i in range(len(ts) - 1):
        x0, y0, t0 = xs[i], ys[i], ts[i]
        x1, y1, t1 = xs[i + 1], ys[i + 1], ts[i + 1]
        dt = t1 - t0
        if dt <= 0.0:
            continue
        u0, u1 = _clip_segment(x0, y0, x1, y1, ox, oy, xmax, ymax)
        if u0 >= u1:
            continue
        dx = x1 - x0
        dy = y1 - y0
        ux = _crossing_params(x0 + u0 * dx, x0 + u1 * dx, ox, cell, u0, u1, x0, dx)
        uy = _crossing_params(y0 + u0 * dy, y0 + u1 * dy, oy, cell, u0, u1, y0, dy)
        bounds = np.concatenate(([u0], np.sort(np.concatenate((ux, uy))), [u1]))
        for k in range(len(bounds) - 1):
            ua, ub = bounds[k], bounds[k + 1]
            if ub - ua < _EPS:
                continue
            um = 0.5 * (ua + ub)
            col = int((x0 + um * dx - ox) // cell)
            row = int((y0 + um * dy - oy) // cell)
            col = min(max(col, 0), n_cols - 1)
            row = min(max(row, 0), n_rows - 1)
            emit(col, row, t0 + ua * dt, t0 + ub * dt)

    return (np.array(cols, dtype=np.int64), np.array(rows, dtype=np.int64),
            np.array(t_en, dtype=np.float64), np.array(t_ex, dtype=np.float64))


def points_in_polygon(xs, ys, poly_x, poly_y):
    """Even-odd containment test for many points against one polygon."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    poly_x = np.asarray(poly_x, dtype=np.float64)
    poly_y = np.asarray(poly_y, dtype=np.float64)
    n = poly_x.shape[0]
    inside = np.zeros(xs.shape, dtype=bool)
    j = n - 1
    for i in range(n):
        xi, yi = poly_x[i], poly_y[i]
        xj, yj = poly_x[j], poly_y[j]
        straddles = (yi > ys) != (yj > ys)
        with np.errstate(invalid="ignore", divide="ignore"):
            x_cross = (xj - xi) * (ys - yi) / (yj - yi) + xi
        inside ^= straddles & (xs < x_cross)
        j = i
    return inside


def polygon_edge_distance(xs, ys, poly_x, poly_y):
    """Distance from each point to the nearest polygon edge."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    poly_x = np.asarray(poly_x, dtype=np.float64)
    poly_y = np.asarray(poly_y, dtype=np.float64)
    n = poly_x.shape[0]
    best = np.full(xs.shape, np.inf)
    j = n - 1
    for i in range(n):
        ex = poly_x[j] - poly_x[i]
        ey = poly_y[j] - poly_y[i]
        len2 = ex * ex + ey * ey
        px = xs - poly_x[i]
        py = ys - poly_y[i]
        if len2 > 0.0:
            t = np.clip((px * ex + py * ey) / len2, 0.0, 1.0)
        else:
            t = np.zeros(xs.shape)
        dx = px - t * ex
        dy = py - t * ey
        np.minimum(best, np.hypot(dx, dy), out=best)
        j = i
    return best
