"""Numba-compiled implementations of the hot kernels.

Same contracts as numpy_impl; scalar math is written once and looped in
nopython mode.  Importing this module requires numba.
"""

import math

import numpy as np
from numba import njit

BACKEND = "numba"

_EPS = 1e-12


@njit(cache=True)
def _ttc_single(ax, ay, avx, avy, bx, by, bvx, bvy, ca, cb,
                v_stop, sin_par, w_lat):
    dx = bx - ax
    dy = by - ay
    s = math.hypot(dx, dy)
    sa = math.hypot(avx, avy)
    sb = math.hypot(bvx, bvy)
    if s < 1e-9:
        return 0.0, 0, np.nan, np.nan
    if sa < v_stop or sb < v_stop:
        if sa < v_stop and sb < v_stop:
            return np.inf, 1, np.nan, np.nan
        if sa >= v_stop:
            mvx, mvy, rx, ry, sp = avx, avy, dx, dy, sa
        else:
            mvx, mvy, rx, ry, sp = bvx, bvy, -dx, -dy, sb
        proj = (mvx * rx + mvy * ry) / sp
        if proj <= 0.0:
            return np.inf, 1, np.nan, np.nan
        lat = abs(mvx * ry - mvy * rx) / sp
        if lat > w_lat:
            return np.inf, 1, np.nan, np.nan
        return s / sp, 1, np.nan, np.nan
    cross = avx * bvy - avy * bvx
    if abs(cross) < sin_par * sa * sb:
        lat = abs(avx * dy - avy * dx) / sa
        if lat > w_lat:
            return np.inf, 2, np.nan, np.nan
        closing = -(dx * (bvx - avx) + dy * (bvy - avy)) / s
        if closing <= _EPS:
            return np.inf, 2, np.nan, np.nan
        return s / closing, 2, np.nan, np.nan
    ta = (dx * bvy - dy * bvx) / cross
    tb = (dx * avy - dy * avx) / cross
    if ta < 0.0 or tb < 0.0:
        return np.inf, 3, np.nan, np.nan
    if ta <= tb:
        t_lead, t_lag, clear_len, speed_lead = ta, tb, ca, sa
    else:
        t_lead, t_lag, clear_len, speed_lead = tb, ta, cb, sb
    if t_lead + clear_len / speed_lead < t_lag:
        return np.inf, 3, np.nan, np.nan
    return t_lag, 3, ax + avx * ta, ay + avy * ta


@njit(cache=True)
def ttc_batch(ax, ay, avx, avy, bx, by, bvx, bvy, clear_a, clear_b,
              v_stop, sin_par, w_lat):
    n = ax.shape[0]
    ttc = np.empty(n, dtype=np.float64)
    case_id = np.empty(n, dtype=np.int8)
    cp_x = np.empty(n, dtype=np.float64)
    cp_y = np.empty(n, dtype=np.float64)
    for i in range(n):
        t, c, px, py = _ttc_single(
            ax[i], ay[i], avx[i], avy[i], bx[i], by[i], bvx[i], bvy[i],
            clear_a[i], clear_b[i], v_stop, sin_par, w_lat)
        ttc[i] = t
        case_id[i] = c
        cp_x[i] = px
        cp_y[i] = py
    return ttc, case_id, cp_x, cp_y


@njit(cache=True)
def frame_pairs(x, y, is_ped, d_max):
    n = x.shape[0]
    d2_max = d_max * d_max
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if is_ped[i] and is_ped[j]:
                continue
            dx = x[j] - x[i]
            dy = y[j] - y[i]
            if dx * dx + dy * dy <= d2_max:
                count += 1
    ii = np.empty(count, dtype=np.int64)
    jj = np.empty(count, dtype=np.int64)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            if is_ped[i] and is_ped[j]:
                continue
            dx = x[j] - x[i]
            dy = y[j] - y[i]
            if dx * dx + dy * dy <= d2_max:
                ii[k] = i
                jj[k] = j
                k += 1
    return ii, jj


@njit(cache=True)
def _clip_segment(x0, y0, x1, y1, xmin, ymin, xmax, ymax):
    dx = x1 - x0
    dy = y1 - y0
    u0 = 0.0
    u1 = 1.0
    for side in range(4):
        if side == 0:
            p, q = -dx, x0 - xmin
        elif side == 1:
            p, q = dx, xmax - x0
        elif side == 2:
            p, q = -dy, y0 - ymin
        else:
            p, q = dy, ymax - y0
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


@njit(cache=True)
def polyline_transits(ts, xs, ys, ox, oy, cell, n_cols, n_rows):
    xmax = ox + n_cols * cell
    ymax = oy + n_rows * cell
    n_seg = ts.shape[0] - 1

    # generous upper bound on emitted intervals
    cap = 0
    for i in range(n_seg):
        cap += 3 + int(abs(xs[i + 1] - xs[i]) / cell) + int(abs(ys[i + 1] - ys[i]) / cell)
    cols = np.empty(cap, dtype=np.int64)
    rows = np.empty(cap, dtype=np.int64)
    t_en = np.empty(cap, dtype=np.float64)
    t_ex = np.empty(cap, dtype=np.float64)
    m = 0

    for i in range(n_seg):
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

        # walk x- and y-gridline crossings merged in param order
        if dx != 0.0:
            xa = x0 + u0 * dx
            xb = x0 + u1 * dx
            kx_lo = int(math.floor((min(xa, xb) - ox) / cell))
            kx_hi = int(math.ceil((max(xa, xb) - ox) / cell))
        else:
            kx_lo, kx_hi = 0, -1
        if dy != 0.0:
            ya = y0 + u0 * dy
            yb = y0 + u1 * dy
            ky_lo = int(math.floor((min(ya, yb) - oy) / cell))
            ky_hi = int(math.ceil((max(ya, yb) - oy) / cell))
        else:
            ky_lo, ky_hi = 0, -1

        kx = kx_lo if dx > 0.0 else kx_hi
        ky = ky_lo if dy > 0.0 else ky_hi
        sx = 1 if dx > 0.0 else -1
        sy = 1 if dy > 0.0 else -1

        ua = u0
        while True:
            ux = np.inf
            while kx_lo <= kx <= kx_hi:
                u = (ox + kx * cell - x0) / dx
                if u > ua:
                    if u < u1:
                        ux = u
                    break
                kx += sx
            uy = np.inf
            while ky_lo <= ky <= ky_hi:
                u = (oy + ky * cell - y0) / dy
                if u > ua:
                    if u < u1:
                        uy = u
                    break
                ky += sy
            ub = min(min(ux, uy), u1)
            if ub - ua >= _EPS:
                um = 0.5 * (ua + ub)
                col = int((x0 + um * dx - ox) // cell)
                row = int((y0 + um * dy - oy) // cell)
                if col < 0:
                    col = 0
                elif col > n_cols - 1:
                    col = n_cols - 1
                if row < 0:
                    row = 0
                elif row > n_rows - 1:
                    row = n_rows - 1
                ta = t0 + ua * dt
                tb = t0 + ub * dt
                if m > 0 and cols[m - 1] == col and rows[m - 1] == row \
                        and ta - t_ex[m - 1] < 1e-9:
                    t_ex[m - 1] = tb
                else:
                    cols[m] = col
                    rows[m] = row
                    t_en[m] = ta
                    t_ex[m] = tb
                    m += 1
            if ub >= u1:
                break
            ua = ub

    return cols[:m].copy(), rows[:m].copy(), t_en[:m].copy(), t_ex[:m].copy()


@njit(cache=True)
def points_in_polygon(xs, ys, poly_x, poly_y):
    n_pts = xs.shape[0]
    n = poly_x.shape[0]
    inside = np.zeros(n_pts, dtype=np.bool_)
    for p in range(n_pts):
        x = xs[p]
        y = ys[p]
        flag = False
        j = n - 1
        for i in range(n):
            yi = poly_y[i]
            yj = poly_y[j]
            if (yi > y) != (yj > y):
                x_cross = (poly_x[j] - poly_x[i]) * (y - yi) / (yj - yi) + poly_x[i]
                if x < x_cross:
                    flag = not flag
            j = i
        inside[p] = flag
    return inside


@njit(cache=True)
def polygon_edge_distance(xs, ys, poly_x, poly_y):
    n_pts = xs.shape[0]
    n = poly_x.shape[0]
    out = np.empty(n_pts, dtype=np.float64)
    for p in range(n_pts):
        x = xs[p]
        y = ys[p]
        best = np.inf
        j = n - 1
        for i in range(n):
            ex = poly_x[j] - poly_x[i]
            ey = poly_y[j] - poly_y[i]
            len2 = ex * ex + ey * ey
            px = x - poly_x[i]
            py = y - poly_y[i]
            if len2 > 0.0:
                t = (px * ex + py * ey) / len2
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            else:
                t = 0.0
            d = math.hypot(px - t * ex, py - t * ey)
            if d < best:
                best = d
            j = i
        out[p] = best
    return out
