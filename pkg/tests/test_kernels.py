"""Backend equivalence: the numba kernels must match the numpy fallback."""

import numpy as np
import pytest

from intersafe._kernels import numpy_impl

try:
    from intersafe._kernels import numba_impl
    BACKENDS = [numpy_impl, numba_impl]
except ImportError:
    BACKENDS = [numpy_impl]

from oracles import membership_transits
from intersafe.model import ObjectClass, Trajectory
from intersafe.pet import MeshGrid


def _random_pairs(rng, n):
    pos = rng.uniform(-20, 20, size=(n, 4))
    vel = rng.uniform(-10, 10, size=(n, 4))
    # mix in stationary and parallel special cases
    vel[rng.random(n) < 0.25] *= 0.0
    par = rng.random(n) < 0.25
    vel[par, 2] = vel[par, 0]
    vel[par, 3] = vel[par, 1]
    clear = rng.choice([0.5, 4.5, 12.0], size=(n, 2))
    return pos, vel, clear


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda b: b.BACKEND)
def test_ttc_batch_matches_reference(impl):
    rng = np.random.default_rng(11)
    pos, vel, clear = _random_pairs(rng, 4000)
    args = (pos[:, 0], pos[:, 1], vel[:, 0], vel[:, 1],
            pos[:, 2], pos[:, 3], vel[:, 2], vel[:, 3],
            clear[:, 0], clear[:, 1], 0.2, np.sin(np.radians(5.0)), 1.0)
    ttc_ref, case_ref, cpx_ref, cpy_ref = numpy_impl.ttc_batch(*args)
    ttc, case, cpx, cpy = impl.ttc_batch(*args)
    assert np.array_equal(case, case_ref)
    np.testing.assert_allclose(ttc, ttc_ref, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(cpx, cpx_ref, rtol=1e-9, atol=1e-9, equal_nan=True)
    np.testing.assert_allclose(cpy, cpy_ref, rtol=1e-9, atol=1e-9, equal_nan=True)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda b: b.BACKEND)
def test_frame_pairs_matches_reference(impl):
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(0, 60))
        x = rng.uniform(-30, 30, n)
        y = rng.uniform(-30, 30, n)
        ped = rng.random(n) < 0.5
        ii, jj = impl.frame_pairs(x, y, ped, 10.0)
        ri, rj = numpy_impl.frame_pairs(x, y, ped, 10.0)
        assert sorted(zip(ii, jj)) == sorted(zip(ri, rj))


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda b: b.BACKEND)
def test_polyline_transits_matches_reference(impl):
    rng = np.random.default_rng(5)
    for _ in range(40):
        n = int(rng.integers(2, 40))
        ts = np.cumsum(rng.uniform(0.05, 0.2, n)) + 100.0
        xs = np.cumsum(rng.uniform(-2.5, 2.5, n)) + 5.0
        ys = np.cumsum(rng.uniform(-2.5, 2.5, n)) + 5.0
        out = impl.polyline_transits(ts, xs, ys, -10.0, -10.0, 1.0, 30, 30)
        ref = numpy_impl.polyline_transits(ts, xs, ys, -10.0, -10.0, 1.0, 30, 30)
        assert np.array_equal(out[0], ref[0]) and np.array_equal(out[1], ref[1])
        np.testing.assert_allclose(out[2], ref[2], atol=1e-9)
        np.testing.assert_allclose(out[3], ref[3], atol=1e-9)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda b: b.BACKEND)
def test_polygon_kernels_match_reference(impl):
    rng = np.random.default_rng(7)
    angles = np.sort(rng.uniform(0, 2 * np.pi, 7))
    poly_x = 8.0 * np.cos(angles) + rng.uniform(-0.5, 0.5, 7)
    poly_y = 8.0 * np.sin(angles) + rng.uniform(-0.5, 0.5, 7)
    xs = rng.uniform(-12, 12, 500)
    ys = rng.uniform(-12, 12, 500)
    assert np.array_equal(impl.points_in_polygon(xs, ys, poly_x, poly_y),
                          numpy_impl.points_in_polygon(xs, ys, poly_x, poly_y))
    np.testing.assert_allclose(
        impl.polygon_edge_distance(xs, ys, poly_x, poly_y),
        numpy_impl.polygon_edge_distance(xs, ys, poly_x, poly_y), rtol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda b: b.BACKEND)
def test_fast_object_cannot_tunnel(impl):
    # 20 m/s at 0.1 s sampling crosses two 1 m cells per frame; every swept
    # cell must still receive a transit (checked against dense membership)
    mesh = MeshGrid((0.0, 0.0), 1.0, 40, 40)
    n = 15
    t = 100.0 + 0.1 * np.arange(n)
    x = 1.3 + 2.0 * np.arange(n)          # 20 m/s
    y = np.full(n, 3.4)
    cols, rows, t_en, t_ex = impl.polyline_transits(t, x, y, 0.0, 0.0, 1.0, 40, 40)
    assert list(cols) == list(range(1, 30))
    assert np.all(np.diff(t_en) > 0)
    traj = Trajectory("f1", ObjectClass.CAR, t, x, y)
    dense = membership_transits([traj], mesh)
    dense_cells = sorted(dense.keys())
    assert dense_cells == sorted(zip(cols.tolist(), rows.tolist()))
    for (c, r), lst in dense.items():
        k = list(cols).index(c)
        assert abs(lst[0].t_enter - t_en[k]) <= 0.002
        assert abs(lst[0].t_exit - t_ex[k]) <= 0.002
