import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import uniform_track
from intersafe.errors import ConfigError
from intersafe.model import (
    ALL_MOVEMENTS,
    CrosswalkRole,
    IntersectionConfig,
    MovementCode,
    ObjectClass,
    Trajectory,
    Turn,
    classify_vehicle_movement,
    crosswalk_role,
    movement_phase_table,
    pedestrian_phase,
    vehicle_phase,
)

# hand-built truth table: (entry leg, exit leg) -> movement code
ENTRY_EXIT_TABLE = {
    ("S", "N"): "NBT", ("S", "E"): "NBR", ("S", "W"): "NBL",
    ("N", "S"): "SBT", ("N", "W"): "SBR", ("N", "E"): "SBL",
    ("W", "E"): "EBT", ("W", "S"): "EBR", ("W", "N"): "EBL",
    ("E", "W"): "WBT", ("E", "N"): "WBR", ("E", "S"): "WBL",
}

LEG_POINT = {"N": (0.0, 23.0), "S": (0.0, -23.0), "E": (23.0, 0.0), "W": (-23.0, 0.0)}


def _leg_to_leg_track(entry, exit_, n=40):
    a = np.array(LEG_POINT[entry])
    b = np.array(LEG_POINT[exit_])
    mid = np.array([0.0, 0.0])
    f = np.linspace(0, 1, n)
    pts = np.where(f[:, None] < 0.5,
                   a + 2 * f[:, None] * (mid - a),
                   mid + (2 * f[:, None] - 1) * (b - mid))
    return Trajectory("veh", ObjectClass.CAR, 100 + 0.1 * np.arange(n),
                      pts[:, 0], pts[:, 1])


def test_movement_truth_table(cfg):
    for (entry, exit_), code in ENTRY_EXIT_TABLE.items():
        mv = classify_vehicle_movement(_leg_to_leg_track(entry, exit_), cfg)
        assert mv is not None and mv.code == code, (entry, exit_, code)


def test_through_movement_west_to_east(cfg):
    mv = classify_vehicle_movement(_leg_to_leg_track("W", "E"), cfg)
    assert mv.code == "EBT"


def test_same_leg_is_unclassifiable(cfg):
    traj = _leg_to_leg_track("S", "S")
    assert classify_vehicle_movement(traj, cfg) is None


def test_clipped_track_is_unclassifiable(cfg):
    # track ends mid-intersection, outside the 2 m entry/exit band
    n = 30
    t = 100 + 0.1 * np.arange(n)
    y = np.linspace(-23, 0, n)
    traj = Trajectory("veh", ObjectClass.CAR, t, np.zeros(n), y)
    assert classify_vehicle_movement(traj, cfg) is None


def test_rotation_covariance(cfg):
    # rotating the world a quarter turn clockwise maps NB->EB, EB->SB, ...
    bound_map = {"NB": "EB", "EB": "SB", "SB": "WB", "WB": "NB"}
    for (entry, exit_), code in ENTRY_EXIT_TABLE.items():
        traj = _leg_to_leg_track(entry, exit_)
        rotated = Trajectory("veh", ObjectClass.CAR, traj.t, traj.y, -traj.x)
        mv = classify_vehicle_movement(traj, cfg)
        mv_rot = classify_vehicle_movement(rotated, cfg)
        assert mv_rot.bound == bound_map[mv.bound]
        assert mv_rot.turn == mv.turn


def test_vehicle_phase_pinned(cfg):
    # north-south through movements carry the major-road phases 2/6,
    # east-west the minor 4/8; lefts take the paired odd phase (2 -> 5)
    assert vehicle_phase(MovementCode.from_code("NBT"), cfg) == 2
    assert vehicle_phase(MovementCode.from_code("SBT"), cfg) == 6
    assert vehicle_phase(MovementCode.from_code("EBT"), cfg) == 4
    assert vehicle_phase(MovementCode.from_code("NBL"), cfg) == 5
    assert vehicle_phase(MovementCode.from_code("SBL"), cfg) == 1
    assert vehicle_phase(MovementCode.from_code("EBL"), cfg) == 7
    assert vehicle_phase(MovementCode.from_code("WBL"), cfg) == 3
    assert vehicle_phase(MovementCode.from_code("NBR"), cfg) == 2


def test_through_phases_biject_bounds(cfg):
    phases = {vehicle_phase(MovementCode(b, Turn.THROUGH), cfg)
              for b in ("NB", "SB", "EB", "WB")}
    assert phases == {2, 4, 6, 8}


def test_movement_phase_table_complete(cfg):
    table = movement_phase_table(cfg)
    assert len(table) == 12
    assert set(table.values()) <= set(range(1, 9))


def test_pedestrian_phase_containment(cfg):
    # walking along the north crosswalk -> that leg's phase
    traj = uniform_track("ped", ObjectClass.PEDESTRIAN, 100, (-8.0, 9.5),
                         (1.4, 0.0), 115)
    assert pedestrian_phase(traj, cfg) == cfg.ped_phase_of_leg["N"]


def test_median_walker_phase_zero(cfg):
    traj = uniform_track("ped", ObjectClass.PEDESTRIAN, 100, (0.0, -15.0),
                         (0.0, 1.3), 180)
    assert pedestrian_phase(traj, cfg) == 0


def test_partial_containment_below_threshold(cfg):
    # 4 of 10 in-region points inside the east crosswalk: below theta 0.5
    xs = [9.5, 9.5, 9.5, 9.5, 0.0, 0.0, 1.0, -1.0, 2.0, -2.0]
    ys = [0.0, 1.0, 2.0, 3.0, 0.0, 1.0, 0.0, 0.0, 1.0, 2.0]
    traj = Trajectory("ped", ObjectClass.PEDESTRIAN,
                      100 + 0.1 * np.arange(10), xs, ys)
    assert pedestrian_phase(traj, cfg, theta_cw=0.5) == 0
    assert pedestrian_phase(traj, cfg, theta_cw=0.4) == cfg.ped_phase_of_leg["E"]


@given(st.integers(0, 11), st.integers(0, 3))
@settings(max_examples=48, deadline=None)
def test_crosswalk_role_examples_and_bijection(mv_idx, leg_idx):
    cfg = IntersectionConfig.from_dict(_CFG_RAW)
    mv = ALL_MOVEMENTS[mv_idx]
    roles = [crosswalk_role(mv, leg, cfg) for leg in ("N", "E", "S", "W")]
    assert sorted(r.value for r in roles) == sorted(r.value for r in CrosswalkRole)


def test_crosswalk_role_pinned(cfg):
    nbt = MovementCode.from_code("NBT")
    assert crosswalk_role(nbt, "S", cfg) is CrosswalkRole.NEAR
    assert crosswalk_role(nbt, "N", cfg) is CrosswalkRole.FAR
    assert crosswalk_role(MovementCode.from_code("NBR"), "E", cfg) \
        is CrosswalkRole.ADJACENT_PARALLEL
    assert crosswalk_role(nbt, "W", cfg) is CrosswalkRole.PARALLEL_OPPOSITE


def test_left_hand_traffic_mirrors_parallel_roles(cfg):
    raw = dict(_CFG_RAW)
    raw["right_hand_traffic"] = False
    lht = IntersectionConfig.from_dict(raw)
    nbt = MovementCode.from_code("NBT")
    assert crosswalk_role(nbt, "W", lht) is CrosswalkRole.ADJACENT_PARALLEL
    assert crosswalk_role(nbt, "E", lht) is CrosswalkRole.PARALLEL_OPPOSITE
    assert crosswalk_role(nbt, "S", lht) is CrosswalkRole.NEAR


def test_config_validation_rejects_bad_phase_maps():
    raw = dict(_CFG_RAW)
    raw["through_phases"] = {"NB": 4, "SB": 8, "EB": 2, "WB": 6}
    with pytest.raises(ConfigError):
        IntersectionConfig.from_dict(raw)
    raw = dict(_CFG_RAW)
    raw["mesh_cell_size"] = 0.0
    with pytest.raises(ConfigError):
        IntersectionConfig.from_dict(raw)


def test_trajectory_invariants():
    with pytest.raises(ValueError):
        Trajectory("a", ObjectClass.CAR, [1.0, 1.0], [0, 0], [0, 0])
    with pytest.raises(ValueError):
        Trajectory("a", ObjectClass.CAR, [0.0, 1.0], [0, math.nan], [0, 0])
    traj = uniform_track("a", ObjectClass.CAR, 0.0, (0, 0), (1, 0), 5)
    assert traj.has_velocities
    assert [p.t for p in traj.points] == pytest.approx([0, 0.1, 0.2, 0.3, 0.4])


_CFG_RAW = {
    "center": [0.0, 0.0],
    "leg_bearings": {"N": 0.0, "E": 90.0, "S": 180.0, "W": 270.0},
    "analysis_region": [[-20, -20], [20, -20], [20, 20], [-20, 20]],
    "crosswalk_polygons": {
        "N": [[-7, 8], [7, 8], [7, 11], [-7, 11]],
        "S": [[-7, -11], [7, -11], [7, -8], [-7, -8]],
        "E": [[8, -7], [11, -7], [11, 7], [8, 7]],
        "W": [[-11, -7], [-8, -7], [-8, 7], [-11, 7]],
    },
    "major_axis": "NS",
    "mesh_cell_size": 1.0,
    "crosswalk_buffer": 0.5,
    "through_phases": {"NB": 2, "SB": 6, "EB": 4, "WB": 8},
    "ped_phase_of_leg": {"N": 4, "S": 8, "E": 2, "W": 6},
}
