"""Post-encroachment time over a mesh grid.

The analysis region is divided into square cells; every cell keeps the
time-ordered list of objects that swept over it (entry and exit times
from segment/boundary intersection, so fast objects cannot skip cells).
The PET of two consecutive transits by different objects is the gap
between the leader leaving and the follower entering; gaps within the
recording window become conflicts, with overlapping occupancy clamped
to PET = 0 (the most severe value).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import (
    ConflictEvent,
    IntersectionConfig,
    ObjectClass,
    Trajectory,
    event_kind,
)
from .params import AnalysisParams

#: transit re-entries of one object into one cell closer than this merge
MERGE_GAP = 0.1


@dataclass(frozen=True)
class MeshGrid:
    origin: tuple[float, float]
    cell_size: float
    n_cols: int
    n_rows: int

    def __post_init__(self):
        if self.cell_size <= 0 or self.n_cols < 1 or self.n_rows < 1:
            raise ValueError("invalid mesh")

    def cell_of(self, x: float, y: float) -> tuple[int, int] | None:
        col = int((x - self.origin[0]) // self.cell_size)
        row = int((y - self.origin[1]) // self.cell_size)
        if 0 <= col < self.n_cols and 0 <= row < self.n_rows:
            return col, row
        return None

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (self.origin[0] + (col + 0.5) * self.cell_size,
                self.origin[1] + (row + 0.5) * self.cell_size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)


def build_mesh(cfg: IntersectionConfig) -> MeshGrid:
    """Grid of cfg.mesh_cell_size cells covering the analysis bounding box."""
    x0, y0, x1, y1 = cfg.region_bbox()
    cell = cfg.mesh_cell_size
    return MeshGrid(
        origin=(x0, y0), cell_size=cell,
        n_cols=max(1, math.ceil((x1 - x0) / cell)),
        n_rows=max(1, math.ceil((y1 - y0) / cell)))


@dataclass(frozen=True)
class CellTransit:
    col: int
    row: int
    object_id: str
    cls: ObjectClass
    t_enter: float
    t_exit: float


def trajectory_transits(traj: Trajectory, mesh: MeshGrid) -> list[CellTransit]:
    """Cells swept by one trajectory, in path order, re-entries merged."""
    cols, rows, t_en, t_ex = _kernels.polyline_transits(
        traj.t, traj.x, traj.y,
        mesh.origin[0], mesh.origin[1], mesh.cell_size,
        mesh.n_cols, mesh.n_rows)
    raw = [CellTransit(int(c), int(r), traj.object_id, traj.cls, float(a), float(b))
           for c, r, a, b in zip(cols, rows, t_en, t_ex)]
    # merge quick re-entries into the same cell (tracker jitter, corner clips)
    by_cell: dict[tuple[int, int], list[CellTransit]] = {}
    for tr in raw:
        by_cell.setdefault((tr.col, tr.row), []).append(tr)
    merged: list[CellTransit] = []
    for lst in by_cell.values():
        lst.sort(key=lambda tr: tr.t_enter)
        current = lst[0]
        for tr in lst[1:]:
            if tr.t_enter - current.t_exit < MERGE_GAP:
                current = CellTransit(current.col, current.row, current.object_id,
                                      current.cls, current.t_enter,
                                      max(current.t_exit, tr.t_exit))
            else:
                merged.append(current)
                current = tr
        merged.append(current)
    merged.sort(key=lambda tr: (tr.t_enter, tr.col, tr.row))
    return merged


def extract_transits(trajs: list[Trajectory],
                     mesh: MeshGrid) -> dict[tuple[int, int], list[CellTransit]]:
    """Per-cell, t_enter-ordered transit lists for all trajectories."""
    by_cell: dict[tuple[int, int], list[CellTransit]] = {}
    for traj in sorted(trajs, key=lambda tr: tr.object_id):
        for tr in trajectory_transits(traj, mesh):
            by_cell.setdefault((tr.col, tr.row), []).append(tr)
    for lst in by_cell.values():
        lst.sort(key=lambda tr: (tr.t_enter, tr.t_exit, tr.object_id))
    return by_cell


def detect_pet_conflicts(transits_by_cell: dict[tuple[int, int], list[CellTransit]],
                         mesh: MeshGrid,
                         params: AnalysisParams | None = None) -> list[ConflictEvent]:
    """PET events from per-cell transit lists.

    Consecutive transits of one pair across nearby cells within
    params.episode_gap seconds collapse to a single event at the
    minimum-PET cell (the episode rule is recorded in run metadata).
    """
    params = params or AnalysisParams()
    candidates: dict[tuple[str, str], list] = {}
    for (col, row), lst in sorted(transits_by_cell.items()):
        for lead, follow in zip(lst, lst[1:]):
            if lead.object_id == follow.object_id:
                continue
            kind = event_kind(lead.cls, follow.cls)
            if kind is None:
                continue
            pet = follow.t_enter - lead.t_exit
            if pet < 0.0:
                pet = 0.0          # overlapping occupancy
            if pet > params.pet_window:
                continue
            if lead.object_id < follow.object_id:
                pair = (lead.object_id, follow.object_id)
                cls_pair = (lead.cls, follow.cls)
            else:
                pair = (follow.object_id, lead.object_id)
                cls_pair = (follow.cls, lead.cls)
            candidates.setdefault(pair, []).append(
                (follow.t_enter, pet, col, row, kind, cls_pair))

    events = []
    for (id_a, id_b), rows in sorted(candidates.items()):
        rows.sort()
        episode: list = []
        for row in rows:
            if episode and row[0] - episode[-1][0] > params.episode_gap:
                events.append(_episode_event(id_a, id_b, episode, mesh, params))
                episode = []
            episode.append(row)
        if episode:
            events.append(_episode_event(id_a, id_b, episode, mesh, params))
    events.sort(key=lambda e: (e.t, e.id_a, e.id_b))
    return events


def _episode_event(id_a: str, id_b: str, episode: list, mesh: MeshGrid,
                   params: AnalysisParams) -> ConflictEvent:
    t, pet, col, row, kind, cls_pair = min(episode, key=lambda r: (r[1], r[0]))
    x, y = mesh.cell_center(col, row)
    return ConflictEvent(
        kind=kind, metric="PET", value=pet, t=t, x=x, y=y,
        id_a=id_a, cls_a=cls_pair[0], id_b=id_b, cls_b=cls_pair[1],
        severe=pet <= params.pet_severe)


def detect_pet_from_trajectories(trajs: list[Trajectory], cfg: IntersectionConfig,
                                 params: AnalysisParams | None = None) -> list[ConflictEvent]:
    mesh = build_mesh(cfg)
    return detect_pet_conflicts(extract_transits(trajs, mesh), mesh, params)
