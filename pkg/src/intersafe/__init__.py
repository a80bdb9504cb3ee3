"""Batch trajectory analytics for signalized-intersection safety.

Detects and classifies pedestrian-vehicle and vehicle-vehicle conflicts
from timestamped rectilinear trajectories (TTC and PET surrogate safety
measures), builds phase/time volume matrices, and correlates traffic
volumes with event-day metadata.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import ComputationError, ConfigError, DataError, IntersafeError
from .model import (
    ConflictEvent,
    CrosswalkRole,
    IntersectionConfig,
    MovementCode,
    ObjectClass,
    TrackPoint,
    Trajectory,
    Turn,
)
from .params import AnalysisParams

__version__ = "0.1.0"

__all__ = [
    "AnalysisParams",
    "ComputationError",
    "ConfigError",
    "ConflictEvent",
    "CrosswalkRole",
    "DataError",
    "IntersafeError",
    "IntersectionConfig",
    "KERNEL_BACKEND",
    "MovementCode",
    "ObjectClass",
    "TrackPoint",
    "Trajectory",
    "Turn",
    "__version__",
]
