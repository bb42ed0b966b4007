"""
Lattice geometry for Z and Z^2.

Windows (finite point sets), box Følner schedules, boundary sets and the
subadditive-limit readout every pressure and entropy estimate goes through.
"""

from .windows import (
    GroupPoint,
    Window,
    FolnerSchedule,
    FolnerProfile,
    boundary,
    folner_ratio,
    folner_profile,
    interval,
    window_from_box,
    translate_window,
    negate,
    minkowski_sum,
    union_window,
    difference_window,
)
from .subadditive import SubadditiveReadout, subadditive_limit

__all__ = [
    "GroupPoint",
    "Window",
    "FolnerSchedule",
    "FolnerProfile",
    "boundary",
    "folner_ratio",
    "folner_profile",
    "interval",
    "window_from_box",
    "translate_window",
    "negate",
    "minkowski_sum",
    "union_window",
    "difference_window",
    "SubadditiveReadout",
    "subadditive_limit",
]
