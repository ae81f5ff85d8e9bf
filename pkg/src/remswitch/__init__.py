"""Energy-efficient pico BS switching driven by a Radio Environment Map.

A REM stores, for each learned set of UE positions, the mean reward of every
pico on/off configuration. A live set of UE positions is matched to the
closest entry under one of four point-set distances and the best known
configuration of that entry is applied.
"""

from .geometry import (
    MetricKind,
    Position,
    PositionSet,
    average_distance,
    directed_hausdorff,
    euclidean,
    hausdorff,
    mean_distance,
    set_distance,
    sum_of_minimums,
)
from .rem import Rem, RemEntry, action_space_reduction, greedy_action, match_entry

__version__ = "0.1.0"
