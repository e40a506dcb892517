"""Exact desk-scale experiments on subshifts and their induced systems."""

from .shiftspace import ClopenSet, Point, Subshift, metric, preimage_clopen, shift
from .hyperspace import FiniteClosedSet, hausdorff_distance, induce_hyper
from .measures import (
    DiscreteMeasure,
    VNeighborhood,
    WNeighborhood,
    measure_of,
    prohorov_flow,
    prohorov_subset,
    pushforward,
    r_m,
)

__version__ = "0.1.0"
