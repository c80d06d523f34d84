"""Geometry of Niggli reduction in G6."""
from .boundaries import catalog as boundary_catalog, get_case
from .characters import character_table, classify, hosoya_conditions
from .errors import (G6Error, InvalidCellError, NonConvergenceError, NotReducedError,
                     ProbeError, UnknownCaseError)
from .g6_core import CellParams, cell_to_g6, g6_matrix_from_basis, g6_to_cell
from .montecarlo import ProbeConfig, probe_5d, probe_boundary, zscore_analysis
from .polytope_lab import enumerate_polytopes, intersect_projectors, projector_dimension
from .reduction import brute_force_reduce, is_niggli_reduced, niggli_reduce

__version__ = "0.1.0"

__all__ = [
    "CellParams", "G6Error", "InvalidCellError", "NonConvergenceError", "NotReducedError",
    "ProbeConfig", "ProbeError", "UnknownCaseError", "boundary_catalog", "brute_force_reduce",
    "cell_to_g6", "character_table", "classify", "enumerate_polytopes", "g6_matrix_from_basis",
    "g6_to_cell", "get_case", "hosoya_conditions", "intersect_projectors", "is_niggli_reduced",
    "niggli_reduce", "probe_5d", "probe_boundary", "projector_dimension", "zscore_analysis",
]
