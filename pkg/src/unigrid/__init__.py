"""Positivity-preserving unigrid iterations on a classical AMG hierarchy."""

from .amg import Hierarchy, build_hierarchy
from .cycles import SolveOptions, unigrid_cycle, vcycle
from .discretization import assemble_fd_1d, assemble_fem_2d, assemble_picard_1d
from .picard import PicardOptions, picard_solve
from .positivity import (CorrectionPolicy, PositivityError, PositivityStats,
                         unigrid_local_correction_cycle, unigrid_threshold_cycle)
from .solve import METHODS, solve

__version__ = "0.1.0"

__all__ = [
    "Hierarchy",
    "build_hierarchy",
    "SolveOptions",
    "unigrid_cycle",
    "vcycle",
    "assemble_fd_1d",
    "assemble_fem_2d",
    "assemble_picard_1d",
    "PicardOptions",
    "picard_solve",
    "CorrectionPolicy",
    "PositivityError",
    "PositivityStats",
    "unigrid_local_correction_cycle",
    "unigrid_threshold_cycle",
    "METHODS",
    "solve",
]
