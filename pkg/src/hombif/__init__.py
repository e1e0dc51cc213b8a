"""Homoclinic bifurcation from twisted asymptotic stable bundles over the circle."""

from .catalog import CATALOG, paper_matrix
from .fredholm import (
    JumpSystem,
    crossing_determinant,
    finite_section,
    index_bundle_w1,
    index_of_family,
    kernel_jump,
    parity_of_loop,
)
from .homoclinic import SystemFamily, branch_solve, detect, scan, validate_assumptions
from .hyperbolic import spectral_split
from .loopbundle import MatrixLoop, transport_frames, w1_virtual

__version__ = "0.1.0"
