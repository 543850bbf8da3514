"""capsym: exterior capacitary potentials, capacity, and boundary
mean-curvature functionals with symmetry diagnostics."""

from . import bem, functionals, geometry, identity_lab, oracles, symfun

__all__ = ["bem", "functionals", "geometry", "identity_lab", "oracles", "symfun"]

__version__ = "0.1.0"
