"""warpforge: explicit warped-product metrics and their Ricci verification.

The package builds piecewise radial metric profiles (Berger-sphere bubbles,
warped cones, surgery interpolations), evaluates their Ricci curvature
block-by-block in closed form through exact 2-jet arithmetic, and verifies
curvature lower bounds, profile constraints and map-distortion estimates on
dense grids with an independent finite-difference oracle.
"""

__version__ = "0.1.0"

from .jets import Jet2, jet_var  # noqa: F401
