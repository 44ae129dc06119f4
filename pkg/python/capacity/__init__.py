"""Service capacity regions: closed-form and LP membership tests, the
k=2 boundary, and grid sweeps."""
from .simplex import TwoPhaseSimplex, LPError, LPResult
from .regions import *
from .sweep import (GridSpec, region_sweep, write_region_csv,
                    region_header, gained_points, lost_points)
