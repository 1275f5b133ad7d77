"""Line fields solving P div P = 0 on planar domains, and the checks that decide whether a field or domain qualifies."""
from .geometry import (DomainSpec, FourierCurve, SplineCurve, arclength_reparam, class_A_test, curve_eval,
                       normal_ray_trace, signed_distance, validate_tubular_spec)
from .grid import RasterGrid, boundary_trace, divergence_tensor, gradient, interpolate, lp_norm, rasterize
from .patterns import LineField, OrientedField, exact_tubular_solution, make_pattern

__version__ = "0.1.0"
