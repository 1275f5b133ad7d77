"""Lifting, potentials, kinetic checks, verification and classification."""
from .algebra import determinant, gradient_recovery
from .classify import (TubularityVerdict, classify_domain, field_distance, hausdorff_to_curve,
                       propagate_from_seed, uniqueness_probe)
from .kinetic import (KineticField, PropagationResult, characteristic_constancy, chord_sign_changes,
                      kinetic_field, propagation_check)
from .lifting import (LiftResult, circle_loop, hole_loops, lift, plaquette_scan, scan_defects,
                      trace_ring, winding_number)
from .potential import PotentialResult, potential
from .verify import CONDITIONS, VerificationReport, verify_solution

__all__ = [
    "determinant", "gradient_recovery", "TubularityVerdict", "classify_domain", "field_distance",
    "hausdorff_to_curve", "propagate_from_seed", "uniqueness_probe", "KineticField",
    "PropagationResult", "characteristic_constancy", "chord_sign_changes", "kinetic_field",
    "propagation_check", "LiftResult", "circle_loop", "hole_loops", "lift", "plaquette_scan",
    "scan_defects", "trace_ring", "winding_number", "PotentialResult", "potential", "CONDITIONS",
    "VerificationReport", "verify_solution",
]
