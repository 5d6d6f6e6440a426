"""Polytopes in H-representation: builders, interior points, sampling, volume."""
from .builders import (augmented_variables, build_augmented_polytope, build_gt_polytope,
                       build_hive_polytope, build_torus_polytope, hive_boundary_values)
from .lp import InteriorPoint, bounding_box, chebyshev_center, interior_point, is_feasible
from .sampling import Walker, hit_and_run
from .system import (LinearInequalitySystem, Reduced, box_system, condition_on,
                     simplex_system)
from .volume import VolumeEstimate, estimate_volume, log_ball_volume

__all__ = [
    "LinearInequalitySystem", "Reduced", "VolumeEstimate", "InteriorPoint", "Walker",
    "build_hive_polytope", "build_augmented_polytope", "build_gt_polytope",
    "build_torus_polytope", "augmented_variables", "hive_boundary_values",
    "interior_point", "chebyshev_center", "bounding_box", "is_feasible",
    "hit_and_run", "estimate_volume", "condition_on", "box_system", "simplex_system",
    "log_ball_volume",
]
