"""Hilbert geometry of convex polytopes.

Distances and Finsler norms, isometric embeddings into polyhedral normed
spaces, Bernig's bi-Lipschitz map, and Monte Carlo ball volumes.
"""
__version__ = "0.1.0"

from ._backend import NAME as backend
from .bilipschitz import (DualVector, bernig_map, bernig_preimage, distortion_report,
                          finsler_comparison)
from .embeddings import (BarycentricPoint, LogEmbedding, PolyhedralNorm, embed_polytope,
                         ratio_coords, ratio_coords_inverse, simplex_embed,
                         simplex_embed_inverse, simplex_section_lift)
from .errors import HilbertGeometryError
from .metric import (ConeSector, cone_metric, distance_alexander, distance_birkhoff,
                     distance_crossratio, finsler_norm)
from .polytope import (AffineFunctional, HRep, VRep, boundary_intersection, face_lattice,
                       hrep_from_vrep, regular_polygon, standard_simplex, unit_cube,
                       unit_square, vrep_from_hrep)
from .volume import (ball_boundary, ball_volume, growth_fit, ray_divergence_ratio)

distance = distance_birkhoff

__all__ = [
    "AffineFunctional", "BarycentricPoint", "ConeSector", "DualVector", "HRep",
    "HilbertGeometryError", "LogEmbedding", "PolyhedralNorm", "VRep", "backend",
    "ball_boundary", "ball_volume", "bernig_map", "bernig_preimage", "boundary_intersection",
    "cone_metric", "distance", "distance_alexander", "distance_birkhoff",
    "distance_crossratio", "distortion_report", "embed_polytope", "face_lattice",
    "finsler_comparison", "finsler_norm", "growth_fit", "hrep_from_vrep", "ratio_coords",
    "ratio_coords_inverse", "ray_divergence_ratio", "regular_polygon", "simplex_embed",
    "simplex_embed_inverse", "simplex_section_lift", "standard_simplex", "unit_cube",
    "unit_square", "vrep_from_hrep",
]
