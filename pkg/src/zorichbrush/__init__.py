"""Zorich exponential maps in R^3 and their brush/hair geometry.

Library layout:

* :mod:`zorichbrush.geometry` -- square-to-hemisphere map, plane folding,
  bi-Lipschitz constant estimation, spherical ray lengths,
* :mod:`zorichbrush.zorich` -- the map family, certified parameter bundle,
  Jacobians, inverse branches, orbits,
* :mod:`zorichbrush.symbolic` -- exact Farey-tree coding and itineraries,
* :mod:`zorichbrush.brush` -- nested-box dynamics, membership, hair bases,
  the pullback map and its inverse,
* :mod:`zorichbrush.hairs` -- hair tracing, spherical lengths, the cube
  embedding, the endpoint-density probe,
* :mod:`zorichbrush.surfaces` -- hairy-square cuboid tree, knotted hair
  chain, mesh export,
* :mod:`zorichbrush.cli` -- command-line front door.
"""

__version__ = "0.1.0"

from .brush import (
    Box,
    BoxChain,
    BrushPoint,
    box_chain,
    box_norm_range,
    brush_membership,
    next_box,
    phi,
    psi,
    t_min,
)
from .errors import ZorichBrushError
from .geometry import (
    Cell,
    FoldResult,
    estimate_L,
    fold,
    h_eval,
    h_inverse,
    spherical_ray_length,
    square_to_disk,
)
from .hairs import Hair, density_probe, embed_H, endpoint, hair_length, trace_hair
from .surfaces import (
    CuboidNode,
    SoshsTree,
    approach_sequence,
    mesh_export,
    soshs_build,
    soshs_children,
    soshs_length,
    wild_hair_chain,
)
from .symbolic import (
    Address,
    FareyInterval,
    decode,
    encode,
    farey_child,
    itinerary,
    pair_decode,
    pair_encode,
)
from .zorich import (
    Classification,
    Params,
    classify_point,
    compute_alpha,
    compute_M,
    compute_p_lambda,
    inverse_branch,
    lambda_max,
    orbit,
    zorich_eval,
    zorich_jacobian,
)

__all__ = [
    "Address",
    "Box",
    "BoxChain",
    "BrushPoint",
    "Cell",
    "Classification",
    "CuboidNode",
    "FareyInterval",
    "FoldResult",
    "Hair",
    "Params",
    "SoshsTree",
    "ZorichBrushError",
    "approach_sequence",
    "box_chain",
    "box_norm_range",
    "brush_membership",
    "classify_point",
    "compute_M",
    "compute_alpha",
    "compute_p_lambda",
    "decode",
    "density_probe",
    "embed_H",
    "encode",
    "endpoint",
    "estimate_L",
    "farey_child",
    "fold",
    "h_eval",
    "h_inverse",
    "hair_length",
    "inverse_branch",
    "itinerary",
    "lambda_max",
    "mesh_export",
    "next_box",
    "orbit",
    "pair_decode",
    "pair_encode",
    "phi",
    "psi",
    "soshs_build",
    "soshs_children",
    "soshs_length",
    "spherical_ray_length",
    "square_to_disk",
    "t_min",
    "trace_hair",
    "wild_hair_chain",
    "zorich_eval",
    "zorich_jacobian",
]
