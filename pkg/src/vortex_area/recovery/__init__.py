"""Explicit approximating maps of the vortex map and their graph areas."""

from .examples import (
    EXAMPLES,
    catenoid_flap_decomposition,
    cylinder_decomposition,
    eval_example_sequence,
    example_decomposition,
    two_discs_decomposition,
    vortex_decomposition,
)
from .maps import ConeMaps, build_maps_T, retraction_upsilon
from .pair import AnalyticStandIn, DiscreteStar, RecoveryParams, RegularizedPair, adapter_profile
from .quadrature import QuadratureResult, RegionArea, graph_area_quadrature
from .regions import Region, RegionDecomposition, eval_u_k, recovery_decomposition
from .study import NEGLIGIBLE_GROUPS, ConvergenceRow, cone_area_w_form, convergence_study, recovery_area

__all__ = [
    "AnalyticStandIn", "ConeMaps", "ConvergenceRow", "DiscreteStar", "EXAMPLES", "NEGLIGIBLE_GROUPS",
    "QuadratureResult", "RecoveryParams", "Region", "RegionArea", "RegionDecomposition",
    "RegularizedPair", "adapter_profile", "build_maps_T", "catenoid_flap_decomposition",
    "cone_area_w_form", "convergence_study", "cylinder_decomposition", "eval_example_sequence",
    "eval_u_k", "example_decomposition", "graph_area_quadrature", "recovery_area",
    "recovery_decomposition", "retraction_upsilon", "two_discs_decomposition", "vortex_decomposition",
]
