"""Minimum action transition paths for stochastic dynamics on constraint manifolds.

The package computes most-probable transition paths between metastable states
of projected stochastic systems whose state is confined to an algebraic
constraint manifold (unit spheres and their products in particular), by
minimizing the geometric form of the large-deviation action over discrete
curves.
"""

from .action import (
    Curve,
    TimePath,
    fw_action,
    geometric_action,
    geometric_integrand,
    reconstruct_time,
    s0_action,
    s1_action,
    time_change_rate,
    time_change_rates,
    two_rod_geometric_action,
)
from .analysis import (
    FixedPointRecord,
    RouteTemplate,
    ScanResult,
    bifurcation_scan,
    classify_fixed_point,
    find_fixed_points,
)
from .manifold import ProductManifold, UnitSphere
from .mam import (
    MultistartResult,
    Route,
    SolveOptions,
    SolveReport,
    initial_guess,
    minimize_action,
    multistart,
    reparametrize,
)
from .models import SingleRod, TwoRod
from .wlinalg import (
    BlockIsotropicMetric,
    CallableMetric,
    ConstantMetric,
    metric_inner,
    metric_norm,
    min_norm_preimage,
    project_tangent,
)

__version__ = "0.1.0"

__all__ = [
    "BlockIsotropicMetric",
    "CallableMetric",
    "ConstantMetric",
    "Curve",
    "FixedPointRecord",
    "MultistartResult",
    "ProductManifold",
    "Route",
    "RouteTemplate",
    "ScanResult",
    "SingleRod",
    "SolveOptions",
    "SolveReport",
    "TimePath",
    "TwoRod",
    "UnitSphere",
    "bifurcation_scan",
    "classify_fixed_point",
    "find_fixed_points",
    "fw_action",
    "geometric_action",
    "geometric_integrand",
    "initial_guess",
    "metric_inner",
    "metric_norm",
    "min_norm_preimage",
    "minimize_action",
    "multistart",
    "project_tangent",
    "reconstruct_time",
    "reparametrize",
    "s0_action",
    "s1_action",
    "time_change_rate",
    "time_change_rates",
    "two_rod_geometric_action",
]
