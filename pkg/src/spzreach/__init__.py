"""Sparse polynomial zonotopes and reachability analysis of nonlinear ODEs."""
from .convert import (
    from_interval,
    from_polytope,
    from_taylor_model,
    from_zonotope,
    interval_enclose,
    poly_enclose,
    range_bound,
    support_function,
    template_polyhedron,
    zono_enclose,
)
from .dynamics import NonlinearSystem, load_model, parse_model
from .ids import IdGenerator, unique_id
from .ops import (
    cartesian_product,
    cartesian_product_zono,
    conv_hull,
    conv_hull_dependent,
    exact_add,
    linear_map,
    minkowski_sum,
    minkowski_sum_zono,
    quad_map,
    quad_map_dependent,
)
from .reach import ReachConfig, ReachResult, reach_analyze
from .reduce import reduce, reduce_zonotope, restructure, vol_ratio
from .sets import IntervalVector, Polytope, SupportValue, TaylorModel, Zonotope
from .spz import SparsePolyZonotope, compact, merge_id

__version__ = "0.1.0"

__all__ = [
    "IdGenerator",
    "IntervalVector",
    "NonlinearSystem",
    "Polytope",
    "ReachConfig",
    "ReachResult",
    "SparsePolyZonotope",
    "SupportValue",
    "TaylorModel",
    "Zonotope",
    "cartesian_product",
    "cartesian_product_zono",
    "compact",
    "conv_hull",
    "conv_hull_dependent",
    "exact_add",
    "from_interval",
    "from_polytope",
    "from_taylor_model",
    "from_zonotope",
    "interval_enclose",
    "linear_map",
    "load_model",
    "merge_id",
    "minkowski_sum",
    "minkowski_sum_zono",
    "parse_model",
    "poly_enclose",
    "quad_map",
    "quad_map_dependent",
    "range_bound",
    "reach_analyze",
    "reduce",
    "reduce_zonotope",
    "restructure",
    "support_function",
    "template_polyhedron",
    "unique_id",
    "vol_ratio",
    "zono_enclose",
]
