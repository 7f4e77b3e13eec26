"""Numerical laboratory for multilinear sparse operators on the dyadic grid.

The package measures, at finite dyadic resolution, the quantities appearing
in weighted norm inequalities for sparse operators: Muckenhoupt-type
characteristic constants, stopping-time decompositions, and the ratios of
operator norms to their conjectured bounds.  A FastAPI service exposes the
functionality over HTTP and the `sparseweights` CLI is a thin client that
runs the service in-process by default.
"""

__version__ = "0.1.0"

from .dyadic import (
    Cube,
    StepFunction,
    average,
    integral,
    lp_norm,
    measure,
    weighted_average,
)
from .operators import (
    SparseOperatorSpec,
    multi_maximal,
    rescale_identity_check,
    sparse_op,
)
from .sparse import (
    BranchingParams,
    SparseFamily,
    carleson_sum,
    random_sparse,
    verify_sparse,
)
from .stopping import (
    LsBoundResult,
    bucket_index,
    carleson_embedding_check,
    level_sets,
    ls_bound_check,
    principal_cubes,
)
from .weights import (
    ExponentTuple,
    a_infty,
    a_p_constant,
    a_vec_p,
    dual_weights,
    indicator_function,
    power_weight,
    random_weight,
    two_weight_a_p,
)
from .verify import (
    TheoremInstance,
    bucket_reconstruction_check,
    extremizer_search,
    instance_from_spec,
    maximal_ratio,
    run_experiment,
    theorem_ratio,
    theorem_rhs,
)

__all__ = [
    "__version__",
    "Cube",
    "StepFunction",
    "average",
    "integral",
    "lp_norm",
    "measure",
    "weighted_average",
    "SparseOperatorSpec",
    "multi_maximal",
    "rescale_identity_check",
    "sparse_op",
    "BranchingParams",
    "SparseFamily",
    "carleson_sum",
    "random_sparse",
    "verify_sparse",
    "bucket_index",
    "carleson_embedding_check",
    "level_sets",
    "LsBoundResult",
    "ls_bound_check",
    "principal_cubes",
    "ExponentTuple",
    "a_infty",
    "a_p_constant",
    "a_vec_p",
    "dual_weights",
    "indicator_function",
    "power_weight",
    "random_weight",
    "two_weight_a_p",
    "TheoremInstance",
    "bucket_reconstruction_check",
    "extremizer_search",
    "instance_from_spec",
    "maximal_ratio",
    "run_experiment",
    "theorem_ratio",
    "theorem_rhs",
]
