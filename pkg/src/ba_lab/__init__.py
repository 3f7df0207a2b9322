"""Computable badly-approximable constants for affine forms.

The library works with systems q -> A q + b of m affine forms in n
integer variables.  ``core`` holds exact/float scalars and integer
linear algebra, ``forms`` the truncated approximation constants and
exact classification, ``flows`` the diagonal-flow picture on affine
lattices, ``fractal`` the dimension machinery, and ``cli`` a batch
front end with deterministic artifacts.
"""

from .core import (
    DEFAULT_ENUM_BUDGET,
    AffineSystem,
    BudgetError,
    DimensionError,
    ExactnessError,
    IntegerCandidate,
    ParameterError,
    Scalar,
    as_scalar,
    dist_to_integers,
    format_scalar,
    hnf_row_basis,
    hnf_solve,
    is_exact,
    nearest_int,
    parse_scalar,
    sup_norm,
)
from .forms import (
    ApproxStatistic,
    Classification,
    PowerLawPsi,
    SystemKind,
    TablePsi,
    TruncatedConstant,
    classify,
    kronecker_epsilon,
    kronecker_witness,
    product_statistic,
    psi_approx_witnesses,
    rationality_witness,
    truncated_constant,
)
from .flows import (
    AffineLatticeState,
    FlowMin,
    FlowSpec,
    GapReport,
    OrbitDiagnostics,
    affine_lattice,
    affine_orbit_gap,
    conjugate_flow,
    flow_matrix,
    flow_minimum,
    homogeneous_orbit_gap,
    orbit_trace,
    shortest_vectors_at,
    vector_image,
)
from .fractal import (
    BoxDimEstimate,
    GridIndicator,
    SliceScan,
    TessellationCounts,
    TreeBound,
    TreeLevelData,
    ba_slice_scan,
    box_dim_estimate,
    expansion_dim_bound,
    tessellation_counts,
    tree_dim_lower_bound,
)
from .shells import annulus_size, shell_size, shell_vectors

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_ENUM_BUDGET", "Scalar", "as_scalar", "is_exact",
    "parse_scalar", "format_scalar", "sup_norm", "nearest_int",
    "dist_to_integers", "hnf_solve", "hnf_row_basis",
    "ParameterError", "DimensionError", "ExactnessError", "BudgetError",
    "AffineSystem", "IntegerCandidate",
    "ApproxStatistic", "product_statistic",
    "TruncatedConstant", "truncated_constant",
    "rationality_witness", "kronecker_witness", "kronecker_epsilon",
    "SystemKind", "Classification", "classify",
    "PowerLawPsi", "TablePsi", "psi_approx_witnesses",
    "FlowSpec", "flow_matrix", "AffineLatticeState", "affine_lattice",
    "vector_image", "conjugate_flow", "FlowMin", "flow_minimum",
    "GapReport", "affine_orbit_gap", "homogeneous_orbit_gap",
    "shortest_vectors_at", "OrbitDiagnostics", "orbit_trace",
    "TreeLevelData", "TreeBound", "tree_dim_lower_bound",
    "expansion_dim_bound", "TessellationCounts", "tessellation_counts",
    "GridIndicator", "BoxDimEstimate", "box_dim_estimate",
    "SliceScan", "ba_slice_scan",
    "shell_vectors", "shell_size", "annulus_size",
    "__version__",
]
