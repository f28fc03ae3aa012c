"""Incremental smallest-eigenpair computation for graph Laplacians.

The deflation construction turns "find the (K+1)-th smallest eigenpair
given the K smallest" into a leading-eigenpair problem, solved by power
iteration or a restarted Lanczos leading-pair solver.  Companion modules
provide the stored-vector increasing-orders Lanczos baseline, a from-scratch
batch solver, k-means with five clustering quality metrics, a resumable
user-guided clustering session, a benchmark harness, a CLI, and an HTTP
service.
"""

from .clustering import (
    ClusterAssignment,
    MetricsRecord,
    cluster_size_stats,
    kmeans,
    metrics_bundle,
    modularity,
    scaled_normalized_cut,
    scaled_spectrum_energy,
)
from .eigensolve import (
    ConvergenceError,
    DeflatedOperator,
    EigenBasis,
    Eigenpair,
    SolverConfig,
    apply_deflated,
    basis_from_json,
    basis_to_json,
    deflated_operator,
    dense_oracle,
    extend_to,
    kernel_basis,
    leading_eigenpair_power,
    next_eigenpair,
)
from .graph import (
    ComponentLabeling,
    Graph,
    GraphFormatError,
    LaplacianKind,
    LaplacianMatrix,
    StrengthVector,
    build_laplacian,
    connected_components,
    dumps_edge_list,
    generate_erdos_renyi,
    load_edge_list,
    load_matrix_market,
    normalize_weights,
    strengths,
)
from .lanczos import (
    LanczosState,
    RitzSet,
    batch_smallest,
    lanczos_extend,
    lanczos_init,
    lanczos_io,
    lanczos_smallest,
    ritz_pairs,
    ritz_residual,
    shifted_operator,
)
from .session import (
    SessionConfig,
    SessionState,
    SessionStatus,
    checkpoint,
    create_session,
    export_labels_csv,
    export_metrics_csv,
    export_metrics_json,
    restore,
    step,
    stop,
)

__version__ = "0.1.0"
