"""Community-detection toolkit built around Louvain ensembles.

Core workflow: build a graph, run a seeded Louvain ensemble under a null
model, measure pairwise partition similarity, and pick a representative
partition (similarity strength, consensus, maximum modularity, or most
frequent).  Benchmark generators and a correlation-matrix filtering path
for signed inputs round out the pipeline.
"""

from .benchgen import BenchmarkInstance, LfrParams, generate_factor_returns, generate_lfr, generate_planted
from .corrfilter import FilteredCorrelation, ReturnsMatrix, clean_and_log_returns, pearson_correlation, rmt_filter
from .errors import (
    CommkitError,
    ConvergenceError,
    DataError,
    GenerationError,
    ModelError,
    SignedInputError,
    StaleStateError,
)
from .graph import (
    Graph,
    NodeMarginals,
    aggregate_by_partition,
    from_dense_matrix,
    load_edge_list,
    node_marginals,
    totals,
    write_edge_list,
)
from .harness import SweepConfig, SweepRow, run_select_pipeline, run_sweep
from .louvain import Ensemble, LouvainParams, load_ensemble, louvain_once, run_ensemble, save_ensemble
from .modularity import (
    LocalMoveState,
    ModularityScore,
    NullModel,
    delta_modularity_move,
    epsilon_optimal_set,
    expected_weight,
    modularity,
)
from .partition import AriMatrix, Partition, ari, ari_matrix, canonicalize, contingency
from .seeds import split64
from .selection import (
    ConsensusParams,
    SelectionResult,
    consensus_cluster,
    consensus_matrix,
    max_modularity_select,
    most_frequent_select,
    star_select,
)

__version__ = "0.1.0"
