from .params import (
    derive_params,
    check_regime,
    deletion_threshold,
    exponent_identity_residual,
    union_bound_margin
)
from .model import (
    Color,
    BaseGraph,
    Partition,
    PartitionPair,
    ColoredGraph,
    Instance,
    sample_partition,
    sample_base_graph,
    blow_up,
    superimpose,
    is_simple,
    sample_instance
)
from .cycles import enumerate_cycles, count_cycles
from .cleanup import (
    EdgeKind,
    BrokenCycle,
    EdgeOrdering,
    ApexKind,
    ApexInfo,
    enumerate_bad_broken_cycles,
    vertex_delete,
    kink_reduce,
    build_orderings,
    find_apex,
    select_deletion_edge,
    edge_delete,
    broken_cycle_expectation
)
from .pseudo import (
    check_degrees,
    check_projections,
    check_double_degree,
    check_expansion,
    verify_A
)
from .spectral import (
    DominatingOperator,
    SpectralDecomposition,
    spectral_deviation,
    dominating_operator,
    top_eigenpair,
    estimate_M_norm,
    count_walks_exact,
    walk_bound
)
from .indep import (
    closed_pairs,
    pick_representatives,
    exposure_split,
    check_claim,
    independent_set_search,
    alpha_exact,
    baseline_construction,
    ind_set_probability_bound
)
from .storage import serialize_instance, load_instance
from .pipeline import run_pipeline, run_experiment
