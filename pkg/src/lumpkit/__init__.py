"""Measure-weighted Markov chain aggregation for rule-based reaction networks."""

from .aggregation import (
    AggregatedChain,
    DeltaTable,
    MeasureFamily,
    Partition,
    aggregate,
    check_cond3,
    check_condition,
    convergence_diagnostics,
    delta_table,
    lift,
    nested,
    power_identity_residual,
    respects,
    restrict,
    structural_preservation,
    uniform_measures,
    verify_commutation,
)
from .markov import (
    ChainStructure,
    Distribution,
    RateMatrix,
    StateSpace,
    StochasticMatrix,
    cesaro,
    classify,
    evolve_discrete,
    stationary,
    transient,
    uniformize,
)
from .rules import (
    ExploredChain,
    RewriteRule,
    RuleModel,
    apply,
    build_partition,
    explore,
    is_reversible,
)
from .sitegraph import (
    ReactionMixture,
    SiteGraph,
    canonical_key,
    connected_components,
    find_embeddings,
    is_subgraph,
    make_mixture,
    rename,
    species_census,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
