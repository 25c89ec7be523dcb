"""Abstraction refinement for safety PCTL on Markov decision processes."""

from .abstraction import (
    Partition,
    PartitionError,
    Quotient,
    coarsest_compatible,
    lift,
    partition_from_names,
    quotient,
    refinement_relation,
)
from .cegar import (
    CegarResult,
    CounterExample,
    InvalidityWitness,
    Valid,
    Verdict,
    VerdictKind,
    cegar_loop,
    check_validity,
    concretisation,
    counterexample_is_minimal,
    edge_order,
    gen_min_cex,
    refine,
)
from .formula import (
    Fragment,
    FormulaError,
    FormulaSyntaxError,
    classify,
    negate,
    parse_formula,
)
from .mdp import (
    Mdp,
    SubDist,
    bar_copy,
    cex_size,
    direct_sum,
    is_contained,
    mdp_size,
    unroll,
)
from .modelcheck import check, max_prob, sat_states
from .modelio import (
    ModelSyntaxError,
    export_dot,
    parse_mdp_file,
    parse_partition_file,
    print_mdp,
    read_cex,
    write_cex,
)
from .onthefly import OtfKind, OtfResult, otf_check
from .relation import SimRelation
from .simulation import (
    compute_simulation,
    dist_leq,
    dist_leq_blockwise,
    is_canonical_simulation,
    simulates,
)

__version__ = "0.1.0"
