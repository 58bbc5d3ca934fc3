"""Exact reconstruction of hidden DAGs from path-reachability queries."""
from .dag import (LearnerConfig, SplitTrace, bernoulli_sample, filter_separator,
                  is_even_separator, learn_almost_tree, learn_cross_edge, learn_parent,
                  learn_root, learn_separator, learn_spanning_tree, min_chain_cover)
from .generators import (GenSpec, gen_almost_tree, gen_butterfly, gen_lower_bound_instance,
                         gen_multitree, gen_rooted_tree, gen_undirected_tree)
from .graph import (Digraph, GraphClassReport, ReachabilityIndex, arborescence_metrics,
                    build_reachability, classify, transitive_reduction)
from .multitree import (MultitreeResult, learn_butterfly, learn_multitree,
                        learn_root_via_inverse_tree)
from .oracle import (InverseOracle, Oracle, PathOracle, QueryLedger, RestrictedOracle,
                     SeparatorOracle, SepPathOracle, fork_join, inverse_adapter,
                     restrict_adapter, sep_to_path_adapter)
from .tree import LearnResult, learn_short_tree, learn_undirected_tree, sequential_find_root

__version__ = "0.1.0"
