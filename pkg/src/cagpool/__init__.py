"""Pairwise graph interaction learning with co-attention graph pooling.

A numpy-only toolkit: labeled graphs and generators, a tape-based reverse-mode
autodiff engine, a symmetric-normalized GCN encoder with layer concatenation,
pair-aware TopK pooling driven by a co-attention vector (plus ablation
scorers and the quadratic node-level baseline), an exact A* graph edit
distance oracle with similarity labels, ranking/regression metrics, an Adam
training loop, and a runtime benchmark comparing the interaction paths.
"""

__version__ = "0.1.0"

from .autodiff import Tape, Tensor, finite_diff_check
from .errors import (CagpoolError, DegenerateCoAttentionError, NumericalError,
                     SearchBudgetError, ShapeError, ValidationError)
from .gcn import GcnConfig, encode, normalized_adjacency
from .ged import CostModel, GedResult, exact_ged, gen_ged_dataset, similarity_label
from .graphs import (Graph, GraphPair, adjacency, adjacency_with_self_loops,
                     are_isomorphic, gen_motif_pair_dataset, gen_random_graph,
                     load_pairs, permute, save_pairs)
from .metrics import (MetricReport, ap_at_k, auprc, auroc, kendall, mse,
                      spearman)
from .model import (ModelConfig, forward, init_model_params, load_checkpoint,
                    loss, save_checkpoint)
from .pooling import (PooledPair, cagpool, coattention_vector, extract_subgraph,
                      global_mean_pool, node_scores, pairwise_node_interaction,
                      sagpool_scores, topk_select, topkpool_scores)
from .sampling import SamplerState, negative_sample
from .train import TrainConfig, evaluate, multi_seed, train
