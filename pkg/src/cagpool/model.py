"""End-to-end Siamese pipeline over graph pairs.

Shared GCN encoder -> interaction module (one of five modes) -> post-pool
convolution -> global mean pooling -> MLP head with a sigmoid output per
class (or a single sigmoid for similarity regression).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import autodiff as ad
from . import pooling
from .autodiff import Tensor
from .errors import ShapeError, ValidationError
from .gcn import (GcnConfig, encode, gcn_layer, glorot, init_gcn_params,
                  normalize_adjacency_matrix, normalized_adjacency)
from .graphs import Graph, GraphPair, adjacency
from .pooling import (PooledPair, PooledSide, cagpool, extract_subgraph,
                      global_mean_pool, init_coattention_params, node_scores,
                      sagpool_scores, topk_select, topkpool_scores)

INTERACTION_MODES = ("cagpool", "siamese-concat", "topkpool", "sagpool",
                     "node-histogram")
TASKS = ("classification", "regression")

# Regression targets live in (0,1]; a sigmoid head cannot emit exactly 1,
# so targets are clipped just below it.
REGRESSION_TARGET_CAP = 1.0 - 1e-9
_BCE_EPS = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    gcn: GcnConfig
    task: str = "classification"
    num_classes: int = 1
    interaction_mode: str = "cagpool"
    pooling_ratio: float = pooling.DEFAULT_POOLING_RATIO
    post_pool_layers: int = 1
    head_hidden: int = 64
    coattention_mlp: bool = False
    symmetric_head: bool = False     # sum the two sides before the head
    histogram_bins: int = pooling.DEFAULT_HISTOGRAM_BINS

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValidationError(f"unknown task {self.task!r}")
        if self.interaction_mode not in INTERACTION_MODES:
            raise ValidationError(
                f"unknown interaction mode {self.interaction_mode!r}")
        if self.task == "classification" and self.num_classes < 1:
            raise ValidationError("num_classes must be >= 1")
        pooling.check_pooling_ratio(self.pooling_ratio)
        if self.post_pool_layers < 0 or self.head_hidden < 1:
            raise ValidationError("bad head/post-pool configuration")

    @property
    def out_dim(self) -> int:
        return 1 if self.task == "regression" else self.num_classes

    @property
    def head_in_dim(self) -> int:
        d = self.gcn.out_dim if self.symmetric_head else 2 * self.gcn.out_dim
        if self.interaction_mode == "node-histogram":
            d += self.histogram_bins
        return d

    def to_json(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_json(obj: dict) -> "ModelConfig":
        obj = dict(obj)
        obj["gcn"] = GcnConfig(**obj["gcn"])
        return ModelConfig(**obj)


@dataclass
class ForwardDiagnostics:
    """Per-pair pooling introspection for score export."""
    scores_a: np.ndarray | None = None
    scores_b: np.ndarray | None = None
    idx_a: tuple[int, ...] | None = None
    idx_b: tuple[int, ...] | None = None


def init_model_params(cfg: ModelConfig, seed: int) -> dict[str, Tensor]:
    """All trainable tensors, keyed by name; shapes derive from config alone."""
    rng = np.random.default_rng(seed)
    params = init_gcn_params(cfg.gcn, rng, prefix="enc")
    d = cfg.gcn.out_dim
    mode = cfg.interaction_mode
    if mode == "cagpool":
        params.update(init_coattention_params(d, rng, cfg.coattention_mlp))
    elif mode == "topkpool":
        params["pool.proj"] = glorot(rng, 1, d)
    elif mode == "sagpool":
        params["pool.theta"] = glorot(rng, d, 1)
    if mode in ("cagpool", "topkpool", "sagpool"):
        for layer in range(cfg.post_pool_layers):
            params[f"post.theta{layer}"] = glorot(rng, d, d)
    params["head.w1"] = glorot(rng, cfg.head_in_dim, cfg.head_hidden)
    params["head.b1"] = Tensor(np.zeros((1, cfg.head_hidden)))
    params["head.w2"] = glorot(rng, cfg.head_hidden, cfg.out_dim)
    params["head.b2"] = Tensor(np.zeros((1, cfg.out_dim)))
    return params


def _post_pool_embed(side: PooledSide, params: dict[str, Tensor],
                     cfg: ModelConfig) -> Tensor:
    """Re-convolve the pooled sub-graph and mean-pool to a fixed-size vector.

    The pooled adjacency gets fresh self-loops, so isolated survivors still
    propagate their own features.
    """
    x = side.x
    a_tilde = side.a.copy()
    np.fill_diagonal(a_tilde, 1.0)
    a_hat = Tensor(normalize_adjacency_matrix(a_tilde))
    for layer in range(cfg.post_pool_layers):
        x = gcn_layer(a_hat, x, params[f"post.theta{layer}"])
    return global_mean_pool(x)


def _pooled_sides(pair: GraphPair, x_a: Tensor, x_b: Tensor,
                  params: dict[str, Tensor], cfg: ModelConfig,
                  fixed_idx: tuple | None = None) -> PooledPair:
    adj_a, adj_b = adjacency(pair.a), adjacency(pair.b)
    mode = cfg.interaction_mode
    if mode == "cagpool":
        return cagpool(x_a, adj_a, x_b, adj_b, params, cfg.pooling_ratio,
                       fixed_idx=fixed_idx)
    sides = []
    for pos, (g, x_cat, adj) in enumerate(((pair.a, x_a, adj_a),
                                           (pair.b, x_b, adj_b))):
        if mode == "topkpool":
            z = topkpool_scores(x_cat, params["pool.proj"])
        else:  # sagpool
            z = sagpool_scores(x_cat, normalized_adjacency(g),
                               params["pool.theta"])
        idx = (fixed_idx[pos] if fixed_idx is not None
               else topk_select(z.data, cfg.pooling_ratio))
        x_prime, a_prime = extract_subgraph(x_cat, adj, z, idx)
        sides.append(PooledSide(tuple(idx), z.data.ravel().copy(),
                                x_prime, a_prime))
    return PooledPair(sides[0], sides[1])


def forward(pair: GraphPair, params: dict[str, Tensor],
            cfg: ModelConfig,
            fixed_idx: tuple | None = None
            ) -> tuple[Tensor, ForwardDiagnostics]:
    """Model output for one pair: a 1 x out_dim row of sigmoid activations."""
    if pair.a.num_nodes < 1 or pair.b.num_nodes < 1:
        raise ValidationError("empty graph in pair")
    x_a = encode(pair.a, params, cfg.gcn)
    x_b = encode(pair.b, params, cfg.gcn)
    diag = ForwardDiagnostics()

    mode = cfg.interaction_mode
    if mode in ("cagpool", "topkpool", "sagpool"):
        pooled = _pooled_sides(pair, x_a, x_b, params, cfg, fixed_idx)
        diag.scores_a, diag.scores_b = pooled.a.scores, pooled.b.scores
        diag.idx_a, diag.idx_b = pooled.a.idx, pooled.b.idx
        final_a = _post_pool_embed(pooled.a, params, cfg)
        final_b = _post_pool_embed(pooled.b, params, cfg)
        extras = []
    elif mode == "siamese-concat":
        final_a, final_b = global_mean_pool(x_a), global_mean_pool(x_b)
        extras = []
    else:  # node-histogram: static embeddings plus a constant histogram feature
        final_a, final_b = global_mean_pool(x_a), global_mean_pool(x_b)
        hist = pooling.pairwise_node_interaction(x_a.data, x_b.data,
                                                 cfg.histogram_bins)
        total = hist.sum()
        extras = [Tensor((hist / total if total else hist).reshape(1, -1))]

    if cfg.symmetric_head:
        head_in = ad.concat_cols([ad.add(final_a, final_b)] + extras)
    else:
        head_in = ad.concat_cols([final_a, final_b] + extras)
    hidden = ad.relu(ad.add(ad.matmul(head_in, params["head.w1"]),
                            params["head.b1"]))
    logits = ad.add(ad.matmul(hidden, params["head.w2"]), params["head.b2"])
    return ad.sigmoid(logits), diag


def loss(output: Tensor, target, cfg: ModelConfig, mask=None) -> Tensor:
    """Mean masked BCE for classification, squared error for regression."""
    target = np.atleast_1d(np.asarray(target, dtype=np.float64)).reshape(1, -1)
    if target.shape != output.shape:
        raise ShapeError(f"target {target.shape} vs output {output.shape}")
    if cfg.task == "regression":
        t = float(target[0, 0])
        if not (0.0 < t <= 1.0):
            raise ValidationError(f"regression target outside (0,1]: {t}")
        t = min(t, REGRESSION_TARGET_CAP)
        diff = ad.sub(output, Tensor([[t]]))
        return ad.sum_all(ad.mul(diff, diff))

    if mask is None:
        mask = np.ones(target.shape)
    else:
        mask = np.asarray(mask, dtype=np.float64).reshape(1, -1)
        if mask.shape != target.shape:
            raise ShapeError("mask shape mismatch")
    valid = mask.sum()
    if valid == 0:
        raise ValidationError("all classes masked out")
    y = ad.clip(output, _BCE_EPS, 1.0 - _BCE_EPS)
    t = Tensor(target)
    ones = Tensor(np.ones(target.shape))
    per_class = ad.add(ad.mul(t, ad.log(y)),
                       ad.mul(ad.sub(ones, t), ad.log(ad.sub(ones, y))))
    masked = ad.mul(per_class, Tensor(mask))
    return ad.scale(ad.sum_all(masked), -1.0 / valid)


# ---------------------------------------------------------------------------
# checkpoints: config JSON + parameter blob
# ---------------------------------------------------------------------------

def save_checkpoint(cfg: ModelConfig, params: dict[str, Tensor], path) -> None:
    blob = {
        "config": cfg.to_json(),
        "params": {
            name: {"rows": t.rows, "cols": t.cols,
                   "data": t.data.ravel().tolist()}
            for name, t in params.items()
        },
    }
    with open(path, "w") as fh:
        json.dump(blob, fh)


def load_checkpoint(path) -> tuple[ModelConfig, dict[str, Tensor]]:
    with open(path) as fh:
        blob = json.load(fh)
    cfg = ModelConfig.from_json(blob["config"])
    params = {
        name: Tensor(np.array(rec["data"]).reshape(rec["rows"], rec["cols"]))
        for name, rec in blob["params"].items()
    }
    return cfg, params
