"""Pair-aware node selection: co-attention scoring, TopK, sub-graph extraction.

This is the interaction module proper.  Both graphs' mean-pooled embeddings
are concatenated and linearly transformed into one co-attention vector whose
halves score the nodes of each side; the top ceil(k*N) nodes survive, with
their features scaled by their scores.  Baseline scorers (projection-vector
and GCN-based) and the quadratic pairwise node-comparison histogram are
included for ablations and runtime comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import (DegenerateCoAttentionError, ShapeError, ValidationError)
from .gcn import glorot

COATTENTION_NORM_EPS = 1e-12
DEFAULT_POOLING_RATIO = 0.5
DEFAULT_HISTOGRAM_BINS = 16


def check_pooling_ratio(k: float) -> float:
    k = float(k)
    if not (0.0 < k <= 1.0):
        raise ValidationError(f"pooling ratio must be in (0,1], got {k}")
    return k


def init_coattention_params(embed_dim: int, rng: np.random.Generator,
                            mlp: bool = False,
                            prefix: str = "coatt") -> dict[str, Tensor]:
    """Parameters of the co-attention transform over [x_a || x_b].

    ``embed_dim`` is the per-graph embedding width (n*F'), so the transform
    acts on vectors of width 2*embed_dim.  With ``mlp=True`` a single relu
    hidden layer of the same width is inserted.
    """
    # the bias starts small but nonzero so alpha cannot be identically zero
    # (a dead-relu encoder would otherwise trip the degeneracy guard at init)
    d2 = 2 * embed_dim
    if mlp:
        return {
            f"{prefix}.w1": glorot(rng, d2, d2),
            f"{prefix}.b1": Tensor(rng.uniform(-0.1, 0.1, size=(1, d2))),
            f"{prefix}.w2": glorot(rng, d2, d2),
            f"{prefix}.b2": Tensor(rng.uniform(-0.1, 0.1, size=(1, d2))),
        }
    return {
        f"{prefix}.w": glorot(rng, d2, d2),
        f"{prefix}.b": Tensor(rng.uniform(-0.1, 0.1, size=(1, d2))),
    }


@dataclass(frozen=True)
class PooledSide:
    """One side of a pooled pair: indices, scores, scaled features, adjacency."""
    idx: tuple[int, ...]
    scores: np.ndarray        # length-N score vector (detached copy)
    x: Tensor                 # ceil(kN) x D, rows scaled by their scores
    a: np.ndarray             # induced raw adjacency, no self-loops


@dataclass(frozen=True)
class PooledPair:
    a: PooledSide
    b: PooledSide


def global_mean_pool(x_cat: Tensor) -> Tensor:
    if x_cat.rows < 1:
        raise ValidationError("global mean pool of an empty graph")
    return ad.mean_rows(x_cat)


def coattention_vector(x_a: Tensor, x_b: Tensor,
                       params: dict[str, Tensor],
                       prefix: str = "coatt") -> tuple[Tensor, Tensor]:
    """alpha = W [x_a || x_b] + b, split into per-graph halves (1xD rows)."""
    if x_a.shape != x_b.shape or x_a.rows != 1:
        raise ShapeError(f"graph embeddings must be equal 1xD rows, "
                         f"got {x_a.shape} and {x_b.shape}")
    joint = ad.concat_cols([x_a, x_b])
    if f"{prefix}.w1" in params:  # MLP variant
        hidden = ad.relu(ad.add(ad.matmul(joint, params[f"{prefix}.w1"]),
                                params[f"{prefix}.b1"]))
        alpha = ad.add(ad.matmul(hidden, params[f"{prefix}.w2"]),
                       params[f"{prefix}.b2"])
    else:
        alpha = ad.add(ad.matmul(joint, params[f"{prefix}.w"]),
                       params[f"{prefix}.b"])
    half = x_a.cols
    alpha_a, alpha_b = ad.split_cols(alpha, [half, half])
    return alpha_a, alpha_b


def node_scores(x_cat: Tensor, alpha: Tensor) -> Tensor:
    """Z = X . alpha / ||alpha||, an Nx1 column of scores."""
    if alpha.rows != 1 or alpha.cols != x_cat.cols:
        raise ShapeError(f"alpha {alpha.shape} vs features {x_cat.shape}")
    norm = ad.l2_norm(alpha)
    if norm.item() < COATTENTION_NORM_EPS:
        raise DegenerateCoAttentionError(norm.item())
    return ad.scalar_div(ad.matmul(x_cat, ad.transpose(alpha)), norm)


def topk_select(scores: np.ndarray, k: float) -> tuple[int, ...]:
    """Indices of the top ceil(kN) scores, descending, ties by node index."""
    k = check_pooling_ratio(k)
    z = np.asarray(scores, dtype=np.float64).ravel()
    n = z.size
    if n < 1:
        raise ValidationError("topk over an empty score vector")
    keep = int(np.ceil(k * n))
    order = np.lexsort((np.arange(n), -z))
    return tuple(int(i) for i in order[:keep])


def extract_subgraph(x_cat: Tensor, adj: np.ndarray, scores: Tensor,
                     idx) -> tuple[Tensor, np.ndarray]:
    """X' = X[idx] * Z[idx] (score broadcast over columns), A' = A[idx, idx].

    The induced adjacency is the raw matrix without self-loops; the post-pool
    convolution re-adds them.  Gradient flows into both the gathered feature
    rows and the scores.
    """
    idx = list(idx)
    if len(set(idx)) != len(idx):
        raise ValidationError("duplicate indices in subgraph extraction")
    x_sel = ad.gather_rows(x_cat, idx)
    z_sel = ad.gather_rows(scores, idx)
    x_prime = ad.mul(x_sel, z_sel)
    a_prime = adj[np.ix_(idx, idx)]
    return x_prime, a_prime


def cagpool(x_cat_a: Tensor, adj_a: np.ndarray,
            x_cat_b: Tensor, adj_b: np.ndarray,
            params: dict[str, Tensor], k: float = DEFAULT_POOLING_RATIO,
            prefix: str = "coatt",
            fixed_idx: tuple | None = None) -> PooledPair:
    """Full co-attention pooling of a pair: means -> alpha -> scores -> TopK.

    ``fixed_idx`` (a pair of index tuples) bypasses TopK selection; this is
    how finite-difference checks freeze the non-differentiable selection at
    the evaluation point.
    """
    mean_a = global_mean_pool(x_cat_a)
    mean_b = global_mean_pool(x_cat_b)
    alpha_a, alpha_b = coattention_vector(mean_a, mean_b, params, prefix)
    sides = []
    for pos, (x_cat, adj, alpha) in enumerate(((x_cat_a, adj_a, alpha_a),
                                               (x_cat_b, adj_b, alpha_b))):
        z = node_scores(x_cat, alpha)
        idx = fixed_idx[pos] if fixed_idx is not None else topk_select(z.data, k)
        x_prime, a_prime = extract_subgraph(x_cat, adj, z, idx)
        sides.append(PooledSide(tuple(idx), z.data.ravel().copy(),
                                x_prime, a_prime))
    return PooledPair(sides[0], sides[1])


# ---------------------------------------------------------------------------
# ablation scorers (pair-independent)
# ---------------------------------------------------------------------------

def topkpool_scores(x_cat: Tensor, proj: Tensor) -> Tensor:
    """Projection-vector scoring: Z = X . p / ||p||; ignores the partner graph."""
    norm = ad.l2_norm(proj)
    if norm.item() < COATTENTION_NORM_EPS:
        raise ValidationError("zero projection vector")
    return ad.scalar_div(ad.matmul(x_cat, ad.transpose(proj)), norm)


def sagpool_scores(x_cat: Tensor, a_hat: np.ndarray, theta: Tensor) -> Tensor:
    """Single-output GCN scoring: Z = tanh(A_hat X theta); topology-aware."""
    if theta.cols != 1:
        raise ShapeError("sagpool scorer must have a single output column")
    return ad.tanh(ad.matmul(ad.matmul(Tensor(a_hat), x_cat), theta))


# ---------------------------------------------------------------------------
# node-level interaction baseline (the quadratic path)
# ---------------------------------------------------------------------------

def pairwise_node_interaction(x_a: np.ndarray, x_b: np.ndarray,
                              bins: int = DEFAULT_HISTOGRAM_BINS) -> np.ndarray:
    """Histogram of all cross-graph node dot products on unit-normalized rows.

    This is the O(|V_A| * |V_B|) comparison used by node-level interaction
    models.  Zero-norm rows contribute dot products of 0.
    """
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    x_a = np.asarray(x_a, dtype=np.float64)
    x_b = np.asarray(x_b, dtype=np.float64)
    na = np.linalg.norm(x_a, axis=1, keepdims=True)
    nb = np.linalg.norm(x_b, axis=1, keepdims=True)
    # zero-norm rows divide by 1 and stay zero, so their dots land at 0
    ua = x_a / np.where(na > 0, na, 1.0)
    ub = x_b / np.where(nb > 0, nb, 1.0)
    dots = (ua @ ub.T).ravel()
    # right-inclusive buckets: (-1, -1+w], ..., (1-w, 1], with -1 in bucket 0
    edges = np.linspace(-1.0, 1.0, bins + 1)[1:-1]
    pos = np.searchsorted(edges, dots, side="left")
    return np.bincount(pos, minlength=bins).astype(np.float64)
