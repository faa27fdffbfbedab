"""Runtime comparison of node-level vs graph-level interaction paths.

Both paths consume the same pre-computed node feature matrices (the encoder
is deliberately excluded) and produce pooled/compared outputs:

* node path: all-pairs dot products + histogram, O(|V_A| * |V_B| * D);
* graph path: mean pool -> co-attention vector -> scores -> TopK -> sub-graph
  extraction, O((|V_A| + |V_B|) * D) plus a D^2 constant.

Timings use a warmup phase and the median over repetitions; the scaling
exponent per path is a least-squares slope in log-log space.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import ValidationError
from .pooling import pairwise_node_interaction

DEFAULT_NODE_COUNTS = (50, 100, 150, 200)


def graph_level_interaction(x_a: np.ndarray, adj_a: np.ndarray,
                            x_b: np.ndarray, adj_b: np.ndarray,
                            w: np.ndarray, b: np.ndarray,
                            k: float = 0.5) -> tuple[np.ndarray, np.ndarray]:
    """Plain-numpy co-attention pooling (no tape); returns (X'_A, X'_B)."""
    d = x_a.shape[1]
    joint = np.concatenate([x_a.mean(axis=0), x_b.mean(axis=0)])
    alpha = joint @ w + b
    outs = []
    for x, adj, vec in ((x_a, adj_a, alpha[:d]), (x_b, adj_b, alpha[d:])):
        z = x @ vec / np.linalg.norm(vec)
        n = z.size
        keep = int(np.ceil(k * n))
        # lexsort breaks score ties by ascending original index,
        # matching the tape-based TopK
        order = np.lexsort((np.arange(n), -z))[:keep]
        x_prime = x[order] * z[order, None]
        a_prime = adj[np.ix_(order, order)]
        outs.append((x_prime, a_prime))
    return outs[0][0], outs[1][0]


def _median_time(fn, reps: int, warmup: int = 3) -> float:
    for _ in range(warmup):
        fn()
    times = np.empty(reps)
    for i in range(reps):
        t0 = time.perf_counter()
        fn()
        times[i] = time.perf_counter() - t0
    return float(np.median(times))


def fit_loglog_slope(sizes, times) -> float:
    sizes = np.asarray(sizes, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def run_interaction_benchmark(node_counts=DEFAULT_NODE_COUNTS, dim: int = 64,
                              reps: int = 200, k: float = 0.5,
                              bins: int = 16, seed: int = 0,
                              inner_loops: int = 20) -> dict:
    """Median per-size timings, per-size speedup, and fitted exponents.

    ``inner_loops`` batches several calls per timed sample so the clock
    resolution does not dominate the microsecond-scale graph path.
    """
    node_counts = tuple(int(n) for n in node_counts)
    if len(node_counts) < 2:
        raise ValidationError("need at least two node counts to fit a slope")
    rng = np.random.default_rng(seed)
    d2 = 2 * dim
    w = rng.standard_normal((d2, d2))
    b = rng.standard_normal(d2)

    per_size = []
    for n in node_counts:
        x_a = rng.standard_normal((n, dim))
        x_b = rng.standard_normal((n, dim))
        adj_a = (rng.random((n, n)) < 0.1).astype(np.float64)
        adj_b = (rng.random((n, n)) < 0.1).astype(np.float64)
        adj_a = np.triu(adj_a, 1) + np.triu(adj_a, 1).T
        adj_b = np.triu(adj_b, 1) + np.triu(adj_b, 1).T

        def node_path():
            for _ in range(inner_loops):
                pairwise_node_interaction(x_a, x_b, bins)

        def graph_path():
            for _ in range(inner_loops):
                graph_level_interaction(x_a, adj_a, x_b, adj_b, w, b, k)

        t_node = _median_time(node_path, reps) / inner_loops
        t_graph = _median_time(graph_path, reps) / inner_loops
        per_size.append({
            "nodes": n,
            "t_node_level": t_node,
            "t_graph_level": t_graph,
            "speedup": 1.0 - t_graph / t_node,
        })

    return {
        "dim": dim,
        "reps": reps,
        "pooling_ratio": k,
        "bins": bins,
        "sizes": per_size,
        "exponent_node_level": fit_loglog_slope(
            node_counts, [r["t_node_level"] for r in per_size]),
        "exponent_graph_level": fit_loglog_slope(
            node_counts, [r["t_graph_level"] for r in per_size]),
    }
