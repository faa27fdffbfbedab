import numpy as np
import pytest

from cagpool.autodiff import Tape, Tensor, sum_all
from cagpool.errors import DegenerateCoAttentionError, ValidationError
from cagpool.gcn import normalized_adjacency
from cagpool.graphs import Graph, adjacency, gen_random_graph
from cagpool.pooling import (
    cagpool, check_pooling_ratio, coattention_vector, extract_subgraph,
    global_mean_pool, init_coattention_params, node_scores,
    pairwise_node_interaction, sagpool_scores, topk_select, topkpool_scores,
)


def identity_coatt(d):
    return {"coatt.w": Tensor(np.eye(2 * d)),
            "coatt.b": Tensor(np.zeros((1, 2 * d)))}


# ---------------------------------------------------------------------------
# mean pool and co-attention vector
# ---------------------------------------------------------------------------

def test_global_mean_pool_example():
    assert np.array_equal(global_mean_pool(Tensor([[1.0, 3.0], [3.0, 5.0]])).data,
                          [[2.0, 4.0]])


def test_global_mean_pool_single_row():
    assert np.array_equal(global_mean_pool(Tensor([[7.0, 8.0]])).data,
                          [[7.0, 8.0]])


def test_global_mean_pool_row_permutation_invariant():
    x = np.random.default_rng(0).normal(size=(5, 3))
    a = global_mean_pool(Tensor(x)).data
    b = global_mean_pool(Tensor(x[::-1].copy())).data
    # mathematically identical; summation order costs at most a few ulps
    assert np.allclose(a, b, rtol=0, atol=1e-15)


def test_coattention_identity_transform():
    aa, ab = coattention_vector(Tensor([[1.0, 2.0]]), Tensor([[3.0, 4.0]]),
                                identity_coatt(2))
    assert np.array_equal(aa.data, [[1.0, 2.0]])
    assert np.array_equal(ab.data, [[3.0, 4.0]])


def test_coattention_degenerate_weights_constant():
    params = {"coatt.w": Tensor(np.zeros((4, 4))),
              "coatt.b": Tensor([[1.0, 2.0, 3.0, 4.0]])}
    for seed in (0, 1):
        x = np.random.default_rng(seed).normal(size=(1, 2))
        aa, ab = coattention_vector(Tensor(x), Tensor(-x), params)
        assert np.array_equal(aa.data, [[1.0, 2.0]])
        assert np.array_equal(ab.data, [[3.0, 4.0]])


def test_coattention_order_sensitivity():
    aa, _ = coattention_vector(Tensor([[3.0, 4.0]]), Tensor([[1.0, 2.0]]),
                               identity_coatt(2))
    assert np.array_equal(aa.data, [[3.0, 4.0]])


# ---------------------------------------------------------------------------
# node scores
# ---------------------------------------------------------------------------

def test_node_scores_hand_example():
    x = Tensor([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    z = node_scores(x, Tensor([[3.0, 4.0]]))
    assert np.allclose(z.data.ravel(), [0.6, 0.8, 1.4])


def test_node_scores_scale_invariant_exactly():
    x = Tensor(np.random.default_rng(1).normal(size=(4, 3)))
    alpha = np.array([[1.0, -2.0, 0.5]])
    z1 = node_scores(x, Tensor(alpha)).data
    z2 = node_scores(x, Tensor(4.0 * alpha)).data
    assert np.array_equal(z1, z2)


def test_node_scores_zero_feature_row():
    x = Tensor([[0.0, 0.0], [1.0, 2.0]])
    z = node_scores(x, Tensor([[1.0, 1.0]]))
    assert z.data[0, 0] == 0.0


def test_node_scores_degenerate_alpha_raises():
    with pytest.raises(DegenerateCoAttentionError):
        node_scores(Tensor(np.ones((2, 2))), Tensor([[0.0, 0.0]]))


# ---------------------------------------------------------------------------
# topk selection
# ---------------------------------------------------------------------------

def test_topk_example():
    assert topk_select(np.array([0.9, 0.1, 0.5]), 0.5) == (0, 2)


def test_topk_full_retention_sorted_by_score():
    assert topk_select(np.array([0.1, 0.9, 0.5]), 1.0) == (1, 2, 0)


def test_topk_single_node():
    assert topk_select(np.array([0.3]), 0.1) == (0,)


def test_topk_tie_determinism():
    z = np.array([0.5, 0.5, 0.5, 0.5])
    assert topk_select(z, 0.5) == (0, 1)
    assert topk_select(z[::-1].copy(), 0.5) == (0, 1)


def test_pooling_ratio_validation():
    with pytest.raises(ValidationError):
        check_pooling_ratio(0.0)
    with pytest.raises(ValidationError):
        check_pooling_ratio(1.5)


# ---------------------------------------------------------------------------
# sub-graph extraction
# ---------------------------------------------------------------------------

def test_extract_subgraph_hand_example():
    x = Tensor([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    scores = Tensor([[0.6], [0.8], [1.4]])
    adj = np.zeros((3, 3))
    xp, ap = extract_subgraph(x, adj, scores, (2, 1))
    assert np.allclose(xp.data, [[1.4, 1.4], [0.0, 0.8]])
    assert ap.shape == (2, 2)


def test_extract_subgraph_identity_pooling():
    g = gen_random_graph(4, 0.5, 2, seed=0)
    a = adjacency(g)
    x = Tensor(np.random.default_rng(2).normal(size=(4, 3)))
    ones = Tensor(np.ones((4, 1)))
    xp, ap = extract_subgraph(x, a, ones, (0, 1, 2, 3))
    assert np.array_equal(xp.data, x.data)
    assert np.array_equal(ap, a)


def test_extract_subgraph_singleton():
    x = Tensor(np.ones((3, 2)))
    _, ap = extract_subgraph(x, np.ones((3, 3)) - np.eye(3),
                             Tensor(np.ones((3, 1))), (1,))
    assert np.array_equal(ap, [[0.0]])


def test_extract_subgraph_gradient_reaches_scores():
    x = Tensor(np.random.default_rng(3).normal(size=(3, 2)))
    scores = Tensor([[1.0], [2.0], [3.0]])
    with Tape() as tape:
        xp, _ = extract_subgraph(x, np.zeros((3, 3)), scores, (2, 0))
        grads = tape.gradients(sum_all(xp), [scores])
    expect = np.array([[x.data[0].sum()], [0.0], [x.data[2].sum()]])
    assert np.allclose(grads[scores], expect)


# ---------------------------------------------------------------------------
# cagpool end to end
# ---------------------------------------------------------------------------

def test_cagpool_symmetric_inputs_give_same_idx():
    d = 6
    rng = np.random.default_rng(4)
    x = Tensor(rng.normal(size=(5, d)))
    adj = adjacency(gen_random_graph(5, 0.5, 2, seed=1))
    # symmetric weights: both halves of alpha computed identically
    w = np.zeros((2 * d, 2 * d))
    block = rng.normal(size=(d, d))
    w[:d, :d] = w[:d, d:] = block
    w[d:, :d] = w[d:, d:] = block
    params = {"coatt.w": Tensor(w), "coatt.b": Tensor(np.zeros((1, 2 * d)))}
    out = cagpool(x, adj, x, adj, params, k=0.5)
    assert out.a.idx == out.b.idx


def test_cagpool_partner_changes_selection():
    # a weight matrix built so that graph A's scores flip sign with the
    # partner: alpha_a equals the partner's mean embedding
    d = 2
    w = np.zeros((2 * d, 2 * d))
    w[d:, :d] = np.eye(d)  # alpha_a half reads x_b
    w[:d, d:] = np.eye(d)  # alpha_b half reads x_a
    params = {"coatt.w": Tensor(w), "coatt.b": Tensor(np.zeros((1, 2 * d)))}
    # nonzero mean so the partner-side alpha half is not degenerate
    xa = Tensor([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -0.5]])
    adj = np.zeros((4, 4))
    partner_b = Tensor([[2.0, 0.0]])
    partner_c = Tensor([[-2.0, 0.0]])
    out_b = cagpool(xa, adj, partner_b, np.zeros((1, 1)), params, k=0.5)
    out_c = cagpool(xa, adj, partner_c, np.zeros((1, 1)), params, k=0.5)
    assert out_b.a.idx != out_c.a.idx


def test_cagpool_k_one_keeps_everything():
    d = 4
    rng = np.random.default_rng(5)
    params = init_coattention_params(d, rng)
    xa = Tensor(rng.normal(size=(3, d)))
    xb = Tensor(rng.normal(size=(5, d)))
    out = cagpool(xa, np.zeros((3, 3)), xb, np.zeros((5, 5)), params, k=1.0)
    assert sorted(out.a.idx) == [0, 1, 2]
    assert sorted(out.b.idx) == [0, 1, 2, 3, 4]


def test_cagpool_pair_count_preserved():
    d = 3
    rng = np.random.default_rng(6)
    params = init_coattention_params(d, rng)
    for n in (1, 2, 6):
        g = gen_random_graph(n, 0.5, 2, seed=n)
        x = Tensor(rng.normal(size=(n, d)))
        out = cagpool(x, adjacency(g), x, adjacency(g), params, k=0.5)
        assert len(out.a.idx) == int(np.ceil(0.5 * n))


def test_cagpool_k_half_n6_keeps_three():
    d = 2
    rng = np.random.default_rng(7)
    params = init_coattention_params(d, rng)
    x = Tensor(rng.normal(size=(6, d)))
    out = cagpool(x, np.zeros((6, 6)), x, np.zeros((6, 6)), params, k=0.5)
    assert len(out.a.idx) == 3 and len(out.b.idx) == 3


# ---------------------------------------------------------------------------
# baseline scorers
# ---------------------------------------------------------------------------

def test_topkpool_matches_node_scores():
    x = Tensor(np.random.default_rng(8).normal(size=(4, 3)))
    proj = Tensor([[0.3, -1.0, 2.0]])
    assert np.array_equal(topkpool_scores(x, proj).data,
                          node_scores(x, proj).data)


def test_sagpool_isolated_node():
    g = Graph(1, frozenset())
    a_hat = normalized_adjacency(g)
    x = Tensor([[1.0, -2.0]])
    theta = Tensor([[0.5], [0.25]])
    out = sagpool_scores(x, a_hat, theta)
    assert np.allclose(out.data, np.tanh([[0.0]]))  # 0.5 - 0.5


def test_baseline_scorers_ignore_partner():
    rng = np.random.default_rng(9)
    x = Tensor(rng.normal(size=(5, 3)))
    proj = Tensor(rng.normal(size=(1, 3)))
    z1 = topkpool_scores(x, proj).data
    z2 = topkpool_scores(x, proj).data  # no partner argument exists at all
    assert np.array_equal(z1, z2)


# ---------------------------------------------------------------------------
# pairwise node interaction histogram
# ---------------------------------------------------------------------------

def test_histogram_hand_example():
    h = pairwise_node_interaction(np.array([[1.0, 0.0]]),
                                  np.array([[1.0, 0.0], [0.0, 1.0]]), bins=2)
    assert np.array_equal(h, [1.0, 1.0])


def test_histogram_self_similarity_top_bin():
    h = pairwise_node_interaction(np.array([[2.0, 1.0]]),
                                  np.array([[2.0, 1.0]]), bins=8)
    assert h[-1] == 1.0 and h.sum() == 1.0


def test_histogram_orthogonal_rows():
    h = pairwise_node_interaction(np.array([[1.0, 0.0]]),
                                  np.array([[0.0, 1.0]]), bins=4)
    # dot 0 falls in the right-inclusive bucket (-0.5, 0]
    assert h[1] == 1.0 and h.sum() == 1.0


def test_histogram_matches_brute_force():
    rng = np.random.default_rng(10)
    for _ in range(25):
        xa = rng.normal(size=(int(rng.integers(1, 8)), 4))
        xb = rng.normal(size=(int(rng.integers(1, 8)), 4))
        bins = int(rng.integers(2, 20))
        h = pairwise_node_interaction(xa, xb, bins=bins)
        ref = np.zeros(bins)
        width = 2.0 / bins
        for i in range(xa.shape[0]):
            for j in range(xb.shape[0]):
                d = (xa[i] / np.linalg.norm(xa[i])) @ (xb[j] / np.linalg.norm(xb[j]))
                b = 0
                while b < bins - 1 and d > -1.0 + (b + 1) * width:
                    b += 1
                ref[b] += 1.0
        assert np.array_equal(h, ref)
        assert h.sum() == xa.shape[0] * xb.shape[0]
