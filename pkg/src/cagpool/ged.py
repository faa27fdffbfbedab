"""Exact graph edit distance via A* search, plus similarity-label conversion.

The search assigns the nodes of graph A, in a fixed degree-descending order,
to nodes of graph B or to deletion; edge costs are settled as soon as both
endpoints are decided.  The heuristic combines the label-multiset mismatch of
the unassigned nodes with the edge-count difference of the untouched remainders
and is admissible, so the returned distance is optimal.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import SearchBudgetError, ValidationError
from .graphs import Graph, GraphPair, gen_random_graph

DEFAULT_NODE_BUDGET = 10
DEFAULT_STATE_BUDGET = 50_000_000


@dataclass(frozen=True)
class CostModel:
    node_ins: float = 1.0
    node_del: float = 1.0
    node_sub: float = 1.0   # applied only on label mismatch
    edge_ins: float = 1.0
    edge_del: float = 1.0

    def __post_init__(self):
        if min(self.node_ins, self.node_del, self.node_sub,
               self.edge_ins, self.edge_del) < 0:
            raise ValidationError("edit costs must be non-negative")


@dataclass(frozen=True)
class GedResult:
    ged: float
    nged: float
    similarity: float
    edit_path: tuple | None = None


def similarity_label(ged: float, na: int, nb: int) -> float:
    """S = exp(-GED / ((|V_A|+|V_B|)/2)), always in (0,1]."""
    if ged < 0:
        raise ValidationError("negative edit distance")
    if na + nb <= 0:
        raise ValidationError("empty pair has no normalization")
    return math.exp(-ged / ((na + nb) / 2.0))


def _labels(g: Graph) -> list[int]:
    return list(g.node_labels) if g.node_labels is not None else [0] * g.num_nodes


def _label_mismatch_bound(rem_a: Counter, rem_b: Counter,
                          cost: CostModel) -> float:
    """Lower bound on node-op cost for the unassigned node multisets."""
    na, nb = sum(rem_a.values()), sum(rem_b.values())
    matched = sum(min(rem_a[lab], rem_b[lab]) for lab in rem_a)
    subs = min(na, nb) - min(matched, min(na, nb))
    return (subs * cost.node_sub
            + (na - min(na, nb)) * cost.node_del
            + (nb - min(na, nb)) * cost.node_ins)


def exact_ged(a: Graph, b: Graph, cost: CostModel | None = None,
              node_budget: int = DEFAULT_NODE_BUDGET,
              state_budget: int = DEFAULT_STATE_BUDGET,
              return_path: bool = False) -> GedResult:
    """Minimum-cost edit path between two labeled graphs.

    Raises :class:`SearchBudgetError` if a graph exceeds ``node_budget`` nodes
    or the search expands more than ``state_budget`` states.
    """
    cost = cost or CostModel()
    if max(a.num_nodes, b.num_nodes) > node_budget:
        raise SearchBudgetError(
            f"graphs exceed the exact-GED node budget of {node_budget}")

    la, lb = _labels(a), _labels(b)
    # assign high-degree nodes first: their edge costs settle earliest
    order = sorted(range(a.num_nodes), key=lambda u: -a.degree(u))
    adj_a = {u: {v for v in range(a.num_nodes) if a.has_edge(u, v)}
             for u in range(a.num_nodes)}
    adj_b = {u: {v for v in range(b.num_nodes) if b.has_edge(u, v)}
             for u in range(b.num_nodes)}
    edges_b = set(b.edges)

    # remaining-A statistics are a function of depth only (fixed order)
    rem_labels_a = [Counter(la[order[i]] for i in range(d, a.num_nodes))
                    for d in range(a.num_nodes + 1)]
    rem_edges_a = []
    for d in range(a.num_nodes + 1):
        remaining = {order[i] for i in range(d, a.num_nodes)}
        rem_edges_a.append(sum(1 for (u, v) in a.edges
                               if u in remaining and v in remaining))

    def heuristic(depth: int, used_b: frozenset) -> float:
        rem_b = Counter(lb[v] for v in range(b.num_nodes) if v not in used_b)
        h = _label_mismatch_bound(rem_labels_a[depth], rem_b, cost)
        ea = rem_edges_a[depth]
        eb = sum(1 for (u, v) in edges_b
                 if u not in used_b and v not in used_b)
        if ea > eb:
            h += (ea - eb) * cost.edge_del
        elif eb > ea:
            h += (eb - ea) * cost.edge_ins
        return h

    if a.num_nodes == 0:
        total = b.num_nodes * cost.node_ins + len(b.edges) * cost.edge_ins
        total_nodes = a.num_nodes + b.num_nodes
        return GedResult(
            ged=total,
            nged=total / (total_nodes / 2.0) if total_nodes else 0.0,
            similarity=similarity_label(total, a.num_nodes, b.num_nodes)
            if total_nodes else 1.0,
            edit_path=_reconstruct_path(a, b, order, (), cost)
            if return_path else None,
        )

    # state: (f, tiebreak, g_cost, depth, mapping tuple, used_b frozenset)
    counter = itertools.count()
    start_h = heuristic(0, frozenset())
    heap = [(start_h, next(counter), 0.0, 0, (), frozenset())]
    expanded = 0
    best_seen: dict[tuple, float] = {}

    while heap:
        f, _, g, depth, mapping, used_b = heapq.heappop(heap)
        expanded += 1
        if expanded > state_budget:
            raise SearchBudgetError(
                f"exact-GED state budget of {state_budget} exceeded")
        if depth == a.num_nodes:
            # leftover-B insertion costs were folded in when this state was pushed
            path = _reconstruct_path(a, b, order, mapping, cost) \
                if return_path else None
            total_nodes = a.num_nodes + b.num_nodes
            return GedResult(
                ged=g,
                nged=g / (total_nodes / 2.0) if total_nodes else 0.0,
                similarity=similarity_label(g, a.num_nodes, b.num_nodes)
                if total_nodes else 1.0,
                edit_path=path,
            )
        u = order[depth]
        candidates: list[int | None] = [v for v in range(b.num_nodes)
                                        if v not in used_b]
        candidates.append(None)  # deletion
        for v in candidates:
            step = 0.0
            if v is None:
                step += cost.node_del
            elif la[u] != lb[v]:
                step += cost.node_sub
            # settle edges to already-assigned A nodes
            for i in range(depth):
                w, wv = order[i], mapping[i]
                a_edge = w in adj_a[u]
                b_edge = (v is not None and wv is not None
                          and wv in adj_b[v])
                if a_edge and not b_edge:
                    step += cost.edge_del
                elif b_edge and not a_edge:
                    step += cost.edge_ins
            new_used = used_b | {v} if v is not None else used_b
            new_mapping = mapping + (v,)
            new_g = g + step
            new_depth = depth + 1
            if new_depth == a.num_nodes:
                # fold insertion of leftover B nodes/edges into g now
                new_g += sum(cost.node_ins for t in range(b.num_nodes)
                             if t not in new_used)
                new_g += sum(cost.edge_ins for (s, t) in edges_b
                             if s not in new_used or t not in new_used)
                h = 0.0
            else:
                h = heuristic(new_depth, new_used)
            key = (new_depth, new_mapping)
            prev = best_seen.get(key)
            if prev is not None and prev <= new_g:
                continue
            best_seen[key] = new_g
            heapq.heappush(heap, (new_g + h, next(counter), new_g,
                                  new_depth, new_mapping, new_used))

    raise SearchBudgetError("exact-GED search exhausted without a solution")


def _reconstruct_path(a: Graph, b: Graph, order, mapping,
                      cost: CostModel) -> tuple:
    """Human-readable edit operations implied by the final node mapping."""
    la, lb = _labels(a), _labels(b)
    assign = {order[i]: mapping[i] for i in range(a.num_nodes)}
    used_b = {v for v in mapping if v is not None}
    ops = []
    for u in range(a.num_nodes):
        v = assign.get(u)
        if v is None:
            ops.append(("del_node", u))
        elif la[u] != lb[v]:
            ops.append(("sub_node", u, v))
    for v in range(b.num_nodes):
        if v not in used_b:
            ops.append(("ins_node", v))
    for (u, w) in sorted(a.edges):
        mu, mw = assign.get(u), assign.get(w)
        if mu is None or mw is None or not b.has_edge(mu, mw):
            ops.append(("del_edge", u, w))
    mapped_b_edges = {(min(assign[u], assign[w]), max(assign[u], assign[w]))
                      for (u, w) in a.edges
                      if assign.get(u) is not None and assign.get(w) is not None}
    for (u, w) in sorted(b.edges):
        if (u, w) not in mapped_b_edges:
            ops.append(("ins_edge", u, w))
    return tuple(ops)


# ---------------------------------------------------------------------------
# dataset generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GedDataset:
    graphs: tuple[Graph, ...]
    splits: dict  # name -> list of (i, j, GedResult)

    def pairs(self, split: str) -> list[GraphPair]:
        return [GraphPair(self.graphs[i], self.graphs[j], res.similarity)
                for i, j, res in self.splits[split]]


def _with_size_features(g: Graph, alphabet: int, scale: int) -> Graph:
    """One-hot label features plus normalized degree and graph-size columns.

    Edit distance grows with size and density gaps between the two graphs,
    but mean pooling hides |V| from the model, so the regression task needs
    these cues spelled out as node features.
    """
    feats = np.zeros((g.num_nodes, alphabet + 2))
    deg = np.zeros(g.num_nodes)
    for u, v in g.edges:
        deg[u] += 1.0
        deg[v] += 1.0
    for i in range(g.num_nodes):
        feats[i, g.label_of(i)] = 1.0
    feats[:, alphabet] = deg / scale
    feats[:, alphabet + 1] = g.num_nodes / scale
    return Graph(g.num_nodes, g.edges, g.node_labels, feats)


def gen_ged_dataset(num_graphs: int, max_nodes: int, seed: int,
                    label_alphabet: int = 3,
                    node_budget: int = DEFAULT_NODE_BUDGET) -> GedDataset:
    """All unordered pairs (including self-pairs) of random labeled graphs,
    labeled by the exact oracle and split 60/20/20 by graph.

    A pair lands in the most held-out split of its two graphs, so val/test
    query graphs never appear inside the training pairs.
    """
    if num_graphs < 1:
        raise ValidationError("need at least one graph")
    if max_nodes > node_budget:
        raise ValidationError(
            f"max_nodes {max_nodes} exceeds oracle budget {node_budget}")
    rng = np.random.default_rng(seed)
    graphs = []
    for _ in range(num_graphs):
        n = int(rng.integers(3, max_nodes + 1))
        g = gen_random_graph(n, 0.4, label_alphabet,
                             int(rng.integers(2 ** 31)))
        graphs.append(_with_size_features(g, label_alphabet, node_budget))

    # split graphs 60/20/20 deterministically
    perm = rng.permutation(num_graphs)
    n_train = int(round(num_graphs * 0.6))
    n_val = int(round(num_graphs * 0.2))
    split_of = {}
    for pos, gi in enumerate(perm):
        if pos < n_train:
            split_of[int(gi)] = 0
        elif pos < n_train + n_val:
            split_of[int(gi)] = 1
        else:
            split_of[int(gi)] = 2

    splits = {"train": [], "val": [], "test": []}
    names = ("train", "val", "test")
    for i in range(num_graphs):
        for j in range(i, num_graphs):
            res = exact_ged(graphs[i], graphs[j], node_budget=node_budget)
            bucket = names[max(split_of[i], split_of[j])]
            splits[bucket].append((i, j, res))
    return GedDataset(tuple(graphs), splits)
