"""Undirected labeled graphs, generators, permutations, brute-force isomorphism.

Graphs are simple (no self-loops, no multi-edges) and immutable.  Node
features default to a one-hot encoding of the node label; explicit feature
matrices are accepted from file input.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BruteForceBoundError, ValidationError

ISO_BRUTE_FORCE_BOUND = 8  # 8! permutations is instant; larger graphs refused


@dataclass(frozen=True, eq=False)
class Graph:
    num_nodes: int
    edges: frozenset  # frozenset of (u, v) with u < v
    node_labels: tuple[int, ...] | None = None
    node_features: np.ndarray | None = None  # N x F, read-only

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        if (self.num_nodes, self.edges, self.node_labels) != \
                (other.num_nodes, other.edges, other.node_labels):
            return False
        if (self.node_features is None) != (other.node_features is None):
            return False
        return self.node_features is None or \
            np.array_equal(self.node_features, other.node_features)

    def __hash__(self):
        return hash((self.num_nodes, self.edges, self.node_labels))

    def __post_init__(self):
        n = self.num_nodes
        if n < 0:
            raise ValidationError("negative node count")
        edges = frozenset((min(u, v), max(u, v)) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise ValidationError(f"self-loop on node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValidationError(f"edge ({u},{v}) out of range for n={n}")
        object.__setattr__(self, "edges", edges)
        if self.node_labels is not None:
            labels = tuple(int(x) for x in self.node_labels)
            if len(labels) != n:
                raise ValidationError("label count != node count")
            object.__setattr__(self, "node_labels", labels)
        if self.node_features is not None:
            feats = np.array(self.node_features, dtype=np.float64)
            if feats.ndim != 2 or feats.shape[0] != n:
                raise ValidationError("feature matrix must be N x F")
            feats.flags.writeable = False
            object.__setattr__(self, "node_features", feats)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def degree(self, u: int) -> int:
        return sum(1 for e in self.edges if u in e)

    def label_of(self, u: int) -> int:
        return self.node_labels[u] if self.node_labels is not None else 0

    def features(self, width: int | None = None) -> np.ndarray:
        """Node features; falls back to one-hot of labels when absent."""
        if self.node_features is not None:
            return self.node_features
        labels = self.node_labels or (0,) * self.num_nodes
        f = width if width is not None else (max(labels) + 1 if labels else 1)
        out = np.zeros((self.num_nodes, f))
        for i, lab in enumerate(labels):
            if lab >= f:
                raise ValidationError(f"label {lab} exceeds feature width {f}")
            out[i, lab] = 1.0
        return out


@dataclass(frozen=True)
class GraphPair:
    a: Graph
    b: Graph
    target: object  # scalar in (0,1] for regression, 0/1 vector for classification
    mask: tuple[int, ...] | None = None  # per-class validity for masked BCE

    def target_array(self) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.target, dtype=np.float64))


def adjacency(g: Graph) -> np.ndarray:
    """Raw 0/1 adjacency without self-loops."""
    a = np.zeros((g.num_nodes, g.num_nodes))
    for u, v in g.edges:
        a[u, v] = 1.0
        a[v, u] = 1.0
    return a


def adjacency_with_self_loops(g: Graph) -> np.ndarray:
    a = adjacency(g)
    np.fill_diagonal(a, 1.0)
    return a


def check_permutation(p, n: int) -> tuple[int, ...]:
    p = tuple(int(x) for x in p)
    if len(p) != n or sorted(p) != list(range(n)):
        raise ValidationError(f"not a permutation of 0..{n - 1}: {p}")
    return p


def permute(g: Graph, p) -> Graph:
    """Relabel nodes: node i of g becomes node p[i] of the result."""
    p = check_permutation(p, g.num_nodes)
    edges = frozenset((min(p[u], p[v]), max(p[u], p[v])) for u, v in g.edges)
    labels = None
    if g.node_labels is not None:
        labels = [0] * g.num_nodes
        for i, lab in enumerate(g.node_labels):
            labels[p[i]] = lab
        labels = tuple(labels)
    feats = None
    if g.node_features is not None:
        feats = np.empty_like(g.node_features)
        for i in range(g.num_nodes):
            feats[p[i]] = g.node_features[i]
    return Graph(g.num_nodes, edges, labels, feats)


def invert_permutation(p) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, q in enumerate(p):
        inv[q] = i
    return tuple(inv)


def are_isomorphic(a: Graph, b: Graph) -> bool:
    """Exhaustive permutation search; refuses graphs above N=8."""
    if max(a.num_nodes, b.num_nodes) > ISO_BRUTE_FORCE_BOUND:
        raise BruteForceBoundError(
            f"too large for brute force (>{ISO_BRUTE_FORCE_BOUND} nodes)")
    if a.num_nodes != b.num_nodes or len(a.edges) != len(b.edges):
        return False
    if sorted(a.node_labels or ()) != sorted(b.node_labels or ()):
        return False
    la = a.node_labels or (0,) * a.num_nodes
    lb = b.node_labels or (0,) * b.num_nodes
    for p in itertools.permutations(range(a.num_nodes)):
        if any(la[i] != lb[p[i]] for i in range(a.num_nodes)):
            continue
        if all((min(p[u], p[v]), max(p[u], p[v])) in b.edges for u, v in a.edges):
            return True
    return False


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_random_graph(n: int, edge_prob: float, label_alphabet: int,
                     seed: int) -> Graph:
    """Erdos-Renyi graph with uniform node labels; deterministic per seed."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not (0.0 <= edge_prob <= 1.0):
        raise ValidationError(f"edge_prob out of [0,1]: {edge_prob}")
    if label_alphabet < 1:
        raise ValidationError("label alphabet must be >= 1")
    rng = np.random.default_rng(seed)
    edges = set()
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < edge_prob:
                edges.add((u, v))
    labels = tuple(int(x) for x in rng.integers(0, label_alphabet, size=n))
    return Graph(n, frozenset(edges), labels)


# Motif-pair task.  A pair is positive iff graph A contains a triangle of
# nodes carrying MOTIF_LABEL_A and graph B contains a 4-cycle of nodes
# carrying MOTIF_LABEL_B.  Every A graph carries exactly the same number of
# label-A nodes (and likewise for B graphs), planted or not, so label counts
# carry no class information; only the wiring among labeled nodes does.
MOTIF_LABEL_A = 0
MOTIF_LABEL_B = 1
_MOTIF_MARKED_A = 5   # label-A nodes per A graph
_MOTIF_MARKED_B = 6   # label-B nodes per B graph


def _has_labeled_triangle(g: Graph, label: int) -> bool:
    marked = [i for i in range(g.num_nodes) if g.label_of(i) == label]
    for u, v, w in itertools.combinations(marked, 3):
        if g.has_edge(u, v) and g.has_edge(v, w) and g.has_edge(u, w):
            return True
    return False


def _has_labeled_4cycle(g: Graph, label: int) -> bool:
    marked = [i for i in range(g.num_nodes) if g.label_of(i) == label]
    for quad in itertools.combinations(marked, 4):
        for perm in itertools.permutations(quad[1:]):
            cyc = (quad[0],) + perm
            if all(g.has_edge(cyc[i], cyc[(i + 1) % 4]) for i in range(4)):
                return True
    return False


def _motif_graph(rng, which: str, plant: bool, alphabet: int = 6,
                 n_lo: int = 10, n_hi: int = 16) -> Graph:
    """Random host graph with an optionally planted labeled motif."""
    motif_label = MOTIF_LABEL_A if which == "a" else MOTIF_LABEL_B
    motif_size = 3 if which == "a" else 4
    marked_count = _MOTIF_MARKED_A if which == "a" else _MOTIF_MARKED_B
    other_labels = [l for l in range(alphabet) if l != motif_label]
    detector = _has_labeled_triangle if which == "a" else _has_labeled_4cycle
    for _ in range(200):
        n = int(rng.integers(n_lo, n_hi + 1))
        base = gen_random_graph(n, 0.2, alphabet, int(rng.integers(2 ** 31)))
        # fixed number of marked nodes regardless of planting
        labels = [other_labels[int(rng.integers(len(other_labels)))]
                  if l == motif_label else l for l in base.node_labels]
        marked = [int(x) for x in rng.choice(n, size=marked_count, replace=False)]
        for i in marked:
            labels[i] = motif_label
        edges = set(base.edges)
        if plant:
            nodes = marked[:motif_size]
            if which == "a":
                u, v, w = nodes
                edges |= {tuple(sorted(e)) for e in [(u, v), (v, w), (u, w)]}
            else:
                c = nodes
                edges |= {tuple(sorted((c[i], c[(i + 1) % 4]))) for i in range(4)}
        g = Graph(n, frozenset(edges), tuple(labels))
        if detector(g, motif_label) == plant:
            return g
    raise ValidationError("could not realize requested motif condition")


def gen_motif_pair_dataset(count: int, seed: int) -> list[GraphPair]:
    """Pairs labeled 1 iff A holds motif M1 and B holds motif M2.

    Classes are balanced to ~50% and both motifs occur in negatives, so the
    label is not a function of either graph alone.
    """
    if count < 1:
        raise ValidationError("count must be >= 1")
    rng = np.random.default_rng(seed)
    pairs = []
    negative_cases = [(False, False), (True, False), (False, True)]
    for _ in range(count):
        if rng.random() < 0.5:
            plant_a, plant_b = True, True
        else:
            plant_a, plant_b = negative_cases[int(rng.integers(3))]
        a = _motif_graph(rng, "a", plant_a)
        b = _motif_graph(rng, "b", plant_b)
        label = 1.0 if (plant_a and plant_b) else 0.0
        pairs.append(GraphPair(a, b, np.array([label])))
    return pairs


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def graph_to_json(g: Graph) -> dict:
    obj = {"n": g.num_nodes, "edges": sorted([u, v] for u, v in g.edges)}
    if g.node_labels is not None:
        obj["labels"] = list(g.node_labels)
    if g.node_features is not None:
        obj["features"] = g.node_features.tolist()
    return obj


def graph_from_json(obj: dict) -> Graph:
    edges = [tuple(e) for e in obj.get("edges", [])]
    if len(edges) != len({(min(e), max(e)) for e in edges}):
        raise ValidationError("multi-edge in graph JSON")
    labels = tuple(obj["labels"]) if "labels" in obj else None
    feats = np.array(obj["features"]) if "features" in obj else None
    return Graph(obj["n"], frozenset(edges), labels, feats)


def pair_to_json(p: GraphPair) -> dict:
    target = p.target_array()
    obj = {
        "a": graph_to_json(p.a),
        "b": graph_to_json(p.b),
        "target": float(target[0]) if target.size == 1 else target.tolist(),
    }
    if p.mask is not None:
        obj["mask"] = list(p.mask)
    return obj


def pair_from_json(obj: dict) -> GraphPair:
    mask = tuple(obj["mask"]) if "mask" in obj else None
    return GraphPair(graph_from_json(obj["a"]), graph_from_json(obj["b"]),
                     obj["target"], mask)


def save_pairs(pairs, path) -> None:
    with open(path, "w") as fh:
        for p in pairs:
            fh.write(json.dumps(pair_to_json(p)) + "\n")


def load_pairs(path) -> list[GraphPair]:
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                pairs.append(pair_from_json(json.loads(line)))
    return pairs
