"""Exact graph edit distance with A* search, edit paths, and similarity.

Computes GED between small labeled graphs, prints the optimal edit path,
and shows the exp(-nGED) similarity label used for regression targets.
Run with `python demos/02_exact_ged.py`.
"""

from cagpool import (exact_ged, gen_ged_dataset, gen_random_graph, Graph,
                     permute)

triangle = Graph(num_nodes=3, edges=frozenset({(0, 1), (1, 2), (0, 2)}),
                 node_labels=(0, 0, 0))
path3 = Graph(num_nodes=3, edges=frozenset({(0, 1), (1, 2)}),
              node_labels=(0, 0, 0))

res = exact_ged(triangle, path3, return_path=True)
print(f"GED(triangle, path) = {res.ged}")
print(f"normalized GED      = {res.nged}")
print(f"similarity exp(-n)  = {res.similarity:.6f}")
print("edit path:")
for op in res.edit_path:
    print(f"  {op}")

# isomorphic graphs always have distance 0 and similarity exactly 1.0
g = gen_random_graph(6, 0.4, 2, seed=3)
h = permute(g, (5, 4, 3, 2, 1, 0))
print(f"\nGED(g, permuted g) = {exact_ged(g, h).ged}, "
      f"similarity = {exact_ged(g, h).similarity}")

# a labeled pair dataset: all-pairs GED over a small graph pool, split so
# held-out graphs never appear in training pairs
ds = gen_ged_dataset(num_graphs=12, max_nodes=5, seed=7)
for split in ("train", "val", "test"):
    pairs = ds.pairs(split)
    sims = [float(p.target_array()[0]) for p in pairs]
    print(f"{split}: {len(pairs)} pairs, similarity range "
          f"[{min(sims):.3f}, {max(sims):.3f}]")
