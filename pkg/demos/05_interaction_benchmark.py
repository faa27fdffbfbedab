"""Runtime scaling of the two interaction paths.

Times the quadratic node-level histogram path against the graph-level
co-attention pooling path on identical inputs, prints the per-size speedup,
and fits log-log scaling exponents (expected roughly 2 vs 1). Run with
`python demos/05_interaction_benchmark.py`.
"""

from cagpool.bench import run_interaction_benchmark

result = run_interaction_benchmark(node_counts=(50, 100, 150, 200),
                                   dim=64, reps=100)
print(f"{'N':>5} {'node-level':>12} {'graph-level':>12} {'speedup':>9}")
for row in result["sizes"]:
    print(f"{row['nodes']:>5} {row['t_node_level'] * 1e6:>10.1f}us "
          f"{row['t_graph_level'] * 1e6:>10.1f}us "
          f"{row['speedup'] * 100:>8.1f}%")
print(f"\nfitted exponents: node-level {result['exponent_node_level']:.2f}, "
      f"graph-level {result['exponent_graph_level']:.2f}")
