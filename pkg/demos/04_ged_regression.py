"""Regress exact-GED similarity labels with the co-attention model.

Builds a small all-pairs GED dataset, trains the regression head on
exp(-nGED) targets, and reports test MSE and rank correlations against a
constant-predictor reference. Run with `python demos/04_ged_regression.py`.
"""

import numpy as np

from cagpool import (GcnConfig, ModelConfig, TrainConfig, evaluate,
                     gen_ged_dataset, train)

ds = gen_ged_dataset(num_graphs=36, max_nodes=8, seed=7)
train_pairs, val_pairs, test_pairs = (ds.pairs(s)
                                      for s in ("train", "val", "test"))
print(f"pairs: {len(train_pairs)} train / {len(val_pairs)} val / "
      f"{len(test_pairs)} test")

targets = lambda ps: np.array([float(p.target_array()[0]) for p in ps])
const_mse = float(np.mean((targets(test_pairs) - targets(train_pairs).mean())
                          ** 2))
print(f"constant-predictor test MSE: {const_mse:.5f}")

cfg = ModelConfig(gcn=GcnConfig(in_dim=5, hidden_dim=32, num_layers=3),
                  task="regression", interaction_mode="cagpool")
result = train(cfg, train_pairs, val_pairs,
               TrainConfig(epochs=30, seed=0, lr=3e-3))
report = evaluate(test_pairs, result.params, cfg)
print(f"model test MSE {report.mse:.5f} "
      f"({report.mse / const_mse:.0%} of constant), "
      f"Spearman {report.spearman_rho:.3f}, Kendall {report.kendall_tau:.3f}")
