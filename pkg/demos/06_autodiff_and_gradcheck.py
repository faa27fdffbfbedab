"""The tape-based autodiff engine and its finite-difference verification.

Builds a small computation by hand, pulls gradients off the tape, and then
runs the finite-difference checker over every primitive op and the full
model. Run with `python demos/06_autodiff_and_gradcheck.py`.
"""

import numpy as np

from cagpool import Tape, Tensor, finite_diff_check
from cagpool.autodiff import matmul, sigmoid, sum_all
from cagpool.gradcheck import check_model, check_ops

# gradients of sum(sigmoid(x @ w)) by hand on the tape
x = Tensor(np.array([[1.0, -2.0], [0.5, 3.0]]))
w = Tensor(np.array([[0.1], [-0.4]]))
with Tape() as tape:
    y = sum_all(sigmoid(matmul(x, w)))
grads = tape.gradients(y, [x, w])
print(f"value {y.item():.6f}")
print(f"dL/dw =\n{grads[w]}")

# finite differences agree with the tape
rel_err = finite_diff_check(lambda t: sum_all(sigmoid(matmul(x, t))), w)
print(f"finite-difference relative error: {rel_err:.2e}")

# and the systematic sweep: every op, then the full pairwise model
op_report = check_ops(num_seeds=5)
print(f"\nops checked: {len(op_report)}, worst relative error "
      f"{max(op_report.values()):.2e}")
model_report = check_model(num_seeds=2)
print(f"model paths checked: {len(model_report)}, worst relative error "
      f"{max(model_report.values()):.2e}")
