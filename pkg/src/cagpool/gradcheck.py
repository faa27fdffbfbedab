"""Finite-difference verification of every autodiff op and the full model.

Inputs are shifted away from relu/clip kinks so the central difference is a
valid oracle.  The full-model check freezes the TopK indices at the
evaluation point, since index selection is explicitly non-differentiable.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor, finite_diff_check
from .gcn import GcnConfig
from .graphs import gen_random_graph, GraphPair
from .model import ModelConfig, forward, init_model_params, loss

DEFAULT_TOLERANCE = 1e-4


def _rand(rng, rows, cols, away_from_zero=False):
    x = rng.standard_normal((rows, cols))
    if away_from_zero:
        x = np.where(np.abs(x) < 0.2, np.sign(x) * 0.2 + x, x)
    return x


def _op_cases(rng):
    """Name -> (f building a scalar from x, input array)."""
    m = Tensor(_rand(rng, 4, 3))
    col = Tensor(_rand(rng, 4, 1))
    row = Tensor(_rand(rng, 1, 3))
    right = Tensor(_rand(rng, 3, 5))
    scalar = Tensor([[1.0 + abs(rng.standard_normal())]])
    idx = [2, 0, 3]
    return {
        "matmul": (lambda x: ad.sum_all(ad.matmul(x, right)), _rand(rng, 4, 3)),
        "matmul_rhs": (lambda x: ad.sum_all(ad.matmul(m, x)), _rand(rng, 3, 5)),
        "add": (lambda x: ad.sum_all(ad.mul(ad.add(x, m), m)), _rand(rng, 4, 3)),
        "add_bias": (lambda x: ad.sum_all(ad.mul(ad.add(m, x), m)), _rand(rng, 1, 3)),
        "sub": (lambda x: ad.sum_all(ad.mul(ad.sub(x, m), m)), _rand(rng, 4, 3)),
        "mul": (lambda x: ad.sum_all(ad.mul(x, m)), _rand(rng, 4, 3)),
        "mul_col_broadcast": (lambda x: ad.sum_all(ad.mul(m, x)), _rand(rng, 4, 1)),
        "scale": (lambda x: ad.sum_all(ad.scale(x, 2.5)), _rand(rng, 4, 3)),
        "concat_cols": (lambda x: ad.sum_all(
            ad.mul(ad.concat_cols([x, m]), ad.concat_cols([m, m]))),
            _rand(rng, 4, 3)),
        "split_cols": (lambda x: ad.sum_all(
            ad.mul(ad.split_cols(x, [2, 1])[0], ad.split_cols(m, [2, 1])[0])),
            _rand(rng, 4, 3)),
        "mean_rows": (lambda x: ad.sum_all(ad.mul(ad.mean_rows(x), row)),
                      _rand(rng, 4, 3)),
        "relu": (lambda x: ad.sum_all(ad.relu(x)), _rand(rng, 4, 3, True)),
        "sigmoid": (lambda x: ad.sum_all(ad.sigmoid(x)), _rand(rng, 4, 3)),
        "tanh": (lambda x: ad.sum_all(ad.tanh(x)), _rand(rng, 4, 3)),
        "log": (lambda x: ad.sum_all(ad.log(x)),
                np.abs(_rand(rng, 4, 3)) + 0.5),
        "clip": (lambda x: ad.sum_all(ad.clip(x, -10.0, 10.0)),
                 _rand(rng, 4, 3)),
        "gather_rows": (lambda x: ad.sum_all(
            ad.mul(ad.gather_rows(x, idx), ad.gather_rows(m, idx))),
            _rand(rng, 4, 3)),
        "transpose": (lambda x: ad.sum_all(ad.matmul(ad.transpose(x), m)),
                      _rand(rng, 4, 3)),
        "scalar_div": (lambda x: ad.sum_all(ad.scalar_div(m, ad.sum_all(x))),
                       np.abs(_rand(rng, 1, 1)) + 1.0),
        "scalar_div_num": (lambda x: ad.sum_all(ad.scalar_div(x, scalar)),
                           _rand(rng, 4, 3)),
        "l2_norm": (lambda x: ad.l2_norm(x), _rand(rng, 4, 3, True)),
        "sum_all": (lambda x: ad.sum_all(x), _rand(rng, 4, 3)),
    }


def check_ops(num_seeds: int = 100, eps: float = 1e-5) -> dict[str, float]:
    """Max relative finite-difference error per op over all seeds."""
    worst: dict[str, float] = {}
    for seed in range(num_seeds):
        rng = np.random.default_rng(seed)
        for name, (f, x) in _op_cases(rng).items():
            err = finite_diff_check(f, Tensor(x), eps)
            worst[name] = max(worst.get(name, 0.0), err)
    return worst


def _small_model():
    cfg = ModelConfig(gcn=GcnConfig(in_dim=3, hidden_dim=3, num_layers=2),
                      task="classification", num_classes=2,
                      interaction_mode="cagpool", head_hidden=4)
    return cfg


def check_model(num_seeds: int = 10, eps: float = 1e-5) -> dict[str, float]:
    """Check d(loss)/d(param) for every parameter of the full pipeline.

    The TopK indices are frozen at their unperturbed values; gradient still
    flows through the gathered rows and the score multiplication.
    """
    cfg = _small_model()
    worst: dict[str, float] = {}
    accepted = 0
    seed = 0
    while accepted < num_seeds:
        rng = np.random.default_rng(1000 + seed)
        seed += 1
        a = gen_random_graph(6, 0.4, 3, int(rng.integers(2 ** 31)))
        b = gen_random_graph(5, 0.4, 3, int(rng.integers(2 ** 31)))
        target = rng.integers(0, 2, size=2).astype(float)
        pair = GraphPair(a, b, target)
        params = init_model_params(cfg, int(rng.integers(2 ** 31)))
        with ad.KinkMonitor() as monitor:
            out, diag = forward(pair, params, cfg)
        # central differences are only an oracle away from relu kinks:
        # reject evaluation points with pre-activations near zero
        if monitor.margin < 1e-3:
            continue
        accepted += 1
        frozen = (diag.idx_a, diag.idx_b)

        for name in params:
            def f(x, name=name):
                trial = dict(params)
                trial[name] = x
                y, _ = forward(pair, trial, cfg, fixed_idx=frozen)
                return loss(y, target, cfg)

            err = finite_diff_check(f, params[name], eps)
            key = f"model[{name}]"
            worst[key] = max(worst.get(key, 0.0), err)
    return worst


def full_report(op_seeds: int = 100, model_seeds: int = 10,
                eps: float = 1e-5) -> dict[str, float]:
    report = check_ops(op_seeds, eps)
    report.update(check_model(model_seeds, eps))
    return report
