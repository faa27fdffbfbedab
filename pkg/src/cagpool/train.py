"""Training loop with per-epoch evaluation and best-checkpoint retention.

Deterministic given the seed: parameter init, shuffle order, and every
optimizer step are functions of (config, dataset, seed) only.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from . import model as model_mod
from .autodiff import Tape, Tensor
from .errors import NumericalError, ValidationError
from .graphs import GraphPair
from .metrics import (MetricReport, classification_report, regression_report)
from .model import ModelConfig, forward, init_model_params, loss
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    epochs: int = 20
    batch_size: int = 32
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.lr < 0 or self.epochs < 1 or self.batch_size < 1:
            raise ValidationError(f"bad train config: {self}")


@dataclass
class TrainResult:
    params: dict                     # best-on-validation parameters
    final_params: dict               # parameters after the last epoch
    history: list = field(default_factory=list)  # per-epoch log dicts
    best_epoch: int = -1


def _pair_grads(pair: GraphPair, params: dict[str, Tensor],
                cfg: ModelConfig) -> tuple[float, dict[str, np.ndarray]]:
    with Tape() as tape:
        out, _ = forward(pair, params, cfg)
        l = loss(out, pair.target_array(), cfg, pair.mask)
    grad_map = tape.gradients(l, list(params.values()))
    return l.item(), {name: grad_map[t] for name, t in params.items()}


def evaluate(dataset, params: dict[str, Tensor],
             cfg: ModelConfig) -> MetricReport:
    """Forward every pair and score with the task's metric set.

    Classification flattens valid (unmasked) entries across classes.
    """
    preds, targets = [], []
    for pair in dataset:
        out, _ = forward(pair, params, cfg)
        t = pair.target_array()
        if cfg.task == "classification" and pair.mask is not None:
            keep = np.asarray(pair.mask, dtype=bool)
            preds.extend(out.data.ravel()[keep])
            targets.extend(t[keep])
        else:
            preds.extend(out.data.ravel())
            targets.extend(t)
    if cfg.task == "classification":
        return classification_report(preds, targets)
    return regression_report(preds, targets)


def _selection_value(report: MetricReport, cfg: ModelConfig) -> float:
    """Higher is better: AUROC for classification, -MSE for regression."""
    if cfg.task == "classification":
        return report.auroc
    return -report.mse


def train(model_cfg: ModelConfig, train_pairs, val_pairs,
          train_cfg: TrainConfig, log_path=None) -> TrainResult:
    if not train_pairs:
        raise ValidationError("empty training set")
    rng = np.random.default_rng(train_cfg.seed)
    params = init_model_params(model_cfg, int(rng.integers(2 ** 31)))
    state = AdamState(lr=train_cfg.lr, beta1=train_cfg.beta1,
                      beta2=train_cfg.beta2, eps=train_cfg.eps)
    result = TrainResult(params=params, final_params=params)
    best = -np.inf
    log_fh = open(log_path, "w") if log_path else None
    try:
        for epoch in range(train_cfg.epochs):
            order = rng.permutation(len(train_pairs))
            epoch_loss = 0.0
            for start in range(0, len(order), train_cfg.batch_size):
                batch = [train_pairs[i] for i in order[start:start + train_cfg.batch_size]]
                acc: dict[str, np.ndarray] = {}
                batch_loss = 0.0
                for pair in batch:
                    l, grads = _pair_grads(pair, params, model_cfg)
                    batch_loss += l
                    for name, g in grads.items():
                        acc[name] = acc.get(name, 0.0) + g
                if not np.isfinite(batch_loss):
                    raise NumericalError(
                        f"NaN loss at epoch {epoch}, batch offset {start}; "
                        f"param norms: " + json.dumps({
                            n: float(np.linalg.norm(p.data))
                            for n, p in params.items()}))
                scale = 1.0 / len(batch)
                grads = {name: g * scale for name, g in acc.items()}
                params = adam_step(params, grads, state)
                epoch_loss += batch_loss
            epoch_loss /= len(train_pairs)

            entry = {"epoch": epoch, "split": "train", "loss": epoch_loss}
            if val_pairs:
                report = evaluate(val_pairs, params, model_cfg)
                entry.update({"split": "val", **report.to_json()})
                value = _selection_value(report, model_cfg)
                if value > best:
                    best = value
                    result.params = copy.copy(params)
                    result.best_epoch = epoch
            else:
                result.params = params
                result.best_epoch = epoch
            result.history.append(entry)
            if log_fh:
                log_fh.write(json.dumps(entry) + "\n")
    finally:
        if log_fh:
            log_fh.close()
    result.final_params = params
    return result


def multi_seed(model_cfg: ModelConfig, train_pairs, val_pairs, test_pairs,
               train_cfg: TrainConfig, seeds) -> dict:
    """Train once per seed; report mean and std of every test metric."""
    reports = []
    for seed in seeds:
        cfg = TrainConfig(lr=train_cfg.lr, epochs=train_cfg.epochs,
                          batch_size=train_cfg.batch_size, seed=seed,
                          beta1=train_cfg.beta1, beta2=train_cfg.beta2,
                          eps=train_cfg.eps)
        result = train(model_cfg, train_pairs, val_pairs, cfg)
        reports.append(evaluate(test_pairs, result.params, model_cfg).to_json())
    keys = sorted({k for r in reports for k in r})
    summary = {}
    for k in keys:
        vals = np.array([r[k] for r in reports if k in r])
        summary[k] = {"mean": float(vals.mean()), "std": float(vals.std())}
    return {"seeds": list(seeds), "per_seed": reports, "summary": summary}
