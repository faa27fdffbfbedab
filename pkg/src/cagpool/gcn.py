"""Symmetric-normalized graph convolution stack with layer concatenation.

Each layer computes sigma(D^-1/2 (A+I) D^-1/2 X Theta); the encoder output is
the column-concatenation of every layer's activations, shared Siamese-style
across both graphs of a pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ShapeError, ValidationError
from .graphs import Graph, adjacency_with_self_loops

HIDDEN_DIM_GRID = (32, 64, 128, 256)


@dataclass(frozen=True)
class GcnConfig:
    in_dim: int
    hidden_dim: int = 32
    num_layers: int = 3

    def __post_init__(self):
        if self.num_layers < 1 or self.hidden_dim < 1 or self.in_dim < 1:
            raise ValidationError(f"bad GCN config: {self}")

    @property
    def out_dim(self) -> int:
        """Width of the concatenated encoder output (n * F')."""
        return self.num_layers * self.hidden_dim


def glorot(rng: np.random.Generator, rows: int, cols: int) -> Tensor:
    limit = np.sqrt(6.0 / (rows + cols))
    return Tensor(rng.uniform(-limit, limit, size=(rows, cols)))


def init_gcn_params(cfg: GcnConfig, rng: np.random.Generator,
                    prefix: str = "enc") -> dict[str, Tensor]:
    params = {f"{prefix}.theta0": glorot(rng, cfg.in_dim, cfg.hidden_dim)}
    for layer in range(1, cfg.num_layers):
        params[f"{prefix}.theta{layer}"] = glorot(
            rng, cfg.hidden_dim, cfg.hidden_dim)
    return params


def normalized_adjacency(g: Graph) -> np.ndarray:
    """D^-1/2 (A+I) D^-1/2; self-loops guarantee nonzero degrees."""
    if g.num_nodes < 1:
        raise ValidationError("empty graph")
    return normalize_adjacency_matrix(adjacency_with_self_loops(g))


def normalize_adjacency_matrix(a_tilde: np.ndarray) -> np.ndarray:
    """Symmetric normalization of an adjacency matrix that has self-loops."""
    deg = a_tilde.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(deg)
    return a_tilde * inv_sqrt[:, None] * inv_sqrt[None, :]


def gcn_layer(a_hat: Tensor, x: Tensor, theta: Tensor,
              activation=ad.relu) -> Tensor:
    if a_hat.cols != x.rows or x.cols != theta.rows:
        raise ShapeError(
            f"gcn_layer shapes {a_hat.shape} x {x.shape} x {theta.shape}")
    out = ad.matmul(ad.matmul(a_hat, x), theta)
    return activation(out) if activation is not None else out


def encode(g: Graph, params: dict[str, Tensor], cfg: GcnConfig,
            prefix: str = "enc") -> Tensor:
    """Run the full stack and concatenate per-layer outputs (N x n*F')."""
    feats = g.features(cfg.in_dim)
    if feats.shape[1] != cfg.in_dim:
        raise ShapeError(
            f"feature width {feats.shape[1]} != configured {cfg.in_dim}")
    a_hat = Tensor(normalized_adjacency(g))
    x = Tensor(feats)
    layers = []
    for layer in range(cfg.num_layers):
        x = gcn_layer(a_hat, x, params[f"{prefix}.theta{layer}"])
        layers.append(x)
    return ad.concat_cols(layers)
