"""Frequency-weighted negative sampling for interaction triples.

Replacement partners are drawn with probability proportional to f(d)^(3/4),
the word2vec-style smoothed unigram distribution; a draw is rejected if it
reproduces the true partner or collides with a known positive triple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

SMOOTHING_EXPONENT = 0.75
DEFAULT_MAX_RETRIES = 1000


@dataclass(frozen=True)
class SamplerState:
    items: tuple            # drug identifiers, index-aligned with probs
    probs: np.ndarray       # P(d_i) proportional to f(d_i)^(3/4)
    cumulative: np.ndarray

    @staticmethod
    def from_frequencies(freq: dict) -> "SamplerState":
        if len(freq) < 2:
            raise ValidationError("need at least two distinct drugs")
        items = tuple(sorted(freq))
        f = np.array([freq[d] for d in items], dtype=np.float64)
        if np.any(f < 0):
            raise ValidationError("negative frequency")
        w = f ** SMOOTHING_EXPONENT
        total = w.sum()
        if total == 0:
            raise ValidationError("all frequencies are zero")
        probs = w / total
        return SamplerState(items, probs, np.cumsum(probs))

    def draw(self, rng: np.random.Generator):
        pos = int(np.searchsorted(self.cumulative, rng.random(), side="right"))
        return self.items[min(pos, len(self.items) - 1)]


def negative_sample(positive: tuple, state: SamplerState,
                    rng: np.random.Generator,
                    positive_set: frozenset | set | None = None,
                    max_retries: int = DEFAULT_MAX_RETRIES) -> tuple:
    """Corrupt (dx, dy, se) into (dx, dy~, se) with dy~ != dy and not a positive."""
    dx, dy, se = positive
    positive_set = positive_set or set()
    for _ in range(max_retries):
        candidate = state.draw(rng)
        if candidate == dy:
            continue
        triple = (dx, candidate, se)
        if triple in positive_set:
            continue
        return triple
    raise ValidationError(
        f"could not find a negative for {positive} in {max_retries} draws")
