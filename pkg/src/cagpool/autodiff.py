"""Dense 2-D tensors with reverse-mode gradient recording.

All arrays are float64 and strictly two-dimensional; "vectors" are 1xD rows
or Nx1 columns.  Gradients are recorded on an explicit :class:`Tape` used as
a context manager:

    with Tape() as tape:
        loss = sum_all(mul(x, x))
    grad = tape.gradients(loss, [x])[x]

Tensors created outside any tape are plain immutable values.  A tape is
single-threaded; the active-tape stack is thread-local so independent tapes
may run on separate threads.
"""

from __future__ import annotations

import json
import threading
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericalError, ShapeError, ValidationError

_local = threading.local()


def _tape_stack() -> list:
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def _active_tape():
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """Immutable 2-D float64 array, optionally tracked by the active tape."""

    __slots__ = ("data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        elif arr.ndim == 1:
            arr = arr.reshape(1, -1)
        elif arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got ndim={arr.ndim}")
        if not np.all(np.isfinite(arr)):
            raise NumericalError("non-finite value in tensor")
        arr.flags.writeable = False
        self.data = arr

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def item(self) -> float:
        if self.shape != (1, 1):
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.shape}")
        return float(self.data[0, 0])

    def copy(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"


# A record is (output tensor, [(input tensor, backward fn), ...]) where each
# backward fn maps d(loss)/d(output) to that input's gradient contribution.
_Backward = Callable[[np.ndarray], np.ndarray]


class Tape:
    """Ordered log of recorded operations; inputs always precede use."""

    def __init__(self):
        self._records: list[tuple[Tensor, list[tuple[Tensor, _Backward]]]] = []

    def __enter__(self) -> "Tape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc):
        popped = _tape_stack().pop()
        assert popped is self
        return False

    def _record(self, out: Tensor, deps: list[tuple[Tensor, _Backward]]):
        self._records.append((out, deps))

    def gradients(self, loss: Tensor, params: Iterable[Tensor] | None = None):
        """Backward pass from a scalar loss.

        Returns a dict mapping each tensor in ``params`` to its gradient
        array; tensors not on any path to the loss get zeros.  With
        ``params=None`` the raw id-keyed map of every reached tensor is
        returned.
        """
        if loss.shape != (1, 1):
            raise ShapeError(f"loss must be 1x1, got {loss.shape}")
        grads: dict[int, np.ndarray] = {id(loss): np.ones((1, 1))}
        for out, deps in reversed(self._records):
            g_out = grads.get(id(out))
            if g_out is None:
                continue
            for inp, backward in deps:
                g_in = backward(g_out)
                acc = grads.get(id(inp))
                grads[id(inp)] = g_in if acc is None else acc + g_in
        if params is None:
            return grads
        return {
            p: grads.get(id(p), np.zeros(p.shape)) for p in params
        }


def _emit(data: np.ndarray, deps: list[tuple[Tensor, _Backward]]) -> Tensor:
    out = Tensor(data)
    tape = _active_tape()
    if tape is not None:
        tape._record(out, deps)
    return out


# ---------------------------------------------------------------------------
# core ops
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.cols != b.rows:
        raise ShapeError(f"matmul {a.shape} x {b.shape}")
    return _emit(a.data @ b.data, [
        (a, lambda g, bd=b.data: g @ bd.T),
        (b, lambda g, ad=a.data: ad.T @ g),
    ])


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; b may be a 1xD row broadcast over a's rows (bias)."""
    if a.shape == b.shape:
        return _emit(a.data + b.data, [
            (a, lambda g: g),
            (b, lambda g: g),
        ])
    if b.rows == 1 and b.cols == a.cols:
        return _emit(a.data + b.data, [
            (a, lambda g: g),
            (b, lambda g: g.sum(axis=0, keepdims=True)),
        ])
    raise ShapeError(f"add {a.shape} + {b.shape}")


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape == b.shape:
        return _emit(a.data - b.data, [
            (a, lambda g: g),
            (b, lambda g: -g),
        ])
    if b.rows == 1 and b.cols == a.cols:
        return _emit(a.data - b.data, [
            (a, lambda g: g),
            (b, lambda g: -g.sum(axis=0, keepdims=True)),
        ])
    raise ShapeError(f"sub {a.shape} - {b.shape}")


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product; b may be an Nx1 column broadcast over a's columns."""
    if a.shape == b.shape:
        return _emit(a.data * b.data, [
            (a, lambda g, bd=b.data: g * bd),
            (b, lambda g, ad=a.data: g * ad),
        ])
    if b.cols == 1 and b.rows == a.rows:
        return _emit(a.data * b.data, [
            (a, lambda g, bd=b.data: g * bd),
            (b, lambda g, ad=a.data: (g * ad).sum(axis=1, keepdims=True)),
        ])
    raise ShapeError(f"mul {a.shape} * {b.shape}")


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    return _emit(a.data * c, [(a, lambda g: g * c)])


def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    if not parts:
        raise ValidationError("concat_cols of nothing")
    rows = parts[0].rows
    if any(p.rows != rows for p in parts):
        raise ShapeError("concat_cols row mismatch")
    deps = []
    start = 0
    for p in parts:
        stop = start + p.cols
        deps.append((p, lambda g, a=start, b=stop: g[:, a:b]))
        start = stop
    return _emit(np.hstack([p.data for p in parts]), deps)


def split_cols(t: Tensor, sizes: Sequence[int]) -> tuple[Tensor, ...]:
    """Inverse of concat_cols; each slice is an exact bit-copy."""
    if sum(sizes) != t.cols:
        raise ShapeError(f"split sizes {sizes} != {t.cols} columns")
    outs = []
    start = 0
    for size in sizes:
        stop = start + size

        def backward(g, a=start, b=stop, shape=t.shape):
            full = np.zeros(shape)
            full[:, a:b] = g
            return full

        outs.append(_emit(t.data[:, start:stop].copy(), [(t, backward)]))
        start = stop
    return tuple(outs)


def mean_rows(t: Tensor) -> Tensor:
    """Row-wise mean: NxD -> 1xD (global mean pooling)."""
    n = t.rows
    if n == 0:
        raise ValidationError("mean over zero rows")
    return _emit(t.data.mean(axis=0, keepdims=True),
                 [(t, lambda g: np.repeat(g, n, axis=0) / n)])


class KinkMonitor:
    """Tracks how close relu/clip inputs come to their non-smooth points.

    Finite-difference checks are only valid away from kinks; tests use this
    to reject evaluation points whose margin is below the perturbation size.
    """

    def __init__(self):
        self.margin = np.inf

    def __enter__(self) -> "KinkMonitor":
        if not hasattr(_local, "monitors"):
            _local.monitors = []
        _local.monitors.append(self)
        return self

    def __exit__(self, *exc):
        _local.monitors.pop()
        return False


def _note_kink_margin(distances: np.ndarray):
    monitors = getattr(_local, "monitors", None)
    if monitors and distances.size:
        m = float(np.min(distances))
        for monitor in monitors:
            monitor.margin = min(monitor.margin, m)


def relu(t: Tensor) -> Tensor:
    mask = t.data > 0  # derivative at 0 is defined as 0
    _note_kink_margin(np.abs(t.data))
    return _emit(np.maximum(t.data, 0.0), [(t, lambda g: g * mask)])


def sigmoid(t: Tensor) -> Tensor:
    s = 1.0 / (1.0 + np.exp(-t.data))
    return _emit(s, [(t, lambda g: g * s * (1.0 - s))])


def tanh(t: Tensor) -> Tensor:
    y = np.tanh(t.data)
    return _emit(y, [(t, lambda g: g * (1.0 - y * y))])


def log(t: Tensor) -> Tensor:
    if np.any(t.data <= 0):
        raise NumericalError("log of non-positive value")
    return _emit(np.log(t.data), [(t, lambda g: g / t.data)])


def clip(t: Tensor, lo: float, hi: float) -> Tensor:
    """Clamp values; gradient passes only where unclipped."""
    inside = (t.data >= lo) & (t.data <= hi)
    _note_kink_margin(np.minimum(np.abs(t.data - lo), np.abs(t.data - hi)))
    return _emit(np.clip(t.data, lo, hi), [(t, lambda g: g * inside)])


def gather_rows(t: Tensor, idx: Sequence[int]) -> Tensor:
    idx = np.asarray(idx, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeError("gather_rows needs a flat index list")
    if idx.size and (idx.min() < 0 or idx.max() >= t.rows):
        raise ValidationError(f"row index out of range for {t.rows} rows")

    def backward(g):
        full = np.zeros(t.shape)
        np.add.at(full, idx, g)
        return full

    return _emit(t.data[idx], [(t, backward)])


def transpose(t: Tensor) -> Tensor:
    return _emit(t.data.T.copy(), [(t, lambda g: g.T)])


def scalar_div(t: Tensor, s: Tensor) -> Tensor:
    if s.shape != (1, 1):
        raise ShapeError(f"scalar_div divisor must be 1x1, got {s.shape}")
    sv = s.data[0, 0]
    if sv == 0:
        raise NumericalError("division by zero scalar")
    return _emit(t.data / sv, [
        (t, lambda g: g / sv),
        (s, lambda g: np.array([[-(g * t.data).sum() / (sv * sv)]])),
    ])


def l2_norm(t: Tensor) -> Tensor:
    v = float(np.sqrt((t.data ** 2).sum()))
    if v == 0.0:
        # subgradient 0 at the origin
        return _emit(np.zeros((1, 1)), [(t, lambda g: np.zeros(t.shape))])
    return _emit(np.array([[v]]), [(t, lambda g: g[0, 0] * t.data / v)])


def sum_all(t: Tensor) -> Tensor:
    return _emit(np.array([[t.data.sum()]]),
                 [(t, lambda g: g[0, 0] * np.ones(t.shape))])


# ---------------------------------------------------------------------------
# verification oracle
# ---------------------------------------------------------------------------

def finite_diff_check(f: Callable[[Tensor], Tensor], x: Tensor,
                      eps: float = 1e-5) -> float:
    """Max relative error between tape gradients and central differences.

    Error is |analytic - numeric| / max(1, |analytic|), maximised over the
    entries of x.  ``f`` must be scalar-valued.
    """
    with Tape() as tape:
        y = f(x)
    analytic = tape.gradients(y, [x])[x]

    base = x.data
    worst = 0.0
    for i in range(base.shape[0]):
        for j in range(base.shape[1]):
            plus = base.copy()
            plus[i, j] += eps
            minus = base.copy()
            minus[i, j] -= eps
            numeric = (f(Tensor(plus)).item() - f(Tensor(minus)).item()) / (2 * eps)
            a = analytic[i, j]
            err = abs(a - numeric) / max(1.0, abs(a))
            worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# parameter checkpoints
# ---------------------------------------------------------------------------

def save_params(params: dict[str, Tensor], path) -> None:
    """Write a name -> {rows, cols, data} JSON map; round-trips exactly."""
    blob = {
        name: {
            "rows": t.rows,
            "cols": t.cols,
            "data": t.data.ravel().tolist(),
        }
        for name, t in params.items()
    }
    with open(path, "w") as fh:
        json.dump(blob, fh)


def load_params(path) -> dict[str, Tensor]:
    with open(path) as fh:
        blob = json.load(fh)
    out = {}
    for name, rec in blob.items():
        arr = np.array(rec["data"], dtype=np.float64).reshape(rec["rows"], rec["cols"])
        out[name] = Tensor(arr)
    return out
