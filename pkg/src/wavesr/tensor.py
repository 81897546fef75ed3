"""Dense float tensors with reverse-mode automatic differentiation.

The graph is built define-by-run: every operation returns a new Tensor
holding a node record (operation tag plus parent references), and
``backward`` walks the graph once in reverse topological order. Image
tensors use channels x height x width layout. Buffers are float32 by
default; float64 inputs are preserved so finite-difference test oracles
can run at full precision.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import ContractError, ParameterError, ShapeError

_FLOAT_DTYPES = (np.float32, np.float64)

_grad_enabled = True


@contextmanager
def no_grad():
    """Disable graph construction inside the block (inference/metrics)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


class _Node:
    __slots__ = ("op", "parents", "backward")

    def __init__(self, op, parents, backward):
        self.op = op
        self.parents = parents
        self.backward = backward


class Tensor:
    """N-dimensional float array with optional gradient tracking.

    ``data`` is a row-major numpy buffer, ``grad`` (when present) has the
    same shape, and ``node`` links the tensor into the autodiff graph.
    """

    __slots__ = ("data", "grad", "node", "requires_grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data)
        if arr.dtype not in _FLOAT_DTYPES:
            arr = arr.astype(np.float32)
        self.data = arr
        self.grad: Optional[np.ndarray] = None
        self.node: Optional[_Node] = None
        self.requires_grad = bool(requires_grad)

    # -- basic introspection -------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- autodiff ------------------------------------------------------------

    def backward(self):
        """Accumulate d(self)/d(ancestor) into every tracked ancestor's grad.

        Requires a scalar, graph-connected tensor. Repeated calls without
        clearing grads accumulate, and a diamond-shaped graph contributes
        the sum of all paths.
        """
        if self.size != 1:
            raise ContractError(
                f"backward requires a scalar, got shape {self.shape}"
            )
        if self.node is None and not self.requires_grad:
            raise ContractError("backward on a tensor with no tracked ancestors")

        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            t, expanded = stack.pop()
            if expanded:
                order.append(t)
                continue
            if id(t) in seen:
                continue
            seen.add(id(t))
            stack.append((t, True))
            if t.node is not None:
                for p in t.node.parents:
                    if p.requires_grad and id(p) not in seen:
                        stack.append((p, False))

        self._accum_grad(np.ones_like(self.data))
        for t in reversed(order):
            if t.node is None or t.grad is None:
                continue
            grads = t.node.backward(t.grad)
            for parent, g in zip(t.node.parents, grads):
                if g is None or not parent.requires_grad:
                    continue
                parent._accum_grad(g)

    def _accum_grad(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    # -- operator sugar --------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return slice_(self, key)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean_(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def abs(self):
        return absval(self)


TensorLike = Union[Tensor, float, int, np.ndarray]


def as_tensor(x: TensorLike) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x))


def apply_op(
    op: str,
    parents: Sequence[Tensor],
    out_data: np.ndarray,
    backward: Callable[[np.ndarray], Iterable[Optional[np.ndarray]]],
) -> Tensor:
    """Wrap the result of a forward computation into the autodiff graph.

    ``backward`` maps the output gradient to per-parent gradients (None for
    parents that need no gradient). This is the extension point other
    modules use to register custom differentiable primitives.
    """
    track = _grad_enabled and any(p.requires_grad for p in parents)
    out = Tensor(out_data, requires_grad=track)
    if track:
        out.node = _Node(op, tuple(parents), backward)
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum g down to ``shape`` (inverse of numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


# ---------------------------------------------------------------------------
# elementwise arithmetic
# ---------------------------------------------------------------------------


def add(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data + b.data
    return apply_op(
        "add", (a, b), out,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data - b.data
    return apply_op(
        "sub", (a, b), out,
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data * b.data
    return apply_op(
        "mul", (a, b), out,
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def div(a: TensorLike, b: TensorLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = a.data / b.data
    def bwd(g):
        ga = _unbroadcast(g / b.data, a.shape)
        gb = _unbroadcast(-g * a.data / (b.data * b.data), b.shape)
        return ga, gb
    return apply_op("div", (a, b), out, bwd)


def neg(a: Tensor) -> Tensor:
    return apply_op("neg", (a,), -a.data, lambda g: (-g,))


def absval(a: Tensor) -> Tensor:
    sign = np.sign(a.data)
    return apply_op("abs", (a,), np.abs(a.data), lambda g: (g * sign,))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return apply_op("exp", (a,), out, lambda g: (g * out,))


def log(a: Tensor) -> Tensor:
    return apply_op("log", (a,), np.log(a.data), lambda g: (g / a.data,))


def sqrt(a: Tensor) -> Tensor:
    out = np.sqrt(a.data)
    return apply_op("sqrt", (a,), out, lambda g: (g * (0.5 / np.maximum(out, 1e-12)),))


def power(a: Tensor, exponent: float) -> Tensor:
    """a ** exponent for a fixed scalar exponent.

    For fractional exponents the derivative base is floored at 1e-6 so
    gradients stay finite at zero; forward values are exact.
    """
    out = np.power(a.data, exponent)
    def bwd(g):
        base = a.data
        if exponent < 1.0:
            base = np.maximum(base, 1e-6)
        return (g * exponent * np.power(base, exponent - 1.0),)
    return apply_op("pow", (a,), out, bwd)


def sin(a: Tensor) -> Tensor:
    return apply_op("sin", (a,), np.sin(a.data), lambda g: (g * np.cos(a.data),))


def cos(a: Tensor) -> Tensor:
    return apply_op("cos", (a,), np.cos(a.data), lambda g: (g * -np.sin(a.data),))


def sigmoid(a: Tensor) -> Tensor:
    out = 1.0 / (1.0 + np.exp(-np.clip(a.data, -60.0, 60.0)))
    return apply_op("sigmoid", (a,), out, lambda g: (g * out * (1.0 - out),))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return apply_op("relu", (a,), np.where(mask, a.data, 0.0), lambda g: (g * mask,))


def leaky_relu(a: Tensor, slope: float = 0.01) -> Tensor:
    mask = a.data > 0
    out = np.where(mask, a.data, slope * a.data)
    return apply_op("leaky_relu", (a,), out, lambda g: (g * np.where(mask, 1.0, slope),))


def clamp(a: Tensor, lo: Optional[float] = None, hi: Optional[float] = None) -> Tensor:
    out = np.clip(a.data, lo, hi)
    inside = np.ones(a.shape, dtype=bool)
    if lo is not None:
        inside &= a.data > lo
    if hi is not None:
        inside &= a.data < hi
    return apply_op("clamp", (a,), out, lambda g: (g * inside,))


# ---------------------------------------------------------------------------
# reductions, shape ops
# ---------------------------------------------------------------------------


def sum_(a: Tensor, axis=None, keepdims=False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)
    def bwd(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape).astype(a.dtype, copy=True),)
        g2 = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g2, a.shape).astype(a.dtype, copy=True),)
    return apply_op("sum", (a,), np.asarray(out), bwd)


def mean_(a: Tensor, axis=None, keepdims=False) -> Tensor:
    count = a.size if axis is None else np.prod(
        [a.shape[ax] for ax in (axis if isinstance(axis, tuple) else (axis,))]
    )
    return mul(sum_(a, axis=axis, keepdims=keepdims), 1.0 / float(count))


def reshape(a: Tensor, shape) -> Tensor:
    out = a.data.reshape(shape)
    return apply_op("reshape", (a,), out, lambda g: (g.reshape(a.shape),))


def slice_(a: Tensor, key) -> Tensor:
    """Basic indexing (ints, slices with positive step). Gradient scatters back."""
    out = a.data[key]
    def bwd(g):
        gx = np.zeros_like(a.data)
        gx[key] = g
        return (gx,)
    return apply_op("slice", (a,), out, bwd)


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    out = np.concatenate([p.data for p in parts], axis=axis)
    sizes = [p.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]
    def bwd(g):
        return tuple(np.ascontiguousarray(chunk) for chunk in np.split(g, splits, axis=axis))
    return apply_op("concat", tuple(parts), out, bwd)


def roll(a: Tensor, shift: int, axis: int) -> Tensor:
    out = np.roll(a.data, shift, axis=axis)
    return apply_op("roll", (a,), out, lambda g: (np.roll(g, -shift, axis=axis),))


def stack(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    out = np.stack([p.data for p in parts], axis=axis)
    def bwd(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(parts)))
    return apply_op("stack", tuple(parts), out, bwd)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} @ {b.shape}")
    out = a.data @ b.data
    return apply_op(
        "matmul", (a, b), out,
        lambda g: (g @ b.data.T, a.data.T @ g),
    )


# ---------------------------------------------------------------------------
# pixel shuffle / unshuffle
# ---------------------------------------------------------------------------


def _unshuffle_data(x: np.ndarray, r: int) -> np.ndarray:
    c, hh, ww = x.shape
    h, w = hh // r, ww // r
    # (c, h, dy, w, dx) -> (c, dy, dx, h, w): channel index c*r*r + dy*r + dx
    t = x.reshape(c, h, r, w, r).transpose(0, 2, 4, 1, 3)
    return np.ascontiguousarray(t.reshape(c * r * r, h, w))


def _shuffle_data(x: np.ndarray, r: int) -> np.ndarray:
    crr, h, w = x.shape
    c = crr // (r * r)
    t = x.reshape(c, r, r, h, w).transpose(0, 3, 1, 4, 2)
    return np.ascontiguousarray(t.reshape(c, h * r, w * r))


def pixel_unshuffle(a: Tensor, r: int) -> Tensor:
    """Space-to-depth: (C, rH, rW) -> (C*r*r, H, W), row-major block order."""
    if r < 1:
        raise ParameterError(f"pixel_unshuffle factor must be >= 1, got {r}")
    if a.ndim != 3:
        raise ShapeError(f"pixel_unshuffle expects C,H,W input, got {a.shape}")
    c, hh, ww = a.shape
    if hh % r or ww % r:
        raise ShapeError(f"spatial dims {hh}x{ww} not divisible by factor {r}")
    if r == 1:
        return apply_op("pixel_unshuffle", (a,), a.data.copy(), lambda g: (g,))
    out = _unshuffle_data(a.data, r)
    return apply_op("pixel_unshuffle", (a,), out, lambda g: (_shuffle_data(g, r),))


def pixel_shuffle(a: Tensor, r: int) -> Tensor:
    """Depth-to-space: (C*r*r, H, W) -> (C, rH, rW); exact inverse of unshuffle."""
    if r < 1:
        raise ParameterError(f"pixel_shuffle factor must be >= 1, got {r}")
    if a.ndim != 3:
        raise ShapeError(f"pixel_shuffle expects C,H,W input, got {a.shape}")
    c, _, _ = a.shape
    if c % (r * r):
        raise ShapeError(f"channel count {c} not divisible by {r}*{r}")
    if r == 1:
        return apply_op("pixel_shuffle", (a,), a.data.copy(), lambda g: (g,))
    out = _shuffle_data(a.data, r)
    return apply_op("pixel_shuffle", (a,), out, lambda g: (_unshuffle_data(g, r),))


# ---------------------------------------------------------------------------
# convolution
# ---------------------------------------------------------------------------


@dataclass
class Conv2dParams:
    """Weights/bias plus padding and stride for a 2-D convolution.

    Weights are out_ch x in_ch x k x k with odd k; bias is out_ch or None.
    """

    weights: Tensor
    bias: Optional[Tensor] = None
    padding: int = 0
    stride: int = 1

    def __post_init__(self):
        if self.weights.ndim != 4:
            raise ShapeError(f"conv weights must be 4-D, got {self.weights.shape}")
        k1, k2 = self.weights.shape[2], self.weights.shape[3]
        if k1 != k2 or k1 % 2 == 0:
            raise ParameterError(f"square odd kernels required, got {k1}x{k2}")
        if self.padding < 0 or self.stride < 1:
            raise ParameterError(
                f"padding must be >= 0 and stride >= 1, got p={self.padding} s={self.stride}"
            )
        if self.bias is not None and self.bias.shape != (self.weights.shape[0],):
            raise ShapeError(
                f"bias shape {self.bias.shape} does not match out_ch {self.weights.shape[0]}"
            )


def _im2col(x: np.ndarray, k: int, stride: int) -> np.ndarray:
    """(Cin, Hp, Wp) -> (Ho*Wo, Cin*k*k) patch matrix."""
    cin, hp, wp = x.shape
    win = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(1, 2))
    win = win[:, ::stride, ::stride]  # (Cin, Ho, Wo, k, k)
    ho, wo = win.shape[1], win.shape[2]
    return win.transpose(1, 2, 0, 3, 4).reshape(ho * wo, cin * k * k), ho, wo


def _corr2d(x: np.ndarray, w: np.ndarray, padding: int, stride: int) -> np.ndarray:
    """Raw cross-correlation used by both forward and backward passes."""
    cout, cin, k, _ = w.shape
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    patches, ho, wo = _im2col(x, k, stride)
    out = patches @ w.reshape(cout, cin * k * k).T
    return np.ascontiguousarray(out.reshape(ho, wo, cout).transpose(2, 0, 1))


def conv2d(x: Tensor, params: Conv2dParams) -> Tensor:
    """2-D cross-correlation plus bias over a C,H,W tensor.

    Output spatial size is (H + 2*padding - k) // stride + 1. Differentiable
    with respect to the input, the weights, and the bias.
    """
    w, b = params.weights, params.bias
    pad, stride = params.padding, params.stride
    if x.ndim != 3:
        raise ShapeError(f"conv2d expects C,H,W input, got {x.shape}")
    cout, cin, k, _ = w.shape
    if x.shape[0] != cin:
        raise ShapeError(f"input has {x.shape[0]} channels, weights expect {cin}")
    if x.shape[1] + 2 * pad < k or x.shape[2] + 2 * pad < k:
        raise ShapeError(f"input {x.shape[1]}x{x.shape[2]} smaller than kernel {k}")

    out = _corr2d(x.data, w.data, pad, stride)
    if b is not None:
        out += b.data[:, None, None]

    def bwd(g):
        cin_, h, wdt = x.shape
        # scatter the output grad back onto the stride grid
        hs, ws = h + 2 * pad - k + 1, wdt + 2 * pad - k + 1
        gs = np.zeros((cout, hs, ws), dtype=g.dtype)
        gs[:, ::stride, ::stride] = g
        # grad wrt input: full correlation with spatially flipped, transposed weights
        wt = np.ascontiguousarray(w.data[:, :, ::-1, ::-1].transpose(1, 0, 2, 3))
        gx_pad = _corr2d(gs, wt, k - 1, 1)
        gx = gx_pad[:, pad:pad + h, pad:pad + wdt] if pad else gx_pad
        # grad wrt weights: correlate input patches with output grad
        xp = np.pad(x.data, ((0, 0), (pad, pad), (pad, pad))) if pad else x.data
        patches, ho, wo = _im2col(xp, k, stride)
        gm = g.transpose(1, 2, 0).reshape(ho * wo, cout)
        gw = (gm.T @ patches).reshape(w.shape)
        gb = g.sum(axis=(1, 2)) if b is not None else None
        return np.ascontiguousarray(gx), gw, gb

    parents = (x, w) if b is None else (x, w, b)
    def bwd_wrap(g):
        gx, gw, gb = bwd(g)
        return (gx, gw) if b is None else (gx, gw, gb)
    return apply_op("conv2d", parents, out, bwd_wrap)


# ---------------------------------------------------------------------------
# bilinear sampling / resizing
# ---------------------------------------------------------------------------


def bilinear_sample(x: Tensor, coords: TensorLike) -> Tensor:
    """Sample (C,H,W) at continuous (y,x) positions given as a 2,H',W' grid.

    Out-of-range coordinates clamp to the border. Differentiable with
    respect to the image only; coordinates are treated as constants.
    """
    coords_arr = coords.data if isinstance(coords, Tensor) else np.asarray(coords)
    if coords_arr.ndim != 3 or coords_arr.shape[0] != 2:
        raise ShapeError(f"coords must be 2,H,W, got {coords_arr.shape}")
    if x.ndim != 3:
        raise ShapeError(f"bilinear_sample expects C,H,W input, got {x.shape}")
    c, h, w = x.shape
    cy = np.clip(coords_arr[0], 0.0, h - 1.0)
    cx = np.clip(coords_arr[1], 0.0, w - 1.0)
    y0 = np.floor(cy).astype(np.int64)
    x0 = np.floor(cx).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (cy - y0).astype(x.dtype)
    fx = (cx - x0).astype(x.dtype)

    w00 = (1 - fy) * (1 - fx)
    w01 = (1 - fy) * fx
    w10 = fy * (1 - fx)
    w11 = fy * fx

    d = x.data
    out = (
        d[:, y0, x0] * w00 + d[:, y0, x1] * w01
        + d[:, y1, x0] * w10 + d[:, y1, x1] * w11
    )

    def bwd(g):
        gx = np.zeros_like(x.data)
        for yy, xx, ww in ((y0, x0, w00), (y0, x1, w01), (y1, x0, w10), (y1, x1, w11)):
            np.add.at(gx, (slice(None), yy, xx), g * ww)
        return (gx,)

    parents = (x,) if not isinstance(coords, Tensor) else (x, coords)
    def bwd_wrap(g):
        gs = bwd(g)
        return gs if len(parents) == 1 else (gs[0], None)
    return apply_op("bilinear_sample", parents, out, bwd_wrap)


_RESIZE_CACHE: dict = {}


def _interp_matrix(n_in: int, n_out: int, dtype) -> np.ndarray:
    """Row-stochastic 1-D bilinear interpolation matrix (half-pixel centers)."""
    key = (n_in, n_out, np.dtype(dtype).str)
    m = _RESIZE_CACHE.get(key)
    if m is not None:
        return m
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1.0)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    f = src - i0
    m = np.zeros((n_out, n_in), dtype=dtype)
    m[np.arange(n_out), i0] += (1.0 - f).astype(dtype)
    m[np.arange(n_out), i1] += f.astype(dtype)
    _RESIZE_CACHE[key] = m
    return m


def resize_bilinear(x: Tensor, out_hw: tuple) -> Tensor:
    """Resize (C,H,W) to (C,out_h,out_w) with half-pixel bilinear weights.

    Matches bilinear_sample on the equivalent coordinate grid; implemented
    as two small matrix products so the backward pass is BLAS-only.
    """
    if x.ndim != 3:
        raise ShapeError(f"resize_bilinear expects C,H,W input, got {x.shape}")
    c, h, w = x.shape
    oh, ow = int(out_hw[0]), int(out_hw[1])
    if oh < 1 or ow < 1:
        raise ParameterError(f"target size must be positive, got {oh}x{ow}")
    if (oh, ow) == (h, w):
        return apply_op("resize_bilinear", (x,), x.data.copy(), lambda g: (g,))
    ry = _interp_matrix(h, oh, x.dtype)
    rx = _interp_matrix(w, ow, x.dtype)
    out = np.einsum("oh,chw,pw->cop", ry, x.data, rx, optimize=True)
    def bwd(g):
        return (np.einsum("oh,cop,pw->chw", ry, g, rx, optimize=True),)
    return apply_op("resize_bilinear", (x,), np.ascontiguousarray(out), bwd)


# ---------------------------------------------------------------------------
# parameter initialisation helpers
# ---------------------------------------------------------------------------


def uniform_fan_in(shape: tuple, fan_in: int, rng: np.random.Generator,
                   scale: float = 1.0, dtype=np.float32) -> Tensor:
    """Leaf parameter drawn from U(-s/sqrt(fan_in), s/sqrt(fan_in))."""
    bound = scale / math.sqrt(max(fan_in, 1))
    data = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return Tensor(data, requires_grad=True)


def zeros_param(shape: tuple, dtype=np.float32) -> Tensor:
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=True)
