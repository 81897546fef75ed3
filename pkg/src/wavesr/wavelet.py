"""Single-level 2-D wavelet analysis/synthesis, decimated and stationary.

Both transforms are separable circular (periodic) filter banks over
orthonormal bases, differentiable end to end. The decimated inverse is the
exact adjoint of the analysis operator (orthonormal banks make the adjoint
the inverse); the stationary inverse averages the redundant reconstruction
via the power-complementarity identity |H0|^2 + |H1|^2 = 2, which equals
the mean of the shifted decimated reconstructions on even sizes and extends
it to odd ones.

Subband naming is normative for this project: the first letter is the
filter applied along x (columns), the second along y (rows), so a vertical
edge (a step as you move horizontally) lands in HL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import Tensor, apply_op, concat, pixel_shuffle, slice_

SQRT1_2 = 1.0 / math.sqrt(2.0)

# Canonical ascending-order scaling coefficients (analysis by correlation).
_HAAR_LO = (SQRT1_2, SQRT1_2)
_DB4_LO = (
    0.23037781330885523, 0.7148465705525415, 0.6308807679295904,
    -0.02798376941698385, -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945, -0.010597401784997278,
)
_SYM4_LO = (
    0.0322231006040427, -0.012603967262037833, -0.09921954357684722,
    0.29785779560527736, 0.8037387518059161, 0.49761866763201545,
    -0.02963552764599851, -0.07576571478927333,
)


class Transform(Enum):
    DWT = "dwt"
    SWT = "swt"


class Basis(Enum):
    HAAR = "haar"
    DB4 = "db4"
    SYM4 = "sym4"


class Layout(Enum):
    FULL_RESOLUTION = "full_resolution"  # SWT
    DECIMATED = "decimated"              # DWT


@dataclass(frozen=True)
class WaveletSpec:
    """Transform type plus basis; only single-level decomposition exists."""

    transform: Transform
    basis: Basis
    levels: int = 1

    def __post_init__(self):
        if self.levels != 1:
            raise ConfigError(f"only single-level decomposition is supported, got levels={self.levels}")

    @property
    def layout(self) -> Layout:
        return Layout.DECIMATED if self.transform is Transform.DWT else Layout.FULL_RESOLUTION


@dataclass(frozen=True)
class FilterBank:
    """Analysis/synthesis low/high-pass taps of an orthonormal basis."""

    dec_lo: Tuple[float, ...]
    dec_hi: Tuple[float, ...]
    rec_lo: Tuple[float, ...]
    rec_hi: Tuple[float, ...]

    def __len__(self) -> int:
        return len(self.dec_lo)


def make_filter_bank(basis: Basis) -> FilterBank:
    """Standard orthonormal coefficients for haar / db4 / sym4."""
    if basis is Basis.HAAR:
        lo = _HAAR_LO
    elif basis is Basis.DB4:
        lo = _DB4_LO
    elif basis is Basis.SYM4:
        lo = _SYM4_LO
    else:
        raise ConfigError(f"unsupported wavelet basis: {basis!r}")
    n = len(lo)
    hi = tuple((-1.0) ** k * lo[n - 1 - k] for k in range(n))
    return FilterBank(dec_lo=lo, dec_hi=hi, rec_lo=lo[::-1], rec_hi=hi[::-1])


@dataclass
class SubbandSet:
    """The four coefficient planes of a single-level 2-D decomposition."""

    ll: Tensor
    lh: Tensor
    hl: Tensor
    hh: Tensor
    layout: Layout
    spec: WaveletSpec

    def planes(self):
        return (self.ll, self.lh, self.hl, self.hh)

    def validate(self):
        shapes = {p.shape for p in self.planes()}
        if len(shapes) != 1:
            raise ShapeError(f"subband shapes differ: {[p.shape for p in self.planes()]}")
        if self.ll.ndim != 3:
            raise ShapeError(f"subbands must be C,H,W, got {self.ll.shape}")


# ---------------------------------------------------------------------------
# periodic 1-D correlation primitive (custom autodiff op)
# ---------------------------------------------------------------------------


def _pcorr_data(x: np.ndarray, taps: np.ndarray, axis: int, stride: int, offset: int) -> np.ndarray:
    """y[i] = sum_k taps[k] * x[(i*stride + k - offset) mod N] along axis."""
    n = x.shape[axis]
    out = None
    for k, t in enumerate(taps):
        idx = (np.arange(0, n, stride) + k - offset) % n
        term = np.take(x, idx, axis=axis) * t
        out = term if out is None else out + term
    return out


def _upsample_zeros(x: np.ndarray, axis: int, factor: int) -> np.ndarray:
    shape = list(x.shape)
    shape[axis] *= factor
    out = np.zeros(shape, dtype=x.dtype)
    sl = [slice(None)] * x.ndim
    sl[axis] = slice(0, None, factor)
    out[tuple(sl)] = x
    return out


def periodic_corr1d(x: Tensor, taps, axis: int, stride: int = 1, offset: int = 0) -> Tensor:
    """Differentiable circular correlation along one axis with optional decimation."""
    taps_arr = np.asarray(taps, dtype=x.dtype)
    n = x.shape[axis]
    if stride > 1 and n % stride:
        raise ShapeError(f"axis length {n} not divisible by stride {stride}")
    if n < len(taps_arr):
        raise ShapeError(f"axis length {n} smaller than filter length {len(taps_arr)}")
    out = _pcorr_data(x.data, taps_arr, axis, stride, offset)
    flipped = taps_arr[::-1]
    comp_offset = len(taps_arr) - 1 - offset

    def bwd(g):
        gu = _upsample_zeros(g, axis, stride) if stride > 1 else g
        return (_pcorr_data(gu, flipped, axis, 1, comp_offset),)

    return apply_op("periodic_corr1d", (x,), out, bwd)


# ---------------------------------------------------------------------------
# decimated transform
# ---------------------------------------------------------------------------

_AX_Y, _AX_X = 1, 2  # C,H,W layout


def _check_image(img: Tensor, bank: FilterBank, even: bool):
    if img.ndim != 3:
        raise ShapeError(f"expected C,H,W image, got {img.shape}")
    _, h, w = img.shape
    n = len(bank)
    if h < n or w < n:
        raise ShapeError(f"image {h}x{w} smaller than filter length {n}")
    if even and (h % 2 or w % 2):
        raise ShapeError(f"decimated transform requires even dims, got {h}x{w}")


def dwt_forward(img: Tensor, bank: FilterBank) -> SubbandSet:
    """Separable periodic analysis with 2x decimation per axis."""
    _check_image(img, bank, even=True)
    lo, hi = bank.dec_lo, bank.dec_hi
    xl = periodic_corr1d(img, lo, _AX_X, stride=2)
    xh = periodic_corr1d(img, hi, _AX_X, stride=2)
    return SubbandSet(
        ll=periodic_corr1d(xl, lo, _AX_Y, stride=2),
        lh=periodic_corr1d(xl, hi, _AX_Y, stride=2),
        hl=periodic_corr1d(xh, lo, _AX_Y, stride=2),
        hh=periodic_corr1d(xh, hi, _AX_Y, stride=2),
        layout=Layout.DECIMATED,
        spec=WaveletSpec(Transform.DWT, _basis_of(bank)),
    )


def _zero_stuff2d(sub: Tensor) -> Tensor:
    """Place subband samples on the even/even phase of a 2x grid.

    Implemented as a pixel shuffle of per-color [plane, 0, 0, 0] channel
    groups, recovering spatial layout from channel depth before filtering.
    """
    c, h, w = sub.shape
    zero = Tensor(np.zeros((1, h, w), dtype=sub.dtype))
    parts = []
    for i in range(c):
        parts.append(slice_(sub, slice(i, i + 1)))
        parts.extend((zero, zero, zero))
    return pixel_shuffle(concat(parts, axis=0), 2)


def dwt_inverse(sub: SubbandSet, bank: FilterBank) -> Tensor:
    """Perfect-reconstruction partner of dwt_forward (orthonormal adjoint)."""
    sub.validate()
    n = len(bank)
    rl, rh = bank.rec_lo, bank.rec_hi
    out = None
    for plane, (fx, fy) in zip(
        sub.planes(),
        ((rl, rl), (rl, rh), (rh, rl), (rh, rh)),  # ll, lh, hl, hh
    ):
        up = _zero_stuff2d(plane)
        t = periodic_corr1d(up, fx, _AX_X, stride=1, offset=n - 1)
        t = periodic_corr1d(t, fy, _AX_Y, stride=1, offset=n - 1)
        out = t if out is None else out + t
    return out


# ---------------------------------------------------------------------------
# stationary transform
# ---------------------------------------------------------------------------


def swt_forward(img: Tensor, bank: FilterBank) -> SubbandSet:
    """Non-decimated (a-trous) periodic analysis; subbands keep full size."""
    _check_image(img, bank, even=False)
    lo, hi = bank.dec_lo, bank.dec_hi
    xl = periodic_corr1d(img, lo, _AX_X)
    xh = periodic_corr1d(img, hi, _AX_X)
    return SubbandSet(
        ll=periodic_corr1d(xl, lo, _AX_Y),
        lh=periodic_corr1d(xl, hi, _AX_Y),
        hl=periodic_corr1d(xh, lo, _AX_Y),
        hh=periodic_corr1d(xh, hi, _AX_Y),
        layout=Layout.FULL_RESOLUTION,
        spec=WaveletSpec(Transform.SWT, _basis_of(bank)),
    )


def _iswt1d(lo_band: Tensor, hi_band: Tensor, bank: FilterBank, axis: int) -> Tensor:
    n = len(bank)
    a = periodic_corr1d(lo_band, bank.rec_lo, axis, stride=1, offset=n - 1)
    b = periodic_corr1d(hi_band, bank.rec_hi, axis, stride=1, offset=n - 1)
    return (a + b) * 0.5


def swt_inverse(sub: SubbandSet, bank: FilterBank) -> Tensor:
    """Averaged inverse of the redundant representation (exact on SWT output)."""
    sub.validate()
    low = _iswt1d(sub.ll, sub.lh, bank, _AX_Y)
    high = _iswt1d(sub.hl, sub.hh, bank, _AX_Y)
    return _iswt1d(low, high, bank, _AX_X)


def _basis_of(bank: FilterBank) -> Basis:
    for basis in Basis:
        if make_filter_bank(basis).dec_lo == bank.dec_lo:
            return basis
    raise ConfigError("unknown filter bank")


# ---------------------------------------------------------------------------
# channel packing (space-to-depth coefficient layout)
# ---------------------------------------------------------------------------


def pack_subband_channels(sub: SubbandSet) -> Tensor:
    """Stack subbands as channels: per color c, order [LL_c, LH_c, HL_c, HH_c]."""
    sub.validate()
    c = sub.ll.shape[0]
    per_color = []
    for i in range(c):
        for plane in sub.planes():
            per_color.append(slice_(plane, slice(i, i + 1)))
    return concat(per_color, axis=0)


def unpack_subband_channels(packed: Tensor, spec: WaveletSpec) -> SubbandSet:
    """Exact inverse of pack_subband_channels."""
    if packed.ndim != 3 or packed.shape[0] % 4:
        raise ShapeError(f"packed subbands need 4k channels, got {packed.shape}")
    ll = packed[0::4]
    lh = packed[1::4]
    hl = packed[2::4]
    hh = packed[3::4]
    return SubbandSet(ll=ll, lh=lh, hl=hl, hh=hh, layout=spec.layout, spec=spec)


def pack_dwt_channels(sub: SubbandSet) -> Tensor:
    """Convolution-friendly channel layout of a decimated subband set."""
    if sub.layout is not Layout.DECIMATED:
        raise ShapeError("pack_dwt_channels expects a decimated subband set")
    return pack_subband_channels(sub)


def unpack_dwt_channels(packed: Tensor, spec: WaveletSpec) -> SubbandSet:
    if spec.transform is not Transform.DWT:
        raise ShapeError("unpack_dwt_channels expects a DWT spec")
    return unpack_subband_channels(packed, spec)


# ---------------------------------------------------------------------------
# spec-level entry points
# ---------------------------------------------------------------------------


def forward_transform(img: Tensor, spec: WaveletSpec) -> SubbandSet:
    bank = make_filter_bank(spec.basis)
    if spec.transform is Transform.DWT:
        return dwt_forward(img, bank)
    return swt_forward(img, bank)


def inverse_transform(sub: SubbandSet, spec: WaveletSpec) -> Tensor:
    bank = make_filter_bank(spec.basis)
    if spec.transform is Transform.DWT:
        return dwt_inverse(sub, bank)
    return swt_inverse(sub, bank)
