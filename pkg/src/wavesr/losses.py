"""Composite training objective and evaluation metrics.

Loss terms: L1 on wavelet coefficients, L1 in image space, SSIM, a mask
supervision term (binary cross-entropy) and a mask-weighted temporal
consistency term. Stationary-transform configurations exclude a one-pixel
border from the reconstruction-dependent terms. Metrics (PSNR/SSIM) run on
gamma-corrected, clipped values; display output uses Reinhard tone mapping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ShapeError
from .tensor import (
    Conv2dParams,
    Tensor,
    clamp,
    concat,
    conv2d,
    log,
    power,
    sigmoid,
)
from .temporal import MaskPair
from .wavelet import SubbandSet, Transform, WaveletSpec

_GAMMA = 1.0 / 2.2
_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_C1 = 0.01 ** 2
_C2 = 0.03 ** 2
_PSNR_CAP_DB = 100.0
_BCE_EPS = 1e-7


@dataclass
class LossWeights:
    """Non-negative weights of the composite objective.

    lambda_perceptual exists for interface compatibility but must stay 0:
    no perceptual-feature backbone ships with this package.
    """

    wavelet: float = 1.0
    image: float = 1.0
    ssim: float = 0.1
    perceptual: float = 0.0
    mask: float = 0.05
    temporal: float = 0.1

    def validate(self):
        for name, v in self.as_dict().items():
            if v < 0:
                raise ConfigError(f"loss weight {name} must be non-negative, got {v}")
        if self.perceptual != 0.0:
            raise ConfigError("lambda_perceptual must be 0: no perceptual backbone is shipped")

    def as_dict(self) -> dict:
        return {
            "wavelet": self.wavelet, "image": self.image, "ssim": self.ssim,
            "perceptual": self.perceptual, "mask": self.mask, "temporal": self.temporal,
        }

    def all_zero(self) -> bool:
        return all(v == 0.0 for v in self.as_dict().values())


@dataclass
class MetricReport:
    """Per-frame and corpus-mean PSNR/SSIM values."""

    frames: list = field(default_factory=list)  # (frame_id, psnr_db, ssim)

    def add(self, frame_id: str, psnr_db: float, ssim_value: float):
        self.frames.append((frame_id, psnr_db, ssim_value))

    @property
    def mean_psnr(self) -> float:
        return float(np.mean([r[1] for r in self.frames])) if self.frames else 0.0

    @property
    def mean_ssim(self) -> float:
        return float(np.mean([r[2] for r in self.frames])) if self.frames else 0.0

    def write(self, path):
        with open(path, "w") as fh:
            for frame_id, p, s in self.frames:
                fh.write(f"{frame_id} {p:.6f} {s:.6f}\n")
            fh.write(f"mean {self.mean_psnr:.6f} {self.mean_ssim:.6f}\n")


# ---------------------------------------------------------------------------
# loss components
# ---------------------------------------------------------------------------


def _crop_border(t: Tensor, crop: int) -> Tensor:
    if crop == 0:
        return t
    return t[:, crop:-crop, crop:-crop]


def wavelet_l1(pred: SubbandSet, target: SubbandSet, spec: WaveletSpec) -> Tensor:
    """Mean absolute difference over all coefficient maps.

    For the stationary transform the outermost one-pixel ring of each
    subband is excluded.
    """
    if pred.layout is not target.layout:
        raise ShapeError(f"subband layouts differ: {pred.layout} vs {target.layout}")
    crop = 1 if spec.transform is Transform.SWT else 0
    total = None
    for p, t in zip(pred.planes(), target.planes()):
        if p.shape != t.shape:
            raise ShapeError(f"subband shapes differ: {p.shape} vs {t.shape}")
        diff = (_crop_border(p, crop) - _crop_border(t, crop)).abs().sum()
        total = diff if total is None else total + diff
    count = 4 * np.prod([
        pred.ll.shape[0],
        pred.ll.shape[1] - 2 * crop,
        pred.ll.shape[2] - 2 * crop,
    ])
    return total * (1.0 / float(count))


def image_l1(pred: Tensor, target: Tensor, crop: int = 0) -> Tensor:
    """Mean absolute error over the cropped interior."""
    if pred.shape != target.shape:
        raise ShapeError(f"image shapes differ: {pred.shape} vs {target.shape}")
    return (_crop_border(pred, crop) - _crop_border(target, crop)).abs().mean()


_WINDOW_CACHE: dict = {}


def _gaussian_window(dtype) -> np.ndarray:
    key = np.dtype(dtype).str
    w = _WINDOW_CACHE.get(key)
    if w is None:
        half = (_SSIM_WINDOW - 1) / 2.0
        g = np.exp(-((np.arange(_SSIM_WINDOW) - half) ** 2) / (2.0 * _SSIM_SIGMA ** 2))
        g /= g.sum()
        w = np.outer(g, g).astype(dtype)
        _WINDOW_CACHE[key] = w
    return w


def _window_filter(x: Tensor) -> Tensor:
    """Valid-mode Gaussian window filtering applied per channel."""
    c = x.shape[0]
    win = _gaussian_window(x.dtype)
    weight = np.zeros((c, c, _SSIM_WINDOW, _SSIM_WINDOW), dtype=x.dtype)
    for i in range(c):
        weight[i, i] = win
    params = Conv2dParams(weights=Tensor(weight), bias=None, padding=0, stride=1)
    return conv2d(x, params)


def ssim(pred: Tensor, target: Tensor) -> Tensor:
    """Mean local SSIM with an 11x11 Gaussian window (sigma 1.5), valid mode.

    Inputs are expected in [0,1] (see normalize_for_metrics); constants are
    C1=(0.01)^2, C2=(0.03)^2. Differentiable; returns a scalar tensor.
    """
    if pred.shape != target.shape:
        raise ShapeError(f"image shapes differ: {pred.shape} vs {target.shape}")
    if pred.ndim != 3:
        raise ShapeError(f"ssim expects C,H,W inputs, got {pred.shape}")
    if pred.shape[1] < _SSIM_WINDOW or pred.shape[2] < _SSIM_WINDOW:
        raise ShapeError(
            f"image {pred.shape[1]}x{pred.shape[2]} smaller than the {_SSIM_WINDOW}x{_SSIM_WINDOW} window"
        )
    mu1 = _window_filter(pred)
    mu2 = _window_filter(target)
    mu1_sq = mu1 * mu1
    mu2_sq = mu2 * mu2
    mu12 = mu1 * mu2
    sigma1_sq = _window_filter(pred * pred) - mu1_sq
    sigma2_sq = _window_filter(target * target) - mu2_sq
    sigma12 = _window_filter(pred * target) - mu12
    num = (2.0 * mu12 + _C1) * (2.0 * sigma12 + _C2)
    den = (mu1_sq + mu2_sq + _C1) * (sigma1_sq + sigma2_sq + _C2)
    return (num / den).mean()


def psnr(pred: Tensor, target: Tensor) -> float:
    """10*log10(1/MSE) in dB over [0,1] inputs, capped at 100 dB."""
    if pred.shape != target.shape:
        raise ShapeError(f"image shapes differ: {pred.shape} vs {target.shape}")
    diff = pred.data.astype(np.float64) - target.data.astype(np.float64)
    mse = float(np.mean(diff * diff))
    return min(10.0 * math.log10(1.0 / max(mse, 1e-10)), _PSNR_CAP_DB)


def normalize_for_metrics(hdr: Tensor) -> Tensor:
    """Clip HDR values to [0,1], then gamma-correct with exponent 1/2.2."""
    return power(clamp(hdr, 0.0, 1.0), _GAMMA)


def tonemap_display(hdr: Tensor) -> Tensor:
    """Reinhard x/(1+x) followed by gamma 1/2.2; lands in [0,1)."""
    return power(hdr / (hdr + 1.0), _GAMMA)


def _bce(pred: Tensor, target: Tensor) -> Tensor:
    p = clamp(pred, _BCE_EPS, 1.0)
    q = clamp(1.0 - pred, _BCE_EPS, 1.0)
    return -(target * log(p) + (1.0 - target) * log(q)).mean()


# ---------------------------------------------------------------------------
# composite objective
# ---------------------------------------------------------------------------


@dataclass
class PredictionBundle:
    """Network-side inputs to the composite loss."""

    subbands: Optional[SubbandSet]
    image: Tensor          # remodulated final frame
    irradiance: Tensor     # reconstructed irradiance
    mask_pred: Tensor      # 1,H,W sigmoid output


@dataclass
class TargetBundle:
    subbands: Optional[SubbandSet]
    image: Tensor
    l_prev_warped: Tensor  # warped previous irradiance (temporal reference)


def total_loss(
    outputs: PredictionBundle,
    targets: TargetBundle,
    masks_gt: MaskPair,
    weights: LossWeights,
    spec: Optional[WaveletSpec] = None,
) -> tuple:
    """Weighted sum of the loss components; returns (scalar tensor, report).

    The report maps component names to unweighted float values; the
    weighted components sum to the total. SWT configurations crop a
    one-pixel border from every reconstruction-dependent term.
    """
    weights.validate()
    crop = 1 if spec is not None and spec.transform is Transform.SWT else 0
    terms = []
    report = {}

    def add_term(name: str, weight: float, value: Optional[Tensor]):
        if value is None:
            report[name] = 0.0
            return
        report[name] = value.item()
        if weight > 0.0:
            terms.append(value * weight)

    wv = None
    if weights.wavelet > 0.0 and outputs.subbands is not None and targets.subbands is not None:
        wv = wavelet_l1(outputs.subbands, targets.subbands, spec)
    add_term("wavelet", weights.wavelet, wv)

    img = image_l1(outputs.image, targets.image, crop) if weights.image > 0.0 else None
    add_term("image", weights.image, img)

    sv = None
    if weights.ssim > 0.0:
        a = normalize_for_metrics(_crop_border(outputs.image, crop))
        b = normalize_for_metrics(_crop_border(targets.image, crop))
        sv = 1.0 - ssim(a, b)
    add_term("ssim", weights.ssim, sv)

    mv = None
    if weights.mask > 0.0:
        mv = _bce(outputs.mask_pred, masks_gt.spatial * masks_gt.temporal)
    add_term("mask", weights.mask, mv)

    tv = None
    if weights.temporal > 0.0:
        diff = (_crop_border(outputs.irradiance, crop) - _crop_border(targets.l_prev_warped, crop)).abs()
        tv = (_crop_border(masks_gt.temporal, crop) * diff).mean()
    add_term("temporal", weights.temporal, tv)

    if not terms:
        total = Tensor(np.zeros((), dtype=outputs.image.dtype))
    else:
        total = terms[0]
        for t in terms[1:]:
            total = total + t
    report["total"] = total.item()
    return total, report
