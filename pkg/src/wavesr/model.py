"""The super-resolution network and its checkpoint format.

Three feature extractors (low-resolution frames, high-resolution
G-buffers, temporal history) feed a convolutional fusion branch and a
Fourier-mapped coordinate branch. Their element-wise combination passes
through a final convolution into coefficient channels, and a single-level
inverse wavelet transform inside the graph produces HDR-linear irradiance.
The prediction is residual: the head output is added to the transform of
the bilinearly upsampled input, so an untrained model starts from the
upsampled prior.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ConfigError, DataFormatError, ShapeError
from .shading import GBuffer
from .temporal import MaskPair
from .tensor import (
    Conv2dParams,
    Tensor,
    concat,
    conv2d,
    cos,
    leaky_relu,
    pixel_unshuffle,
    relu,
    resize_bilinear,
    sigmoid,
    sin,
    uniform_fan_in,
)
from .wavelet import (
    Basis,
    SubbandSet,
    Transform,
    WaveletSpec,
    forward_transform,
    inverse_transform,
    pack_subband_channels,
    unpack_subband_channels,
)

_LEAKY_SLOPE = 0.01
# Coefficient heads start near zero so the model begins at the upsampled prior.
_HEAD_INIT_SCALE = 1e-3


class Variant(Enum):
    STANDARD = "standard"
    FUSION_LL_SPLIT = "fusion_ll_split"
    MULTI_INR = "multi_inr"
    NO_WAVELET = "no_wavelet"


@dataclass(frozen=True)
class ModelConfig:
    """Network widths and structural switches; every field is config-exposed."""

    wavelet: Optional[WaveletSpec]
    variant: Variant = Variant.STANDARD
    base_channels: int = 32
    lr_blocks: int = 3
    rir_blocks: int = 3
    lwgc_layers: int = 2
    inr_hidden: int = 64
    inr_layers: int = 3
    inr_frequencies: int = 16
    scale_min: float = 2.0
    scale_max: float = 4.0

    def validate(self):
        if self.base_channels <= 0:
            raise ConfigError(f"base_channels must be positive, got {self.base_channels}")
        if self.scale_min < 1.0 or self.scale_max < self.scale_min:
            raise ConfigError(f"bad scale range [{self.scale_min}, {self.scale_max}]")
        if self.variant is Variant.NO_WAVELET:
            if self.wavelet is not None:
                raise ConfigError("no_wavelet variant requires wavelet=none")
        elif self.wavelet is None:
            raise ConfigError(f"variant {self.variant.value} requires a wavelet spec")
        for name in ("lr_blocks", "rir_blocks", "lwgc_layers", "inr_hidden",
                     "inr_layers", "inr_frequencies"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")


@dataclass
class FourierEmbedding:
    """Amplitude-scaled cos/sin coordinate features."""

    amplitude: Tensor   # K,H,W
    frequency: Tensor   # 2K,H,W (per frequency: y component, x component)
    phase: Tensor       # K,H,W
    embedding: Tensor   # 2K,H,W


@dataclass
class ModelInputs:
    l_lr: Tensor               # 3,h,w demodulated LR irradiance
    g_hr: GBuffer              # HR G-buffers
    l_prev_warped: Tensor      # 3,H,W warped previous irradiance
    masks: MaskPair


@dataclass
class ModelOutputs:
    subbands: Optional[SubbandSet]
    rgb: Optional[Tensor]
    mask_pred: Tensor


def fourier_embed(coords, a_feat: Tensor, f_feat: Tensor, phi_feat: Tensor) -> FourierEmbedding:
    """Per pixel: A_k * [cos(pi*<F_k, x> + phi_k); sin(same)] stacked to 2K channels.

    coords holds normalized (y, x) pixel centers in [0,1]^2 as a 2,H,W array.
    """
    coords = coords if isinstance(coords, Tensor) else Tensor(np.asarray(coords))
    k = a_feat.shape[0]
    if phi_feat.shape[0] != k or f_feat.shape[0] != 2 * k:
        raise ShapeError(
            f"fourier channels disagree: A={a_feat.shape[0]}, F={f_feat.shape[0]}, phi={phi_feat.shape[0]}"
        )
    if coords.shape[0] != 2 or coords.shape[1:] != a_feat.shape[1:]:
        raise ShapeError(f"coords {coords.shape} do not match features {a_feat.shape}")
    y = coords[0:1]
    x = coords[1:2]
    arg = (f_feat[0::2] * y + f_feat[1::2] * x) * float(np.pi) + phi_feat
    emb = concat([a_feat * cos(arg), a_feat * sin(arg)], axis=0)
    return FourierEmbedding(amplitude=a_feat, frequency=f_feat, phase=phi_feat, embedding=emb)


# ---------------------------------------------------------------------------
# layers
# ---------------------------------------------------------------------------


class Conv:
    """A named conv layer owning its parameters."""

    def __init__(self, name, in_ch, out_ch, k, rng, init_scale=1.0):
        pad = (k - 1) // 2
        w = uniform_fan_in((out_ch, in_ch, k, k), in_ch * k * k, rng, scale=init_scale)
        b = Tensor(np.zeros(out_ch, dtype=np.float32), requires_grad=True)
        self.name = name
        self.p = Conv2dParams(weights=w, bias=b, padding=pad, stride=1)

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.p)

    def params(self):
        return [(f"{self.name}.weight", self.p.weights), (f"{self.name}.bias", self.p.bias)]


class ConvStack:
    """3x3 conv + leaky-relu blocks."""

    def __init__(self, name, in_ch, out_ch, blocks, rng):
        self.layers = []
        c = in_ch
        for i in range(blocks):
            self.layers.append(Conv(f"{name}.conv{i}", c, out_ch, 3, rng))
            c = out_ch

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = leaky_relu(layer(x), _LEAKY_SLOPE)
        return x

    def params(self):
        return [p for layer in self.layers for p in layer.params()]


class RIRBlock:
    """Residual block: 1x1 expand (x2), inner 3x3, 1x1 reduce, skip around."""

    def __init__(self, name, channels, rng):
        self.expand = Conv(f"{name}.expand", channels, 2 * channels, 1, rng)
        self.inner = Conv(f"{name}.inner", 2 * channels, 2 * channels, 3, rng)
        self.reduce = Conv(f"{name}.reduce", 2 * channels, channels, 1, rng)

    def __call__(self, x: Tensor) -> Tensor:
        t = leaky_relu(self.expand(x), _LEAKY_SLOPE)
        t = leaky_relu(self.inner(t), _LEAKY_SLOPE)
        return x + self.reduce(t)

    def params(self):
        return self.expand.params() + self.inner.params() + self.reduce.params()


class LWGC:
    """Lightweight gated convolution: conv_f(x) * sigmoid(conv_g(x))."""

    def __init__(self, name, in_ch, out_ch, rng):
        self.conv_f = Conv(f"{name}.feature", in_ch, out_ch, 3, rng)
        self.conv_g = Conv(f"{name}.gate", in_ch, out_ch, 3, rng)

    def __call__(self, x: Tensor) -> Tensor:
        return self.conv_f(x) * sigmoid(self.conv_g(x))

    def params(self):
        return self.conv_f.params() + self.conv_g.params()


class MLP:
    """Per-pixel MLP realized as 1x1 convolutions with ReLU."""

    def __init__(self, name, in_ch, hidden, layers, out_ch, rng, head_scale=1.0):
        self.hidden = []
        c = in_ch
        for i in range(layers):
            self.hidden.append(Conv(f"{name}.fc{i}", c, hidden, 1, rng))
            c = hidden
        self.out = Conv(f"{name}.out", c, out_ch, 1, rng, init_scale=head_scale)

    def __call__(self, x: Tensor) -> Tensor:
        for layer in self.hidden:
            x = relu(layer(x))
        return self.out(x)

    def params(self):
        return [p for layer in self.hidden for p in layer.params()] + self.out.params()


# ---------------------------------------------------------------------------
# the model
# ---------------------------------------------------------------------------

_COORD_CACHE: dict = {}


def _coord_grid(h: int, w: int, dtype) -> np.ndarray:
    key = (h, w, np.dtype(dtype).str)
    g = _COORD_CACHE.get(key)
    if g is None:
        ys = (np.arange(h, dtype=dtype) + dtype.type(0.5)) / dtype.type(h)
        xs = (np.arange(w, dtype=dtype) + dtype.type(0.5)) / dtype.type(w)
        yy, xx = np.meshgrid(ys, xs, indexing="ij")
        g = np.ascontiguousarray(np.stack([yy, xx], axis=0))
        _COORD_CACHE[key] = g
    return g


class SuperResModel:
    """Arbitrary-scale wavelet-coefficient predictor."""

    GBUFFER_CHANNELS = 9  # 3 albedo + 3 normal + depth + roughness + metallic
    TEMPORAL_CHANNELS = 5  # 3 warped irradiance + 2 masks

    def __init__(self, config: ModelConfig, seed: int):
        config.validate()
        self.config = config
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0x5EED)))
        c = config.base_channels
        k = config.inr_frequencies

        self.lr_entry = Conv("lr_fe.entry", 12, c, 3, rng)
        self.lr_stack = ConvStack("lr_fe", c, c, config.lr_blocks, rng)

        self.gb_entry = Conv("gb_fe.entry", self.GBUFFER_CHANNELS, c, 3, rng)
        self.gb_blocks = [RIRBlock(f"gb_fe.rir{i}", c, rng) for i in range(config.rir_blocks)]

        self.t_layers = []
        tc = self.TEMPORAL_CHANNELS
        for i in range(config.lwgc_layers):
            self.t_layers.append(LWGC(f"t_fe.lwgc{i}", tc, c, rng))
            tc = c

        self.fusion_stack = ConvStack("fusion", 3 * c, c, 2, rng)
        self.mask_head = Conv("mask_head", c, 1, 3, rng)

        self.amp_head = Conv("inr.amplitude", c, k, 1, rng)
        self.freq_head = Conv("inr.frequency", c, 2 * k, 1, rng)
        self.phase_head = Conv("inr.phase", c, k, 1, rng)

        variant = config.variant
        inr_in = 2 * k + c
        if variant is Variant.MULTI_INR:
            self.inr_mlps = [
                MLP(f"inr.mlp_{band}", inr_in, config.inr_hidden, config.inr_layers, 3, rng,
                    head_scale=_HEAD_INIT_SCALE)
                for band in ("ll", "lh", "hl", "hh")
            ]
        elif variant is Variant.FUSION_LL_SPLIT:
            self.inr_mlp = MLP("inr.mlp", inr_in, config.inr_hidden, config.inr_layers, 9, rng,
                               head_scale=_HEAD_INIT_SCALE)
        else:
            self.inr_mlp = MLP("inr.mlp", inr_in, config.inr_hidden, config.inr_layers, c, rng)

        decimated = self._decimated()
        head_in = 4 * c if decimated else c
        if variant is Variant.NO_WAVELET:
            self.head = Conv("head", c, 3, 3, rng, init_scale=_HEAD_INIT_SCALE)
        elif variant is Variant.FUSION_LL_SPLIT:
            self.head = Conv("head.ll", head_in, 3, 3, rng, init_scale=_HEAD_INIT_SCALE)
        elif variant is Variant.MULTI_INR:
            self.head = Conv("head.fusion", head_in, 12, 3, rng, init_scale=_HEAD_INIT_SCALE)
        else:
            self.head = Conv("head", head_in, 12, 3, rng, init_scale=_HEAD_INIT_SCALE)

        self._params = self._collect_params()

    # -- parameters ----------------------------------------------------------

    def _collect_params(self):
        modules = [self.lr_entry, self.lr_stack, self.gb_entry, *self.gb_blocks,
                   *self.t_layers, self.fusion_stack, self.mask_head,
                   self.amp_head, self.freq_head, self.phase_head]
        if self.config.variant is Variant.MULTI_INR:
            modules.extend(self.inr_mlps)
        else:
            modules.append(self.inr_mlp)
        modules.append(self.head)
        out = {}
        for m in modules:
            for name, p in m.params():
                if name in out:
                    raise ConfigError(f"duplicate parameter name {name}")
                out[name] = p
        return out

    def parameters(self) -> dict:
        return self._params

    def param_count(self) -> int:
        return sum(p.size for p in self._params.values())

    def summary(self) -> str:
        lines = [f"{name} {tuple(p.shape)} {p.size}" for name, p in self._params.items()]
        lines.append(f"total {self.param_count()}")
        return "\n".join(lines)

    def zero_grads(self):
        for p in self._params.values():
            p.grad = None

    # -- geometry --------------------------------------------------------------

    def _decimated(self) -> bool:
        return (self.config.wavelet is not None
                and self.config.wavelet.transform is Transform.DWT)

    def output_dims(self, h_lr: int, w_lr: int, scale: float) -> tuple:
        """HR output size: round(scale * lr dims), rounded up to even for DWT."""
        ho, wo = int(round(scale * h_lr)), int(round(scale * w_lr))
        if self._decimated():
            ho += ho % 2
            wo += wo % 2
        return ho, wo

    # -- forward -----------------------------------------------------------------

    def lr_fe(self, l_lr: Tensor) -> Tensor:
        if l_lr.shape[1] % 2 or l_lr.shape[2] % 2:
            raise ShapeError(f"LR dims must be even for pixel unshuffle, got {l_lr.shape}")
        x = pixel_unshuffle(l_lr, 2)
        return self.lr_stack(leaky_relu(self.lr_entry(x), _LEAKY_SLOPE))

    def gb_fe(self, g_hr: GBuffer) -> Tensor:
        x = concat([g_hr.albedo, g_hr.normal, g_hr.depth, g_hr.roughness, g_hr.metallic], axis=0)
        x = leaky_relu(self.gb_entry(x), _LEAKY_SLOPE)
        for block in self.gb_blocks:
            x = block(x)
        return x

    def t_fe(self, l_prev_warped: Tensor, masks: MaskPair) -> Tensor:
        x = concat([l_prev_warped, masks.spatial, masks.temporal], axis=0)
        for layer in self.t_layers:
            x = layer(x)
        return x

    def _inr_features(self, f_lr: Tensor, f_gb: Tensor, out_hw: tuple) -> Tensor:
        coords = _coord_grid(out_hw[0], out_hw[1], f_lr.dtype)
        a = resize_bilinear(self.amp_head(f_lr), out_hw)
        fr = resize_bilinear(self.freq_head(f_gb), out_hw)
        ph = resize_bilinear(self.phase_head(f_gb), out_hw)
        emb = fourier_embed(coords, a, fr, ph).embedding
        return concat([emb, resize_bilinear(f_lr, out_hw)], axis=0)

    def forward(self, inputs: ModelInputs, scale: float) -> ModelOutputs:
        cfg = self.config
        if not (cfg.scale_min - 1e-6 <= scale <= cfg.scale_max + 1e-6):
            raise ConfigError(
                f"scale {scale} outside configured range [{cfg.scale_min}, {cfg.scale_max}]"
            )
        h_lr, w_lr = inputs.l_lr.shape[1:]
        ho, wo = self.output_dims(h_lr, w_lr, scale)
        if inputs.g_hr.spatial_shape != (ho, wo):
            raise ShapeError(
                f"G-buffer dims {inputs.g_hr.spatial_shape} do not match output {ho}x{wo}"
            )
        if inputs.l_prev_warped.shape != (3, ho, wo):
            raise ShapeError(
                f"warped history {inputs.l_prev_warped.shape} does not match output {ho}x{wo}"
            )

        f_lr = self.lr_fe(inputs.l_lr)
        f_gb = self.gb_fe(inputs.g_hr)
        f_t = self.t_fe(inputs.l_prev_warped, inputs.masks)

        fusion = self.fusion_stack(concat([resize_bilinear(f_lr, (ho, wo)), f_gb, f_t], axis=0))
        mask_pred = sigmoid(self.mask_head(fusion))

        l_up = resize_bilinear(inputs.l_lr, (ho, wo))
        decimated = self._decimated()
        out_hw = (ho // 2, wo // 2) if decimated else (ho, wo)

        if cfg.variant is Variant.NO_WAVELET:
            inr = self.inr_mlp(self._inr_features(f_lr, f_gb, (ho, wo)))
            rgb = self.head(fusion + inr) + l_up
            return ModelOutputs(subbands=None, rgb=rgb, mask_pred=mask_pred)

        spec = cfg.wavelet
        base = pack_subband_channels(forward_transform(l_up, spec))
        fusion_head_in = pixel_unshuffle(fusion, 2) if decimated else fusion

        if cfg.variant is Variant.STANDARD:
            inr = self.inr_mlp(self._inr_features(f_lr, f_gb, (ho, wo)))
            combined = fusion + inr
            if decimated:
                combined = pixel_unshuffle(combined, 2)
            packed = self.head(combined) + base
        elif cfg.variant is Variant.FUSION_LL_SPLIT:
            ll = self.head(fusion_head_in)
            details = self.inr_mlp(self._inr_features(f_lr, f_gb, out_hw))
            parts = []
            for ci in range(3):
                parts.append(ll[ci:ci + 1])
                parts.append(details[3 * 0 + ci:3 * 0 + ci + 1])
                parts.append(details[3 * 1 + ci:3 * 1 + ci + 1])
                parts.append(details[3 * 2 + ci:3 * 2 + ci + 1])
            packed = concat(parts, axis=0) + base
        else:  # MULTI_INR
            fusion_packed = self.head(fusion_head_in)
            inr_feats = self._inr_features(f_lr, f_gb, out_hw)
            band_outs = [mlp(inr_feats) for mlp in self.inr_mlps]
            parts = []
            for ci in range(3):
                for band in band_outs:
                    parts.append(band[ci:ci + 1])
            packed = fusion_packed + concat(parts, axis=0) + base

        subbands = unpack_subband_channels(packed, spec)
        return ModelOutputs(subbands=subbands, rgb=None, mask_pred=mask_pred)

    def reconstruct(self, outputs: ModelOutputs) -> Tensor:
        """In-graph synthesis back to HDR-linear irradiance."""
        if outputs.rgb is not None:
            return outputs.rgb
        return reconstruct(outputs.subbands, self.config.wavelet)


def reconstruct(sub: SubbandSet, spec: WaveletSpec) -> Tensor:
    """Inverse transform of a subband set under its declared layout."""
    if sub.layout is not spec.layout:
        raise ShapeError(f"subband layout {sub.layout} does not match spec {spec.layout}")
    return inverse_transform(sub, spec)


# ---------------------------------------------------------------------------
# checkpoint container ("WDSS": magic, version, config text block, params)
# ---------------------------------------------------------------------------

_MAGIC = b"WDSS"
_VERSION = 1


def config_to_kv(config: ModelConfig) -> dict:
    return {
        "variant": config.variant.value,
        "transform": config.wavelet.transform.value if config.wavelet else "none",
        "basis": config.wavelet.basis.value if config.wavelet else "none",
        "base_channels": str(config.base_channels),
        "lr_blocks": str(config.lr_blocks),
        "rir_blocks": str(config.rir_blocks),
        "lwgc_layers": str(config.lwgc_layers),
        "inr_hidden": str(config.inr_hidden),
        "inr_layers": str(config.inr_layers),
        "inr_frequencies": str(config.inr_frequencies),
        "scale_min": repr(config.scale_min),
        "scale_max": repr(config.scale_max),
    }


def config_from_kv(kv: dict) -> ModelConfig:
    transform = kv["transform"]
    if transform == "none":
        wavelet = None
    else:
        wavelet = WaveletSpec(Transform(transform), Basis(kv["basis"]))
    return ModelConfig(
        wavelet=wavelet,
        variant=Variant(kv["variant"]),
        base_channels=int(kv["base_channels"]),
        lr_blocks=int(kv["lr_blocks"]),
        rir_blocks=int(kv["rir_blocks"]),
        lwgc_layers=int(kv["lwgc_layers"]),
        inr_hidden=int(kv["inr_hidden"]),
        inr_layers=int(kv["inr_layers"]),
        inr_frequencies=int(kv["inr_frequencies"]),
        scale_min=float(kv["scale_min"]),
        scale_max=float(kv["scale_max"]),
    )


def write_container(path, kv: dict, arrays: dict):
    """Binary container: magic, u32 version, key-value text block, f32 arrays."""
    block = "".join(f"{k} = {v}\n" for k, v in kv.items()).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<I", len(block)))
        fh.write(block)
        fh.write(struct.pack("<I", len(arrays)))
        for name, arr in arrays.items():
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def read_container(path) -> tuple:
    """Returns (kv dict, {name: float32 array}). Raises DataFormatError."""
    with open(path, "rb") as fh:
        raw = fh.read()
    off = 0

    def take(n, what):
        nonlocal off
        if off + n > len(raw):
            raise DataFormatError(f"truncated container while reading {what}", offset=off)
        chunk = raw[off:off + n]
        off += n
        return chunk

    if take(4, "magic") != _MAGIC:
        raise DataFormatError(f"bad magic, expected {_MAGIC!r}", offset=0)
    (version,) = struct.unpack("<I", take(4, "version"))
    if version != _VERSION:
        raise DataFormatError(f"unsupported container version {version}", offset=4)
    (block_len,) = struct.unpack("<I", take(4, "config length"))
    kv = {}
    for line in take(block_len, "config block").decode("utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition(" = ")
        kv[key.strip()] = value.strip()
    (count,) = struct.unpack("<I", take(4, "array count"))
    arrays = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<I", take(4, "name length"))
        name = take(name_len, "name").decode("utf-8")
        (ndim,) = struct.unpack("<I", take(4, "ndim"))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim, "shape"))
        n = int(np.prod(shape)) if ndim else 1
        data = np.frombuffer(take(4 * n, f"payload of {name}"), dtype="<f4")
        arrays[name] = data.reshape(shape).astype(np.float32)
    return kv, arrays


def save_checkpoint(path, model: SuperResModel):
    write_container(path, config_to_kv(model.config),
                    {name: p.data for name, p in model.parameters().items()})


def load_checkpoint(path, seed: int = 0) -> SuperResModel:
    kv, arrays = read_container(path)
    config = config_from_kv(kv)
    model = SuperResModel(config, seed=seed)
    params = model.parameters()
    if set(params) != set(arrays):
        missing = set(params) ^ set(arrays)
        raise DataFormatError(f"checkpoint parameters do not match model: {sorted(missing)[:4]}")
    for name, p in params.items():
        if tuple(p.shape) != tuple(arrays[name].shape):
            raise ShapeError(f"checkpoint param {name} has shape {arrays[name].shape}, want {p.shape}")
        p.data = arrays[name].astype(np.float32)
    return model
