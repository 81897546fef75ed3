"""Synthetic scene generation, dataset files and training-example sampling.

The generator renders moving textured disks and quads over a textured
background with Lambertian plus tinted-specular shading. Shading is built
from the same BRDF factor the pipeline uses (I = F * L exactly), motion
vectors are analytic, and everything is a pure function of the scene seed.

Frame files use the "WSRF" container: magic, u32 version, u32 H, u32 W,
u32 plane count, then per plane a 16-byte space-padded name, u32 channel
count and little-endian float32 row-major data.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataFormatError, ShapeError
from .shading import BrdfFactor, GBuffer, compute_brdf_factor, demodulate
from .temporal import MaskPair, MotionField, compute_masks, warp, warp_gbuffer
from .tensor import Tensor, resize_bilinear
from .wavelet import SubbandSet, WaveletSpec, forward_transform

_FLOOR_EPS = 1e-6  # guards floor() against float division dust


@dataclass
class FrameRecord:
    """One rendered frame with its auxiliary buffers."""

    hdr: Tensor            # 3,H,W HDR-linear shading
    gbuffer: GBuffer
    mv: MotionField        # 2,H,W current -> previous offsets
    frame_index: int
    scene_id: str

    @property
    def spatial_shape(self) -> tuple:
        return self.hdr.shape[1:]


@dataclass
class SceneSpec:
    """Parameters of one procedural scene; rendering is pure in the seed."""

    seed: int
    num_frames: int = 24
    height: int = 128
    width: int = 128
    object_count: int = 5
    texture_freq: tuple = (0.03, 0.09)       # cycles per pixel band
    camera_velocity: Optional[tuple] = None  # (vy, vx) px/frame; None -> drawn
    object_speed: float = 1.2                # max object speed, px/frame
    light_speed: float = 0.08                # light angular velocity, rad/frame

    def validate(self):
        if self.height % 2 or self.width % 2:
            raise ConfigError(f"resolution must be even, got {self.height}x{self.width}")
        if self.num_frames < 2:
            raise ConfigError(f"need at least 2 frames, got {self.num_frames}")
        if self.height < 16 or self.width < 16:
            raise ConfigError(f"resolution too small: {self.height}x{self.width}")


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def generate_scene(spec: SceneSpec) -> list:
    """Render the full frame sequence of one scene."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width

    if spec.camera_velocity is None:
        cam_v = rng.uniform(-0.8, 0.8, size=2)
    else:
        cam_v = np.asarray(spec.camera_velocity, dtype=np.float64)

    theta0 = rng.uniform(0.0, 2.0 * math.pi)
    light_color = np.array([2.4, 2.1, 1.7]) * rng.uniform(0.85, 1.15)
    ambient = np.array([0.22, 0.25, 0.32])

    bg_freq = rng.uniform(*spec.texture_freq, size=2)
    bg_phase = rng.uniform(0.0, 2.0 * math.pi, size=2)
    bg_angle = rng.uniform(0.0, math.pi)
    bg_colors = rng.uniform(0.25, 0.85, size=(2, 3))

    objects = []
    for _ in range(spec.object_count):
        kind = "disk" if rng.random() < 0.5 else "rect"
        tilt = _unit(np.array([rng.uniform(-0.35, 0.35), rng.uniform(-0.35, 0.35), 1.0]))
        objects.append({
            "kind": kind,
            "center": rng.uniform([0.15 * h, 0.15 * w], [0.85 * h, 0.85 * w]),
            "vel": rng.uniform(-1.0, 1.0, size=2) * spec.object_speed,
            "radius": rng.uniform(h / 14.0, h / 5.0),
            "depth": rng.uniform(6.0, 24.0),
            "color": rng.uniform(0.2, 0.95, size=3),
            "freq": rng.uniform(*spec.texture_freq),
            "angle": rng.uniform(0.0, math.pi),
            "metallic": 1.0 if rng.random() < 0.25 else 0.0,
            "roughness": rng.uniform(0.15, 0.9),
            "tilt": tilt,
        })
    objects.sort(key=lambda o: -o["depth"])  # far to near

    ys, xs = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64),
                         indexing="ij")
    z_background = 40.0
    frames = []
    for t in range(spec.num_frames):
        cam = cam_v * t
        wy, wx = ys + cam[0], xs + cam[1]

        u = wx * math.cos(bg_angle) + wy * math.sin(bg_angle)
        v = -wx * math.sin(bg_angle) + wy * math.cos(bg_angle)
        tex = 0.5 + 0.45 * np.sin(2 * math.pi * bg_freq[0] * u + bg_phase[0]) \
            * np.cos(2 * math.pi * bg_freq[1] * v + bg_phase[1])
        albedo = bg_colors[0][:, None, None] * tex + bg_colors[1][:, None, None] * (1.0 - tex)
        normal = np.zeros((3, h, w))
        normal[2] = 1.0
        depth = np.full((h, w), z_background)
        rough = np.full((h, w), 0.85)
        metal = np.zeros((h, w))
        mv = np.empty((2, h, w))
        mv[0], mv[1] = cam_v[0], cam_v[1]

        for obj in objects:
            cy, cx = obj["center"] + obj["vel"] * t
            dy, dx = wy - cy, wx - cx
            r = obj["radius"]
            ca, sa = math.cos(obj["angle"]), math.sin(obj["angle"])
            lu = dx * ca + dy * sa
            lv = -dx * sa + dy * ca
            if obj["kind"] == "disk":
                rho_sq = (dy * dy + dx * dx) / (r * r)
                inside = rho_sq <= 1.0
                bump = np.sqrt(np.maximum(1.0 - rho_sq, 0.0))
                odepth = obj["depth"] - 0.3 * r * bump
                s = 0.72
                nx = s * dx / r
                ny = s * dy / r
                nz = np.sqrt(np.maximum(1.0 - nx * nx - ny * ny, 1e-6))
                onormal = np.stack([nx, ny, nz], axis=0)
            else:
                inside = (np.abs(lu) <= r) & (np.abs(lv) <= 0.7 * r)
                odepth = np.full((h, w), obj["depth"])
                onormal = np.broadcast_to(obj["tilt"][:, None, None], (3, h, w))
            otex = 0.55 + 0.35 * np.sin(2 * math.pi * obj["freq"] * lu)
            oalbedo = np.clip(obj["color"][:, None, None] * otex, 0.02, 1.0)

            write = inside & (odepth < depth)
            albedo = np.where(write, oalbedo, albedo)
            normal = np.where(write, onormal, normal)
            depth = np.where(write, odepth, depth)
            rough = np.where(write, obj["roughness"], rough)
            metal = np.where(write, obj["metallic"], metal)
            omv = cam_v[:, None, None] - obj["vel"][:, None, None]
            mv = np.where(write, omv, mv)

        theta = theta0 + spec.light_speed * t
        light = _unit(np.array([0.35 * math.cos(theta), 0.35 * math.sin(theta), 1.0]))
        ndotl = np.maximum((normal * light[:, None, None]).sum(axis=0), 0.0)
        irradiance = ambient[:, None, None] + light_color[:, None, None] * ndotl

        gbuffer = GBuffer(
            albedo=Tensor(albedo.astype(np.float32)),
            normal=Tensor(normal.astype(np.float32)),
            depth=Tensor(depth[None].astype(np.float32)),
            roughness=Tensor(rough[None].astype(np.float32)),
            metallic=Tensor(metal[None].astype(np.float32)),
        )
        factor = compute_brdf_factor(gbuffer)
        hdr = Tensor((factor.f.data * irradiance.astype(np.float32)).astype(np.float32))
        frames.append(FrameRecord(
            hdr=hdr,
            gbuffer=gbuffer,
            mv=MotionField(Tensor(mv.astype(np.float32))),
            frame_index=t,
            scene_id=f"scene_{spec.seed & 0xFFFF:05d}",
        ))
    return frames


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------


def downsample_nearest(img: Tensor, s: float) -> Tensor:
    """Center-aligned nearest pick: out(y,x) = img(floor((y+0.5)s), floor((x+0.5)s))."""
    if s < 1.0:
        raise ConfigError(f"downsample scale must be >= 1, got {s}")
    c, h, w = img.shape
    oh = int(h / s + _FLOOR_EPS)
    ow = int(w / s + _FLOOR_EPS)
    if oh < 8 or ow < 8:
        raise ConfigError(f"downsampled size {oh}x{ow} below the 8 px minimum")
    iy = np.minimum(((np.arange(oh) + 0.5) * s).astype(np.int64), h - 1)
    ix = np.minimum(((np.arange(ow) + 0.5) * s).astype(np.int64), w - 1)
    return Tensor(np.ascontiguousarray(img.data[:, iy[:, None], ix[None, :]]))


def upsample_nearest(img: Tensor, out_hw: tuple) -> Tensor:
    """Nearest-neighbor enlargement to an explicit target size (baseline)."""
    c, h, w = img.shape
    oh, ow = out_hw
    iy = np.minimum(((np.arange(oh) + 0.5) * (h / oh)).astype(np.int64), h - 1)
    ix = np.minimum(((np.arange(ow) + 0.5) * (w / ow)).astype(np.int64), w - 1)
    return Tensor(np.ascontiguousarray(img.data[:, iy[:, None], ix[None, :]]))


def downsample_gbuffer(g: GBuffer, s: float) -> GBuffer:
    return GBuffer(
        albedo=downsample_nearest(g.albedo, s),
        normal=downsample_nearest(g.normal, s),
        depth=downsample_nearest(g.depth, s),
        roughness=downsample_nearest(g.roughness, s),
        metallic=downsample_nearest(g.metallic, s),
    )


def _crop(t: Tensor, y0: int, x0: int, hh: int, ww: int) -> Tensor:
    return Tensor(np.ascontiguousarray(t.data[:, y0:y0 + hh, x0:x0 + ww]))


def _crop_gbuffer(g: GBuffer, y0: int, x0: int, hh: int, ww: int) -> GBuffer:
    return GBuffer(
        albedo=_crop(g.albedo, y0, x0, hh, ww),
        normal=_crop(g.normal, y0, x0, hh, ww),
        depth=_crop(g.depth, y0, x0, hh, ww),
        roughness=_crop(g.roughness, y0, x0, hh, ww),
        metallic=_crop(g.metallic, y0, x0, hh, ww),
    )


def frame_irradiance(rec: FrameRecord) -> tuple:
    """(irradiance L, brdf factor F) of a frame; I = F * L holds exactly."""
    f = compute_brdf_factor(rec.gbuffer)
    return demodulate(rec.hdr, f), f


# ---------------------------------------------------------------------------
# training example sampling
# ---------------------------------------------------------------------------


@dataclass
class SampleSettings:
    patch_size: int = 96
    scale_min: float = 2.0
    scale_max: float = 4.0
    wavelet: Optional[WaveletSpec] = None
    alpha_depth: float = 1.0
    alpha_normal: float = 10.0
    alpha_shading: float = 5.0


@dataclass
class TrainingExample:
    l_lr: Tensor
    g_hr: GBuffer
    l_prev_warped: Tensor
    masks: MaskPair
    scale: float
    target_subbands: Optional[SubbandSet]
    target_image: Tensor        # HR shaded patch
    target_irradiance: Tensor   # HR irradiance patch
    f_hr: BrdfFactor
    meta: tuple                 # (scene_id, frame index, y0, x0)


def _even_floor(v: float) -> int:
    return (int(v + _FLOOR_EPS) // 2) * 2


def patch_geometry(patch: int, scale: float) -> tuple:
    """LR patch size, HR patch size and the effective scale binding them."""
    p_lr = max(8, _even_floor(patch / scale))
    p_hr = int(round(scale * p_lr))
    p_hr += p_hr % 2
    p_hr = min(p_hr, patch + (patch % 2))
    return p_lr, p_hr, p_hr / p_lr


def sample_training_example(frames: Sequence[FrameRecord], rng: np.random.Generator,
                            settings: SampleSettings) -> TrainingExample:
    """Draw one (frame pair, patch, scale) example with all network inputs."""
    if len(frames) < 2:
        raise ConfigError("need at least 2 consecutive frames to sample history")
    h, w = frames[0].spatial_shape
    if settings.patch_size > min(h, w):
        raise ConfigError(
            f"patch size {settings.patch_size} exceeds frame size {h}x{w}"
        )
    t = int(rng.integers(1, len(frames)))
    rec, prev = frames[t], frames[t - 1]

    if settings.scale_min == settings.scale_max:
        s_nom = settings.scale_min
    else:
        s_nom = float(rng.uniform(settings.scale_min, settings.scale_max))
    p_lr, p_hr, s_eff = patch_geometry(settings.patch_size, s_nom)

    y0 = int(rng.integers(0, h - p_hr + 1))
    x0 = int(rng.integers(0, w - p_hr + 1))

    image_patch = _crop(rec.hdr, y0, x0, p_hr, p_hr)
    g_hr = _crop_gbuffer(rec.gbuffer, y0, x0, p_hr, p_hr)
    f_hr = compute_brdf_factor(g_hr)
    l_hr = demodulate(image_patch, f_hr)

    i_lr = downsample_nearest(image_patch, s_eff)
    g_lr = downsample_gbuffer(g_hr, s_eff)
    l_lr = demodulate(i_lr, compute_brdf_factor(g_lr))

    l_prev_full, _ = frame_irradiance(prev)
    l_prev_warped = _crop(warp(l_prev_full, rec.mv), y0, x0, p_hr, p_hr)
    g_prev_warped = _crop_gbuffer(warp_gbuffer(prev.gbuffer, rec.mv), y0, x0, p_hr, p_hr)

    l_lr_up = resize_bilinear(l_lr, (p_hr, p_hr))
    masks = compute_masks(
        g_hr, g_prev_warped, l_prev_warped, l_lr_up,
        alpha_depth=settings.alpha_depth,
        alpha_normal=settings.alpha_normal,
        alpha_shading=settings.alpha_shading,
    )

    target_subbands = None
    if settings.wavelet is not None:
        target_subbands = forward_transform(l_hr, settings.wavelet)

    return TrainingExample(
        l_lr=l_lr,
        g_hr=g_hr,
        l_prev_warped=l_prev_warped,
        masks=masks,
        scale=s_eff,
        target_subbands=target_subbands,
        target_image=image_patch,
        target_irradiance=l_hr,
        f_hr=f_hr,
        meta=(rec.scene_id, t, y0, x0),
    )


# ---------------------------------------------------------------------------
# WSRF frame files
# ---------------------------------------------------------------------------

_WSRF_MAGIC = b"WSRF"
_WSRF_VERSION = 1
_PLANES = (("hdr", 3), ("albedo", 3), ("normal", 3), ("depth", 1),
           ("rough", 1), ("metal", 1), ("mv", 2))


def write_frame(path, rec: FrameRecord):
    """Serialize one frame; the layout is fully determined by the header."""
    h, w = rec.spatial_shape
    planes = {
        "hdr": rec.hdr.data, "albedo": rec.gbuffer.albedo.data,
        "normal": rec.gbuffer.normal.data, "depth": rec.gbuffer.depth.data,
        "rough": rec.gbuffer.roughness.data, "metal": rec.gbuffer.metallic.data,
        "mv": rec.mv.mv.data,
    }
    with open(path, "wb") as fh:
        fh.write(_WSRF_MAGIC)
        fh.write(struct.pack("<IIII", _WSRF_VERSION, h, w, len(_PLANES)))
        for name, channels in _PLANES:
            arr = planes[name]
            if arr.shape != (channels, h, w):
                raise ShapeError(f"plane {name} has shape {arr.shape}, want ({channels},{h},{w})")
            fh.write(name.encode("ascii").ljust(16))
            fh.write(struct.pack("<I", channels))
            fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


_FRAME_RE = re.compile(r"frame_(\d+)\.wsrf$")


def read_frame(path) -> FrameRecord:
    path = Path(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    off = 0

    def take(n, what):
        nonlocal off
        if off + n > len(raw):
            raise DataFormatError(f"truncated frame file while reading {what}", offset=off)
        chunk = raw[off:off + n]
        off += n
        return chunk

    if take(4, "magic") != _WSRF_MAGIC:
        raise DataFormatError(f"bad magic, expected {_WSRF_MAGIC!r}", offset=0)
    version, h, w, plane_count = struct.unpack("<IIII", take(16, "header"))
    if version != _WSRF_VERSION:
        raise DataFormatError(f"unsupported frame version {version}", offset=4)
    planes = {}
    for _ in range(plane_count):
        name = take(16, "plane name").decode("ascii").rstrip()
        (channels,) = struct.unpack("<I", take(4, "channel count"))
        data = np.frombuffer(take(4 * channels * h * w, f"plane {name}"), dtype="<f4")
        planes[name] = data.reshape(channels, h, w).astype(np.float32)
    if off != len(raw):
        raise DataFormatError("trailing bytes after last plane", offset=off)
    missing = [n for n, _ in _PLANES if n not in planes]
    if missing:
        raise DataFormatError(f"missing planes: {missing}", offset=off)

    m = _FRAME_RE.search(path.name)
    frame_index = int(m.group(1)) if m else 0
    return FrameRecord(
        hdr=Tensor(planes["hdr"]),
        gbuffer=GBuffer(
            albedo=Tensor(planes["albedo"]), normal=Tensor(planes["normal"]),
            depth=Tensor(planes["depth"]), roughness=Tensor(planes["rough"]),
            metallic=Tensor(planes["metal"]),
        ),
        mv=MotionField(Tensor(planes["mv"])),
        frame_index=frame_index,
        scene_id=path.parent.name,
    )


# ---------------------------------------------------------------------------
# dataset directory layout and splits
# ---------------------------------------------------------------------------


def split_scenes(scene_ids: Sequence[str], seed: int, val_ratio: float,
                 test_ratio: float) -> dict:
    """Deterministically assign whole scenes to train/val/test."""
    ids = list(scene_ids)
    n = len(ids)
    order = np.random.default_rng(np.random.SeedSequence((int(seed), 0x511))).permutation(n)
    n_test = max(1, int(round(n * test_ratio))) if n >= 2 else 0
    n_val = min(int(round(n * val_ratio)), max(n - n_test - 1, 0))
    split = {}
    for rank, idx in enumerate(order):
        if rank < n_test:
            split[ids[idx]] = "test"
        elif rank < n_test + n_val:
            split[ids[idx]] = "val"
        else:
            split[ids[idx]] = "train"
    return split


@dataclass
class DatasetIndex:
    """Frame paths grouped per scene plus the scene split assignment."""

    root: Path
    scenes: dict = field(default_factory=dict)   # scene_id -> ordered [Path]
    split: dict = field(default_factory=dict)    # scene_id -> split name

    def scene_ids(self, split_name: str) -> list:
        return sorted(sid for sid, sp in self.split.items() if sp == split_name)

    def load_scene(self, scene_id: str) -> list:
        return [read_frame(p) for p in self.scenes[scene_id]]


def write_dataset(root, scenes: Sequence[Sequence[FrameRecord]], seed: int,
                  val_ratio: float, test_ratio: float) -> DatasetIndex:
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    index = DatasetIndex(root=root)
    for i, frames in enumerate(scenes):
        scene_id = f"scene_{i:03d}"
        scene_dir = root / scene_id
        scene_dir.mkdir(exist_ok=True)
        paths = []
        for rec in frames:
            p = scene_dir / f"frame_{rec.frame_index:05d}.wsrf"
            write_frame(p, rec)
            paths.append(p)
        index.scenes[scene_id] = paths
    index.split = split_scenes(sorted(index.scenes), seed, val_ratio, test_ratio)
    with open(root / "split.txt", "w") as fh:
        for scene_id in sorted(index.scenes):
            for p in index.scenes[scene_id]:
                fh.write(f"{scene_id}/{p.name} {index.split[scene_id]}\n")
    return index


def load_dataset(root) -> DatasetIndex:
    root = Path(root)
    manifest = root / "split.txt"
    if not manifest.exists():
        raise DataFormatError(f"no split manifest at {manifest}")
    index = DatasetIndex(root=root)
    for line in manifest.read_text().splitlines():
        if not line.strip():
            continue
        rel, _, split_name = line.partition(" ")
        scene_id, _, fname = rel.partition("/")
        path = root / scene_id / fname
        if not path.exists():
            raise DataFormatError(f"manifest references missing frame {path}")
        index.scenes.setdefault(scene_id, []).append(path)
        index.split[scene_id] = split_name.strip()
    for scene_id in index.scenes:
        index.scenes[scene_id].sort()
    return index
