"""Motion-vector reprojection and validity masks for temporal reuse.

Motion vectors are gather-style: mv[:, y, x] holds the (dy, dx) offset, in
pixels, from the current frame pixel to its position in the previous
frame. Masks are plain data (excluded from the autodiff graph): they act
as inputs and supervision targets, not learned outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .shading import GBuffer
from .tensor import Tensor, bilinear_sample

# Sharpness of the exponential similarity kernels.
ALPHA_DEPTH = 1.0
ALPHA_NORMAL = 10.0
ALPHA_SHADING = 5.0


@dataclass
class MotionField:
    mv: Tensor  # 2,H,W (dy, dx) current -> previous, pixel units


@dataclass
class MaskPair:
    spatial: Tensor   # 1,H,W in [0,1]
    temporal: Tensor  # 1,H,W in [0,1]


_GRID_CACHE: dict = {}


def _base_grid(h: int, w: int, dtype) -> np.ndarray:
    key = (h, w, np.dtype(dtype).str)
    grid = _GRID_CACHE.get(key)
    if grid is None:
        ys, xs = np.meshgrid(np.arange(h, dtype=dtype), np.arange(w, dtype=dtype), indexing="ij")
        grid = np.ascontiguousarray(np.stack([ys, xs], axis=0))
        _GRID_CACHE[key] = grid
    return grid


def warp(prev: Tensor, mv: MotionField) -> Tensor:
    """Reproject the previous frame: out(y,x) = prev(y+dy, x+dx), bilinear.

    Border clamp; differentiable with respect to prev. Zero motion is an
    exact identity.
    """
    if prev.ndim != 3:
        raise ShapeError(f"warp expects C,H,W input, got {prev.shape}")
    if mv.mv.shape != (2,) + prev.shape[1:]:
        raise ShapeError(f"motion field {mv.mv.shape} does not match frame {prev.shape}")
    coords = _base_grid(prev.shape[1], prev.shape[2], prev.dtype) + mv.mv.data
    return bilinear_sample(prev, coords)


def warp_gbuffer(g_prev: GBuffer, mv: MotionField) -> GBuffer:
    """Reproject every G-buffer plane (warped normals are left unnormalized)."""
    return GBuffer(
        albedo=warp(g_prev.albedo, mv),
        normal=warp(g_prev.normal, mv),
        depth=warp(g_prev.depth, mv),
        roughness=warp(g_prev.roughness, mv),
        metallic=warp(g_prev.metallic, mv),
    )


def compute_masks(
    g_cur: GBuffer,
    g_prev_warped: GBuffer,
    l_prev_warped: Tensor,
    l_lr_up: Tensor,
    alpha_depth: float = ALPHA_DEPTH,
    alpha_normal: float = ALPHA_NORMAL,
    alpha_shading: float = ALPHA_SHADING,
) -> MaskPair:
    """Disocclusion (temporal) and shading-change (spatial) validity masks.

    temporal = exp(-(a_d*|ddepth| + a_n*(1 - <n_cur, n_prev>)))
    spatial  = exp(-a_s * ||l_prev_warped - l_lr_up||_1)

    Both land in [0,1] and equal 1 exactly where the driving difference is 0.
    """
    if g_cur.spatial_shape != g_prev_warped.spatial_shape:
        raise ShapeError("current and warped G-buffers differ in resolution")
    if l_prev_warped.shape != l_lr_up.shape or l_prev_warped.shape[1:] != g_cur.spatial_shape:
        raise ShapeError("mask inputs must share the HR resolution")

    ddepth = np.abs(g_cur.depth.data - g_prev_warped.depth.data)
    ndot = (g_cur.normal.data * g_prev_warped.normal.data).sum(axis=0, keepdims=True)
    temporal = np.exp(-np.maximum(alpha_depth * ddepth + alpha_normal * (1.0 - ndot), 0.0))

    dshade = np.abs(l_prev_warped.data - l_lr_up.data).sum(axis=0, keepdims=True)
    spatial = np.exp(-alpha_shading * dshade)

    dtype = g_cur.depth.dtype
    return MaskPair(
        spatial=Tensor(np.clip(spatial, 0.0, 1.0).astype(dtype)),
        temporal=Tensor(np.clip(temporal, 0.0, 1.0).astype(dtype)),
    )
