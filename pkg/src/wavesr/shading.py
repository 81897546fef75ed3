"""BRDF factor computation, demodulation and remodulation.

Shaded color factorizes as I = F * L: a per-pixel material reflectance
factor F times a smooth irradiance L. The network super-resolves L; F is
derived from G-buffers alone so the factorization is exactly invertible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .tensor import Tensor

# Lower clamp on the BRDF factor; prevents division blow-up at black metal.
EPS_BRDF = 1e-3

# Dielectric specular reflectance at normal incidence.
_F0_DIELECTRIC = 0.04


@dataclass
class GBuffer:
    """Per-pixel geometry/material planes from a deferred renderer."""

    albedo: Tensor     # 3,H,W in [0,1]
    normal: Tensor     # 3,H,W unit vectors
    depth: Tensor      # 1,H,W >= 0
    roughness: Tensor  # 1,H,W in [0,1]
    metallic: Tensor   # 1,H,W in [0,1]

    @property
    def spatial_shape(self) -> tuple:
        return self.albedo.shape[1:]

    def validate(self):
        h, w = self.spatial_shape
        for name, plane, ch in (
            ("albedo", self.albedo, 3), ("normal", self.normal, 3),
            ("depth", self.depth, 1), ("roughness", self.roughness, 1),
            ("metallic", self.metallic, 1),
        ):
            if plane.shape != (ch, h, w):
                raise ShapeError(f"gbuffer {name} has shape {plane.shape}, want ({ch},{h},{w})")
        for name, plane in (("albedo", self.albedo), ("roughness", self.roughness),
                            ("metallic", self.metallic)):
            d = plane.data
            if d.min() < -1e-6 or d.max() > 1 + 1e-6:
                raise ShapeError(f"gbuffer {name} outside [0,1]: [{d.min()}, {d.max()}]")
        norms = np.sqrt((self.normal.data ** 2).sum(axis=0))
        if np.abs(norms - 1.0).max() > 1e-3:
            raise ShapeError("gbuffer normals are not unit length within 1e-3")
        if self.depth.data.min() < 0:
            raise ShapeError("gbuffer depth must be non-negative")


@dataclass
class BrdfFactor:
    """Strictly positive per-pixel reflectance factor."""

    f: Tensor  # 3,H,W, every element >= EPS_BRDF


def compute_brdf_factor(g: GBuffer) -> BrdfFactor:
    """View-independent reflectance: diffuse albedo plus specular tint.

    F = albedo*(1-metallic) + mix(0.04, albedo, metallic), clamped below
    at EPS_BRDF. Deterministic and monotone in albedo for fixed metallic.
    """
    a = g.albedo.data
    m = g.metallic.data
    diffuse = a * (1.0 - m)
    specular = _F0_DIELECTRIC * (1.0 - m) + a * m
    f = np.maximum(diffuse + specular, EPS_BRDF)
    return BrdfFactor(f=Tensor(f.astype(a.dtype)))


def demodulate(frame: Tensor, f: BrdfFactor) -> Tensor:
    """Irradiance L = I / F (HDR, unbounded above)."""
    if frame.shape != f.f.shape:
        raise ShapeError(f"frame {frame.shape} vs brdf factor {f.f.shape}")
    return frame / f.f


def remodulate(l: Tensor, f: BrdfFactor) -> Tensor:
    """Final shading I = F * L; restores view/lighting-dependent detail."""
    if l.shape != f.f.shape:
        raise ShapeError(f"irradiance {l.shape} vs brdf factor {f.f.shape}")
    return l * f.f
