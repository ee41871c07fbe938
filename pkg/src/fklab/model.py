"""Closed-form constants and reference profiles of the model.

The environment attaches the shape vhat(x) = min(|x|^-alpha, 1) to every
point of a unit-intensity Poisson process on R^d, with d < alpha < d + 2, and
weights Brownian paths by exp(-int_0^t V(X_s) ds).  Everything the rest of
the package verifies is driven by a small family of constants:

    sigma_d = 2 pi^(d/2) / Gamma(d/2)          surface area of the unit sphere
    omega_d = sigma_d / d                      volume of the unit ball
    a1      = omega_d * Gamma((alpha - d) / alpha)
    C       = (alpha * sigma_d / (2 d)) * Gamma((2 alpha - d + 2) / alpha)
    a2      = d * sqrt(C / 2)

a1 fixes the leading order of -log of the annealed survival probability,
C is the curvature of the parabolic profile p_t that the potential develops
around a local minimum, and a2 is the ground-state energy of the Schroedinger
operator -(1/2) Laplacian + C |x|^2 which controls the second-order term.
l1 and l2 play the same two roles inside the low-level tail of the integrated
density of states.

Derived scales, all functions of t through r(t) = t^((alpha-d+2)/(4 alpha)):

    h_t     = a1 * (d / alpha) * t^(-(alpha-d)/alpha)   typical depth of V at
              the bottom of the occupied well
    p_t(x)  = C * t^(-(alpha-d+2)/alpha) * |x|^2        parabolic confinement
    phi1    = ground state of -(1/2) Laplacian + C |x|^2
    nu_m    = phi1(. - m)^2, the limiting occupation density around m

The ground state of -(1/2) Laplacian + c |x|^2 is the Gaussian
(w/pi)^(d/4) exp(-w |x|^2 / 2) with w = sqrt(2 c), energy d w / 2 and
spectral gap w; with c = C this gives a2 and the gap sqrt(2 C) used below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Model coordinates: dimension d, tail exponent alpha, horizon t.

    The heavy-tail regime requires d < alpha < d + 2; t must be positive.
    """

    d: int
    alpha: float
    t: float

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"dimension d must be a positive integer, got {self.d!r}")
        if not (self.d < self.alpha < self.d + 2):
            raise ValueError(
                f"heavy-tail regime requires d < alpha < d + 2, "
                f"got d={self.d}, alpha={self.alpha}"
            )
        if not (self.t > 0) or not math.isfinite(self.t):
            raise ValueError(f"horizon t must be positive and finite, got {self.t!r}")

    def with_t(self, t: float) -> "ModelParams":
        return ModelParams(self.d, self.alpha, t)


@dataclass(frozen=True)
class ConstantsBundle:
    """All closed-form constants for one (d, alpha) pair."""

    d: int
    alpha: float
    sigma_d: float
    omega_d: float
    a1: float
    C: float
    a2: float
    l1: float
    l2: float


@lru_cache(maxsize=None)
def _constants(d: int, alpha: float) -> ConstantsBundle:
    sigma_d = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    omega_d = sigma_d / d
    a1 = omega_d * math.gamma((alpha - d) / alpha)
    C = (alpha * sigma_d / (2.0 * d)) * math.gamma((2.0 * alpha - d + 2.0) / alpha)
    a2 = d * math.sqrt(C / 2.0)
    l1 = ((alpha - d) / alpha) * (d / alpha) ** (d / (alpha - d)) * a1 ** (alpha / (alpha - d))
    l2 = a2 * (d * a1 / alpha) ** ((alpha + d - 2.0) / (2.0 * (alpha - d)))
    return ConstantsBundle(d, alpha, sigma_d, omega_d, a1, C, a2, l1, l2)


def constants(params: ModelParams) -> ConstantsBundle:
    """Constants bundle for params; cached per (d, alpha)."""
    return _constants(params.d, params.alpha)


def _sq_norm(x, d: int):
    """|x|^2 for a scalar (d=1), a single point (d,), or a batch (..., d).

    For d = 1 a bare array of shape (n,) is read as n scalar points.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if d != 1:
            raise ValueError("scalar input only makes sense for d = 1")
        return x * x
    if d == 1 and (x.ndim == 1 or x.shape[-1] != 1):
        return x * x
    if x.shape[-1] != d:
        raise ValueError(f"point array with last axis {x.shape[-1]} does not match d={d}")
    return np.sum(x * x, axis=-1)


def vhat_radial(r, alpha: float):
    """Radial shape min(r^-alpha, 1) for r >= 0, with vhat(0) = 1."""
    r = np.asarray(r, dtype=float)
    out = np.ones_like(r)
    far = r > 1.0
    out[far] = r[far] ** (-alpha)
    if out.ndim == 0:
        return float(out)
    return out


def shape_vhat(x, params: ModelParams):
    """Potential shape vhat(x) = min(|x|^-alpha, 1).

    x may be a scalar (d = 1 only), an array of shape (d,), or a batch of
    points with shape (..., d).
    """
    r = np.sqrt(_sq_norm(x, params.d))
    return vhat_radial(r, params.alpha)


def h_t(params: ModelParams) -> float:
    """Typical potential depth a1 * (d/alpha) * t^(-(alpha-d)/alpha)."""
    c = constants(params)
    return c.a1 * (params.d / params.alpha) * params.t ** (-(params.alpha - params.d) / params.alpha)


def scale_r(params: ModelParams) -> float:
    """Spatial localization scale r(t) = t^((alpha-d+2)/(4 alpha))."""
    return params.t ** ((params.alpha - params.d + 2.0) / (4.0 * params.alpha))


def quadratic_profile(x, params: ModelParams):
    """Parabolic confinement profile p_t(x) = C * t^(-(alpha-d+2)/alpha) * |x|^2.

    x as in shape_vhat.  Satisfies p_t(r(t) y) = C * t^(-(alpha-d+2)/(2 alpha)) |y|^2.
    """
    c = constants(params)
    r2 = _sq_norm(x, params.d)
    return c.C * params.t ** (-(params.alpha - params.d + 2.0) / params.alpha) * r2


def groundstate_phi1(x, params: ModelParams):
    """Ground state of -(1/2) Laplacian + C |x|^2:

        phi1(x) = (sqrt(2 C) / pi)^(d/4) * exp(-sqrt(C/2) |x|^2),

    normalized in L^2(R^d).
    """
    c = constants(params)
    r2 = _sq_norm(x, params.d)
    w = math.sqrt(2.0 * c.C)
    return (w / math.pi) ** (params.d / 4.0) * np.exp(-0.5 * w * r2)


def nu_density(x, m, params: ModelParams):
    """Limit occupation density nu_m(x) = phi1(x - m)^2.

    This is the Gaussian with per-coordinate variance 1 / (2 sqrt(2 C))
    centered at m; nu_m(m) = (sqrt(2 C) / pi)^(d/2).
    """
    x = np.asarray(x, dtype=float)
    m = np.asarray(m, dtype=float)
    return groundstate_phi1(x - m, params) ** 2


def nu_coordinate_variance(params: ModelParams) -> float:
    """Per-coordinate variance of nu_0, equal to (8 C)^(-1/2)."""
    c = constants(params)
    return 1.0 / math.sqrt(8.0 * c.C)


def spectral_gap(params: ModelParams) -> float:
    """Gap lambda2 - lambda1 of -(1/2) Laplacian + C |x|^2, equal to sqrt(2 C)."""
    c = constants(params)
    return math.sqrt(2.0 * c.C)
