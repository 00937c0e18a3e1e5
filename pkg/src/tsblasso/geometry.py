"""Unit-sphere primitives.

Everything downstream lives on S^{d-1}: network input weights are
normalized to it, inputs are sampled uniformly from it, and the
distance between directions is the geodesic angle
``arccos(<theta1, theta2>)``.  This module also provides the closed
form of the ReLU arc-cosine kernel

    E_{X ~ Unif(S^{d-1})}[relu(<t1, X>) relu(<t2, X>)]
        = (1 / 2d) * ((pi - phi)/pi * cos(phi) + sin(phi)/pi),

with ``phi`` the angle between ``t1`` and ``t2``, which turns
population L2 distances between finite-width ReLU networks into exact
finite sums.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "sample_uniform_sphere",
    "geodesic_dist",
    "relu_kernel",
    "relu_kernel_angle",
    "normalize_rows",
    "tangent_projector",
]


def sample_uniform_sphere(d: int, count: int, seed) -> np.ndarray:
    """Draw ``count`` i.i.d. uniform points on S^{d-1}, as a (count, d) array.

    Uses normalized standard Gaussians, which is exact: the Gaussian law is
    rotation invariant, so the normalized vector is uniform on the sphere.
    Deterministic for a fixed ``seed`` (an int or a ``numpy`` Generator).
    """
    if d < 2:
        raise InvalidArgumentError(f"dimension must be >= 2, got {d}")
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    g = rng.standard_normal((count, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def normalize_rows(w: np.ndarray, fallback: np.ndarray | None = None) -> np.ndarray:
    """Normalize rows of ``w`` to unit length.

    Zero rows map to ``fallback`` (default: the first canonical basis
    vector), the fixed convention for degenerate nodes.
    """
    w = np.asarray(w, dtype=float)
    norms = np.linalg.norm(w, axis=-1, keepdims=True)
    if fallback is None:
        fallback = np.zeros(w.shape[-1])
        fallback[0] = 1.0
    safe = np.where(norms == 0.0, 1.0, norms)
    out = w / safe
    zero = (norms == 0.0).reshape(w.shape[:-1])
    if np.any(zero):
        out = out.copy()
        out[zero] = fallback
    return out


def _check_unit(theta: np.ndarray, name: str, tol: float = 1e-8) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a 1-d vector")
    n = np.linalg.norm(theta)
    if abs(n - 1.0) > tol:
        raise InvalidArgumentError(f"{name} must be unit norm (got {n!r})")
    return theta


def geodesic_dist(theta1: np.ndarray, theta2: np.ndarray) -> float:
    """Geodesic (angular) distance on the sphere, in [0, pi].

    The inner product is clamped to [-1, 1] before ``arccos`` to absorb
    floating-point rounding.
    """
    theta1 = _check_unit(theta1, "theta1")
    theta2 = _check_unit(theta2, "theta2")
    if theta1.shape != theta2.shape:
        raise InvalidArgumentError(
            f"dimension mismatch: {theta1.shape[0]} vs {theta2.shape[0]}"
        )
    return float(np.arccos(np.clip(theta1 @ theta2, -1.0, 1.0)))


def relu_kernel_angle(phi, d: int):
    """Arc-cosine kernel as a function of the angle ``phi`` and dimension."""
    if d < 2:
        raise InvalidArgumentError(f"dimension must be >= 2, got {d}")
    phi = np.asarray(phi, dtype=float)
    val = ((np.pi - phi) / np.pi * np.cos(phi) + np.sin(phi) / np.pi) / (2.0 * d)
    return float(val) if val.ndim == 0 else val


def relu_kernel(theta1: np.ndarray, theta2: np.ndarray, d: int | None = None) -> float:
    """E[relu(<t1,X>) relu(<t2,X>)] for X uniform on S^{d-1}.

    ``d`` defaults to the dimension of the inputs; passing it explicitly is
    checked for consistency.
    """
    theta1 = _check_unit(theta1, "theta1")
    theta2 = _check_unit(theta2, "theta2")
    if theta1.shape != theta2.shape:
        raise InvalidArgumentError(
            f"dimension mismatch: {theta1.shape[0]} vs {theta2.shape[0]}"
        )
    if d is None:
        d = theta1.shape[0]
    elif d != theta1.shape[0]:
        raise InvalidArgumentError(
            f"declared dimension {d} does not match vectors of dimension {theta1.shape[0]}"
        )
    return relu_kernel_angle(geodesic_dist(theta1, theta2), d)


def tangent_projector(theta: np.ndarray) -> np.ndarray:
    """The projector I - theta theta^T onto the tangent space at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    return np.eye(theta.shape[0]) - np.outer(theta, theta)
