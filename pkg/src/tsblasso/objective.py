"""Objectives and exact (sub)gradients, in parameter space and measure space.

The parameter-space objective is

    F(Theta) = 1/(2n) sum_i (y_i - f(x_i; Theta))^2 + reg(Theta),

with ``reg`` either the sparsity-inducing path norm
``lambda * sum_j |a_j| ||w_j||`` or the classical L2 penalty
``lambda/2 * sum_j (a_j^2 + ||w_j||^2)`` (the two coincide at
norm-balanced parameters by AM-GM).  Its measure-space counterpart is the
total-variation-regularized least squares

    J(nu) = 1/(2n) sum_i (y_i - f(x_i; nu))^2 + lambda ||nu||_TV,

and J(to_measure(Theta)) == F(Theta) for the path-norm regularizer.

ReLU is non-differentiable, so derivative selections are pinned here once
and used consistently everywhere: relu'(0) = 1 (the indicator is
``u >= 0``), sgn(0) = 0, and the regularizer contribution to the w-gradient
at ||w|| = 0 is the zero vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InvalidArgumentError
from .geometry import tangent_projector
from .model import AtomicMeasure, Dataset, StudentParams, forward_measure, forward_params

__all__ = [
    "RegVariant",
    "RegKind",
    "SubgradientSet",
    "empirical_risk",
    "regularizer",
    "objective_F",
    "blasso_J",
    "subgradients",
    "blasso_G",
    "gradient_bound_constants",
]


class RegVariant(str, Enum):
    PATH_L1 = "PathL1"
    L2 = "L2"


@dataclass(frozen=True)
class RegKind:
    variant: RegVariant
    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidArgumentError(f"lambda must be >= 0, got {self.lam}")

    @staticmethod
    def path_l1(lam: float) -> "RegKind":
        return RegKind(RegVariant.PATH_L1, lam)

    @staticmethod
    def l2(lam: float) -> "RegKind":
        return RegKind(RegVariant.L2, lam)


@dataclass(frozen=True)
class SubgradientSet:
    """The (g, h) selection of the subdifferential at given parameters."""

    g: np.ndarray  # (M,)   d/da_j
    h: np.ndarray  # (M, d) d/dw_j


def _residuals(params_or_measure, data: Dataset) -> np.ndarray:
    if isinstance(params_or_measure, StudentParams):
        f = forward_params(params_or_measure, data.x)
    elif isinstance(params_or_measure, AtomicMeasure):
        f = forward_measure(params_or_measure, data.x)
    else:
        raise InvalidArgumentError(
            f"expected StudentParams or AtomicMeasure, got {type(params_or_measure)!r}"
        )
    return np.asarray(f) - data.y


def empirical_risk(params_or_measure, data: Dataset) -> float:
    """1/(2n) sum_i (y_i - f(x_i))^2; zero exactly at interpolation."""
    resid = _residuals(params_or_measure, data)
    return float(0.5 * np.mean(resid**2))


def regularizer(params: StudentParams, reg: RegKind) -> float:
    wn = params.w_norms()
    if reg.variant is RegVariant.PATH_L1:
        return float(reg.lam * np.sum(np.abs(params.a) * wn))
    return float(0.5 * reg.lam * np.sum(params.a**2 + wn**2))


def objective_F(params: StudentParams, data: Dataset, reg: RegKind) -> float:
    return empirical_risk(params, data) + regularizer(params, reg)


def blasso_J(measure: AtomicMeasure, data: Dataset, lam: float) -> float:
    """Measure-space objective: data fit plus lambda * total variation."""
    if lam < 0:
        raise InvalidArgumentError(f"lambda must be >= 0, got {lam}")
    return empirical_risk(measure, data) + lam * measure.total_variation()


def subgradients(params: StudentParams, data: Dataset, reg: RegKind) -> SubgradientSet:
    """The fixed subgradient selection of F at ``params``.

    g_j = 1/n sum_i (f(x_i) - y_i) relu(<w_j, x_i>) + d reg / d a_j
    h_j = 1/n sum_i (f(x_i) - y_i) a_j x_i 1{<w_j, x_i> >= 0} + d reg / d w_j

    For the path norm the regularizer terms are lambda sgn(a_j) ||w_j|| and
    lambda |a_j| w_j / ||w_j|| (taken to be 0 when ||w_j|| = 0); for L2 they
    are lambda a_j and lambda w_j.
    """
    if data.d != params.d:
        raise InvalidArgumentError("data and parameters live in different dimensions")
    n = data.n
    scores = data.x @ params.w.T  # (n, M)
    active = scores >= 0
    relu = np.where(active, scores, 0.0)
    resid = relu @ params.a - data.y
    g = (relu.T @ resid) / n
    h = params.a[:, None] * ((data.x.T @ (active * resid[:, None])) / n).T
    wn = params.w_norms()
    if reg.variant is RegVariant.PATH_L1:
        g = g + reg.lam * np.sign(params.a) * wn
        nz = wn > 0
        h = h.copy()
        h[nz] += reg.lam * np.abs(params.a[nz])[:, None] * params.w[nz] / wn[nz, None]
    else:
        g = g + reg.lam * params.a
        h = h + reg.lam * params.w
    return SubgradientSet(g, h)


def blasso_G(
    measure: AtomicMeasure,
    data: Dataset,
    lam: float,
    theta: np.ndarray,
    sign_hint: int,
) -> tuple[float, np.ndarray]:
    """Value and spherical gradient of a J-subgradient selection at ``theta``.

    ``sign_hint`` in {-1, +1} plays the role of the total-variation
    subdifferential value at ``theta``; callers evaluating at an atom pass
    the sign of its mass.  Returns

        value  = 1/n sum_i (f(x_i; nu) - y_i) relu(<theta, x_i>) + lambda * sign_hint
        s_grad = (I - theta theta^T) 1/n sum_i (f(x_i; nu) - y_i) x_i 1{<theta, x_i> >= 0}
    """
    theta = np.asarray(theta, dtype=float)
    if abs(np.linalg.norm(theta) - 1.0) > 1e-8:
        raise InvalidArgumentError("theta must be a unit vector")
    if sign_hint not in (-1, 1):
        raise InvalidArgumentError(f"sign_hint must be +-1, got {sign_hint}")
    resid = _residuals(measure, data)
    scores = data.x @ theta
    value = float(resid @ np.maximum(scores, 0.0) / data.n + lam * sign_hint)
    raw = data.x.T @ (resid * (scores >= 0)) / data.n
    return value, tangent_projector(theta) @ raw


def gradient_bound_constants(c_f: float, n: int, lam: float) -> tuple[float, float]:
    """The a-priori bounds (C1, C2) on the J-subgradient along a run.

    While the objective stays below ``c_f``, the data-fit value term is
    bounded by C1 = 2 sqrt(n) c_f + lambda and its gradient by
    C2 = 2 sqrt(n) c_f.
    """
    c2 = 2.0 * np.sqrt(n) * c_f
    return c2 + lam, c2
