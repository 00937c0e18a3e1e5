"""Dual-certificate machinery for the teacher-student problem.

A dual vector p induces the piecewise-linear function

    f*(p)(theta) = 1/n sum_i p_i relu(<theta, x_i>),

and optimality of a sparse measure is certified when f*(p) equals the mass
signs on its support and stays strictly inside (-1, 1) elsewhere.  The
minimum-norm vector enforcing value 1 and stationarity at the teacher
directions solves a small positive-definite system built from the masked
feature matrix X0 (one d-row block per teacher direction):

    p_dagger = n X0^T (X0 X0^T)^{-1} [theta_1; ...; theta_m].

Its population limit f_bar has a closed form in the angles to the teacher
directions with explicit constants (a, b), which this module also provides,
along with the exact expectation of (1/n) X0 X0^T and sampled
non-degeneracy reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, RankDeficientError
from .geometry import sample_uniform_sphere
from .model import Dataset

__all__ = [
    "DualVector",
    "PopulationConstants",
    "CertificateReport",
    "build_X0",
    "precertificate",
    "dual_eval",
    "population_constants",
    "population_certificate",
    "expected_K0",
    "ndsc_report",
]

COND_LIMIT = 1e12
PINV_RCOND = 1e-10


@dataclass(frozen=True)
class DualVector:
    """Dual coordinates tied to the dataset that defines f*(p)."""

    p: np.ndarray  # (n,)
    data: Dataset

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        object.__setattr__(self, "p", p)
        if p.shape != (self.data.n,):
            raise InvalidArgumentError("dual vector length must equal the sample size")


@dataclass(frozen=True)
class PopulationConstants:
    m: int
    a: float
    b: float


@dataclass(frozen=True)
class CertificateReport:
    values_at_teacher: np.ndarray  # f*(p) at each teacher direction
    gradient_residuals: np.ndarray  # ||grad f*(p)(theta_j) - theta_j||
    max_off_support: float  # max |f*(p)| over probes outside the caps
    max_local_ray: float  # max f*(p) along geodesic rays of length 2*cap_radius
    local_cell_max: float  # ray maximum restricted to the smooth activation cell
    local_linearity_residual: float  # max |f*(ray(t)) - cos t| inside the cell
    activation_margin: float  # angular margin to the nearest activation boundary
    probe_count: int
    cap_radius: float
    condition_number: float | None = None

    def to_dict(self) -> dict:
        return {
            "values_at_teacher": [float(v) for v in self.values_at_teacher],
            "gradient_residuals": [float(v) for v in self.gradient_residuals],
            "max_off_support": self.max_off_support,
            "max_local_ray": self.max_local_ray,
            "local_cell_max": self.local_cell_max,
            "local_linearity_residual": self.local_linearity_residual,
            "activation_margin": self.activation_margin,
            "probe_count": self.probe_count,
            "cap_radius": self.cap_radius,
            "condition_number": self.condition_number,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _check_dirs(teacher_dirs: np.ndarray) -> np.ndarray:
    dirs = np.atleast_2d(np.asarray(teacher_dirs, dtype=float))
    m, d = dirs.shape
    if m > d:
        raise InvalidArgumentError(f"{m} orthogonal directions impossible in dimension {d}")
    gram = dirs @ dirs.T
    if np.max(np.abs(gram - np.eye(m))) > 1e-8:
        raise InvalidArgumentError("teacher directions must be orthonormal")
    return dirs


def build_X0(teacher_dirs: np.ndarray, data: Dataset) -> np.ndarray:
    """Masked feature matrix, one d-row block per teacher direction.

    Block j, column i is x_i 1{<theta_j, x_i> >= 0}.
    """
    dirs = _check_dirs(teacher_dirs)
    if dirs.shape[1] != data.d:
        raise InvalidArgumentError("directions and data live in different dimensions")
    active = (data.x @ dirs.T >= 0).T  # (m, n)
    blocks = [data.x.T * active[j][None, :] for j in range(dirs.shape[0])]
    return np.concatenate(blocks, axis=0)


def precertificate(
    teacher_dirs: np.ndarray,
    data: Dataset,
    allow_rank_deficient: bool = False,
) -> DualVector:
    """Minimum-norm dual vector with f*(p)(theta_j) = 1, grad f*(p)(theta_j) = theta_j.

    Solves the (md x md) system (X0 X0^T) z = [theta_1; ...; theta_m] by a
    symmetric (Cholesky) factorization and returns p = n X0^T z.  When the
    system's condition number exceeds 1e12 (numerical rank deficiency) a
    RankDeficientError carrying the estimated rank is raised, unless
    ``allow_rank_deficient`` is set, in which case the Moore-Penrose
    pseudo-inverse with relative cutoff 1e-10 is used instead.
    """
    dirs = _check_dirs(teacher_dirs)
    m, d = dirs.shape
    if data.n < m * d:
        raise InvalidArgumentError(
            f"need n >= m*d = {m * d} samples for the stationarity system, got {data.n}"
        )
    x0 = build_X0(dirs, data)
    k0 = x0 @ x0.T
    target = dirs.reshape(-1)
    svals = np.linalg.svd(k0, compute_uv=False)
    rank = int(np.sum(svals > svals[0] * PINV_RCOND)) if svals.size else 0
    cond = float(svals[0] / svals[-1]) if svals[-1] > 0 else np.inf
    if rank < m * d or cond > COND_LIMIT:
        if not allow_rank_deficient:
            raise RankDeficientError(rank, m * d, cond)
        z = np.linalg.pinv(k0, rcond=PINV_RCOND) @ target
    else:
        z = scipy.linalg.cho_solve(scipy.linalg.cho_factor(k0), target)
    p = data.n * (x0.T @ z)
    vec = DualVector(p, data)
    object.__setattr__(vec, "condition_number", cond)
    return vec


def dual_eval(p: DualVector, theta: np.ndarray) -> tuple[float, np.ndarray]:
    """(f*(p)(theta), its Euclidean gradient).

    The gradient is 1/n sum_i p_i x_i 1{<theta, x_i> >= 0}; by
    1-homogeneity <theta, gradient> equals the value exactly.
    """
    theta = np.asarray(theta, dtype=float)
    scores = p.data.x @ theta
    active = scores >= 0
    value = float(p.p @ (scores * active)) / p.data.n
    grad = p.data.x.T @ (p.p * active) / p.data.n
    return value, grad


def dual_eval_batch(p: DualVector, thetas: np.ndarray, chunk: int = 512) -> np.ndarray:
    """f*(p) at many unit vectors; (k,) values for (k, d) input.

    Evaluates in chunks so the (n x k) score matrix never grows past
    n * chunk entries.
    """
    thetas = np.atleast_2d(thetas)
    out = np.empty(thetas.shape[0])
    for start in range(0, thetas.shape[0], chunk):
        block = thetas[start : start + chunk]
        scores = p.data.x @ block.T  # (n, <=chunk)
        out[start : start + chunk] = (np.maximum(scores, 0.0).T @ p.p) / p.data.n
    return out


def population_constants(m: int) -> PopulationConstants:
    """Closed-form coefficients of the population certificate.

    With D = 2 pi m^2 + (pi^2 - 2 pi + 4) m + pi^2 + 4 pi - 4:

        a = 2 pi (pi m + pi + 2) / D,    b = -2 pi^2 / D.

    For every integer m >= 1, a > 0 > b and a = -(2/pi + m + 1) b.
    """
    if m < 1:
        raise InvalidArgumentError(f"teacher width must be >= 1, got {m}")
    pi = np.pi
    denom = 2 * pi * m**2 + (pi**2 - 2 * pi + 4) * m + pi**2 + 4 * pi - 4
    return PopulationConstants(m, 2 * pi * (pi * m + pi + 2) / denom, -2 * pi**2 / denom)


def population_certificate(theta: np.ndarray, teacher_dirs: np.ndarray) -> float:
    """The population certificate f_bar at ``theta``.

    With phi_j the angle from theta to teacher direction j and (a, b) the
    closed-form constants:

        f_bar(theta) = (a + b) sum_j ((pi - phi_j)/pi cos phi_j + sin phi_j / pi)
                       + b sum_j sum_{j' != j} (pi - phi_j)/pi cos phi_{j'}.

    Equals 1 exactly at every teacher direction and lies strictly in (0, 1)
    everywhere else; requires the teacher directions to be orthonormal.
    """
    dirs = _check_dirs(teacher_dirs)
    theta = np.asarray(theta, dtype=float)
    m = dirs.shape[0]
    consts = population_constants(m)
    cosphi = np.clip(dirs @ theta, -1.0, 1.0)
    phi = np.arccos(cosphi)
    w = (np.pi - phi) / np.pi  # (pi - phi_j)/pi
    head = np.sum(w * cosphi + np.sin(phi) / np.pi)
    cross = np.sum(w) * np.sum(cosphi) - np.sum(w * cosphi)
    return float((consts.a + consts.b) * head + consts.b * cross)


def expected_K0(teacher_dirs: np.ndarray, d: int | None = None) -> np.ndarray:
    """Exact expectation of (1/n) X0 X0^T under uniform spherical inputs.

    Block (j1, j2) equals (1/2d) I_d on the diagonal and
    (1/4d) I_d + (1/2 pi d)(theta_j1 theta_j2^T + theta_j2 theta_j1^T)
    off the diagonal.  Positive definite with smallest eigenvalue at least
    (1/d)(1/4 - 1/(2 pi)).
    """
    dirs = _check_dirs(teacher_dirs)
    m, dim = dirs.shape
    if d is None:
        d = dim
    elif d != dim:
        raise InvalidArgumentError("declared dimension does not match the directions")
    out = np.zeros((m * d, m * d))
    eye = np.eye(d)
    for j1 in range(m):
        for j2 in range(m):
            if j1 == j2:
                block = eye / (2 * d)
            else:
                e = np.outer(dirs[j1], dirs[j2])
                block = eye / (4 * d) + (e + e.T) / (2 * np.pi * d)
            out[j1 * d : (j1 + 1) * d, j2 * d : (j2 + 1) * d] = block
    return out


def _geodesic_rays(center: np.ndarray, ts: np.ndarray, n_rays: int, rng):
    """Points along geodesics from ``center`` in random tangent directions
    at the given arc-length parameters."""
    d = center.shape[0]
    tang = rng.standard_normal((n_rays, d))
    tang -= np.outer(tang @ center, center)
    tang /= np.linalg.norm(tang, axis=1, keepdims=True)
    pts = (
        np.cos(ts)[None, :, None] * center[None, None, :]
        + np.sin(ts)[None, :, None] * tang[:, None, :]
    )
    return pts.reshape(-1, d), np.tile(ts, n_rays)


def ndsc_report(
    p: DualVector,
    teacher_dirs: np.ndarray,
    probes: int = 10_000,
    cap_radius: float = 1e-3,
    seed: int = 0,
    n_rays: int = 16,
    ray_points: int = 64,
) -> CertificateReport:
    """Sampled non-degeneracy check of the certificate f*(p).

    Evaluates f*(p) at the teacher directions, at ``probes`` uniform sphere
    points excluding caps of ``cap_radius`` around the teacher directions
    (the sampled supremum |f*| there must stay below 1), and along short
    geodesic rays of length 2*cap_radius from each teacher direction.

    The strict-local-maximum property is checked via gradient constancy:
    within the activation cell around a teacher direction (every indicator
    1{<theta, x_i> >= 0} unchanged, i.e. inside the reported angular margin)
    the certificate is exactly cos(t) along a ray, so ``local_cell_max``
    must sit strictly below 1 and ``local_linearity_residual`` near zero.
    Beyond the cell the ray maximum is reported as ``max_local_ray``; at
    finite sample size it can exceed 1 by a vanishing excursion, which this
    report surfaces rather than hides.  Gradient residuals
    ||grad f*(theta_j) - theta_j|| quantify the stationarity constraints.
    """
    if probes < 1:
        raise InvalidArgumentError("need at least one probe")
    if cap_radius <= 0:
        raise InvalidArgumentError("cap_radius must be positive")
    dirs = _check_dirs(teacher_dirs)
    m, d = dirs.shape

    values = np.empty(m)
    grad_resid = np.empty(m)
    for j in range(m):
        val, grad = dual_eval(p, dirs[j])
        values[j] = val
        grad_resid[j] = np.linalg.norm(grad - dirs[j])

    rng = np.random.default_rng(seed)
    samples = sample_uniform_sphere(d, probes, rng)
    ang = np.arccos(np.clip(samples @ dirs.T, -1.0, 1.0))
    keep = np.all(ang > cap_radius, axis=1)
    offsup = samples[keep]
    max_off = float(np.max(np.abs(dual_eval_batch(p, offsup)))) if offsup.size else 0.0

    margins = np.abs(
        np.arccos(np.clip(dirs @ p.data.x.T, -1.0, 1.0)) - np.pi / 2
    ).min(axis=1)
    ray_max = -np.inf
    cell_max = -np.inf
    lin_resid = 0.0
    for j in range(m):
        # uniform coverage out to 2*cap_radius plus a cluster inside the
        # activation cell, where the linear behaviour is asserted
        ts = np.linspace(2 * cap_radius / ray_points, 2 * cap_radius, ray_points)
        if margins[j] > 0:
            ts = np.unique(np.concatenate([ts, np.linspace(margins[j] / 17, margins[j] * 0.94, 16)]))
        pts, ts = _geodesic_rays(dirs[j], ts, n_rays, rng)
        vals = dual_eval_batch(p, pts)
        ray_max = max(ray_max, float(np.max(vals)))
        inside = ts < margins[j]
        if inside.any():
            cell_max = max(cell_max, float(np.max(vals[inside])))
            lin_resid = max(lin_resid, float(np.max(np.abs(vals[inside] - np.cos(ts[inside])))))

    return CertificateReport(
        values_at_teacher=values,
        gradient_residuals=grad_resid,
        max_off_support=max_off,
        max_local_ray=float(ray_max),
        local_cell_max=float(cell_max) if np.isfinite(cell_max) else float("nan"),
        local_linearity_residual=lin_resid,
        activation_margin=float(np.min(margins)),
        probe_count=int(keep.sum()),
        cap_radius=cap_radius,
        condition_number=getattr(p, "condition_number", None),
    )
