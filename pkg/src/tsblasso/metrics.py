"""Recovery and convergence diagnostics.

The central object is a neighborhood decomposition of a student measure
around a sparse reference (the teacher, or a converged proxy for the
optimum): all student atoms within geodesic radius rho of reference atom j
are pooled into a signed local mass r_bar_j; same-signed atoms contribute a
mass-weighted squared-angle term, opposite-signed atoms contribute their
absolute mass, and everything outside all neighborhoods is stray mass.
The scalar

    D_rho = sum_j (r_bar_j - r_j*)^2 + r_0 + sum_j (dtheta_j + dr_j)

upper-bounds the squared conic Wasserstein distance between the matched
positive (and negative) parts, and sandwiches the objective gap near the
optimum, which makes it the workhorse convergence surrogate.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidArgumentError
from .geometry import sample_uniform_sphere
from .model import AtomicMeasure, TeacherNetwork, analytic_l2_distance
from .optimizer import TrajectoryRecord

__all__ = [
    "RecoveryReport",
    "DRhoBreakdown",
    "PhaseReport",
    "rho_margin",
    "d_rho",
    "recovery_report",
    "bottleneck_distance",
    "covering_radius",
    "phase_fit",
]


@dataclass(frozen=True)
class DRhoBreakdown:
    rho: float
    local_mass: np.ndarray  # r_bar_j, signed pooled mass per reference atom
    mass_error: np.ndarray  # (r_bar_j - r_j*)^2
    dtheta: np.ndarray  # sum of same-sign |r| dist^2 per neighborhood
    dr: np.ndarray  # sum of opposite-sign |r| per neighborhood
    stray: float  # total |r| outside all neighborhoods
    total: float

    def parts_sum(self) -> float:
        return float(np.sum(self.mass_error) + self.stray + np.sum(self.dtheta + self.dr))


@dataclass(frozen=True)
class RecoveryReport:
    assignment: list[np.ndarray]  # student atom indices per teacher neighborhood
    local_mass: np.ndarray  # pooled signed mass per teacher direction
    amplitude_error: float  # sum_j (r_bar_j - r_j0)^2
    direction_error: float  # sum_j sum_{matched same-sign} |r| dist^2
    max_direction_rms: float  # worst per-teacher mass-weighted RMS angle (radians)
    stray_mass: float
    sup_error: float  # 2 sqrt(2) sqrt(D_rho): uniform-norm gap bound
    l2_distance: float  # exact squared population distance to the teacher

    def to_dict(self) -> dict:
        return {
            "assignment": [list(map(int, idx)) for idx in self.assignment],
            "local_mass": [float(v) for v in self.local_mass],
            "amplitude_error": self.amplitude_error,
            "direction_error": self.direction_error,
            "max_direction_rms": self.max_direction_rms,
            "stray_mass": self.stray_mass,
            "sup_error": self.sup_error,
            "l2_distance": self.l2_distance,
        }


@dataclass(frozen=True)
class PhaseReport:
    k0: int
    J0_hat: float
    linear_rate: float
    fit_r2: float
    failed: bool
    n_points: int = 0

    def to_dict(self) -> dict:
        return {
            "k0": self.k0,
            "J0_hat": self.J0_hat,
            "linear_rate": self.linear_rate,
            "fit_r2": self.fit_r2,
            "failed": self.failed,
            "n_points": self.n_points,
        }


def _pairwise_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Geodesic angles between unit rows of ``a`` and ``b``.

    Computed from chord lengths, 2 arcsin(||a - b|| / 2), which is exactly
    zero for identical rows and well conditioned at small angles (arccos of
    an inner product loses half the digits there).
    """
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[0]))
    chord = cdist(a, b)
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))


def rho_margin(directions: np.ndarray, x: np.ndarray) -> float:
    """min over (direction, input) pairs of |dist(theta, x_i) - pi/2|.

    This is the angular margin to the nearest activation boundary: within
    half this angle of any direction, every indicator 1{<theta, x_i> >= 0}
    is locally constant, so the objective is smooth there.
    """
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise InvalidArgumentError("need at least one input point")
    ang = np.arccos(np.clip(directions @ x.T, -1.0, 1.0))
    return float(np.min(np.abs(ang - np.pi / 2)))


def _neighborhoods(
    student: AtomicMeasure, ref_locs: np.ndarray, rho: float
) -> tuple[list[np.ndarray], np.ndarray, np.ndarray]:
    """Per-reference student atom indices within rho, plus the full angle
    matrix and the unassigned mask."""
    ang = _pairwise_angles(ref_locs, student.locations)
    inside = ang <= rho
    assignment = [np.where(inside[j])[0] for j in range(ref_locs.shape[0])]
    unassigned = ~inside.any(axis=0)
    return assignment, ang, unassigned


def d_rho(
    student_measure: AtomicMeasure,
    optimal_measure: AtomicMeasure,
    rho: float,
) -> DRhoBreakdown:
    """Neighborhood decomposition of the student around a sparse reference."""
    if rho <= 0:
        raise InvalidArgumentError(f"rho must be > 0, got {rho}")
    if optimal_measure.size == 0:
        raise InvalidArgumentError("reference measure must be nonempty")
    ref = optimal_measure
    seps = _pairwise_angles(ref.locations, ref.locations)
    np.fill_diagonal(seps, np.inf)
    if np.min(seps) <= 2 * rho:
        raise InvalidArgumentError(
            f"reference atoms must be separated by more than 2 rho = {2 * rho}"
        )
    assignment, ang, unassigned = _neighborhoods(student_measure, ref.locations, rho)
    m = ref.size
    local_mass = np.zeros(m)
    dtheta = np.zeros(m)
    dr = np.zeros(m)
    for j in range(m):
        idx = assignment[j]
        if idx.size == 0:
            continue
        masses = student_measure.masses[idx]
        local_mass[j] = masses.sum()
        same = np.sign(masses) == np.sign(ref.masses[j])
        dtheta[j] = np.sum(np.abs(masses[same]) * ang[j, idx[same]] ** 2)
        dr[j] = np.sum(np.abs(masses[~same]))
    mass_error = (local_mass - ref.masses) ** 2
    stray = float(np.sum(np.abs(student_measure.masses[unassigned])))
    total = float(np.sum(mass_error) + stray + np.sum(dtheta + dr))
    return DRhoBreakdown(rho, local_mass, mass_error, dtheta, dr, stray, total)


def recovery_report(
    student: AtomicMeasure,
    teacher: TeacherNetwork,
    rho: float,
    d: int | None = None,
) -> RecoveryReport:
    """Teacher-student matching diagnostics at neighborhood radius rho."""
    breakdown = d_rho(student, teacher.measure(), rho)
    assignment, ang, _ = _neighborhoods(student, teacher.directions, rho)
    rms = np.zeros(teacher.m)
    for j in range(teacher.m):
        idx = assignment[j]
        masses = student.masses[idx] if idx.size else np.zeros(0)
        same = masses > 0  # teacher amplitudes are positive
        w = np.abs(masses[same])
        if w.sum() > 0:
            rms[j] = np.sqrt(np.sum(w * ang[j, idx[same]] ** 2) / w.sum())
        else:
            rms[j] = np.pi  # nothing matched: worst case
    return RecoveryReport(
        assignment=assignment,
        local_mass=breakdown.local_mass,
        amplitude_error=float(np.sum(breakdown.mass_error)),
        direction_error=float(np.sum(breakdown.dtheta)),
        max_direction_rms=float(np.max(rms)) if teacher.m else 0.0,
        stray_mass=breakdown.stray,
        sup_error=float(2 * np.sqrt(2) * np.sqrt(max(breakdown.total, 0.0))),
        l2_distance=analytic_l2_distance(student, teacher.measure(), d or teacher.d),
    )


def _bottleneck_exact(cost: np.ndarray) -> float:
    """Exact bottleneck assignment value: the smallest threshold t such that
    the bipartite graph {cost <= t} has a perfect matching."""
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import maximum_bipartite_matching

    k = cost.shape[0]
    values = np.unique(cost)
    lo, hi = 0, values.size - 1
    best = values[-1]
    while lo <= hi:
        mid = (lo + hi) // 2
        graph = csr_matrix(cost <= values[mid])
        match = maximum_bipartite_matching(graph, perm_type="column")
        if np.all(match >= 0):
            best = values[mid]
            hi = mid - 1
        else:
            lo = mid + 1
    return float(best)


def bottleneck_distance(m1: AtomicMeasure, m2: AtomicMeasure) -> float:
    """Max-geodesic-displacement matching cost between the positive parts.

    Both positive parts must have the same number of atoms; the matching
    that minimizes the largest angular displacement is found exactly by
    thresholding the cost matrix with perfect-matching feasibility checks.
    Used as the computable surrogate for the infinity-Wasserstein distance
    between discrete measures.
    """
    if m1.size == 0 or m2.size == 0:
        raise InvalidArgumentError("both measures must be nonempty")
    p1, p2 = m1.positive_part(), m2.positive_part()
    if p1.size != p2.size:
        raise InvalidArgumentError(
            f"positive parts must have equal cardinality ({p1.size} vs {p2.size})"
        )
    if p1.size == 0:
        return 0.0
    return _bottleneck_exact(_pairwise_angles(p1.locations, p2.locations))


def bottleneck_brute_force(m1: AtomicMeasure, m2: AtomicMeasure) -> float:
    """Permutation search; exponential, for cross-checking small instances."""
    p1, p2 = m1.positive_part(), m2.positive_part()
    if p1.size != p2.size or p1.size == 0:
        raise InvalidArgumentError("need equal nonempty positive parts")
    cost = _pairwise_angles(p1.locations, p2.locations)
    k = p1.size
    return float(
        min(max(cost[i, p[i]] for i in range(k)) for p in itertools.permutations(range(k)))
    )


def covering_radius(points: np.ndarray, probes: int, seed) -> float:
    """Max over uniform probe points of the angle to the nearest given point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise InvalidArgumentError("need at least one point")
    if probes < 1:
        raise InvalidArgumentError("need at least one probe")
    q = sample_uniform_sphere(points.shape[1], probes, seed)
    ang = _pairwise_angles(q, points)
    return float(np.max(np.min(ang, axis=1)))


def phase_fit(
    trajectory: list[TrajectoryRecord],
    j_star: float | None = None,
    min_records: int = 100,
) -> PhaseReport:
    """Two-phase structure of an objective trajectory.

    The excess J_k - J* (with J* the supplied optimum proxy, or the final
    recorded value) is thresholded at the geometric mean
    e * sqrt(excess_tail * excess_0) to locate the phase boundary k0; the
    tail rate and its R^2 come from least squares on log-excess over
    iterations in [k0, 0.95 K].  When the proxy is the trajectory's own
    final value the tail excess degenerates to zero, so the smallest
    positive excess stands in for it.  A fit with R^2 < 0.5 (or no usable
    tail) is reported as failed rather than raised.
    """
    if len(trajectory) < min_records:
        raise InvalidArgumentError(
            f"need at least {min_records} records, got {len(trajectory)}"
        )
    iters = np.array([rec.k for rec in trajectory], dtype=float)
    J = np.array([rec.J for rec in trajectory], dtype=float)
    if j_star is None:
        j_star = float(J[-1])
    excess = J - j_star
    positive = excess > 0
    failed = PhaseReport(k0=-1, J0_hat=np.nan, linear_rate=np.nan, fit_r2=0.0, failed=True)
    if not positive.any() or excess[0] <= 0:
        return failed
    tail_excess = excess[-1] if excess[-1] > 0 else float(np.min(excess[positive]))
    threshold = np.e * np.sqrt(tail_excess * excess[0])
    below = np.where(excess <= threshold)[0]
    if below.size == 0:
        return failed
    i0 = int(below[0])
    k_max = 0.95 * iters[-1]
    sel = (np.arange(len(iters)) >= i0) & (iters <= k_max) & positive
    if sel.sum() < 3:
        return failed
    xs, ys = iters[sel], np.log(excess[sel])
    design = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    pred = design @ coef
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    rate = float(np.exp(coef[0]))
    report = PhaseReport(
        k0=int(iters[i0]),
        J0_hat=float(J[i0]),
        linear_rate=rate,
        fit_r2=float(r2),
        failed=not (r2 >= 0.5 and 0.0 < rate < 1.0),
        n_points=int(sel.sum()),
    )
    return report
