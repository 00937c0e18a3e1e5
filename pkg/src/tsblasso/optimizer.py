"""Norm-dependent gradient descent.

Each node gets its own step size

    eta_{j,k} = alpha |a_{j,k}| ||w_{j,k}|| / (a_{j,k}^2 + ||w_{j,k}||^2),

which never exceeds alpha/2 (AM-GM) and vanishes for dead nodes.  Its
point is that the induced update of the measure representation
(r, theta) = (a ||w||, w/||w||) becomes, to first order, a conic step:
the mass moves multiplicatively against the measure-space subgradient,

    r_{k+1} ~= r_k - alpha * G(theta_k) * |r_k|,

and the direction takes a projected-gradient step with the much smaller
rate beta_{j,k} = alpha a^2 / (a^2 + ||w||^2),

    theta_{k+1} ~= theta_k - sgn(r_k) beta_{j,k} * grad_S G(theta_k),

where G is the measure-space subgradient selection.  The training loop
records the exact higher-order remainders (delta_r, delta_theta) of this
decomposition at every logged step, together with the step-size safety
diagnostics (sign flips, |a| vs ||w|| domination, subgradient bounds), so
the conic picture can be audited after the fact.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError
from .geometry import sample_uniform_sphere
from .model import Dataset, StudentParams
from .objective import RegKind, RegVariant, gradient_bound_constants

__all__ = [
    "TrainConfig",
    "TrajectoryRecord",
    "TrainResult",
    "init_params",
    "step_size_eta",
    "gd_step",
    "train",
    "alpha_safety_bound",
    "invariant_safe_alpha",
]

# Early stopping: relative objective decrease over this many iterations
# below PLATEAU_RTOL ends the run.
PLATEAU_WINDOW = 500
PLATEAU_RTOL = 1e-12

# Multiplicative step-size perturbation applied to nodes whose directions
# coincide, alternating sign by rank inside each coincident group.
TIE_BREAK = 1e-9


@dataclass(frozen=True)
class TrainConfig:
    alpha: float
    reg: RegKind
    max_iters: int
    M: int
    seed: int
    coincidence_tolerance: float = 0.0  # chord distance below which directions tie-break
    log_every: int = 1

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidArgumentError(f"alpha must be > 0, got {self.alpha}")
        if self.max_iters < 0:
            raise InvalidArgumentError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.M < 2:
            raise InvalidArgumentError(f"M must be >= 2, got {self.M}")
        if self.log_every < 1:
            raise InvalidArgumentError(f"log_every must be >= 1, got {self.log_every}")
        if self.coincidence_tolerance < 0:
            raise InvalidArgumentError("coincidence_tolerance must be >= 0")


@dataclass(frozen=True)
class TrajectoryRecord:
    """State at iteration k, plus diagnostics of the step taken from it.

    The transition fields (eta ... delta_theta_norm) describe the update
    k -> k+1 and are ``None`` on the final record.  ``delta_r`` and
    ``delta_theta_norm`` are the exact remainders of the first-order conic
    update, by construction:  to_measure(Theta_{k+1}) equals the first-order
    prediction plus these residuals.
    """

    k: int
    F: float
    J: float
    risk: float
    a: np.ndarray
    w_norm: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    sign_changed: bool
    eta: np.ndarray | None = None
    beta: np.ndarray | None = None
    G_atoms: np.ndarray | None = None
    sphere_grad_norm: np.ndarray | None = None
    delta_r: np.ndarray | None = None
    delta_theta_norm: np.ndarray | None = None


@dataclass
class TrainResult:
    records: list[TrajectoryRecord]
    params: StudentParams
    iterations_run: int
    stopped_early: bool
    # Counters accumulated over *every* iteration, not just logged ones.
    sign_change_steps: int = 0
    aw_violations: int = 0
    value_bound_violations: int = 0
    grad_bound_violations: int = 0
    max_F_seen: float = 0.0
    monotonicity_breaks: int = 0  # steps with F increase > 1e-9
    final_C1: float = 0.0
    final_C2: float = 0.0

    @property
    def trajectory(self) -> list[TrajectoryRecord]:
        return self.records


def init_params(M: int, d: int, seed) -> StudentParams:
    """Mean-field initialization: a_j = +-2/M in sign-balanced halves,
    w_j i.i.d. uniform on the sphere.

    An odd width puts the leftover node in the negative half (the split is
    floor(M/2) positive, the rest negative); both signs must be present
    because the norm-dependent updates never flip them.
    """
    if M < 2:
        raise InvalidArgumentError(f"M must be >= 2, got {M}")
    a = np.full(M, 2.0 / M)
    a[M // 2 :] *= -1.0
    w = sample_uniform_sphere(d, M, seed)
    return StudentParams(a, w)


def step_size_eta(a: float, w_norm: float, alpha: float) -> float:
    """alpha |a| ||w|| / (a^2 + ||w||^2); zero at a = ||w|| = 0; <= alpha/2."""
    if alpha <= 0:
        raise InvalidArgumentError(f"alpha must be > 0, got {alpha}")
    denom = a * a + w_norm * w_norm
    if denom == 0.0:
        return 0.0
    return alpha * abs(a) * w_norm / denom


def alpha_safety_bound(c_f: float, n: int, lam: float, rho: float) -> float:
    """The computable part of the step-size condition for two-phase convergence.

    Returns min{1/(8 C1), 1/(10 C2), rho/C2, lambda^2/(8 c_f^2)} with
    C1 = 2 sqrt(n) c_f + lambda and C2 = 2 sqrt(n) c_f.  The remaining
    theoretical term involves a non-constructive threshold and is omitted.
    This bound is extremely conservative at experiment scale; see
    :func:`invariant_safe_alpha` for the rate the experiment driver uses.
    """
    if c_f <= 0 or n <= 0 or lam <= 0 or rho <= 0:
        raise InvalidArgumentError("all inputs must be positive")
    c1, c2 = gradient_bound_constants(c_f, n, lam)
    return min(1.0 / (8 * c1), 1.0 / (10 * c2), rho / c2, lam**2 / (8 * c_f**2))


def invariant_safe_alpha(c_f: float, n: int, lam: float, cap: float = 0.1) -> float:
    """Largest step scale with the sign / norm-domination guarantees.

    Sign preservation needs alpha < 1/C1 and |a| <= ||w|| needs
    alpha < 2/C2; both constants as in :func:`alpha_safety_bound`.  The cap
    keeps the subgradient steps sane when those bounds are loose.
    """
    if c_f <= 0 or n <= 0 or lam < 0:
        raise InvalidArgumentError("c_f and n must be positive, lambda nonnegative")
    c1, c2 = gradient_bound_constants(c_f, n, lam)
    # both lemma hypotheses are strict inequalities; back off slightly
    return min(0.999 / c1, 1.998 / c2, cap)


def _tie_break_eta(eta: np.ndarray, theta: np.ndarray, tol: float) -> int:
    """Perturb step sizes of nodes whose directions coincide within ``tol``
    (chord distance), alternating the sign of the perturbation inside each
    group by node order.  Mutates ``eta``; returns the number of perturbed
    nodes."""
    M = theta.shape[0]
    gram = theta @ theta.T
    # chord^2 = 2 - 2 cos; coincident iff chord <= tol
    close = 2.0 - 2.0 * gram <= tol * tol
    np.fill_diagonal(close, False)
    members = np.where(close.any(axis=1))[0]
    if members.size == 0:
        return 0
    seen = np.zeros(M, dtype=bool)
    perturbed = 0
    for i in members:
        if seen[i]:
            continue
        group = np.where(close[i])[0]
        group = np.concatenate(([i], group[group != i]))
        group.sort()
        seen[group] = True
        signs = np.where(np.arange(group.size) % 2 == 0, 1.0, -1.0)
        eta[group] *= 1.0 + TIE_BREAK * signs
        perturbed += group.size
    return perturbed


def _quiet_overflow(fn):
    """Run with overflow/invalid warnings silenced; a diverging iterate is
    detected explicitly and raised as NumericalFailureError."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with np.errstate(over="ignore", invalid="ignore"):
            return fn(*args, **kwargs)

    return wrapper


class _Loop:
    """Vectorized training state for repeated norm-dependent steps."""

    def __init__(self, data: Dataset, params: StudentParams, cfg: TrainConfig):
        self.x = data.x
        self.y = data.y
        self.n = data.n
        self.d = data.d
        self.cfg = cfg
        self.lam = cfg.reg.lam
        self.path_l1 = cfg.reg.variant is RegVariant.PATH_L1
        self.a = params.a.copy()
        self.w = params.w.copy()
        self.e1 = np.zeros(self.d)
        self.e1[0] = 1.0

    @_quiet_overflow
    def state(self):
        """(F, J, risk, wn, r) plus cached forward quantities."""
        scores = self.x @ self.w.T
        active = scores >= 0
        relu = np.where(active, scores, 0.0)
        resid = relu @ self.a - self.y
        risk = 0.5 * float(resid @ resid) / self.n
        wn = np.linalg.norm(self.w, axis=1)
        r = self.a * wn
        tv = float(np.abs(r).sum())
        if self.path_l1:
            F = risk + self.lam * tv
        else:
            F = risk + 0.5 * self.lam * float(np.sum(self.a**2 + wn**2))
        J = risk + self.lam * tv
        return F, J, risk, wn, r, scores, active, relu, resid

    def theta(self, wn: np.ndarray) -> np.ndarray:
        out = np.where(wn[:, None] > 0, self.w / np.where(wn == 0, 1.0, wn)[:, None], self.e1)
        return out

    @_quiet_overflow
    def step(self, wn, r, active, relu, resid, collect: bool):
        """One norm-dependent update.

        Always returns the sign-flip flag; the heavier diagnostics (value
        and gradient bounds, norm domination, conic-residual payload) are
        produced only when ``collect`` — the logging stride defines where
        the trajectory invariants are audited.
        """
        n, lam, alpha = self.n, self.lam, self.cfg.alpha
        a, w = self.a, self.w
        wsafe = np.where(wn > 0, wn, 1.0)
        g_data = (relu.T @ resid) / n  # (M,)
        v = ((self.x.T @ (active * resid[:, None])) / n).T  # (M, d) data-fit w-gradient / a_j
        if self.path_l1:
            g = g_data + lam * np.sign(a) * wn
            h = (a[:, None]) * v + ((lam * np.abs(a) / wsafe * (wn > 0))[:, None]) * w
        else:
            g = g_data + lam * a
            h = a[:, None] * v + lam * w

        denom = a**2 + wn**2
        eta = alpha * np.abs(a) * wn / np.where(denom > 0, denom, 1.0)

        theta = None
        if collect or self.cfg.coincidence_tolerance > 0:
            theta = self.theta(wn)
        if self.cfg.coincidence_tolerance > 0:
            _tie_break_eta(eta, theta, self.cfg.coincidence_tolerance)

        a_new = a - eta * g
        w_new = w - eta[:, None] * h

        # one scalar probe: any inf/nan poisons the sum
        if not np.isfinite(float(a_new.sum()) + float(w_new.sum())):
            raise NumericalFailureError(
                -1, "non-finite parameter update",
                last_good=StudentParams(a.copy(), w.copy()),
            )

        diag = {"sign_flip": bool(np.any(a_new * a < 0))}

        if collect:
            # Measure-space subgradient at the atoms and its spherical
            # gradient, from the parameter-space pieces via 1-homogeneity.
            G_atoms = g_data / wsafe * (wn > 0) + lam * np.sign(r)
            sgrad = v - theta * np.einsum("ij,ij->i", theta, v)[:, None]
            diag["max_abs_G"] = float(np.max(np.abs(G_atoms))) if G_atoms.size else 0.0
            diag["max_grad"] = (
                float(np.sqrt(np.max(np.einsum("ij,ij->i", v, v)))) if v.size else 0.0
            )
            diag["aw_violation"] = bool(
                np.any(np.abs(a) > wn + 1e-12) or np.any(wn**2 > a**2 + 1 + 1e-12)
            )
            wn_new = np.linalg.norm(w_new, axis=1)
            r_new = a_new * wn_new
            theta_new = np.where(
                wn_new[:, None] > 0,
                w_new / np.where(wn_new == 0, 1.0, wn_new)[:, None],
                self.e1,
            )
            # Per-node effective conic rates recovered from eta (identical to
            # alpha up to the tie-break perturbation).
            nz = (np.abs(a) > 0) & (wn > 0)
            alpha_eff = np.where(nz, eta * denom / np.where(nz, np.abs(a) * wn, 1.0), 0.0)
            beta = alpha_eff * a**2 / np.where(denom > 0, denom, 1.0)
            # mass moves against G at rate alpha regardless of its sign:
            # r <- r - alpha G |r|  (first order)
            r_hat = r - alpha_eff * G_atoms * np.abs(r)
            theta_hat = theta - np.sign(r)[:, None] * beta[:, None] * sgrad
            diag.update(
                eta=eta,
                beta=beta,
                G_atoms=G_atoms,
                sphere_grad_norm=np.linalg.norm(sgrad, axis=1),
                delta_r=r_new - r_hat,
                delta_theta_norm=np.linalg.norm(theta_new - theta_hat, axis=1),
            )

        self.a = a_new
        self.w = w_new
        return diag


def gd_step(params: StudentParams, data: Dataset, cfg: TrainConfig) -> StudentParams:
    """A single norm-dependent update of every node."""
    if data.d != params.d:
        raise InvalidArgumentError("data and parameters live in different dimensions")
    loop = _Loop(data, params, cfg)
    _, _, _, wn, r, scores, active, relu, resid = loop.state()
    try:
        loop.step(wn, r, active, relu, resid, collect=False)
    except NumericalFailureError as err:
        raise NumericalFailureError(0, str(err), last_good=err.last_good) from None
    return StudentParams(loop.a, loop.w)


def train(
    data: Dataset,
    cfg: TrainConfig,
    params0: StudentParams | None = None,
) -> TrainResult:
    """Run norm-dependent gradient descent for ``cfg.max_iters`` steps.

    Stops early when the relative decrease of F over the last
    ``PLATEAU_WINDOW`` iterations falls below ``PLATEAU_RTOL``.  Records a
    trajectory snapshot at iteration 0, every ``cfg.log_every`` iterations
    and at the final iteration; every snapshot except the last carries the
    conic-update residuals of the step taken from it.
    """
    if params0 is None:
        params0 = init_params(cfg.M, data.d, cfg.seed)
    elif params0.width != cfg.M:
        raise InvalidArgumentError(
            f"params0 has width {params0.width} but the config says M={cfg.M}"
        )
    loop = _Loop(data, params0, cfg)
    records: list[TrajectoryRecord] = []
    result = TrainResult(records, params0, 0, False)

    K = cfg.max_iters
    f_window: list[float] = []
    prev_F = np.inf
    k = 0
    while True:
        F, J, risk, wn, r, scores, active, relu, resid = loop.state()
        result.max_F_seen = max(result.max_F_seen, F)
        c1, c2 = gradient_bound_constants(result.max_F_seen, loop.n, loop.lam)
        result.final_C1, result.final_C2 = c1, c2
        if F > prev_F + 1e-9:
            result.monotonicity_breaks += 1
        prev_F = F

        last = k >= K
        if not last and f_window and len(f_window) >= PLATEAU_WINDOW:
            f_old = f_window[-PLATEAU_WINDOW]
            if (f_old - F) < PLATEAU_RTOL * max(abs(f_old), 1e-300):
                last = True
        f_window.append(F)
        if len(f_window) > PLATEAU_WINDOW + 1:
            f_window.pop(0)

        logged = last or k == 0 or (k % cfg.log_every == 0)
        if not logged:
            try:
                diag = loop.step(wn, r, active, relu, resid, collect=False)
            except NumericalFailureError as err:
                raise NumericalFailureError(k, str(err), last_good=err.last_good) from None
            _tally(result, diag, c1, c2)
            k += 1
            continue

        theta = loop.theta(wn)
        base = dict(
            k=k, F=F, J=J, risk=risk, a=loop.a.copy(), w_norm=wn, r=r, theta=theta,
            sign_changed=False,
        )
        if last:
            records.append(TrajectoryRecord(**base))
            break
        try:
            diag = loop.step(wn, r, active, relu, resid, collect=True)
        except NumericalFailureError as err:
            records.append(TrajectoryRecord(**base))
            raise NumericalFailureError(k, str(err), last_good=err.last_good) from None
        _tally(result, diag, c1, c2)
        base["sign_changed"] = diag["sign_flip"]
        records.append(
            TrajectoryRecord(
                **base,
                eta=diag["eta"],
                beta=diag["beta"],
                G_atoms=diag["G_atoms"],
                sphere_grad_norm=diag["sphere_grad_norm"],
                delta_r=diag["delta_r"],
                delta_theta_norm=diag["delta_theta_norm"],
            )
        )
        k += 1

    result.params = StudentParams(loop.a, loop.w)
    result.iterations_run = k
    result.stopped_early = k < K
    return result


def _tally(result: TrainResult, diag: dict, c1: float, c2: float) -> None:
    result.sign_change_steps += int(diag["sign_flip"])
    if "aw_violation" in diag:
        result.aw_violations += int(diag["aw_violation"])
        result.value_bound_violations += int(diag["max_abs_G"] > c1)
        result.grad_bound_violations += int(diag["max_grad"] > c2)
