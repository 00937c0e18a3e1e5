"""Teacher / student network representations and exact population distances.

A two-layer ReLU network ``x -> sum_j a_j relu(<w_j, x>)`` is 1-homogeneous
in each ``w_j``, so it is equally described by the signed atomic measure
``sum_j r_j delta_{theta_j}`` on the sphere with ``r_j = a_j ||w_j||`` and
``theta_j = w_j / ||w_j||``.  This module holds both representations, the
planted orthogonal teacher that generates data, and the exact
L2(P_X) distance between two networks computed from the arc-cosine kernel
(no sampling involved).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .geometry import normalize_rows, relu_kernel_angle, sample_uniform_sphere

__all__ = [
    "TeacherNetwork",
    "StudentParams",
    "AtomicMeasure",
    "Dataset",
    "CANONICAL",
    "forward_params",
    "forward_measure",
    "to_measure",
    "make_teacher",
    "make_dataset",
    "analytic_l2_distance",
]

#: Sentinel seed: teacher directions are the first m canonical basis vectors.
CANONICAL = "canonical"

_ORTHO_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TeacherNetwork:
    """Planted sparse network: m orthonormal directions with positive amplitudes."""

    directions: np.ndarray  # (m, d), orthonormal rows
    amplitudes: np.ndarray  # (m,), strictly positive

    def __post_init__(self):
        object.__setattr__(self, "directions", _readonly(self.directions))
        object.__setattr__(self, "amplitudes", _readonly(self.amplitudes))
        if self.directions.ndim != 2:
            raise InvalidArgumentError("directions must be a (m, d) array")
        m, d = self.directions.shape
        if self.amplitudes.shape != (m,):
            raise InvalidArgumentError("amplitudes must have one entry per direction")
        if m > d:
            raise InvalidArgumentError(
                f"cannot have {m} pairwise-orthogonal directions in dimension {d}"
            )
        if not np.all(self.amplitudes > 0):
            raise InvalidArgumentError("amplitudes must be strictly positive")
        gram = self.directions @ self.directions.T
        if np.max(np.abs(gram - np.eye(m))) > _ORTHO_TOL:
            raise InvalidArgumentError("directions must be orthonormal")

    @property
    def m(self) -> int:
        return self.directions.shape[0]

    @property
    def d(self) -> int:
        return self.directions.shape[1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the teacher at one point (d,) or a batch (n, d)."""
        x = np.asarray(x, dtype=float)
        return np.maximum(x @ self.directions.T, 0.0) @ self.amplitudes

    def measure(self) -> "AtomicMeasure":
        return AtomicMeasure(self.amplitudes, self.directions)

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "m": self.m,
                "directions": _encode_floats(self.directions.ravel()),
                "amplitudes": _encode_floats(self.amplitudes),
            }
        )

    @staticmethod
    def from_json(text: str) -> "TeacherNetwork":
        obj = json.loads(text)
        dirs = _decode_floats(obj["directions"]).reshape(obj["m"], obj["d"])
        return TeacherNetwork(dirs, _decode_floats(obj["amplitudes"]))


@dataclass(frozen=True)
class StudentParams:
    """Trainable (a_j, w_j) pairs of the student network."""

    a: np.ndarray  # (M,)
    w: np.ndarray  # (M, d)

    def __post_init__(self):
        object.__setattr__(self, "a", _readonly(self.a))
        object.__setattr__(self, "w", _readonly(self.w))
        if self.a.ndim != 1 or self.w.ndim != 2 or self.a.shape[0] != self.w.shape[0]:
            raise InvalidArgumentError("need a of shape (M,) and w of shape (M, d)")

    @property
    def width(self) -> int:
        return self.a.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]

    def w_norms(self) -> np.ndarray:
        return np.linalg.norm(self.w, axis=1)


@dataclass(frozen=True)
class AtomicMeasure:
    """Signed discrete measure sum_j r_j delta_{theta_j} on the sphere."""

    masses: np.ndarray  # (J,), signed
    locations: np.ndarray  # (J, d), unit rows

    def __post_init__(self):
        object.__setattr__(self, "masses", _readonly(self.masses))
        object.__setattr__(self, "locations", _readonly(self.locations))
        if self.masses.ndim != 1 or self.locations.ndim != 2:
            raise InvalidArgumentError("need masses (J,) and locations (J, d)")
        if self.masses.shape[0] != self.locations.shape[0]:
            raise InvalidArgumentError("one location per mass required")
        if self.masses.size:
            norms = np.linalg.norm(self.locations, axis=1)
            if np.max(np.abs(norms - 1.0)) > 1e-8:
                raise InvalidArgumentError("atom locations must be unit vectors")

    @property
    def size(self) -> int:
        return self.masses.shape[0]

    @property
    def d(self) -> int:
        return self.locations.shape[1]

    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.masses)))

    def positive_part(self) -> "AtomicMeasure":
        keep = self.masses > 0
        return AtomicMeasure(self.masses[keep], self.locations[keep])

    def negative_part(self) -> "AtomicMeasure":
        """Atoms of the negative part, with positive masses (Hahn-Jordan)."""
        keep = self.masses < 0
        return AtomicMeasure(-self.masses[keep], self.locations[keep])

    @staticmethod
    def empty(d: int) -> "AtomicMeasure":
        return AtomicMeasure(np.zeros(0), np.zeros((0, d)))


@dataclass(frozen=True)
class Dataset:
    """Inputs on the sphere with (noiseless) teacher targets."""

    x: np.ndarray  # (n, d), unit rows
    y: np.ndarray  # (n,)

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly(self.x))
        object.__setattr__(self, "y", _readonly(self.y))
        if self.x.ndim != 2 or self.y.ndim != 1 or self.x.shape[0] != self.y.shape[0]:
            raise InvalidArgumentError("need x of shape (n, d) and y of shape (n,)")
        if self.x.shape[0] == 0:
            raise InvalidArgumentError("dataset must be nonempty")
        norms = np.linalg.norm(self.x, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-8:
            raise InvalidArgumentError("inputs must lie on the unit sphere")

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    def to_json(self) -> str:
        return json.dumps(
            {
                "d": self.d,
                "n": self.n,
                "inputs": _encode_floats(self.x.ravel()),
                "targets": _encode_floats(self.y),
            }
        )

    @staticmethod
    def from_json(text: str) -> "Dataset":
        obj = json.loads(text)
        x = _decode_floats(obj["inputs"]).reshape(obj["n"], obj["d"])
        return Dataset(x, _decode_floats(obj["targets"]))


def _encode_floats(values) -> list[str]:
    # 17 significant decimal digits round-trip any float64 bit-exactly.
    return [format(float(v), ".17g") for v in np.asarray(values).ravel()]


def _decode_floats(values) -> np.ndarray:
    return np.array([float(v) for v in values], dtype=float)


def forward_params(params: StudentParams, x: np.ndarray) -> float | np.ndarray:
    """sum_j a_j relu(<w_j, x>) at one point (d,) or a batch (n, d)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != params.d:
        raise InvalidArgumentError(
            f"input dimension {x.shape[-1]} does not match parameters ({params.d})"
        )
    out = np.maximum(x @ params.w.T, 0.0) @ params.a
    return float(out) if out.ndim == 0 else out


def forward_measure(measure: AtomicMeasure, x: np.ndarray) -> float | np.ndarray:
    """sum_j r_j relu(<theta_j, x>) at one point (d,) or a batch (n, d)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != measure.d:
        raise InvalidArgumentError(
            f"input dimension {x.shape[-1]} does not match measure ({measure.d})"
        )
    if measure.size == 0:
        out = np.zeros(x.shape[:-1])
        return float(out) if out.ndim == 0 else out
    out = np.maximum(x @ measure.locations.T, 0.0) @ measure.masses
    return float(out) if out.ndim == 0 else out


def to_measure(params: StudentParams) -> AtomicMeasure:
    """Measure representation: r_j = a_j ||w_j||, theta_j = w_j / ||w_j||.

    A node with ||w_j|| = 0 contributes a zero-mass atom at the fixed
    fallback direction e_1 (the choice of direction is immaterial since the
    mass vanishes, but a fixed one keeps runs reproducible).
    """
    norms = params.w_norms()
    return AtomicMeasure(params.a * norms, normalize_rows(params.w))


def make_teacher(m: int, d: int, amplitudes, seed) -> TeacherNetwork:
    """Build a planted teacher with orthonormal directions.

    ``seed=CANONICAL`` uses the first ``m`` canonical basis vectors
    (convenient for reproduction runs and debugging); any other seed
    orthonormalizes a random Gaussian frame.  Under uniform spherical
    inputs the two choices are statistically equivalent.
    """
    if not 1 <= m <= d:
        raise InvalidArgumentError(f"need 1 <= m <= d, got m={m}, d={d}")
    amplitudes = np.asarray(amplitudes, dtype=float)
    if amplitudes.shape != (m,):
        raise InvalidArgumentError(f"need exactly {m} amplitudes")
    if not np.all(amplitudes > 0):
        raise InvalidArgumentError("amplitudes must be strictly positive")
    if isinstance(seed, str):
        if seed != CANONICAL:
            raise InvalidArgumentError(f"unknown direction mode {seed!r}")
        directions = np.eye(d)[:m]
    else:
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.standard_normal((d, m)))
        directions = q.T
    return TeacherNetwork(directions, amplitudes)


def make_dataset(teacher: TeacherNetwork, n: int, seed) -> Dataset:
    """Sample n uniform inputs and label them exactly with the teacher."""
    if n < 1:
        raise InvalidArgumentError(f"sample count must be >= 1, got {n}")
    x = sample_uniform_sphere(teacher.d, n, seed)
    return Dataset(x, teacher.forward(x))


def analytic_l2_distance(m1: AtomicMeasure, m2: AtomicMeasure, d: int | None = None) -> float:
    """Exact squared L2(P_X) distance between the networks of two measures.

    Expands ||f(.; m1) - f(.; m2)||^2 over the signed atoms of m1 - m2 using
    the arc-cosine kernel; no sampling.  The kernel Gram matrix is positive
    semidefinite, so the result is clipped at zero against rounding.
    """
    if d is None:
        d = m1.d if m1.size else m2.d
    if (m1.size and m1.d != d) or (m2.size and m2.d != d):
        raise InvalidArgumentError("measures live in different dimensions")
    signs = np.concatenate([m1.masses, -m2.masses])
    locs = np.vstack([m1.locations, m2.locations])
    if signs.size == 0:
        return 0.0
    cosangles = np.clip(locs @ locs.T, -1.0, 1.0)
    gram = relu_kernel_angle(np.arccos(cosangles), d)
    return float(max(signs @ gram @ signs, 0.0))
