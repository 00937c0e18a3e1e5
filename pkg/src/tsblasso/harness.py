"""Experiment driver: configs, persistence, figure pipelines, sweeps.

Everything an experiment produces is derived deterministically from its
(seeded) configuration: data and teacher serialize to JSON, trajectories
and summaries to schema-versioned CSV (17 significant digits), reports to
JSON.  Re-running a config reproduces every artifact byte-for-byte.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _csvio
from .certificate import (
    dual_eval_batch,
    ndsc_report,
    population_certificate,
    precertificate,
)
from .errors import ConfigError, RankDeficientError
from .metrics import d_rho, phase_fit, recovery_report
from .model import (
    CANONICAL,
    AtomicMeasure,
    Dataset,
    TeacherNetwork,
    analytic_l2_distance,
    make_dataset,
    make_teacher,
    to_measure,
)
from .objective import RegKind, RegVariant, objective_F
from .optimizer import TrainConfig, TrainResult, init_params, invariant_safe_alpha, train

__all__ = [
    "TeacherSpec",
    "DataSpec",
    "TrainSpec",
    "DiagnosticsSpec",
    "ExperimentConfig",
    "RunArtifacts",
    "run_experiment",
    "reproduce_figure",
    "sweep",
    "lambda_continuation_sweep",
    "certify",
    "FIGURE_DEFAULTS",
]

SCHEMA_TRAJECTORY = "trajectory-v1"
SCHEMA_PERNODE = "pernode-v1"
SCHEMA_TEACHERS = "teachers-v1"
SCHEMA_LOSSCURVES = "losscurves-v1"
SCHEMA_SUMMARY = "summary-v1"
SCHEMA_LANDSCAPE = "certlandscape-v1"

ALPHA_CAP = 0.1


@dataclass(frozen=True)
class TeacherSpec:
    m: int
    d: int
    amplitudes: tuple | None = None  # None -> all ones
    directions: str = "canonical"  # "canonical" | "random"
    seed: int = 0

    def build(self) -> TeacherNetwork:
        amps = np.ones(self.m) if self.amplitudes is None else np.asarray(self.amplitudes)
        seed = CANONICAL if self.directions == "canonical" else self.seed
        return make_teacher(self.m, self.d, amps, seed)


@dataclass(frozen=True)
class DataSpec:
    n: int
    seed: int = 0


@dataclass(frozen=True)
class TrainSpec:
    M: int
    reg: str = "PathL1"  # "PathL1" | "L2"
    lam: float = 1e-3
    alpha: float | None = None  # None -> invariant-safe rate from measured C_F
    max_iters: int = 10_000
    seed: int = 0
    log_every: int = 25
    coincidence_tolerance: float = 0.0
    label: str | None = None

    def reg_kind(self) -> RegKind:
        return RegKind(RegVariant(self.reg), self.lam)

    def name(self) -> str:
        return self.label or f"M{self.M}-{self.reg}"


@dataclass(frozen=True)
class DiagnosticsSpec:
    recovery_rho: float = 0.2
    per_node_csv: bool = False
    loss_curves: bool = False
    run_phase_fit: bool = True
    d_rho_series: bool = False  # per-iteration neighborhood distance to the teacher
    certificate: bool = False
    probes: int = 10_000
    cap_radius: float = 1e-3


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    teacher: TeacherSpec
    data: DataSpec
    train: tuple[TrainSpec, ...]
    diagnostics: DiagnosticsSpec = DiagnosticsSpec()
    out_dir: str = "runs/out"

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "teacher": {
                "m": self.teacher.m,
                "d": self.teacher.d,
                "amplitudes": None
                if self.teacher.amplitudes is None
                else list(self.teacher.amplitudes),
                "directions": self.teacher.directions,
                "seed": self.teacher.seed,
            },
            "data": {"n": self.data.n, "seed": self.data.seed},
            "train": [
                {
                    "M": t.M,
                    "reg": t.reg,
                    "lambda": t.lam,
                    "alpha": t.alpha,
                    "max_iters": t.max_iters,
                    "seed": t.seed,
                    "log_every": t.log_every,
                    "coincidence_tolerance": t.coincidence_tolerance,
                    "label": t.label,
                }
                for t in self.train
            ],
            "diagnostics": {
                "recovery_rho": self.diagnostics.recovery_rho,
                "per_node_csv": self.diagnostics.per_node_csv,
                "loss_curves": self.diagnostics.loss_curves,
                "run_phase_fit": self.diagnostics.run_phase_fit,
                "d_rho_series": self.diagnostics.d_rho_series,
                "certificate": self.diagnostics.certificate,
                "probes": self.diagnostics.probes,
                "cap_radius": self.diagnostics.cap_radius,
            },
            "out_dir": self.out_dir,
        }

    @staticmethod
    def from_dict(obj: dict) -> "ExperimentConfig":
        def need(mapping, key, path, types):
            if key not in mapping:
                raise ConfigError(path, "missing required field")
            value = mapping[key]
            if not isinstance(value, types):
                raise ConfigError(path, f"expected {types}, got {type(value).__name__}")
            return value

        tid = need(obj, "experiment_id", "experiment_id", str)
        t = need(obj, "teacher", "teacher", dict)
        teacher = TeacherSpec(
            m=need(t, "m", "teacher.m", int),
            d=need(t, "d", "teacher.d", int),
            amplitudes=tuple(t["amplitudes"]) if t.get("amplitudes") else None,
            directions=t.get("directions", "canonical"),
            seed=t.get("seed", 0),
        )
        if teacher.directions not in ("canonical", "random"):
            raise ConfigError("teacher.directions", "must be 'canonical' or 'random'")
        if teacher.m < 1 or teacher.m > teacher.d:
            raise ConfigError("teacher.m", f"need 1 <= m <= d, got m={teacher.m}, d={teacher.d}")
        dspec = need(obj, "data", "data", dict)
        data = DataSpec(n=need(dspec, "n", "data.n", int), seed=dspec.get("seed", 0))
        if data.n < 1:
            raise ConfigError("data.n", "must be positive")
        raw_train = need(obj, "train", "train", list)
        if not raw_train:
            raise ConfigError("train", "need at least one training spec")
        train_specs = []
        for i, spec in enumerate(raw_train):
            path = f"train[{i}]"
            M = need(spec, "M", f"{path}.M", int)
            if M < 2:
                raise ConfigError(f"{path}.M", "must be >= 2")
            reg = spec.get("reg", "PathL1")
            if reg not in ("PathL1", "L2"):
                raise ConfigError(f"{path}.reg", "must be 'PathL1' or 'L2'")
            lam = spec.get("lambda", 1e-3)
            if lam < 0:
                raise ConfigError(f"{path}.lambda", "must be >= 0")
            alpha = spec.get("alpha")
            if alpha is not None and alpha <= 0:
                raise ConfigError(f"{path}.alpha", "must be > 0 when given")
            max_iters = spec.get("max_iters", 10_000)
            if max_iters < 0:
                raise ConfigError(f"{path}.max_iters", "must be >= 0")
            log_every = spec.get("log_every", 25)
            if log_every < 1:
                raise ConfigError(f"{path}.log_every", "must be >= 1")
            train_specs.append(
                TrainSpec(
                    M=M,
                    reg=reg,
                    lam=lam,
                    alpha=alpha,
                    max_iters=max_iters,
                    seed=spec.get("seed", 0),
                    log_every=log_every,
                    coincidence_tolerance=spec.get("coincidence_tolerance", 0.0),
                    label=spec.get("label"),
                )
            )
        dg = obj.get("diagnostics", {})
        diagnostics = DiagnosticsSpec(
            recovery_rho=dg.get("recovery_rho", 0.2),
            per_node_csv=dg.get("per_node_csv", False),
            loss_curves=dg.get("loss_curves", False),
            run_phase_fit=dg.get("run_phase_fit", True),
            d_rho_series=dg.get("d_rho_series", False),
            certificate=dg.get("certificate", False),
            probes=dg.get("probes", 10_000),
            cap_radius=dg.get("cap_radius", 1e-3),
        )
        if diagnostics.recovery_rho <= 0:
            raise ConfigError("diagnostics.recovery_rho", "must be > 0")
        return ExperimentConfig(
            experiment_id=tid,
            teacher=teacher,
            data=data,
            train=tuple(train_specs),
            diagnostics=diagnostics,
            out_dir=obj.get("out_dir", "runs/out"),
        )

    @staticmethod
    def from_json_file(path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return ExperimentConfig.from_dict(json.load(fh))

    def shifted(self, seed_offset: int) -> "ExperimentConfig":
        """All component seeds offset by a constant; used by --seed."""
        return replace(
            self,
            teacher=replace(self.teacher, seed=self.teacher.seed + seed_offset),
            data=replace(self.data, seed=self.data.seed + seed_offset),
            train=tuple(replace(t, seed=t.seed + seed_offset) for t in self.train),
        )


@dataclass
class RunArtifacts:
    config_echo: dict
    out_dir: Path
    trajectory_csvs: list[Path] = field(default_factory=list)
    per_node_csvs: list[Path] = field(default_factory=list)
    report_jsons: list[Path] = field(default_factory=list)
    other_files: list[Path] = field(default_factory=list)
    summary_csv: Path | None = None
    iterations: list[int] = field(default_factory=list)
    wall_clock_s: float = 0.0
    status: str = "ok"

    def all_paths(self) -> list[Path]:
        paths = [*self.trajectory_csvs, *self.per_node_csvs, *self.report_jsons, *self.other_files]
        if self.summary_csv:
            paths.append(self.summary_csv)
        return paths


def _prepare_out_dir(out_dir: str | Path, force: bool) -> Path:
    out = Path(out_dir)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise FileExistsError(
                f"output directory {out} is not empty; pass force=True / --force to overwrite"
            )
    out.mkdir(parents=True, exist_ok=True)
    return out


def resolve_alpha(spec: TrainSpec, teacher: TeacherNetwork, data: Dataset) -> float:
    """The step scale actually used when a spec leaves alpha unset.

    Measured C_F is the objective at initialization (the running maximum
    along a descending run); the rate is the largest one that keeps the
    sign-preservation and norm-domination guarantees, capped at 0.1.
    The full four-term theoretical bound is orders of magnitude smaller at
    experiment scale and would not converge in any reasonable iteration
    budget; it remains available as optimizer.alpha_safety_bound.
    """
    if spec.alpha is not None:
        return spec.alpha
    params0 = init_params(spec.M, data.d, spec.seed)
    c_f = objective_F(params0, data, spec.reg_kind())
    return invariant_safe_alpha(c_f, data.n, spec.lam, cap=ALPHA_CAP)


def _json_dump(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def _trajectory_rows(result: TrainResult, d_rho_series: list[float] | None):
    j_final = result.records[-1].J
    for i, rec in enumerate(result.records):
        transition = rec.eta is not None
        row = [
            rec.k,
            rec.F,
            rec.J,
            rec.risk,
            rec.J - j_final,
            float(np.min(np.abs(rec.a))),
            float(np.max(rec.beta)) if transition else "",
            float(np.max(rec.eta)) if transition else "",
            int(rec.sign_changed),
            float(np.max(np.abs(rec.delta_r))) if transition else "",
            float(np.max(rec.delta_theta_norm)) if transition else "",
        ]
        if d_rho_series is not None:
            row.append(d_rho_series[i])
        yield row


TRAJECTORY_HEADER = [
    "iter",
    "F",
    "J",
    "risk",
    "excess_proxy",
    "min_abs_a",
    "max_beta",
    "max_eta",
    "sign_violations",
    "max_abs_delta_r",
    "max_delta_theta",
]


def _write_trajectory(
    path: Path, result: TrainResult, d_rho_series: list[float] | None = None
) -> Path:
    header = TRAJECTORY_HEADER + (["d_rho_teacher"] if d_rho_series is not None else [])
    return _csvio.write_csv(
        path, SCHEMA_TRAJECTORY, header, _trajectory_rows(result, d_rho_series)
    )


def _write_pernode(path: Path, result: TrainResult, d: int) -> Path:
    header = ["iter", "node", "a", "w_norm", "r"] + [f"theta_{i}" for i in range(d)]

    def rows():
        for rec in result.records:
            for j in range(rec.a.shape[0]):
                yield [rec.k, j, rec.a[j], rec.w_norm[j], rec.r[j], *rec.theta[j]]

    return _csvio.write_csv(path, SCHEMA_PERNODE, header, rows())


def _write_teachers(path: Path, teacher: TeacherNetwork) -> Path:
    header = ["node", "amplitude"] + [f"theta_{i}" for i in range(teacher.d)]
    rows = [
        [j, teacher.amplitudes[j], *teacher.directions[j]] for j in range(teacher.m)
    ]
    return _csvio.write_csv(path, SCHEMA_TEACHERS, header, rows)


def _loss_curve_rows(series: str, result: TrainResult, teacher: TeacherNetwork):
    nu_star = teacher.measure()
    for rec in result.records:
        measure = AtomicMeasure(rec.r, rec.theta)
        test = analytic_l2_distance(measure, nu_star, teacher.d)
        yield [series, rec.k, rec.risk, rec.F, rec.J, test]


LOSSCURVES_HEADER = ["series", "iter", "train_risk", "objective_F", "objective_J", "test_l2"]


def _train_one(
    data: Dataset,
    teacher: TeacherNetwork,
    spec: TrainSpec,
    diagnostics: DiagnosticsSpec,
    params0=None,
) -> tuple[TrainResult, dict]:
    """Train a resolved spec and assemble its report payload."""
    cfg = TrainConfig(
        alpha=spec.alpha,
        reg=spec.reg_kind(),
        max_iters=spec.max_iters,
        M=spec.M,
        seed=spec.seed,
        coincidence_tolerance=spec.coincidence_tolerance,
        log_every=spec.log_every,
    )
    result = train(data, cfg, params0=params0)
    recovery = recovery_report(
        to_measure(result.params), teacher, diagnostics.recovery_rho, teacher.d
    )
    phase = None
    if diagnostics.run_phase_fit and len(result.records) >= 100:
        phase = phase_fit(result.records)
    report = {
        "series": spec.name(),
        "alpha": spec.alpha,
        "lambda": spec.lam,
        "reg": spec.reg,
        "M": spec.M,
        "iterations_run": result.iterations_run,
        "stopped_early": result.stopped_early,
        "final_F": result.records[-1].F,
        "final_J": result.records[-1].J,
        "final_risk": result.records[-1].risk,
        "sign_change_steps": result.sign_change_steps,
        "aw_violations": result.aw_violations,
        "value_bound_violations": result.value_bound_violations,
        "grad_bound_violations": result.grad_bound_violations,
        "monotonicity_breaks": result.monotonicity_breaks,
        "max_F_seen": result.max_F_seen,
        "C1": result.final_C1,
        "C2": result.final_C2,
        "recovery": recovery.to_dict(),
        "phase_fit": phase.to_dict() if phase is not None else None,
    }
    return result, report


def run_experiment(config: ExperimentConfig, force: bool = False) -> RunArtifacts:
    """Generate teacher and data, train every spec, write all artifacts."""
    t_start = time.perf_counter()
    out = _prepare_out_dir(config.out_dir, force)
    teacher = config.teacher.build()
    data = make_dataset(teacher, config.data.n, config.data.seed)

    resolved_train = []
    for spec in config.train:
        resolved_train.append(replace(spec, alpha=resolve_alpha(spec, teacher, data)))
    echo_config = replace(config, train=tuple(resolved_train))
    echo = echo_config.to_dict()

    artifacts = RunArtifacts(config_echo=echo, out_dir=out)
    _json_dump(out / "config.json", echo)
    (out / "teacher.json").write_text(teacher.to_json())
    (out / "dataset.json").write_text(data.to_json())
    artifacts.other_files += [out / "config.json", out / "teacher.json", out / "dataset.json"]
    artifacts.other_files.append(_write_teachers(out / "teachers.csv", teacher))

    loss_rows = []
    for spec in resolved_train:
        result, report = _train_one(data, teacher, spec, config.diagnostics)
        name = spec.name()
        artifacts.iterations.append(result.iterations_run)
        series = None
        if config.diagnostics.d_rho_series:
            nu_teacher = teacher.measure()
            series = [
                d_rho(
                    AtomicMeasure(rec.r, rec.theta), nu_teacher,
                    config.diagnostics.recovery_rho,
                ).total
                for rec in result.records
            ]
        artifacts.trajectory_csvs.append(
            _write_trajectory(out / f"trajectory_{name}.csv", result, series)
        )
        if config.diagnostics.per_node_csv:
            artifacts.per_node_csvs.append(
                _write_pernode(out / f"pernode_{name}.csv", result, data.d)
            )
        if config.diagnostics.loss_curves:
            loss_rows.extend(_loss_curve_rows(name, result, teacher))
        artifacts.report_jsons.append(_json_dump(out / f"report_{name}.json", report))

    if config.diagnostics.loss_curves:
        artifacts.other_files.append(
            _csvio.write_csv(out / "losscurves.csv", SCHEMA_LOSSCURVES, LOSSCURVES_HEADER, loss_rows)
        )
    if config.diagnostics.certificate:
        cert_art = certify(
            config.teacher,
            config.data,
            probes=config.diagnostics.probes,
            cap_radius=config.diagnostics.cap_radius,
            out_dir=out / "certificate",
            force=True,
        )
        artifacts.report_jsons += cert_art.report_jsons
        artifacts.other_files += cert_art.other_files

    artifacts.wall_clock_s = time.perf_counter() - t_start
    return artifacts


# Canonical figure configurations.  The underlying experiments do not pin
# the optimization horizon; these values are chosen so that the runs
# converge at desk scale on a single core.
FIGURE_DEFAULTS = {
    "fig1": dict(
        m=2, d=2, directions="canonical", n=100, M=15, lam=1e-3,
        max_iters=100_000, log_every=50, data_seed=101, train_seed=201,
    ),
    "fig2": dict(
        m=5, d=5, directions="random", n=100, Ms=(5, 10, 100), lam=1e-3,
        max_iters=50_000, log_every=25, teacher_seed=301, data_seed=301, train_seed=401,
    ),
    "fig3": dict(
        m=5, d=5, directions="random", n=100, M=10, lam=1e-3,
        max_iters=50_000, log_every=25, teacher_seed=303, data_seed=303, train_seed=403,
    ),
}


def figure_config(which: str, out_dir: str | Path, seed: int = 0) -> ExperimentConfig:
    if which not in FIGURE_DEFAULTS:
        raise ConfigError("figure", f"unknown figure {which!r} (choose fig1, fig2, fig3)")
    fd = FIGURE_DEFAULTS[which]
    if which == "fig1":
        teacher = TeacherSpec(m=fd["m"], d=fd["d"], directions="canonical")
        trains = (
            TrainSpec(
                M=fd["M"], lam=fd["lam"], max_iters=fd["max_iters"],
                seed=fd["train_seed"] + seed, log_every=fd["log_every"], label="fig1",
            ),
        )
        diagnostics = DiagnosticsSpec(per_node_csv=True, loss_curves=True, recovery_rho=0.2)
    elif which == "fig2":
        teacher = TeacherSpec(
            m=fd["m"], d=fd["d"], directions="random", seed=fd["teacher_seed"] + seed
        )
        trains = tuple(
            TrainSpec(
                M=M, lam=fd["lam"], max_iters=fd["max_iters"],
                seed=fd["train_seed"] + seed, log_every=fd["log_every"], label=f"M{M}",
            )
            for M in fd["Ms"]
        )
        diagnostics = DiagnosticsSpec(loss_curves=True, recovery_rho=0.2)
    else:
        teacher = TeacherSpec(
            m=fd["m"], d=fd["d"], directions="random", seed=fd["teacher_seed"] + seed
        )
        trains = tuple(
            TrainSpec(
                M=fd["M"], reg=reg, lam=fd["lam"], max_iters=fd["max_iters"],
                seed=fd["train_seed"] + seed, log_every=fd["log_every"], label=reg,
            )
            for reg in ("PathL1", "L2")
        )
        diagnostics = DiagnosticsSpec(loss_curves=True, recovery_rho=0.2)
    return ExperimentConfig(
        experiment_id=which,
        teacher=teacher,
        data=DataSpec(n=fd["n"], seed=fd["data_seed"] + seed),
        train=trains,
        diagnostics=diagnostics,
        out_dir=str(out_dir),
    )


def reproduce_figure(
    which: str, out_dir: str | Path, seed: int = 0, force: bool = False
) -> RunArtifacts:
    """Run the canonical seeded configuration behind one of the figures."""
    return run_experiment(figure_config(which, out_dir, seed), force=force)


SUMMARY_HEADER = [
    "axis", "value", "seed", "m", "d", "n", "M", "lambda", "reg", "alpha",
    "max_iters", "iters_run", "final_F", "final_J", "final_risk",
    "amplitude_error", "direction_error", "max_direction_rms", "stray_mass",
    "k0", "linear_rate", "fit_r2", "phase_failed", "status",
]


def _apply_axis(config: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "lambda":
        trains = tuple(replace(t, lam=float(value)) for t in config.train)
        return replace(config, train=trains)
    if axis == "M":
        iv = int(value)
        if iv < 2:
            raise ConfigError("sweep.values", f"M must be >= 2, got {iv}")
        return replace(config, train=tuple(replace(t, M=iv) for t in config.train))
    if axis == "alpha":
        return replace(config, train=tuple(replace(t, alpha=float(value)) for t in config.train))
    if axis == "seed":
        return config.shifted(int(value))
    raise ConfigError("sweep.axis", f"unknown axis {axis!r} (lambda, M, alpha, seed)")


def _sweep_worker(args: tuple) -> list[list]:
    config_dict, axis, value = args
    config = ExperimentConfig.from_dict(config_dict)
    rows = []
    try:
        artifacts = run_experiment(config, force=True)
    except Exception as err:  # a failing run must not abort its siblings
        for spec in config.train:
            rows.append(
                [axis, value, spec.seed, config.teacher.m, config.teacher.d,
                 config.data.n, spec.M, spec.lam, spec.reg, spec.alpha or "",
                 spec.max_iters, 0, "", "", "", "", "", "", "", "", "", "", "",
                 f"error:{type(err).__name__}"]
            )
        return rows
    for spec, report_path in zip(config.train, artifacts.report_jsons):
        rep = json.loads(Path(report_path).read_text())
        rec, ph = rep["recovery"], rep["phase_fit"]
        rows.append(
            [axis, value, spec.seed, config.teacher.m, config.teacher.d,
             config.data.n, rep["M"], rep["lambda"], rep["reg"], rep["alpha"],
             spec.max_iters, rep["iterations_run"], rep["final_F"], rep["final_J"],
             rep["final_risk"], rec["amplitude_error"], rec["direction_error"],
             rec["max_direction_rms"], rec["stray_mass"],
             ph["k0"] if ph else "", ph["linear_rate"] if ph else "",
             ph["fit_r2"] if ph else "", ph["failed"] if ph else "", "ok"]
        )
    return rows


def max_workers() -> int:
    env = os.environ.get("TSB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep(
    config: ExperimentConfig,
    axis: str,
    values: list,
    force: bool = False,
) -> RunArtifacts:
    """Run the config once per axis value; aggregate one summary CSV.

    Runs are independent (each owns a subdirectory of the sweep output
    directory) and fan out to a process pool capped by the TSB_THREADS
    environment variable.  A failing run is recorded in its summary row and
    does not abort the others.
    """
    if not values:
        raise ConfigError("sweep.values", "need at least one value")
    t_start = time.perf_counter()
    out = _prepare_out_dir(config.out_dir, force)
    jobs = []
    for value in values:
        sub = _apply_axis(config, axis, value)
        sub = replace(sub, out_dir=str(out / f"{axis}_{value}"))
        jobs.append((sub.to_dict(), axis, value))

    workers = min(max_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_worker, jobs))
    else:
        results = [_sweep_worker(job) for job in jobs]

    rows = [row for chunk in results for row in chunk]
    summary = _csvio.write_csv(out / "summary.csv", SCHEMA_SUMMARY, SUMMARY_HEADER, rows)
    artifacts = RunArtifacts(config_echo=config.to_dict(), out_dir=out, summary_csv=summary)
    artifacts.wall_clock_s = time.perf_counter() - t_start
    return artifacts


def lambda_continuation_sweep(
    config: ExperimentConfig,
    values: list[float],
    warm_iters: int | None = None,
    force: bool = False,
) -> RunArtifacts:
    """Sweep the regularization strength down a ladder with warm starts.

    Values are sorted in decreasing order; the first (largest) value trains
    from the mean-field initialization, every later one restarts from the
    previous solution.  Decreasing the penalty gradually this way removes
    the slowly-decaying residual atoms that a cold start at a small penalty
    would have to grind down, so the per-value solutions expose the
    penalty-proportional bias cleanly.  ``warm_iters`` caps the iteration
    count of the warm-started runs (default: the configured max_iters).
    Requires a single training spec in the config.
    """
    if not values:
        raise ConfigError("sweep.values", "need at least one value")
    if len(config.train) != 1:
        raise ConfigError("train", "continuation sweep needs exactly one training spec")
    t_start = time.perf_counter()
    out = _prepare_out_dir(config.out_dir, force)
    teacher = config.teacher.build()
    data = make_dataset(teacher, config.data.n, config.data.seed)

    rows = []
    params = None
    for i, lam in enumerate(sorted(values, reverse=True)):
        spec = replace(config.train[0], lam=float(lam))
        if i > 0 and warm_iters is not None:
            spec = replace(spec, max_iters=warm_iters)
        spec = replace(spec, alpha=resolve_alpha(spec, teacher, data))
        result, report = _train_one(data, teacher, spec, config.diagnostics, params0=params)
        params = result.params
        sub = out / f"lambda_{lam}"
        sub.mkdir(parents=True, exist_ok=True)
        _write_trajectory(sub / f"trajectory_{spec.name()}.csv", result)
        _json_dump(sub / f"report_{spec.name()}.json", report)
        rec, ph = report["recovery"], report["phase_fit"]
        rows.append(
            ["lambda", lam, spec.seed, config.teacher.m, config.teacher.d,
             config.data.n, spec.M, spec.lam, spec.reg, spec.alpha,
             spec.max_iters, report["iterations_run"], report["final_F"],
             report["final_J"], report["final_risk"], rec["amplitude_error"],
             rec["direction_error"], rec["max_direction_rms"], rec["stray_mass"],
             ph["k0"] if ph else "", ph["linear_rate"] if ph else "",
             ph["fit_r2"] if ph else "", ph["failed"] if ph else "", "ok"]
        )

    summary = _csvio.write_csv(out / "summary.csv", SCHEMA_SUMMARY, SUMMARY_HEADER, rows)
    artifacts = RunArtifacts(config_echo=config.to_dict(), out_dir=out, summary_csv=summary)
    artifacts.wall_clock_s = time.perf_counter() - t_start
    return artifacts


def certify(
    teacher: TeacherSpec,
    data: DataSpec,
    probes: int = 10_000,
    cap_radius: float = 1e-3,
    out_dir: str | Path = "runs/certify",
    force: bool = False,
    landscape_points: int = 720,
) -> RunArtifacts:
    """Build the pre-certificate for a teacher/data draw and report on it.

    Writes the non-degeneracy report (values and gradient residuals at the
    teacher directions, sampled off-support supremum, local-ray maximum),
    the sampled supremum gap to the closed-form population certificate,
    and, in dimension 2, a full landscape CSV over the circle.  A rank
    deficient feature matrix is recorded in the report with
    status "rank-deficient" rather than raised.
    """
    t_start = time.perf_counter()
    if teacher.m > teacher.d:
        raise ConfigError("teacher.m", f"m={teacher.m} exceeds d={teacher.d}")
    out = _prepare_out_dir(out_dir, force)
    net = teacher.build()
    ds = make_dataset(net, data.n, data.seed)
    artifacts = RunArtifacts(
        config_echo={
            "teacher": {
                "m": teacher.m, "d": teacher.d,
                "amplitudes": None if teacher.amplitudes is None else list(teacher.amplitudes),
                "directions": teacher.directions, "seed": teacher.seed,
            },
            "data": {"n": data.n, "seed": data.seed},
            "probes": probes,
            "cap_radius": cap_radius,
        },
        out_dir=out,
    )
    try:
        p = precertificate(net.directions, ds)
    except RankDeficientError as err:
        report = {
            "status": "rank-deficient",
            "estimated_rank": err.estimated_rank,
            "required_rank": err.full_rank,
            "condition_number": err.cond,
            "config": artifacts.config_echo,
        }
        artifacts.report_jsons.append(_json_dump(out / "certificate.json", report))
        artifacts.status = "rank-deficient"
        artifacts.wall_clock_s = time.perf_counter() - t_start
        return artifacts

    report = ndsc_report(p, net.directions, probes=probes, cap_radius=cap_radius, seed=data.seed)

    rng = np.random.default_rng(data.seed)
    from .geometry import sample_uniform_sphere as _sphere

    probe_pts = _sphere(net.d, probes, rng)
    f_star = dual_eval_batch(p, probe_pts)
    f_bar = np.array([population_certificate(t, net.directions) for t in probe_pts])
    sup_gap = float(np.max(np.abs(f_star - f_bar)))

    payload = {
        "status": "ok",
        "config": artifacts.config_echo,
        "report": report.to_dict(),
        "sup_gap_to_population": sup_gap,
    }
    artifacts.report_jsons.append(_json_dump(out / "certificate.json", payload))

    if net.d == 2:
        ts = np.linspace(0.0, 2 * np.pi, landscape_points, endpoint=False)
        pts = np.stack([np.cos(ts), np.sin(ts)], axis=1)
        vals = dual_eval_batch(p, pts)
        bars = [population_certificate(t, net.directions) for t in pts]
        artifacts.other_files.append(
            _csvio.write_csv(
                out / "landscape.csv",
                SCHEMA_LANDSCAPE,
                ["angle", "f_star", "f_bar"],
                ([t, v, b] for t, v, b in zip(ts, vals, bars)),
            )
        )
    elif net.d == 3:
        # probe dump for 3-d certificate landscapes
        vals = dual_eval_batch(p, probe_pts)
        artifacts.other_files.append(
            _csvio.write_csv(
                out / "landscape_probes.csv",
                "certprobes-v1",
                ["theta_0", "theta_1", "theta_2", "f_star", "f_bar"],
                ([*t, v, b] for t, v, b in zip(probe_pts, vals, f_bar)),
            )
        )
    artifacts.wall_clock_s = time.perf_counter() - t_start
    return artifacts
