"""Command-line entry point.

Subcommands: train, sweep, certify, fig1, fig2, fig3.  All of them take
--out for the output directory, --seed for a global seed offset and
--force to overwrite a non-empty output directory; train and sweep read an
experiment config JSON via --config (schema documented in the README).
Exit codes: 0 success, 2 configuration error, 3 rank-deficient
certificate, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .harness import (
    DataSpec,
    ExperimentConfig,
    TeacherSpec,
    certify,
    lambda_continuation_sweep,
    reproduce_figure,
    run_experiment,
    sweep,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_RANK_DEFICIENT = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--seed", type=int, default=0, help="seed offset added to all seeds")
    parser.add_argument("--force", action="store_true", help="overwrite a non-empty output dir")
    parser.add_argument("--log-every", type=int, help="override trajectory logging stride")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsb",
        description="Teacher-student recovery experiments for two-layer ReLU networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run an experiment config")
    p_train.add_argument("--config", required=True, help="experiment config JSON")
    _add_common(p_train)

    p_sweep = sub.add_parser("sweep", help="run a config across one axis")
    p_sweep.add_argument("--config", required=True, help="experiment config JSON")
    p_sweep.add_argument("--axis", required=True, choices=["lambda", "M", "alpha", "seed"])
    p_sweep.add_argument(
        "--values", required=True, help="comma-separated axis values, e.g. 4e-3,2e-3,1e-3"
    )
    p_sweep.add_argument(
        "--continuation", action="store_true",
        help="lambda axis only: sweep decreasing values with warm starts",
    )
    p_sweep.add_argument(
        "--warm-iters", type=int, default=None,
        help="iteration cap for warm-started continuation runs",
    )
    _add_common(p_sweep)

    p_cert = sub.add_parser("certify", help="pre-certificate construction and report")
    p_cert.add_argument("--m", type=int, default=2)
    p_cert.add_argument("--d", type=int, default=4)
    p_cert.add_argument("--n", type=int, default=2000)
    p_cert.add_argument("--directions", choices=["canonical", "random"], default="random")
    p_cert.add_argument("--probes", type=int, default=10_000)
    p_cert.add_argument("--cap-radius", type=float, default=1e-3)
    _add_common(p_cert)

    for fig in ("fig1", "fig2", "fig3"):
        p_fig = sub.add_parser(fig, help=f"reproduce the canonical {fig} run")
        _add_common(p_fig)

    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_json_file(args.config)
    if args.seed:
        config = config.shifted(args.seed)
    if args.out:
        config = _with_out(config, args.out)
    if args.log_every:
        from dataclasses import replace

        config = replace(
            config, train=tuple(replace(t, log_every=args.log_every) for t in config.train)
        )
    return config


def _with_out(config: ExperimentConfig, out: str) -> ExperimentConfig:
    from dataclasses import replace

    return replace(config, out_dir=out)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            artifacts = run_experiment(_load_config(args), force=args.force)
        elif args.command == "sweep":
            values = [v for v in args.values.split(",") if v]
            if not values:
                raise ConfigError("values", "need at least one value")
            typed = [int(v) if args.axis in ("M", "seed") else float(v) for v in values]
            if args.continuation:
                if args.axis != "lambda":
                    raise ConfigError("continuation", "only supported for the lambda axis")
                artifacts = lambda_continuation_sweep(
                    _load_config(args), typed, warm_iters=args.warm_iters, force=args.force
                )
            else:
                artifacts = sweep(_load_config(args), args.axis, typed, force=args.force)
        elif args.command == "certify":
            artifacts = certify(
                TeacherSpec(m=args.m, d=args.d, directions=args.directions, seed=args.seed),
                DataSpec(n=args.n, seed=args.seed),
                probes=args.probes,
                cap_radius=args.cap_radius,
                out_dir=args.out or "runs/certify",
                force=args.force,
            )
            if artifacts.status == "rank-deficient":
                print("certificate: rank-deficient feature matrix", file=sys.stderr)
                return EXIT_RANK_DEFICIENT
        else:  # fig1 | fig2 | fig3
            artifacts = reproduce_figure(
                args.command, args.out or f"runs/{args.command}", seed=args.seed, force=args.force
            )
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except FileExistsError as err:
        print(str(err), file=sys.stderr)
        return EXIT_ERROR
    print(json.dumps({"out_dir": str(artifacts.out_dir), "status": artifacts.status,
                      "wall_clock_s": round(artifacts.wall_clock_s, 3),
                      "files": [str(p) for p in artifacts.all_paths()]}, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
