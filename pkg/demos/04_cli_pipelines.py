"""The experiment CLI end to end, through the Python entry points.

Runs a down-scaled experiment config, a two-point penalty sweep, and a
certificate report through the same code paths as the `tsb` command, then
renders the outputs with the figures package if it is installed.  All
artifacts land in ./demo_runs; re-running reproduces them byte-for-byte.
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

from tsblasso.cli import main as tsb

root = Path("demo_runs")
shutil.rmtree(root, ignore_errors=True)

config = {
    "experiment_id": "demo",
    "teacher": {"m": 2, "d": 3, "amplitudes": [1.0, 1.0], "directions": "random", "seed": 7},
    "data": {"n": 80, "seed": 8},
    "train": [
        {"M": 12, "reg": "PathL1", "lambda": 1e-3, "alpha": None,
         "max_iters": 20000, "seed": 9, "log_every": 100}
    ],
    "diagnostics": {"per_node_csv": True, "loss_curves": True, "recovery_rho": 0.25},
    "out_dir": str(root / "train"),
}
config_path = root / "config.json"
root.mkdir(parents=True)
config_path.write_text(json.dumps(config, indent=2))

print("== tsb train ==")
assert tsb(["train", "--config", str(config_path)]) == 0

print("== tsb sweep (lambda, warm-started continuation) ==")
assert tsb(["sweep", "--config", str(config_path), "--axis", "lambda",
            "--values", "4e-3,1e-3", "--continuation", "--warm-iters", "8000",
            "--out", str(root / "sweep")]) == 0

print("== tsb certify ==")
assert tsb(["certify", "--m", "1", "--d", "2", "--n", "600",
            "--out", str(root / "certify")]) == 0

report = json.loads((root / "train" / "report_M12-PathL1.json").read_text())
print("final J:", report["final_J"], " recovered masses:", report["recovery"]["local_mass"])

print("== figures (if installed) ==")
render = [sys.executable, "-m", "tsb_figures", "render"]
try:
    subprocess.run(
        [*render, "--kind", "loss_curves", "--in", str(root / "train" / "losscurves.csv"),
         "--out", str(root / "loss.png")],
        check=True,
    )
    subprocess.run(
        [*render, "--kind", "certificate_landscape",
         "--in", str(root / "certify" / "landscape.csv"),
         "--out", str(root / "certificate.png")],
        check=True,
    )
    print("wrote", root / "loss.png", "and", root / "certificate.png")
except (subprocess.CalledProcessError, FileNotFoundError) as err:
    print("figure rendering skipped:", err)
