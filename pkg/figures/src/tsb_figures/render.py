"""The four figure renderers.

Each takes input CSV paths produced by the experiment harness and writes
one image.  Styling follows the conventions of the plots these mirror:
stars for planted directions, orange plus for initial node states, red
circles for final states; loss curves on log axes.  Rendering never
mutates its inputs and is deterministic given them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .reader import SchemaError, columns, read_table

__all__ = ["render", "KINDS"]

KINDS = ("dynamics2d", "loss_curves", "scaling", "certificate_landscape")


def render(kind: str, inputs: list[str | Path], out: str | Path, log_y: bool = True) -> Path:
    if kind not in KINDS:
        raise SchemaError(f"unknown figure kind {kind!r} (choose from {', '.join(KINDS)})")
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig = _RENDERERS[kind](list(inputs), log_y)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def _render_dynamics2d(inputs: list, log_y: bool):
    """Node trajectories r_j theta_j in the plane, one line per node.

    First input: per-node trajectory CSV (pernode-v1).  Optional second
    input: planted directions (teachers-v1), drawn as stars at
    amplitude * direction.
    """
    pernode = inputs[0]
    header, rows = read_table(pernode, "pernode-v1")
    cols = columns(pernode, header, rows, ["iter", "node", "r", "theta_0", "theta_1"])
    fig, ax = plt.subplots(figsize=(6, 6))
    if rows:
        nodes = np.unique(cols["node"]).astype(int)
        cmap = plt.get_cmap("tab20")
        for i, node in enumerate(nodes):
            sel = cols["node"] == node
            order = np.argsort(cols["iter"][sel])
            x = (cols["r"][sel] * cols["theta_0"][sel])[order]
            y = (cols["r"][sel] * cols["theta_1"][sel])[order]
            ax.plot(x, y, lw=0.8, color=cmap(i % 20), alpha=0.8)
            ax.plot(x[0], y[0], "+", color="tab:orange", ms=9, mew=2, zorder=3)
            ax.plot(x[-1], y[-1], "o", mfc="none", color="tab:red", ms=7, zorder=3)
    if len(inputs) > 1:
        theader, trows = read_table(inputs[1], "teachers-v1")
        tcols = columns(inputs[1], theader, trows, ["amplitude", "theta_0", "theta_1"])
        ax.plot(
            tcols["amplitude"] * tcols["theta_0"],
            tcols["amplitude"] * tcols["theta_1"],
            "*", color="black", ms=14, zorder=4,
        )
    ax.axhline(0, color="0.85", lw=0.6)
    ax.axvline(0, color="0.85", lw=0.6)
    ax.set_xlabel(r"$r_j \theta_{j,1}$")
    ax.set_ylabel(r"$r_j \theta_{j,2}$")
    ax.set_aspect("equal")
    ax.set_title("node dynamics (star = planted, + = initial, o = final)")
    return fig


def _render_loss_curves(inputs: list, log_y: bool):
    """Per-series training risk (solid) and population L2 gap (dashed)."""
    path = inputs[0]
    header, rows = read_table(path, "losscurves-v1")
    cols = columns(path, header, rows, ["series", "iter", "train_risk", "test_l2"])
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if rows:
        series = list(dict.fromkeys(cols["series"]))  # preserve order
        cmap = plt.get_cmap("tab10")
        labels = np.array(cols["series"])
        for i, name in enumerate(series):
            sel = labels == name
            order = np.argsort(cols["iter"][sel])
            its = cols["iter"][sel][order]
            ax.plot(its, cols["train_risk"][sel][order], color=cmap(i % 10),
                    label=f"{name} train")
            ax.plot(its, cols["test_l2"][sel][order], color=cmap(i % 10), ls="--",
                    label=f"{name} test")
        if log_y:
            ax.set_yscale("log")
        ax.legend(fontsize=8)
    ax.set_xlabel("iteration")
    ax.set_ylabel("loss")
    return fig


def _render_scaling(inputs: list, log_y: bool):
    """Log-log amplitude error against the swept regularization strength."""
    path = inputs[0]
    header, rows = read_table(path, "summary-v1")
    cols = columns(path, header, rows, ["value", "amplitude_error"])
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    if rows:
        x = np.asarray(cols["value"], dtype=float)
        y = np.asarray(cols["amplitude_error"], dtype=float)
        keep = (x > 0) & (y > 0)
        x, y = x[keep], y[keep]
        order = np.argsort(x)
        x, y = x[order], y[order]
        ax.loglog(x, y, "o-", color="tab:blue")
        if x.size >= 2:
            slope = np.polyfit(np.log(x), np.log(y), 1)[0]
            ref = y[0] * (x / x[0]) ** 2
            ax.loglog(x, ref, ":", color="0.5", label="slope 2 reference")
            ax.set_title(f"fitted slope {slope:.2f}")
            ax.legend(fontsize=8)
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("amplitude error")
    return fig


def _render_certificate_landscape(inputs: list, log_y: bool):
    """Sampled and population certificates over the circle (dimension 2)."""
    path = inputs[0]
    header, rows = read_table(path, "certlandscape-v1")
    cols = columns(path, header, rows, ["angle", "f_star", "f_bar"])
    fig, ax = plt.subplots(figsize=(7, 4))
    if rows:
        order = np.argsort(cols["angle"])
        ax.plot(cols["angle"][order], cols["f_star"][order], label="sampled certificate")
        ax.plot(cols["angle"][order], cols["f_bar"][order], "--", label="population certificate")
        ax.legend(fontsize=8)
    ax.axhline(1.0, color="0.8", lw=0.8)
    ax.axhline(-1.0, color="0.8", lw=0.8)
    ax.set_xlabel("angle on the circle")
    ax.set_ylabel("certificate value")
    return fig


_RENDERERS = {
    "dynamics2d": _render_dynamics2d,
    "loss_curves": _render_loss_curves,
    "scaling": _render_scaling,
    "certificate_landscape": _render_certificate_landscape,
}
