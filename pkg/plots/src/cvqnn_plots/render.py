"""Render simulator run artifacts (CSV/JSON) into figures.

Every renderer consumes the files emitted by the simulator CLI and writes
one image.  Numbers shown on figures (AUC, fidelity, accuracy) are read
verbatim from the run's ``metrics.json`` and never recomputed here; the
CSV inputs are never modified.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = (
    "wigner_heatmap",
    "wigner_marginal",
    "cost_vs_layers",
    "cost_vs_eps",
    "loss_curve",
    "epoch_curves",
    "curvefit",
    "roc",
    "confusion",
    "loop_hist",
)


class RenderError(ValueError):
    """Input files do not match the requested figure kind."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    metrics: str | None = None
    title: str | None = None
    xlim: tuple | None = None
    ylim: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RenderError(f"unknown figure kind {self.kind!r}; known: {', '.join(KINDS)}")
        for path in self.inputs:
            if not Path(path).exists():
                raise RenderError(f"input {path} does not exist")
        if self.metrics is not None and not Path(self.metrics).exists():
            raise RenderError(f"metrics file {self.metrics} does not exist")


def _read_csv_rows(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row]
    return header, rows


def _metrics(spec: FigureSpec) -> dict:
    if spec.metrics is None:
        return {}
    with open(spec.metrics) as fh:
        return json.load(fh)


def _read_wigner_grid(path):
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise RenderError(f"{path}: missing Wigner header row")
        parts = header[1:].split()
        x_min, x_max, p_min, p_max = (float(v) for v in parts[:4])
        nx, np_ = int(parts[4]), int(parts[5])
        values = np.empty((nx, np_))
        reader = csv.reader(fh)
        for i in range(nx):
            for j in range(np_):
                values[i, j] = float(next(reader)[2])
    return (x_min, x_max, p_min, p_max), values


def _finish(fig, spec: FigureSpec) -> str:
    out = Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return str(out)


def render(spec: FigureSpec) -> str:
    """Dispatch on figure kind; returns the written image path."""
    fig = build_figure(spec)
    return _finish(fig, spec)


def build_figure(spec: FigureSpec):
    """Build (but do not save) the matplotlib figure for a spec."""
    builder = {
        "wigner_heatmap": _wigner_heatmap,
        "wigner_marginal": _wigner_marginal,
        "cost_vs_layers": _cost_scatter,
        "cost_vs_eps": _cost_scatter,
        "loss_curve": _loss_curve,
        "epoch_curves": _epoch_curves,
        "curvefit": _curvefit,
        "roc": _roc,
        "confusion": _confusion,
        "loop_hist": _loop_hist,
    }[spec.kind]
    fig = builder(spec)
    if spec.title:
        fig.suptitle(spec.title)
    return fig


def _apply_limits(ax, spec: FigureSpec):
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)


def _wigner_heatmap(spec: FigureSpec):
    (x_min, x_max, p_min, p_max), values = _read_wigner_grid(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(5, 4.2))
    vmax = np.abs(values).max()
    mesh = ax.imshow(
        values.T, origin="lower", extent=(x_min, x_max, p_min, p_max),
        cmap="RdBu_r", vmin=-vmax, vmax=vmax, aspect="equal",
    )
    fig.colorbar(mesh, ax=ax, label="W(x, p)")
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    metrics = _metrics(spec)
    if "fidelity" in metrics:
        ax.text(
            0.03, 0.97, f"fidelity = {metrics['fidelity']}",
            transform=ax.transAxes, va="top", fontsize=8,
            bbox=dict(facecolor="white", alpha=0.8, edgecolor="none"),
        )
    _apply_limits(ax, spec)
    return fig


def _wigner_marginal(spec: FigureSpec):
    fig, ax = plt.subplots(figsize=(5, 3.4))
    labels = ("target", "final", "c", "d")
    for path, label in zip(spec.inputs, labels):
        header, rows = _read_csv_rows(path)
        if header[:2] != ["x", "density"]:
            raise RenderError(f"{path}: expected columns x,density, got {header}")
        xs = np.array([float(r[0]) for r in rows])
        ds = np.array([float(r[1]) for r in rows])
        ax.plot(xs, ds, label=label if len(spec.inputs) > 1 else None)
    ax.set_xlabel("x")
    ax.set_ylabel("marginal density")
    if len(spec.inputs) > 1:
        ax.legend()
    _apply_limits(ax, spec)
    return fig


def _cost_scatter(spec: FigureSpec):
    header, rows = _read_csv_rows(spec.inputs[0])
    if len(header) < 4 or header[3] != "status":
        raise RenderError(f"{spec.inputs[0]}: expected a sweep CSV (axis,seed,cost,status)")
    axis_name, cost_name = header[0], header[2]
    pts = [(float(r[0]), float(r[2])) for r in rows if r[3] == "ok"]
    if not pts:
        raise RenderError("sweep CSV holds no successful cells")
    fig, ax = plt.subplots(figsize=(5, 3.4))
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    ax.scatter(xs, ys, s=18, alpha=0.6, label="runs")
    uniq = np.unique(xs)
    means = [ys[xs == u].mean() for u in uniq]
    ax.plot(uniq, means, "o-", color="crimson", label="mean")
    ax.set_xlabel(axis_name)
    ax.set_ylabel(cost_name)
    ax.legend()
    _apply_limits(ax, spec)
    return fig


def _loss_curve(spec: FigureSpec):
    header, rows = _read_csv_rows(spec.inputs[0])
    if header[:2] != ["step", "cost"]:
        raise RenderError(f"{spec.inputs[0]}: expected a trace CSV (step,cost,...)")
    steps = np.array([int(r[0]) for r in rows])
    costs = np.array([float(r[1]) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(steps, costs, lw=0.9)
    ax.set_xlabel("step")
    ax.set_ylabel("cost")
    ax.set_yscale("log")
    _apply_limits(ax, spec)
    return fig


def _epoch_curves(spec: FigureSpec):
    header, rows = _read_csv_rows(spec.inputs[0])
    expected = ["epoch", "train_loss", "test_loss"]
    if header[:3] != expected:
        raise RenderError(f"{spec.inputs[0]}: expected columns {expected}, got {header[:3]}")
    epochs = np.array([int(r[0]) for r in rows])
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(epochs, [float(r[1]) for r in rows], "o-", label="train loss")
    ax.plot(epochs, [float(r[2]) for r in rows], "s-", label="test loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    metrics = _metrics(spec)
    if "test_accuracy" in metrics:
        ax.text(
            0.97, 0.97, f"test accuracy = {metrics['test_accuracy']}",
            transform=ax.transAxes, va="top", ha="right", fontsize=8,
        )
    ax.legend()
    _apply_limits(ax, spec)
    return fig


def _curvefit(spec: FigureSpec):
    header, rows = _read_csv_rows(spec.inputs[0])
    if header != ["x", "target", "prediction", "split"]:
        raise RenderError(f"{spec.inputs[0]}: expected a predictions CSV, got {header}")
    fig, ax = plt.subplots(figsize=(5, 3.4))
    for split, marker in (("train", "o"), ("test", "x")):
        sel = [r for r in rows if r[3] == split]
        if not sel:
            continue
        xs = np.array([float(r[0]) for r in sel])
        ax.scatter(xs, [float(r[1]) for r in sel], s=12, alpha=0.5, marker=marker,
                   label=f"{split} data")
        order = np.argsort(xs)
        ax.plot(xs[order], np.array([float(r[2]) for r in sel])[order], lw=1.2,
                label=f"{split} fit")
    metrics = _metrics(spec)
    if "train_cost" in metrics:
        ax.text(0.03, 0.03, f"cost = {metrics['train_cost']}", transform=ax.transAxes,
                fontsize=8)
    ax.set_xlabel("x")
    ax.set_ylabel("f(x)")
    ax.legend(fontsize=7)
    _apply_limits(ax, spec)
    return fig


def _roc(spec: FigureSpec):
    header, rows = _read_csv_rows(spec.inputs[0])
    if header != ["threshold", "fpr", "tpr"]:
        raise RenderError(f"{spec.inputs[0]}: expected a ROC CSV, got {header}")
    fpr = np.array([float(r[1]) for r in rows])
    tpr = np.array([float(r[2]) for r in rows])
    fig, ax = plt.subplots(figsize=(4.2, 4))
    order = np.argsort(fpr)
    ax.plot(fpr[order], tpr[order], lw=1.4)
    ax.plot([0, 1], [0, 1], "--", color="gray", lw=0.8)
    ax.scatter([0], [1], marker="o", color="black", zorder=5, label="ideal")
    metrics = _metrics(spec)
    if "threshold" in metrics:
        thr = float(metrics["threshold"])
        thresholds = np.array([float(r[0]) for r in rows])
        idx = int(np.argmin(np.abs(thresholds - thr)))
        ax.scatter([fpr[idx]], [tpr[idx]], marker="^", color="crimson", zorder=5,
                   label="chosen threshold")
    if "auc" in metrics:
        ax.text(0.55, 0.1, f"AUC = {metrics['auc']}", transform=ax.transAxes, fontsize=9)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(fontsize=7, loc="lower right")
    _apply_limits(ax, spec)
    return fig


def _confusion(spec: FigureSpec):
    metrics = _metrics(spec) if spec.metrics else {}
    if "confusion" not in metrics:
        raise RenderError("confusion rendering needs metrics JSON with a 'confusion' entry")
    conf = np.asarray(metrics["confusion"])
    fig, ax = plt.subplots(figsize=(4, 3.6))
    ax.imshow(conf, cmap="Blues")
    names = ("genuine", "fraud")
    for i in range(2):
        for j in range(2):
            ax.text(j, i, str(conf[i, j]), ha="center", va="center",
                    color="black" if conf[i, j] < conf.max() / 2 else "white")
    ax.set_xticks([0, 1], [f"pred {n}" for n in names])
    ax.set_yticks([0, 1], [f"true {n}" for n in names])
    if "accuracy" in metrics:
        ax.set_title(f"accuracy = {metrics['accuracy']}", fontsize=9)
    return fig


def _loop_hist(spec: FigureSpec):
    header, rows = _read_csv_rows(spec.inputs[0])
    if header != ["layer", "loop_count", "frequency"]:
        raise RenderError(f"{spec.inputs[0]}: expected a loop-stats CSV, got {header}")
    layers = sorted({int(r[0]) for r in rows})
    fig, axes = plt.subplots(1, len(layers), figsize=(2.6 * len(layers), 3), squeeze=False)
    for ax, layer in zip(axes[0], layers):
        pairs = [(int(r[1]), int(r[2])) for r in rows if int(r[0]) == layer]
        loops = [p[0] for p in pairs]
        freqs = [p[1] for p in pairs]
        ax.bar(loops, freqs, width=0.8)
        ax.set_title(f"layer {layer}", fontsize=9)
        ax.set_xlabel("loops")
        # echo the bin values so the numbers are readable off the figure
        ax.legend([f"bins: {dict(pairs)}"], fontsize=6, handlelength=0)
    axes[0][0].set_ylabel("frequency")
    return fig


# ---------------------------------------------------------------------------
# whole-run rendering


RUN_FIGURES = {
    "wigner": [
        ("wigner_heatmap", ("wigner.csv",), "wigner.png"),
        ("wigner_marginal", ("wigner_marginal.csv",), "wigner_marginal.png"),
    ],
    "stateprep": [
        ("wigner_heatmap", ("wigner_target.csv",), "wigner_target.png"),
        ("wigner_heatmap", ("wigner_final.csv",), "wigner_final.png"),
        ("wigner_marginal", ("wigner_target_marginal.csv", "wigner_final_marginal.csv"),
         "wigner_marginals.png"),
        ("loss_curve", ("trace.csv",), "trace.png"),
    ],
    "curvefit": [
        ("curvefit", ("predictions.csv",), "fit.png"),
        ("loss_curve", ("trace.csv",), "trace.png"),
    ],
    "fraud": [
        ("roc", ("roc.csv",), "roc.png"),
        ("confusion", (), "confusion.png"),
        ("loss_curve", ("trace.csv",), "trace.png"),
    ],
    "mnist": [
        ("epoch_curves", ("epochs.csv",), "epochs.png"),
    ],
    "loopstats": [
        ("loop_hist", ("loopstats.csv",), "loopstats.png"),
    ],
    "sweep": [],  # resolved dynamically from the swept axis
}


def render_run(run_dir, out_dir=None) -> list:
    """Render every recognized artifact of one run directory."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise RenderError(f"{run_dir} has no manifest.json")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    task = manifest["task"]
    out_dir = Path(out_dir) if out_dir else run_dir / "figures"
    metrics = run_dir / "metrics.json"
    specs = []
    if task == "sweep":
        axis = manifest["config"].get("axis", "value")
        kind = "cost_vs_eps" if axis == "eps" else "cost_vs_layers"
        specs.append(FigureSpec(
            kind=kind, inputs=(str(run_dir / "sweep.csv"),),
            output=str(out_dir / "sweep.png"),
            metrics=str(metrics) if metrics.exists() else None,
        ))
    else:
        for kind, inputs, output in RUN_FIGURES.get(task, []):
            paths = tuple(str(run_dir / name) for name in inputs)
            if any(not Path(p).exists() for p in paths):
                continue
            specs.append(FigureSpec(
                kind=kind, inputs=paths, output=str(out_dir / output),
                metrics=str(metrics) if metrics.exists() else None,
            ))
    return [render(spec) for spec in specs]
