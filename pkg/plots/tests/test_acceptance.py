"""Secondary acceptance: render every artifact kind emitted by desk-scale runs.

Builds real (miniature) run directories through the simulator CLI, renders
each one, and checks that figure annotations echo the metrics JSON values
verbatim.
"""

import json
from pathlib import Path

import pytest

cvqnn_cli = pytest.importorskip("cvqnn.cli", reason="simulator package not installed")

from cvqnn_plots import FigureSpec, build_figure, render_run
from test_render import fig_texts


@pytest.fixture(scope="module")
def run_dirs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    jobs = {
        "wigner": ["wigner", "--state", "cat", "--alpha0", "1.5"],
        "stateprep": ["stateprep", "--target", "fock1", "--layers", "2", "--evals", "250", "--seed", "1"],
        "curvefit": ["curvefit", "--points", "20", "--steps", "8", "--layers", "2", "--seed", "2"],
        "fraud": ["fraud", "--steps", "20", "--genuine", "200", "--fraud", "24", "--seed", "3"],
        "mnist": ["mnist", "--train", "40", "--test", "20", "--epochs", "1", "--seed", "4"],
        "loopstats": ["loopstats", "--samples", "50", "--layers", "2", "--seed", "5"],
    }
    dirs = {}
    for name, args in jobs.items():
        out = base / name
        code = cvqnn_cli.main(args + ["--out", str(out)])
        assert code == 0, name
        dirs[name] = out
    sweep_out = base / "sweep"
    code = cvqnn_cli.main([
        "sweep", "--out", str(sweep_out), "--task", "curvefit", "--axis", "layers",
        "--values", "1,2", "--seeds", "1",
    ])
    assert code == 0
    dirs["sweep"] = sweep_out
    return dirs


def test_every_run_kind_renders(run_dirs):
    rendered = {}
    for name, run_dir in run_dirs.items():
        written = render_run(run_dir)
        assert written, f"no figures rendered for {name}"
        for path in written:
            assert Path(path).exists()
        rendered[name] = written
    # the desk-scale artifact kinds all appear somewhere in the set
    all_files = [Path(p).name for paths in rendered.values() for p in paths]
    for expected in ("wigner.png", "roc.png", "confusion.png", "epochs.png",
                     "loopstats.png", "fit.png", "trace.png", "sweep.png"):
        assert expected in all_files


def test_roc_annotation_equals_metrics_json(run_dirs):
    run = run_dirs["fraud"]
    metrics = json.loads((run / "metrics.json").read_text())
    spec = FigureSpec(
        "roc", (str(run / "roc.csv"),), str(run / "figures" / "roc2.png"),
        metrics=str(run / "metrics.json"),
    )
    fig = build_figure(spec)
    assert f"AUC = {metrics['auc']}" in fig_texts(fig)


def test_accuracy_annotation_equals_metrics_json(run_dirs):
    run = run_dirs["mnist"]
    metrics = json.loads((run / "metrics.json").read_text())
    spec = FigureSpec(
        "epoch_curves", (str(run / "epochs.csv"),), str(run / "figures" / "e2.png"),
        metrics=str(run / "metrics.json"),
    )
    fig = build_figure(spec)
    assert f"test accuracy = {metrics['test_accuracy']}" in fig_texts(fig)


def test_fidelity_annotation_equals_metrics_json(run_dirs):
    run = run_dirs["stateprep"]
    metrics = json.loads((run / "metrics.json").read_text())
    spec = FigureSpec(
        "wigner_heatmap", (str(run / "wigner_final.csv"),),
        str(run / "figures" / "w2.png"), metrics=str(run / "metrics.json"),
    )
    fig = build_figure(spec)
    assert f"fidelity = {metrics['fidelity']}" in fig_texts(fig)
