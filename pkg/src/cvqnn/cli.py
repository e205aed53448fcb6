"""Experiment runner: reproduces the bundled case studies from the command line.

Each task writes a self-describing run directory: ``manifest.json`` (config
echo, package/git version, seed, artifact hashes), ``metrics.json`` (final
numbers only, no wall-clock noise, so reruns are bit-identical),
``trace.csv`` where an optimizer ran, and task-specific CSV artifacts.
Figure rendering is intentionally not done here; the companion plotting
package consumes these files.

Exit codes: 0 success, 2 configuration error, 3 runtime/numeric error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import subprocess
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, data, hybrid, layers, meas, nonlin, optim, targets
from .errors import SimulatorError
from .fock import vacuum
from .layers import SimConfig, standard_layer
from .nonlin import Detector

DESK, PAPER = "desk", "paper"

TASK_DEFAULTS = {
    "stateprep": {
        DESK: dict(target="fock1", layers=6, cutoff=6, evals=5000, seed=7,
                   alpha0=1.5, theta=0.0, eps=0.1, restarts=""),
        PAPER: dict(target="fock1", layers=6, cutoff=6, evals=5000, seed=7,
                    alpha0=1.5, theta=0.0, eps=0.1, restarts=""),
    },
    "curvefit": {
        DESK: dict(eps=0.1, layers=6, points=100, steps=1000, cutoff=6,
                   learning_rate=0.05, seed=42),
        PAPER: dict(eps=0.1, layers=6, points=100, steps=1000, cutoff=6,
                    learning_rate=0.05, seed=42),
    },
    "fraud": {
        DESK: dict(source="synthetic", genuine=2000, fraud=200, separation=3.0,
                   classical=2, quantum=4, cutoff=6, steps=1500, batch=24,
                   learning_rate=0.01, seed=11),
        PAPER: dict(source="synthetic", genuine=2000, fraud=200, separation=3.0,
                    classical=2, quantum=4, cutoff=8, steps=10000, batch=24,
                    learning_rate=0.01, seed=11),
    },
    "mnist": {
        DESK: dict(classical=1, quantum=3, cutoff=4, epochs=20, batch=16,
                   train=2000, test=500, learning_rate=0.001, decay_every=5000,
                   decay_factor=0.9, downsample=2, model=1, seed=21, data_dir=""),
        PAPER: dict(classical=1, quantum=5, cutoff=4, epochs=100, batch=16,
                    train=60000, test=10000, learning_rate=0.001, decay_every=5000,
                    decay_factor=0.9, downsample=1, model=1, seed=21, data_dir=""),
    },
    "loopstats": {
        DESK: dict(checkpoint="", source="synthetic", genuine=200, fraud=20,
                   separation=3.0, samples=200, layers=2, seed=33, detector="threshold"),
        PAPER: dict(checkpoint="", source="synthetic", genuine=200, fraud=20,
                    separation=3.0, samples=1000, layers=4, seed=33, detector="threshold"),
    },
    "wigner": {
        DESK: dict(state="cat", alpha0=1.5, theta=0.0, n=1, eps=0.1, alpha=1.0,
                   cutoff=10, bound=6.0, points=121),
        PAPER: dict(state="cat", alpha0=1.5, theta=0.0, n=1, eps=0.1, alpha=1.0,
                    cutoff=10, bound=6.0, points=121),
    },
}

STATEPREP_PRESETS = {
    # per-target layer/cutoff/budget defaults and restart schedules
    "fock1": dict(layers=6, cutoff=6, evals=5000, restarts=""),
    "cat": dict(layers=8, cutoff=10, evals=4000, restarts="3000:0.2,3000:0.1"),
    "gkp": dict(layers=15, cutoff=15, evals=15000, restarts="5000:0.2,5000:0.1"),
}


def _git_revision() -> str:
    try:
        out = subprocess.run(
            ["git", "rev-parse", "HEAD"], capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


class RunDir:
    """Collects artifacts and finalizes the manifest."""

    def __init__(self, outdir, task: str, config: dict):
        self.dir = Path(outdir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.task = task
        self.config = config
        self.artifacts: dict[str, Path] = {}

    def path(self, name: str) -> Path:
        p = self.dir / name
        self.artifacts[name] = p
        return p

    def write_json(self, name: str, payload: dict) -> Path:
        p = self.path(name)
        with open(p, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return p

    def finalize(self) -> Path:
        manifest = {
            "task": self.task,
            "config": self.config,
            "seed": self.config.get("seed"),
            "version": {"package": __version__, "revision": _git_revision()},
            "artifacts": {
                name: {"path": str(p.name), "sha256": _sha256(p)}
                for name, p in sorted(self.artifacts.items())
            },
            "status": "ok",
        }
        path = self.dir / "manifest.json"
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _parse_restarts(text: str):
    if not text:
        return ()
    stages = []
    for part in text.split(","):
        evals, step = part.split(":")
        stages.append((int(evals), float(step)))
    return tuple(stages)


def _make_target(cfg: dict, cutoff: int):
    name = cfg["target"]
    if name == "fock1":
        return targets.fock(1, cutoff)
    if name.startswith("fock"):
        return targets.fock(int(name[4:]), cutoff)
    if name == "cat":
        return targets.cat(cfg["alpha0"], cfg["theta"], cutoff)
    if name == "gkp":
        return targets.gkp_real(cfg["eps"], cutoff)
    raise SimulatorError(f"unknown target {name!r}")


def _emit_wigner(run: RunDir, stem: str, state):
    grid = meas.wigner(state)
    meas.write_wigner_csv(grid, run.path(f"{stem}.csv"))
    xs, marg = meas.wigner_x_marginal(grid)
    with open(run.path(f"{stem}_marginal.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "density"])
        for x, d in zip(xs, marg):
            writer.writerow([repr(float(x)), repr(float(d))])
    return grid


# ---------------------------------------------------------------------------
# task runners


def run_stateprep(cfg: dict, outdir) -> dict:
    for key, value in STATEPREP_PRESETS.get(cfg["target"], {}).items():
        if not cfg.get(f"_explicit_{key}", False):
            cfg[key] = value if key != "restarts" else cfg.get("restarts") or value
    run = RunDir(outdir, "stateprep", cfg)
    cutoff = cfg["cutoff"]
    target = _make_target(cfg, cutoff)
    network = [standard_layer(1) for _ in range(cfg["layers"])]
    config = SimConfig(cutoff=cutoff)
    objective = optim.state_prep_objective(network, target, config)
    zeta0 = layers.init_params(network, cfg["seed"])
    nm_cfg = optim.NelderMeadConfig(
        max_evals=cfg["evals"], restarts=_parse_restarts(cfg.get("restarts", "")),
    )
    zeta, trace = optim.nelder_mead(objective, zeta0, nm_cfg)
    trace.to_csv(run.path("trace.csv"))
    out = layers.forward(network, zeta, vacuum(1, cutoff), config=config)
    final = out.state.normalize()
    fidelity = meas.fidelity(final, target)
    _emit_wigner(run, "wigner_target", target)
    _emit_wigner(run, "wigner_final", final)
    targets.write_amplitudes_csv(target, run.path("target_amplitudes.csv"))
    targets.write_amplitudes_csv(final, run.path("final_amplitudes.csv"))
    metrics = {
        "target": cfg["target"],
        "layers": cfg["layers"],
        "cutoff": cutoff,
        "fidelity": fidelity,
        "cost": trace.summary()["best_cost"],
        "success_probability": out.success_probability,
        **trace.summary(),
    }
    run.write_json("metrics.json", metrics)
    run.finalize()
    return metrics


def run_curvefit(cfg: dict, outdir) -> dict:
    run = RunDir(outdir, "curvefit", cfg)
    train = data.gen_noisy_sine(cfg["points"], cfg["eps"], seed=cfg["seed"])
    test = data.gen_noisy_sine(cfg["points"], cfg["eps"], seed=cfg["seed"] + 1)
    network = [standard_layer(1) for _ in range(cfg["layers"])]
    config = SimConfig(cutoff=cfg["cutoff"])
    mse = optim.MseObjective(network, train.features[:, 0], train.labels, config)
    zeta0 = layers.init_params(network, cfg["seed"])
    adam_cfg = optim.AdamConfig(learning_rate=cfg["learning_rate"], steps=cfg["steps"])
    zeta, trace = optim.adam(mse.objective(), zeta0, adam_cfg)
    trace.to_csv(run.path("trace.csv"))
    mse_test = optim.MseObjective(network, test.features[:, 0], test.labels, config)
    pred_train = mse.predictions(zeta)
    pred_test = mse_test.predictions(zeta)
    with open(run.path("predictions.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "target", "prediction", "split"])
        for x, t, p in zip(train.features[:, 0], train.labels, pred_train):
            writer.writerow([repr(float(x)), repr(float(t)), repr(float(p)), "train"])
        for x, t, p in zip(test.features[:, 0], test.labels, pred_test):
            writer.writerow([repr(float(x)), repr(float(t)), repr(float(p)), "test"])
    metrics = {
        "eps": cfg["eps"],
        "layers": cfg["layers"],
        "train_cost": mse(zeta),
        "test_cost": mse_test(zeta),
        **trace.summary(),
    }
    run.write_json("metrics.json", metrics)
    run.finalize()
    return metrics


def _fraud_datasets(cfg: dict):
    if cfg["source"] == "synthetic":
        src = data.SyntheticFraudConfig(
            n_genuine=cfg["genuine"], n_fraud=cfg["fraud"], separation=cfg["separation"]
        )
    else:
        src = cfg["source"]
    return data.prepare_fraud(src, cfg["seed"])


def run_fraud(cfg: dict, outdir) -> dict:
    run = RunDir(outdir, "fraud", cfg)
    train, test = _fraud_datasets(cfg)
    result = hybrid.train_fraud(
        train,
        test,
        seed=cfg["seed"],
        n_classical=cfg["classical"],
        n_quantum=cfg["quantum"],
        cutoff=cfg["cutoff"],
        batch_size=cfg["batch"],
        steps=cfg["steps"],
        learning_rate=cfg["learning_rate"],
    )
    result.trace.to_csv(run.path("trace.csv"))
    fpr, tpr, thresholds = result.extras["roc"]
    with open(run.path("roc.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fpr", "tpr"])
        for t, f, r in zip(thresholds, fpr, tpr):
            writer.writerow([repr(float(t)), repr(float(f)), repr(float(r))])
    probs = result.extras["probs"]
    with open(run.path("predictions.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p_genuine", "p_fraud", "label", "predicted_genuine"])
        for row, label, pred in zip(probs, result.extras["labels"], result.extras["pred_genuine"]):
            writer.writerow([repr(float(row[0])), repr(float(row[1])), int(label), int(pred)])
    hybrid.save_checkpoint(result.model, run.dir / "model")
    run.artifacts["model.arch.json"] = run.dir / "model.arch.json"
    run.artifacts["model.weights.csv"] = run.dir / "model.weights.csv"
    run.write_json("metrics.json", result.metrics)
    run.finalize()
    return result.metrics


def run_mnist(cfg: dict, outdir) -> dict:
    run = RunDir(outdir, "mnist", cfg)
    if cfg["data_dir"]:
        base = Path(cfg["data_dir"])
        paths = {
            "train_images": base / "train-images-idx3-ubyte",
            "train_labels": base / "train-labels-idx1-ubyte",
            "test_images": base / "t10k-images-idx3-ubyte",
            "test_labels": base / "t10k-labels-idx1-ubyte",
        }
    else:
        surrogate = run.dir / "surrogate_data"
        per_class_train = max(1, cfg["train"] // 4)
        per_class_test = max(1, cfg["test"] // 4)
        paths = data.write_synthetic_digit_files(
            surrogate, per_class_train, per_class_test, cfg["seed"]
        )
    train, test = data.load_mnist(
        paths["train_images"], paths["train_labels"],
        paths["test_images"], paths["test_labels"],
        classes=(0, 1, 2, 3),
        train_limit=cfg["train"], test_limit=cfg["test"], seed=cfg["seed"],
    )
    if cfg["downsample"] > 1:
        train = data.Dataset(
            data.downsample_images(train.features, factor=cfg["downsample"]),
            train.labels, train.split, train.provenance,
        )
        test = data.Dataset(
            data.downsample_images(test.features, factor=cfg["downsample"]),
            test.labels, test.split, test.provenance,
        )
    result = hybrid.train_mnist(
        train,
        test,
        seed=cfg["seed"],
        n_classical=cfg["classical"],
        n_quantum=cfg["quantum"],
        cutoff=cfg["cutoff"],
        batch_size=cfg["batch"],
        epochs=cfg["epochs"],
        learning_rate=cfg["learning_rate"],
        decay_every=cfg["decay_every"],
        decay_factor=cfg["decay_factor"],
        success_at_loop=cfg["model"],
    )
    result.trace.to_csv(run.path("trace.csv"))
    with open(run.path("epochs.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "test_loss", "train_accuracy", "test_accuracy"])
        for row in result.extras["history"]:
            writer.writerow([
                row["epoch"], repr(row["train_loss"]), repr(row["test_loss"]),
                repr(row["train_accuracy"]), repr(row["test_accuracy"]),
            ])
    hybrid.save_checkpoint(result.model, run.dir / "model")
    run.artifacts["model.arch.json"] = run.dir / "model.arch.json"
    run.artifacts["model.weights.csv"] = run.dir / "model.weights.csv"
    metrics = dict(result.metrics)
    metrics.pop("history", None)
    run.write_json("metrics.json", metrics)
    run.finalize()
    return metrics


def run_loopstats(cfg: dict, outdir) -> dict:
    run = RunDir(outdir, "loopstats", cfg)
    detector = Detector(kind=cfg["detector"]) if cfg["detector"] != "pnr" else Detector()
    if cfg["checkpoint"]:
        model = hybrid.load_checkpoint(cfg["checkpoint"])
        base_cfg = model.config
        config = SimConfig(
            cutoff=base_cfg.cutoff, hbar=base_cfg.hbar, alpha=base_cfg.alpha,
            detector=detector,
        )
        train, _ = _fraud_datasets(cfg)
        feats = train.features[: cfg["samples"]]
        acts, _ = hybrid.classical_forward(model.classical, feats)
        zetas = []
        for raw in acts[-1]:
            enc = layers.encode_classical(raw, model.network[0])
            zetas.append(np.concatenate([enc, model.zeta_q]))
        network = model.network
        inputs = [vacuum(network[0].p, config.cutoff)] * len(zetas)
        stats = nonlin.loop_statistics(network, zetas, inputs, config, cfg["seed"])
    else:
        network = [standard_layer(1) for _ in range(cfg["layers"])]
        config = SimConfig(cutoff=8, detector=detector)
        zeta = np.zeros(layers.network_params(network))
        inputs = [vacuum(1, 8)] * cfg["samples"]
        stats = nonlin.loop_statistics(network, zeta, inputs, config, cfg["seed"])
    stats.to_csv(run.path("loopstats.csv"))
    metrics = {
        "layers": sorted(stats.per_layer),
        "first_try_rate": {str(l): stats.success_rate_first_try(l) for l in stats.per_layer},
        "mean_loops": {str(l): stats.mean_loops(l) for l in stats.per_layer},
        "total_attempts": stats.total_attempts,
        "stalled_passes": stats.stalled,
        "samples": cfg["samples"],
    }
    run.write_json("metrics.json", metrics)
    run.finalize()
    return metrics


def run_wigner(cfg: dict, outdir) -> dict:
    run = RunDir(outdir, "wigner", cfg)
    cutoff = cfg["cutoff"]
    name = cfg["state"]
    if name == "cat":
        state = targets.cat(cfg["alpha0"], cfg["theta"], cutoff)
    elif name == "fock":
        state = targets.fock(cfg["n"], cutoff)
    elif name == "gkp":
        state = targets.gkp_real(cfg["eps"], max(cutoff, 15))
    elif name == "coherent":
        state = targets.coherent(cfg["alpha"], cutoff)
    else:
        raise SimulatorError(f"unknown state {name!r}")
    bound, points = cfg["bound"], cfg["points"]
    grid = meas.wigner(state, -bound, bound, -bound, bound, points, points)
    meas.write_wigner_csv(grid, run.path("wigner.csv"))
    xs, marg = meas.wigner_x_marginal(grid)
    with open(run.path("wigner_marginal.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "density"])
        for x, d in zip(xs, marg):
            writer.writerow([repr(float(x)), repr(float(d))])
    targets.write_amplitudes_csv(state, run.path("amplitudes.csv"))
    metrics = {
        "state": name,
        "cutoff": state.cutoff,
        "w_origin": float(grid.values[points // 2, points // 2]),
        "grid": {"bound": bound, "points": points},
    }
    run.write_json("metrics.json", metrics)
    run.finalize()
    return metrics


RUNNERS = {
    "stateprep": run_stateprep,
    "curvefit": run_curvefit,
    "fraud": run_fraud,
    "mnist": run_mnist,
    "loopstats": run_loopstats,
    "wigner": run_wigner,
}

SWEEP_COST_KEY = {"stateprep": "cost", "curvefit": "train_cost", "fraud": "accuracy",
                  "mnist": "test_accuracy"}


def _sweep_cell(task: str, point: dict, cell_dir: str):
    try:
        metrics = RUNNERS[task](point, cell_dir)
        return metrics[SWEEP_COST_KEY[task]], "ok"
    except Exception as exc:  # partial-failure policy: continue, mark cell
        return "", f"failed: {type(exc).__name__}"


def run_sweep(cfg: dict, outdir) -> dict:
    run = RunDir(outdir, "sweep", cfg)
    task = cfg["task"]
    axis = cfg["axis"]
    values = cfg["values"]
    seeds = cfg["seeds"]
    base = dict(cfg["base"])
    workers = int(cfg.get("workers", 1))
    cells = []
    for value in values:
        for k in range(seeds):
            point = dict(base)
            point[axis] = value
            point["seed"] = int(base.get("seed", 0)) + k
            cell_dir = run.dir / f"{axis}_{value}_seed{point['seed']}"
            cells.append((value, point, str(cell_dir)))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_sweep_cell, [task] * len(cells),
                                     [c[1] for c in cells], [c[2] for c in cells]))
    else:
        outcomes = [_sweep_cell(task, point, cell_dir) for _, point, cell_dir in cells]
    rows = [
        (value, point["seed"], cost, status)
        for (value, point, _), (cost, status) in zip(cells, outcomes)
    ]
    with open(run.path("sweep.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis, "seed", SWEEP_COST_KEY[task], "status"])
        for value, seed, cost, status in rows:
            writer.writerow([value, seed, "" if cost == "" else repr(float(cost)), status])
    summary = {}
    for value in values:
        vals = [c for v, _, c, st in rows if v == value and st == "ok"]
        summary[str(value)] = {
            "mean": float(np.mean(vals)) if vals else None,
            "runs": len(vals),
        }
    with open(run.path("sweep_summary.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis, f"mean_{SWEEP_COST_KEY[task]}", "runs"])
        for value in values:
            s = summary[str(value)]
            writer.writerow([value, "" if s["mean"] is None else repr(s["mean"]), s["runs"]])
    metrics = {"task": task, "axis": axis, "summary": summary}
    run.write_json("metrics.json", metrics)
    run.finalize()
    return metrics


# ---------------------------------------------------------------------------
# argument handling


def _add_task_parser(sub, name: str, params: dict):
    p = sub.add_parser(name)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None, help="TOML file; flags override it")
    p.add_argument("--preset", choices=[DESK, PAPER], default=DESK)
    for key, default in params.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(default, bool):
            p.add_argument(flag, type=int, default=None)
        elif isinstance(default, int):
            p.add_argument(flag, type=int, default=None)
        elif isinstance(default, float):
            p.add_argument(flag, type=float, default=None)
        else:
            p.add_argument(flag, type=str, default=None)
    return p


def _merged_config(task: str, args) -> dict:
    cfg = dict(TASK_DEFAULTS[task][args.preset])
    if args.config:
        with open(args.config, "rb") as fh:
            doc = tomllib.load(fh)
        for key, value in doc.get(task, {}).items():
            if key not in cfg:
                raise KeyError(f"unknown config key {key!r} for task {task}")
            cfg[key] = value
    for key in list(cfg):
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            cfg[key] = flag_val
            cfg[f"_explicit_{key}"] = True
    return cfg


def _parse_axis_value(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cvqnn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for task, presets in TASK_DEFAULTS.items():
        _add_task_parser(sub, task, presets[DESK])
    sweep_p = sub.add_parser("sweep")
    sweep_p.add_argument("--out", required=True)
    sweep_p.add_argument("--task", required=True, choices=list(SWEEP_COST_KEY))
    sweep_p.add_argument("--axis", required=True)
    sweep_p.add_argument("--values", required=True, help="comma-separated axis values")
    sweep_p.add_argument("--seeds", type=int, default=5)
    sweep_p.add_argument("--workers", type=int, default=1)
    sweep_p.add_argument("--preset", choices=[DESK, PAPER], default=DESK)
    rerun_p = sub.add_parser("rerun")
    rerun_p.add_argument("manifest")
    rerun_p.add_argument("--out", required=True)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    try:
        if args.command == "rerun":
            with open(args.manifest) as fh:
                doc = json.load(fh)
            task = doc["task"]
            cfg = {k: v for k, v in doc["config"].items() if not k.startswith("_explicit_")}
            runner = run_sweep if task == "sweep" else RUNNERS[task]
            metrics = runner(cfg, args.out)
        elif args.command == "sweep":
            cfg = {
                "task": args.task,
                "axis": args.axis,
                "values": [_parse_axis_value(v) for v in args.values.split(",")],
                "seeds": args.seeds,
                "workers": args.workers,
                "base": dict(TASK_DEFAULTS[args.task][args.preset]),
            }
            metrics = run_sweep(cfg, args.out)
        else:
            cfg = _merged_config(args.command, args)
            metrics = RUNNERS[args.command](cfg, args.out)
    except (KeyError, ValueError, OSError, tomllib.TOMLDecodeError) as exc:
        _emit_error(args, exc)
        return 2
    except (SimulatorError, FloatingPointError, RuntimeError) as exc:
        _emit_error(args, exc)
        return 3
    print(json.dumps(metrics, indent=2, sort_keys=True, default=str))
    return 0


def _emit_error(args, exc):
    payload = {
        "error": type(exc).__name__,
        "message": str(exc),
        "task": getattr(args, "command", None),
    }
    sys.stderr.write(json.dumps(payload) + "\n")
    out = getattr(args, "out", None)
    if out:
        try:
            Path(out).mkdir(parents=True, exist_ok=True)
            with open(Path(out) / "error.json", "w") as fh:
                json.dump(payload, fh, indent=2)
        except OSError:
            pass


if __name__ == "__main__":
    sys.exit(main())
