"""Hybrid classical-quantum models and the two classification training loops.

Classical dense layers feed the encoding quantum layer: the final
classical output, one value per gate-parameter slot, is squashed by
``layers.encode_classical`` and becomes the first layer's gates.  Deeper
quantum layers carry their own trainable parameters.

Gradients are composite: analytic backprop through the dense stack chained
with central finite differences through the quantum part.  The quantum
jacobians are evaluated with prefix sharing (a perturbed slot touches one
gate, so everything before it is computed once) and all variants of all
samples run through the shared layers as one stacked pass.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import layers as layers_mod
from . import optim
from .data import Dataset
from .errors import ShapeMismatchError
from .layers import LayerSpec, SimConfig, apply_layer, class_probabilities, encode_classical
from .nonlin import Detector


def elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_prime(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


@dataclass
class DenseLayer:
    """Fully connected layer; activation is the smooth exponential-linear or identity."""

    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "elu"  # "elu" | "identity"

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        z = x @ self.weights.T + self.bias
        if self.activation == "elu":
            return elu(z), z
        if self.activation == "identity":
            return z, z
        raise ShapeMismatchError(f"unknown activation {self.activation!r}")


@dataclass
class HybridModel:
    classical: list
    network: list  # quantum LayerSpecs; network[0] is the encoding layer
    zeta_q: np.ndarray  # parameters of network[1:]
    config: SimConfig

    def __post_init__(self):
        boundary = self.classical[-1].weights.shape[0]
        if boundary != self.network[0].param_count:
            raise ShapeMismatchError(
                f"classical output width {boundary} != encoding layer "
                f"width {self.network[0].param_count}"
            )
        expected = sum(spec.param_count for spec in self.network[1:])
        if self.zeta_q.shape != (expected,):
            raise ShapeMismatchError(f"zeta_q length {self.zeta_q.shape} != {expected}")

    @property
    def p(self) -> int:
        return self.network[0].p


def build_model(
    n_features: int,
    n_classical: int,
    n_quantum: int,
    p: int,
    config: SimConfig,
    seed: int,
    hidden: int = 10,
) -> HybridModel:
    """Dense stack (hidden layers plus the 7p-2 boundary) and n_quantum layers.

    ``n_classical`` counts all dense layers including the identity boundary
    layer; a single classical layer maps features straight onto the
    encoding slots.
    """
    if n_classical < 1 or n_quantum < 1:
        raise ShapeMismatchError("need at least one classical and one quantum layer")
    rng = np.random.default_rng(seed)
    boundary = 7 * p - 2
    sizes = [n_features] + [hidden] * (n_classical - 1) + [boundary]
    classical = []
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        w = rng.normal(0.0, 1.0 / np.sqrt(fan_in), (fan_out, fan_in))
        b = np.zeros(fan_out)
        act = "identity" if i == len(sizes) - 2 else "elu"
        classical.append(DenseLayer(w, b, act))
    network = [layers_mod.standard_layer(p) for _ in range(n_quantum)]
    zq = rng.uniform(-0.05, 0.05, sum(s.param_count for s in network[1:]))
    return HybridModel(classical=classical, network=network, zeta_q=zq, config=config)


# ---------------------------------------------------------------------------
# parameter packing


def pack_params(model: HybridModel) -> np.ndarray:
    parts = []
    for layer in model.classical:
        parts.append(layer.weights.ravel())
        parts.append(layer.bias)
    parts.append(model.zeta_q)
    return np.concatenate(parts)


def unpack_params(model: HybridModel, theta: np.ndarray) -> HybridModel:
    out = []
    offset = 0
    for layer in model.classical:
        nw = layer.weights.size
        w = theta[offset : offset + nw].reshape(layer.weights.shape)
        offset += nw
        nb = layer.bias.size
        b = theta[offset : offset + nb].copy()
        offset += nb
        out.append(DenseLayer(w, b, layer.activation))
    zq = theta[offset:].copy()
    return HybridModel(classical=out, network=model.network, zeta_q=zq, config=model.config)


# ---------------------------------------------------------------------------
# forward paths


def classical_forward(classical, X: np.ndarray):
    acts = [np.asarray(X, dtype=float)]
    pres = []
    for layer in classical:
        a, z = layer.forward(acts[-1])
        acts.append(a)
        pres.append(z)
    return acts, pres


def _encode_column(model: HybridModel, enc_raw: np.ndarray) -> np.ndarray:
    """Vacuum through the encoding layer for one raw boundary vector."""
    D = model.config.cutoff
    col = np.zeros((D ** model.p, 1), dtype=np.complex128)
    col[0, 0] = 1.0
    params = encode_classical(enc_raw, model.network[0])
    col, _ = apply_layer(col, model.network[0], params, model.config)
    return col


def _zq_segments(model: HybridModel):
    offs = layers_mod.param_offsets(model.network[1:])
    return [(model.network[1 + i], model.zeta_q[offs[i] : offs[i + 1]]) for i in range(len(model.network) - 1)]


def _apply_shared(model: HybridModel, stack: np.ndarray, capture=None) -> np.ndarray:
    """Run the post-encoding layers over a stack; optionally capture inputs per layer."""
    for spec, seg in _zq_segments(model):
        if capture is not None:
            capture.append(stack)
        stack, _ = apply_layer(stack, spec, seg, model.config)
    return stack


def quantum_class_probs(model: HybridModel, enc_raw_batch: np.ndarray) -> np.ndarray:
    cols = [_encode_column(model, e) for e in np.asarray(enc_raw_batch, dtype=float)]
    stack = np.concatenate(cols, axis=1)
    stack = _apply_shared(model, stack)
    return class_probabilities(stack, model.p, model.config.cutoff)


def hybrid_forward(model: HybridModel, x: np.ndarray):
    """Class probabilities for one feature vector, plus backprop intermediates."""
    acts, pres = classical_forward(model.classical, np.asarray(x, dtype=float).reshape(1, -1))
    probs = quantum_class_probs(model, acts[-1])
    return probs[0], {"activations": acts, "pre_activations": pres}


def predict_probs(model: HybridModel, X: np.ndarray, chunk: int = 256) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    out = []
    for i in range(0, len(X), chunk):
        acts, _ = classical_forward(model.classical, X[i : i + chunk])
        out.append(quantum_class_probs(model, acts[-1]))
    return np.vstack(out)


# ---------------------------------------------------------------------------
# composite gradient


def _encoding_variants(model: HybridModel, enc_raw: np.ndarray, h: float) -> np.ndarray:
    """Encoding-layer outputs for all +-h perturbations of one raw vector.

    Returns a stack with 2 * n_slots columns ordered (slot 0 +h, slot 0 -h,
    slot 1 +h, ...).  Prefix sharing: the state before the perturbed gate
    is reused, and later gates apply to all accumulated variants at once.
    """
    spec = model.network[0]
    cfg = model.config
    D = cfg.cutoff
    dim = D ** spec.p
    base = np.zeros((dim, 1), dtype=np.complex128)
    base[0, 0] = 1.0
    params = encode_classical(enc_raw, spec)
    kinds = spec.slot_kinds()
    variants = np.zeros((dim, 2 * spec.param_count), dtype=np.complex128)
    filled = []
    for gi, gate in enumerate(spec.gates):
        new_cols = []
        for slot in gate.slots:
            for sign in (+1.0, -1.0):
                pert = params.copy()
                pert[slot] = layers_mod.squash_value(kinds[slot], enc_raw[slot] + sign * h)
                col, _ = apply_layer(base, spec, pert, cfg, gate_start=gi, gate_stop=gi + 1)
                new_cols.append((2 * slot + (0 if sign > 0 else 1), col))
        if filled:
            idx = [i for i, _ in filled]
            stack = np.concatenate([c for _, c in filled], axis=1)
            stack, _ = apply_layer(stack, spec, params, cfg, gate_start=gi, gate_stop=gi + 1)
            filled = [(i, stack[:, k : k + 1]) for k, i in enumerate(idx)]
        filled.extend(new_cols)
        base, _ = apply_layer(base, spec, params, cfg, gate_start=gi, gate_stop=gi + 1)
    for i, col in filled:
        variants[:, i : i + 1] = col
    return base, variants


def batch_value_and_grad(model: HybridModel, X: np.ndarray, y: np.ndarray, h: float = 1e-4):
    """Batch loss C = sum (1 - p_correct)^2 and gradients for every parameter."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    B = len(y)
    acts, pres = classical_forward(model.classical, X)
    enc_raw = acts[-1]
    n_enc = model.network[0].param_count

    base_cols = []
    var_cols = []
    for i in range(B):
        base, variants = _encoding_variants(model, enc_raw[i], h)
        base_cols.append(base)
        var_cols.append(variants)
    base_stack = np.concatenate(base_cols, axis=1)  # (dim, B)
    var_stack = np.concatenate(var_cols, axis=1)  # (dim, B * 2 n_enc)

    intermediates: list = []  # baseline stack before each shared layer
    combined = np.concatenate([base_stack, var_stack], axis=1)
    captured: list = []
    combined = _apply_shared(model, combined, capture=captured)
    intermediates = [c[:, :B] for c in captured]

    D = model.config.cutoff
    probs_all = class_probabilities(combined, model.p, D)
    base_probs = probs_all[:B]
    var_probs = probs_all[B:].reshape(B, 2 * n_enc, model.p)

    p_correct = base_probs[np.arange(B), y]
    loss = optim.cost_classification(p_correct)
    dL_dp = -2.0 * (1.0 - p_correct)

    plus = var_probs[:, 0::2, :][np.arange(B)[:, None], np.arange(n_enc)[None, :], y[:, None]]
    minus = var_probs[:, 1::2, :][np.arange(B)[:, None], np.arange(n_enc)[None, :], y[:, None]]
    denc = dL_dp[:, None] * (plus - minus) / (2 * h)

    # quantum-layer parameters: all +-h variants of one layer share a single
    # wide stacked pass (prefix walk inside the layer, one downstream sweep)
    zq_grad = np.zeros_like(model.zeta_q)
    offs = layers_mod.param_offsets(model.network[1:])
    segments = _zq_segments(model)
    for li, (spec, seg) in enumerate(segments):
        prefix = intermediates[li]
        acc = None
        slot_order = []
        for gi, gate in enumerate(spec.gates):
            if acc is not None:
                acc, _ = apply_layer(acc, spec, seg, model.config, gate_start=gi, gate_stop=gi + 1)
            new_blocks = []
            for slot in gate.slots:
                for sign in (+1.0, -1.0):
                    pert = seg.copy()
                    pert[slot] += sign * h
                    block, _ = apply_layer(
                        prefix, spec, pert, model.config, gate_start=gi, gate_stop=gi + 1
                    )
                    new_blocks.append(block)
                    slot_order.append(slot)
            if new_blocks:
                new = np.concatenate(new_blocks, axis=1)
                acc = new if acc is None else np.concatenate([acc, new], axis=1)
            prefix, _ = apply_layer(prefix, spec, seg, model.config, gate_start=gi, gate_stop=gi + 1)
        for spec2, seg2 in segments[li + 1 :]:
            acc, _ = apply_layer(acc, spec2, seg2, model.config)
        pr = class_probabilities(acc, model.p, D)
        pr = pr.reshape(spec.param_count, 2, B, model.p)
        correct = pr[:, :, np.arange(B), y]  # (slots in walk order, sign, B)
        dpk = (correct[:, 0, :] - correct[:, 1, :]) / (2 * h)
        per_slot = dpk @ dL_dp
        for walk_pos, slot in enumerate(slot_order[::2]):
            zq_grad[offs[li] + slot] = float(per_slot[walk_pos])

    # classical backprop seeded by the encoding-vector gradient
    grads = []
    delta = denc
    for depth in range(len(model.classical) - 1, -1, -1):
        layer = model.classical[depth]
        z = pres[depth]
        if layer.activation == "elu":
            delta = delta * elu_prime(z)
        gw = delta.T @ acts[depth]
        gb = delta.sum(axis=0)
        grads.append((gw, gb))
        if depth > 0:
            delta = delta @ layer.weights
    grads.reverse()
    flat = []
    for gw, gb in grads:
        flat.append(gw.ravel())
        flat.append(gb)
    flat.append(zq_grad)
    return float(loss), np.concatenate(flat)


def hybrid_backward(model: HybridModel, X: np.ndarray, y: np.ndarray, h: float = 1e-4):
    """Spec surface for the composite gradient; returns (loss, flat gradient)."""
    return batch_value_and_grad(model, X, y, h)


# ---------------------------------------------------------------------------
# training loops


@dataclass
class TrainResult:
    model: HybridModel
    trace: optim.OptimizerTrace
    metrics: dict
    extras: dict = field(default_factory=dict)


def _batch_schedule(n: int, batch_size: int, steps: int, seed: int):
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    ptr = 0
    schedule = []
    for _ in range(steps):
        if ptr + batch_size > n:
            order = rng.permutation(n)
            ptr = 0
        schedule.append(order[ptr : ptr + batch_size].copy())
        ptr += batch_size
    return schedule


def fit(
    model: HybridModel,
    train: Dataset,
    adam_cfg: optim.AdamConfig,
    batch_size: int,
    seed: int,
    epoch_hook=None,
    steps_per_epoch: int | None = None,
) -> tuple[HybridModel, optim.OptimizerTrace]:
    """Adam over the packed parameter vector with a seeded batch schedule."""
    schedule = _batch_schedule(len(train), batch_size, adam_cfg.steps, seed)
    state = {"model": model}

    def value_and_grad(theta, step):
        m = unpack_params(model, theta)
        state["model"] = m
        idx = schedule[step]
        loss, grad = batch_value_and_grad(m, train.features[idx], train.labels[idx])
        if epoch_hook is not None and steps_per_epoch and (step + 1) % steps_per_epoch == 0:
            epoch_hook((step + 1) // steps_per_epoch, m)
        return loss, grad

    obj = optim.Objective(
        evaluate=lambda z, step=0: value_and_grad(z, step)[0],
        dim=len(pack_params(model)),
        name="hybrid",
        value_and_grad=value_and_grad,
    )
    theta, trace = optim.adam(obj, pack_params(model), adam_cfg)
    return unpack_params(model, theta), trace


# ---------------------------------------------------------------------------
# evaluation metrics


def roc_curve(scores: np.ndarray, positive: np.ndarray):
    """Threshold sweep on the positive-class score; returns (fpr, tpr, thresholds)."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    thresholds = np.concatenate(([np.inf], np.unique(scores)[::-1], [-np.inf]))
    tpr, fpr = [], []
    n_pos = max(1, positive.sum())
    n_neg = max(1, (~positive).sum())
    for t in thresholds:
        pred = scores >= t
        tpr.append((pred & positive).sum() / n_pos)
        fpr.append((pred & ~positive).sum() / n_neg)
    return np.asarray(fpr), np.asarray(tpr), thresholds


def auc_from_roc(fpr: np.ndarray, tpr: np.ndarray) -> float:
    order = np.argsort(fpr, kind="stable")
    return float(np.trapezoid(np.asarray(tpr)[order], np.asarray(fpr)[order]))


def best_roc_threshold(fpr, tpr, thresholds) -> tuple[float, int]:
    dist = fpr ** 2 + (1 - tpr) ** 2
    idx = int(np.argmin(dist))
    return float(thresholds[idx]), idx


def confusion_matrix(pred_positive: np.ndarray, positive: np.ndarray) -> np.ndarray:
    """2x2 counts [[TP, FN], [FP, TN]] with 'positive' the first row/column."""
    tp = int((pred_positive & positive).sum())
    fn = int((~pred_positive & positive).sum())
    fp = int((pred_positive & ~positive).sum())
    tn = int((~pred_positive & ~positive).sum())
    return np.array([[tp, fn], [fp, tn]])


def train_fraud(
    train: Dataset,
    test: Dataset,
    seed: int,
    n_classical: int = 2,
    n_quantum: int = 4,
    cutoff: int = 6,
    batch_size: int = 24,
    steps: int = 1500,
    learning_rate: float = 0.01,
    detector: Detector | None = None,
    success_at_loop: int = 1,
) -> TrainResult:
    """Binary transaction classifier: genuine reads out on mode 0, fraud on mode 1."""
    config = SimConfig(
        cutoff=cutoff,
        detector=detector or Detector(),
        success_at_loop=success_at_loop,
    )
    model = build_model(
        train.features.shape[1], n_classical, n_quantum, p=2, config=config, seed=seed
    )
    adam_cfg = optim.AdamConfig(learning_rate=learning_rate, steps=steps)
    model, trace = fit(model, train, adam_cfg, batch_size, seed + 1)

    probs = predict_probs(model, test.features)
    genuine_score = probs[:, 0]
    positive = test.labels == 0  # genuine is the scored class
    fpr, tpr, thresholds = roc_curve(genuine_score, positive)
    auc = auc_from_roc(fpr, tpr)
    threshold, idx = best_roc_threshold(fpr, tpr, thresholds)
    pred_genuine = genuine_score >= threshold
    conf = confusion_matrix(pred_genuine, positive)
    accuracy = float((pred_genuine == positive).mean())
    metrics = {
        "accuracy": accuracy,
        "auc": auc,
        "threshold": threshold,
        "confusion": conf.tolist(),
        "final_train_cost": trace.final_cost(),
        "test_size": int(len(test)),
    }
    extras = {
        "probs": probs,
        "roc": (fpr, tpr, thresholds),
        "labels": test.labels,
        "pred_genuine": pred_genuine,
    }
    return TrainResult(model=model, trace=trace, metrics=metrics, extras=extras)


def evaluate_classifier(model: HybridModel, ds: Dataset) -> tuple[float, float]:
    """(mean loss, accuracy) under the argmax-of-probabilities decision rule."""
    probs = predict_probs(model, ds.features)
    correct = probs[np.arange(len(ds)), ds.labels]
    loss = optim.cost_classification(correct) / len(ds)
    accuracy = float((np.argmax(probs, axis=1) == ds.labels).mean())
    return float(loss), accuracy


def train_mnist(
    train: Dataset,
    test: Dataset,
    seed: int,
    n_classical: int = 1,
    n_quantum: int = 3,
    cutoff: int = 4,
    batch_size: int = 16,
    epochs: int = 20,
    learning_rate: float = 0.001,
    decay_every: int = 5000,
    decay_factor: float = 0.9,
    hidden: int = 128,
    success_at_loop: int = 1,
) -> TrainResult:
    """Four-class image classifier over p=4 primary modes."""
    config = SimConfig(cutoff=cutoff, success_at_loop=success_at_loop)
    model = build_model(
        train.features.shape[1], n_classical, n_quantum, p=4, config=config, seed=seed,
        hidden=hidden,
    )
    steps_per_epoch = max(1, len(train) // batch_size)
    adam_cfg = optim.AdamConfig(
        learning_rate=learning_rate,
        steps=steps_per_epoch * epochs,
        decay_every=decay_every,
        decay_factor=decay_factor,
    )
    history = []

    def epoch_hook(epoch, m):
        train_loss, train_acc = evaluate_classifier(m, train)
        test_loss, test_acc = evaluate_classifier(m, test)
        history.append(
            {
                "epoch": epoch,
                "train_loss": train_loss,
                "test_loss": test_loss,
                "train_accuracy": train_acc,
                "test_accuracy": test_acc,
            }
        )

    model, trace = fit(
        model, train, adam_cfg, batch_size, seed + 1,
        epoch_hook=epoch_hook, steps_per_epoch=steps_per_epoch,
    )
    final_loss, final_acc = evaluate_classifier(model, test)
    metrics = {
        "test_accuracy": final_acc,
        "test_loss": final_loss,
        "epochs": epochs,
        "history": history,
    }
    return TrainResult(model=model, trace=trace, metrics=metrics, extras={"history": history})


# ---------------------------------------------------------------------------
# checkpoints: architecture JSON + weights CSV


CHECKPOINT_VERSION = 1


def save_checkpoint(model: HybridModel, prefix):
    arch = {
        "version": CHECKPOINT_VERSION,
        "classical": [
            {"out": l.weights.shape[0], "in": l.weights.shape[1], "activation": l.activation}
            for l in model.classical
        ],
        "quantum": json.loads(layers_mod.network_to_json(model.network, model.config)),
    }
    with open(f"{prefix}.arch.json", "w") as fh:
        json.dump(arch, fh, indent=2, sort_keys=True)
    theta = pack_params(model)
    with open(f"{prefix}.weights.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "value"])
        for i, v in enumerate(theta):
            writer.writerow([i, repr(float(v))])
    return f"{prefix}.arch.json", f"{prefix}.weights.csv"


def load_checkpoint(prefix) -> HybridModel:
    with open(f"{prefix}.arch.json") as fh:
        arch = json.load(fh)
    if arch.get("version") != CHECKPOINT_VERSION:
        raise ShapeMismatchError(f"unsupported checkpoint version {arch.get('version')}")
    network, config = layers_mod.network_from_json(json.dumps(arch["quantum"]))
    classical = [
        DenseLayer(np.zeros((l["out"], l["in"])), np.zeros(l["out"]), l["activation"])
        for l in arch["classical"]
    ]
    zq = np.zeros(sum(s.param_count for s in network[1:]))
    model = HybridModel(classical=classical, network=network, zeta_q=zq, config=config)
    values = []
    with open(f"{prefix}.weights.csv") as fh:
        reader = csv.reader(fh)
        next(reader)
        for _, v in reader:
            values.append(float(v))
    return unpack_params(model, np.asarray(values))
