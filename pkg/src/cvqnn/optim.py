"""Optimizers (Nelder-Mead, Adam), numerical gradients, and the task costs.

The update rule is descent, ``zeta -> zeta - eta * grad C``; all three
bundled cost functions are minimized.  Nelder-Mead is implemented here
rather than delegated so the reflection/expansion/contraction/shrink
coefficients, the cost-delta stopping rule, and the evaluation budget are
explicit, configurable, and fully traced; it supports an optional chain of
restart stages (fresh simplex around the incumbent at a smaller step),
which is what the state-preparation presets use.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from . import layers as layers_mod
from . import meas
from .errors import SimulatorError
from .fock import FockState, vacuum
from .layers import SimConfig, apply_layer, param_offsets


@dataclass
class Objective:
    """A scalar cost with optional gradient information.

    ``evaluate(zeta, step=0)`` must be deterministic for fixed arguments;
    stochastic objectives (mini-batches) key their sampling off ``step``
    and an internal seed.
    """

    evaluate: callable
    dim: int
    name: str = ""
    value_and_grad: callable | None = None


@dataclass
class OptimizerTrace:
    steps: list = field(default_factory=list)  # (step, cost, lr or None, elapsed_ms)
    snapshots: list = field(default_factory=list)  # (step, zeta copy)
    n_evals: int = 0
    n_iters: int = 0
    reason: str = ""

    def record(self, step: int, cost: float, lr: float | None, t0: float):
        self.steps.append((step, float(cost), lr, (time.perf_counter() - t0) * 1e3))

    def best_costs(self) -> np.ndarray:
        return np.minimum.accumulate([s[1] for s in self.steps])

    def final_cost(self) -> float:
        return self.steps[-1][1]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "cost", "learning_rate", "elapsed_ms"])
            for step, cost, lr, ms in self.steps:
                writer.writerow([step, repr(cost), "" if lr is None else repr(lr), f"{ms:.3f}"])

    def summary(self) -> dict:
        return {
            "iterations": self.n_iters,
            "function_evaluations": self.n_evals,
            "final_cost": self.final_cost(),
            "best_cost": float(self.best_costs()[-1]),
            "convergence_reason": self.reason,
        }


def fd_gradient(func, zeta: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central finite differences, one coordinate at a time."""
    zeta = np.asarray(zeta, dtype=float)
    grad = np.empty_like(zeta)
    for k in range(len(zeta)):
        zp = zeta.copy()
        zp[k] += h
        zm = zeta.copy()
        zm[k] -= h
        fp, fm = func(zp), func(zm)
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise SimulatorError(f"non-finite objective while differencing coordinate {k}")
        grad[k] = (fp - fm) / (2 * h)
    return grad


# ---------------------------------------------------------------------------
# Nelder-Mead


@dataclass(frozen=True)
class NelderMeadConfig:
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    adaptive: bool = True  # Gao-Han dimension-dependent coefficients
    tol: float = 1e-6  # stop when the simplex cost spread falls below this
    max_evals: int = 5000
    simplex_step: float = 0.4
    restarts: tuple = ()  # extra (max_evals, simplex_step) stages from the incumbent


def _nm_single(func, z0, cfg: NelderMeadConfig, max_evals, step, trace: OptimizerTrace, t0):
    n = len(z0)
    if cfg.adaptive and n >= 2:
        rho, chi, gamma, sigma = 1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2 * n), 1.0 - 1.0 / n
    else:
        rho, chi, gamma, sigma = cfg.reflection, cfg.expansion, cfg.contraction, cfg.shrink

    def f(z):
        trace.n_evals += 1
        return func(z)

    simplex = [np.asarray(z0, dtype=float)]
    for k in range(n):
        v = np.array(z0, dtype=float)
        v[k] += step if v[k] == 0 else step * np.sign(v[k])
        simplex.append(v)
    simplex = np.asarray(simplex)
    fv = np.array([f(v) for v in simplex])
    used = n + 1
    reason = "eval budget"
    # worst-case iteration cost is n + 2 evaluations (contraction + shrink)
    while used + n + 2 <= max_evals:
        order = np.argsort(fv, kind="stable")
        simplex, fv = simplex[order], fv[order]
        trace.n_iters += 1
        trace.record(trace.n_iters, fv[0], None, t0)
        if abs(fv[-1] - fv[0]) < cfg.tol:
            reason = "cost delta below tolerance"
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + rho * (centroid - simplex[-1])
        fr = f(xr)
        used += 1
        if fr < fv[0]:
            xe = centroid + chi * (xr - centroid)
            fe = f(xe)
            used += 1
            simplex[-1], fv[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fv[-2]:
            simplex[-1], fv[-1] = xr, fr
        else:
            if fr < fv[-1]:
                xc = centroid + gamma * (xr - centroid)
            else:
                xc = centroid - gamma * (centroid - simplex[-1])
            fc = f(xc)
            used += 1
            if fc < min(fr, fv[-1]):
                simplex[-1], fv[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + sigma * (simplex[i] - simplex[0])
                    fv[i] = f(simplex[i])
                used += n
    order = np.argsort(fv, kind="stable")
    return simplex[order][0], float(fv[order][0]), reason


def nelder_mead(objective: Objective, zeta0: np.ndarray, config: NelderMeadConfig | None = None):
    """Simplex minimization with optional restart stages; returns (zeta, trace)."""
    cfg = config or NelderMeadConfig()
    trace = OptimizerTrace()
    t0 = time.perf_counter()
    func = lambda z: objective.evaluate(z)
    best_z, best_f, reason = _nm_single(func, zeta0, cfg, cfg.max_evals, cfg.simplex_step, trace, t0)
    for extra_evals, extra_step in cfg.restarts:
        z, fval, reason = _nm_single(func, best_z, cfg, extra_evals, extra_step, trace, t0)
        if fval < best_f:
            best_z, best_f = z, fval
    trace.reason = reason
    trace.record(trace.n_iters, best_f, None, t0)
    trace.snapshots.append((trace.n_iters, best_z.copy()))
    return best_z, trace


# ---------------------------------------------------------------------------
# Adam


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    steps: int = 1000
    decay_every: int = 5000
    decay_factor: float = 0.9
    snapshot_every: int = 0  # 0: only the final parameters
    fd_step: float = 1e-4  # used when the objective has no gradient callable


def learning_rate_at(cfg: AdamConfig, step: int) -> float:
    return cfg.learning_rate * cfg.decay_factor ** (step // cfg.decay_every)


def adam(objective: Objective, zeta0: np.ndarray, config: AdamConfig | None = None):
    """Adam descent; the objective may supply value_and_grad(zeta, step)."""
    cfg = config or AdamConfig()
    zeta = np.asarray(zeta0, dtype=float).copy()
    m = np.zeros_like(zeta)
    v = np.zeros_like(zeta)
    trace = OptimizerTrace()
    t0 = time.perf_counter()
    for t in range(1, cfg.steps + 1):
        if objective.value_and_grad is not None:
            cost, grad = objective.value_and_grad(zeta, t - 1)
            trace.n_evals += 1
        else:
            cost = objective.evaluate(zeta)
            grad = fd_gradient(objective.evaluate, zeta, cfg.fd_step)
            trace.n_evals += 1 + 2 * len(zeta)
        if not np.all(np.isfinite(grad)):
            trace.reason = "non-finite gradient"
            trace.record(t, cost, learning_rate_at(cfg, t), t0)
            raise SimulatorError(f"non-finite gradient at step {t}")
        lr = learning_rate_at(cfg, t)
        m = cfg.beta1 * m + (1 - cfg.beta1) * grad
        v = cfg.beta2 * v + (1 - cfg.beta2) * grad * grad
        mhat = m / (1 - cfg.beta1 ** t)
        vhat = v / (1 - cfg.beta2 ** t)
        zeta -= lr * mhat / (np.sqrt(vhat) + cfg.eps)
        trace.n_iters = t
        trace.record(t, cost, lr, t0)
        if cfg.snapshot_every and t % cfg.snapshot_every == 0:
            trace.snapshots.append((t, zeta.copy()))
    trace.reason = trace.reason or "step budget"
    trace.snapshots.append((cfg.steps, zeta.copy()))
    return zeta, trace


# ---------------------------------------------------------------------------
# task costs


def cost_state_prep(
    zeta: np.ndarray, network, target: FockState, config: SimConfig
) -> float:
    """| |<target|U(zeta)|0>|^2 - 1 | via the exact overlap."""
    out = layers_mod.forward(network, zeta, vacuum(1, config.cutoff), config=config)
    fid = meas.fidelity(out.state.normalize(), target)
    return abs(fid - 1.0)


def state_prep_objective(network, target: FockState, config: SimConfig) -> Objective:
    return Objective(
        evaluate=lambda z, step=0: cost_state_prep(z, network, target, config),
        dim=layers_mod.network_params(network),
        name="state_prep",
    )


def cost_state_prep_wigner(
    zeta: np.ndarray, network, target_grid: meas.WignerGrid, config: SimConfig
) -> float:
    """Cross-check path: the same cost through the Wigner-overlap identity."""
    out = layers_mod.forward(network, zeta, vacuum(1, config.cutoff), config=config)
    grid = meas.wigner(
        out.state.normalize(),
        target_grid.x_min,
        target_grid.x_max,
        target_grid.p_min,
        target_grid.p_max,
        target_grid.nx,
        target_grid.np_,
        target_grid.hbar,
    )
    return abs(meas.wigner_overlap(grid, target_grid) - 1.0)


class MseObjective:
    """Mean squared error between <q> readouts and target values.

    Inputs are encoded as displaced vacuum |x> = D(x)|0>; the input stack
    is prepared once and every evaluation runs the shared layers over it.
    The gradient is a central finite difference with layer-level prefix
    sharing: perturbing a slot in layer l reruns layers l onward only.
    """

    def __init__(self, network, xs, targets, config: SimConfig, fd_step: float = 1e-4):
        from .gates import displacement

        self.network = network
        self.config = config
        self.targets = np.asarray(targets, dtype=float)
        self.fd_step = fd_step
        D = config.cutoff
        cols = [displacement(float(x), D).matrix[:, 0] for x in xs]
        self.input_stack = np.stack(cols, axis=1)
        self.offsets = param_offsets(network)
        self.dim = layers_mod.network_params(network)

    def _prefix_stacks(self, zeta: np.ndarray) -> list:
        stacks = [self.input_stack]
        for li, spec in enumerate(self.network):
            seg = zeta[self.offsets[li] : self.offsets[li + 1]]
            out, _ = apply_layer(stacks[-1], spec, seg, self.config, layer_index=li)
            stacks.append(out)
        return stacks

    def _cost_of_stack(self, amps: np.ndarray) -> float:
        preds = layers_mod.q_expectations(amps, 1, self.config.cutoff, self.config.hbar)[:, 0]
        return float(np.mean((self.targets - preds) ** 2))

    def predictions(self, zeta: np.ndarray) -> np.ndarray:
        amps = self._prefix_stacks(np.asarray(zeta, dtype=float))[-1]
        return layers_mod.q_expectations(amps, 1, self.config.cutoff, self.config.hbar)[:, 0]

    def __call__(self, zeta: np.ndarray, step: int = 0) -> float:
        return self._cost_of_stack(self._prefix_stacks(np.asarray(zeta, dtype=float))[-1])

    def value_and_grad(self, zeta: np.ndarray, step: int = 0):
        zeta = np.asarray(zeta, dtype=float)
        stacks = self._prefix_stacks(zeta)
        cost = self._cost_of_stack(stacks[-1])
        grad = np.empty(self.dim)
        h = self.fd_step
        for li, spec in enumerate(self.network):
            seg = zeta[self.offsets[li] : self.offsets[li + 1]]
            for k in range(spec.param_count):
                vals = []
                for sign in (+1.0, -1.0):
                    pert = seg.copy()
                    pert[k] += sign * h
                    amps, _ = apply_layer(stacks[li], spec, pert, self.config, layer_index=li)
                    for lj in range(li + 1, len(self.network)):
                        seg_j = zeta[self.offsets[lj] : self.offsets[lj + 1]]
                        amps, _ = apply_layer(amps, self.network[lj], seg_j, self.config, layer_index=lj)
                    vals.append(self._cost_of_stack(amps))
                grad[self.offsets[li] + k] = (vals[0] - vals[1]) / (2 * h)
        return cost, grad

    def objective(self) -> Objective:
        return Objective(
            evaluate=self, dim=self.dim, name="curve_fit", value_and_grad=self.value_and_grad
        )


def cost_mse(zeta, network, xs, targets, config: SimConfig) -> float:
    return MseObjective(network, xs, targets, config)(zeta)


def cost_classification(correct_probs: np.ndarray) -> float:
    """C = sum_i (1 - p_i)^2 over the batch, p_i the correct-class probability."""
    p = np.asarray(correct_probs, dtype=float)
    return float(np.sum((1.0 - p) ** 2))
