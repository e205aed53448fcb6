"""Declarative network layers over p primary modes and forward evaluation.

The standard layer is a nearest-neighbor beamsplitter chain, followed by a
rotation, a squeezer and a displacement on every mode, then one
measurement-induced nonlinear element per mode (7p - 2 parameters total).
Ancillas are created and destroyed inside each element, so the live
register never exceeds p modes plus one transient ancilla.

Evaluation is stacked: a batch of states is a (D**p, B) matrix and all
shared gates act on the whole stack at once.  ``forward`` is the
single-state wrapper.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import gates as gates_mod
from . import nonlin
from .errors import ShapeMismatchError
from .fock import DEFAULT_HBAR, FockState, LeakageMonitor, _readonly, make_operators
from .nonlin import Detector, NonlinConfig

SQUASH_BOUNDS = {"bs_theta": 1.5, "phase": None, "squeeze": 1.4, "disp": 1.5, "cx": 1.0}


@dataclass(frozen=True)
class GateSlot:
    kind: str  # 'bs' | 'rot' | 'squeeze' | 'disp' | 'cx'
    modes: tuple
    slots: tuple  # indices into the layer's parameter segment
    squash: tuple  # per-slot squash kind


@dataclass(frozen=True)
class LayerSpec:
    p: int
    gates: tuple
    param_count: int
    has_nonlinearity: bool = True

    def slot_kinds(self) -> list:
        kinds = [None] * self.param_count
        for g in self.gates:
            for s, k in zip(g.slots, g.squash):
                if kinds[s] is not None:
                    raise ShapeMismatchError(f"parameter slot {s} referenced twice")
                kinds[s] = k
        if any(k is None for k in kinds):
            raise ShapeMismatchError("unreferenced parameter slot in layer")
        return kinds


def standard_layer(p: int) -> LayerSpec:
    """The 7p - 2 parameter layer: BS chain, R, S, D per mode, CX per mode."""
    if p < 1:
        raise ShapeMismatchError("layer needs at least one primary mode")
    slots = iter(range(7 * p - 2))
    parts = []
    for m in range(p - 1):
        parts.append(GateSlot("bs", (m, m + 1), (next(slots), next(slots)), ("bs_theta", "phase")))
    for m in range(p):
        parts.append(GateSlot("rot", (m,), (next(slots),), ("phase",)))
    for m in range(p):
        parts.append(GateSlot("squeeze", (m,), (next(slots),), ("squeeze",)))
    for m in range(p):
        parts.append(GateSlot("disp", (m,), (next(slots), next(slots)), ("disp", "disp")))
    for m in range(p):
        parts.append(GateSlot("cx", (m,), (next(slots),), ("cx",)))
    return LayerSpec(p=p, gates=tuple(parts), param_count=7 * p - 2)


@dataclass(frozen=True)
class SimConfig:
    """Shared simulation settings for network evaluation."""

    cutoff: int
    hbar: float = DEFAULT_HBAR
    alpha: float = 1.0
    detector: Detector = field(default_factory=Detector)
    success_at_loop: int = 1  # k > 1 conditions on k-1 no-click failures first
    leak_budget: float | None = None

    def nonlin_config(self, s: float) -> NonlinConfig:
        return NonlinConfig(alpha=self.alpha, s=s, detector=self.detector)


@dataclass(frozen=True)
class NetworkOutput:
    state: FockState
    readout_kind: str
    readout: np.ndarray | None
    success_probability: float


def network_params(network) -> int:
    return sum(spec.param_count for spec in network)


def param_offsets(network) -> list:
    offs = [0]
    for spec in network:
        offs.append(offs[-1] + spec.param_count)
    return offs


def init_params(network, seed: int, scale: float = 0.05) -> np.ndarray:
    """Uniform initialization in [-scale, scale], reproducible under seed."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-scale, scale, network_params(network))


def squash_value(kind: str, value: float) -> float:
    bound = SQUASH_BOUNDS[kind]
    return value if bound is None else bound * np.tanh(value)


def encode_classical(inputs: np.ndarray, layer: LayerSpec) -> np.ndarray:
    """Map raw classical outputs onto gate parameters with per-kind squashing.

    Phases pass through; every amplitude-like slot is tanh-bounded so the
    encoding cannot push the register against the cutoff.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.shape != (layer.param_count,):
        raise ShapeMismatchError(
            f"encoding vector of length {inputs.shape} does not match {layer.param_count} slots"
        )
    kinds = layer.slot_kinds()
    return np.array([squash_value(k, v) for k, v in zip(kinds, inputs)])


# ---------------------------------------------------------------------------
# stacked evaluation core


@lru_cache(maxsize=4096)
def _stack_perms(p: int, modes: tuple):
    """Forward/backward transpose permutations moving mode axes to the front."""
    k = len(modes)
    axes = [p - 1 - m for m in modes]
    rest = [ax for ax in range(p + 1) if ax not in axes]
    fwd = tuple(axes + rest)
    back = tuple(np.argsort(fwd))
    return fwd, back, k


def _stack_apply(amps: np.ndarray, matrix: np.ndarray, modes, p: int, cutoff: int) -> np.ndarray:
    """Apply a k-mode matrix to columns of a (cutoff**p, B) stack."""
    B = amps.shape[1]
    fwd, back, k = _stack_perms(p, tuple(modes))
    t = amps.reshape((cutoff,) * p + (B,)).transpose(fwd)
    rest = t.shape[k:]
    t = matrix @ t.reshape(cutoff ** k, -1)
    t = t.reshape((cutoff,) * k + rest).transpose(back)
    return np.ascontiguousarray(t).reshape(cutoff ** p, B)


def _gate_matrix(slot: GateSlot, params, cutoff: int):
    if slot.kind == "bs":
        return gates_mod.beamsplitter(params[0], params[1], cutoff).matrix
    if slot.kind == "rot":
        return gates_mod.rotation(params[0], cutoff).matrix
    if slot.kind == "squeeze":
        return gates_mod.squeezing(params[0], 0.0, cutoff).matrix
    if slot.kind == "disp":
        return gates_mod.displacement(params[0] + 1j * params[1], cutoff).matrix
    raise ShapeMismatchError(f"unknown gate kind {slot.kind}")


def apply_layer(
    amps: np.ndarray,
    spec: LayerSpec,
    params: np.ndarray,
    config: SimConfig,
    monitor: LeakageMonitor | None = None,
    layer_index: int = 0,
    gate_start: int = 0,
    gate_stop: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Run one layer (or a contiguous gate slice) over a state stack.

    Returns (stack, per-column success probability).  Nonlinear elements
    use the deterministic conditioned branch: success at loop
    ``config.success_at_loop``, i.e. k-1 normalized no-click failures
    followed by the success Kraus.  Columns are renormalized after each
    element and the conditional probabilities multiply into the returned
    success probability.  The gate range supports prefix-sharing callers
    (finite differences that perturb a single gate).
    """
    D = config.cutoff
    p = spec.p
    success = np.ones(amps.shape[1])
    top_pre = _top_two_mass(amps, p, D) if monitor is not None else None
    for slot in spec.gates[gate_start:gate_stop]:
        vals = [params[i] for i in slot.slots]
        if slot.kind == "cx":
            ncfg = config.nonlin_config(vals[0])
            branch_ops = []
            for _ in range(config.success_at_loop - 1):
                branch_ops.append(nonlin.kraus_operator(ncfg, nonlin.failure_outcome(ncfg), D))
            branch_ops.append(nonlin.kraus_operator(ncfg, nonlin.success_outcome(ncfg), D))
            for op in branch_ops:
                amps = _stack_apply(amps, op.matrix, slot.modes, p, D)
                norms_sq = np.einsum("ij,ij->j", amps.conj(), amps).real
                if np.any(norms_sq < 1e-14):
                    raise nonlin.ImpossibleOutcomeError(
                        f"element on mode {slot.modes[0]} in layer {layer_index} hit a "
                        f"zero-probability branch"
                    )
                success *= norms_sq
                amps = amps / np.sqrt(norms_sq)
        else:
            mat = _gate_matrix(slot, vals, D)
            if monitor is not None:
                pre = np.einsum("ij,ij->j", amps.conj(), amps).real
            amps = _stack_apply(amps, mat, slot.modes, p, D)
            if monitor is not None:
                post = np.einsum("ij,ij->j", amps.conj(), amps).real
                drop = float(np.max(np.maximum(0.0, 1.0 - post / np.maximum(pre, 1e-14))))
                top = _top_two_mass(amps, p, D)
                inc = max(0.0, top - top_pre)
                top_pre = top
                monitor.record(f"layer {layer_index} {slot.kind} on {slot.modes}", drop + inc)
    return amps, success


def _top_two_mass(amps: np.ndarray, p: int, cutoff: int) -> float:
    """Worst per-column population of any mode's top two Fock levels."""
    t = (np.abs(amps) ** 2).reshape((cutoff,) * p + (-1,))
    worst = 0.0
    for axis in range(p):
        sl = [slice(None)] * (p + 1)
        sl[axis] = slice(cutoff - 2, cutoff)
        mass = t[tuple(sl)].sum(axis=tuple(range(p)))
        worst = max(worst, float(np.max(mass)))
    return worst


def class_probabilities(amps: np.ndarray, p: int, cutoff: int) -> np.ndarray:
    """P(mode i clicks and every other primary mode is vacuum), shape (B, p).

    This is the overlap with the one-hot photon patterns: all population in
    the class mode, none elsewhere.  Exclusivity is what lets the loss
    discriminate; a plain marginal click probability is maximized by
    lighting up every mode at once.
    """
    B = amps.shape[1]
    t = (np.abs(amps) ** 2).reshape((cutoff,) * p + (B,))
    probs = np.empty((B, p))
    for mode in range(p):
        axis = p - 1 - mode
        sl = [0] * p + [slice(None)]
        sl[axis] = slice(1, None)
        probs[:, mode] = t[tuple(sl)].sum(axis=0)
    return probs


def q_expectations(amps: np.ndarray, p: int, cutoff: int, hbar: float) -> np.ndarray:
    """Per-mode <q> for each column, shape (B, p)."""
    q = make_operators(cutoff, hbar).q
    B = amps.shape[1]
    out = np.empty((B, p))
    for mode in range(p):
        proj = _stack_apply(amps, q, [mode], p, cutoff)
        out[:, mode] = np.einsum("ij,ij->j", amps.conj(), proj).real
    return out


def forward(
    network,
    zeta: np.ndarray,
    input_state: FockState,
    readout: str = "none",
    config: SimConfig | None = None,
) -> NetworkOutput:
    """Evaluate the network on one input state with the conditioned success branch."""
    if config is None:
        config = SimConfig(cutoff=input_state.cutoff)
    p = network[0].p
    if input_state.modes != p:
        raise ShapeMismatchError(f"input has {input_state.modes} modes, network expects {p}")
    if input_state.cutoff != config.cutoff:
        raise ShapeMismatchError("input cutoff differs from configured cutoff")
    zeta = np.asarray(zeta, dtype=float)
    offs = param_offsets(network)
    if zeta.shape != (offs[-1],):
        raise ShapeMismatchError(f"parameter vector length {zeta.shape} != {offs[-1]}")
    monitor = LeakageMonitor(config.leak_budget) if config.leak_budget is not None else None
    amps = input_state.amps.reshape(-1, 1).astype(np.complex128)
    success = np.ones(1)
    for li, spec in enumerate(network):
        seg = zeta[offs[li] : offs[li + 1]]
        try:
            amps, prob = apply_layer(amps, spec, seg, config, monitor, layer_index=li)
        except nonlin.ImpossibleOutcomeError as exc:
            raise type(exc)(f"layer {li}: {exc}") from exc
        success = success * prob
    state = FockState(
        modes=p,
        cutoff=config.cutoff,
        amps=_readonly(amps[:, 0].copy()),
        norm_tracked=float(success[0]) * input_state.norm_tracked,
    )
    values = None
    if readout == "q_expectations":
        values = q_expectations(amps, p, config.cutoff, config.hbar)[0]
    elif readout == "class_probabilities":
        values = class_probabilities(amps, p, config.cutoff)[0]
    elif readout != "none":
        raise ShapeMismatchError(f"unknown readout {readout!r}")
    return NetworkOutput(
        state=state,
        readout_kind=readout,
        readout=values,
        success_probability=float(success[0]),
    )


def forward_rus(
    network,
    zeta: np.ndarray,
    input_state: FockState,
    config: SimConfig,
    rng: np.random.Generator,
    stats: nonlin.LoopStats | None = None,
) -> tuple[FockState, list]:
    """Forward pass sampling the repeat-until-success loop for every element.

    Returns the final state and the per-element loop counts; histogram rows
    append to ``stats`` keyed by layer index.
    """
    state = input_state
    offs = param_offsets(network)
    loops_used = []
    for li, spec in enumerate(network):
        seg = zeta[offs[li] : offs[li + 1]]
        amps = state.amps.reshape(-1, 1).astype(np.complex128)
        for slot in spec.gates:
            vals = [seg[i] for i in slot.slots]
            if slot.kind == "cx":
                interim = FockState(
                    modes=spec.p, cutoff=config.cutoff, amps=_readonly(amps[:, 0].copy())
                ).normalize()
                ncfg = NonlinConfig(
                    alpha=config.alpha, s=vals[0], detector=config.detector
                )
                interim, loops = nonlin.apply_element_rus(interim, slot.modes[0], ncfg, rng)
                loops_used.append((li, loops))
                if stats is not None:
                    stats.record(li, loops)
                amps = interim.amps.reshape(-1, 1).astype(np.complex128)
            else:
                amps = _stack_apply(amps, _gate_matrix(slot, vals, config.cutoff), slot.modes, spec.p, config.cutoff)
        state = FockState(modes=spec.p, cutoff=config.cutoff, amps=_readonly(amps[:, 0].copy()))
    return state.normalize(), loops_used


# ---------------------------------------------------------------------------
# serialization


def network_to_json(network, config: SimConfig) -> str:
    doc = {
        "p": network[0].p,
        "layers": len(network),
        "cutoff": config.cutoff,
        "hbar": config.hbar,
        "alpha": config.alpha,
        "detector": {"kind": config.detector.kind, "n": config.detector.n},
        "success_at_loop": config.success_at_loop,
        "squash_bounds": SQUASH_BOUNDS,
        "param_count": network_params(network),
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def network_from_json(text: str) -> tuple[list, SimConfig]:
    doc = json.loads(text)
    network = [standard_layer(doc["p"]) for _ in range(doc["layers"])]
    config = SimConfig(
        cutoff=doc["cutoff"],
        hbar=doc["hbar"],
        alpha=doc["alpha"],
        detector=Detector(kind=doc["detector"]["kind"], n=doc["detector"]["n"]),
        success_at_loop=doc.get("success_at_loop", 1),
    )
    return network, config
