"""Measurement-induced nonlinearity on a primary mode via an ancilla qumode.

The element entangles the primary mode with a fresh ancilla prepared in a
real coherent state |alpha> through a controlled displacement CX(s), then
measures the ancilla's photon number.  Conditioned on the outcome, the
primary mode undergoes a multiplication operator in the position basis:
with ``beta(x) = alpha + s x / 2`` (x the dimensionless quadrature
``a + a†``; the physical ``s q / sqrt(2 hbar)`` loses its hbar in ladder
units),

    K_n       = e^{-beta^2/2} beta^n / sqrt(n!)        (PNR outcome n)
    K_noclick = e^{-beta^2/2}                          (threshold, no click)
    K_click   = sqrt(1 - e^{-beta^2})                  (threshold, click;
                 canonical positive square root of the click POVM element)

The repeat-until-success loop feeds the failure branch back with a fresh
ancilla until the success outcome occurs.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import ImpossibleOutcomeError, StallError
from .fock import (
    FockState,
    ModeOperator,
    apply_gate,
    fock_bra,
    position_eigensystem,
    project_mode,
    vacuum,
)
from .gates import cx_direct, displacement

#: PNR outcomes are summed/sampled up to this photon number
PNR_OUTCOME_CAP = 60


@dataclass(frozen=True)
class Detector:
    """Ancilla readout model: photon-number-resolving or click/no-click."""

    kind: str = "pnr"  # "pnr" | "threshold"
    n: int = 1  # success outcome for the pnr detector

    def __post_init__(self):
        if self.kind not in ("pnr", "threshold"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if self.kind == "pnr" and self.n < 0:
            raise ValueError("pnr target outcome must be >= 0")


@dataclass(frozen=True)
class NonlinConfig:
    """One nonlinear element: ancilla coherence (hyperparameter), CX strength, detector."""

    alpha: float = 1.0
    s: float = 0.0
    detector: Detector = field(default_factory=Detector)
    max_loops: int = 20

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("ancilla coherence must be >= 0")
        if self.max_loops < 1:
            raise ValueError("max_loops must be >= 1")


def _beta_spectrum(alpha: float, s: float, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    lam, V = position_eigensystem(cutoff)
    return alpha + 0.5 * s * lam, V


def _from_spectrum(values: np.ndarray, V: np.ndarray) -> np.ndarray:
    mat = (V * values) @ V.conj().T
    mat.flags.writeable = False
    return mat


@lru_cache(maxsize=100_000)
def _kraus_matrix(alpha: float, s: float, outcome, cutoff: int) -> np.ndarray:
    beta, V = _beta_spectrum(alpha, s, cutoff)
    if outcome == "no_click":
        f = np.exp(-0.5 * beta ** 2)
    elif outcome == "click":
        f = np.sqrt(np.maximum(0.0, 1.0 - np.exp(-(beta ** 2))))
    else:
        n = int(outcome)
        # |beta|^n / sqrt(n!) in log space; beta may be negative or zero
        mag = np.abs(beta)
        with np.errstate(divide="ignore"):
            logmag = np.where(mag > 0, n * np.log(np.where(mag > 0, mag, 1.0)), -np.inf)
        f = np.exp(-0.5 * beta ** 2 + logmag - 0.5 * gammaln(n + 1.0)) * np.sign(beta) ** n
        if n == 0:
            f = np.exp(-0.5 * beta ** 2)
    return _from_spectrum(f, V)


def kraus_operator(config: NonlinConfig, outcome, cutoff: int) -> ModeOperator:
    """Conditional operator on the primary mode for one detector outcome.

    ``outcome`` is a photon number for the PNR detector, or one of
    ``"click"`` / ``"no_click"`` for the threshold detector.
    """
    if config.detector.kind == "pnr":
        if not isinstance(outcome, (int, np.integer)):
            raise ImpossibleOutcomeError(f"PNR detector outcome must be an integer, got {outcome!r}")
    elif outcome not in ("click", "no_click"):
        raise ImpossibleOutcomeError(f"threshold detector outcome must be click/no_click, got {outcome!r}")
    mat = _kraus_matrix(float(config.alpha), float(config.s), outcome, cutoff)
    label = f"K[{outcome}]"
    return ModeOperator(cutoff=cutoff, matrix=mat, hermitian=True, label=label)


def success_outcome(config: NonlinConfig):
    return config.detector.n if config.detector.kind == "pnr" else "click"


def failure_outcome(config: NonlinConfig):
    """The no-click branch used when a loop iteration fails."""
    return 0 if config.detector.kind == "pnr" else "no_click"


def apply_element_exact(
    state: FockState, primary_mode: int, config: NonlinConfig, outcome
) -> tuple[FockState, float]:
    """Full two-mode circuit: attach ancilla, displace, entangle, project.

    Returns the unnormalized primary-register state (ancilla removed) and
    the outcome probability.  Must agree with applying
    :func:`kraus_operator` directly, which the test suite enforces.

    The threshold ``click`` branch is not a pure projection (the clicked
    ancilla is traced over); it is defined through the canonical Kraus,
    with the probability taken as the complement of the no-click circuit.
    """
    D = state.cutoff
    anc_index = state.modes
    with_anc = state.tensor(vacuum(1, D))
    with_anc = apply_gate(with_anc, displacement(config.alpha, D), [anc_index])
    entangled = apply_gate(with_anc, cx_direct(config.s, D), [primary_mode, anc_index])
    if config.detector.kind == "pnr" or outcome == "no_click":
        proj = fock_bra(0 if outcome == "no_click" else int(outcome), D)
        return project_mode(entangled, anc_index, proj)
    if outcome != "click":
        raise ImpossibleOutcomeError(f"unknown outcome {outcome!r}")
    _, p_noclick = project_mode(entangled, anc_index, fock_bra(0, D))
    p_click = 1.0 - p_noclick
    if p_click < 1e-14:
        raise ImpossibleOutcomeError("click probability numerically zero")
    out, _ = project_mode_with_kraus(state, primary_mode, config, "click")
    return out, p_click


def project_mode_with_kraus(
    state: FockState, primary_mode: int, config: NonlinConfig, outcome
) -> tuple[FockState, float]:
    """Apply the element through its Kraus operator (no ancilla simulation)."""
    k = kraus_operator(config, outcome, state.cutoff)
    return project_mode(state, primary_mode, k)


def outcome_probabilities(state: FockState, primary_mode: int, config: NonlinConfig) -> dict:
    """Probability of each detector outcome on a normalized state."""
    if config.detector.kind == "threshold":
        _, p_no = project_mode_with_kraus(state, primary_mode, config, "no_click")
        p_no_val = p_no
        return {"no_click": p_no_val, "click": max(0.0, 1.0 - p_no_val)}
    probs = {}
    total = 0.0
    for n in range(PNR_OUTCOME_CAP + 1):
        k = kraus_operator(config, n, state.cutoff)
        try:
            _, p = project_mode(state, primary_mode, k)
        except ImpossibleOutcomeError:
            p = 0.0
        probs[n] = p
        total += p
        if total > 1.0 - 1e-12:
            break
    return probs


def apply_element_rus(
    state: FockState,
    primary_mode: int,
    config: NonlinConfig,
    rng: np.random.Generator,
) -> tuple[FockState, int]:
    """Repeat-until-success application: sample outcomes, feed failures back.

    Each iteration samples the detector; on the success outcome the success
    Kraus is applied and the normalized state returned together with the
    number of loops used.  On failure the observed outcome's back-action is
    applied, the state renormalized, and a fresh ancilla attached.  Raises
    after ``config.max_loops`` consecutive failures.
    """
    succ = success_outcome(config)
    current = state.normalize()
    for loop in range(1, config.max_loops + 1):
        probs = outcome_probabilities(current, primary_mode, config)
        outcomes = list(probs.keys())
        weights = np.array([probs[o] for o in outcomes], dtype=float)
        weights = np.maximum(weights, 0.0)
        weights = weights / weights.sum()
        choice = outcomes[int(rng.choice(len(outcomes), p=weights))]
        new_state, _ = project_mode_with_kraus(current, primary_mode, config, choice)
        current = new_state.normalize()
        if choice == succ:
            return current, loop
    raise StallError(
        f"no success outcome within {config.max_loops} loops "
        f"(alpha={config.alpha}, s={config.s}, detector={config.detector.kind})"
    )


@dataclass
class LoopStats:
    """Loop-count histograms per quantum layer, aggregated over forward passes.

    Histograms cover successful passes only; passes abandoned after
    ``max_loops`` consecutive failures are tallied in ``stalled``.
    """

    per_layer: dict = field(default_factory=dict)  # layer index -> Counter{loops: count}
    total_attempts: int = 0
    stalled: int = 0

    def record(self, layer: int, loops: int):
        self.per_layer.setdefault(layer, Counter())[loops] += 1
        self.total_attempts += loops

    def successes(self, layer: int) -> int:
        return sum(self.per_layer[layer].values())

    def success_rate_first_try(self, layer: int) -> float:
        c = self.per_layer[layer]
        return c.get(1, 0) / max(1, sum(c.values()))

    def mean_loops(self, layer: int) -> float:
        c = self.per_layer[layer]
        return sum(k * v for k, v in c.items()) / max(1, sum(c.values()))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["layer", "loop_count", "frequency"])
            for layer in sorted(self.per_layer):
                for loops in sorted(self.per_layer[layer]):
                    writer.writerow([layer, loops, self.per_layer[layer][loops]])

    @classmethod
    def from_csv(cls, path) -> "LoopStats":
        stats = cls()
        with open(path) as fh:
            reader = csv.reader(fh)
            next(reader)
            for layer, loops, freq in reader:
                stats.per_layer.setdefault(int(layer), Counter())[int(loops)] = int(freq)
                stats.total_attempts += int(loops) * int(freq)
        return stats


def loop_statistics(network, zetas, inputs, config, seed: int) -> LoopStats:
    """RUS loop-count histograms for each layer of a network over input states.

    ``network`` is a list of layer specs, ``zetas`` either one flat
    parameter vector shared by all inputs or one vector per input, and
    ``inputs`` a list of :class:`FockState`.  Elements within one layer
    contribute to the same histogram row.
    """
    from . import layers as layers_mod  # deferred: layers imports this module

    stats = LoopStats()
    rng = np.random.default_rng(seed)
    per_sample = not isinstance(zetas, np.ndarray) or np.asarray(zetas, dtype=object).ndim > 1
    for i, state in enumerate(inputs):
        zeta = zetas[i] if per_sample else zetas
        scratch = LoopStats()
        try:
            layers_mod.forward_rus(network, np.asarray(zeta, dtype=float), state, config, rng, scratch)
        except StallError:
            stats.stalled += 1
            stats.total_attempts += scratch.total_attempts
            continue
        for layer, counter in scratch.per_layer.items():
            for loops, freq in counter.items():
                stats.per_layer.setdefault(layer, Counter())[loops] += freq
        stats.total_attempts += scratch.total_attempts
    return stats
