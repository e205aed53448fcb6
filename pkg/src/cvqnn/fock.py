"""Truncated-Fock-space states and the operator algebra acting on them.

A state over ``M`` modes with per-mode cutoff ``D`` is stored as a flat
complex vector of length ``D**M`` in little-endian mode order: the flat
index is ``n_0 + D*n_1 + D**2*n_2 + ...``, i.e. mode 0 is the
fastest-varying tensor index.  Two-mode gate matrices follow the matching
kron convention: for target modes ``(i, j)`` the row index is
``n_i * D + n_j`` (first-listed mode most significant).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import (
    ImpossibleOutcomeError,
    InvalidCutoffError,
    InvalidTargetError,
    LeakageError,
    ShapeMismatchError,
)

DEFAULT_HBAR = 2.0

#: outcome probabilities below this are treated as impossible
PROB_FLOOR = 1e-14


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FockState:
    """Pure state of ``modes`` bosonic modes, each truncated to ``cutoff`` levels.

    ``norm_tracked`` is the survival probability accumulated through
    non-unitary events (projections, conditioned Kraus maps); it is
    non-increasing and unaffected by :meth:`normalize`.
    """

    modes: int
    cutoff: int
    amps: np.ndarray
    norm_tracked: float = 1.0

    def __post_init__(self):
        if self.cutoff < 2:
            raise InvalidCutoffError(f"cutoff must be >= 2, got {self.cutoff}")
        if self.modes < 1:
            raise ShapeMismatchError(f"modes must be >= 1, got {self.modes}")
        expected = self.cutoff ** self.modes
        if self.amps.shape != (expected,):
            raise ShapeMismatchError(
                f"amplitude vector has shape {self.amps.shape}, expected ({expected},)"
            )

    @property
    def dim(self) -> int:
        return self.cutoff ** self.modes

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalize(self) -> "FockState":
        n = self.norm()
        if n < PROB_FLOOR:
            raise ImpossibleOutcomeError("cannot normalize a numerically zero state")
        return replace(self, amps=_readonly(self.amps / n))

    def tensor(self, other: "FockState") -> "FockState":
        """Attach ``other`` as new highest-index mode(s)."""
        if other.cutoff != self.cutoff:
            raise ShapeMismatchError("tensor factors must share a cutoff")
        amps = np.kron(other.amps, self.amps)
        return FockState(
            modes=self.modes + other.modes,
            cutoff=self.cutoff,
            amps=_readonly(amps),
            norm_tracked=self.norm_tracked * other.norm_tracked,
        )

    def marginal_population(self, mode: int) -> np.ndarray:
        """Per-level probability of one mode, marginalizing the others."""
        t = self.amps.reshape((self.cutoff,) * self.modes)
        axis = self.modes - 1 - mode
        other = tuple(ax for ax in range(self.modes) if ax != axis)
        return np.abs(t) ** 2 if not other else (np.abs(t) ** 2).sum(axis=other)

    def top_level_population(self, levels: int = 2) -> float:
        """Total probability of the top ``levels`` Fock levels over all modes."""
        total = 0.0
        for m in range(self.modes):
            total += float(self.marginal_population(m)[-levels:].sum())
        return total


def vacuum(modes: int, cutoff: int) -> FockState:
    amps = np.zeros(cutoff ** modes, dtype=np.complex128)
    amps[0] = 1.0
    return FockState(modes=modes, cutoff=cutoff, amps=_readonly(amps))


def basis_state(occupations, cutoff: int) -> FockState:
    """|n_0, n_1, ...> with little-endian flat indexing."""
    occupations = list(occupations)
    if any(n < 0 or n >= cutoff for n in occupations):
        raise InvalidCutoffError(f"occupation out of range for cutoff {cutoff}")
    idx = 0
    for m, n in enumerate(occupations):
        idx += n * cutoff ** m
    amps = np.zeros(cutoff ** len(occupations), dtype=np.complex128)
    amps[idx] = 1.0
    return FockState(modes=len(occupations), cutoff=cutoff, amps=_readonly(amps))


def from_amplitudes(amps, cutoff: int, modes: int = 1, norm_tracked: float = 1.0) -> FockState:
    arr = np.asarray(amps, dtype=np.complex128).reshape(-1).copy()
    return FockState(modes=modes, cutoff=cutoff, amps=_readonly(arr), norm_tracked=norm_tracked)


@dataclass(frozen=True)
class ModeOperator:
    """A (possibly non-unitary) operator on a single mode.

    ``matrix`` is ``(D, D)``, or ``(1, D)`` for a rank-reducing bra such as
    a Fock projector <n|, which removes the measured mode on projection.
    """

    cutoff: int
    matrix: np.ndarray
    hermitian: bool = False
    label: str = "custom"


@dataclass(frozen=True)
class QuadratureOperators:
    """Ladder and quadrature matrices for one mode at a given cutoff/hbar."""

    cutoff: int
    hbar: float
    a: np.ndarray
    adag: np.ndarray
    n: np.ndarray
    q: np.ndarray
    p: np.ndarray


@lru_cache(maxsize=64)
def make_operators(cutoff: int, hbar: float = DEFAULT_HBAR) -> QuadratureOperators:
    """Build {a, a†, n, q, p} with <n-1|a|n> = sqrt(n), q = sqrt(hbar/2)(a+a†)."""
    if cutoff < 2:
        raise InvalidCutoffError(f"cutoff must be >= 2, got {cutoff}")
    if hbar <= 0:
        raise InvalidCutoffError(f"hbar must be positive, got {hbar}")
    a = np.zeros((cutoff, cutoff), dtype=np.complex128)
    for n in range(1, cutoff):
        a[n - 1, n] = np.sqrt(n)
    adag = a.conj().T.copy()
    num = adag @ a
    scale = np.sqrt(hbar / 2.0)
    q = scale * (a + adag)
    p = 1j * scale * (adag - a)
    for m in (a, adag, num, q, p):
        m.flags.writeable = False
    return QuadratureOperators(cutoff=cutoff, hbar=hbar, a=a, adag=adag, n=num, q=q, p=p)


@lru_cache(maxsize=64)
def position_eigensystem(cutoff: int):
    """Eigendecomposition of the dimensionless quadrature x = a + a†.

    Returns (eigenvalues, eigenvectors); physical q eigenvalues are
    sqrt(hbar/2) times these.  Cached: the same decomposition backs every
    multiplication-operator construction at a given cutoff.
    """
    ops = make_operators(cutoff, 2.0)
    x = np.real(ops.a + ops.adag)
    vals, vecs = np.linalg.eigh(x)
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return vals, vecs


@lru_cache(maxsize=64)
def momentum_eigensystem(cutoff: int):
    """Eigendecomposition of the dimensionless quadrature y = i(a† - a)."""
    ops = make_operators(cutoff, 2.0)
    y = 1j * (ops.adag - ops.a)
    vals, vecs = np.linalg.eigh(y)
    vals.flags.writeable = False
    vecs.flags.writeable = False
    return vals, vecs


class LeakageMonitor:
    """Tracks cutoff-leakage risk across a run.

    Each gate application records the squared-norm drop plus any increase
    of population in the top two Fock levels of the touched modes.  When
    the accumulated total exceeds ``budget`` the run aborts with a
    diagnostic listing the worst offenders.  ``budget=None`` disables the
    abort but keeps recording.
    """

    def __init__(self, budget: float | None = 1e-4):
        self.budget = budget
        self.total = 0.0
        self.events: list[tuple[str, float]] = []

    def record(self, context: str, amount: float):
        if amount <= 0.0:
            return
        self.total += amount
        self.events.append((context, amount))
        if self.budget is not None and self.total > self.budget:
            worst = sorted(self.events, key=lambda e: -e[1])[:5]
            detail = ", ".join(f"{c}: {v:.2e}" for c, v in worst)
            raise LeakageError(
                f"cutoff leakage budget exceeded: total {self.total:.2e} > "
                f"{self.budget:.2e} (worst events: {detail})",
                events=self.events,
            )


def _apply_matrix_flat(amps: np.ndarray, matrix: np.ndarray, modes_idx, n_modes: int, cutoff: int) -> np.ndarray:
    """Apply a k-mode matrix to the listed modes of a flat state vector.

    Works on a single flat vector of length D**M.  Gate rows are indexed
    with the first listed mode most significant.
    """
    k = len(modes_idx)
    t = amps.reshape((cutoff,) * n_modes)
    axes = [n_modes - 1 - m for m in modes_idx]
    t = np.moveaxis(t, axes, range(k))
    rest = t.shape[k:]
    t = matrix @ t.reshape(cutoff ** k, -1)
    t = np.moveaxis(t.reshape((cutoff,) * k + rest), range(k), axes)
    return np.ascontiguousarray(t).reshape(-1)


def apply_gate(state: FockState, gate, modes, monitor: LeakageMonitor | None = None) -> FockState:
    """Apply a gate matrix to the designated tensor factors of the state."""
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise InvalidTargetError(f"repeated mode index in {modes}")
    if any(m < 0 or m >= state.modes for m in modes):
        raise InvalidTargetError(f"mode index out of range in {modes} for {state.modes} modes")
    dim = state.cutoff ** len(modes)
    matrix = gate.matrix if hasattr(gate, "matrix") else np.asarray(gate)
    if matrix.shape != (dim, dim):
        raise ShapeMismatchError(
            f"gate of shape {matrix.shape} cannot act on {len(modes)} mode(s) at cutoff {state.cutoff}"
        )
    out = _apply_matrix_flat(state.amps, matrix, modes, state.modes, state.cutoff)
    new_state = replace(state, amps=_readonly(out))
    if monitor is not None:
        pre = float(np.vdot(state.amps, state.amps).real)
        post = float(np.vdot(out, out).real)
        drop = max(0.0, (pre - post) / max(pre, PROB_FLOOR))
        top_pre = sum(state.marginal_population(m)[-2:].sum() for m in modes)
        top_post = sum(new_state.marginal_population(m)[-2:].sum() for m in modes)
        label = getattr(gate, "kind", "gate")
        monitor.record(f"{label} on modes {modes}", drop + max(0.0, float(top_post - top_pre)))
    return new_state


def project_mode(state: FockState, mode: int, kraus: ModeOperator) -> tuple[FockState, float]:
    """Apply a single-mode Kraus/projector and return (state, probability).

    The returned state is unnormalized; its squared norm relative to the
    input is the outcome probability.  A (1, D) bra removes the measured
    mode from the state.  ``norm_tracked`` is multiplied by the
    probability.
    """
    if mode < 0 or mode >= state.modes:
        raise InvalidTargetError(f"mode {mode} out of range")
    mat = kraus.matrix
    D = state.cutoff
    if mat.shape == (D, D):
        out = _apply_matrix_flat(state.amps, mat, [mode], state.modes, D)
        new_modes = state.modes
    elif mat.shape == (1, D):
        if state.modes == 1:
            raise InvalidTargetError("cannot remove the only mode")
        t = state.amps.reshape((D,) * state.modes)
        axis = state.modes - 1 - mode
        out = np.tensordot(mat[0], t, axes=([0], [axis])).reshape(-1)
        new_modes = state.modes - 1
    else:
        raise ShapeMismatchError(f"kraus matrix shape {mat.shape} unsupported at cutoff {D}")
    pre = float(np.vdot(state.amps, state.amps).real)
    post = float(np.vdot(out, out).real)
    prob = post / max(pre, PROB_FLOOR)
    if prob < PROB_FLOOR:
        raise ImpossibleOutcomeError(
            f"outcome probability {prob:.3e} below {PROB_FLOOR:.0e} for mode {mode}"
        )
    new_state = FockState(
        modes=new_modes,
        cutoff=D,
        amps=_readonly(out),
        norm_tracked=state.norm_tracked * prob,
    )
    return new_state, prob


def fock_bra(n: int, cutoff: int) -> ModeOperator:
    """<n| as a rank-reducing projector usable with :func:`project_mode`."""
    if n < 0 or n >= cutoff:
        raise InvalidCutoffError(f"Fock level {n} outside cutoff {cutoff}")
    mat = np.zeros((1, cutoff), dtype=np.complex128)
    mat[0, n] = 1.0
    mat.flags.writeable = False
    return ModeOperator(cutoff=cutoff, matrix=mat, hermitian=False, label=f"<{n}|")


def overlap(state1: FockState, state2: FockState) -> complex:
    if state1.modes != state2.modes or state1.cutoff != state2.cutoff:
        raise ShapeMismatchError("states must share modes and cutoff")
    return complex(np.vdot(state1.amps, state2.amps))
