"""Target states for the state-preparation task: Fock, coherent, cat, GKP."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTargetError, InsufficientCutoffError, InvalidCutoffError
from .fock import DEFAULT_HBAR, FockState, _readonly
from .meas import hermite_functions


@dataclass(frozen=True)
class TargetState(FockState):
    """A normalized single-mode state labeled with its construction recipe."""

    name: str = ""
    params: tuple = ()

    def param(self, key: str):
        return dict(self.params)[key]


def _build(amps: np.ndarray, name: str, params: dict) -> TargetState:
    norm = float(np.linalg.norm(amps))
    if norm < 1e-12:
        raise DegenerateTargetError(f"{name} construction produced a zero vector")
    params = dict(params)
    params.setdefault("norm_deficit", max(0.0, 1.0 - norm ** 2))
    return TargetState(
        modes=1,
        cutoff=len(amps),
        amps=_readonly(amps / norm),
        name=name,
        params=tuple(sorted(params.items())),
    )


def fock(n: int, cutoff: int) -> TargetState:
    if n >= cutoff:
        raise InvalidCutoffError(f"Fock level {n} needs cutoff > {n}")
    amps = np.zeros(cutoff, dtype=np.complex128)
    amps[n] = 1.0
    return _build(amps, f"fock{n}", {"n": n, "norm_deficit": 0.0})


def _coherent_amps(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff)))))
    with np.errstate(divide="ignore"):
        log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha) + (alpha == 0)) - 0.5 * log_fact
    amps = np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))
    if alpha == 0:
        amps = np.zeros(cutoff, dtype=np.complex128)
        amps[0] = 1.0
    return amps.astype(np.complex128)


def coherent(alpha: complex, cutoff: int) -> TargetState:
    """Truncated coherent state; ``norm_deficit`` records the Poisson tail beyond the cutoff."""
    amps = _coherent_amps(complex(alpha), cutoff)
    return _build(amps, "coherent", {"alpha": complex(alpha)})


def cat(alpha0: float, theta: float, cutoff: int) -> TargetState:
    """(D(alpha0) + e^{i theta} D(-alpha0))|0>, normalized.

    Raises for the destructive case alpha0 = 0, theta = pi where the
    superposition cancels exactly.
    """
    if alpha0 < 0:
        raise DegenerateTargetError("cat amplitude must be non-negative")
    plus = _coherent_amps(alpha0, cutoff)
    minus = plus * (-1.0) ** np.arange(cutoff)  # exact parity for real alpha0
    amps = plus + np.exp(1j * theta) * minus
    return _build(amps, "cat", {"alpha0": float(alpha0), "theta": float(theta)})


def gkp_real(eps: float, cutoff: int, n_max: int = 6, tol: float = 1e-8) -> TargetState:
    """Energy-damped grid state: e^{-eps n} applied to a comb of q-eigenstates.

    The comb sits at q = 2 n sqrt(pi hbar); expanding each delta-normalized
    q-eigenstate in Fock space via oscillator eigenfunctions makes the
    damped amplitudes c_m ~ e^{-eps m} sum_n psi_m(2 n sqrt(pi hbar)).
    The hbar dependence cancels in the normalized amplitudes, so none is
    taken.  Comb terms are added until the normalized state moves less
    than ``tol``.
    """
    if eps <= 0:
        raise InvalidCutoffError("damping must be positive")
    if cutoff < 10:
        raise InvalidCutoffError("grid-state construction needs cutoff >= 10")
    hbar = DEFAULT_HBAR
    damping = np.exp(-eps * np.arange(cutoff))

    def comb_state(nmax: int) -> np.ndarray:
        positions = 2.0 * np.sqrt(np.pi * hbar) * np.arange(-nmax, nmax + 1)
        h = hermite_functions(positions, cutoff, hbar)  # (cutoff, len(positions))
        amps = damping * h.sum(axis=1)
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise InsufficientCutoffError("grid-state comb vanished; increase cutoff")
        return amps / norm

    prev = comb_state(1)
    for nmax in range(2, n_max + 1):
        cur = comb_state(nmax)
        if np.linalg.norm(cur - prev) < tol:
            prev = cur
            break
        prev = cur
    else:
        cur = comb_state(n_max + 1)
        if np.linalg.norm(cur - prev) >= tol:
            raise InsufficientCutoffError(
                f"grid state did not converge by n_max={n_max} at cutoff {cutoff}"
            )
        prev = cur
    return _build(prev.astype(np.complex128), "gkp", {"eps": float(eps), "norm_deficit": 0.0})


def write_amplitudes_csv(state: FockState, path):
    """Serialize single-mode amplitudes as rows (n, Re, Im)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "re", "im"])
        for n, amp in enumerate(state.amps):
            writer.writerow([n, repr(float(amp.real)), repr(float(amp.imag))])


def read_amplitudes_csv(path, cutoff: int | None = None) -> FockState:
    rows = []
    with open(path) as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            rows.append(float(row[1]) + 1j * float(row[2]))
    amps = np.asarray(rows, dtype=np.complex128)
    if cutoff is not None:
        amps = amps[:cutoff]
    return FockState(modes=1, cutoff=len(amps), amps=_readonly(amps))
