"""Continuous-variable photonic neural-network simulator on a truncated Fock space.

Gaussian gates only; nonlinearity enters through measurement of ancillary
modes with repeat-until-success feedback.  Includes a hybrid
quantum-classical training stack and a CLI reproducing the bundled case
studies (state preparation, curve fitting, fraud detection, digit
classification).
"""

__version__ = "0.1.0"

from .fock import DEFAULT_HBAR, FockState, apply_gate, make_operators, project_mode, vacuum

__all__ = [
    "DEFAULT_HBAR",
    "FockState",
    "apply_gate",
    "make_operators",
    "project_mode",
    "vacuum",
    "__version__",
]
