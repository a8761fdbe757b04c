"""Numerical kernels with a compiled core and a pure-numpy fallback.

The hot loops of the package (SPSA cost evaluations) reduce to a handful of
small fixed-size operations: building a 4x4 unitary from 8 angles, forming
(dressed) transfer matrices, contracting small statevectors. The compiled
`_fast` extension implements these in C; `_pure` is a function-for-function
numpy mirror used when the extension is unavailable or when
CRITCIRC_PURE_PYTHON=1 is set.

Fixed-point layer modes for the evolution circuits:
    FP_NONE  - no extra layer, bond starts in |0>
    FP_MIXED - ket applies U, bra applies U'^dag
    FP_SELF  - ket applies U, bra applies U^dag
    FP_ENV   - ket applies the environment unitary V, bra applies V^dag
"""

import os

FP_NONE, FP_MIXED, FP_SELF, FP_ENV = 0, 1, 2, 3

if os.environ.get("CRITCIRC_PURE_PYTHON") == "1":
    from . import _pure as backend
else:
    try:
        from . import _fast as backend  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as backend

BACKEND = backend.BACKEND_NAME

unitary_from_angles = backend.unitary_from_angles
mps_from_angles = backend.mps_from_angles
mixed_transfer = backend.mixed_transfer
dressed_transfer = backend.dressed_transfer
cap_amp = backend.cap_amp
apply_two_qubit = backend.apply_two_qubit
evolution_statevector = backend.evolution_statevector
evolution_probs = backend.evolution_probs
dressed_amp = backend.dressed_amp
sweep_terms = backend.sweep_terms


def get_backend(name):
    """Return a backend module by name ("fast" or "pure"); for benchmarks."""
    if name == "pure":
        from . import _pure

        return _pure
    if name == "fast":
        from . import _fast  # type: ignore[attr-defined]

        return _fast
    raise ValueError(f"unknown backend {name!r}")
