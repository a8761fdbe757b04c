"""criticalcircuits: a desk-scale simulator of circuit iMPS at bond dimension 2.

Translationally invariant states are encoded as an infinite staircase of one
two-qubit unitary; groundstate search, real-time evolution through a
dynamical phase transition, device-noise emulation and error mitigation all
reduce to small dense transfer-matrix algebra, checked against an exact
free-fermion oracle.
"""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
