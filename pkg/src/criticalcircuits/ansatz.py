"""The 8-angle two-qubit state unitary and the two-site Trotter gate.

The state unitary is a hardware-style circuit on (physical, bond) qubits:

    U(p) = (Ry(p4)Rz(p5) x Ry(p6)Rz(p7)) . CZ . (Ry(p2) x Ry(p3)) . CZ
           . (Ry(p0) x Ry(p1))

All angles at zero give the identity (the two CZs cancel). Eight angles in
this two-CZ arrangement are enough to reach the bond-dimension-2 variational
optimum of the transverse-field Ising chain at every coupling we test, which
a single-entangler layout is not (it caps the reachable energy at
-(1 + g^2/4) per site).

Rotations use the half-angle convention Ry(t) = exp(-i t Y / 2),
Rz(t) = exp(-i t Z / 2), so a 2 pi shift of one angle flips the global sign
of U without changing the state.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels, numerics
from .errors import NotUnitary

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


@dataclass
class HamiltonianParams:
    """Ising chain couplings: H = sum_i J Z_i Z_{i+1} + g X_i."""

    J: float = 1.0
    g: float = 1.0


def ry(theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta):
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def canonicalize_angles(p):
    """Map angles into (-pi, pi] for comparisons."""
    q = np.mod(np.asarray(p, dtype=float), 2 * np.pi)
    q[q > np.pi] -= 2 * np.pi
    return q


def check_params(p):
    p = np.asarray(p, dtype=float)
    if p.shape != (8,):
        raise ValueError(f"expected 8 angles, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("angles must be finite")
    return p


def build_unitary(p):
    """The 4x4 state unitary U(p); deterministic and smooth in the angles."""
    return kernels.unitary_from_angles(check_params(p))


def mps_tensor(U):
    """Reshape a state unitary into the MPS tensor A^s_{ij} = <s,i|U|0,j>.

    The first register is the physical qubit (fed |0>), the second the bond.
    Unitarity of U makes A left canonical: sum_{s,i} conj(A^s_{ij}) A^s_{ij'}
    = delta_{jj'}.
    """
    U = np.asarray(U, dtype=complex)
    if not numerics.assert_unitary(U, 1e-10):
        raise NotUnitary("state unitary fails the 1e-10 unitarity check")
    return np.stack([U[0:2, 0:2], U[2:4, 0:2]])


def two_site_hamiltonian(h):
    """H2 = J Z(x)Z + (g/2)(X(x)I + I(x)X); the single-site field is split so
    that tiling even bonds covers every site's field exactly once."""
    eye = np.eye(2)
    return h.J * np.kron(PAULI_Z, PAULI_Z) + 0.5 * h.g * (
        np.kron(PAULI_X, eye) + np.kron(eye, PAULI_X)
    )


def trotter_gate(h, dt):
    """W = exp(+i H2 dt), the even-bond evolution gate."""
    return numerics.unitary_exp(two_site_hamiltonian(h), dt)


def second_order_trotter_gate_pair(h, dt):
    """(W_even, W_odd) = (exp(i H2 dt), exp(i H2 dt/2)) for symmetric layering."""
    return trotter_gate(h, dt), trotter_gate(h, dt / 2)
