"""Pure numpy implementations of the hot kernels.

Mirrors the compiled `_fast` extension exactly; see kernels/__init__.py.
All unitaries are 4x4 complex arrays acting on (first qubit, second qubit)
with row index 2*s_first + s_second. Statevectors are flat 1-D arrays of
length 2**nq with qubit 0 the most significant bit.
"""

import numpy as np

BACKEND_NAME = "pure"

_CZ_DIAG = np.array([1.0, 1.0, 1.0, -1.0])


def _ry(c, s):
    return np.array([[c, -s], [s, c]], dtype=complex)


def unitary_from_angles(p):
    """The 8-angle two-qubit unitary: (RyRz x RyRz) . CZ . (Ry x Ry) . CZ . (Ry x Ry)."""
    p = np.asarray(p, dtype=float)
    c = np.cos(0.5 * p)
    s = np.sin(0.5 * p)

    def ryrz(i, j):
        e0 = c[j] - 1j * s[j]
        e1 = c[j] + 1j * s[j]
        return np.array([[c[i] * e0, -s[i] * e1], [s[i] * e0, c[i] * e1]])

    m = np.kron(_ry(c[0], s[0]), _ry(c[1], s[1]))
    m = _CZ_DIAG[:, None] * m
    m = np.kron(_ry(c[2], s[2]), _ry(c[3], s[3])) @ m
    m = _CZ_DIAG[:, None] * m
    return np.kron(ryrz(4, 5), ryrz(6, 7)) @ m


def mps_from_angles(p):
    """MPS tensor A[s] = U[2s:2s+2, 0:2] of the angle-built unitary."""
    U = unitary_from_angles(p)
    return np.stack([U[0:2, 0:2], U[2:4, 0:2]])


def mixed_transfer(A, B):
    """4x4 transfer matrix sum_s kron(A^s, conj(B^s))."""
    return np.kron(A[0], B[0].conj()) + np.kron(A[1], B[1].conj())


def dressed_transfer(A, B, W):
    """Two-site transfer matrix with the gate W contracted between ket and bra.

    E_W = sum_{uv} kron(Theta^{uv}, conj(B^v B^u)) with
    Theta^{uv} = sum_{st} W[2u+v, 2s+t] (A^t A^s). Reduces to the square of
    the plain transfer matrix at W = I.
    """
    E = np.zeros((4, 4), dtype=complex)
    for u in (0, 1):
        for v in (0, 1):
            Th = np.zeros((2, 2), dtype=complex)
            for s in (0, 1):
                for t in (0, 1):
                    w = W[2 * u + v, 2 * s + t]
                    if w != 0:
                        Th += w * (A[t] @ A[s])
            E += np.kron(Th, (B[v] @ B[u]).conj())
    return E


def cap_amp(E, r, n):
    """vec(I)^dag E^n vec(r): the all-zeros amplitude with bond cap r."""
    v = np.asarray(r, dtype=complex).reshape(4).copy()
    for _ in range(n):
        v = E @ v
    return v[0] + v[3]


def apply_two_qubit(psi, gate, qa, qb, nq):
    """Apply a two-qubit gate to qubits (qa, qb) of a flat statevector."""
    st = psi.reshape((2,) * nq)
    g = np.asarray(gate, dtype=complex).reshape(2, 2, 2, 2)
    st = np.tensordot(g, st, axes=[[2, 3], [qa, qb]])
    st = np.moveaxis(st, [0, 1], [qa, qb])
    return np.ascontiguousarray(st).reshape(-1)


def evolution_statevector(U, Up, W, n_powers, fp_mode, V=None):
    """Statevector of the time-step overlap circuit.

    Qubit layout: [p0?, p1 .. p_{2n}, b] with b last. The ket staircase
    applies U on each (p_k, b), W dresses site pairs, the bra staircase
    applies U'^dag in reverse, and the optional fixed-point layer brackets
    the whole thing on (p0, b).
    """
    m = int(n_powers)
    has_fp = fp_mode != 0
    nsite = 2 * m
    nq = nsite + 1 + (1 if has_fp else 0)
    b = nq - 1
    off = 1 if has_fp else 0
    psi = np.zeros(2**nq, dtype=complex)
    psi[0] = 1.0
    if has_fp:
        ket_fp = V if fp_mode == 3 else U
        psi = apply_two_qubit(psi, ket_fp, 0, b, nq)
    for k in range(nsite):
        psi = apply_two_qubit(psi, U, off + k, b, nq)
    for j in range(m):
        psi = apply_two_qubit(psi, W, off + 2 * j, off + 2 * j + 1, nq)
    Upd = np.asarray(Up, dtype=complex).conj().T
    for k in reversed(range(nsite)):
        psi = apply_two_qubit(psi, Upd, off + k, b, nq)
    if has_fp:
        bra_fp = {1: Up, 2: U, 3: V}[fp_mode]
        psi = apply_two_qubit(psi, np.asarray(bra_fp, dtype=complex).conj().T, 0, b, nq)
    return psi


def evolution_probs(pU, pUp, W, n_powers, fp_mode, V=None):
    """(P_all_zeros, P_marginal(p0=0, b=0)) of the fixed-point evolution circuit."""
    U = unitary_from_angles(pU)
    Up = unitary_from_angles(pUp)
    psi = evolution_statevector(U, Up, W, n_powers, fp_mode, V)
    nq = int(np.log2(psi.size))
    pr = np.abs(psi) ** 2
    p_all = pr[0]
    mask = (1 << (nq - 1)) | 1  # bits of p0 and b
    idx = np.arange(pr.size)
    p_cond = float(pr[(idx & mask) == 0].sum())
    return float(p_all), p_cond


def dressed_amp(pU, pUp, W, n, cap_mode):
    """All-zeros amplitude of n dressed transfer powers with a chosen bond cap.

    cap_mode 0: |0><0|; 1: one mixed layer applied to |0><0|;
    2: one self layer applied to |0><0|.
    """
    A = mps_from_angles(pU)
    B = mps_from_angles(pUp)
    E = dressed_transfer(A, B, W)
    if cap_mode == 0:
        r = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    elif cap_mode == 1:
        r = sum(A[s][:, :1] @ B[s][:, :1].conj().T for s in (0, 1))
    elif cap_mode == 2:
        r = sum(A[s][:, :1] @ A[s][:, :1].conj().T for s in (0, 1))
    else:
        raise ValueError("cap_mode must be 0, 1 or 2")
    return cap_amp(E, r, n)


def sweep_terms(pU, pV, J, g):
    """(energy density, fixed-point residual) for the joint groundstate cost.

    Energy is J <ZZ> + g <X> contracted against the bond state encoded by V;
    the residual is Tr(rho_L - rho_R)^2 under one transfer layer of U.
    """
    V = unitary_from_angles(pV)
    phi = V[:, 0]
    rho = np.outer(phi[0:2], phi[0:2].conj()) + np.outer(phi[2:4], phi[2:4].conj())
    A = mps_from_angles(pU)
    rhoL = A[0] @ rho @ A[0].conj().T + A[1] @ rho @ A[1].conj().T
    zz = 0.0
    for s in (0, 1):
        for t in (0, 1):
            M = A[t] @ A[s]
            zz += (1 - 2 * s) * (1 - 2 * t) * np.trace(M @ rho @ M.conj().T).real
    x = 2.0 * np.trace(A[0] @ rho @ A[1].conj().T).real
    d = rhoL - rho
    residual = np.trace(d @ d).real
    return J * zz + g * x, residual
