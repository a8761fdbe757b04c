# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Function-for-function mirror of _pure (which documents the conventions).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()

BACKEND_NAME = "fast"

ctypedef double complex cplx


cdef void _mm2(const cplx* a, const cplx* b, cplx* o) noexcept nogil:
    o[0] = a[0] * b[0] + a[1] * b[2]
    o[1] = a[0] * b[1] + a[1] * b[3]
    o[2] = a[2] * b[0] + a[3] * b[2]
    o[3] = a[2] * b[1] + a[3] * b[3]


cdef void _mm4(const cplx* a, const cplx* b, cplx* o) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc = acc + a[4 * i + k] * b[4 * k + j]
            o[4 * i + j] = acc


cdef void _kron22(const cplx* a, const cplx* b, cplx* o) noexcept nogil:
    cdef int i, j, k, l
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    o[4 * (2 * i + k) + 2 * j + l] = a[2 * i + j] * b[2 * k + l]


cdef void _u8(const double* p, cplx* U) noexcept nogil:
    cdef double c[8]
    cdef double s[8]
    cdef int i
    for i in range(8):
        c[i] = cos(0.5 * p[i])
        s[i] = sin(0.5 * p[i])
    cdef cplx r0[4]
    cdef cplx r1[4]
    cdef cplx l1[16]
    cdef cplx l2[16]
    cdef cplx tmp[16]
    # layer 1: Ry x Ry
    r0[0] = c[0]; r0[1] = -s[0]; r0[2] = s[0]; r0[3] = c[0]
    r1[0] = c[1]; r1[1] = -s[1]; r1[2] = s[1]; r1[3] = c[1]
    _kron22(r0, r1, l1)
    # CZ: negate row 3
    for i in range(4):
        l1[12 + i] = -l1[12 + i]
    # layer 2: Ry x Ry
    r0[0] = c[2]; r0[1] = -s[2]; r0[2] = s[2]; r0[3] = c[2]
    r1[0] = c[3]; r1[1] = -s[3]; r1[2] = s[3]; r1[3] = c[3]
    _kron22(r0, r1, l2)
    _mm4(l2, l1, tmp)
    for i in range(4):
        tmp[12 + i] = -tmp[12 + i]
    # layer 3: RyRz x RyRz
    cdef cplx e0, e1
    e0 = c[5] - 1j * s[5]; e1 = c[5] + 1j * s[5]
    r0[0] = c[4] * e0; r0[1] = -s[4] * e1; r0[2] = s[4] * e0; r0[3] = c[4] * e1
    e0 = c[7] - 1j * s[7]; e1 = c[7] + 1j * s[7]
    r1[0] = c[6] * e0; r1[1] = -s[6] * e1; r1[2] = s[6] * e0; r1[3] = c[6] * e1
    _kron22(r0, r1, l2)
    _mm4(l2, tmp, U)


cdef void _mps(const cplx* U, cplx* A) noexcept nogil:
    # A[s*4 + 2i + j] = U[(2s+i)*4 + j]
    cdef int s, i, j
    for s in range(2):
        for i in range(2):
            for j in range(2):
                A[4 * s + 2 * i + j] = U[4 * (2 * s + i) + j]


cdef void _dressed(const cplx* A, const cplx* B, const cplx* W, cplx* E) noexcept nogil:
    cdef int u, v, s, t, i, j, k, l
    cdef cplx w
    cdef cplx Th[4]
    cdef cplx M[4]
    cdef cplx Bm[4]
    for i in range(16):
        E[i] = 0
    for u in range(2):
        for v in range(2):
            for i in range(4):
                Th[i] = 0
            for s in range(2):
                for t in range(2):
                    w = W[4 * (2 * u + v) + 2 * s + t]
                    if w != 0:
                        _mm2(&A[4 * t], &A[4 * s], M)
                        for i in range(4):
                            Th[i] = Th[i] + w * M[i]
            _mm2(&B[4 * v], &B[4 * u], Bm)
            for i in range(2):
                for j in range(2):
                    for k in range(2):
                        for l in range(2):
                            E[4 * (2 * i + k) + 2 * j + l] = (
                                E[4 * (2 * i + k) + 2 * j + l]
                                + Th[2 * i + j] * Bm[2 * k + l].conjugate()
                            )


cdef cplx _cap_amp(const cplx* E, const cplx* r, int n) noexcept nogil:
    cdef cplx v[4]
    cdef cplx w[4]
    cdef int i, j, it
    cdef cplx acc
    for i in range(4):
        v[i] = r[i]
    for it in range(n):
        for i in range(4):
            acc = 0
            for j in range(4):
                acc = acc + E[4 * i + j] * v[j]
            w[i] = acc
        for i in range(4):
            v[i] = w[i]
    return v[0] + v[3]


cdef void _apply_gate(cplx* psi, const cplx* G, int qa, int qb, int nq) noexcept nogil:
    cdef long sa = 1 << (nq - 1 - qa)
    cdef long sb = 1 << (nq - 1 - qb)
    cdef long dim = 1 << nq
    cdef long idx, i1, i2, i3
    cdef cplx v0, v1, v2, v3
    for idx in range(dim):
        if (idx & sa) or (idx & sb):
            continue
        i1 = idx | sb
        i2 = idx | sa
        i3 = idx | sa | sb
        v0 = psi[idx]; v1 = psi[i1]; v2 = psi[i2]; v3 = psi[i3]
        psi[idx] = G[0] * v0 + G[1] * v1 + G[2] * v2 + G[3] * v3
        psi[i1] = G[4] * v0 + G[5] * v1 + G[6] * v2 + G[7] * v3
        psi[i2] = G[8] * v0 + G[9] * v1 + G[10] * v2 + G[11] * v3
        psi[i3] = G[12] * v0 + G[13] * v1 + G[14] * v2 + G[15] * v3


cdef void _dag4(const cplx* M, cplx* out) noexcept nogil:
    cdef int i, j
    for i in range(4):
        for j in range(4):
            out[4 * i + j] = M[4 * j + i].conjugate()


cdef void _evolution_state(const cplx* U, const cplx* Up, const cplx* W,
                           int n_powers, int fp_mode, const cplx* V,
                           cplx* psi) noexcept nogil:
    cdef int nsite = 2 * n_powers
    cdef int has_fp = 1 if fp_mode != 0 else 0
    cdef int nq = nsite + 1 + has_fp
    cdef int b = nq - 1
    cdef int off = has_fp
    cdef long dim = 1 << nq
    cdef long i
    cdef int k, j
    cdef cplx Upd[16]
    cdef cplx fpd[16]
    for i in range(dim):
        psi[i] = 0
    psi[0] = 1
    if has_fp:
        if fp_mode == 3:
            _apply_gate(psi, V, 0, b, nq)
        else:
            _apply_gate(psi, U, 0, b, nq)
    for k in range(nsite):
        _apply_gate(psi, U, off + k, b, nq)
    for j in range(n_powers):
        _apply_gate(psi, W, off + 2 * j, off + 2 * j + 1, nq)
    _dag4(Up, Upd)
    for k in range(nsite - 1, -1, -1):
        _apply_gate(psi, Upd, off + k, b, nq)
    if has_fp:
        if fp_mode == 1:
            _apply_gate(psi, Upd, 0, b, nq)
        elif fp_mode == 2:
            _dag4(U, fpd)
            _apply_gate(psi, fpd, 0, b, nq)
        else:
            _dag4(V, fpd)
            _apply_gate(psi, fpd, 0, b, nq)


cdef cplx* _as16(object M, cplx* buf):
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] arr = np.ascontiguousarray(M, dtype=complex)
    cdef int i, j
    for i in range(4):
        for j in range(4):
            buf[4 * i + j] = arr[i, j]
    return buf


def unitary_from_angles(p):
    cdef cnp.ndarray[double, ndim=1, mode="c"] pp = np.ascontiguousarray(p, dtype=float)
    out = np.empty((4, 4), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] o = out
    _u8(&pp[0], &o[0, 0])
    return out


def mps_from_angles(p):
    cdef cnp.ndarray[double, ndim=1, mode="c"] pp = np.ascontiguousarray(p, dtype=float)
    cdef cplx U[16]
    _u8(&pp[0], U)
    out = np.empty((2, 2, 2), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] o = out
    _mps(U, &o[0, 0, 0])
    return out


def mixed_transfer(A, B):
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] a = np.ascontiguousarray(A, dtype=complex)
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] b = np.ascontiguousarray(B, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] o = out
    cdef int s, i, j, k, l
    for s in range(2):
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    for l in range(2):
                        o[2 * i + k, 2 * j + l] += a[s, i, j] * b[s, k, l].conjugate()
    return out


def dressed_transfer(A, B, W):
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] a = np.ascontiguousarray(A, dtype=complex)
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] b = np.ascontiguousarray(B, dtype=complex)
    cdef cplx Wb[16]
    _as16(W, Wb)
    out = np.empty((4, 4), dtype=complex)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] o = out
    _dressed(&a[0, 0, 0], &b[0, 0, 0], Wb, &o[0, 0])
    return out


def cap_amp(E, r, n):
    cdef cplx Eb[16]
    _as16(E, Eb)
    cdef cnp.ndarray[cplx, ndim=1, mode="c"] rv = np.ascontiguousarray(r, dtype=complex).reshape(4)
    return complex(_cap_amp(Eb, &rv[0], int(n)))


def apply_two_qubit(psi, gate, qa, qb, nq):
    out = np.array(psi, dtype=complex, copy=True).reshape(-1)
    cdef cnp.ndarray[cplx, ndim=1, mode="c"] o = out
    cdef cplx G[16]
    _as16(gate, G)
    _apply_gate(&o[0], G, int(qa), int(qb), int(nq))
    return out


def evolution_statevector(U, Up, W, n_powers, fp_mode, V=None):
    cdef cplx Ub[16]
    cdef cplx Upb[16]
    cdef cplx Wb[16]
    cdef cplx Vb[16]
    _as16(U, Ub)
    _as16(Up, Upb)
    _as16(W, Wb)
    if V is not None:
        _as16(V, Vb)
    cdef int m = int(n_powers)
    cdef int fp = int(fp_mode)
    cdef int nq = 2 * m + 1 + (1 if fp != 0 else 0)
    out = np.empty(1 << nq, dtype=complex)
    cdef cnp.ndarray[cplx, ndim=1, mode="c"] o = out
    _evolution_state(Ub, Upb, Wb, m, fp, Vb if V is not None else NULL, &o[0])
    return out


def evolution_probs(pU, pUp, W, n_powers, fp_mode, V=None):
    cdef cnp.ndarray[double, ndim=1, mode="c"] pa = np.ascontiguousarray(pU, dtype=float)
    cdef cnp.ndarray[double, ndim=1, mode="c"] pb = np.ascontiguousarray(pUp, dtype=float)
    cdef cplx Ub[16]
    cdef cplx Upb[16]
    cdef cplx Wb[16]
    cdef cplx Vb[16]
    _u8(&pa[0], Ub)
    _u8(&pb[0], Upb)
    _as16(W, Wb)
    if V is not None:
        _as16(V, Vb)
    cdef int m = int(n_powers)
    cdef int fp = int(fp_mode)
    cdef int nq = 2 * m + 1 + (1 if fp != 0 else 0)
    cdef long dim = 1 << nq
    cdef cnp.ndarray[cplx, ndim=1, mode="c"] psi = np.empty(dim, dtype=complex)
    _evolution_state(Ub, Upb, Wb, m, fp, Vb if V is not None else NULL, &psi[0])
    cdef long mask = (1 << (nq - 1)) | 1
    cdef long idx
    cdef double p_all, p_cond = 0.0, pr
    p_all = (psi[0] * psi[0].conjugate()).real
    for idx in range(dim):
        if (idx & mask) == 0:
            pr = (psi[idx] * psi[idx].conjugate()).real
            p_cond += pr
    return p_all, p_cond


def dressed_amp(pU, pUp, W, n, cap_mode):
    cdef cnp.ndarray[double, ndim=1, mode="c"] pa = np.ascontiguousarray(pU, dtype=float)
    cdef cnp.ndarray[double, ndim=1, mode="c"] pb = np.ascontiguousarray(pUp, dtype=float)
    cdef cplx Ub[16]
    cdef cplx Upb[16]
    cdef cplx Wb[16]
    cdef cplx A[8]
    cdef cplx B[8]
    cdef cplx E[16]
    cdef cplx r[4]
    cdef int cm = int(cap_mode)
    cdef int s, i, j
    _u8(&pa[0], Ub)
    _u8(&pb[0], Upb)
    _as16(W, Wb)
    _mps(Ub, A)
    _mps(Upb, B)
    _dressed(A, B, Wb, E)
    if cm == 0:
        r[0] = 1; r[1] = 0; r[2] = 0; r[3] = 0
    else:
        for i in range(4):
            r[i] = 0
        for s in range(2):
            for i in range(2):
                for j in range(2):
                    if cm == 1:
                        r[2 * i + j] = r[2 * i + j] + A[4 * s + 2 * i] * B[4 * s + 2 * j].conjugate()
                    else:
                        r[2 * i + j] = r[2 * i + j] + A[4 * s + 2 * i] * A[4 * s + 2 * j].conjugate()
    return complex(_cap_amp(E, r, int(n)))


def sweep_terms(pU, pV, J, g):
    cdef cnp.ndarray[double, ndim=1, mode="c"] pu = np.ascontiguousarray(pU, dtype=float)
    cdef cnp.ndarray[double, ndim=1, mode="c"] pv = np.ascontiguousarray(pV, dtype=float)
    cdef cplx U[16]
    cdef cplx V[16]
    cdef cplx A[8]
    cdef cplx rho[4]
    cdef cplx rhoL[4]
    cdef cplx M[4]
    cdef cplx T1[4]
    cdef cplx T2[4]
    cdef cplx phi[4]
    cdef int s, t, i, j, k
    cdef double zz = 0.0, x, resid
    cdef cplx acc
    _u8(&pu[0], U)
    _u8(&pv[0], V)
    _mps(U, A)
    for i in range(4):
        phi[i] = V[4 * i]  # column 0 of V
    for i in range(2):
        for j in range(2):
            rho[2 * i + j] = phi[i] * phi[j].conjugate() + phi[2 + i] * phi[2 + j].conjugate()
    # rhoL = sum_s A_s rho A_s^dag
    for i in range(4):
        rhoL[i] = 0
    for s in range(2):
        _mm2(&A[4 * s], rho, T1)
        for i in range(2):
            for j in range(2):
                acc = 0
                for k in range(2):
                    acc = acc + T1[2 * i + k] * A[4 * s + 2 * j + k].conjugate()
                rhoL[2 * i + j] = rhoL[2 * i + j] + acc
    # zz
    for s in range(2):
        for t in range(2):
            _mm2(&A[4 * t], &A[4 * s], M)
            _mm2(M, rho, T1)
            # tr(T1 M^dag) = sum_ij T1[i,j] conj(M[i,j])
            acc = 0
            for i in range(4):
                acc = acc + T1[i] * M[i].conjugate()
            zz += (1 - 2 * s) * (1 - 2 * t) * acc.real
    # x = 2 Re tr(A0 rho A1^dag)
    _mm2(&A[0], rho, T1)
    acc = 0
    for i in range(4):
        acc = acc + T1[i] * A[4 + i].conjugate()
    x = 2.0 * acc.real
    # residual
    for i in range(4):
        T2[i] = rhoL[i] - rho[i]
    resid = 0.0
    for i in range(2):
        for j in range(2):
            resid += (T2[2 * i + j] * T2[2 * j + i]).real
    return float(J) * zz + float(g) * x, resid
