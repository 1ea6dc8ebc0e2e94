# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simulator kernels; see ``_kernels_py`` for the reference semantics."""

import numpy as np

ctypedef double complex cplx


cdef void _rows_1q(cplx[:, ::1] rho, Py_ssize_t m, cplx u00, cplx u01, cplx u10, cplx u11) nogil:
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t i0, i1, j
    cdef cplx a, b
    for i0 in range(dim):
        if i0 & m:
            continue
        i1 = i0 | m
        for j in range(dim):
            a = rho[i0, j]
            b = rho[i1, j]
            rho[i0, j] = u00 * a + u01 * b
            rho[i1, j] = u10 * a + u11 * b


cdef void _cols_1q(cplx[:, ::1] rho, Py_ssize_t m, cplx c00, cplx c01, cplx c10, cplx c11) nogil:
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t i, j0, j1
    cdef cplx a, b
    for i in range(dim):
        for j0 in range(dim):
            if j0 & m:
                continue
            j1 = j0 | m
            a = rho[i, j0]
            b = rho[i, j1]
            rho[i, j0] = a * c00 + b * c01
            rho[i, j1] = a * c10 + b * c11


cdef void _rows_2q(cplx[:, ::1] rho, Py_ssize_t ma, Py_ssize_t mb, const cplx[:, ::1] u) nogil:
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t base, j, r, k
    cdef Py_ssize_t idx[4]
    cdef cplx v[4]
    cdef cplx acc
    for base in range(dim):
        if base & ma or base & mb:
            continue
        idx[0] = base
        idx[1] = base | mb
        idx[2] = base | ma
        idx[3] = base | ma | mb
        for j in range(dim):
            for k in range(4):
                v[k] = rho[idx[k], j]
            for r in range(4):
                acc = 0
                for k in range(4):
                    acc = acc + u[r, k] * v[k]
                rho[idx[r], j] = acc


cdef void _cols_2q(cplx[:, ::1] rho, Py_ssize_t ma, Py_ssize_t mb, const cplx[:, ::1] u) nogil:
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t base, i, r, k
    cdef Py_ssize_t idx[4]
    cdef cplx v[4]
    cdef cplx acc
    for i in range(dim):
        for base in range(dim):
            if base & ma or base & mb:
                continue
            idx[0] = base
            idx[1] = base | mb
            idx[2] = base | ma
            idx[3] = base | ma | mb
            for k in range(4):
                v[k] = rho[i, idx[k]]
            for r in range(4):
                acc = 0
                for k in range(4):
                    acc = acc + v[k] * u[r, k].conjugate()
                rho[i, idx[r]] = acc


def dm_apply_unitary(cplx[:, ::1] rho, u, qubits, int n):
    cdef const cplx[:, ::1] uu = np.ascontiguousarray(u, dtype=np.complex128)
    cdef Py_ssize_t ma, mb
    if len(qubits) == 1:
        ma = 1 << (n - 1 - qubits[0])
        with nogil:
            _rows_1q(rho, ma, uu[0, 0], uu[0, 1], uu[1, 0], uu[1, 1])
            _cols_1q(rho, ma, uu[0, 0].conjugate(), uu[0, 1].conjugate(),
                     uu[1, 0].conjugate(), uu[1, 1].conjugate())
    else:
        ma = 1 << (n - 1 - qubits[0])
        mb = 1 << (n - 1 - qubits[1])
        with nogil:
            _rows_2q(rho, ma, mb, uu)
            _cols_2q(rho, ma, mb, uu)
    return rho.base


def dm_depolarize(cplx[:, ::1] rho, double p, qubits, int n):
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t i, j, ma, mb, x, i2
    cdef double keep = 1.0 - p
    cdef cplx sigma
    cdef Py_ssize_t idx[4]
    cdef Py_ssize_t jdx[4]
    if len(qubits) == 1:
        ma = 1 << (n - 1 - qubits[0])
        with nogil:
            for i in range(dim):
                if i & ma:
                    continue
                for j in range(dim):
                    if j & ma:
                        continue
                    sigma = 0.5 * p * (rho[i, j] + rho[i | ma, j | ma])
                    rho[i, j] = keep * rho[i, j] + sigma
                    rho[i | ma, j | ma] = keep * rho[i | ma, j | ma] + sigma
                    rho[i, j | ma] = keep * rho[i, j | ma]
                    rho[i | ma, j] = keep * rho[i | ma, j]
    else:
        ma = 1 << (n - 1 - qubits[0])
        mb = 1 << (n - 1 - qubits[1])
        with nogil:
            for i in range(dim):
                if i & ma or i & mb:
                    continue
                idx[0] = i
                idx[1] = i | mb
                idx[2] = i | ma
                idx[3] = i | ma | mb
                for j in range(dim):
                    if j & ma or j & mb:
                        continue
                    jdx[0] = j
                    jdx[1] = j | mb
                    jdx[2] = j | ma
                    jdx[3] = j | ma | mb
                    sigma = 0
                    for x in range(4):
                        sigma = sigma + rho[idx[x], jdx[x]]
                    sigma = 0.25 * p * sigma
                    for x in range(4):
                        for i2 in range(4):
                            rho[idx[x], jdx[i2]] = keep * rho[idx[x], jdx[i2]]
                        rho[idx[x], jdx[x]] = rho[idx[x], jdx[x]] + sigma
    return rho.base


def dm_thermal(cplx[:, ::1] rho, int q, int n, double p_ad, double coherence):
    cdef Py_ssize_t dim = rho.shape[0]
    cdef Py_ssize_t i, j
    cdef Py_ssize_t m = 1 << (n - 1 - q)
    with nogil:
        for i in range(dim):
            if i & m:
                continue
            for j in range(dim):
                if j & m:
                    continue
                rho[i, j] = rho[i, j] + p_ad * rho[i | m, j | m]
                rho[i | m, j | m] = (1.0 - p_ad) * rho[i | m, j | m]
                rho[i, j | m] = coherence * rho[i, j | m]
                rho[i | m, j] = coherence * rho[i | m, j]
    return rho.base


def sv_apply(psi, u, qubits, int n):
    if psi.ndim != 1:
        from ._kernels_py import sv_apply as _py
        return _py(psi, u, qubits, n)
    cdef cplx[::1] s = np.array(psi, dtype=np.complex128)
    cdef const cplx[:, ::1] uu = np.ascontiguousarray(u, dtype=np.complex128)
    cdef Py_ssize_t dim = s.shape[0]
    cdef Py_ssize_t i0, ma, mb, r, k
    cdef cplx a, b, acc
    cdef Py_ssize_t idx[4]
    cdef cplx v[4]
    if len(qubits) == 1:
        ma = 1 << (n - 1 - qubits[0])
        with nogil:
            for i0 in range(dim):
                if i0 & ma:
                    continue
                a = s[i0]
                b = s[i0 | ma]
                s[i0] = uu[0, 0] * a + uu[0, 1] * b
                s[i0 | ma] = uu[1, 0] * a + uu[1, 1] * b
    else:
        ma = 1 << (n - 1 - qubits[0])
        mb = 1 << (n - 1 - qubits[1])
        with nogil:
            for i0 in range(dim):
                if i0 & ma or i0 & mb:
                    continue
                idx[0] = i0
                idx[1] = i0 | mb
                idx[2] = i0 | ma
                idx[3] = i0 | ma | mb
                for k in range(4):
                    v[k] = s[idx[k]]
                for r in range(4):
                    acc = 0
                    for k in range(4):
                        acc = acc + uu[r, k] * v[k]
                    s[idx[r]] = acc
    return np.asarray(s)
