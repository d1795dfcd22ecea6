# cython: language_level=3
"""Compiled reconstruction kernels (hot path of the tomography bootstrap).

Semantics match ``_kernels_py`` exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log

cnp.import_array()

ctypedef double complex cplx

cdef double _PROB_FLOOR = 1e-12


cdef inline void _mat_mult(const cplx* a, const cplx* b, cplx* out) noexcept nogil:
    cdef int i, j, k
    cdef cplx acc
    for i in range(4):
        for j in range(4):
            acc = 0
            for k in range(4):
                acc += a[4 * i + k] * b[4 * k + j]
            out[4 * i + j] = acc


cdef double _mle_core(const cplx* effects, const double* freqs, Py_ssize_t n_eff,
                      cplx* rho, double tol, int max_iter,
                      int* out_iters, double* out_resid) noexcept nogil:
    cdef cplx r_op[16]
    cdef cplx tmp[16]
    cdef cplx new[16]
    cdef double ll, prev_ll, weight, resid, tr, diff
    cdef double p_k
    cdef cplx acc
    cdef Py_ssize_t k
    cdef int i, j, it, n_iters

    prev_ll = -1e300
    resid = 1e300
    n_iters = 0
    for it in range(1, max_iter + 1):
        n_iters = it
        # p_k = Re tr(E_k rho); R = sum_k (f_k / p_k) E_k; ll = sum f_k log p_k
        for i in range(16):
            r_op[i] = 0
        ll = 0.0
        for k in range(n_eff):
            acc = 0
            for i in range(4):
                for j in range(4):
                    acc += effects[16 * k + 4 * i + j] * rho[4 * j + i]
            p_k = acc.real
            if p_k < _PROB_FLOOR:
                p_k = _PROB_FLOOR
            ll += freqs[k] * log(p_k)
            weight = freqs[k] / p_k
            for i in range(16):
                r_op[i] = r_op[i] + weight * effects[16 * k + i]
        if ll + 1e-12 < prev_ll:
            # Diluted step: (I + R)/2.
            for i in range(4):
                for j in range(4):
                    r_op[4 * i + j] = r_op[4 * i + j] / 2.0
                r_op[5 * i] = r_op[5 * i] + 0.5
        _mat_mult(r_op, rho, tmp)
        _mat_mult(tmp, r_op, new)
        # Hermitise and renormalise.
        for i in range(4):
            for j in range(i, 4):
                acc = (new[4 * i + j] + new[4 * j + i].conjugate()) / 2.0
                new[4 * i + j] = acc
                new[4 * j + i] = acc.conjugate()
        tr = 0.0
        for i in range(4):
            tr += new[5 * i].real
        resid = 0.0
        for i in range(16):
            new[i] = new[i] / tr
            diff = abs(new[i] - rho[i])
            if diff > resid:
                resid = diff
            rho[i] = new[i]
        prev_ll = ll
        if resid < tol:
            break
    # Final log-likelihood at the returned point.
    ll = 0.0
    for k in range(n_eff):
        acc = 0
        for i in range(4):
            for j in range(4):
                acc += effects[16 * k + 4 * i + j] * rho[4 * j + i]
        p_k = acc.real
        if p_k < _PROB_FLOOR:
            p_k = _PROB_FLOOR
        ll += freqs[k] * log(p_k)
    out_iters[0] = n_iters
    out_resid[0] = resid
    return ll


def mle_fixed_point(effects, freqs, rho0, double tol=1e-10, int max_iter=10_000):
    """See ``_kernels_py.mle_fixed_point``."""
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] eff = np.ascontiguousarray(effects, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1, mode="c"] f = np.ascontiguousarray(freqs, dtype=np.float64)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] rho = np.array(rho0, dtype=np.complex128, order="C")
    cdef int iters = 0
    cdef double resid = 0.0
    cdef double ll
    ll = _mle_core(&eff[0, 0, 0], &f[0], eff.shape[0], &rho[0, 0], tol, max_iter, &iters, &resid)
    return rho, iters, resid, ll


def mle_fixed_point_batch(effects, freq_sets, rho0, double tol=1e-10, int max_iter=10_000):
    """See ``_kernels_py.mle_fixed_point_batch``."""
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] eff = np.ascontiguousarray(effects, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=2, mode="c"] f = np.ascontiguousarray(freq_sets, dtype=np.float64)
    cdef cnp.ndarray[cplx, ndim=2, mode="c"] start = np.array(rho0, dtype=np.complex128, order="C")
    cdef Py_ssize_t batch = f.shape[0]
    cdef cnp.ndarray[cplx, ndim=3, mode="c"] rhos = np.empty((batch, 4, 4), dtype=np.complex128)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] iters = np.empty(batch, dtype=np.int64)
    cdef cplx rho_work[16]
    cdef int n_it = 0
    cdef double resid = 0.0
    cdef Py_ssize_t b, i
    for b in range(batch):
        for i in range(16):
            rho_work[i] = (&start[0, 0])[i]
        _mle_core(&eff[0, 0, 0], &f[b, 0], eff.shape[0], rho_work, tol, max_iter, &n_it, &resid)
        for i in range(16):
            (&rhos[b, 0, 0])[i] = rho_work[i]
        iters[b] = n_it
    return rhos, iters
