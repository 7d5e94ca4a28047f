# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the numpy hot kernels (see _kernels_np.py).

Arithmetic is ordered exactly like the fallback so both backends agree; the
extension is built without fp contraction for the same reason.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "compiled"


def chain_ito(double[:, ::1] dw, double[:, ::1] fvals):
    cdef Py_ssize_t npaths = dw.shape[0]
    cdef Py_ssize_t m = dw.shape[1]
    cdef Py_ssize_t nlev = fvals.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] z_arr = np.ones((npaths, m + 1))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] nxt_arr
    cdef double[:, ::1] z = z_arr
    cdef double[:, ::1] nxt
    cdef Py_ssize_t k, p, i
    cdef double acc
    for k in range(nlev):
        nxt_arr = np.empty((npaths, m + 1))
        nxt = nxt_arr
        for p in range(npaths):
            acc = 0.0
            nxt[p, 0] = 0.0
            for i in range(m):
                acc = acc + (z[p, i] * fvals[k, i]) * dw[p, i]
                nxt[p, i + 1] = acc
        z_arr = nxt_arr
        z = z_arr
    return z_arr


def chain_strat(double[:, ::1] dw, double[:, ::1] fmid):
    cdef Py_ssize_t npaths = dw.shape[0]
    cdef Py_ssize_t m = dw.shape[1]
    cdef Py_ssize_t nlev = fmid.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] z_arr = np.ones((npaths, m + 1))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] nxt_arr
    cdef double[:, ::1] z = z_arr
    cdef double[:, ::1] nxt
    cdef Py_ssize_t k, p, i
    cdef double acc
    for k in range(nlev):
        nxt_arr = np.empty((npaths, m + 1))
        nxt = nxt_arr
        for p in range(npaths):
            acc = 0.0
            nxt[p, 0] = 0.0
            for i in range(m):
                acc = acc + ((0.5 * (z[p, i] + z[p, i + 1])) * fmid[k, i]) * dw[p, i]
                nxt[p, i + 1] = acc
        z_arr = nxt_arr
        z = z_arr
    return z_arr


cdef void _fields(
    double[::1] state,
    double[::1] drift,
    double[::1] diffu,
    double sqrt_eps,
    double eps,
    int smooth,
    long[::1] a_rows, long[::1] a_cols, double[::1] a_vals,
    long[::1] ab_rows, long[::1] ab_q, double[::1] ab_vals,
    long[::1] b_rows, long[::1] b_cols, double[::1] b_vals,
    long[::1] bb_rows, long[::1] bb_q, double[::1] bb_vals,
    long[::1] d_rows, long[::1] d_cols, long[::1] d_idx,
    double[:, ::1] gb,
    double[:, ::1] dv,
    Py_ssize_t i,
    Py_ssize_t nstates,
) noexcept:
    cdef Py_ssize_t e, s
    for s in range(nstates):
        drift[s] = 0.0
        diffu[s] = 0.0
    for e in range(a_rows.shape[0]):
        diffu[a_rows[e]] += a_vals[e] * state[a_cols[e]]
    for e in range(ab_rows.shape[0]):
        diffu[ab_rows[e]] += ab_vals[e] * gb[ab_q[e], i]
    for s in range(nstates):
        diffu[s] *= sqrt_eps
    if not smooth:
        for e in range(b_rows.shape[0]):
            drift[b_rows[e]] += b_vals[e] * state[b_cols[e]]
        for e in range(bb_rows.shape[0]):
            drift[bb_rows[e]] += bb_vals[e] * gb[bb_q[e], i]
        for s in range(nstates):
            drift[s] *= eps
    for e in range(d_rows.shape[0]):
        drift[d_rows[e]] += dv[d_idx[e], i] * state[d_cols[e]]


def heun_system(
    double[:, ::1] dw,
    double dt,
    double sqrt_eps,
    double eps,
    int smooth,
    long[::1] a_rows, long[::1] a_cols, double[::1] a_vals,
    long[::1] ab_rows, long[::1] ab_q, double[::1] ab_vals,
    long[::1] b_rows, long[::1] b_cols, double[::1] b_vals,
    long[::1] bb_rows, long[::1] bb_q, double[::1] bb_vals,
    long[::1] d_rows, long[::1] d_cols, long[::1] d_idx,
    double[:, ::1] gb_l,
    double[:, ::1] gb_m,
    double[:, ::1] dv_l,
    double[:, ::1] dv_m,
    Py_ssize_t nstates,
):
    cdef Py_ssize_t npaths = dw.shape[0]
    cdef Py_ssize_t m = dw.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.zeros((npaths, m + 1))
    cdef double[:, ::1] out = out_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x_arr = np.zeros(nstates)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xbar_arr = np.zeros(nstates)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] drift_arr = np.zeros(nstates)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] diffu_arr = np.zeros(nstates)
    cdef double[::1] x = x_arr
    cdef double[::1] xbar = xbar_arr
    cdef double[::1] drift = drift_arr
    cdef double[::1] diffu = diffu_arr
    cdef Py_ssize_t p, i, s
    cdef double dwi, half_dwi
    for p in range(npaths):
        for s in range(nstates):
            x[s] = 0.0
        out[p, 0] = 0.0
        for i in range(m):
            dwi = dw[p, i]
            half_dwi = 0.5 * dwi
            _fields(x, drift, diffu, sqrt_eps, eps, smooth,
                    a_rows, a_cols, a_vals, ab_rows, ab_q, ab_vals,
                    b_rows, b_cols, b_vals, bb_rows, bb_q, bb_vals,
                    d_rows, d_cols, d_idx, gb_l, dv_l, i, nstates)
            for s in range(nstates):
                xbar[s] = x[s] + (0.5 * dt) * drift[s] + diffu[s] * half_dwi
            _fields(xbar, drift, diffu, sqrt_eps, eps, smooth,
                    a_rows, a_cols, a_vals, ab_rows, ab_q, ab_vals,
                    b_rows, b_cols, b_vals, bb_rows, bb_q, bb_vals,
                    d_rows, d_cols, d_idx, gb_m, dv_m, i, nstates)
            for s in range(nstates):
                x[s] = x[s] + dt * drift[s] + diffu[s] * dwi
            out[p, i + 1] = x[0]
    return out_arr
