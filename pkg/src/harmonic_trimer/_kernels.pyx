# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kinetic-operator kernels; see ``_kernels_py`` for the array conventions.

The six axis contractions go through BLAS ``dgemm``; the grid products are
fused into a single pass so no intermediate cubes beyond ``t*`` and ``s*``
are allocated.
"""

import numpy as np
cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline void _gemm(char ta, char tb, int m, int n, int k, const double* A, int lda,
                       const double* B, int ldb, double beta, double* C, int ldc) noexcept nogil:
    # row-major C(m x n) = op(A) op(B) + beta C, via column-major C^T = op(B)^T op(A)^T
    cdef double one = 1.0
    dgemm(&tb, &ta, &n, &m, &k, &one, <double*>B, &ldb, <double*>A, &lda, &beta, C, &ldc)


def kinetic_apply(const double[:, :, ::1] u, const double[:, ::1] D,
                  const double[:, :, ::1] g1, const double[:, :, ::1] g2,
                  const double[:, :, ::1] g3, const double[:, :, ::1] w12,
                  const double[:, :, ::1] w13, const double[:, :, ::1] w23):
    cdef int M = D.shape[0]
    cdef int M2 = M * M
    cdef Py_ssize_t i, p, total = M * M * M
    tx_a = np.empty((M, M, M))
    ty_a = np.empty((M, M, M))
    tz_a = np.empty((M, M, M))
    out_a = np.empty((M, M, M))
    cdef double[:, :, ::1] tx = tx_a
    cdef double[:, :, ::1] ty = ty_a
    cdef double[:, :, ::1] tz = tz_a
    cdef double[:, :, ::1] out = out_a
    cdef double* px = &tx[0, 0, 0]
    cdef double* py = &ty[0, 0, 0]
    cdef double* pz = &tz[0, 0, 0]
    cdef const double* pu = &u[0, 0, 0]
    cdef const double* pD = &D[0, 0]
    cdef const double* a1 = &g1[0, 0, 0]
    cdef const double* a2 = &g2[0, 0, 0]
    cdef const double* a3 = &g3[0, 0, 0]
    cdef const double* c12 = &w12[0, 0, 0]
    cdef const double* c13 = &w13[0, 0, 0]
    cdef const double* c23 = &w23[0, 0, 0]
    cdef double vx, vy, vz

    with nogil:
        # t_p = D^T applied along axis p
        _gemm(b'T', b'N', M, M2, M, pD, M, pu, M2, 0.0, px, M2)
        for i in range(M):
            _gemm(b'T', b'N', M, M, M, pD, M, pu + i * M2, M, 0.0, py + i * M2, M)
        _gemm(b'N', b'N', M2, M, M, pu, M, pD, M, 0.0, pz, M)

        # s_q = sum_p grid_pq * t_p, written in place over t
        for p in range(total):
            vx = px[p]
            vy = py[p]
            vz = pz[p]
            px[p] = a1[p] * vx + c12[p] * vy + c13[p] * vz
            py[p] = a2[p] * vy + c12[p] * vx + c23[p] * vz
            pz[p] = a3[p] * vz + c13[p] * vx + c23[p] * vy

        # out = sum_q D applied along axis q to s_q
        _gemm(b'N', b'N', M, M2, M, pD, M, px, M2, 0.0, &out[0, 0, 0], M2)
        for i in range(M):
            _gemm(b'N', b'N', M, M, M, pD, M, py + i * M2, M, 1.0, &out[i, 0, 0], M)
        _gemm(b'N', b'T', M2, M, M, pz, M, pD, M, 1.0, &out[0, 0, 0], M)
    return out_a


def kinetic_diagonal(const double[:, ::1] D, const double[:, :, ::1] g1,
                     const double[:, :, ::1] g2, const double[:, :, ::1] g3,
                     const double[:, :, ::1] w12, const double[:, :, ::1] w13,
                     const double[:, :, ::1] w23):
    cdef Py_ssize_t M = D.shape[0]
    cdef Py_ssize_t i, j, k, n
    cdef double s
    out_a = np.empty((M, M, M))
    cdef double[:, :, ::1] out = out_a
    with nogil:
        for i in range(M):
            for j in range(M):
                for k in range(M):
                    s = 2.0 * (D[i, i] * D[j, j] * w12[i, j, k]
                               + D[i, i] * D[k, k] * w13[i, j, k]
                               + D[j, j] * D[k, k] * w23[i, j, k])
                    for n in range(M):
                        s += (D[i, n] * D[i, n] * g1[n, j, k]
                              + D[j, n] * D[j, n] * g2[i, n, k]
                              + D[k, n] * D[k, n] * g3[i, j, n])
                    out[i, j, k] = s
    return out_a
