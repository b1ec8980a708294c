# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Semantics mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef cnp.int64_t i64


def soft_weight_matrix(losses, double gamma):
    cdef cnp.ndarray[double, ndim=1] flat = np.ascontiguousarray(losses, dtype=np.float64).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(flat)
    cdef double ratio = gamma / (gamma + 1.0)
    cdef double lo = ratio * ratio
    cdef double hi = gamma * gamma
    cdef double inv_g = 1.0 / gamma
    cdef double l
    cdef Py_ssize_t idx, size = flat.shape[0]
    with nogil:
        for idx in range(size):
            l = flat[idx]
            if l <= lo:
                out[idx] = 1.0
            elif l >= hi:
                out[idx] = 0.0
            else:
                out[idx] = 1.0 / sqrt(l) - inv_g
    return out.reshape(np.shape(losses))


cdef inline void _row_best(i64[:, ::1] M, i64[::1] K, signed char[::1] active, i64 two_m,
                           Py_ssize_t r, Py_ssize_t n, i64[::1] best_val, i64[::1] best_col) nogil:
    cdef Py_ssize_t c
    cdef i64 s, bv = 0
    cdef Py_ssize_t bc = -1
    for c in range(r + 1, n):
        if active[c] and M[r, c] > 0:
            s = two_m * M[r, c] - K[r] * K[c]
            if bc < 0 or s > bv:
                bv = s
                bc = c
    best_val[r] = bv
    best_col[r] = bc


def greedy_modularity(adjacency):
    a = np.asarray(adjacency)
    cdef Py_ssize_t n = a.shape[0]
    Mnp = (a != 0).astype(np.int64)
    np.fill_diagonal(Mnp, 0)
    Knp = Mnp.sum(axis=1).astype(np.int64)
    cdef i64[:, ::1] M = Mnp
    cdef i64[::1] K = Knp
    cdef i64 two_m = int(Knp.sum())
    if two_m == 0:
        raise ValueError("modularity is undefined on an edgeless graph")
    cdef i64 total = -int(np.dot(Knp, Knp))
    activenp = np.ones(n, dtype=np.int8)
    cdef signed char[::1] active = activenp
    ownernp = np.arange(n, dtype=np.int64)
    cdef i64[::1] owner = ownernp
    cdef i64[::1] best_val = np.zeros(n, dtype=np.int64)
    cdef i64[::1] best_col = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t r, c, i, j, bi
    cdef i64 s, bs

    with nogil:
        for r in range(n):
            _row_best(M, K, active, two_m, r, n, best_val, best_col)
        while True:
            # Pairs without edges between them never have a positive gain,
            # so rows only track connected pairs.
            bi = -1
            bs = 0
            for r in range(n):
                if active[r] and best_col[r] >= 0:
                    if bi < 0 or best_val[r] > bs:
                        bs = best_val[r]
                        bi = r
            if bi < 0 or bs <= 0:
                break
            i = bi
            j = best_col[bi]
            total += 2 * bs
            for c in range(n):
                M[i, c] += M[j, c]
                M[c, i] += M[c, j]
                M[j, c] = 0
                M[c, j] = 0
            M[i, i] = 0
            K[i] += K[j]
            K[j] = 0
            active[j] = 0
            best_col[j] = -1
            for c in range(n):
                if owner[c] == j:
                    owner[c] = i
            _row_best(M, K, active, two_m, i, n, best_val, best_col)
            for r in range(i):
                if not active[r]:
                    continue
                if best_col[r] == i or best_col[r] == j:
                    _row_best(M, K, active, two_m, r, n, best_val, best_col)
                elif M[r, i] > 0:
                    s = two_m * M[r, i] - K[r] * K[i]
                    if best_col[r] < 0 or s > best_val[r] or (s == best_val[r] and i < best_col[r]):
                        best_val[r] = s
                        best_col[r] = i
            for r in range(i + 1, j):
                if active[r] and best_col[r] == j:
                    _row_best(M, K, active, two_m, r, n, best_val, best_col)

    first = {}
    dense = np.array([first.setdefault(x, len(first)) for x in ownernp.tolist()], dtype=np.int64)
    return dense, int(total)
