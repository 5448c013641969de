# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gram-matrix scans; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport INFINITY

cnp.import_array()


cdef inline void _sift_down(double* heap, Py_ssize_t size, Py_ssize_t pos) noexcept nogil:
    # min-heap
    cdef Py_ssize_t child
    cdef double v = heap[pos]
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and heap[child + 1] < heap[child]:
            child += 1
        if heap[child] >= v:
            break
        heap[pos] = heap[child]
        pos = child
    heap[pos] = v


def cumulative_topk(double[:, ::1] G, Py_ssize_t d, Py_ssize_t k):
    cdef Py_ssize_t n = G.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.full(n, -np.inf)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j, t, filled, dist
    cdef double v, acc
    cdef double* buf
    if k == 0:
        out_arr[:] = 0.0
        return out_arr
    buf = <double*>malloc((k if k < n else n) * sizeof(double) + sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                filled = 0
                if k <= 16:
                    # insertion into a descending top-k buffer
                    for j in range(n):
                        dist = i - j if i >= j else j - i
                        if dist <= d:
                            continue
                        v = G[i, j]
                        if filled < k:
                            t = filled
                            filled += 1
                        elif v > buf[k - 1]:
                            t = k - 1
                        else:
                            continue
                        while t > 0 and buf[t - 1] < v:
                            buf[t] = buf[t - 1]
                            t -= 1
                        buf[t] = v
                else:
                    # size-k min-heap, then heapsort into descending order
                    for j in range(n):
                        dist = i - j if i >= j else j - i
                        if dist <= d:
                            continue
                        v = G[i, j]
                        if filled < k:
                            buf[filled] = v
                            filled += 1
                            if filled == k:
                                for t in range(k // 2 - 1, -1, -1):
                                    _sift_down(buf, k, t)
                        elif v > buf[0]:
                            buf[0] = v
                            _sift_down(buf, k, 0)
                    if filled == k:
                        for t in range(k - 1, 0, -1):
                            v = buf[0]
                            buf[0] = buf[t]
                            buf[t] = v
                            _sift_down(buf, t, 0)
                if filled < k:
                    continue
                acc = 0.0
                for t in range(k):
                    acc = acc + buf[t]
                out[i] = acc
    finally:
        free(buf)
    return out_arr


def separation_maxima(double[:, ::1] G):
    cdef Py_ssize_t n = G.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_arr = np.full(n // 2 + 1, -np.inf)
    cdef double[::1] best = best_arr
    cdef Py_ssize_t i, j, f, w
    cdef double v
    with nogil:
        for i in range(n):
            for j in range(n):
                f = j - i if j >= i else j - i + n
                w = f if f <= n - f else n - f
                v = G[i, j]
                if v > best[w]:
                    best[w] = v
    return best_arr


def diagonal_spread(double[:, ::1] G):
    cdef Py_ssize_t n = G.shape[0]
    cdef Py_ssize_t f, i
    cdef double lo, hi, v, worst = 0.0
    with nogil:
        for f in range(1, n):
            lo = INFINITY
            hi = -INFINITY
            for i in range(n - f):
                v = G[i, i + f]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if hi - lo > worst:
                worst = hi - lo
            lo = INFINITY
            hi = -INFINITY
            for i in range(n - f):
                v = G[i + f, i]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            if hi - lo > worst:
                worst = hi - lo
    return worst
