# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay arithmetically identical to _pykernels."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


DEF BLOCK = 1024


def convolve_reflect(const double[::1] x, const double[::1] kernel):
    # taps outer, samples inner: the same per-output summation order as the
    # numpy fallback, and a loop the compiler can vectorise
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t klen = kernel.shape[0]
    cdef Py_ssize_t r = klen // 2
    cdef Py_ssize_t i, j, lo, hi
    cdef double kj
    padded = np.empty(n + 2 * r, dtype=np.float64)
    cdef double[::1] p = padded
    for i in range(n):
        p[r + i] = x[i]
    for i in range(1, r + 1):
        p[r - i] = x[i]
        p[r + n - 1 + i] = x[n - 1 - i]
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    for lo in range(0, n, BLOCK):
        hi = min(lo + BLOCK, n)
        for j in range(klen):
            kj = kernel[j]
            for i in range(lo, hi):
                o[i] += kj * p[i + j]
    return out


def dog_extrema(const double[:, ::1] dog, double threshold):
    """Strict 8-neighbour extrema of a (levels, n) DoG array.

    Returns (positions, scale_indices, is_max) as int64/int64/bool arrays,
    ordered by position then scale.
    """
    cdef Py_ssize_t L = dog.shape[0]
    cdef Py_ssize_t n = dog.shape[1]
    cdef Py_ssize_t x, k
    cdef double v
    cdef int gt, lt
    cdef const double *up
    cdef const double *mid
    cdef const double *dn
    cdef cnp.uint8_t *out
    # codes stored position-major so flatnonzero yields the output order
    code = np.zeros((n, L), dtype=np.uint8)  # 1 = maximum, 2 = minimum
    cdef cnp.uint8_t[:, ::1] c = code
    # row-major scan over raw row pointers (a uint8 store through the
    # memoryview would force the compiler to reload its fields each time);
    # comparisons are combined without short-circuiting because noisy DoG
    # values defeat branch prediction
    for k in range(1, L - 1):
        up = &dog[k - 1, 0]
        mid = &dog[k, 0]
        dn = &dog[k + 1, 0]
        out = &c[0, k]
        for x in range(1, n - 1):
            v = mid[x]
            gt = ((v > mid[x - 1]) & (v > mid[x + 1])
                  & (v > up[x - 1]) & (v > up[x]) & (v > up[x + 1])
                  & (v > dn[x - 1]) & (v > dn[x]) & (v > dn[x + 1]))
            lt = ((v < mid[x - 1]) & (v < mid[x + 1])
                  & (v < up[x - 1]) & (v < up[x]) & (v < up[x + 1])
                  & (v < dn[x - 1]) & (v < dn[x]) & (v < dn[x + 1]))
            out[x * L] = (gt | (lt << 1)) * ((v > threshold) | (-v > threshold))
    flat = np.flatnonzero(code)
    xs, ks = np.divmod(flat, L)
    return xs.astype(np.int64), ks.astype(np.int64), code.ravel()[flat] == 1


def pairwise_euclidean(const double[:, ::1] a, const double[:, ::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    cdef Py_ssize_t d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, t
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] o = out
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                t = a[i, k] - b[j, k]
                acc += t * t
            o[i, j] = sqrt(acc)
    return out


def dtw_accumulate(const double[:, ::1] cost):
    """Cumulative DTW cost and diagonal-first backtracked path length."""
    cdef Py_ssize_t n = cost.shape[0]
    cdef Py_ssize_t m = cost.shape[1]
    cdef Py_ssize_t i, j
    cdef double best, c
    acc = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] D = acc
    D[0, 0] = cost[0, 0]
    for j in range(1, m):
        D[0, j] = cost[0, j] + D[0, j - 1]
    for i in range(1, n):
        D[i, 0] = cost[i, 0] + D[i - 1, 0]
        for j in range(1, m):
            best = D[i - 1, j - 1]
            c = D[i - 1, j]
            if c < best:
                best = c
            c = D[i, j - 1]
            if c < best:
                best = c
            D[i, j] = cost[i, j] + best
    cdef Py_ssize_t length = 1
    i = n - 1
    j = m - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            best = D[i - 1, j - 1]
            if D[i - 1, j] < best:
                if D[i, j - 1] < D[i - 1, j]:
                    j -= 1
                else:
                    i -= 1
            elif D[i, j - 1] < best:
                j -= 1
            else:
                i -= 1
                j -= 1
        length += 1
    return D[n - 1, m - 1], length
