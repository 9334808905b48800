"""Pure numpy/Python versions of the compiled kernels.

Accumulation order matches ``_ckernels.pyx`` term for term, so both backends
return bit-identical floats.
"""
import numpy as np


def convolve_reflect(x, kernel):
    x = np.ascontiguousarray(x, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    n = x.size
    r = kernel.size // 2
    padded = np.pad(x, r, mode="reflect")
    out = np.zeros(n)
    for j in range(kernel.size):
        out += kernel[j] * padded[j:j + n]
    return out


def dog_extrema(dog, threshold):
    dog = np.asarray(dog, dtype=np.float64)
    c = dog[1:-1, 1:-1]
    neighbours = (
        dog[1:-1, :-2], dog[1:-1, 2:],
        dog[:-2, :-2], dog[:-2, 1:-1], dog[:-2, 2:],
        dog[2:, :-2], dog[2:, 1:-1], dog[2:, 2:],
    )
    is_max = np.ones(c.shape, dtype=bool)
    is_min = np.ones(c.shape, dtype=bool)
    for nb in neighbours:
        is_max &= c > nb
        is_min &= c < nb
    strong = (c > threshold) | (-c > threshold)
    hit = (is_max | is_min) & strong
    # transpose so that nonzero() walks positions first, then scales
    xs, ks = np.nonzero(hit.T)
    return xs + 1, ks + 1, is_max.T[xs, ks]


def pairwise_euclidean(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    acc = np.zeros((a.shape[0], b.shape[0]))
    for k in range(a.shape[1]):
        t = a[:, None, k] - b[None, :, k]
        acc += t * t
    return np.sqrt(acc)


def dtw_accumulate(cost):
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    c = cost.tolist()
    D = [[0.0] * m for _ in range(n)]
    row = D[0]
    row[0] = c[0][0]
    for j in range(1, m):
        row[j] = c[0][j] + row[j - 1]
    for i in range(1, n):
        prev, row, ci = D[i - 1], D[i], c[i]
        row[0] = ci[0] + prev[0]
        for j in range(1, m):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = ci[j] + best

    length = 1
    i, j = n - 1, m - 1
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = D[i - 1][j - 1], D[i - 1][j], D[i][j - 1]
            if up < diag:
                if left < up:
                    j -= 1
                else:
                    i -= 1
            elif left < diag:
                j -= 1
            else:
                i -= 1
                j -= 1
        length += 1
    return D[n - 1][m - 1], length
