# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, log, sin, sqrt
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _finalize(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t seed, uint64_t i) noexcept nogil:
    return <double>(_finalize(seed + (i + 1) * GOLDEN) >> 11) * INV_2_53


def random_u64(seed, Py_ssize_t offset, Py_ssize_t n):
    cdef uint64_t s = <uint64_t>seed
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _finalize(s + <uint64_t>(offset + i + 1) * GOLDEN)
    return out


def uniforms(seed, Py_ssize_t offset, Py_ssize_t n):
    cdef uint64_t s = <uint64_t>seed
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _uniform(s, <uint64_t>(offset + i))
    return out


def standard_normals(seed, Py_ssize_t offset, Py_ssize_t n):
    cdef uint64_t s = <uint64_t>seed
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k, pair, end = offset + n
    cdef double u1, u2, r, theta
    with nogil:
        k = offset
        while k < end:
            pair = k // 2
            u1 = 1.0 - _uniform(s, <uint64_t>(2 * pair))
            u2 = _uniform(s, <uint64_t>(2 * pair + 1))
            r = sqrt(-2.0 * log(u1))
            theta = TWO_PI * u2
            if k % 2 == 0:
                o[k - offset] = r * cos(theta)
                k = k + 1
            if k < end:
                o[k - offset] = r * sin(theta)
                k = k + 1
    return out


def conv2d_wrap(img, kernel):
    cdef const double[:, ::1] x = np.ascontiguousarray(img, dtype=np.float64)
    cdef const double[:, ::1] k = np.ascontiguousarray(kernel, dtype=np.float64)
    cdef Py_ssize_t h = x.shape[0], w = x.shape[1]
    cdef Py_ssize_t kh = k.shape[0], kw = k.shape[1]
    cdef Py_ssize_t ch = kh // 2, cw = kw // 2
    out = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, y, xx, sy, dy, dx
    cdef double t
    # tap-major loop order keeps the summation order identical to the fallback
    with nogil:
        for i in range(kh):
            dy = ((i - ch) % h + h) % h
            for j in range(kw):
                t = k[i, j]
                if t == 0.0:
                    continue
                dx = ((j - cw) % w + w) % w
                for y in range(h):
                    sy = y - dy
                    if sy < 0:
                        sy = sy + h
                    # output columns [0, dx) read the wrapped tail of the row
                    for xx in range(dx):
                        o[y, xx] += t * x[sy, xx - dx + w]
                    for xx in range(dx, w):
                        o[y, xx] += t * x[sy, xx - dx]
    return out
