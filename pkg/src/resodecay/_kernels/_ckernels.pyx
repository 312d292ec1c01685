# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_fallback.py``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t rd_mulhilo(uint64_t a, uint64_t b, uint64_t *hi) {
        unsigned __int128 p = (unsigned __int128)a * (unsigned __int128)b;
        *hi = (uint64_t)(p >> 64);
        return (uint64_t)p;
    }
    """
    uint64_t rd_mulhilo(uint64_t a, uint64_t b, uint64_t *hi) nogil

cdef uint64_t M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t M1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL


cdef inline void _philox(uint64_t *c, uint64_t k0, uint64_t k1) noexcept nogil:
    cdef uint64_t lo0, hi0, lo1, hi1
    cdef int rnd
    for rnd in range(10):
        if rnd:
            k0 += W0
            k1 += W1
        lo0 = rd_mulhilo(M0, c[0], &hi0)
        lo1 = rd_mulhilo(M1, c[2], &hi1)
        c[0], c[1], c[2], c[3] = hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0


def philox4x64(c0, c1, c2, c3, key0, key1):
    cdef cnp.ndarray[uint64_t, ndim=1] a0 = np.ascontiguousarray(c0, dtype=np.uint64).ravel().copy()
    cdef cnp.ndarray[uint64_t, ndim=1] a1 = np.ascontiguousarray(c1, dtype=np.uint64).ravel().copy()
    cdef cnp.ndarray[uint64_t, ndim=1] a2 = np.ascontiguousarray(c2, dtype=np.uint64).ravel().copy()
    cdef cnp.ndarray[uint64_t, ndim=1] a3 = np.ascontiguousarray(c3, dtype=np.uint64).ravel().copy()
    cdef uint64_t k0 = <uint64_t>key0
    cdef uint64_t k1 = <uint64_t>key1
    cdef uint64_t c[4]
    cdef Py_ssize_t i, n = a0.shape[0]
    with nogil:
        for i in range(n):
            c[0] = a0[i]; c[1] = a1[i]; c[2] = a2[i]; c[3] = a3[i]
            _philox(c, k0, k1)
            a0[i] = c[0]; a1[i] = c[1]; a2[i] = c[2]; a3[i] = c[3]
    return a0, a1, a2, a3


def random_words(key0, key1, stream, n):
    cdef Py_ssize_t nn = n
    cdef Py_ssize_t nblocks = (nn + 3) // 4
    cdef cnp.ndarray[uint64_t, ndim=1] out = np.empty(nblocks * 4, dtype=np.uint64)
    cdef uint64_t k0 = <uint64_t>key0
    cdef uint64_t k1 = <uint64_t>key1
    cdef uint64_t tag = <uint64_t>stream
    cdef uint64_t c[4]
    cdef Py_ssize_t i
    with nogil:
        for i in range(nblocks):
            c[0] = <uint64_t>i; c[1] = tag; c[2] = 0; c[3] = 0
            _philox(c, k0, k1)
            out[4 * i] = c[0]; out[4 * i + 1] = c[1]
            out[4 * i + 2] = c[2]; out[4 * i + 3] = c[3]
    return out[:nn]


def random_uniforms(key0, key1, stream, n):
    cdef cnp.ndarray[uint64_t, ndim=1] w = random_words(key0, key1, stream, n)
    cdef Py_ssize_t i, nn = w.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nn, dtype=np.float64)
    with nogil:
        for i in range(nn):
            out[i] = <double>(w[i] >> 11) * 1.1102230246251565e-16
    return out


def bin_counts(values, labels, edges, Py_ssize_t n_labels):
    cdef cnp.ndarray[double, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef cnp.ndarray[int64_t, ndim=1] lab = np.ascontiguousarray(labels, dtype=np.int64).ravel()
    cdef cnp.ndarray[double, ndim=1] e = np.ascontiguousarray(edges, dtype=np.float64).ravel()
    cdef Py_ssize_t nbins = e.shape[0] - 1
    cdef cnp.ndarray[int64_t, ndim=2] counts = np.zeros((n_labels, nbins), dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] under = np.zeros(n_labels, dtype=np.int64)
    cdef cnp.ndarray[int64_t, ndim=1] over = np.zeros(n_labels, dtype=np.int64)
    cdef Py_ssize_t i, lo, hi, mid, n = v.shape[0]
    cdef double x
    with nogil:
        for i in range(n):
            x = v[i]
            if x != x or x >= e[nbins]:
                over[lab[i]] += 1
                continue
            if x < e[0]:
                under[lab[i]] += 1
                continue
            # largest lo with e[lo] <= x
            lo = 0
            hi = nbins
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if e[mid] <= x:
                    lo = mid
                else:
                    hi = mid
            counts[lab[i], lo] += 1
    return counts, under, over


def rational_eval(z, poles, mults, coeffs):
    zz = np.asarray(z, dtype=np.complex128)
    shape = zz.shape
    cdef cnp.ndarray[double complex, ndim=1] zf = np.ascontiguousarray(zz).ravel()
    cdef cnp.ndarray[double complex, ndim=1] p = np.ascontiguousarray(poles, dtype=np.complex128).ravel()
    cdef cnp.ndarray[int64_t, ndim=1] m = np.ascontiguousarray(mults, dtype=np.int64).ravel()
    cdef cnp.ndarray[double complex, ndim=1] c = np.ascontiguousarray(coeffs, dtype=np.complex128).ravel()
    cdef cnp.ndarray[double complex, ndim=1] out = np.zeros(zf.shape[0], dtype=np.complex128)
    cdef Py_ssize_t i, k, j, nk = p.shape[0], n = zf.shape[0]
    cdef double complex d, inv, acc, pw
    for i in range(n):
        acc = 0
        for k in range(nk):
            d = zf[i] - p[k]
            inv = 1.0 / d
            pw = inv
            for j in range(1, m[k]):
                pw = pw * inv
            acc = acc + c[k] * pw
        out[i] = acc
    return out.reshape(shape)


def bw_intensity(energies, double e_r, double gamma, residue, bg_coeffs, double norm):
    ee = np.asarray(energies, dtype=np.float64)
    shape = ee.shape
    cdef cnp.ndarray[double, ndim=1] e = np.ascontiguousarray(ee).ravel()
    cdef cnp.ndarray[double complex, ndim=1] b = np.ascontiguousarray(
        np.asarray(list(bg_coeffs), dtype=np.complex128)).ravel()
    cdef cnp.ndarray[double, ndim=1] out = np.empty(e.shape[0], dtype=np.float64)
    cdef double complex r = residue
    cdef double complex zr = e_r - 0.5j * gamma
    cdef double complex amp, bg
    cdef Py_ssize_t i, k, n = e.shape[0], nb = b.shape[0]
    for i in range(n):
        amp = r / (e[i] - zr)
        bg = 0
        for k in range(nb - 1, -1, -1):
            bg = bg * e[i] + b[k]
        amp = amp + bg
        out[i] = norm * (amp.real * amp.real + amp.imag * amp.imag)
    return out.reshape(shape)
