# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernel.

Scalar re-implementation of the counter-based noise and path recursion in
``numpy_backend.py`` / ``philox.py``; one Philox4x32-10 block per two steps of
a path, Box-Muller for the normal pair, trapezoid accumulation of the
integrated rate.  The arithmetic is ordered exactly as in the numpy backend so
the two produce matching output for a fixed seed.
"""

from libc.math cimport cos, exp, expm1, log, sin, sqrt
from libc.stdint cimport int64_t, uint32_t, uint64_t

cdef extern from *:
    """
    #define PHILOX_M0 0xD2511F53u
    #define PHILOX_M1 0xCD9E8D57u
    #define PHILOX_W0 0x9E3779B9u
    #define PHILOX_W1 0xBB67AE85u
    """
    uint32_t PHILOX_M0
    uint32_t PHILOX_M1
    uint32_t PHILOX_W0
    uint32_t PHILOX_W1

BACKEND_NAME = "cython"

KIND_OU = 0
KIND_FELLER = 1
KIND_LOGNORMAL = 2

cdef double INV53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586476925287


cdef inline void _philox_block(uint64_t block, uint64_t path,
                               uint32_t k0_init, uint32_t k1_init,
                               uint32_t* out) noexcept nogil:
    cdef uint32_t x0 = <uint32_t> block
    cdef uint32_t x1 = <uint32_t> (block >> 32)
    cdef uint32_t x2 = <uint32_t> path
    cdef uint32_t x3 = <uint32_t> (path >> 32)
    cdef uint32_t k0 = k0_init
    cdef uint32_t k1 = k1_init
    cdef uint64_t p0, p1
    cdef uint32_t hi0, lo0, hi1, lo1
    cdef int rnd
    for rnd in range(10):
        p0 = (<uint64_t> x0) * PHILOX_M0
        p1 = (<uint64_t> x2) * PHILOX_M1
        hi0 = <uint32_t> (p0 >> 32)
        lo0 = <uint32_t> p0
        hi1 = <uint32_t> (p1 >> 32)
        lo1 = <uint32_t> p1
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
        k0 = k0 + PHILOX_W0
        k1 = k1 + PHILOX_W1
    out[0] = x0
    out[1] = x1
    out[2] = x2
    out[3] = x3


cdef inline double _uniform53(uint32_t a, uint32_t b) noexcept nogil:
    return ((<double> (a >> 5)) * 67108864.0 + (<double> (b >> 6)) + 0.5) * INV53


def simulate_block(int kind, double p0, double p1, double p2, double r0,
                   double dt, int64_t n_steps, int64_t[::1] sample_idx,
                   uint64_t seed, uint64_t path_start, int64_t n_paths,
                   double[:, ::1] out_x, int64_t first_counted_step):
    """Same contract as ``numpy_backend.simulate_block``."""
    cdef uint32_t key0 = <uint32_t> seed
    cdef uint32_t key1 = <uint32_t> (seed >> 32)
    cdef int64_t n_samples = sample_idx.shape[0]
    cdef int64_t neg = 0

    # per-model precomputed step constants
    cdef double m = 0.0, alpha = 0.0, decay = 0.0, sd = 0.0
    cdef double adt = 0.0, sq = 0.0, gdt = 0.0
    if kind == 0:
        m = p0
        alpha = p1
        decay = exp(-alpha * dt)
        sd = sqrt(p2 * p2 * (-expm1(-2.0 * alpha * dt)) / (2.0 * alpha))
    elif kind == 1:
        m = p0
        alpha = p1
        adt = alpha * dt
        sq = p2 * sqrt(dt)
    elif kind == 2:
        gdt = (p0 - 0.5 * p1 * p1) * dt
        sq = p1 * sqrt(dt)
    else:
        raise ValueError(f"unknown model kind {kind}")

    cdef double half_dt = 0.5 * dt
    cdef uint32_t words[4]
    cdef int64_t p, j, ptr
    cdef uint64_t path
    cdef double r, x, z, z_odd, u1, u2, radius, theta, r_new, r_plus

    with nogil:
        for p in range(n_paths):
            path = path_start + <uint64_t> p
            r = r0
            x = 0.0
            z_odd = 0.0
            ptr = 0
            if ptr < n_samples and sample_idx[ptr] == 0:
                out_x[p, ptr] = 0.0
                ptr += 1
            for j in range(1, n_steps + 1):
                if (j - 1) % 2 == 0:
                    _philox_block(<uint64_t> ((j - 1) >> 1), path, key0, key1, words)
                    u1 = _uniform53(words[0], words[1])
                    u2 = _uniform53(words[2], words[3])
                    radius = sqrt(-2.0 * log(u1))
                    theta = TWO_PI * u2
                    z = radius * cos(theta)
                    z_odd = radius * sin(theta)
                else:
                    z = z_odd
                if kind == 0:
                    r_new = (m + (r - m) * decay) + sd * z
                elif kind == 1:
                    r_plus = r if r > 0.0 else 0.0
                    r_new = (r + (m - r_plus) * adt) + (sq * sqrt(r_plus)) * z
                    if r_new < 0.0:
                        r_new = 0.0
                else:
                    r_new = r * exp(gdt + sq * z)
                x = x + (r + r_new) * half_dt
                r = r_new
                if j >= first_counted_step and r < 0.0:
                    neg += 1
                if ptr < n_samples and sample_idx[ptr] == j:
                    out_x[p, ptr] = x
                    ptr += 1
    return neg
