# cython: language_level=3
"""Compiled hot loops.

Every function here has a drop-in twin in ``_kernels_py`` with the same
signature and semantics; ``gl2lfun._backend`` picks one at import time.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin
from libc.stdlib cimport calloc, free

cnp.import_array()

cdef extern from *:
    """
    typedef __int128 i128;

    /* Multiply the dense series d[0..n) in place by the pentagonal series
       prod(1 - q^j) = sum_k (-1)^k q^{k(3k-1)/2}, truncated at q^n.
       Returns 0 on success, 1 on signed 128-bit overflow. */
    static int eta_mul_inplace(i128 *d, long n, const long *pent, const int *sgn, long npent)
    {
        for (long m = n - 1; m >= 0; --m) {
            i128 acc = d[m];
            for (long j = 1; j < npent; ++j) {
                long p = pent[j];
                if (p > m) break;
                i128 r;
                if (sgn[j] > 0) {
                    if (__builtin_add_overflow(acc, d[m - p], &r)) return 1;
                } else {
                    if (__builtin_sub_overflow(acc, d[m - p], &r)) return 1;
                }
                acc = r;
            }
            d[m] = acc;
        }
        return 0;
    }

    static void i128_split(i128 v, unsigned long long *lo, long long *hi)
    {
        *lo = (unsigned long long)v;
        *hi = (long long)(v >> 64);
    }
    """
    ctypedef long long i128
    int eta_mul_inplace(i128 *d, long n, const long *pent, const int *sgn, long npent) nogil
    void i128_split(i128 v, unsigned long long *lo, long long *hi) nogil


def _pentagonal(long n):
    pent = [0]
    sgn = [1]
    cdef long k = 1
    while True:
        p1 = k * (3 * k - 1) // 2
        if p1 >= n:
            break
        s = -1 if k % 2 else 1
        pent.append(p1)
        sgn.append(s)
        p2 = k * (3 * k + 1) // 2
        if p2 < n:
            pent.append(p2)
            sgn.append(s)
        k += 1
    order = sorted(range(len(pent)), key=lambda i: pent[i])
    return (np.array([pent[i] for i in order], dtype=np.int64),
            np.array([sgn[i] for i in order], dtype=np.intc))


def eta_power(long n, int power):
    """Coefficients of prod_{j>=1} (1 - q^j)^power up to q^{n-1}, as Python ints.

    Raises OverflowError if any intermediate leaves the signed 128-bit range.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if power < 0:
        raise ValueError("power must be non-negative")
    pent_np, sgn_np = _pentagonal(n)
    cdef cnp.int64_t[::1] pent = pent_np
    cdef int[::1] sgn = sgn_np
    cdef long npent = pent_np.shape[0]
    # glibc calloc is 16-byte aligned, as __int128 requires
    cdef i128 *d = <i128 *> calloc(n, sizeof(i128))
    if d == NULL:
        raise MemoryError()
    cdef int rc = 0
    cdef int it
    cdef unsigned long long lo
    cdef long long hi
    cdef long m
    try:
        d[0] = 1
        for it in range(power):
            with nogil:
                rc = eta_mul_inplace(d, n, <const long *> &pent[0], &sgn[0], npent)
            if rc:
                raise OverflowError("eta-power coefficient exceeds signed 128-bit range")
        out = [0] * n
        for m in range(n):
            i128_split(d[m], &lo, &hi)
            out[m] = (<object> hi << 64) | <object> lo
    finally:
        free(d)
    return out


def neumaier_sum(double[::1] x):
    """Compensated (Neumaier) sum in index order."""
    cdef double s = 0.0
    cdef double c = 0.0
    cdef double t, v
    cdef Py_ssize_t i
    for i in range(x.shape[0]):
        v = x[i]
        t = s + v
        if (s if s >= 0 else -s) >= (v if v >= 0 else -v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return s + c


def phase_line_sum(double[::1] w_re, double[::1] w_im, double tau0, double h, double[::1] logx):
    """S_i = sum_j w_j exp(-i (tau0 + j h) logx_i) by phasor recurrence.

    The rotating phasor is re-seeded from cos/sin every 256 steps to keep the
    accumulated rounding at the 1e-14 level.
    """
    cdef Py_ssize_t nx = logx.shape[0]
    cdef Py_ssize_t nt = w_re.shape[0]
    out = np.empty(nx, dtype=np.complex128)
    cdef double complex[::1] o = out
    cdef Py_ssize_t i, j
    cdef double L, pr, pi_, rr, ri, tmp, ang
    cdef double accr, acci
    with nogil:
        for i in range(nx):
            L = logx[i]
            rr = cos(h * L)
            ri = -sin(h * L)
            accr = 0.0
            acci = 0.0
            pr = 1.0
            pi_ = 0.0
            for j in range(nt):
                if j % 256 == 0:
                    ang = (tau0 + j * h) * L
                    pr = cos(ang)
                    pi_ = -sin(ang)
                accr = accr + (w_re[j] * pr - w_im[j] * pi_)
                acci = acci + (w_re[j] * pi_ + w_im[j] * pr)
                tmp = pr * rr - pi_ * ri
                pi_ = pr * ri + pi_ * rr
                pr = tmp
            o[i] = accr + 1j * acci
    return out
