# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trajectory stepping kernel.

Per-path C loop equivalent of _fallback.advance_bundle; the arithmetic
expressions and their order are kept identical so results match the
numpy backend bit for bit (the build disables FP contraction).
"""

from libc.math cimport floor

cdef int _ALIVE = 0
cdef int _MASKED = 1
cdef int _LEFT_DOMAIN = 2


cdef inline double _catmull_rom(double p0, double p1, double p2, double p3,
                                double s) noexcept nogil:
    return 0.5 * (2.0 * p1 + s * (p2 - p0)
                  + s * s * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3)
                  + s * s * s * (3.0 * (p1 - p2) + p3 - p0))


cdef inline int _eval_stage(double pos, double w,
                            const double* v0, const double* v1,
                            const unsigned char* valid,
                            double x_min, double x_max, double dx, Py_ssize_t n,
                            double* out) noexcept nogil:
    """0 = ok (value in *out), 1 = masked stencil, 2 = left domain."""
    cdef double u, s, a, b
    cdef double jf
    cdef Py_ssize_t j, jm1, j0, jp1, jp2
    if not (pos >= x_min and pos < x_max):
        return _LEFT_DOMAIN
    u = (pos - x_min) / dx
    jf = floor(u)
    if jf > n - 1.0:
        jf = n - 1.0
    s = u - jf
    j = <Py_ssize_t>jf
    jm1 = j - 1
    if jm1 < 0:
        jm1 += n
    j0 = j
    jp1 = j + 1
    if jp1 >= n:
        jp1 -= n
    jp2 = j + 2
    if jp2 >= n:
        jp2 -= n
    if not (valid[jm1] and valid[j0] and valid[jp1] and valid[jp2]):
        return _MASKED
    a = _catmull_rom(v0[jm1], v0[j0], v0[jp1], v0[jp2], s)
    b = _catmull_rom(v1[jm1], v1[j0], v1[jp1], v1[jp2], s)
    out[0] = a + w * (b - a)
    return 0


cdef inline int _check_point(double pos, const unsigned char* valid,
                             double x_min, double x_max, double dx,
                             Py_ssize_t n) noexcept nogil:
    cdef double u, jf
    cdef Py_ssize_t j, jm1, j0, jp1, jp2
    if not (pos >= x_min and pos < x_max):
        return _LEFT_DOMAIN
    u = (pos - x_min) / dx
    jf = floor(u)
    if jf > n - 1.0:
        jf = n - 1.0
    j = <Py_ssize_t>jf
    jm1 = j - 1
    if jm1 < 0:
        jm1 += n
    j0 = j
    jp1 = j + 1
    if jp1 >= n:
        jp1 -= n
    jp2 = j + 2
    if jp2 >= n:
        jp2 -= n
    if not (valid[jm1] and valid[j0] and valid[jp1] and valid[jp2]):
        return _MASKED
    return 0


def advance_bundle(double[::1] x, signed char[::1] status,
                   const double[::1] v0, const double[::1] v1,
                   const unsigned char[::1] valid,
                   double x_min, double dx, Py_ssize_t n,
                   double h_total, Py_ssize_t nsub):
    """See _fallback.advance_bundle; identical contract and arithmetic."""
    cdef Py_ssize_t npaths = x.shape[0]
    cdef Py_ssize_t i, sub
    cdef double x_max = x_min + n * dx
    cdef double h, w0, wh, w1
    cdef double xi, x2, x3, x4, xn
    cdef double k1, k2, k3, k4
    cdef int code
    cdef const double* pv0 = &v0[0]
    cdef const double* pv1 = &v1[0]
    cdef const unsigned char* pvalid = &valid[0]

    with nogil:
        for i in range(npaths):
            if status[i] != _ALIVE:
                continue
            xi = x[i]
            for sub in range(nsub):
                h = h_total / nsub
                w0 = sub / <double>nsub
                wh = (sub + 0.5) / nsub
                w1 = (sub + 1.0) / nsub

                code = _eval_stage(xi, w0, pv0, pv1, pvalid,
                                   x_min, x_max, dx, n, &k1)
                if code != 0:
                    status[i] = code
                    break
                x2 = xi + 0.5 * h * k1
                code = _eval_stage(x2, wh, pv0, pv1, pvalid,
                                   x_min, x_max, dx, n, &k2)
                if code != 0:
                    status[i] = code
                    break
                x3 = xi + 0.5 * h * k2
                code = _eval_stage(x3, wh, pv0, pv1, pvalid,
                                   x_min, x_max, dx, n, &k3)
                if code != 0:
                    status[i] = code
                    break
                x4 = xi + h * k3
                code = _eval_stage(x4, w1, pv0, pv1, pvalid,
                                   x_min, x_max, dx, n, &k4)
                if code != 0:
                    status[i] = code
                    break
                xn = xi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                code = _check_point(xn, pvalid, x_min, x_max, dx, n)
                if code != 0:
                    status[i] = code
                    break
                xi = xn
            x[i] = xi
