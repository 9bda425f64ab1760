# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled accumulation kernels.

Both entry points evaluate the Bohmian momenta at many configurations and add
weighted feature sums and histogram counts into per-chunk slots. Chunks are
independent, run under ``prange`` and are reduced later in a fixed order.
Column layout follows ``features.FEATURES``.
"""

import numpy as np
from cython.parallel cimport prange
from libc.math cimport sqrt, floor, fabs, cos, sin, fmax, fmin, M_PI

cdef enum:
    NF = 44

cdef struct Wave:
    double c
    double s
    double cphi
    double sphi
    double energy
    double inertia
    double node
    double pole
    double knorm


cdef inline int eval_point(const Wave* wv,
                           double ca1, double sa1, double hc1, double hs1,
                           double cb1, double sb1, double qc1, double qs1,
                           double ca2, double sa2, double hc2, double hs2,
                           double cb2, double sb2, double qc2, double qs2,
                           double* f, double* r2) noexcept nogil:
    # hc/hs: cos/sin(alpha/2); qc/qs: cos/sin(beta/2)
    cdef double p1r, p1i, p2r, p2i, t1r, t1i, t2r, t2i, pr, pi_, nrm
    cdef double d1r, d1i, d2r, d2i, sa_1, sa_2, diff, lat1, lat2
    cdef double m1x, m1y, m1z, m2x, m2y, m2z, l1, l2, xy1, xy2, inv, den
    cdef double a, b, n1sq, n2sq
    r2[0] = 0.0
    if sa1 < wv.pole or sa2 < wv.pole:
        return 0
    # exp(i(b2 - b1)/2)
    p1r = qc2 * qc1 + qs2 * qs1
    p1i = qs2 * qc1 - qc2 * qs1
    # exp(i phi) * conj(p1)
    p2r = wv.cphi * p1r + wv.sphi * p1i
    p2i = wv.sphi * p1r - wv.cphi * p1i
    a = wv.c * hc1 * hs2
    b = wv.s * hs1 * hc2
    t1r = a * p1r
    t1i = a * p1i
    t2r = b * p2r
    t2i = b * p2i
    pr = t1r + t2r
    pi_ = t1i + t2i
    nrm = pr * pr + pi_ * pi_
    r2[0] = nrm * wv.knorm
    if r2[0] <= wv.node:
        return 0
    a = -0.5 * wv.c * hs1 * hs2
    b = 0.5 * wv.s * hc1 * hc2
    d1r = a * p1r + b * p2r
    d1i = a * p1i + b * p2i
    a = 0.5 * wv.c * hc1 * hc2
    b = -0.5 * wv.s * hs1 * hs2
    d2r = a * p1r + b * p2r
    d2i = a * p1i + b * p2i
    inv = 1.0 / nrm
    sa_1 = (d1i * pr - d1r * pi_) * inv
    sa_2 = (d2i * pr - d2r * pi_) * inv
    n1sq = t1r * t1r + t1i * t1i
    n2sq = t2r * t2r + t2i * t2i
    diff = 0.5 * (n1sq - n2sq) * inv
    # S_b1 = -diff, S_b2 = +diff, S_g = -1/2
    lat1 = (0.5 - ca1 * diff) / sa1
    lat2 = (0.5 + ca2 * diff) / sa2
    m1x = -cb1 * sa_1 + sb1 * lat1
    m1y = sb1 * sa_1 + cb1 * lat1
    m1z = diff
    m2x = -cb2 * sa_2 + sb2 * lat2
    m2y = sb2 * sa_2 + cb2 * lat2
    m2z = -diff
    n1sq = m1x * m1x + m1y * m1y + m1z * m1z
    n2sq = m2x * m2x + m2y * m2y + m2z * m2z
    l1 = sqrt(n1sq)
    l2 = sqrt(n2sq)
    xy1 = sqrt(m1x * m1x + m1y * m1y)
    xy2 = sqrt(m2x * m2x + m2y * m2y)
    f[0] = m1x
    f[1] = m1y
    f[2] = m1z
    f[3] = m2x
    f[4] = m2y
    f[5] = m2z
    f[6] = l1
    f[7] = l2
    f[8] = n1sq
    f[9] = n2sq
    f[10] = xy1
    f[11] = xy2
    f[12] = m1x * m2x
    f[13] = m1x * m2y
    f[14] = m1x * m2z
    f[15] = m1y * m2x
    f[16] = m1y * m2y
    f[17] = m1y * m2z
    f[18] = m1z * m2x
    f[19] = m1z * m2y
    f[20] = m1z * m2z
    inv = 1.0 / (l1 * l2)
    f[21] = f[12] * inv
    f[22] = f[13] * inv
    f[23] = f[14] * inv
    f[24] = f[15] * inv
    f[25] = f[16] * inv
    f[26] = f[17] * inv
    f[27] = f[18] * inv
    f[28] = f[19] * inv
    f[29] = f[20] * inv
    f[35] = f[12] + f[16] + f[20]
    f[30] = fmax(-1.0, fmin(1.0, f[35] * inv))
    den = xy1 * xy2
    if den > 0:
        f[31] = (m1x * m2x + m1y * m2y) / den
        f[32] = (m2x * m1y - m1x * m2y) / den
    else:
        f[31] = 1.0
        f[32] = 0.0
    f[33] = (n1sq + n2sq) / (2.0 * wv.inertia)
    f[34] = wv.energy - f[33]
    f[36] = n1sq + n2sq + 2.0 * f[35]
    f[37] = l1 - l2
    f[38] = m1z / l1
    f[39] = m1z * m1z
    f[40] = m1x * m1x
    # e = (sin a sin b, sin a cos b, cos a)
    f[41] = sa1 * sb1 * m1x + sa1 * cb1 * m1y + ca1 * m1z
    f[42] = sa2 * sb2 * m2x + sa2 * cb2 * m2y + ca2 * m2z
    f[43] = m1z + m2z
    return 1


cdef inline void deposit(double w, const double* f, Py_ssize_t chunk,
                         double[:, ::1] sums, double[:, ::1] sums2,
                         const long[::1] hfeat, const double[::1] hlo,
                         const double[::1] hwidth, const long[::1] hnb,
                         double[:, :, ::1] hw, double[:, :, ::1] hw2,
                         double[:, :, ::1] hclip, double[:, ::1] mon) noexcept nogil:
    cdef Py_ssize_t k, h, nh = hfeat.shape[0]
    cdef double v, x, lmax
    cdef long idx
    for k in range(NF):
        v = f[k]
        sums[chunk, k] += w * v
        sums2[chunk, k] += w * v * v
    for h in range(nh):
        v = f[hfeat[h]]
        x = floor((v - hlo[h]) / hwidth[h])
        if x < 0:
            hclip[chunk, h, 0] += w
        elif x >= hnb[h]:
            hclip[chunk, h, 1] += w
        else:
            idx = <long> x
            hw[chunk, h, idx] += w
            hw2[chunk, h, idx] += w * w
    lmax = fmax(1.0, fmax(f[6], f[7]))
    mon[chunk, 0] = fmax(mon[chunk, 0], fabs(f[41] - 0.5) / lmax)
    mon[chunk, 1] = fmax(mon[chunk, 1], fabs(f[42] - 0.5) / lmax)
    mon[chunk, 2] = fmax(mon[chunk, 2], fabs(f[43]) / lmax)
    mon[chunk, 3] = fmin(mon[chunk, 3], fmin(f[6], f[7]))
    mon[chunk, 4] = fmax(mon[chunk, 4], fabs(f[37]) / lmax)


cdef Wave make_wave(tuple params):
    cdef Wave wv
    wv.c = params[0]
    wv.s = params[1]
    wv.cphi = params[2]
    wv.sphi = params[3]
    wv.energy = params[4]
    wv.inertia = params[5]
    wv.node = params[6]
    wv.pole = params[7]
    wv.knorm = params[8]
    return wv


def grid_pass(const double[::1] ca1v, const double[::1] b1v,
              const double[::1] ca2v, const double[::1] b2v,
              tuple params,
              const long[::1] hfeat, const double[::1] hlo,
              const double[::1] hwidth, const long[::1] hnb,
              double[:, :, ::1] hw, double[:, :, ::1] hw2, double[:, :, ::1] hclip,
              double[:, ::1] sums, double[:, ::1] sums2,
              double[:, ::1] totals, double[:, ::1] mon, int threads=1):
    """Midpoint-grid pass with weight R^2; chunk ``i`` is the ``i``-th cos(alpha1) row."""
    cdef Wave wv = make_wave(params)
    cdef Py_ssize_t n1 = ca1v.shape[0], n2 = b1v.shape[0]
    cdef Py_ssize_t n3 = ca2v.shape[0], n4 = b2v.shape[0]
    cdef Py_ssize_t i, j, k, l
    cdef double[:, ::1] r1t = np.empty((n1, 4))
    cdef double[:, ::1] r2t = np.empty((n3, 4))
    cdef double[:, ::1] b1t = np.empty((n2, 4))
    cdef double[:, ::1] b2t = np.empty((n4, 4))
    cdef double[:, ::1] fbuf = np.zeros((n1, NF))
    cdef double[::1] rbuf = np.zeros(n1)
    _axis_cos(ca1v, r1t)
    _axis_cos(ca2v, r2t)
    _axis_beta(b1v, b1t)
    _axis_beta(b2v, b2t)
    with nogil:
        for i in prange(n1, num_threads=threads, schedule="dynamic"):
            for j in range(n2):
                for k in range(n3):
                    for l in range(n4):
                        if eval_point(&wv,
                                      r1t[i, 0], r1t[i, 1], r1t[i, 2], r1t[i, 3],
                                      b1t[j, 0], b1t[j, 1], b1t[j, 2], b1t[j, 3],
                                      r2t[k, 0], r2t[k, 1], r2t[k, 2], r2t[k, 3],
                                      b2t[l, 0], b2t[l, 1], b2t[l, 2], b2t[l, 3],
                                      &fbuf[i, 0], &rbuf[i]):
                            totals[i, 0] += rbuf[i]
                            totals[i, 1] += rbuf[i] * rbuf[i]
                            totals[i, 2] += 1
                            deposit(rbuf[i], &fbuf[i, 0], i, sums, sums2, hfeat, hlo,
                                    hwidth, hnb, hw, hw2, hclip, mon)
                        else:
                            totals[i, 3] += 1


def points_pass(const double[::1] ca1, const double[::1] b1,
                const double[::1] ca2, const double[::1] b2,
                const double[::1] weight, const long[::1] bounds,
                tuple params,
                const long[::1] hfeat, const double[::1] hlo,
                const double[::1] hwidth, const long[::1] hnb,
                double[:, :, ::1] hw, double[:, :, ::1] hw2, double[:, :, ::1] hclip,
                double[:, ::1] sums, double[:, ::1] sums2,
                double[:, ::1] totals, double[:, ::1] mon, int threads=1):
    """Explicit sample pass; chunk ``c`` covers ``bounds[c]:bounds[c+1]``."""
    cdef Wave wv = make_wave(params)
    cdef Py_ssize_t nc = bounds.shape[0] - 1
    cdef Py_ssize_t c, p
    cdef double x1, x2
    cdef double[:, ::1] fbuf = np.zeros((max(nc, 1), NF))
    cdef double[::1] rbuf = np.zeros(max(nc, 1))
    with nogil:
        for c in prange(nc, num_threads=threads, schedule="dynamic"):
            for p in range(bounds[c], bounds[c + 1]):
                x1 = sqrt(fmax(0.0, 1.0 - ca1[p] * ca1[p]))
                x2 = sqrt(fmax(0.0, 1.0 - ca2[p] * ca2[p]))
                if eval_point(&wv,
                              ca1[p], x1, sqrt(0.5 * (1 + ca1[p])), sqrt(0.5 * (1 - ca1[p])),
                              cos(b1[p]), sin(b1[p]), cos(0.5 * b1[p]), sin(0.5 * b1[p]),
                              ca2[p], x2, sqrt(0.5 * (1 + ca2[p])), sqrt(0.5 * (1 - ca2[p])),
                              cos(b2[p]), sin(b2[p]), cos(0.5 * b2[p]), sin(0.5 * b2[p]),
                              &fbuf[c, 0], &rbuf[c]):
                    totals[c, 0] += weight[p]
                    totals[c, 1] += weight[p] * weight[p]
                    totals[c, 2] += 1
                    deposit(weight[p], &fbuf[c, 0], c, sums, sums2, hfeat, hlo,
                            hwidth, hnb, hw, hw2, hclip, mon)
                else:
                    totals[c, 3] += 1


def lattice_pass(long n_points, const long[::1] z, long chunk_size, tuple params,
                 const long[::1] hfeat, const double[::1] hlo,
                 const double[::1] hwidth, const long[::1] hnb,
                 double[:, :, ::1] hw, double[:, :, ::1] hw2, double[:, :, ::1] hclip,
                 double[:, ::1] sums, double[:, ::1] sums2,
                 double[:, ::1] totals, double[:, ::1] mon, int threads=1):
    """Rank-1 lattice pass: point ``n`` has coordinates ``((n z_d mod N) + 1/2) / N``
    mapped to ``(cos a1, b1, cos a2, b2)``; chunk ``c`` covers indices
    ``[c chunk_size, (c+1) chunk_size)`` and weights are R^2."""
    cdef Wave wv = make_wave(params)
    cdef Py_ssize_t nc = (n_points + chunk_size - 1) // chunk_size
    cdef Py_ssize_t c, n, hi
    cdef unsigned long long nn = <unsigned long long>n_points
    cdef unsigned long long z0 = <unsigned long long>z[0], z1 = <unsigned long long>z[1]
    cdef unsigned long long z2 = <unsigned long long>z[2], z3 = <unsigned long long>z[3]
    cdef double inv = 1.0 / n_points
    cdef double ca1, u1, ca2, u2, x1, x2
    cdef double[:, ::1] fbuf = np.zeros((max(nc, 1), NF))
    cdef double[::1] rbuf = np.zeros(max(nc, 1))
    with nogil:
        for c in prange(nc, num_threads=threads, schedule="dynamic"):
            hi = min(n_points, (c + 1) * chunk_size)
            for n in range(c * chunk_size, hi):
                ca1 = 2.0 * ((((<unsigned long long>n) * z0) % nn) + 0.5) * inv - 1.0
                u1 = M_PI * ((((<unsigned long long>n) * z1) % nn) + 0.5) * inv
                ca2 = 2.0 * ((((<unsigned long long>n) * z2) % nn) + 0.5) * inv - 1.0
                u2 = M_PI * ((((<unsigned long long>n) * z3) % nn) + 0.5) * inv
                x1 = sqrt(fmax(0.0, 1.0 - ca1 * ca1))
                x2 = sqrt(fmax(0.0, 1.0 - ca2 * ca2))
                # u = beta / 2
                if eval_point(&wv,
                              ca1, x1, sqrt(0.5 * (1 + ca1)), sqrt(0.5 * (1 - ca1)),
                              cos(2 * u1), sin(2 * u1), cos(u1), sin(u1),
                              ca2, x2, sqrt(0.5 * (1 + ca2)), sqrt(0.5 * (1 - ca2)),
                              cos(2 * u2), sin(2 * u2), cos(u2), sin(u2),
                              &fbuf[c, 0], &rbuf[c]):
                    totals[c, 0] += rbuf[c]
                    totals[c, 1] += rbuf[c] * rbuf[c]
                    totals[c, 2] += 1
                    deposit(rbuf[c], &fbuf[c, 0], c, sums, sums2, hfeat, hlo,
                            hwidth, hnb, hw, hw2, hclip, mon)
                else:
                    totals[c, 3] += 1


def evaluate_points(const double[::1] ca1, const double[::1] b1,
                    const double[::1] ca2, const double[::1] b2, tuple params):
    """Feature rows and R^2 for each point; excluded points get NaN features."""
    cdef Wave wv = make_wave(params)
    cdef Py_ssize_t n = ca1.shape[0], p
    cdef double r2
    cdef double x1, x2
    out = np.full((n, NF), np.nan)
    dens = np.zeros(n)
    cdef double[:, ::1] f = out
    cdef double[::1] d = dens
    with nogil:
        for p in range(n):
            x1 = sqrt(fmax(0.0, 1.0 - ca1[p] * ca1[p]))
            x2 = sqrt(fmax(0.0, 1.0 - ca2[p] * ca2[p]))
            r2 = 0.0
            eval_point(&wv,
                              ca1[p], x1, sqrt(0.5 * (1 + ca1[p])), sqrt(0.5 * (1 - ca1[p])),
                              cos(b1[p]), sin(b1[p]), cos(0.5 * b1[p]), sin(0.5 * b1[p]),
                              ca2[p], x2, sqrt(0.5 * (1 + ca2[p])), sqrt(0.5 * (1 - ca2[p])),
                              cos(b2[p]), sin(b2[p]), cos(0.5 * b2[p]), sin(0.5 * b2[p]),
                              &f[p, 0], &r2)
            d[p] = r2
    return out, dens


cdef void _axis_cos(const double[::1] ca, double[:, ::1] t):
    cdef Py_ssize_t i
    for i in range(ca.shape[0]):
        t[i, 0] = ca[i]
        t[i, 1] = sqrt(fmax(0.0, 1.0 - ca[i] * ca[i]))
        t[i, 2] = sqrt(0.5 * (1 + ca[i]))
        t[i, 3] = sqrt(0.5 * (1 - ca[i]))


cdef void _axis_beta(const double[::1] b, double[:, ::1] t):
    cdef Py_ssize_t i
    for i in range(b.shape[0]):
        t[i, 0] = cos(b[i])
        t[i, 1] = sin(b[i])
        t[i, 2] = cos(0.5 * b[i])
        t[i, 3] = sin(0.5 * b[i])
