"""Pure numpy implementation of the accumulation kernels.

Same entry points and array contracts as the compiled ``_kernels`` module;
used when the extension is unavailable or ``BOHMPAIR_BACKEND=python``.
"""

import numpy as np

from .features import N_FEATURES

# points evaluated per vectorized block; bounds peak memory at ~N_FEATURES * 8 * BLOCK bytes
BLOCK = 1 << 15


def _features(ca1, sa1, hc1, hs1, cb1, sb1, qc1, qs1,
              ca2, sa2, hc2, hs2, cb2, sb2, qc2, qs2, params):
    c, s, cphi, sphi, energy, inertia, node, pole, knorm = params
    n = ca1.shape[0]
    f = np.full((n, N_FEATURES), np.nan)
    p1r = qc2 * qc1 + qs2 * qs1
    p1i = qs2 * qc1 - qc2 * qs1
    p2r = cphi * p1r + sphi * p1i
    p2i = sphi * p1r - cphi * p1i
    a = c * hc1 * hs2
    b = s * hs1 * hc2
    t1r, t1i = a * p1r, a * p1i
    t2r, t2i = b * p2r, b * p2i
    pr, pi_ = t1r + t2r, t1i + t2i
    nrm = pr * pr + pi_ * pi_
    r2 = nrm * knorm
    ok = (sa1 >= pole) & (sa2 >= pole) & (r2 > node)
    r2 = np.where((sa1 >= pole) & (sa2 >= pole), r2, 0.0)
    if not ok.any():
        return f, r2, ok
    sel = ok
    (ca1, sa1, hc1, hs1, cb1, sb1, ca2, sa2, hc2, hs2, cb2, sb2,
     p1r, p1i, p2r, p2i, t1r, t1i, t2r, t2i, pr, pi_, nrm) = (
        x[sel] for x in (ca1, sa1, hc1, hs1, cb1, sb1, ca2, sa2, hc2, hs2, cb2, sb2,
                         p1r, p1i, p2r, p2i, t1r, t1i, t2r, t2i, pr, pi_, nrm))
    a, b = -0.5 * c * hs1 * hs2, 0.5 * s * hc1 * hc2
    d1r, d1i = a * p1r + b * p2r, a * p1i + b * p2i
    a, b = 0.5 * c * hc1 * hc2, -0.5 * s * hs1 * hs2
    d2r, d2i = a * p1r + b * p2r, a * p1i + b * p2i
    inv = 1.0 / nrm
    sa_1 = (d1i * pr - d1r * pi_) * inv
    sa_2 = (d2i * pr - d2r * pi_) * inv
    diff = 0.5 * (t1r * t1r + t1i * t1i - (t2r * t2r + t2i * t2i)) * inv
    lat1 = (0.5 - ca1 * diff) / sa1
    lat2 = (0.5 + ca2 * diff) / sa2
    m1x, m1y, m1z = -cb1 * sa_1 + sb1 * lat1, sb1 * sa_1 + cb1 * lat1, diff
    m2x, m2y, m2z = -cb2 * sa_2 + sb2 * lat2, sb2 * sa_2 + cb2 * lat2, -diff
    n1sq = m1x * m1x + m1y * m1y + m1z * m1z
    n2sq = m2x * m2x + m2y * m2y + m2z * m2z
    l1, l2 = np.sqrt(n1sq), np.sqrt(n2sq)
    xy1 = np.sqrt(m1x * m1x + m1y * m1y)
    xy2 = np.sqrt(m2x * m2x + m2y * m2y)
    g = np.empty((m1x.shape[0], N_FEATURES))
    g[:, 0:6] = np.column_stack([m1x, m1y, m1z, m2x, m2y, m2z])
    g[:, 6], g[:, 7], g[:, 8], g[:, 9] = l1, l2, n1sq, n2sq
    g[:, 10], g[:, 11] = xy1, xy2
    g[:, 12:21] = (g[:, 0:3, None] * g[:, None, 3:6]).reshape(-1, 9)
    inv = 1.0 / (l1 * l2)
    g[:, 21:30] = g[:, 12:21] * inv[:, None]
    g[:, 35] = g[:, 12] + g[:, 16] + g[:, 20]
    g[:, 30] = np.clip(g[:, 35] * inv, -1.0, 1.0)
    den = xy1 * xy2
    pos = den > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        g[:, 31] = np.where(pos, (m1x * m2x + m1y * m2y) / den, 1.0)
        g[:, 32] = np.where(pos, (m2x * m1y - m1x * m2y) / den, 0.0)
    g[:, 33] = (n1sq + n2sq) / (2.0 * inertia)
    g[:, 34] = energy - g[:, 33]
    g[:, 36] = n1sq + n2sq + 2.0 * g[:, 35]
    g[:, 37] = l1 - l2
    g[:, 38] = m1z / l1
    g[:, 39] = m1z * m1z
    g[:, 40] = m1x * m1x
    g[:, 41] = sa1 * sb1 * m1x + sa1 * cb1 * m1y + ca1 * m1z
    g[:, 42] = sa2 * sb2 * m2x + sa2 * cb2 * m2y + ca2 * m2z
    g[:, 43] = m1z + m2z
    f[sel] = g
    return f, r2, ok


def _cos_axis(ca):
    ca = np.asarray(ca, dtype=float)
    return (ca, np.sqrt(np.maximum(0.0, 1.0 - ca * ca)),
            np.sqrt(0.5 * (1 + ca)), np.sqrt(0.5 * (1 - ca)))


def _beta_axis(b):
    b = np.asarray(b, dtype=float)
    return (np.cos(b), np.sin(b), np.cos(0.5 * b), np.sin(0.5 * b))


def evaluate_points(ca1, b1, ca2, b2, params):
    f, r2, _ = _features(*_cos_axis(ca1), *_beta_axis(b1),
                         *_cos_axis(ca2), *_beta_axis(b2), params)
    return f, r2


def _deposit(chunk, w, f, hfeat, hlo, hwidth, hnb, hw, hw2, hclip, sums, sums2, mon):
    sums[chunk] += w @ f
    sums2[chunk] += w @ (f * f)
    for h in range(len(hfeat)):
        v = f[:, hfeat[h]]
        x = np.floor((v - hlo[h]) / hwidth[h])
        below, above = x < 0, x >= hnb[h]
        hclip[chunk, h, 0] += w[below].sum()
        hclip[chunk, h, 1] += w[above].sum()
        inside = ~(below | above)
        idx = x[inside].astype(np.int64)
        hw[chunk, h, : hnb[h]] += np.bincount(idx, weights=w[inside], minlength=hnb[h])
        hw2[chunk, h, : hnb[h]] += np.bincount(idx, weights=w[inside] ** 2, minlength=hnb[h])
    lmax = np.maximum(1.0, np.maximum(f[:, 6], f[:, 7]))
    if len(w):
        mon[chunk, 0] = max(mon[chunk, 0], np.max(np.abs(f[:, 41] - 0.5) / lmax))
        mon[chunk, 1] = max(mon[chunk, 1], np.max(np.abs(f[:, 42] - 0.5) / lmax))
        mon[chunk, 2] = max(mon[chunk, 2], np.max(np.abs(f[:, 43]) / lmax))
        mon[chunk, 3] = min(mon[chunk, 3], np.min(np.minimum(f[:, 6], f[:, 7])))
        mon[chunk, 4] = max(mon[chunk, 4], np.max(np.abs(f[:, 37]) / lmax))


def grid_pass(ca1v, b1v, ca2v, b2v, params, hfeat, hlo, hwidth, hnb,
              hw, hw2, hclip, sums, sums2, totals, mon, threads=1):
    r1 = np.column_stack(_cos_axis(ca1v))
    r2t = np.column_stack(_cos_axis(ca2v))
    bt1 = np.column_stack(_beta_axis(b1v))
    bt2 = np.column_stack(_beta_axis(b2v))
    # inner (cos a2, b2) plane, flattened in C order to match the compiled loop
    kk, ll = np.meshgrid(np.arange(len(ca2v)), np.arange(len(b2v)), indexing="ij")
    kk, ll = kk.ravel(), ll.ravel()
    inner2 = [r2t[kk, q] for q in range(4)] + [bt2[ll, q] for q in range(4)]
    n_inner = kk.size
    for i in range(len(ca1v)):
        for j in range(len(b1v)):
            outer = [np.full(n_inner, r1[i, q]) for q in range(4)]
            outer += [np.full(n_inner, bt1[j, q]) for q in range(4)]
            f, r2, ok = _features(*outer, *inner2, params)
            w = r2[ok]
            totals[i, 0] += w.sum()
            totals[i, 1] += (w * w).sum()
            totals[i, 2] += ok.sum()
            totals[i, 3] += (~ok).sum()
            _deposit(i, w, f[ok], hfeat, hlo, hwidth, hnb, hw, hw2, hclip, sums, sums2, mon)


def points_pass(ca1, b1, ca2, b2, weight, bounds, params, hfeat, hlo, hwidth, hnb,
                hw, hw2, hclip, sums, sums2, totals, mon, threads=1):
    for c in range(len(bounds) - 1):
        for lo in range(bounds[c], bounds[c + 1], BLOCK):
            hi = min(lo + BLOCK, bounds[c + 1])
            sl = slice(lo, hi)
            f, _, ok = _features(*_cos_axis(ca1[sl]), *_beta_axis(b1[sl]),
                                 *_cos_axis(ca2[sl]), *_beta_axis(b2[sl]), params)
            w = np.asarray(weight[sl])[ok]
            totals[c, 0] += w.sum()
            totals[c, 1] += (w * w).sum()
            totals[c, 2] += ok.sum()
            totals[c, 3] += (~ok).sum()
            _deposit(c, w, f[ok], hfeat, hlo, hwidth, hnb, hw, hw2, hclip, sums, sums2, mon)


def lattice_pass(n_points, z, chunk_size, params, hfeat, hlo, hwidth, hnb,
                 hw, hw2, hclip, sums, sums2, totals, mon, threads=1):
    nn = np.uint64(n_points)
    zz = [np.uint64(x) for x in z]
    n_chunks = -(-n_points // chunk_size)
    for c in range(n_chunks):
        for lo in range(c * chunk_size, min(n_points, (c + 1) * chunk_size), BLOCK):
            hi = min(lo + BLOCK, (c + 1) * chunk_size, n_points)
            n = np.arange(lo, hi, dtype=np.uint64)
            u = [((n * zd) % nn + 0.5) / n_points for zd in zz]
            f, r2, ok = _features(*_cos_axis(2 * u[0] - 1), *_beta_axis(2 * np.pi * u[1]),
                                  *_cos_axis(2 * u[2] - 1), *_beta_axis(2 * np.pi * u[3]),
                                  params)
            w = r2[ok]
            totals[c, 0] += w.sum()
            totals[c, 1] += (w * w).sum()
            totals[c, 2] += ok.sum()
            totals[c, 3] += (~ok).sum()
            _deposit(c, w, f[ok], hfeat, hlo, hwidth, hnb, hw, hw2, hclip, sums, sums2, mon)
