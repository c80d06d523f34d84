"""Compiled inner loops: Niggli reduction with transform tracking and MC probing.

Everything here works on raw float64/int64 arrays so numba can compile it; the
public wrappers live in :mod:`g6niggli.reduction` and :mod:`g6niggli.montecarlo`.
"""
import numpy as np
from numba import njit

OK, FAIL_CAP, FAIL_NAN = 0, 1, 2

# probe flags
COUNTED, INVALID_PERTURBED, IDENTITY, REDUCE_FAILED = 0, 1, 2, 3

STEP_NAMES = {
    1: "N1 swap a,b",
    2: "N2 swap b,c",
    3: "N3 signs +++",
    4: "N4 signs ---",
    5: "N5 c -> c -/+ b",
    6: "N6 c -> c -/+ a",
    7: "N7 b -> b -/+ a",
    8: "N8 c -> a+b+c",
}


@njit(cache=True, nogil=True)
def _matmul3(t, m):
    out = np.zeros((3, 3), dtype=np.int64)
    for i in range(3):
        for j in range(3):
            s = 0
            for k in range(3):
                s += t[i, k] * m[k, j]
            out[i, j] = s
    return out


@njit(cache=True, nogil=True)
def is_pd(g, tol):
    s = 0.0
    for x in g:
        if not np.isfinite(x):
            return False
        if abs(x) > s:
            s = abs(x)
    if s == 0.0:
        return False
    g1, g2, g3, g4, g5, g6 = g[0], g[1], g[2], g[3], g[4], g[5]
    if not g1 > tol * s:
        return False
    if not g1 * g2 - g6 * g6 / 4 > tol * s * s:
        return False
    det = (g1 * (g2 * g3 - g4 * g4 / 4)
           - g6 / 2 * (g6 / 2 * g3 - g4 / 2 * g5 / 2)
           + g5 / 2 * (g6 / 2 * g4 / 2 - g2 * g5 / 2))
    return det > tol * s * s * s


@njit(cache=True, nogil=True)
def kg_reduce(g_in, tol, max_iter, steps):
    """Krivy-Gruber style reduction with relative tolerance ``tol``.

    Returns (g, m, n_steps, iterations, status); ``m`` maps input edges to
    reduced edges row-wise and ``steps[:n_steps]`` holds the applied step codes.
    """
    g = g_in.copy()
    m = np.eye(3, dtype=np.int64)
    n = 0
    it = 0
    cap = steps.shape[0]
    while True:
        if it >= max_iter:
            return g, m, n, it, FAIL_CAP
        it += 1
        for x in g:
            if not np.isfinite(x):
                return g, m, n, it, FAIL_NAN
        eps = tol * max(abs(g[0]), abs(g[1]), abs(g[2]))

        # N1
        if g[0] > g[1] + eps or (abs(g[0] - g[1]) <= eps and abs(g[3]) > abs(g[4]) + eps):
            g[0], g[1] = g[1], g[0]
            g[3], g[4] = g[4], g[3]
            t = np.zeros((3, 3), dtype=np.int64)
            t[0, 1] = -1
            t[1, 0] = -1
            t[2, 2] = -1
            m = _matmul3(t, m)
            if n < cap:
                steps[n] = 1
            n += 1
        # N2
        if g[1] > g[2] + eps or (abs(g[1] - g[2]) <= eps and abs(g[4]) > abs(g[5]) + eps):
            g[1], g[2] = g[2], g[1]
            g[4], g[5] = g[5], g[4]
            t = np.zeros((3, 3), dtype=np.int64)
            t[0, 0] = -1
            t[1, 2] = -1
            t[2, 1] = -1
            m = _matmul3(t, m)
            if n < cap:
                steps[n] = 2
            n += 1
            continue

        # N3 / N4
        xi, eta, zeta = g[3], g[4], g[5]
        npos = 0
        nzero = 0
        for x in (xi, eta, zeta):
            if x > eps:
                npos += 1
            elif not x < -eps:
                nzero += 1
        if npos == 3 or (nzero == 0 and npos == 1):
            code = 3
            i = -1 if xi < 0 else 1
            j = -1 if eta < 0 else 1
            k = -1 if zeta < 0 else 1
        else:
            code = 4
            i = 1
            j = 1
            k = 1
            p = 0
            if xi > eps:
                i = -1
            elif not xi < -eps:
                p = 1
            if eta > eps:
                j = -1
            elif not eta < -eps:
                p = 2
            if zeta > eps:
                k = -1
            elif not zeta < -eps:
                p = 3
            if i * j * k < 0:
                if p == 1:
                    i = -i
                elif p == 2:
                    j = -j
                elif p == 3:
                    k = -k
        if not (i == 1 and j == 1 and k == 1):
            g[3] = xi * j * k
            g[4] = eta * i * k
            g[5] = zeta * i * j
            t = np.zeros((3, 3), dtype=np.int64)
            t[0, 0] = i
            t[1, 1] = j
            t[2, 2] = k
            m = _matmul3(t, m)
            if n < cap:
                steps[n] = code
            n += 1

        A, B, C, xi, eta, zeta = g[0], g[1], g[2], g[3], g[4], g[5]
        # N5
        if (abs(xi) > B + eps or (abs(xi - B) <= eps and 2 * eta < zeta - eps)
                or (abs(xi + B) <= eps and zeta < -eps)):
            s = 1 if xi > 0 else -1
            g[2] = B + C - s * xi
            g[4] = eta - s * zeta
            g[3] = xi - 2 * s * B
            t = np.eye(3, dtype=np.int64)
            t[2, 1] = -s
            m = _matmul3(t, m)
            if n < cap:
                steps[n] = 5
            n += 1
            continue
        # N6
        if (abs(eta) > A + eps or (abs(eta - A) <= eps and 2 * xi < zeta - eps)
                or (abs(eta + A) <= eps and zeta < -eps)):
            s = 1 if eta > 0 else -1
            g[2] = A + C - s * eta
            g[3] = xi - s * zeta
            g[4] = eta - 2 * s * A
            t = np.eye(3, dtype=np.int64)
            t[2, 0] = -s
            m = _matmul3(t, m)
            if n < cap:
                steps[n] = 6
            n += 1
            continue
        # N7
        if (abs(zeta) > A + eps or (abs(zeta - A) <= eps and 2 * xi < eta - eps)
                or (abs(zeta + A) <= eps and eta < -eps)):
            s = 1 if zeta > 0 else -1
            g[1] = A + B - s * zeta
            g[3] = xi - s * eta
            g[5] = zeta - 2 * s * A
            t = np.eye(3, dtype=np.int64)
            t[1, 0] = -s
            m = _matmul3(t, m)
            if n < cap:
                steps[n] = 7
            n += 1
            continue
        # N8
        tot = xi + eta + zeta + A + B
        if tot < -eps or (abs(tot) <= eps and 2 * (A + eta) + zeta > eps):
            g[2] = A + B + C + xi + eta + zeta
            g[3] = 2 * B + xi + zeta
            g[4] = 2 * A + eta + zeta
            t = np.eye(3, dtype=np.int64)
            t[2, 0] = 1
            t[2, 1] = 1
            m = _matmul3(t, m)
            if n < cap:
                steps[n] = 8
            n += 1
            continue
        return g, m, n, it, OK


@njit(cache=True, nogil=True)
def g6_of_basis(m):
    """Integer 6x6 G6 matrix of a 3x3 edge transform (doubled-metric trick)."""
    rr = (0, 1, 2, 1, 0, 0)
    cc = (0, 1, 2, 2, 2, 1)
    out = np.zeros((6, 6), dtype=np.int64)
    dg = np.zeros((3, 3), dtype=np.int64)
    for j in range(6):
        dg[:, :] = 0
        if rr[j] == cc[j]:
            dg[rr[j], rr[j]] = 2
        else:
            dg[rr[j], cc[j]] = 1
            dg[cc[j], rr[j]] = 1
        for i in range(6):
            r = rr[i]
            c = cc[i]
            s = 0
            for k in range(3):
                for l in range(3):
                    s += m[r, k] * dg[k, l] * m[c, l]
            out[i, j] = s // 2 if r == c else s
    return out


@njit(cache=True, nogil=True)
def reduce_batch(gs, tol, max_iter, out_g, out_m, out_status):
    steps = np.zeros(4 * max_iter + 8, dtype=np.int8)
    for i in range(gs.shape[0]):
        g, m, n, it, st = kg_reduce(gs[i], tol, max_iter, steps)
        out_g[i] = g
        out_m[i] = m
        out_status[i] = st


@njit(cache=True, nogil=True)
def probe_chunk(starts, noise, scale, tol, max_iter, step_back, spherical, reduce_start,
                center_plus, center_minus, out_mats, out_flags, out_probe):
    """Steps 3-7 of the probe processes for a batch of validated start vectors.

    With ``reduce_start`` false the start vectors are perturbed as given
    (used for witness probing of a known boundary point).
    """
    steps = np.zeros(4 * max_iter + 8, dtype=np.int8)
    for i in range(starts.shape[0]):
        if reduce_start:
            g1, m1, n1, it1, st1 = kg_reduce(starts[i], tol, max_iter, steps)
            if st1 != OK:
                out_flags[i] = REDUCE_FAILED
                continue
        else:
            g1 = starts[i].copy()
        nrm = np.sqrt(np.sum(g1 * g1))
        base = g1.copy()
        if step_back > 0.0:
            eps = tol * max(abs(g1[0]), abs(g1[1]), abs(g1[2]))
            minus = g1[3] <= eps and g1[4] <= eps and g1[5] <= eps
            ctr = center_minus if minus else center_plus
            base = g1 + step_back * nrm * ctr
        d = noise[i].copy()
        if spherical:
            dn = np.sqrt(np.sum(d * d))
            if dn > 0:
                d = d / dn
        p = base + scale * nrm * d
        out_probe[i] = p
        if not is_pd(p, 1e-12):
            out_flags[i] = INVALID_PERTURBED
            continue
        g2, m2, n2, it2, st2 = kg_reduce(p, tol, max_iter, steps)
        if st2 != OK:
            out_flags[i] = REDUCE_FAILED
            continue
        mat = g6_of_basis(m2)
        ident = True
        for a in range(6):
            for b in range(6):
                out_mats[i, a * 6 + b] = mat[a, b]
                if mat[a, b] != (1 if a == b else 0):
                    ident = False
        out_flags[i] = IDENTITY if ident else COUNTED
