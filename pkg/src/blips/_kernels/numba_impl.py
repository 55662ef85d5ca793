"""Numba-jitted hot kernels.

Same contracts as ``numpy_impl``; explicit loops keep the summation order
fixed so each backend is deterministic run to run.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def soup_sweep(P, D, Z, lam, update_atoms=True):
    r, n = P.shape
    u_count = D.shape[1]
    R = P - np.dot(D, Z)
    for u in range(u_count):
        d_old = np.empty(r, dtype=np.complex128)
        for i in range(r):
            d_old[i] = D[i, u]
        t_old = Z[u, :].copy()
        # b_j = <d_u, E_u[:, j]> with E_u = R + d_u t_old^T
        b = t_old.copy()
        for i in range(r):
            cdi = np.conj(d_old[i])
            for j in range(n):
                b[j] += cdi * R[i, j]
        t_new = np.zeros(n, dtype=np.complex128)
        for j in range(n):
            if abs(b[j]) >= lam:
                t_new[j] = b[j]
        d_new = d_old
        if update_atoms:
            s = 0.0 + 0.0j
            for j in range(n):
                s += t_old[j] * np.conj(t_new[j])
            h = np.empty(r, dtype=np.complex128)
            hss = 0.0
            for i in range(r):
                acc = d_old[i] * s
                for j in range(n):
                    acc += R[i, j] * np.conj(t_new[j])
                h[i] = acc
                hss += acc.real * acc.real + acc.imag * acc.imag
            hn = np.sqrt(hss)
            d_new = np.zeros(r, dtype=np.complex128)
            if hn > 0.0:
                for i in range(r):
                    d_new[i] = h[i] / hn
            else:
                d_new[0] = 1.0
        for i in range(r):
            doi = d_old[i]
            dni = d_new[i]
            for j in range(n):
                R[i, j] += doi * t_old[j] - dni * t_new[j]
        for i in range(r):
            D[i, u] = d_new[i]
        for j in range(n):
            Z[u, j] = t_new[j]


@njit(cache=True, nogil=True)
def extract_patches(x, patch_side):
    h, w = x.shape
    r = patch_side * patch_side
    out = np.empty((r, h * w), dtype=x.dtype)
    for i in range(h):
        for j in range(w):
            col = i * w + j
            for a in range(patch_side):
                ia = i + a
                if ia >= h:
                    ia -= h
                for bcol in range(patch_side):
                    jb = j + bcol
                    if jb >= w:
                        jb -= w
                    out[a * patch_side + bcol, col] = x[ia, jb]
    return out


@njit(cache=True, nogil=True)
def aggregate_patches(pmat, patch_side, h, w):
    out = np.zeros((h, w), dtype=pmat.dtype)
    for i in range(h):
        for j in range(w):
            col = i * w + j
            for a in range(patch_side):
                ia = i + a
                if ia >= h:
                    ia -= h
                for bcol in range(patch_side):
                    jb = j + bcol
                    if jb >= w:
                        jb -= w
                    out[ia, jb] += pmat[a * patch_side + bcol, col]
    return out


@njit(cache=True, nogil=True)
def _shifted_axpy(dst, src, wv, dj):
    """dst[q] += wv * src[(q + dj - 1) mod w], contiguous in q."""
    w = dst.shape[0]
    if dj == 0:
        dst[0] += wv * src[w - 1]
        for q in range(1, w):
            dst[q] += wv * src[q - 1]
    elif dj == 1:
        for q in range(w):
            dst[q] += wv * src[q]
    else:
        for q in range(w - 1):
            dst[q] += wv * src[q + 1]
        dst[w - 1] += wv * src[0]


@njit(cache=True, nogil=True)
def _shifted_dot(a, b, dj):
    """sum_q a[q] * b[(q + dj - 1) mod w]."""
    w = a.shape[0]
    acc = 0.0
    if dj == 0:
        acc += a[0] * b[w - 1]
        for q in range(1, w):
            acc += a[q] * b[q - 1]
    elif dj == 1:
        for q in range(w):
            acc += a[q] * b[q]
    else:
        for q in range(w - 1):
            acc += a[q] * b[q + 1]
        acc += a[w - 1] * b[0]
    return acc


@njit(cache=True, nogil=True)
def conv3x3_forward(x, weights, bias):
    c_in, h, w = x.shape
    c_out = weights.shape[0]
    out = np.empty((c_out, h, w), dtype=x.dtype)
    for o in range(c_out):
        bo = bias[o]
        for p in range(h):
            for q in range(w):
                out[o, p, q] = bo
        for c in range(c_in):
            for di in range(3):
                for dj in range(3):
                    wv = weights[o, c, di, dj]
                    for p in range(h):
                        ps = p + di - 1
                        if ps < 0:
                            ps += h
                        elif ps >= h:
                            ps -= h
                        _shifted_axpy(out[o, p], x[c, ps], wv, dj)
    return out


@njit(cache=True, nogil=True)
def conv3x3_backward(x, weights, gout):
    c_in, h, w = x.shape
    c_out = weights.shape[0]
    gx = np.zeros_like(x)
    gw = np.zeros_like(weights)
    gb = np.zeros(c_out, dtype=weights.dtype)
    for o in range(c_out):
        acc = 0.0
        for p in range(h):
            for q in range(w):
                acc += gout[o, p, q]
        gb[o] = acc
        for c in range(c_in):
            for di in range(3):
                for dj in range(3):
                    acc = 0.0
                    wv = weights[o, c, di, dj]
                    for p in range(h):
                        ps = p + di - 1
                        if ps < 0:
                            ps += h
                        elif ps >= h:
                            ps -= h
                        # gw pairs gout rows with forward-shifted x rows;
                        # gx scatters gout back through the same shift.
                        acc += _shifted_dot(gout[o, p], x[c, ps], dj)
                        _shifted_axpy(gx[c, ps], gout[o, p], wv, 2 - dj)
                    gw[o, c, di, dj] = acc
    return gx, gw, gb


@njit(cache=True, nogil=True)
def dart_throw(candidates, radius, h, w):
    n = candidates.shape[0]
    accepted = np.zeros(n, dtype=np.bool_)
    if n == 0:
        return accepted
    cell = radius / np.sqrt(2.0)
    if cell < 1e-9:
        cell = 1e-9
    gh = int(h / cell) + 1
    gw = int(w / cell) + 1
    grid = np.full((gh, gw), -1, dtype=np.int64)
    r2 = radius * radius
    reach = int(np.ceil(radius / cell))
    for k in range(n):
        ci = candidates[k, 0]
        cj = candidates[k, 1]
        gi = int(ci / cell)
        gj = int(cj / cell)
        ok = True
        ni0 = gi - reach if gi - reach > 0 else 0
        ni1 = gi + reach + 1 if gi + reach + 1 < gh else gh
        nj0 = gj - reach if gj - reach > 0 else 0
        nj1 = gj + reach + 1 if gj + reach + 1 < gw else gw
        for ni in range(ni0, ni1):
            for nj in range(nj0, nj1):
                idx = grid[ni, nj]
                if idx >= 0:
                    di = candidates[idx, 0] - ci
                    dj = candidates[idx, 1] - cj
                    if di * di + dj * dj < r2:
                        ok = False
                        break
            if not ok:
                break
        if ok:
            accepted[k] = True
            grid[gi, gj] = k
    return accepted
