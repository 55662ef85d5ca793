"""Pure-numpy implementations of the hot kernels.

Reference path for the numba implementations in ``numba_impl``; selected
at runtime when ``BLIPS_DISABLE_NUMBA=1`` or numba is unavailable.
"""

import numpy as np


def soup_sweep(P, D, Z, lam, update_atoms=True):
    """One full atom sweep of sum-of-outer-products dictionary learning.

    P: (r, N) patch matrix, D: (r, U) unit-norm dictionary, Z: (U, N)
    sparse codes.  D and Z are updated in place, one atom at a time:
    hard-threshold code update (keep entries with magnitude >= lam), then
    a normalized rank-one atom update.  Atoms whose codes vanish are reset
    to the first standard basis vector.  Skipping the atom update gives
    the fixed-dictionary (sparse-coding only) variant.
    """
    r, n = P.shape
    u_count = D.shape[1]
    R = P - D @ Z
    for u in range(u_count):
        d_old = D[:, u].copy()
        t_old = Z[u, :].copy()
        # b_j = <d_u, E_u[:, j]> with E_u = R + d_u t_old^T
        b = np.conj(d_old) @ R + t_old
        t_new = np.where(np.abs(b) >= lam, b, 0.0 + 0.0j)
        if update_atoms:
            h = R @ np.conj(t_new) + d_old * (t_old @ np.conj(t_new))
            hn = np.linalg.norm(h)
            if hn > 0.0:
                d_new = h / hn
            else:
                d_new = np.zeros(r, dtype=np.complex128)
                d_new[0] = 1.0
        else:
            d_new = d_old
        R += np.outer(d_old, t_old) - np.outer(d_new, t_new)
        D[:, u] = d_new
        Z[u, :] = t_new


def extract_patches(x, patch_side):
    """All stride-1 periodic patches of x as columns of an (r, H*W) matrix."""
    h, w = x.shape
    rows = (np.arange(h)[:, None] + np.arange(patch_side)[None, :]) % h
    cols = (np.arange(w)[:, None] + np.arange(patch_side)[None, :]) % w
    # patches[i, j, a, b] = x[(i+a) % h, (j+b) % w]
    patches = x[rows[:, None, :, None], cols[None, :, None, :]]
    return np.ascontiguousarray(
        patches.reshape(h * w, patch_side * patch_side).T
    )


def aggregate_patches(pmat, patch_side, h, w):
    """Adjoint of extract_patches: add each patch back at its anchor."""
    v = pmat.T.reshape(h, w, patch_side, patch_side)
    out = np.zeros((h, w), dtype=pmat.dtype)
    for a in range(patch_side):
        for b in range(patch_side):
            out += np.roll(v[:, :, a, b], (a, b), axis=(0, 1))
    return out


def conv3x3_forward(x, weights, bias):
    """Periodic 3x3 cross-correlation: x (Cin,H,W) -> (Cout,H,W)."""
    c_out = weights.shape[0]
    h, w = x.shape[1:]
    out = np.empty((c_out, h, w), dtype=x.dtype)
    out[:] = bias[:, None, None]
    for di in range(3):
        for dj in range(3):
            xs = np.roll(x, (1 - di, 1 - dj), axis=(1, 2))
            out += np.einsum("oc,chw->ohw", weights[:, :, di, dj], xs)
    return out


def conv3x3_backward(x, weights, gout):
    """Gradients of conv3x3_forward for upstream gout (Cout,H,W).

    Returns (gx, gweights, gbias).
    """
    gw = np.zeros_like(weights)
    gx = np.zeros_like(x)
    for di in range(3):
        for dj in range(3):
            xs = np.roll(x, (1 - di, 1 - dj), axis=(1, 2))
            gw[:, :, di, dj] = np.einsum("ohw,chw->oc", gout, xs)
            gs = np.roll(gout, (di - 1, dj - 1), axis=(1, 2))
            gx += np.einsum("oc,ohw->chw", weights[:, :, di, dj], gs)
    gb = gout.sum(axis=(1, 2))
    return gx, gw, gb


def dart_throw(candidates, radius, h, w):
    """Grid dart throwing: greedily accept candidates at least radius apart.

    candidates: (N, 2) integer grid coordinates in the order to try them.
    Returns a boolean accept flag per candidate.
    """
    n = candidates.shape[0]
    accepted = np.zeros(n, dtype=bool)
    if n == 0:
        return accepted
    cell = max(radius / np.sqrt(2.0), 1e-9)
    gh = int(h / cell) + 1
    gw = int(w / cell) + 1
    grid = np.full((gh, gw), -1, dtype=np.int64)
    r2 = radius * radius
    reach = int(np.ceil(radius / cell))
    for k in range(n):
        ci, cj = candidates[k]
        gi = int(ci / cell)
        gj = int(cj / cell)
        ok = True
        for ni in range(max(gi - reach, 0), min(gi + reach + 1, gh)):
            for nj in range(max(gj - reach, 0), min(gj + reach + 1, gw)):
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
