"""Hot inner loops, each in a numba variant and a vectorized numpy variant.

The module-level names (``coin_step``, ``szegedy_step``, ``tridiagonalize``,
``ql_implicit``, ``mc_advance``) are bound to the backend picked in
:mod:`lackawalk._backend`.  Both variants stay importable through
:data:`KERNELS` so tests and the benchmark can compare them directly.
"""

from types import SimpleNamespace

import numpy as np

from ._backend import BACKEND, HAS_NUMBA, njit

ORACLE_NONE = 0
ORACLE_G = 1
ORACLE_GHAT = 2

_EPS = 2.0**-52


# ---------------------------------------------------------------------------
# coined walk: oracle -> coin reflection -> flip-flop shift


def _coin_step_numpy(psi, neighbors, reverse, weights, mark, oracle):
    # weights = (a, b, e): the coin projector has a = c_i c_j on arc pairs,
    # b = c_i c_loop and e = c_loop^2, each rounded once
    d = neighbors.shape[1]
    a, b, e = weights[0], weights[1], weights[2]
    blk = psi.copy()
    if oracle == ORACLE_G:
        blk[mark] *= -1.0
    elif oracle == ORACLE_GHAT:
        arcs = blk[mark, :d]
        blk[mark, :d] = arcs - 2.0 * arcs.mean()
        blk[mark, d] = -blk[mark, d]
    arc_sum = blk[:, :d].sum(axis=1)
    loop = blk[:, d].copy()
    blk[:, :d] = (2.0 * (a * arc_sum + b * loop))[:, None] - blk[:, :d]
    blk[:, d] = 2.0 * (b * arc_sum + e * loop) - loop
    out = np.empty_like(blk)
    out[:, :d] = blk[neighbors, reverse]
    out[:, d] = blk[:, d]
    return out


def _coin_step_loops(psi, neighbors, reverse, weights, mark, oracle):
    n, d = neighbors.shape
    k = d + 1
    a, b, e = weights[0], weights[1], weights[2]
    blk = np.empty_like(psi)
    for x in range(n):
        for i in range(k):
            blk[x, i] = psi[x, i]
    if oracle == 1:
        for i in range(k):
            blk[mark, i] = -blk[mark, i]
    elif oracle == 2:
        mean = 0.0j
        for i in range(d):
            mean += blk[mark, i]
        mean /= d
        for i in range(d):
            blk[mark, i] = blk[mark, i] - 2.0 * mean
        blk[mark, d] = -blk[mark, d]
    for x in range(n):
        arc_sum = 0.0j
        for i in range(d):
            arc_sum += blk[x, i]
        loop = blk[x, d]
        arc_val = 2.0 * (a * arc_sum + b * loop)
        for i in range(d):
            blk[x, i] = arc_val - blk[x, i]
        blk[x, d] = 2.0 * (b * arc_sum + e * loop) - loop
    out = np.empty_like(psi)
    for x in range(n):
        for i in range(d):
            out[x, i] = blk[neighbors[x, i], reverse[x, i]]
        out[x, d] = blk[x, d]
    return out


# ---------------------------------------------------------------------------
# Szegedy walk on a CSR edge support: per-vertex Ref(A) blocks, then SWAP


def _szegedy_step_numpy(psi, slots, blocks, swap):
    size = psi.shape[0]
    ext = np.zeros(size + 1, dtype=psi.dtype)
    ext[:size] = psi
    local = np.einsum("xij,xj->xi", blocks, ext[slots])
    ext[slots] = local  # padding lands in the spare last entry
    return ext[:size][swap]


def _szegedy_step_loops(psi, slots, blocks, swap):
    size = psi.shape[0]
    n, kmax = slots.shape
    ref = np.empty_like(psi)
    for x in range(n):
        for i in range(kmax):
            si = slots[x, i]
            if si >= size:
                break
            acc = 0.0j
            for j in range(kmax):
                sj = slots[x, j]
                if sj >= size:
                    break
                acc += blocks[x, i, j] * psi[sj]
            ref[si] = acc
    out = np.empty_like(psi)
    for j in range(size):
        out[j] = ref[swap[j]]
    return out


# ---------------------------------------------------------------------------
# Householder tridiagonalization, returns (diag, subdiag, Q) with A = Q T Q^T


def _tridiagonalize_numpy(a):
    n = a.shape[0]
    A = np.array(a, dtype=np.float64, copy=True)
    Q = np.eye(n)
    for k in range(n - 2):
        x = A[k + 1 :, k]
        norm = np.sqrt(x @ x)
        if norm == 0.0:
            continue
        alpha = -norm if x[0] >= 0.0 else norm
        v = x.copy()
        v[0] -= alpha
        vv = v @ v
        if vv == 0.0:
            continue
        scale = 2.0 / vv
        A[k + 1 :, k:] -= scale * np.outer(v, v @ A[k + 1 :, k:])
        A[k:, k + 1 :] -= scale * np.outer(A[k:, k + 1 :] @ v, v)
        Q[:, k + 1 :] -= scale * np.outer(Q[:, k + 1 :] @ v, v)
    diag = np.diag(A).copy()
    sub = np.zeros(n)
    if n > 1:
        sub[: n - 1] = np.diag(A, -1)
    return diag, sub, Q


def _tridiagonalize_loops(a):
    n = a.shape[0]
    A = a.astype(np.float64).copy()
    Q = np.eye(n)
    v = np.zeros(n)
    for k in range(n - 2):
        norm = 0.0
        for i in range(k + 1, n):
            norm += A[i, k] * A[i, k]
        norm = np.sqrt(norm)
        if norm == 0.0:
            continue
        alpha = -norm if A[k + 1, k] >= 0.0 else norm
        vv = 0.0
        for i in range(k + 1, n):
            v[i] = A[i, k]
        v[k + 1] -= alpha
        for i in range(k + 1, n):
            vv += v[i] * v[i]
        if vv == 0.0:
            continue
        scale = 2.0 / vv
        for j in range(k, n):
            t = 0.0
            for i in range(k + 1, n):
                t += v[i] * A[i, j]
            t *= scale
            for i in range(k + 1, n):
                A[i, j] -= t * v[i]
        for i in range(k, n):
            t = 0.0
            for j in range(k + 1, n):
                t += A[i, j] * v[j]
            t *= scale
            for j in range(k + 1, n):
                A[i, j] -= t * v[j]
        for i in range(n):
            t = 0.0
            for j in range(k + 1, n):
                t += Q[i, j] * v[j]
            t *= scale
            for j in range(k + 1, n):
                Q[i, j] -= t * v[j]
    diag = np.empty(n)
    sub = np.zeros(n)
    for i in range(n):
        diag[i] = A[i, i]
    for i in range(n - 1):
        sub[i] = A[i + 1, i]
    return diag, sub, Q


# ---------------------------------------------------------------------------
# implicit-shift QL on a symmetric tridiagonal matrix, accumulating into V.
# ``sub[i]`` couples rows i and i+1; ``sub[n-1]`` must be 0.
# Returns (eigenvalues ascending, eigenvectors as columns, converged flag).


def _ql_implicit_numpy(diag, sub, V, max_iter):
    n = diag.shape[0]
    d = diag.astype(np.float64).copy()
    e = sub.astype(np.float64).copy()
    V = V.astype(np.float64).copy()
    f = 0.0
    tst1 = 0.0
    total = 0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1 and abs(e[m]) > _EPS * tst1:
            m += 1
        if m > l:
            while True:
                total += 1
                if total > max_iter:
                    return d, V, False
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = np.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2 :] -= h
                f += h
                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = np.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    col = V[:, i + 1].copy()
                    V[:, i + 1] = s * V[:, i] + c * col
                    V[:, i] = c * V[:, i] - s * col
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= _EPS * tst1:
                    break
        d[l] += f
        e[l] = 0.0
    order = np.argsort(d, kind="stable")
    return d[order], V[:, order], True


def _ql_implicit_loops(diag, sub, V, max_iter):
    n = diag.shape[0]
    d = diag.astype(np.float64).copy()
    e = sub.astype(np.float64).copy()
    V = V.astype(np.float64).copy()
    f = 0.0
    tst1 = 0.0
    total = 0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1 and abs(e[m]) > _EPS * tst1:
            m += 1
        if m > l:
            while True:
                total += 1
                if total > max_iter:
                    return d, V, False
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = np.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = 1.0
                c3 = 1.0
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = np.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = V[k, i + 1]
                        V[k, i + 1] = s * V[k, i] + c * h
                        V[k, i] = c * V[k, i] - s * h
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if abs(e[l]) <= _EPS * tst1:
                    break
        d[l] += f
        e[l] = 0.0
    order = np.argsort(d, kind="mergesort")
    return d[order], V[:, order], True


# ---------------------------------------------------------------------------
# Monte Carlo: advance each walker one step given pre-drawn uniforms


def _mc_advance_numpy(pos, uniforms, cdf, last):
    # group walkers by vertex so each group is one searchsorted call
    order = np.argsort(pos, kind="stable")
    cuts = np.flatnonzero(np.diff(pos[order])) + 1
    out = np.empty_like(pos)
    for chunk in np.split(order, cuts):
        if chunk.size:
            v = pos[chunk[0]]
            out[chunk] = np.minimum(np.searchsorted(cdf[v], uniforms[chunk]), last[v])
    return out


def _mc_advance_loops(pos, uniforms, cdf, last):
    out = np.empty_like(pos)
    for i in range(pos.shape[0]):
        p = pos[i]
        j = np.searchsorted(cdf[p], uniforms[i])
        out[i] = min(j, last[p])
    return out


KERNELS = {
    "numpy": SimpleNamespace(
        coin_step=_coin_step_numpy,
        szegedy_step=_szegedy_step_numpy,
        tridiagonalize=_tridiagonalize_numpy,
        ql_implicit=_ql_implicit_numpy,
        mc_advance=_mc_advance_numpy,
    ),
}
if HAS_NUMBA:
    KERNELS["numba"] = SimpleNamespace(
        coin_step=njit(_coin_step_loops),
        szegedy_step=njit(_szegedy_step_loops),
        tridiagonalize=njit(_tridiagonalize_loops),
        ql_implicit=njit(_ql_implicit_loops),
        mc_advance=njit(_mc_advance_loops),
    )

_active = KERNELS[BACKEND]
coin_step = _active.coin_step
szegedy_step = _active.szegedy_step
tridiagonalize = _active.tridiagonalize
ql_implicit = _active.ql_implicit
mc_advance = _active.mc_advance
