"""Compiled inner loops over bit-packed GF(2) rows.

Rows are ``uint64`` word arrays; bit ``j`` of a row lives in word ``j >> 6`` at
position ``j & 63``.  Every chain kernel consumes a fixed number of uniforms per
step so that batched runs reproduce repeated single steps exactly.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_ONE = np.uint64(1)


@njit(cache=True, inline="always")
def parity64(v):
    v ^= v >> np.uint64(32)
    v ^= v >> np.uint64(16)
    v ^= v >> np.uint64(8)
    v ^= v >> np.uint64(4)
    v ^= v >> np.uint64(2)
    v ^= v >> np.uint64(1)
    return np.int64(v & np.uint64(1))


@njit(cache=True, inline="always")
def row_dot(a, b):
    acc = np.uint64(0)
    for k in range(a.shape[0]):
        acc ^= a[k] & b[k]
    return parity64(acc)


@njit(cache=True, inline="always")
def get_bit(row, j):
    return np.int64((row[j >> 6] >> np.uint64(j & 63)) & np.uint64(1))


@njit(cache=True)
def rref(W, ncols, reverse):
    """Reduce ``W`` in place; return pivot columns (row ``r`` pivots at ``piv[r]``).

    ``reverse`` scans columns from the highest index down.
    """
    rows = W.shape[0]
    nw = W.shape[1]
    piv = np.empty(min(rows, ncols), np.int64)
    r = 0
    for t in range(ncols):
        if r == rows:
            break
        j = ncols - 1 - t if reverse else t
        w = j >> 6
        m = _ONE << np.uint64(j & 63)
        p = -1
        for i in range(r, rows):
            if W[i, w] & m:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(nw):
                tmp = W[r, k]
                W[r, k] = W[p, k]
                W[p, k] = tmp
        for i in range(rows):
            if i != r and (W[i, w] & m):
                for k in range(nw):
                    W[i, k] ^= W[r, k]
        piv[r] = j
        r += 1
    return piv[:r]


@njit(cache=True)
def rref_augmented(W, b, ncols, reverse):
    """Like :func:`rref` but carries a right-hand-side bit per row in ``b``."""
    rows = W.shape[0]
    nw = W.shape[1]
    piv = np.empty(min(rows, ncols), np.int64)
    r = 0
    for t in range(ncols):
        if r == rows:
            break
        j = ncols - 1 - t if reverse else t
        w = j >> 6
        m = _ONE << np.uint64(j & 63)
        p = -1
        for i in range(r, rows):
            if W[i, w] & m:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(nw):
                tmp = W[r, k]
                W[r, k] = W[p, k]
                W[p, k] = tmp
            tb = b[r]
            b[r] = b[p]
            b[p] = tb
        for i in range(rows):
            if i != r and (W[i, w] & m):
                for k in range(nw):
                    W[i, k] ^= W[r, k]
                b[i] ^= b[r]
        piv[r] = j
        r += 1
    return piv[:r]


@njit(cache=True)
def rank_of(W, ncols):
    work = W.copy()
    return rref(work, ncols, False).shape[0]


@njit(cache=True)
def reduce_against(W, piv, v):
    """Reduce ``v`` in place by the fully reduced rows ``W``; True if it vanishes."""
    nw = v.shape[0]
    for r in range(piv.shape[0]):
        j = piv[r]
        if (v[j >> 6] >> np.uint64(j & 63)) & _ONE:
            for k in range(nw):
                v[k] ^= W[r, k]
    for k in range(nw):
        if v[k] != 0:
            return False
    return True


@njit(cache=True)
def kernel_sample_reduced(W, piv, ncols, u):
    """Kernel element of already-reduced ``W``: free column ``f`` is set iff ``u[f] < 1/2``."""
    nw = W.shape[1]
    x = np.zeros(nw, np.uint64)
    is_piv = np.zeros(ncols, np.bool_)
    for r in range(piv.shape[0]):
        is_piv[piv[r]] = True
    for f in range(ncols):
        if not is_piv[f] and u[f] < 0.5:
            x[f >> 6] |= _ONE << np.uint64(f & 63)
    for r in range(piv.shape[0]):
        if row_dot(W[r], x):
            j = piv[r]
            x[j >> 6] |= _ONE << np.uint64(j & 63)
    return x


@njit(cache=True)
def kernel_sample(W, ncols, u):
    work = W.copy()
    piv = rref(work, ncols, False)
    return kernel_sample_reduced(work, piv, ncols, u)


@njit(cache=True)
def syndrome_bits(H, x):
    c = H.shape[0]
    s = np.zeros(c, np.uint8)
    for i in range(c):
        s[i] = row_dot(H[i], x)
    return s


@njit(cache=True)
def gather_rows(H, mask):
    c = H.shape[0]
    k = 0
    for i in range(c):
        if mask[i]:
            k += 1
    W = np.empty((k, H.shape[1]), np.uint64)
    k = 0
    for i in range(c):
        if mask[i]:
            W[k, :] = H[i, :]
            k += 1
    return W


# -- code Swendsen-Wang ------------------------------------------------------


@njit(cache=True)
def sw_step(H, n, x, p, u):
    """One x -> A -> x' step; ``u`` holds c + n uniforms."""
    c = H.shape[0]
    keep = np.zeros(c, np.bool_)
    for i in range(c):
        if row_dot(H[i], x) == 0 and u[i] < p:
            keep[i] = True
    return kernel_sample(gather_rows(H, keep), n, u[c:])


@njit(cache=True)
def sw_rc_step(H, n, A, p, u):
    """One A -> x -> A' step; ``u`` holds n + c uniforms."""
    c = H.shape[0]
    x = kernel_sample(gather_rows(H, A), n, u[:n])
    out = np.zeros(c, np.bool_)
    for i in range(c):
        if row_dot(H[i], x) == 0 and u[n + i] < p:
            out[i] = True
    return out


@njit(cache=True)
def run_sw(H, n, x, p, U, energies, states):
    """Run ``U.shape[0]`` steps in place on ``x``; record energy and optionally states."""
    c = H.shape[0]
    record = states.shape[0] > 0
    for t in range(U.shape[0]):
        x = sw_step(H, n, x, p, U[t])
        e = 0
        for i in range(c):
            e += row_dot(H[i], x)
        energies[t] = 2 * e
        if record:
            states[t, :] = x
    return x


@njit(cache=True)
def rank_gap(H, A, e, ncols):
    """1 if row ``e`` is independent of the rows in ``A`` other than ``e``, else 0."""
    A_minus = A.copy()
    A_minus[e] = False
    W = gather_rows(H, A_minus)
    piv = rref(W, ncols, False)
    v = H[e].copy()
    if reduce_against(W, piv, v):
        return 0
    return 1


@njit(cache=True)
def metropolis_rc_step(H, n, A, log_r, u):
    """Lazy Metropolis single-check flip for the RC model; ``u`` holds 3 uniforms."""
    out = A.copy()
    if u[0] < 0.5:
        return out
    c = H.shape[0]
    e = min(int(u[1] * c), c - 1)
    d = rank_gap(H, A, e, n)
    if A[e]:
        log_ratio = -log_r + d * np.log(2.0)
    else:
        log_ratio = log_r - d * np.log(2.0)
    if log_ratio >= 0.0 or u[2] < np.exp(log_ratio):
        out[e] = not A[e]
    return out


@njit(cache=True)
def single_check_step(H, n, A, p, u):
    """Lazy heat-bath single-check (SC) update; ``u`` holds 3 uniforms."""
    out = A.copy()
    if u[0] < 0.5:
        return out
    c = H.shape[0]
    e = min(int(u[1] * c), c - 1)
    same = A[e] or rank_gap(H, A, e, n) == 0
    if same:
        out[e] = u[2] < p
    elif u[2] < 0.5 * p:
        out[e] = True
    return out


@njit(cache=True)
def run_rc(kind, H, n, A, p, log_r, U, sizes, states):
    """Batched RC chain: kind 0 = SW on RC, 1 = Metropolis, 2 = single-check."""
    record = states.shape[0] > 0
    for t in range(U.shape[0]):
        if kind == 0:
            A = sw_rc_step(H, n, A, p, U[t])
        elif kind == 1:
            A = metropolis_rc_step(H, n, A, log_r, U[t])
        else:
            A = single_check_step(H, n, A, p, U[t])
        s = 0
        for i in range(A.shape[0]):
            if A[i]:
                s += 1
        sizes[t] = s
        if record:
            states[t, :] = A
    return A


# -- single-variable Metropolis (Glauber) ------------------------------------


@njit(cache=True)
def glauber_run(col_ptr, col_rows, n, x_bits, synd, beta, U, energies, states):
    """Single-flip Metropolis with an incrementally maintained syndrome.

    ``U`` rows hold 2 uniforms: variable choice, acceptance.
    """
    record = states.shape[0] > 0
    e = 0
    for i in range(synd.shape[0]):
        e += synd[i]
    for t in range(U.shape[0]):
        v = min(int(U[t, 0] * n), n - 1)
        delta = 0
        for q in range(col_ptr[v], col_ptr[v + 1]):
            delta += 1 if synd[col_rows[q]] == 0 else -1
        accept = delta <= 0
        if not accept:
            accept = U[t, 1] < np.exp(-2.0 * beta * delta)
        if accept:
            x_bits[v] ^= 1
            for q in range(col_ptr[v], col_ptr[v + 1]):
                synd[col_rows[q]] ^= 1
            e += delta
        energies[t] = 2 * e
        if record:
            states[t, :] = x_bits
    return e


# -- worm chain --------------------------------------------------------------


@njit(cache=True)
def worm_run(eu, ev, S, parity, log_r, log_pair, U, sizes, ndefects, states):
    """Lazy Metropolis edge flips restricted to at most two odd vertices.

    ``log_pair`` is log(1 / C(m, 2)) (``-inf`` when no vertex pair exists).
    """
    c = eu.shape[0]
    record = states.shape[0] > 0
    d = 0
    for i in range(parity.shape[0]):
        d += parity[i]
    for t in range(U.shape[0]):
        if U[t, 0] >= 0.5:
            e = min(int(U[t, 1] * c), c - 1)
            a = eu[e]
            b = ev[e]
            nd = d + (1 - 2 * parity[a]) + (1 - 2 * parity[b])
            if nd == 0 or nd == 2:
                lr = -log_r if S[e] else log_r
                if d == 0 and nd == 2:
                    lr += log_pair
                elif d == 2 and nd == 0:
                    lr -= log_pair
                if lr >= 0.0 or U[t, 2] < np.exp(lr):
                    S[e] ^= 1
                    parity[a] ^= 1
                    parity[b] ^= 1
                    d = nd
        s = 0
        for i in range(c):
            s += S[i]
        sizes[t] = s
        ndefects[t] = d
        if record:
            states[t, :] = S
    return d
