"""JIT kernels applying spin-operator term lists to bit-indexed state vectors.

Basis convention (fixed package-wide): site k is bit k of the basis-state
integer, bit value 1 is spin up.  A product term c * S^{a1}_{s1} S^{a2}_{s2}...
maps |b> to |b ^ flipmask> where flipmask collects the x/y sites, with
amplitude

    c * 2^(-n_factors) * (-1)^(n_z) * (-i)^(n_y) * (-1)^popcount(b & signmask)

where signmask collects the z/y sites.  Purely diagonal terms (z factors
only) are folded into a single diagonal vector.

Two execution strategies:

* pair kernels: every off-diagonal flip group is a two-site group whose
  sign bits lie inside the flipped bits and whose four quadrant weights are
  real.  All stock Hamiltonians (Heisenberg bonds, Ising stars, spin
  glasses, Lieb-Mattis, staggered fields) satisfy this.  Amplitudes are
  processed as float64 views in contiguous runs of 2^r complex entries so
  the hot loop is a pure real fused-multiply-add, and for groups whose bits
  all sit above the run the weight is constant over the run.
* generic kernels: arbitrary flip/sign masks, scalar gather per element.
  Used for term lists the pair form cannot represent (single-site x/y
  terms, 3-site products, ...); these only occur on small test systems.

Both strategies write each output element from exactly one parallel
iteration, so results are bitwise deterministic for any thread count.
"""

import numpy as np
from numba import get_thread_id, get_num_threads, njit, prange

# ---------------------------------------------------------------------------
# diagonal fill


@njit(cache=True)
def fill_diagonal(diag, c0, signmask):
    """Accumulate all purely-diagonal terms into diag (length 2^n)."""
    dim = diag.shape[0]
    nt = c0.shape[0]
    for b in range(dim):
        acc = 0.0
        for t in range(nt):
            m = b & signmask[t]
            m ^= m >> 32
            m ^= m >> 16
            m ^= m >> 8
            m ^= m >> 4
            m ^= m >> 2
            m ^= m >> 1
            if m & 1:
                acc -= c0[t]
            else:
                acc += c0[t]
        diag[b] += acc


# ---------------------------------------------------------------------------
# pair kernels (fast path)
#
# Arguments shared by both pair kernels:
#   psi_f   float64 view (length 2*dim) of the input complex vector
#   diag2   diagonal duplicated per float slot (length 2*dim)
#   r       run exponent; runs hold 2^r complex amplitudes
#   lk, ll, lf, lw4   "low" pair groups: bit positions k < l < r, the
#                     in-run flip mask and the 4 quadrant weights
#   hk, hl, hw4       "high" pair groups: bit positions r <= k < l
# Quadrant index q = bit_k(source) | bit_l(source) << 1.


@njit(parallel=True, fastmath=True, cache=True)
def pair_matvec(psi_f, out_f, diag2, r, lk, ll, lf, lw4, hk, hl, hw4):
    R = 1 << r
    R2 = R << 1
    nhi = psi_f.shape[0] >> (r + 1)
    GL = lk.shape[0]
    GH = hk.shape[0]
    for hi in prange(nhi):
        fb = hi << (r + 1)
        for x in range(R2):
            out_f[fb + x] = diag2[fb + x] * psi_f[fb + x]
        for g in range(GL):
            k = lk[g]
            l = ll[g]
            f = lf[g]
            for xc in range(R):
                sx = xc ^ f
                q = ((sx >> k) & 1) | (((sx >> l) & 1) << 1)
                w = lw4[g, q]
                out_f[fb + 2 * xc] += w * psi_f[fb + 2 * sx]
                out_f[fb + 2 * xc + 1] += w * psi_f[fb + 2 * sx + 1]
        for g in range(GH):
            kk = hk[g] - r
            ll_ = hl[g] - r
            shi = hi ^ ((1 << kk) | (1 << ll_))
            q = ((shi >> kk) & 1) | (((shi >> ll_) & 1) << 1)
            w = hw4[g, q]
            sfb = shi << (r + 1)
            for x in range(R2):
                out_f[fb + x] += w * psi_f[sfb + x]


@njit(parallel=True, fastmath=True, cache=True)
def pair_cheb(psi_f, prev_f, acc_f, ws, diag2, r, lk, ll, lf, lw4,
              hk, hl, hw4, scale2, pm, cre, cim):
    """Fused Chebyshev step on float views.

    prev <- scale2 * (H psi) - pm * prev ;  acc += (cre + i cim) * prev_new

    ws is a (n_threads, 2^(r+1)) float64 workspace.
    """
    R = 1 << r
    R2 = R << 1
    nhi = psi_f.shape[0] >> (r + 1)
    GL = lk.shape[0]
    GH = hk.shape[0]
    for hi in prange(nhi):
        tmp = ws[get_thread_id()]
        fb = hi << (r + 1)
        for x in range(R2):
            tmp[x] = diag2[fb + x] * psi_f[fb + x]
        for g in range(GL):
            k = lk[g]
            l = ll[g]
            f = lf[g]
            for xc in range(R):
                sx = xc ^ f
                q = ((sx >> k) & 1) | (((sx >> l) & 1) << 1)
                w = lw4[g, q]
                tmp[2 * xc] += w * psi_f[fb + 2 * sx]
                tmp[2 * xc + 1] += w * psi_f[fb + 2 * sx + 1]
        for g in range(GH):
            kk = hk[g] - r
            ll_ = hl[g] - r
            shi = hi ^ ((1 << kk) | (1 << ll_))
            q = ((shi >> kk) & 1) | (((shi >> ll_) & 1) << 1)
            w = hw4[g, q]
            sfb = shi << (r + 1)
            for x in range(R2):
                tmp[x] += w * psi_f[sfb + x]
        for xc in range(R):
            i0 = fb + 2 * xc
            i1 = i0 + 1
            vre = scale2 * tmp[2 * xc] - pm * prev_f[i0]
            vim = scale2 * tmp[2 * xc + 1] - pm * prev_f[i1]
            prev_f[i0] = vre
            prev_f[i1] = vim
            acc_f[i0] += cre * vre - cim * vim
            acc_f[i1] += cre * vim + cim * vre


# ---------------------------------------------------------------------------
# generic kernels (arbitrary masks, complex weights)


@njit(parallel=True, fastmath=True, cache=True)
def generic_matvec(psi, out, diag, gflip, gstart, tc0, tsign):
    dim = psi.shape[0]
    G = gflip.shape[0]
    for b in prange(dim):
        acc = diag[b] * psi[b]
        for g in range(G):
            src = b ^ gflip[g]
            w = 0.0 + 0.0j
            for t in range(gstart[g], gstart[g + 1]):
                m = src & tsign[t]
                m ^= m >> 32
                m ^= m >> 16
                m ^= m >> 8
                m ^= m >> 4
                m ^= m >> 2
                m ^= m >> 1
                if m & 1:
                    w -= tc0[t]
                else:
                    w += tc0[t]
            acc += w * psi[src]
        out[b] = acc


@njit(parallel=True, fastmath=True, cache=True)
def generic_cheb(psi, prev, acc, diag, gflip, gstart, tc0, tsign,
                 scale, pm, coef):
    dim = psi.shape[0]
    G = gflip.shape[0]
    for b in prange(dim):
        h = diag[b] * psi[b]
        for g in range(G):
            src = b ^ gflip[g]
            w = 0.0 + 0.0j
            for t in range(gstart[g], gstart[g + 1]):
                m = src & tsign[t]
                m ^= m >> 32
                m ^= m >> 16
                m ^= m >> 8
                m ^= m >> 4
                m ^= m >> 2
                m ^= m >> 1
                if m & 1:
                    w -= tc0[t]
                else:
                    w += tc0[t]
            h += w * psi[src]
        v = scale * h - pm * prev[b]
        prev[b] = v
        acc[b] += coef * v


def make_workspace(r):
    """Per-thread run buffer for pair_cheb."""
    return np.empty((get_num_threads(), 2 << r), dtype=np.float64)
