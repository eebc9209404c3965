"""Numba-compiled local-moving sweep shared by all null models.

The sweep operates on the generalized gain form documented in
:mod:`commkit.modularity`; the caller supplies the coefficient vectors, a
combined in+out adjacency in CSR form, and the visit order.  Candidate
targets are the communities of a node's neighbors plus staying put; a move
is accepted only for a strictly positive gain, with exact-tie targets
resolved to the lowest community id.  Isolated nodes never move.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def sweep_once(
    indptr,
    nbr,
    nbr_w,
    pin,
    pout,
    nin,
    nout,
    alpha_p,
    alpha_m,
    inv_norm,
    comm,
    pin_c,
    pout_c,
    nin_c,
    nout_c,
    order,
    wlink,
    intouch,
    touched,
):
    """One pass over `order`; mutates comm and community totals in place.

    Returns (total_gain, moves).
    """
    total_gain = 0.0
    moves = 0
    for oi in range(order.shape[0]):
        v = order[oi]
        c = comm[v]
        nt = 0
        for idx in range(indptr[v], indptr[v + 1]):
            d = comm[nbr[idx]]
            if not intouch[d]:
                intouch[d] = True
                touched[nt] = d
                nt += 1
                wlink[d] = 0.0
            wlink[d] += nbr_w[idx]
        if nt == 0:
            continue
        pv_in = pin[v]
        pv_out = pout[v]
        nv_in = nin[v]
        nv_out = nout[v]
        # totals of v's community with v itself removed
        pf_in = pin_c[c] - pv_in
        pf_out = pout_c[c] - pv_out
        nf_in = nin_c[c] - nv_in
        nf_out = nout_c[c] - nv_out
        w_stay = wlink[c] if intouch[c] else 0.0
        base = (
            w_stay * inv_norm
            - alpha_p * (pv_in * pf_out + pv_out * pf_in)
            + alpha_m * (nv_in * nf_out + nv_out * nf_in)
        )
        best_val = base
        best_c = c
        for t in range(nt):
            d = touched[t]
            if d == c:
                continue
            val = (
                wlink[d] * inv_norm
                - alpha_p * (pv_in * pout_c[d] + pv_out * pin_c[d])
                + alpha_m * (nv_in * nout_c[d] + nv_out * nin_c[d])
            )
            if val > best_val or (val == best_val and best_c != c and d < best_c):
                best_val = val
                best_c = d
        for t in range(nt):
            intouch[touched[t]] = False
        if best_c != c and best_val > base:
            pin_c[c] = pf_in
            pout_c[c] = pf_out
            nin_c[c] = nf_in
            nout_c[c] = nf_out
            pin_c[best_c] += pv_in
            pout_c[best_c] += pv_out
            nin_c[best_c] += nv_in
            nout_c[best_c] += nv_out
            comm[v] = best_c
            total_gain += best_val - base
            moves += 1
    return total_gain, moves


def build_csr(n, src, dst, weight):
    """Combined (w_ij + w_ji) neighbor CSR without self-loops."""
    off = src != dst
    cs = np.concatenate((src[off], dst[off]))
    cd = np.concatenate((dst[off], src[off]))
    cw = np.concatenate((weight[off], weight[off]))
    keys = cs * np.int64(n) + cd
    uniq, inverse = np.unique(keys, return_inverse=True)
    summed = np.zeros(uniq.size)
    np.add.at(summed, inverse, cw)
    us = (uniq // n).astype(np.int64)
    ud = (uniq % n).astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, us + 1, 1)
    return np.cumsum(indptr), ud, summed
