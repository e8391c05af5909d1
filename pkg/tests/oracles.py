"""Slow, literal reference implementations used as test oracles.

Nothing here touches the table arithmetic or the vectorized decoder: field
products are carry-less multiply-and-reduce, inverses come from exhaustive
search, and the decoder steps are written out as nested loops over a dense
matrix.
"""

import numpy as np


class BruteField:
    def __init__(self, r, poly):
        self.r = r
        self.q = 1 << r
        self.poly = poly

    def mul(self, a, b):
        a, b = int(a), int(b)
        acc = 0
        for t in range(self.r):
            if b >> t & 1:
                acc ^= a << t
        for d in range(2 * self.r - 2, self.r - 1, -1):
            if acc >> d & 1:
                acc ^= self.poly << (d - self.r)
        return acc

    def inv(self, a):
        for b in range(1, self.q):
            if self.mul(a, b) == 1:
                return b
        raise ZeroDivisionError

    def bit(self, a, t):
        return (int(a) >> t) & 1


def dense_syndrome(bf, H, z):
    M, N = H.shape
    s = []
    for i in range(M):
        acc = 0
        for j in range(N):
            acc ^= bf.mul(H[i, j], z[j])
        s.append(acc)
    return np.array(s)


def sigma_direct(bf, H, z, i, j):
    """h_ij^-1 * sum_{t != j} h_it z_t, written out."""
    acc = 0
    for t in range(H.shape[1]):
        if t != j and H[i, t]:
            acc ^= bf.mul(H[i, t], z[t])
    return bf.mul(bf.inv(H[i, j]), acc)


def phi_direct(bf, q):
    N = q.shape[0]
    phi = np.zeros((N, bf.q), dtype=np.int64)
    for j in range(N):
        for l in range(bf.q):
            phi[j, l] = sum((1 - 2 * bf.bit(l, t)) * int(q[j, t]) for t in range(bf.r))
    return phi


def minmax_direct(H, phi):
    """phi_ext[i][j] = min over t in N(i)\\{j} of max_l phi[t, l]."""
    M, N = H.shape
    out = {}
    for i in range(M):
        for j in range(N):
            if H[i, j]:
                others = [max(phi[t]) for t in range(N) if t != j and H[i, t]]
                out[i, j] = min(others) if others else 0
    return out


def first_argmax(row):
    best = 0
    for l in range(1, len(row)):
        if row[l] > row[best]:
            best = l
    return best


def reference_iteration(bf, H, variant, q, z, R, params, z_edge=None):
    """One literal iteration (no re-selection) of ISRB/IHRB/IISRB/IEIHRB/EIHRB.

    ``R`` is the reliability matrix entering the iteration (for IISRB and
    IEIHRB it is ignored except through the channel term). Returns
    ``(R_next, z_next, z_edge_next)``.
    """
    M, N = H.shape
    Q = bf.q
    if variant in ("ISRB", "IISRB"):
        phi = phi_direct(bf, q)
        w = minmax_direct(H, phi)
    psi = np.zeros((N, Q), dtype=np.int64)
    sig = {}
    for j in range(N):
        for i in range(M):
            if not H[i, j]:
                continue
            if variant == "EIHRB":
                acc = 0
                for t in range(N):
                    if t != j and H[i, t]:
                        acc ^= bf.mul(H[i, t], z_edge[i, t])
                s_ij = bf.mul(bf.inv(H[i, j]), acc)
            else:
                s_ij = sigma_direct(bf, H, z, i, j)
            sig[i, j] = s_ij
            for l in range(Q):
                if s_ij == l:
                    if variant == "ISRB":
                        psi[j, l] += w[i, j]
                    elif variant == "IISRB":
                        psi[j, l] += params["xi2"] * w[i, j]
                    elif variant == "IEIHRB":
                        psi[j, l] += params["c3"]
                    else:
                        psi[j, l] += 1
    if variant in ("ISRB", "IHRB", "EIHRB"):
        R_next = R + psi
    elif variant == "IISRB":
        R_next = params["xi1"] * phi_direct(bf, q) + psi
    else:
        R_next = eihrb_init_direct(bf, q, params["c1"], params["c2"]) + psi
    z_next = np.array([first_argmax(R_next[j]) for j in range(N)])
    ze = None
    if variant == "EIHRB":
        ze = np.zeros_like(z_edge)
        for j in range(N):
            row = R_next[j]
            m = row[z_next[j]]
            rest = [row[l] if l != z_next[j] else None for l in range(Q)]
            second = max((l for l in range(Q) if l != z_next[j]), key=lambda l: (rest[l], -l))
            m2 = row[second]
            for i in range(M):
                if H[i, j]:
                    if sig[i, j] == z_next[j] and m <= m2 + 1:
                        ze[i, j] = second
                    else:
                        ze[i, j] = z_next[j]
    return R_next, z_next, ze


def eihrb_init_direct(bf, q, c1, c2):
    phi = phi_direct(bf, q)
    N = phi.shape[0]
    R = np.zeros_like(phi)
    for j in range(N):
        fl = [int(np.floor(phi[j, l] / c1)) for l in range(bf.q)]
        top = max(fl)
        for l in range(bf.q):
            R[j, l] = max(fl[l] + c2 - top, 0)
    return R
