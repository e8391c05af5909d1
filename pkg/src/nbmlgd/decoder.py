"""Reliability-based majority-logic decoders for non-binary LDPC codes.

One iteration engine serves five variants:

``ISRB``
    soft reliabilities, accumulated across iterations (optionally clipped).
``IHRB``
    hard-decision initialization, accumulated unit votes.
``EIHRB``
    soft-scaled initialization, unit votes and per-edge decisions that drop
    a check's own vote from what is sent back to it.
``IISRB``
    soft reliabilities recomputed every iteration from the channel values and
    the current extrinsic votes only.
``IEIHRB``
    EIHRB initialization with the same non-accumulating update.

Any variant can add the re-selection step, which detects period-1/period-2
points of the hard-decision trajectory and moves the least confident symbol
next to an unsatisfied check to its runner-up value.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import metrics
from .code import ParityCheckMatrix, _row_xor
from .field import GF2m

VARIANTS = ("ISRB", "IHRB", "EIHRB", "IISRB", "IEIHRB")
ACCUMULATING = ("ISRB", "IHRB", "EIHRB")
TIE_BREAKS = ("lowest",)

_NEG = np.iinfo(np.int64).min // 4
_POS = np.iinfo(np.int64).max // 4


def default_params(variant: str, gamma: int) -> dict:
    """Tuning values used when a parameter is left as ``None``.

    Values depend on the column weight: heavier columns get a larger channel
    weight for IISRB and the fine-grained IEIHRB setting.
    """
    if gamma >= 16:
        xi1, ie = 7, dict(c1=1, c2=63, c3=12, zeta=16)
    elif gamma >= 6:
        xi1, ie = 5, dict(c1=11, c2=63, c3=2, zeta=32)
    else:
        xi1, ie = 4, dict(c1=10, c2=63, c3=2, zeta=32)
    p = dict(lam=16, lam_h=max(1, gamma // 2), xi1=xi1, xi2=1, c1=4, c2=15, c3=ie["c3"], zeta=32)
    if variant == "IEIHRB":
        p.update(ie)
    return p


# --------------------------------------------------------------------------
# building blocks

def sign_matrix(field: GF2m) -> np.ndarray:
    """``(q, r)`` matrix of ``1 - 2 a_{l,t}``."""
    return 1 - 2 * field.bits(field.elements)


def channel_reliability(q, field: GF2m) -> np.ndarray:
    """Integer correlation of quantized bits with every candidate symbol.

    ``q`` has shape ``(N, r)``; the result ``(N, 2^r)`` holds
    ``sum_t (1 - 2 a_{l,t}) q_{j,t}``.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 2 or q.shape[1] != field.r:
        raise ValueError(f"quantized frame must have shape (N, {field.r}), got {q.shape}")
    return q @ sign_matrix(field).T


def clip(R, eta: int) -> np.ndarray:
    """Saturation control on reliability rows (last axis).

    Entries more than ``2*eta`` below the row maximum become ``-eta``; the
    rest are shifted so the maximum lands exactly on ``eta``.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    R = np.asarray(R, dtype=np.int64)
    Rmax = R.max(axis=-1, keepdims=True)
    return np.where(R < Rmax - 2 * eta, -eta, R - Rmax + eta)


def extrinsic_sigma(H: ParityCheckMatrix, s, z, i: int, j: int) -> int:
    """Symbol value check ``i`` votes for at position ``j``, computed from the
    syndrome as ``h_ij^-1 s_i + z_j``."""
    e = H.edge_index(i, j)
    gf = H.field
    return int(gf.add(gf.mul(int(H.edge_inv[e]), int(s[i])), int(z[j])))


def extrinsic_weights(H: ParityCheckMatrix, symbol_max) -> np.ndarray:
    """Per-edge weight: the minimum of ``symbol_max`` over the other symbols
    of the check. Edges of a single-entry check get weight 0."""
    m = np.asarray(symbol_max, dtype=np.int64)
    rw = H.row_weights
    width = int(rw.max(initial=0))
    if width == 0:
        return np.zeros(0, dtype=np.int64)
    pos = np.arange(H.n_edges) - H.row_ptr[H.edge_row]
    vals = np.full((H.M, width), _POS, dtype=np.int64)
    vals[H.edge_row, pos] = m[H.edge_col]
    first = vals.argmin(axis=1)
    min1 = vals[np.arange(H.M), first]
    vals[np.arange(H.M), first] = _POS
    min2 = vals.min(axis=1)
    w = np.where(pos == first[H.edge_row], min2[H.edge_row], min1[H.edge_row])
    return np.where(w == _POS, 0, w)


def eihrb_init(phi, c1: int, c2: int) -> np.ndarray:
    """``max(floor(phi/c1) + c2 - max_l floor(phi/c1), 0)`` row-wise."""
    f = np.floor_divide(phi, c1)
    return np.maximum(f + c2 - f.max(axis=1, keepdims=True), 0)


def edge_takes_runner_up(sigma, z_new, r_max, r_second):
    """Per-edge rule for EIHRB: send the runner-up symbol back to check ``i``
    when ``i`` voted for the winner and the winner leads by at most one vote,
    i.e. the win may be due to ``i``'s own vote."""
    return (sigma == z_new) & (r_max <= r_second + 1)


def _argmax_excluding(R, exclude):
    Rm = R.copy()
    Rm[np.arange(R.shape[0]), exclude] = _NEG
    return Rm.argmax(axis=1)


# --------------------------------------------------------------------------
# state and outcome

@dataclass
class ReliabilityState:
    R: np.ndarray
    phi_chan: np.ndarray
    phi_ext: np.ndarray
    z: np.ndarray
    s: np.ndarray | None = None
    psi: np.ndarray | None = None
    z_raw: np.ndarray | None = None
    z_prev1: np.ndarray | None = None
    z_prev2: np.ndarray | None = None
    z_tilde: np.ndarray | None = None
    z_edge: np.ndarray | None = None
    chan_argmax: np.ndarray | None = None
    k: int = 0
    reselections: list = dc_field(default_factory=list)


@dataclass
class DecodeOutcome:
    success: bool
    iterations: int
    z: np.ndarray
    failure_class: str | None = None
    distance_class: str = metrics.NA
    trace: list | None = None
    reselections: int = 0

    @property
    def status(self) -> str:
        return "success" if self.success else "failure"

    @property
    def codeword(self) -> np.ndarray | None:
        return self.z if self.success else None


# --------------------------------------------------------------------------
# estimator

class MajorityLogicDecoder(BaseEstimator):
    """Iterative majority-logic decoder over GF(2^r).

    Parameters
    ----------
    variant : {"ISRB", "IHRB", "EIHRB", "IISRB", "IEIHRB"}
    reselection : bool
        Enable the periodic-point re-selection step.
    max_iter : int
        Iteration cap.
    lam, lam_h, xi1, xi2, c1, c2, c3, zeta : int or None
        Tuning parameters; ``None`` picks :func:`default_params` for the
        column weight of the fitted matrix. Parameters that a variant does
        not use are only checked for sign.
    eta : int or None
        Clipping cap for the accumulating variants; ``None`` disables it.
    theta : int
        Distance threshold separating small- from large-distance periodic
        points in failure reports.
    tie_break : {"lowest"}
        Ties in ``argmax_l R[j, l]`` go to the smallest field element.

    Call :meth:`fit` with the parity-check matrix, then :meth:`decode` for
    a single frame or :meth:`predict` for a batch of quantized frames.
    """

    def __init__(self, variant="IISRB", reselection=False, max_iter=50, lam=None, lam_h=None,
                 xi1=None, xi2=None, c1=None, c2=None, c3=None, zeta=None, eta=None, theta=8,
                 tie_break="lowest"):
        self.variant = variant
        self.reselection = reselection
        self.max_iter = max_iter
        self.lam = lam
        self.lam_h = lam_h
        self.xi1 = xi1
        self.xi2 = xi2
        self.c1 = c1
        self.c2 = c2
        self.c3 = c3
        self.zeta = zeta
        self.eta = eta
        self.theta = theta
        self.tie_break = tie_break

    @property
    def name(self) -> str:
        return ("RS-" if self.reselection else "") + str(self.variant).upper()

    # ---------------------------------------------------------------- fit
    def fit(self, H: ParityCheckMatrix, y=None):
        if not isinstance(H, ParityCheckMatrix):
            raise TypeError("fit expects a ParityCheckMatrix")
        variant = str(self.variant).upper()
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")
        gamma = int(H.col_weights.max(initial=1))
        params = default_params(variant, gamma)
        for key in params:
            v = getattr(self, key)
            if v is not None:
                if int(v) != v or v < 0:
                    raise ValueError(f"{key} must be a nonnegative integer, got {v!r}")
                params[key] = int(v)
        if params["xi2"] < 1:
            raise ValueError("xi2 must be >= 1")
        if variant in ("EIHRB", "IEIHRB") and params["c1"] < 1:
            raise ValueError("c1 must be >= 1")
        if self.eta is not None:
            if int(self.eta) != self.eta or self.eta <= 0:
                raise ValueError(f"eta must be a positive integer, got {self.eta!r}")
            params["eta"] = int(self.eta)
        else:
            params["eta"] = None
        if int(self.theta) < 0:
            raise ValueError("theta must be nonnegative")

        self.H_ = H
        self.field_ = H.field
        self.variant_ = variant
        self.params_ = params
        self.gamma_ = gamma
        self._mul = self._make_mul(H.field)
        self._sign = sign_matrix(H.field)
        return self

    @staticmethod
    def _make_mul(gf: GF2m):
        if gf.r <= 8:
            table = gf.mul_table
            return lambda a, b: table[a, b]
        return gf.mul

    # -------------------------------------------------------------- pieces
    def _syndrome(self, z):
        H = self.H_
        return _row_xor(H, self._mul(H.edge_val, z[H.edge_col]))

    def init_state(self, q=None, z=None, counter=None) -> ReliabilityState:
        """Initialization step of the configured variant."""
        check_is_fitted(self, "H_")
        H, gf, p, v = self.H_, self.field_, self.params_, self.variant_
        N, Q, E = H.N, gf.order, H.n_edges

        if q is not None:
            q = np.asarray(q, dtype=np.int64)
            if q.shape != (N, gf.r):
                raise ValueError(f"quantized frame must have shape ({N}, {gf.r}), got {q.shape}")
        elif v != "IHRB":
            raise ValueError(f"{v} needs the quantized soft values q")
        if z is None:
            if q is None:
                raise ValueError("IHRB needs either hard decisions z or quantized values q")
            z = gf.from_bits((q < 0).astype(np.int64))
        z = gf.validate(z).copy()
        if z.shape != (N,):
            raise ValueError(f"hard decisions must have length {N}, got shape {z.shape}")

        cnt = counter is not None
        if v != "IHRB":
            phi = q @ self._sign.T
            if cnt:
                counter.add(ia=N * gf.r * Q)
            sym_max = np.abs(q).sum(axis=1)
        ext_ic = int((H.row_weights * np.maximum(H.row_weights - 2, 0)).sum())

        z_edge = None
        if v == "ISRB":
            R = p["lam"] * phi
            phi_chan = R.copy()
            phi_ext = extrinsic_weights(H, sym_max)
            if cnt:
                counter.add(im=N * Q, ic=ext_ic)
        elif v == "IISRB":
            phi_chan = p["xi1"] * phi
            phi_ext = p["xi2"] * extrinsic_weights(H, sym_max)
            R = phi_chan.copy()
            if cnt:
                counter.add(im=N * Q + int(H.row_weights[H.edge_row].sum()), ic=ext_ic)
        elif v == "IHRB":
            R = np.zeros((N, Q), dtype=np.int64)
            R[np.arange(N), z] = p["lam_h"]
            phi_chan = R.copy()
            phi_ext = np.ones(E, dtype=np.int64)
        else:
            R = eihrb_init(phi, p["c1"], p["c2"])
            phi_chan = R.copy()
            if cnt:
                counter.add(ia=2 * N * Q, ic=N * Q, id=N * Q, floor=N * Q)
            if v == "EIHRB":
                phi_ext = np.ones(E, dtype=np.int64)
                z_edge = z[H.edge_col].copy()
            else:
                phi_ext = np.full(E, p["c3"], dtype=np.int64)
        if self.reselection and cnt:
            counter.add(ic=N * (gf.r - 1))

        return ReliabilityState(
            R=R, phi_chan=phi_chan, phi_ext=phi_ext, z=z, z_raw=z.copy(), z_edge=z_edge,
            chan_argmax=phi_chan.argmax(axis=1),
        )

    def _base(self, st: ReliabilityState) -> np.ndarray:
        # array holding the persistent reliabilities that re-selection biases
        return st.R if self.variant_ in ACCUMULATING else st.phi_chan

    def is_periodic(self, st: ReliabilityState) -> bool:
        return (st.z_prev1 is not None and np.array_equal(st.z, st.z_prev1)) or (
            st.z_prev2 is not None and np.array_equal(st.z, st.z_prev2)
        )

    def reselect(self, st: ReliabilityState, counter=None) -> int | None:
        """Re-selection step; requires ``st.s`` to be the syndrome of ``st.z``.

        Returns the re-selected position, or ``None`` when the current hard
        decision is not a period-1/period-2 point.
        """
        H, N = self.H_, self.H_.N
        cnt = counter is not None
        if cnt:
            counter.add(ic=2 * N)
        if not self.is_periodic(st):
            return None
        ar = np.arange(N)
        z = st.z
        tilde = _argmax_excluding(st.R, z)
        st.z_tilde = tilde
        dif = st.R[ar, z] - st.R[ar, tilde]
        unsat = st.s[H.edge_row] != 0
        usc = np.bincount(H.edge_col, weights=unsat, minlength=N)
        eligible = usc > 0
        if not eligible.any():
            return None
        rs = int(np.argmin(np.where(eligible, dif, _POS)))

        old, new = int(z[rs]), int(tilde[rs])
        base = self._base(st)
        base[rs, old] -= self.params_["zeta"]
        base[rs, new] += self.params_["zeta"]
        z[rs] = new
        edges = H.col_edges[H.col_ptr[rs]:H.col_ptr[rs + 1]]
        if st.z_edge is not None:
            st.z_edge[edges] = new
        rows = H.edge_row[edges]
        st.s[rows] ^= self._mul(H.edge_val[edges], np.full(edges.size, old ^ new))
        if self.variant_ != "ISRB":
            st.chan_argmax[rs] = int(st.phi_chan[rs].argmax())
        if cnt:
            g = edges.size
            counter.add(ia=H.n_edges + N + 2, ic=H.n_edges + 2 * N, fa=2 * g, fm=g)
        st.reselections.append(rs)
        return rs

    def update(self, st: ReliabilityState, counter=None) -> None:
        """Extrinsic votes and reliability/hard-decision update for one
        iteration; ``st.s`` must be the syndrome of ``st.z``."""
        H, gf, v, p = self.H_, self.field_, self.variant_, self.params_
        N, Q, E = H.N, gf.order, H.n_edges
        cnt = counter is not None
        mul = self._mul

        if v == "EIHRB":
            s_edge = _row_xor(H, mul(H.edge_val, st.z_edge))
            sigma = mul(H.edge_inv, s_edge[H.edge_row]) ^ st.z_edge
            if cnt:
                counter.add(fm=2 * E, fa=2 * E - int(np.count_nonzero(H.row_weights)))
        else:
            sigma = mul(H.edge_inv, st.s[H.edge_row]) ^ st.z[H.edge_col]
            if cnt:
                counter.add(fm=E, fa=E)
        idx = H.edge_col * Q + sigma
        psi = np.bincount(idx, weights=st.phi_ext, minlength=N * Q).astype(np.int64).reshape(N, Q)
        st.psi = psi
        if cnt:
            hit = np.bincount(idx, minlength=N * Q).reshape(N, Q) > 0
            u = hit.sum(axis=1)

        if v in ("IISRB", "IEIHRB"):
            st.R = st.phi_chan + psi
            if cnt:
                z0_hit = hit[np.arange(N), st.chan_argmax]
                counter.add(ia=E, ic=int((u - z0_hit).sum()))
        else:
            st.R += psi
            if cnt:
                if v == "EIHRB":
                    counter.add(ia=E)
                else:
                    counter.add(ia=E - int(u.sum()) + N * Q)
            if p["eta"] is not None:
                st.R = clip(st.R, p["eta"])
                if cnt:
                    counter.add(ia=N * Q, ic=N * Q)

        z_new = st.R.argmax(axis=1)
        if cnt and v in ACCUMULATING:
            counter.add(ic=N * (Q - 1))
        if cnt and self.reselection:
            counter.add(ic=int(np.minimum(u + 1, self.gamma_ + 1).sum()))

        if v == "EIHRB":
            ar = np.arange(N)
            second = _argmax_excluding(st.R, z_new)
            r_max, r_second = st.R[ar, z_new], st.R[ar, second]
            take = edge_takes_runner_up(sigma, z_new[H.edge_col], r_max[H.edge_col], r_second[H.edge_col])
            st.z_edge = np.where(take, second[H.edge_col], z_new[H.edge_col])
            if cnt:
                counter.add(ic=N * (Q - 2) + E, ia=E)

        st.z_prev2 = st.z_prev1
        st.z_prev1 = st.z_raw
        st.z = z_new
        st.z_raw = z_new.copy()
        st.k += 1

    def step(self, st: ReliabilityState, counter=None) -> bool:
        """One full iteration. Returns True, leaving the reliabilities alone,
        when the current hard decision already has a zero syndrome."""
        st.s = self._syndrome(st.z)
        if not st.s.any():
            return True
        if counter is not None:
            counter.begin_iteration()
            self._charge_syndrome(counter)
        if self.reselection and st.k >= 1:
            self.reselect(st, counter)
        self.update(st, counter)
        if counter is not None:
            counter.end_iteration()
        return False

    def _charge_syndrome(self, counter):
        H = self.H_
        counter.add(fm=H.n_edges, fa=H.n_edges - int(np.count_nonzero(H.row_weights)))

    # -------------------------------------------------------------- decode
    def decode(self, q=None, z=None, transmitted=None, counter=None, trace=False) -> DecodeOutcome:
        """Decode one frame.

        ``q`` is the ``(N, r)`` quantized frame; ``z`` the hard decisions
        (derived from the signs of ``q`` when omitted; IHRB needs only
        ``z``). ``transmitted`` enables the small/large distance class of
        failures. ``counter`` is an :class:`~nbmlgd.metrics.OpCounter` that
        receives the operation tallies.
        """
        check_is_fitted(self, "H_")
        if transmitted is not None:
            transmitted = np.asarray(transmitted)
            if transmitted.shape != (self.H_.N,):
                raise ValueError(f"transmitted word must have length {self.H_.N}")
        st = self.init_state(q, z, counter)
        snaps = [st.z.copy()] if trace else None
        max_iter = int(self.max_iter)
        for _ in range(max_iter):
            if self.step(st, counter):
                break
            if trace:
                snaps.append(st.z.copy())
        else:
            st.s = self._syndrome(st.z)
        if counter is not None:
            counter.begin_final_check()
            self._charge_syndrome(counter)

        if not st.s.any():
            return DecodeOutcome(True, st.k, st.z, trace=snaps, reselections=len(st.reselections))
        history = [h for h in (st.z_prev2, st.z_prev1) if h is not None] + [st.z]
        fclass, dclass = metrics.classify_failure(history, transmitted, int(self.theta))
        return DecodeOutcome(False, st.k, st.z, fclass, dclass, snaps, len(st.reselections))

    def predict(self, X):
        """Decode a batch.

        ``X`` has shape ``(n_frames, N, r)`` (quantized values), or
        ``(n_frames, N)`` hard decisions for IHRB. Returns the final hard
        decisions, shape ``(n_frames, N)``.
        """
        check_is_fitted(self, "H_")
        X = np.asarray(X)
        if X.dtype.kind not in "iu":
            raise TypeError("inputs must be integer arrays")
        if X.ndim == 3:
            return np.stack([self.decode(q=x).z for x in X]) if len(X) else np.zeros((0, self.H_.N), int)
        if X.ndim == 2 and self.variant_ == "IHRB":
            return np.stack([self.decode(z=x).z for x in X]) if len(X) else np.zeros((0, self.H_.N), int)
        raise ValueError(f"expected shape (n_frames, N, r), got {X.shape}")

    def score(self, X, Y):
        """Fraction of frames decoded exactly to ``Y`` (one minus BLER)."""
        Z = self.predict(X)
        return float(np.mean(np.all(Z == np.asarray(Y), axis=1)))
