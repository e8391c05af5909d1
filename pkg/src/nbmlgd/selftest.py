"""Fast invariant checks runnable from an installed package."""

from __future__ import annotations

import tempfile

import numpy as np

from .channel import ChannelConfig, modulate, transmit
from .code import SystematicEncoder, generate_regular, load_alist, save_alist, syndrome
from .decoder import VARIANTS, MajorityLogicDecoder, clip, extrinsic_sigma
from .field import GF2m
from .metrics import predict


def _field_axioms():
    for r in (2, 3, 4):
        gf = GF2m(r)
        T = gf.mul_table
        e = np.arange(gf.order)
        if not np.array_equal(T[T[:, :, None], e[None, None, :]], T[e[:, None, None], T[None, :, :]]):
            return False
        if not np.array_equal(T[e[:, None, None], e[None, :, None] ^ e[None, None, :]],
                              T[:, :, None] ^ T[:, None, :]):
            return False
        if not np.all(gf.mul(e[1:], gf.inv(e[1:])) == 1):
            return False
    return True


def _alist_round_trip():
    H = generate_regular(24, 3, 6, GF2m(3), seed=5)
    with tempfile.TemporaryDirectory() as d:
        p = f"{d}/h.alist"
        save_alist(H, p)
        return load_alist(p) == H


def _encoder_null_space():
    H = generate_regular(48, 3, 6, GF2m(3), seed=2)
    enc = SystematicEncoder(H)
    rng = np.random.default_rng(0)
    return all(not syndrome(H, enc.encode(rng.integers(0, 8, enc.k))).any() for _ in range(20))


def _sigma_identity():
    gf = GF2m(3)
    H = generate_regular(24, 3, 6, gf, seed=3)
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.integers(0, 8, H.N)
        s = syndrome(H, z)
        for i, j in zip(H.edge_row, H.edge_col):
            direct = 0
            for t in H.check_neighbors(int(i)):
                if t != j:
                    direct ^= gf.mul(int(H.to_dense()[i, t]), int(z[t]))
            if extrinsic_sigma(H, s, z, int(i), int(j)) != gf.mul(gf.inv(int(H.to_dense()[i, j])), direct):
                return False
    return True


def _clip_cap():
    rng = np.random.default_rng(2)
    R = rng.integers(-500, 500, (200, 16))
    out = clip(R, 7)
    return bool(np.all(out.max(axis=1) == 7) and np.all(out.argmax(axis=1) == R.argmax(axis=1)))


def _decoders_success_zero_syndrome():
    gf = GF2m(3)
    H = generate_regular(48, 3, 6, gf, seed=2)
    enc = SystematicEncoder(H)
    rng = np.random.default_rng(3)
    for variant in VARIANTS:
        for rs in (False, True):
            dec = MajorityLogicDecoder(variant, reselection=rs, max_iter=20).fit(H)
            for _ in range(10):
                x = enc.encode(rng.integers(0, 8, enc.k))
                fr = transmit(modulate(x, gf), ChannelConfig(ebn0_db=3.0, code_rate=enc.rate), gf, rng)
                out = dec.decode(q=fr.q, z=fr.z)
                if out.success and syndrome(H, out.z).any():
                    return False
                if out.iterations > 20:
                    return False
    return True


def _noiseless_zero_iterations():
    gf = GF2m(2)
    H = generate_regular(8, 2, 4, gf, seed=1)
    x = SystematicEncoder(H).encode(np.array([1, 2, 3, 0]))
    q = 31 * (1 - 2 * gf.bits(x))
    return all(MajorityLogicDecoder(v).fit(H).decode(q=q).iterations == 0 for v in VARIANTS)


def _complexity_tables():
    c = predict("IISRB", "iteration", 255, 255, 16, 16, 8, reselection=True)
    i = predict("ISRB", "init", 255, 255, 16, 16, 8)
    return (c.fa, c.fm, c.ia, c.ic) == (7937, 8176, 8417, 13515) and i.ic == 696417750


CHECKS = [
    ("field axioms GF(4), GF(8), GF(16)", _field_axioms),
    ("alist save/load round trip", _alist_round_trip),
    ("encoded words have zero syndrome", _encoder_null_space),
    ("syndrome form of check sums equals direct sum", _sigma_identity),
    ("clipping caps rows at eta and keeps argmax", _clip_cap),
    ("decoder success implies zero syndrome", _decoders_success_zero_syndrome),
    ("noiseless codeword decodes in zero iterations", _noiseless_zero_iterations),
    ("closed-form operation counts", _complexity_tables),
]


def run_selftest(out=print) -> bool:
    ok_all = True
    for name, fn in CHECKS:
        try:
            ok = bool(fn())
            detail = ""
        except Exception as e:  # a crash is a failed check, report and go on
            ok, detail = False, f" ({type(e).__name__}: {e})"
        ok_all &= ok
        out(f"{'PASS' if ok else 'FAIL'}  {name}{detail}")
    return ok_all
