"""Operation accounting for the majority-logic decoders.

Counts follow the usual complexity bookkeeping for these decoders rather
than machine instructions: a table-lookup field multiply is one FM, an argmax
over ``m`` candidates is ``m - 1`` ICs, and so on. ``predict`` evaluates the
closed-form worst-case counts for regular codes; ``OpCounter`` collects what
a decoder run actually performed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

OPS = ("fa", "fm", "ia", "ic", "im", "id", "floor")

PERIOD1 = "periodic_period1"
PERIOD2 = "periodic_period2"
OTHER = "other"
SMALL = "small"
LARGE = "large"
NA = "n/a"


@dataclass
class OpCounts:
    fa: int = 0
    fm: int = 0
    ia: int = 0
    ic: int = 0
    im: int = 0
    id: int = 0
    floor: int = 0

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(*(getattr(self, f) + getattr(other, f) for f in OPS))

    def __iadd__(self, other: "OpCounts") -> "OpCounts":
        for f in OPS:
            setattr(self, f, getattr(self, f) + getattr(other, f))
        return self

    def add(self, **counts) -> None:
        for k, v in counts.items():
            if k not in OPS:
                raise KeyError(f"unknown operation kind {k!r}")
            setattr(self, k, getattr(self, k) + int(v))

    def as_dict(self) -> dict:
        return asdict(self)


class OpCounter:
    """Sink that decoders report operations to.

    Operations before the first :meth:`begin_iteration` call belong to the
    initialization phase. Each full iteration gets its own record when
    ``keep_iterations`` is set. The syndrome check that ends decoding (zero
    syndrome or iteration cap) is tallied separately under ``final_check``.
    """

    def __init__(self, keep_iterations: bool = False):
        self.keep_iterations = keep_iterations
        self.reset()

    def reset(self) -> None:
        self.init = OpCounts()
        self.iteration_total = OpCounts()
        self.final_check = OpCounts()
        self.iterations: list[OpCounts] = []
        self.n_iterations = 0
        self._current = self.init

    def begin_iteration(self) -> None:
        self.n_iterations += 1
        self._current = OpCounts()
        if self.keep_iterations:
            self.iterations.append(self._current)

    def end_iteration(self) -> None:
        if self._current is not self.init and self._current is not self.final_check:
            self.iteration_total += self._current
        self._current = self.final_check

    def begin_final_check(self) -> None:
        self._current = self.final_check

    def add(self, **counts) -> None:
        self._current.add(**counts)

    def merge(self, other: "OpCounter") -> None:
        self.init += other.init
        self.iteration_total += other.iteration_total
        self.final_check += other.final_check
        self.n_iterations += other.n_iterations
        if self.keep_iterations:
            self.iterations.extend(other.iterations)

    def mean_per_iteration(self) -> OpCounts:
        if not self.n_iterations:
            return OpCounts()
        t = self.iteration_total
        return OpCounts(*(round(getattr(t, f) / self.n_iterations) for f in OPS))


# --------------------------------------------------------------------------
# closed-form worst-case counts

def _check_regular(N, M, gamma, rho, r):
    for name, v in (("N", N), ("M", M), ("gamma", gamma), ("rho", rho), ("r", r)):
        if int(v) != v or v <= 0:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    if M * rho != N * gamma:
        raise ValueError(f"formulas assume a regular code: M*rho = {M * rho} != N*gamma = {N * gamma}")


def predict(variant: str, phase: str, N: int, M: int, gamma: int, rho: int, r: int,
            reselection: bool = False) -> OpCounts:
    """Worst-case operation counts for a regular code.

    ``phase`` is ``"init"`` or ``"iteration"``. Covers ISRB, IISRB, EIHRB and
    IEIHRB, the re-selection versions of IISRB and IEIHRB, and IHRB
    iterations (same procedure as ISRB).
    """
    _check_regular(N, M, gamma, rho, r)
    v = variant.upper()
    q = 2 ** r
    if phase not in ("init", "iteration"):
        raise ValueError(f"phase must be 'init' or 'iteration', got {phase!r}")
    if reselection and v not in ("IISRB", "IEIHRB"):
        raise ValueError(f"no closed-form counts for RS-{v}")

    if phase == "init":
        if v == "ISRB":
            c = OpCounts(ia=N * r * q, im=N * q, ic=M * N * (q - 1) * (3 * rho - 6))
        elif v == "IISRB":
            c = OpCounts(ia=N * r * q, im=N * q + N * gamma * rho, ic=N * gamma * (rho - 2))
        elif v in ("EIHRB", "IEIHRB"):
            c = OpCounts(ia=N * q * (r + 2), ic=N * q, id=N * q, floor=N * q)
        else:
            raise ValueError(f"no closed-form initialization counts for {variant}")
        if reselection:
            c.ic += N * (r - 1)
        return c

    if v in ("ISRB", "IHRB"):
        return OpCounts(fa=2 * N * gamma - M, fm=2 * N * gamma, ia=N * gamma + N * q, ic=2 * N * q - 2 * N)
    if v == "EIHRB":
        return OpCounts(fa=3 * N * gamma - 2 * M, fm=3 * N * gamma, ia=2 * N * gamma + N * q,
                        ic=2 * N * q - 2 * N + N * gamma)
    if v in ("IISRB", "IEIHRB"):
        c = OpCounts(fa=2 * N * gamma - M, fm=2 * N * gamma, ia=N * gamma, ic=N * gamma)
        if reselection:
            c += reselection_overhead(N, gamma)
        return c
    raise ValueError(f"unknown variant {variant!r}")


def reselection_overhead(N: int, gamma: int) -> OpCounts:
    """Extra per-iteration work of the re-selection scheme (worst case)."""
    return OpCounts(fa=2 * gamma, fm=gamma, ia=N * gamma + N + 2, ic=5 * N + 2 * N * gamma)


def eihrb_init_ia_candidates(N: int, r: int) -> dict[str, int]:
    """The two published expressions for EIHRB initialization IAs, which
    disagree: ``N 2^r (r+2)`` and ``N (r 2^r + 2)``."""
    q = 2 ** r
    return {"N*2^r*(r+2)": N * q * (r + 2), "N*(r*2^r+2)": N * (r * q + 2)}


# --------------------------------------------------------------------------
# failure classification

def classify_failure(trace, transmitted=None, theta: int = 8) -> tuple[str, str]:
    """Classify a failed decoding trajectory.

    ``trace`` is the sequence of hard-decision vectors, last one final. A
    final vector equal to the previous one is a period-1 point, equal to the
    one before that a period-2 point. The distance class compares the symbol
    Hamming distance to ``transmitted`` with ``theta`` (``< theta`` is small)
    and is ``"n/a"`` without a transmitted word or for non-periodic failures.
    """
    trace = [np.asarray(z) for z in trace]
    if not trace:
        raise ValueError("empty trajectory")
    z = trace[-1]
    if transmitted is not None and np.asarray(transmitted).shape != z.shape:
        raise ValueError(f"transmitted word has shape {np.asarray(transmitted).shape}, expected {z.shape}")
    if len(trace) >= 2 and np.array_equal(z, trace[-2]):
        cls = PERIOD1
    elif len(trace) >= 3 and np.array_equal(z, trace[-3]):
        cls = PERIOD2
    else:
        return OTHER, NA
    if transmitted is None:
        return cls, NA
    dist = int(np.count_nonzero(z != np.asarray(transmitted)))
    return cls, SMALL if dist < theta else LARGE


__all__ = [
    "OPS",
    "OpCounter",
    "OpCounts",
    "classify_failure",
    "eihrb_init_ia_candidates",
    "predict",
    "reselection_overhead",
]

