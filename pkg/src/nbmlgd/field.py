"""Arithmetic over GF(2^r) backed by log/antilog tables.

Elements are plain integers in ``[0, 2**r)``; bit ``t`` of an element is the
coefficient of ``x**t`` in its polynomial representation. Every operation
accepts Python ints or integer numpy arrays (broadcast elementwise).
"""

from __future__ import annotations

import numpy as np

# Conventional primitive polynomials, bit i = coefficient of x**i.
DEFAULT_PRIMITIVE_POLYS = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}

MAX_DEGREE = 16


def poly_mulmod(a: int, b: int, poly: int) -> int:
    """Carry-less multiply ``a * b`` reduced modulo ``poly``.

    Table-free reference used to cross-check the table arithmetic.
    """
    r = poly.bit_length() - 1
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a >> r & 1:
            a ^= poly
    return acc


class GF2m:
    """The finite field GF(2^r).

    Parameters
    ----------
    r : int
        Extension degree, ``1 <= r <= 16``.
    primitive_poly : int, optional
        Degree-``r`` primitive polynomial encoded as an ``(r+1)``-bit integer.
        Defaults to ``DEFAULT_PRIMITIVE_POLYS[r]``.

    Instances are immutable and safe to share between workers.
    """

    def __init__(self, r: int, primitive_poly: int | None = None):
        if not isinstance(r, (int, np.integer)) or not 1 <= r <= MAX_DEGREE:
            raise ValueError(f"extension degree must be in [1, {MAX_DEGREE}], got {r!r}")
        r = int(r)
        poly = DEFAULT_PRIMITIVE_POLYS[r] if primitive_poly is None else int(primitive_poly)
        if poly.bit_length() - 1 != r:
            raise ValueError(f"polynomial {poly:#x} does not have degree {r}")
        self.r = r
        self.order = 1 << r
        self.primitive_poly = poly

        n = self.order - 1
        exp = np.zeros(2 * n, dtype=np.int64)
        log = np.full(self.order, -1, dtype=np.int64)
        x = 1
        for i in range(n):
            if log[x] != -1:
                raise ValueError(
                    f"polynomial {poly:#x} is not primitive for GF(2^{r}): "
                    f"x has order {i}"
                )
            exp[i] = x
            log[x] = i
            x <<= 1
            if x >> r & 1:
                x ^= poly
        if x != 1:
            raise ValueError(f"polynomial {poly:#x} is not primitive for GF(2^{r})")
        exp[n:] = exp[:n]
        exp.flags.writeable = False
        log.flags.writeable = False
        self.exp = exp
        self.log = log
        self._mul_table = None

    def __repr__(self) -> str:
        return f"GF2m(r={self.r}, primitive_poly={self.primitive_poly:#x})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, GF2m)
            and self.r == other.r
            and self.primitive_poly == other.primitive_poly
        )

    def __hash__(self) -> int:
        return hash((self.r, self.primitive_poly))

    @property
    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def validate(self, a) -> np.ndarray:
        """Return ``a`` as an int64 array, raising if any value is outside the field."""
        arr = np.asarray(a)
        if arr.dtype.kind not in "iu":
            raise TypeError(f"field elements must be integers, got dtype {arr.dtype}")
        arr = arr.astype(np.int64, copy=False)
        if arr.size and (arr.min() < 0 or arr.max() >= self.order):
            raise ValueError(f"element out of range for GF(2^{self.r})")
        return arr

    def add(self, a, b):
        return a ^ b

    sub = add

    def mul(self, a, b):
        if np.isscalar(a) and np.isscalar(b):
            if a == 0 or b == 0:
                return 0
            return int(self.exp[self.log[a] + self.log[b]])
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        nz = (a != 0) & (b != 0)
        out = self.exp[(self.log[a] + self.log[b]) % (self.order - 1)]
        return np.where(nz, out, 0)

    def inv(self, a):
        if np.isscalar(a):
            if a == 0:
                raise ZeroDivisionError("no inverse of zero")
            return int(self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)])
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("no inverse of zero")
        return self.exp[(self.order - 1 - self.log[a]) % (self.order - 1)]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def bit(self, a, t: int):
        if not 0 <= t < self.r:
            raise IndexError(f"bit index {t} out of range for r={self.r}")
        return (a >> t) & 1

    def bits(self, a) -> np.ndarray:
        """Binary representation, shape ``a.shape + (r,)``, bit 0 first."""
        a = np.asarray(a, dtype=np.int64)
        return (a[..., None] >> np.arange(self.r)) & 1

    def from_bits(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64)
        if bits.shape[-1] != self.r:
            raise ValueError(f"last axis must have length r={self.r}")
        return (bits << np.arange(self.r)).sum(axis=-1)

    @property
    def mul_table(self) -> np.ndarray:
        """Dense ``q x q`` product table (built lazily, only for r <= 10)."""
        if self._mul_table is None:
            if self.r > 10:
                raise MemoryError("dense multiplication table only for r <= 10")
            e = self.elements
            t = self.mul(e[:, None], e[None, :])
            t.flags.writeable = False
            self._mul_table = t
        return self._mul_table

    def matvec(self, A, x) -> np.ndarray:
        """Dense matrix-vector product over the field."""
        prod = self.mul(np.asarray(A), np.asarray(x)[None, :])
        return np.bitwise_xor.reduce(prod, axis=1) if prod.shape[1] else np.zeros(prod.shape[0], dtype=np.int64)
