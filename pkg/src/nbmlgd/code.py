"""Sparse parity-check matrices over GF(2^r) and the code-level plumbing
around them: syndromes, alist I/O, a regular-ensemble generator and a
systematic encoder."""

from __future__ import annotations

import logging
import os

import numpy as np

from .field import GF2m

log = logging.getLogger(__name__)


class AlistError(ValueError):
    """Malformed non-binary alist file."""

    def __init__(self, message: str, lineno: int | None = None, path=None):
        where = ""
        if path is not None:
            where += f"{os.fspath(path)}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.lineno = lineno


class ParityCheckMatrix:
    """An ``M x N`` sparse parity-check matrix over ``field``.

    Nonzero entries are stored as edge arrays sorted row-major
    (``edge_row``, ``edge_col``, ``edge_val``) together with cached inverses
    ``edge_inv``. ``row_ptr`` delimits each row's edges; ``col_edges`` lists
    edge indices grouped by column, delimited by ``col_ptr``. All arrays are
    read-only.
    """

    def __init__(self, field: GF2m, M: int, N: int, rows, cols, values):
        self.field = field
        self.M = int(M)
        self.N = int(N)
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.int64).ravel()
        if not rows.size == cols.size == values.size:
            raise ValueError("rows, cols and values must have equal length")
        if rows.size:
            if rows.min() < 0 or rows.max() >= self.M:
                raise ValueError("row index out of range")
            if cols.min() < 0 or cols.max() >= self.N:
                raise ValueError("column index out of range")
        field.validate(values)
        if np.any(values == 0):
            raise ValueError("stored entries must be nonzero")

        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        key = rows * self.N + cols
        if np.any(np.diff(key) == 0):
            raise ValueError("repeated (row, col) position")

        self.edge_row = rows
        self.edge_col = cols
        self.edge_val = values
        self.edge_inv = field.inv(values) if values.size else values.copy()
        self.row_ptr = np.concatenate(([0], np.cumsum(np.bincount(rows, minlength=self.M))))
        self.col_edges = np.argsort(cols, kind="stable")
        self.col_ptr = np.concatenate(([0], np.cumsum(np.bincount(cols, minlength=self.N))))
        for a in (
            self.edge_row, self.edge_col, self.edge_val, self.edge_inv,
            self.row_ptr, self.col_edges, self.col_ptr,
        ):
            a.flags.writeable = False

    @classmethod
    def from_dense(cls, field: GF2m, H) -> "ParityCheckMatrix":
        H = field.validate(H)
        if H.ndim != 2:
            raise ValueError("dense matrix must be 2-D")
        rows, cols = np.nonzero(H)
        return cls(field, H.shape[0], H.shape[1], rows, cols, H[rows, cols])

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.M, self.N), dtype=np.int64)
        H[self.edge_row, self.edge_col] = self.edge_val
        return H

    def __repr__(self) -> str:
        return f"ParityCheckMatrix(M={self.M}, N={self.N}, edges={self.n_edges}, field={self.field!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ParityCheckMatrix)
            and self.field == other.field
            and (self.M, self.N) == (other.M, other.N)
            and np.array_equal(self.edge_row, other.edge_row)
            and np.array_equal(self.edge_col, other.edge_col)
            and np.array_equal(self.edge_val, other.edge_val)
        )

    __hash__ = None

    @property
    def n_edges(self) -> int:
        return int(self.edge_row.size)

    @property
    def row_weights(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    @property
    def col_weights(self) -> np.ndarray:
        return np.diff(self.col_ptr)

    @property
    def regularity(self) -> tuple[int, int] | None:
        """``(gamma, rho)`` if every column has weight gamma and every row rho."""
        cw, rw = self.col_weights, self.row_weights
        if cw.size and rw.size and np.all(cw == cw[0]) and np.all(rw == rw[0]):
            return int(cw[0]), int(rw[0])
        return None

    def check_neighbors(self, i: int) -> np.ndarray:
        """Symbol positions ``j`` with ``h[i, j] != 0``."""
        return self.edge_col[self.row_ptr[i]:self.row_ptr[i + 1]]

    def symbol_neighbors(self, j: int) -> np.ndarray:
        """Check indices ``i`` with ``h[i, j] != 0``."""
        return self.edge_row[self.col_edges[self.col_ptr[j]:self.col_ptr[j + 1]]]

    def edge_index(self, i: int, j: int) -> int:
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        k = lo + np.searchsorted(self.edge_col[lo:hi], j)
        if k >= hi or self.edge_col[k] != j:
            raise KeyError(f"({i}, {j}) is not a nonzero position")
        return int(k)

    def syndrome(self, z) -> np.ndarray:
        return syndrome(self, z)


def _row_xor(H: ParityCheckMatrix, per_edge: np.ndarray) -> np.ndarray:
    out = np.zeros(H.M, dtype=np.int64)
    nonempty = H.row_ptr[1:] > H.row_ptr[:-1]
    if per_edge.size:
        out[nonempty] = np.bitwise_xor.reduceat(per_edge, H.row_ptr[:-1][nonempty])
    return out


def syndrome(H: ParityCheckMatrix, z) -> np.ndarray:
    """``s = H z^T`` over the field, length ``M``."""
    z = np.asarray(z, dtype=np.int64)
    if z.shape != (H.N,):
        raise ValueError(f"expected a length-{H.N} symbol vector, got shape {z.shape}")
    return _row_xor(H, H.field.mul(H.edge_val, z[H.edge_col]))


# --------------------------------------------------------------------------
# alist I/O

def format_alist(H: ParityCheckMatrix, pad: bool = False) -> str:
    """``H`` in the non-binary alist dialect.

    With ``pad=True`` every block is zero-padded to the maximum weight, as
    classic alist writers do.
    """
    cw, rw = H.col_weights, H.row_weights
    max_c, max_r = int(cw.max(initial=0)), int(rw.max(initial=0))
    lines = [
        f"{H.N} {H.M} {H.field.order}",
        f"{max_c} {max_r}",
        " ".join(map(str, cw)),
        " ".join(map(str, rw)),
    ]
    for j in range(H.N):
        e = H.col_edges[H.col_ptr[j]:H.col_ptr[j + 1]]
        pairs = [f"{H.edge_row[k] + 1} {H.edge_val[k]}" for k in e]
        if pad:
            pairs += ["0 0"] * (max_c - len(pairs))
        lines.append(" ".join(pairs))
    for i in range(H.M):
        e = range(H.row_ptr[i], H.row_ptr[i + 1])
        pairs = [f"{H.edge_col[k] + 1} {H.edge_val[k]}" for k in e]
        if pad:
            pairs += ["0 0"] * (max_r - len(pairs))
        lines.append(" ".join(pairs))
    return "\n".join(lines) + "\n"


def save_alist(H: ParityCheckMatrix, path, pad: bool = False) -> None:
    """Write :func:`format_alist` output to ``path``."""
    with open(path, "w") as fh:
        fh.write(format_alist(H, pad))


def _ints(text: str, lineno: int, path) -> list[int]:
    try:
        return [int(tok) for tok in text.split()]
    except ValueError as exc:
        raise AlistError(f"non-integer token ({exc})", lineno, path) from None


def load_alist(path, field: GF2m | None = None) -> ParityCheckMatrix:
    """Read a non-binary alist file.

    Header: ``N M q`` / ``max_col_wt max_row_wt`` / column weights / row
    weights, followed by one line per column listing ``row value`` pairs and
    one line per row listing ``col value`` pairs (indices 1-based). Blocks may
    be zero-padded with ``0 0`` pairs. Blank lines are ignored.
    """
    with open(path) as fh:
        raw = fh.read().splitlines()
    lines = [(n + 1, text) for n, text in enumerate(raw) if text.strip()]
    if len(lines) < 4:
        raise AlistError("truncated header", None, path)

    (ln, text) = lines[0]
    head = _ints(text, ln, path)
    if len(head) != 3:
        raise AlistError("first line must be 'N M q'", ln, path)
    N, M, q = head
    if N <= 0 or M <= 0:
        raise AlistError("N and M must be positive", ln, path)
    if q < 2 or q & (q - 1):
        raise AlistError(f"q={q} is not a power of two", ln, path)
    if field is None:
        field = GF2m(q.bit_length() - 1)
    elif field.order != q:
        raise AlistError(f"file is over GF({q}) but field has order {field.order}", ln, path)

    ln, text = lines[1]
    maxes = _ints(text, ln, path)
    if len(maxes) != 2:
        raise AlistError("second line must be 'max_col_wt max_row_wt'", ln, path)
    ln, text = lines[2]
    cw = _ints(text, ln, path)
    if len(cw) != N:
        raise AlistError(f"expected {N} column weights, got {len(cw)}", ln, path)
    ln, text = lines[3]
    rw = _ints(text, ln, path)
    if len(rw) != M:
        raise AlistError(f"expected {M} row weights, got {len(rw)}", ln, path)
    if max(cw) != maxes[0] or max(rw) != maxes[1]:
        raise AlistError("maximum weights disagree with the weight lists", lines[1][0], path)
    if sum(cw) != sum(rw):
        raise AlistError("column and row weights have different totals", lines[3][0], path)
    if len(lines) < 4 + N + M:
        raise AlistError(f"expected {N} column and {M} row blocks, file ends early", None, path)

    def block(idx, weight, limit, kind):
        ln, text = lines[idx]
        vals = _ints(text, ln, path)
        if len(vals) % 2:
            raise AlistError(f"{kind} block has an odd number of integers", ln, path)
        pairs = [(a, b) for a, b in zip(vals[0::2], vals[1::2])]
        real = [(a, b) for a, b in pairs if (a, b) != (0, 0)]
        if any(a == 0 for a, _ in real):
            raise AlistError(f"{kind} block has index 0 with a nonzero value", ln, path)
        if pairs[len(real):] != [(0, 0)] * (len(pairs) - len(real)):
            raise AlistError(f"{kind} block has padding before entries", ln, path)
        if len(real) != weight:
            raise AlistError(
                f"{kind} block lists {len(real)} entries, header weight is {weight}", ln, path
            )
        for a, b in real:
            if not 1 <= a <= limit:
                raise AlistError(f"index {a} out of range 1..{limit}", ln, path)
            if not 1 <= b < q:
                raise AlistError(f"value {b} outside 1..{q - 1}", ln, path)
        if len({a for a, _ in real}) != len(real):
            raise AlistError(f"{kind} block repeats an index", ln, path)
        return real

    from_cols = set()
    for j in range(N):
        for i1, v in block(4 + j, cw[j], M, "column"):
            from_cols.add((i1 - 1, j, v))
    from_rows = set()
    for i in range(M):
        for j1, v in block(4 + N + i, rw[i], N, "row"):
            from_rows.add((i, j1 - 1, v))
    if from_cols != from_rows:
        diff = sorted(from_cols ^ from_rows)[0]
        raise AlistError(f"row and column blocks disagree at entry (row {diff[0] + 1}, col {diff[1] + 1})",
                         None, path)
    if len(lines) > 4 + N + M:
        raise AlistError("trailing content after row blocks", lines[4 + N + M][0], path)

    entries = np.array(sorted(from_cols), dtype=np.int64).reshape(-1, 3)
    return ParityCheckMatrix(field, M, N, entries[:, 0], entries[:, 1], entries[:, 2])


# --------------------------------------------------------------------------
# regular ensemble

def _four_cycles(B: np.ndarray) -> int:
    O = B @ B.T
    np.fill_diagonal(O, 0)
    return int((O * (O - 1) // 2).sum() // 2)


def _reduce_four_cycles(rows: np.ndarray, N: int, rng, passes: int) -> np.ndarray:
    """Best-effort swap search that lowers the number of length-4 cycles."""
    M, rho = rows.shape
    B = np.zeros((M, N), dtype=np.int64)
    np.put_along_axis(B, rows, 1, axis=1)

    def row_cost(i):
        o = B @ B[i]
        o[i] = 0
        return int((o * (o - 1) // 2).sum())

    for _ in range(passes):
        O = B @ B.T
        np.fill_diagonal(O, 0)
        bad = np.argwhere(np.triu(O) >= 2)
        if bad.size == 0:
            break
        improved = False
        for i, i2 in bad:
            shared = np.flatnonzero(B[i] & B[i2])
            k = int(rng.integers(M))
            if shared.size == 0 or k == i:
                continue
            c = int(rng.choice(shared))
            if B[k, c]:
                continue
            cand = rows[k][B[i, rows[k]] == 0]
            if cand.size == 0:
                continue
            d = int(rng.choice(cand))
            before = row_cost(i) + row_cost(k)
            B[i, c], B[i, d], B[k, d], B[k, c] = 0, 1, 0, 1
            after = row_cost(i) + row_cost(k)
            if after < before:
                rows[i][rows[i] == c] = d
                rows[k][rows[k] == d] = c
                improved = True
            else:
                B[i, c], B[i, d], B[k, d], B[k, c] = 1, 0, 1, 0
        if not improved:
            break
    return rows


def generate_regular(
    N: int,
    gamma: int,
    rho: int,
    field: GF2m,
    seed=None,
    *,
    max_tries: int = 100,
    cycle_passes: int = 20,
) -> ParityCheckMatrix:
    """Random ``(gamma, rho)``-regular matrix with ``M = N*gamma/rho`` rows.

    Built by randomly matching column sockets to row sockets, repairing
    repeated positions by swaps, then reducing 4-cycles on a best-effort
    basis. Nonzero values are uniform over the nonzero field elements.
    Deterministic for a given ``seed``.
    """
    if N <= 0 or gamma <= 0 or rho <= 0:
        raise ValueError("N, gamma and rho must be positive")
    if (N * gamma) % rho:
        raise ValueError(f"N*gamma = {N * gamma} is not divisible by rho = {rho}")
    M = N * gamma // rho
    if rho > N or gamma > M:
        raise ValueError(f"no ({gamma}, {rho})-regular {M}x{N} matrix without repeated positions")
    rng = np.random.default_rng(seed)

    for _ in range(max_tries):
        sockets = np.repeat(np.arange(N), gamma)
        rng.shuffle(sockets)
        rows = sockets.reshape(M, rho).copy()
        for _sweep in range(10 * M):
            dup = [i for i in range(M) if np.unique(rows[i]).size < rho]
            if not dup:
                break
            for i in dup:
                vals, counts = np.unique(rows[i], return_counts=True)
                if counts.max() == 1:  # repaired by an earlier swap this sweep
                    continue
                c = vals[counts > 1][0]
                pos = int(np.flatnonzero(rows[i] == c)[0])
                k = int(rng.integers(M))
                kp = int(rng.integers(rho))
                d = rows[k, kp]
                if k != i and d not in rows[i] and c not in rows[k]:
                    rows[i, pos], rows[k, kp] = d, c
        else:
            continue
        if all(np.unique(r).size == rho for r in rows):
            break
    else:
        raise ValueError(f"could not build a ({gamma}, {rho})-regular matrix for N={N}")

    rows = _reduce_four_cycles(rows, N, rng, cycle_passes)
    r_idx = np.repeat(np.arange(M), rho)
    values = rng.integers(1, field.order, size=M * rho)
    return ParityCheckMatrix(field, M, N, r_idx, rows.ravel(), values)


def count_four_cycles(H: ParityCheckMatrix) -> int:
    """Number of length-4 cycles in the Tanner graph of ``H``."""
    B = (H.to_dense() != 0).astype(np.int64)
    return _four_cycles(B)


# --------------------------------------------------------------------------
# encoding

class SystematicEncoder:
    """Encoder from row-reducing ``H`` over the field.

    Pivot columns are searched from the right, so for full-rank ``H`` of the
    form ``[P | I]`` the message lands in the leading ``K`` positions. For a
    rank-deficient ``H`` the code dimension is ``N - rank``.
    """

    def __init__(self, H: ParityCheckMatrix):
        gf = H.field
        A = H.to_dense()
        M, N = A.shape
        pivots = []
        row = 0
        for c in range(N - 1, -1, -1):
            if row == M:
                break
            nz = np.flatnonzero(A[row:, c])
            if nz.size == 0:
                continue
            p = row + nz[0]
            if p != row:
                A[[row, p]] = A[[p, row]]
            A[row] = gf.mul(A[row], gf.inv(int(A[row, c])))
            others = np.flatnonzero(A[:, c])
            others = others[others != row]
            if others.size:
                A[others] ^= gf.mul(A[others, c][:, None], A[row][None, :])
            pivots.append(c)
            row += 1
        self.H = H
        self.rank = row
        self.pivots = np.array(pivots, dtype=np.int64)
        self.free = np.setdiff1d(np.arange(N), self.pivots)
        self.parity_map = A[:row][:, self.free]
        if self.rank < M:
            log.info("parity-check matrix has rank %d < M = %d", self.rank, M)

    @property
    def k(self) -> int:
        return int(self.free.size)

    @property
    def rate(self) -> float:
        return self.k / self.H.N

    def encode(self, message) -> np.ndarray:
        gf = self.H.field
        m = gf.validate(message)
        if m.shape != (self.k,):
            raise ValueError(f"message must have length {self.k}, got shape {m.shape}")
        x = np.zeros(self.H.N, dtype=np.int64)
        x[self.free] = m
        if self.rank:
            x[self.pivots] = gf.matvec(self.parity_map, m)
        return x


def systematic_encode(H: ParityCheckMatrix, message) -> np.ndarray:
    return SystematicEncoder(H).encode(message)


__all__ = [
    "AlistError",
    "ParityCheckMatrix",
    "SystematicEncoder",
    "count_four_cycles",
    "format_alist",
    "generate_regular",
    "load_alist",
    "save_alist",
    "syndrome",
    "systematic_encode",
]
