"""Bit-packed GF(2) matrices and vectors with elimination-based solving.

Rows are packed little-endian into uint64 words: column ``j`` lives in word
``j // 64`` at bit ``j % 64``.  Padding bits past ``cols`` are always zero.
Objects are immutable; every operation returns fresh arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WORD",
    "BitMatrix",
    "BitVector",
    "Elimination",
    "mat_vec",
    "eliminate",
    "solve",
    "rank",
    "kernel_dim",
]

WORD = 64


def _words(bits: int) -> int:
    return (bits + WORD - 1) // WORD


def _pack(dense: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 array into (rows, words) uint64."""
    rows, cols = dense.shape
    nwords = _words(cols)
    padded = np.zeros((rows, nwords * WORD), dtype=np.uint8)
    padded[:, :cols] = dense & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64).reshape(rows, nwords)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    rows = words.shape[0]
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, count=cols, bitorder="little")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class BitVector:
    length: int
    words: np.ndarray

    @classmethod
    def from_dense(cls, bits) -> "BitVector":
        dense = np.asarray(bits, dtype=np.uint8).reshape(1, -1)
        return cls(dense.shape[1], _frozen(_pack(dense)[0]))

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length, _frozen(np.zeros(_words(length), dtype=np.uint64)))

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words.reshape(1, -1), self.length)[0]

    def __getitem__(self, j: int) -> int:
        if not 0 <= j < self.length:
            raise IndexError(j)
        return int((int(self.words[j // WORD]) >> (j % WORD)) & 1)

    def __len__(self) -> int:
        return self.length

    def weight(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def __xor__(self, other: "BitVector") -> "BitVector":
        if self.length != other.length:
            raise ValueError(f"length mismatch: {self.length} vs {other.length}")
        return BitVector(self.length, _frozen(self.words ^ other.words))

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        return hash((self.length, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BitVector({''.join(map(str, self.to_dense()))})"


@dataclass(frozen=True, eq=False)
class BitMatrix:
    rows: int
    cols: int
    words: np.ndarray

    @classmethod
    def from_dense(cls, matrix) -> "BitMatrix":
        dense = np.asarray(matrix, dtype=np.uint8)
        if dense.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(dense.shape[0], dense.shape[1], _frozen(_pack(dense)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, _frozen(np.zeros((rows, _words(cols)), dtype=np.uint64)))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words, self.cols)

    def row(self, i: int) -> BitVector:
        return BitVector(self.cols, _frozen(self.words[i].copy()))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return int((int(self.words[i, j // WORD]) >> (j % WORD)) & 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.words, other.words)

    def __hash__(self) -> int:
        return hash((self.shape, self.words.tobytes()))

    def __repr__(self) -> str:
        body = "; ".join("".join(map(str, r)) for r in self.to_dense())
        return f"BitMatrix({self.rows}x{self.cols}: {body})"


def mat_vec(M: BitMatrix, v: BitVector) -> BitVector:
    """Return ``M v`` over GF(2)."""
    if v.length != M.cols:
        raise ValueError(f"dimension mismatch: matrix has {M.cols} columns, vector has length {v.length}")
    if M.rows == 0:
        return BitVector.zeros(0)
    overlap = np.bitwise_count(M.words & v.words[None, :]).sum(axis=1)
    return BitVector.from_dense((overlap & 1).astype(np.uint8))


@dataclass(frozen=True)
class Elimination:
    """Reduced row-echelon form of the augmented system ``[M | b]``.

    ``echelon`` and ``rhs`` hold the reduced rows; the first ``rank`` rows are
    pivot rows, with ``pivots[i]`` the pivot column of row ``i``.  A nonzero
    ``rhs`` entry in rows ``rank..`` means the system is inconsistent.
    """

    echelon: BitMatrix
    rhs: BitVector
    rank: int
    pivots: tuple[int, ...]

    @property
    def consistent(self) -> bool:
        rhs = self.rhs.to_dense()
        return not rhs[self.rank:].any()


def eliminate(M: BitMatrix, b: BitVector | None = None) -> Elimination:
    """Gauss-Jordan elimination on a copy of ``[M | b]``.

    Pivot rule: scan columns from lowest index; the pivot is the first row at
    or below the current rank with that bit set.
    """
    if b is None:
        b = BitVector.zeros(M.rows)
    if b.length != M.rows:
        raise ValueError(f"dimension mismatch: matrix has {M.rows} rows, right-hand side has length {b.length}")
    rows = M.words.copy()
    rhs = b.to_dense().astype(np.uint8).copy()
    pivots = []
    r = 0
    for col in range(M.cols):
        if r == M.rows:
            break
        w, bit = divmod(col, WORD)
        mask = np.uint64(1 << bit)
        has = (rows[:, w] & mask) != 0
        candidates = np.flatnonzero(has[r:])
        if candidates.size == 0:
            continue
        piv = r + int(candidates[0])
        if piv != r:
            rows[[r, piv]] = rows[[piv, r]]
            rhs[[r, piv]] = rhs[[piv, r]]
            has[[r, piv]] = has[[piv, r]]
        has[r] = False
        if has.any():
            rows[has] ^= rows[r]
            rhs[has] ^= rhs[r]
        pivots.append(col)
        r += 1
    echelon = BitMatrix(M.rows, M.cols, _frozen(rows))
    return Elimination(echelon, BitVector.from_dense(rhs), r, tuple(pivots))


def solve(M: BitMatrix, b: BitVector) -> BitVector | None:
    """One solution of ``M v = b`` with every free variable set to 0, or None if unsatisfiable."""
    red = eliminate(M, b)
    if not red.consistent:
        return None
    rhs = red.rhs.to_dense()
    v = np.zeros(M.cols, dtype=np.uint8)
    # reduced form: each pivot row has zeros in all other pivot columns
    for i, col in enumerate(red.pivots):
        v[col] = rhs[i]
    return BitVector.from_dense(v)


def rank(M: BitMatrix) -> int:
    return eliminate(M).rank


def kernel_dim(M: BitMatrix) -> int:
    return M.cols - rank(M)
