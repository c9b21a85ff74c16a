"""Bit-packed linear algebra over GF(2).

Vectors and matrices pack 64 bits per ``uint64`` word.  Both types are
immutable: their word arrays are marked read-only and every operation returns
a new value.

Lexicographic order, wherever it matters, treats bit 0 as the most
significant position with 0 before 1.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K

__all__ = [
    "BitVector",
    "BitMatrix",
    "rank",
    "kernel_basis",
    "kernel_dim",
    "uniform_kernel_sample",
    "lex_min_solution",
    "intersection_dim",
    "orthogonal_complement_generator",
    "row_submatrix",
    "read_matrix",
    "write_matrix",
]


def _nwords(nbits: int) -> int:
    return (nbits + 63) >> 6


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., nbits) 0/1 array into (..., nwords) little-endian uint64 words."""
    bits = np.asarray(bits, dtype=np.uint8) & 1
    nbits = bits.shape[-1]
    nw = _nwords(nbits)
    padded = np.zeros(bits.shape[:-1] + (nw * 64,), dtype=np.uint8)
    padded[..., :nbits] = bits
    as_bytes = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(as_bytes).view("<u8").astype(np.uint64).reshape(bits.shape[:-1] + (nw,))


def _unpack(words: np.ndarray, nbits: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    as_bytes = words.astype("<u8").view(np.uint8)
    bits = np.unpackbits(as_bytes, axis=-1, bitorder="little")
    return bits[..., :nbits]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.uint64)
    arr.flags.writeable = False
    return arr


class BitVector:
    """A fixed-length vector over GF(2)."""

    __slots__ = ("_len", "_words")

    def __init__(self, length: int, words: np.ndarray | None = None):
        if length < 0:
            raise ValueError("length must be non-negative")
        nw = _nwords(length)
        if words is None:
            words = np.zeros(nw, dtype=np.uint64)
        else:
            words = np.array(words, dtype=np.uint64).reshape(-1)
            if words.shape[0] != nw:
                raise ValueError(f"expected {nw} words for {length} bits, got {words.shape[0]}")
            if length & 63 and nw:
                words[-1] &= np.uint64((1 << (length & 63)) - 1)
        self._len = length
        self._words = _frozen(words)

    @classmethod
    def zeros(cls, length: int) -> "BitVector":
        return cls(length)

    @classmethod
    def from_bits(cls, bits: Iterable[int] | np.ndarray | str) -> "BitVector":
        if isinstance(bits, str):
            bits = [int(ch) for ch in bits.strip()]
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits, dtype=np.uint8)
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(arr.shape[0], _pack(arr))

    @classmethod
    def from_int(cls, value: int, length: int) -> "BitVector":
        """Little-endian: bit ``i`` of ``value`` becomes entry ``i``."""
        if value < 0 or value >> length:
            raise ValueError(f"{value} does not fit in {length} bits")
        nw = _nwords(length)
        words = [(value >> (64 * k)) & 0xFFFFFFFFFFFFFFFF for k in range(nw)]
        return cls(length, np.array(words, dtype=np.uint64))

    @classmethod
    def from_support(cls, support: Iterable[int], length: int) -> "BitVector":
        bits = np.zeros(length, dtype=np.uint8)
        for i in support:
            if not 0 <= i < length:
                raise IndexError(f"index {i} out of range for length {length}")
            bits[i] ^= 1
        return cls.from_bits(bits)

    @property
    def words(self) -> np.ndarray:
        return self._words

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, i: int) -> int:
        if not -self._len <= i < self._len:
            raise IndexError(f"index {i} out of range for length {self._len}")
        i %= self._len
        return int((int(self._words[i >> 6]) >> (i & 63)) & 1)

    def __iter__(self):
        return iter(self.to_array().tolist())

    def flip(self, i: int) -> "BitVector":
        if not 0 <= i < self._len:
            raise IndexError(f"index {i} out of range for length {self._len}")
        words = self._words.copy()
        words[i >> 6] ^= np.uint64(1 << (i & 63))
        return BitVector(self._len, words)

    def _check_len(self, other: "BitVector") -> None:
        if len(other) != self._len:
            raise ValueError(f"length mismatch: {self._len} vs {len(other)}")

    def __xor__(self, other: "BitVector") -> "BitVector":
        self._check_len(other)
        return BitVector(self._len, self._words ^ other._words)

    __add__ = __xor__

    def __and__(self, other: "BitVector") -> "BitVector":
        self._check_len(other)
        return BitVector(self._len, self._words & other._words)

    def dot(self, other: "BitVector") -> int:
        self._check_len(other)
        return int(np.bitwise_count(self._words & other._words).sum() & 1)

    @property
    def weight(self) -> int:
        """Hamming weight."""
        return int(np.bitwise_count(self._words).sum())

    def any(self) -> bool:
        return bool(self._words.any())

    def support(self) -> list[int]:
        return np.flatnonzero(self.to_array()).tolist()

    def to_array(self) -> np.ndarray:
        return _unpack(self._words, self._len).astype(np.uint8)

    def to_int(self) -> int:
        value = 0
        for k, w in enumerate(self._words.tolist()):
            value |= int(w) << (64 * k)
        return value

    def lex_key(self) -> tuple[int, ...]:
        return tuple(self.to_array().tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitVector):
            return NotImplemented
        return self._len == other._len and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._len, self._words.tobytes()))

    def __str__(self) -> str:
        return "".join(map(str, self.to_array().tolist()))

    def __repr__(self) -> str:
        return f"BitVector('{self}')"


class BitMatrix:
    """A dense matrix over GF(2) stored as packed rows."""

    __slots__ = ("rows", "cols", "_words", "__dict__")

    def __init__(self, rows: int, cols: int, words: np.ndarray | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("shape must be non-negative")
        nw = _nwords(cols)
        if words is None:
            words = np.zeros((rows, nw), dtype=np.uint64)
        else:
            words = np.array(words, dtype=np.uint64).reshape(rows, nw)
            if cols & 63 and nw:
                words[:, -1] &= np.uint64((1 << (cols & 63)) - 1)
        self.rows = rows
        self.cols = cols
        self._words = _frozen(words)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, size: int) -> "BitMatrix":
        return cls.from_dense(np.eye(size, dtype=np.uint8))

    @classmethod
    def from_dense(cls, array) -> "BitMatrix":
        arr = np.asarray(array, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        arr = (arr & 1).astype(np.uint8)
        return cls(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[BitVector | str | Sequence[int]], cols: int | None = None) -> "BitMatrix":
        vecs = [r if isinstance(r, BitVector) else BitVector.from_bits(r) for r in rows]
        if not vecs:
            if cols is None:
                raise ValueError("cols is required for an empty row list")
            return cls(0, cols)
        width = len(vecs[0]) if cols is None else cols
        for v in vecs:
            if len(v) != width:
                raise ValueError("rows have inconsistent lengths")
        return cls(len(vecs), width, np.stack([v.words for v in vecs]) if _nwords(width) else None)

    @classmethod
    def from_columns(cls, columns: Sequence[BitVector], rows: int) -> "BitMatrix":
        if not columns:
            return cls(rows, 0)
        return cls.from_rows(columns, cols=rows).T

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def words(self) -> np.ndarray:
        return self._words

    def to_dense(self) -> np.ndarray:
        return _unpack(self._words, self.cols).astype(np.uint8).reshape(self.rows, self.cols)

    def row(self, i: int) -> BitVector:
        if not 0 <= i < self.rows:
            raise IndexError(f"row {i} out of range for {self.rows} rows")
        return BitVector(self.cols, self._words[i])

    def column(self, j: int) -> BitVector:
        return BitVector.from_bits(self.to_dense()[:, j])

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry {key} out of range for shape {self.shape}")
        return int((int(self._words[i, j >> 6]) >> (j & 63)) & 1)

    @cached_property
    def T(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def __matmul__(self, other):
        if isinstance(other, BitVector):
            if len(other) != self.cols:
                raise ValueError(f"cannot apply {self.shape} matrix to length-{len(other)} vector")
            if self.rows == 0:
                return BitVector(0)
            bits = np.bitwise_count(self._words & other.words).sum(axis=1) & 1
            return BitVector.from_bits(bits)
        if isinstance(other, BitMatrix):
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch: {self.shape} @ {other.shape}")
            out = np.zeros((self.rows, _nwords(other.cols)), dtype=np.uint64)
            dense = self.to_dense()
            for k in range(self.cols):
                sel = dense[:, k].astype(bool)
                if sel.any():
                    out[sel] ^= other._words[k]
            return BitMatrix(self.rows, other.cols, out)
        return NotImplemented

    def __add__(self, other: "BitMatrix") -> "BitMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return BitMatrix(self.rows, self.cols, self._words ^ other._words)

    def hstack(self, other: "BitMatrix") -> "BitMatrix":
        return BitMatrix.from_dense(np.hstack([self.to_dense(), other.to_dense()]))

    def vstack(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.cols:
            raise ValueError("column count mismatch")
        return BitMatrix(self.rows + other.rows, self.cols, np.vstack([self._words, other._words]))

    def is_zero(self) -> bool:
        return not self._words.any()

    @cached_property
    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        return int(K.rank_of(self._words, self.cols))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self.shape, self._words.tobytes()))

    def __repr__(self) -> str:
        body = "\n".join("".join(map(str, r)) for r in self.to_dense().tolist())
        return f"BitMatrix({self.rows}x{self.cols})" + ("\n" + body if body else "")


def _reduced(M: BitMatrix, reverse: bool = False) -> tuple[np.ndarray, np.ndarray]:
    work = np.array(M.words, dtype=np.uint64)
    if M.rows == 0 or M.cols == 0:
        return work, np.zeros(0, dtype=np.int64)
    piv = K.rref(work, M.cols, reverse)
    return work[: piv.shape[0]], piv


def rank(M: BitMatrix) -> int:
    """Dimension of the row space of ``M``."""
    return M.rank


def kernel_dim(M: BitMatrix) -> int:
    return M.cols - M.rank


def kernel_basis(M: BitMatrix) -> list[BitVector]:
    """Basis of ``{x : Mx = 0}``, one vector per free column of the reduced form.

    A matrix with no rows has the whole space as its kernel.
    """
    W, piv = _reduced(M)
    dense = _unpack(W, M.cols) if W.shape[0] else np.zeros((0, M.cols), dtype=np.uint8)
    pivots = set(piv.tolist())
    basis = []
    for f in range(M.cols):
        if f in pivots:
            continue
        v = np.zeros(M.cols, dtype=np.uint8)
        v[f] = 1
        for r, j in enumerate(piv.tolist()):
            if dense[r, f]:
                v[j] = 1
        basis.append(BitVector.from_bits(v))
    return basis


def uniform_kernel_sample(M: BitMatrix, rng: np.random.Generator) -> BitVector:
    """Uniform element of ``ker(M)``; draws ``M.cols`` uniforms from ``rng``."""
    u = rng.random(M.cols)
    if M.cols == 0:
        return BitVector(0)
    return BitVector(M.cols, K.kernel_sample(np.array(M.words), M.cols, u))


def lex_min_solution(M: BitMatrix, b: BitVector) -> BitVector | None:
    """Lexicographically smallest ``x`` with ``Mx = b``, or None if unsolvable.

    Pivoting from the last column backwards leaves exactly the columns that can
    lead a kernel vector free; zeroing them gives the minimum of the coset.
    """
    if len(b) != M.rows:
        raise ValueError(f"right-hand side has length {len(b)}, expected {M.rows}")
    work = np.array(M.words, dtype=np.uint64)
    rhs = b.to_array().astype(np.uint8)
    if M.cols == 0 or M.rows == 0:
        return BitVector(M.cols) if not rhs.any() else None
    piv = K.rref_augmented(work, rhs, M.cols, True)
    if rhs[piv.shape[0]:].any():
        return None
    x = np.zeros(M.cols, dtype=np.uint8)
    for r, j in enumerate(piv.tolist()):
        x[j] = rhs[r]
    return BitVector.from_bits(x)


def intersection_dim(A: BitMatrix, B: BitMatrix) -> int:
    """``dim(ker A ∩ col B)`` computed as ``dim ker(AB) - dim ker(B)``."""
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: A has {A.cols} columns, B has {B.rows} rows")
    return kernel_dim(A @ B) - kernel_dim(B)


def orthogonal_complement_generator(h: BitMatrix) -> BitMatrix:
    """Matrix whose columns form a basis of ``ker(h^T) = col(h)^⊥``."""
    return BitMatrix.from_columns(kernel_basis(h.T), h.rows)


def row_submatrix(M: BitMatrix, rows: Iterable[int]) -> BitMatrix:
    """Rows of ``M`` indexed by ``rows``, stacked in ascending order."""
    idx = sorted(set(rows))
    for i in idx:
        if not 0 <= i < M.rows:
            raise IndexError(f"row {i} out of range for {M.rows} rows")
    return BitMatrix(len(idx), M.cols, M.words[idx] if idx else None)


def read_matrix(path) -> BitMatrix:
    """Parse the text format: ``rows cols`` then one 0/1 string per row."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    return parse_matrix(lines)


def parse_matrix(lines: Sequence[str]) -> BitMatrix:
    if not lines:
        raise ValueError("empty matrix file")
    try:
        rows, cols = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad header {lines[0]!r}; expected 'rows cols'") from exc
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(f"header declares {rows} rows, found {len(body)}")
    dense = np.zeros((rows, cols), dtype=np.uint8)
    for i, line in enumerate(body):
        if len(line) != cols or set(line) - {"0", "1"}:
            raise ValueError(f"row {i} is not a length-{cols} 0/1 string: {line!r}")
        dense[i] = [int(ch) for ch in line]
    return BitMatrix.from_dense(dense)


def format_matrix(M: BitMatrix) -> str:
    lines = [f"{M.rows} {M.cols}"]
    lines += ["".join(map(str, r)) for r in M.to_dense().tolist()]
    return "\n".join(lines) + "\n"


def write_matrix(M: BitMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix(M))
