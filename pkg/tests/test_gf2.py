"""GF(2) core: worked examples plus brute-force and second-route property checks."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from codesw import gf2
from codesw.codes import Graph, incidence_matrix
from codesw.gf2 import BitMatrix, BitVector
from codesw.oracle import _rank_of_ints

K3 = incidence_matrix(Graph.complete(3))


def dense_matrices(max_rows=7, max_cols=7):
    return st.tuples(st.integers(1, max_rows), st.integers(1, max_cols), st.integers(0, 2**63)).map(
        lambda t: np.random.default_rng(t[2]).integers(0, 2, (t[0], t[1]), dtype=np.uint8))


def brute_kernel(dense):
    n = dense.shape[1]
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        v = np.array(bits[::-1], dtype=np.uint8)[::-1]
        if not (dense.astype(int) @ v % 2).any():
            out.append(tuple(v))
    return set(out)


def row_ints(dense):
    return [int("".join(map(str, r[::-1])), 2) if len(r) else 0 for r in dense]


# -- BitVector / BitMatrix ----------------------------------------------------

def test_bitvector_roundtrip_and_ops():
    v = BitVector.from_bits("10110")
    assert v.to_int() == 0b01101
    assert v.weight == 3
    assert v.support() == [0, 2, 3]
    assert BitVector.from_int(13, 5) == v
    w = BitVector.from_support([0, 4], 5)
    assert (v ^ w).support() == [2, 3, 4]
    assert v.dot(w) == 1
    assert not BitVector.zeros(70).any()
    assert BitVector.from_support([69], 70).to_int() == 1 << 69


def test_bitmatrix_products_and_transpose():
    rng = np.random.default_rng(1)
    A = rng.integers(0, 2, (5, 70), dtype=np.uint8)
    B = rng.integers(0, 2, (70, 3), dtype=np.uint8)
    M = BitMatrix.from_dense(A)
    assert np.array_equal((M @ BitMatrix.from_dense(B)).to_dense(), A.astype(int) @ B % 2)
    assert np.array_equal(M.T.to_dense(), A.T)
    assert M.shape == (5, 70)


# -- rank ---------------------------------------------------------------------

def test_rank_examples():
    assert gf2.rank(BitMatrix.identity(3)) == 3
    assert gf2.rank(BitMatrix.zeros(2, 5)) == 0
    assert gf2.rank(K3) == 2


@settings(max_examples=150, deadline=None)
@given(dense_matrices(8, 70))
def test_rank_matches_independent_elimination(dense):
    assert gf2.rank(BitMatrix.from_dense(dense)) == _rank_of_ints(row_ints(dense))


@settings(max_examples=100, deadline=None)
@given(dense_matrices())
def test_rank_invariant_under_transpose(dense):
    M = BitMatrix.from_dense(dense)
    assert gf2.rank(M) == gf2.rank(M.T)


# -- kernel -------------------------------------------------------------------

def test_kernel_basis_examples():
    basis = gf2.kernel_basis(BitMatrix.from_rows(["11"]))
    assert [b.to_array().tolist() for b in basis] == [[1, 1]]
    assert gf2.kernel_basis(BitMatrix.identity(2)) == []
    assert [b.to_array().tolist() for b in gf2.kernel_basis(K3)] == [[1, 1, 1]]


@settings(max_examples=100, deadline=None)
@given(dense_matrices())
def test_kernel_basis_spans_brute_force_kernel(dense):
    M = BitMatrix.from_dense(dense)
    basis = gf2.kernel_basis(M)
    assert len(basis) == dense.shape[1] - gf2.rank(M) == gf2.kernel_dim(M)
    span = set()
    for coeffs in itertools.product((0, 1), repeat=len(basis)):
        v = BitVector.zeros(dense.shape[1])
        for c, b in zip(coeffs, basis):
            if c:
                v = v ^ b
        span.add(tuple(v.to_array().tolist()))
    assert span == brute_kernel(dense)


def test_uniform_kernel_sample_full_rank_is_zero():
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert not gf2.uniform_kernel_sample(BitMatrix.identity(4), rng).any()


def test_uniform_kernel_sample_is_uniform():
    rng = np.random.default_rng(2024)
    draws = np.array([gf2.uniform_kernel_sample(BitMatrix.from_rows(["11"]), rng).to_int()
                      for _ in range(100_000)])
    assert set(np.unique(draws)) == {0, 3}
    assert abs(np.mean(draws == 0) - 0.5) < 0.01


@settings(max_examples=30, deadline=None)
@given(dense_matrices(4, 5))
def test_uniform_kernel_sample_hits_every_kernel_vector(dense):
    M = BitMatrix.from_dense(dense)
    rng = np.random.default_rng(7)
    seen = {tuple(gf2.uniform_kernel_sample(M, rng).to_array().tolist()) for _ in range(400)}
    assert seen == brute_kernel(dense)


# -- lex-min solution ---------------------------------------------------------

def test_lex_min_examples():
    b = BitVector.from_bits("101")
    assert gf2.lex_min_solution(BitMatrix.identity(3), b) == b
    sol = gf2.lex_min_solution(BitMatrix.from_rows(["11"]), BitVector.from_bits("1"))
    assert sol.to_array().tolist() == [0, 1]
    assert gf2.lex_min_solution(BitMatrix.from_rows(["10", "10"]), BitVector.from_bits("01")) is None


@settings(max_examples=100, deadline=None)
@given(dense_matrices(5, 6), st.integers(0, 2**31))
def test_lex_min_solution_is_the_smallest_preimage(dense, seed):
    M = BitMatrix.from_dense(dense)
    n = dense.shape[1]
    x = np.random.default_rng(seed).integers(0, 2, n, dtype=np.uint8)
    b = BitVector.from_bits(dense.astype(int) @ x % 2)
    sols = []
    for bits in itertools.product((0, 1), repeat=n):
        v = BitVector.from_bits(np.array(bits, dtype=np.uint8))
        if M @ v == b:
            sols.append(v)
    best = min(sols, key=lambda v: v.lex_key())
    assert gf2.lex_min_solution(M, b) == best


# -- intersection, complement, submatrix --------------------------------------

def test_intersection_examples():
    assert gf2.intersection_dim(BitMatrix.from_rows(["11"]), BitMatrix.identity(2)) == 1
    assert gf2.intersection_dim(BitMatrix.from_rows(["11"]), BitMatrix.zeros(2, 2)) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31))
def test_intersection_dim_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(0, 2, (6, 6), dtype=np.uint8)
    B = rng.integers(0, 2, (6, 6), dtype=np.uint8)
    kerA = brute_kernel(A)
    colB = {tuple((B.astype(int) @ np.array(c) % 2).tolist()) for c in itertools.product((0, 1), repeat=6)}
    size = len(kerA & colB)
    assert 2 ** gf2.intersection_dim(BitMatrix.from_dense(A), BitMatrix.from_dense(B)) == size


def test_orthogonal_complement_examples():
    assert gf2.orthogonal_complement_generator(BitMatrix.identity(4)).shape == (4, 0)
    hp = gf2.orthogonal_complement_generator(K3)
    assert hp.to_dense().T.tolist() == [[1, 1, 1]]


@settings(max_examples=80, deadline=None)
@given(dense_matrices())
def test_orthogonal_complement_dimension_formula(dense):
    h = BitMatrix.from_dense(dense)
    hp = gf2.orthogonal_complement_generator(h)
    c = dense.shape[0]
    assert hp.shape == (c, c - gf2.rank(h))
    assert (h.T @ hp).is_zero()
    assert gf2.rank(hp) == hp.shape[1]


def test_row_submatrix():
    assert gf2.row_submatrix(K3, range(3)) == K3
    empty = gf2.row_submatrix(K3, [])
    assert empty.shape == (0, 3) and gf2.kernel_dim(empty) == 3
    assert gf2.kernel_dim(gf2.row_submatrix(K3, [0])) == 2


def test_matrix_text_roundtrip(tmp_path):
    M = BitMatrix.from_dense(np.random.default_rng(3).integers(0, 2, (4, 9), dtype=np.uint8))
    path = tmp_path / "m.txt"
    gf2.write_matrix(M, path)
    assert gf2.read_matrix(path) == M
    with pytest.raises(ValueError):
        gf2.parse_matrix(["2 2", "10", "1"])
