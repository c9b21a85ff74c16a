"""Symplectic stabilizer bookkeeping and an exact small-n simulator of the
measure-correct-perturb quantum Gibbs sampler.

A Pauli label is a ``2n``-bit vector ``(x|z)`` standing for
``P(x, z) = i^{x.z} X(x) Z(z)``, which is Hermitian.  Phases of products are
discarded; conjugation ``P rho P`` does not see them.  Qubit 0 is the leftmost
tensor factor of dense matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .codes import ParityCheckCode
from .gf2 import BitMatrix, BitVector, kernel_basis, lex_min_solution

DENSE_LIMIT = 8
JOINT_LIMIT = 4

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_FACTORS = (_I, _X, _Z, 1j * _X @ _Z)


@dataclass(frozen=True)
class PauliLabel:
    x: BitVector
    z: BitVector

    def __post_init__(self):
        if len(self.x) != len(self.z):
            raise ValueError("x and z parts must have equal length")

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def from_vector(cls, v: BitVector) -> "PauliLabel":
        if len(v) % 2:
            raise ValueError("symplectic vector must have even length")
        n = len(v) // 2
        bits = v.to_array()
        return cls(BitVector.from_bits(bits[:n]), BitVector.from_bits(bits[n:]))

    @classmethod
    def from_string(cls, s: str) -> "PauliLabel":
        """Parse ``"XZIY"``-style strings."""
        xs = [1 if ch in "XY" else 0 for ch in s]
        zs = [1 if ch in "ZY" else 0 for ch in s]
        if any(ch not in "IXYZ" for ch in s):
            raise ValueError(f"bad Pauli string {s!r}")
        return cls(BitVector.from_bits(xs), BitVector.from_bits(zs))

    def vector(self) -> BitVector:
        return BitVector.from_bits(np.concatenate([self.x.to_array(), self.z.to_array()]))

    def __mul__(self, other: "PauliLabel") -> "PauliLabel":
        return PauliLabel(self.x ^ other.x, self.z ^ other.z)

    def __str__(self) -> str:
        return "".join("IXZY"[a + 2 * b] for a, b in zip(self.x, self.z))


def symplectic_product(a: PauliLabel, b: PauliLabel) -> int:
    """0 iff the two Pauli operators commute."""
    if a.n != b.n:
        raise ValueError("labels act on different numbers of qubits")
    return (a.x.dot(b.z) + a.z.dot(b.x)) & 1


def _swap_halves(g: BitMatrix) -> BitMatrix:
    n = g.cols // 2
    dense = g.to_dense()
    return BitMatrix.from_dense(np.hstack([dense[:, n:], dense[:, :n]]))


class StabilizerModel:
    """Commuting stabilizer generators ``g`` (c x 2n) with ``h = g omega``.

    ``h @ e`` is the syndrome of error label ``e``.
    """

    def __init__(self, g: BitMatrix, name: Optional[str] = None):
        if g.cols % 2 or g.cols == 0 or g.rows == 0:
            raise ValueError(f"stabilizer matrix must be c x 2n with c, n >= 1, got {g.shape}")
        self.g = g
        self.h = _swap_halves(g)
        self.name = name or f"stabilizer{g.rows}x{g.cols // 2}"
        gram = g @ self.h.T
        if not gram.is_zero():
            i, j = map(int, np.argwhere(gram.to_dense())[0])
            raise ValueError(f"stabilizer rows {i} and {j} anticommute")

    @property
    def n(self) -> int:
        return self.g.cols // 2

    @property
    def c(self) -> int:
        return self.g.rows

    @property
    def k(self) -> int:
        return self.n - self.g.rank

    @cached_property
    def classical_code(self) -> ParityCheckCode:
        """The classical code on ``2n`` bits whose syndromes are the stabilizer syndromes."""
        return ParityCheckCode(self.h, name=f"{self.name}.h")

    def row(self, i: int) -> PauliLabel:
        return PauliLabel.from_vector(self.g.row(i))

    def syndrome(self, e: PauliLabel) -> BitVector:
        return self.h @ e.vector()

    def __repr__(self) -> str:
        return f"StabilizerModel({self.name!r}, n={self.n}, c={self.c}, k={self.k})"


def build_stabilizer(g: BitMatrix, name: Optional[str] = None) -> StabilizerModel:
    return StabilizerModel(g, name)


def css_model(hx: BitMatrix, hz: BitMatrix, name: Optional[str] = None) -> StabilizerModel:
    """Rows ``(hX | 0)`` and ``(0 | hZ)``."""
    if hx.cols != hz.cols:
        raise ValueError("hX and hZ act on different numbers of qubits")
    top = hx.hstack(BitMatrix.zeros(hx.rows, hx.cols))
    bottom = BitMatrix.zeros(hz.rows, hz.cols).hstack(hz)
    return StabilizerModel(top.vstack(bottom), name)


def representative_error(model: StabilizerModel, s: BitVector) -> PauliLabel:
    """Lexicographically first error label with syndrome ``s``."""
    e = lex_min_solution(model.h, s)
    if e is None:
        raise ValueError(f"syndrome {s} is not reachable")
    return PauliLabel.from_vector(e)


def logical_representatives(model: StabilizerModel) -> list[PauliLabel]:
    """One label per coset of ``row(g)`` inside ``ker(h)``: ``2^{2k}`` labels."""
    basis_rows = [model.g.row(i) for i in range(model.c)]
    chosen: list[BitVector] = []
    current = BitMatrix.from_rows(basis_rows, 2 * model.n) if basis_rows else BitMatrix.zeros(0, 2 * model.n)
    r = current.rank
    for v in kernel_basis(model.h):
        trial = current.vstack(BitMatrix.from_rows([v], 2 * model.n))
        if trial.rank > r:
            chosen.append(v)
            current, r = trial, r + 1
    out = []
    for bits in itertools.product((0, 1), repeat=len(chosen)):
        acc = BitVector.zeros(2 * model.n)
        for b, v in zip(bits, chosen):
            if b:
                acc = acc ^ v
        out.append(PauliLabel.from_vector(acc))
    return out


# -- dense matrices ----------------------------------------------------------


def pauli_matrix(label: PauliLabel) -> np.ndarray:
    """Dense ``i^{x.z} X(x) Z(z)``."""
    if label.n > DENSE_LIMIT:
        raise ValueError(f"dense matrices limited to n <= {DENSE_LIMIT}")
    # i^{x.z} X(x) Z(z) factorizes into I, X, Z and Y = i X Z per qubit.
    out = np.ones((1, 1), dtype=complex)
    for a, b in zip(label.x, label.z):
        out = np.kron(out, _FACTORS[a + 2 * b])
    return out


def hamiltonian_matrix(model: StabilizerModel) -> np.ndarray:
    """``H = -sum_i P(g_i)``."""
    _check_dense(model.n)
    return -sum(pauli_matrix(model.row(i)) for i in range(model.c))


def syndrome_projector(model: StabilizerModel, s: BitVector) -> np.ndarray:
    """``prod_i (I + (-1)^{s_i} P(g_i)) / 2``."""
    _check_dense(model.n)
    d = 1 << model.n
    out = np.eye(d, dtype=complex)
    for i in range(model.c):
        out = out @ (np.eye(d) + (-1) ** s[i] * pauli_matrix(model.row(i))) / 2
    return out


def _check_dense(n: int, limit: int = DENSE_LIMIT) -> None:
    if n > limit:
        raise ValueError(f"dense simulation limited to n <= {limit}, got n = {n}")


@dataclass
class DenseState:
    """Density matrix on ``n`` qubits."""

    rho: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        d = self.rho.shape[0]
        if self.rho.shape != (d, d) or d & (d - 1):
            raise ValueError("density matrix must be square with power-of-two size")
        _check_dense(self.n)

    @property
    def n(self) -> int:
        return self.rho.shape[0].bit_length() - 1

    def validate(self, tol: float = 1e-10) -> None:
        if np.abs(self.rho - self.rho.conj().T).max() > tol:
            raise ValueError("state is not Hermitian")
        if abs(np.trace(self.rho) - 1) > tol:
            raise ValueError("state does not have unit trace")
        if np.linalg.eigvalsh((self.rho + self.rho.conj().T) / 2).min() < -tol:
            raise ValueError("state is not positive semidefinite")

    def trace_distance(self, other: "DenseState | np.ndarray") -> float:
        sigma = other.rho if isinstance(other, DenseState) else other
        diff = self.rho - sigma
        return 0.5 * float(np.abs(np.linalg.eigvalsh((diff + diff.conj().T) / 2)).sum())

    @classmethod
    def pure(cls, psi: np.ndarray) -> "DenseState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def exact_gibbs_state(model: StabilizerModel, beta: float) -> DenseState:
    """``exp(-beta H) / Z`` by diagonalizing the Pauli-sum Hamiltonian."""
    H = hamiltonian_matrix(model)
    lam, V = np.linalg.eigh(H)
    w = np.exp(-beta * (lam - lam.min()))
    rho = (V * w) @ V.conj().T
    return DenseState(rho / np.trace(rho).real)


def gibbs_from_syndromes(model: StabilizerModel, beta: float) -> DenseState:
    """``sum_s exp(-2 beta |s|) Pi(g, s)`` normalized (second construction route)."""
    _check_dense(model.n)
    d = 1 << model.n
    rho = np.zeros((d, d), dtype=complex)
    for bits in itertools.product((0, 1), repeat=model.c):
        s = BitVector.from_bits(bits)
        rho += math.exp(-2 * beta * s.weight) * syndrome_projector(model, s)
    return DenseState(rho / np.trace(rho).real)


def code_state(model: StabilizerModel) -> DenseState:
    """A pure state in the code space (the normalized first nonzero column of ``Pi(g, 0)``)."""
    P0 = syndrome_projector(model, BitVector.zeros(model.c))
    j = int(np.argmax(np.linalg.norm(P0, axis=0)))
    return DenseState.pure(P0[:, j])


# -- exact channel -----------------------------------------------------------


def _label_from_int(y: int, n: int) -> PauliLabel:
    return PauliLabel.from_vector(BitVector.from_int(y, 2 * n))


class ExactSampler:
    """Precomputed operators for exact iteration of the sampler on ``n <= 4`` qubits.

    The joint state is an array ``J[y]`` of unnormalized density matrices, one per
    classical label ``y`` (little-endian int over the ``2n`` label bits); the total
    trace is one.
    """

    def __init__(self, model: StabilizerModel):
        _check_dense(model.n, JOINT_LIMIT)
        self.model = model
        n = model.n
        self.paulis = np.stack([pauli_matrix(_label_from_int(y, n)) for y in range(1 << (2 * n))])
        self.branches = []  # (projector, correction) per reachable syndrome
        for bits in itertools.product((0, 1), repeat=model.c):
            s = BitVector.from_bits(bits)
            Pi = syndrome_projector(model, s)
            if np.abs(Pi).max() < 1e-12:
                continue
            E = pauli_matrix(representative_error(model, s))
            self.branches.append((Pi, E))

    def measure_and_correct(self, sigma: np.ndarray) -> np.ndarray:
        """``sum_s E(s) Pi_s sigma Pi_s E(s)`` (batched over leading axes)."""
        out = np.zeros_like(sigma)
        for Pi, E in self.branches:
            K = E @ Pi
            out += K @ sigma @ K.conj().T
        return out

    def initial(self, rho0: DenseState, x0: int = 0) -> np.ndarray:
        J = np.zeros((len(self.paulis),) + rho0.rho.shape, dtype=complex)
        J[x0] = rho0.rho
        return J

    def step(self, Q: np.ndarray, J: np.ndarray) -> np.ndarray:
        """One exact step: ``J'[y] = P(y) C(sum_x Q(x,y) J[x]) P(y)``."""
        mixed = np.einsum("xy,xab->yab", Q, J)
        corrected = self.measure_and_correct(mixed)
        return self.paulis @ corrected @ self.paulis.conj().transpose(0, 2, 1)

    @staticmethod
    def marginal(J: np.ndarray) -> np.ndarray:
        return J.sum(axis=0)


def algorithm1_channel_step(model: StabilizerModel, Q: np.ndarray, J: np.ndarray,
                            sampler: Optional[ExactSampler] = None) -> np.ndarray:
    sampler = sampler or ExactSampler(model)
    return sampler.step(Q, J)


def exact_run(model: StabilizerModel, Q: np.ndarray, beta: float, steps: int,
              rho0: Optional[DenseState] = None, x0: int = 0) -> np.ndarray:
    """Trace distance of the quantum register to the Gibbs state after ``0..steps`` steps."""
    sampler = ExactSampler(model)
    target = exact_gibbs_state(model, beta)
    if rho0 is None:
        d = 1 << model.n
        psi = np.zeros(d)
        psi[0] = 1.0
        rho0 = DenseState.pure(psi)
    J = sampler.initial(rho0, x0)
    out = np.empty(steps + 1)
    for t in range(steps + 1):
        if t:
            J = sampler.step(Q, J)
        out[t] = DenseState(sampler.marginal(J)).trace_distance(target)
    return out


# -- trajectory sampling -----------------------------------------------------


def trajectory_sampler(model: StabilizerModel, chain: str, beta: float, steps: int,
                       rng: np.random.Generator, s0: Optional[BitVector] = None,
                       x0: Optional[BitVector] = None) -> np.ndarray:
    """Measured syndromes of ``steps + 1`` rounds in the Pauli frame.

    Round 0 measures the initial state (syndrome ``s0``, default zero).  After each
    round the state is ``P(y)`` applied to a code state, with ``y`` the classical
    chain's position, so the next measurement returns ``h y``.  Returns a
    ``(steps + 1) x c`` uint8 array.
    """
    from .dynamics import ChainParams, run_chain

    code = model.classical_code
    run = run_chain(code, chain, ChainParams(beta), steps, rng, x0=x0, record_states=True)
    out = np.zeros((steps + 1, model.c), dtype=np.uint8)
    if s0 is not None:
        out[0] = s0.to_array()
    if steps:
        out[1:] = (run.states.astype(np.int64) @ model.h.to_dense().T.astype(np.int64)) % 2
    return out


# -- file format -------------------------------------------------------------


def parse_stabilizer(lines: Sequence[str]) -> StabilizerModel:
    if not lines:
        raise ValueError("empty stabilizer file")
    c, n = (int(t) for t in lines[0].split())
    rows = lines[1:]
    if len(rows) != c:
        raise ValueError(f"header declares {c} rows, found {len(rows)}")
    for i, r in enumerate(rows):
        if len(r) != 2 * n or set(r) - {"0", "1"}:
            raise ValueError(f"row {i} must be a {2 * n}-bit 0/1 string")
    return StabilizerModel(BitMatrix.from_rows(rows, 2 * n))


def read_stabilizer(path) -> StabilizerModel:
    """Read ``c n`` followed by one ``2n``-bit row (x part, then z part) per generator."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    model = parse_stabilizer(lines)
    model.name = str(path)
    return model


def format_stabilizer(model: StabilizerModel) -> str:
    lines = [f"{model.c} {model.n}"]
    for row in model.g.to_dense():
        lines.append("".join(str(int(b)) for b in row))
    return "\n".join(lines) + "\n"


def write_stabilizer(model: StabilizerModel, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_stabilizer(model))
