"""Markov chain kernels for code Gibbs and random-cluster sampling.

Configurations ``x`` are :class:`BitVector` objects; check subsets ``A`` are
Python ints used as bitmasks over check indices (bit ``e`` set iff ``e in A``).
Every kernel draws a fixed number of uniforms per step, so a batched run and a
loop of single steps on the same generator produce identical trajectories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .codes import ParityCheckCode
from .gf2 import BitVector, lex_min_solution

CHAINS = ("sw", "sw-rc", "metropolis-rc", "single-check", "glauber")
RC_CHAINS = ("sw-rc", "metropolis-rc", "single-check")
_RC_KIND = {"sw-rc": 0, "metropolis-rc": 1, "single-check": 2}

# Uniform draws per chunk when batching; bounds memory at ~16 MB per chunk.
_CHUNK_DOUBLES = 1 << 21


def p_from_beta(beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if math.isinf(beta):
        return 1.0
    return -math.expm1(-2.0 * beta)


def beta_from_p(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 1.0:
        return math.inf
    return -0.5 * math.log1p(-p)


@dataclass(frozen=True)
class ChainParams:
    """Inverse temperature and derived bond probability ``p = 1 - exp(-2 beta)``."""

    beta: float
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @classmethod
    def from_p(cls, p: float, seed: Optional[int] = None) -> "ChainParams":
        return cls(beta_from_p(p), seed)

    @property
    def p(self) -> float:
        return p_from_beta(self.beta)

    @property
    def log_ratio(self) -> float:
        """``log(p / (1 - p))``, infinite at the endpoints."""
        p = self.p
        if p == 0.0:
            return -math.inf
        if p == 1.0:
            return math.inf
        return math.log(p) - math.log1p(-p)


@dataclass(frozen=True)
class LiftParams:
    """Weight parameter of the even-cover model used by a primal or dual lift."""

    direction: str
    p: float

    def __post_init__(self):
        if self.direction not in ("primal", "dual"):
            raise ValueError(f"direction must be 'primal' or 'dual', got {self.direction!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    @property
    def weight(self) -> float:
        """``p/2`` for primal lifts, ``(1-p)/(2-p)`` for dual lifts; always in [0, 1/2]."""
        if self.direction == "primal":
            return self.p / 2
        return (1 - self.p) / (2 - self.p)

    @property
    def add_probability(self) -> float:
        w = self.weight
        return w / (1 - w)


# -- state conversion --------------------------------------------------------


def _mask_to_bool(A: int, c: int) -> np.ndarray:
    if A < 0 or A >> c:
        raise ValueError(f"check subset {A:#x} has bits outside 0..{c - 1}")
    return np.array([(A >> e) & 1 for e in range(c)], dtype=np.bool_)


def _bool_to_mask(arr: np.ndarray) -> int:
    out = 0
    for e in np.flatnonzero(arr):
        out |= 1 << int(e)
    return out


def _vector_words(code: ParityCheckCode, x: BitVector) -> np.ndarray:
    if len(x) != code.n:
        raise ValueError(f"configuration has length {len(x)}, code has n = {code.n}")
    return x.words.copy()


def _csr_columns(code: ParityCheckCode) -> tuple[np.ndarray, np.ndarray]:
    supports = code.column_supports
    ptr = np.zeros(code.n + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(s) for s in supports])
    rows = np.concatenate(supports).astype(np.int64) if code.n else np.zeros(0, np.int64)
    return ptr, rows


def uniforms_per_step(code: ParityCheckCode, chain: str) -> int:
    if chain == "sw":
        return code.c + code.n
    if chain == "sw-rc":
        return code.n + code.c
    if chain in ("metropolis-rc", "single-check"):
        return 3
    if chain == "glauber":
        return 2
    raise ValueError(f"unknown chain {chain!r}; choose from {', '.join(CHAINS)}")


# -- single steps ------------------------------------------------------------


def sw_step(code: ParityCheckCode, params: ChainParams, x: BitVector, rng: np.random.Generator) -> BitVector:
    """Cluster formation on the satisfied checks, then a uniform kernel sample of ``h_A``."""
    u = rng.random(code.c + code.n)
    w = K.sw_step(code.h.words, code.n, _vector_words(code, x), params.p, u)
    return BitVector(code.n, w)


def sw_rc_step(code: ParityCheckCode, params: ChainParams, A: int, rng: np.random.Generator) -> int:
    """Cluster update from ``A`` followed by cluster formation."""
    u = rng.random(code.n + code.c)
    out = K.sw_rc_step(code.h.words, code.n, _mask_to_bool(A, code.c), params.p, u)
    return _bool_to_mask(out)


def metropolis_rc_step(code: ParityCheckCode, params: ChainParams, A: int, rng: np.random.Generator) -> int:
    u = rng.random(3)
    out = K.metropolis_rc_step(code.h.words, code.n, _mask_to_bool(A, code.c), params.log_ratio, u)
    return _bool_to_mask(out)


def single_check_step(code: ParityCheckCode, params: ChainParams, A: int, rng: np.random.Generator) -> int:
    u = rng.random(3)
    out = K.single_check_step(code.h.words, code.n, _mask_to_bool(A, code.c), params.p, u)
    return _bool_to_mask(out)


def glauber_step(code: ParityCheckCode, params: ChainParams, x: BitVector, rng: np.random.Generator) -> BitVector:
    """Single-variable Metropolis flip with acceptance ``min(1, exp(-beta dH))``."""
    run = run_chain(code, "glauber", params, 1, rng, x0=x)
    return run.final


# -- lifts -------------------------------------------------------------------


def is_even_cover(code: ParityCheckCode, W: int) -> bool:
    v = BitVector.from_int(W, code.c)
    return not (code.h.T @ v).any()


def in_column_space(code: ParityCheckCode, S: int) -> bool:
    return lex_min_solution(code.h, BitVector.from_int(S, code.c)) is not None


def _add_independently(W: int, c: int, q: float, u: np.ndarray) -> int:
    out = W
    for e in range(c):
        if not (W >> e) & 1 and u[e] < q:
            out |= 1 << e
    return out


def primal_lift_sample(code: ParityCheckCode, p: float, W: int, rng: np.random.Generator) -> int:
    """Add each check outside the even cover ``W`` with probability ``(p/2)/(1-p/2)``."""
    if not is_even_cover(code, W):
        raise ValueError("W is not an even cover of the code")
    q = LiftParams("primal", p).add_probability
    return _add_independently(W, code.c, q, rng.random(code.c))


def dual_lift_sample(code: ParityCheckCode, p: float, S: int, rng: np.random.Generator) -> int:
    """Add each check outside the syndrome support ``S`` with probability ``1-p``,
    then return the complement."""
    if not in_column_space(code, S):
        raise ValueError("S is not in the column space of h")
    q = LiftParams("dual", p).add_probability
    B = _add_independently(S, code.c, q, rng.random(code.c))
    return ((1 << code.c) - 1) ^ B


# -- batched runs ------------------------------------------------------------


@dataclass
class ChainRun:
    """Outcome of :func:`run_chain`: per-step observable, final state, optional states.

    The observable is the energy ``2|hx|`` for configuration chains and ``|A|``
    for random-cluster chains.  ``states`` rows are bit arrays (uint8 for
    configurations, bool for check subsets).
    """

    chain: str
    observable: np.ndarray
    final: object
    states: Optional[np.ndarray] = None

    @property
    def observable_name(self) -> str:
        return "size" if self.chain in RC_CHAINS else "energy"


def _chunks(steps: int, width: int):
    per = max(1, _CHUNK_DOUBLES // max(width, 1))
    done = 0
    while done < steps:
        k = min(per, steps - done)
        yield done, k
        done += k


def run_chain(
    code: ParityCheckCode,
    chain: str,
    params: ChainParams,
    steps: int,
    rng: np.random.Generator,
    x0: Optional[BitVector] = None,
    A0: int = 0,
    record_states: bool = False,
) -> ChainRun:
    """Run ``steps`` transitions of ``chain`` from ``x0`` (default zero) or ``A0``."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    width = uniforms_per_step(code, chain)
    obs = np.zeros(steps, dtype=np.int64)

    if chain in RC_CHAINS:
        A = _mask_to_bool(A0, code.c)
        states = np.zeros((steps if record_states else 0, code.c), dtype=np.bool_)
        kind = _RC_KIND[chain]
        for start, k in _chunks(steps, width):
            U = rng.random((k, width))
            st = states[start:start + k] if record_states else states
            A = K.run_rc(kind, code.h.words, code.n, A, params.p, params.log_ratio, U, obs[start:start + k], st)
        return ChainRun(chain, obs, _bool_to_mask(A), states if record_states else None)

    x = x0 if x0 is not None else BitVector.zeros(code.n)
    if chain == "sw":
        w = _vector_words(code, x)
        states = np.zeros((steps if record_states else 0, w.shape[0]), dtype=np.uint64)
        for start, k in _chunks(steps, width):
            U = rng.random((k, width))
            st = states[start:start + k] if record_states else states
            w = K.run_sw(code.h.words, code.n, w, params.p, U, obs[start:start + k], st)
        final = BitVector(code.n, w)
        if record_states:
            states = _words_to_bits(states, code.n)
        return ChainRun(chain, obs, final, states if record_states else None)

    if chain == "glauber":
        bits = x.to_array().astype(np.uint8)
        if len(bits) != code.n:
            raise ValueError(f"configuration has length {len(bits)}, code has n = {code.n}")
        synd = code.syndrome(x).to_array().astype(np.uint8)
        ptr, rows = _csr_columns(code)
        states = np.zeros((steps if record_states else 0, code.n), dtype=np.uint8)
        for start, k in _chunks(steps, width):
            U = rng.random((k, width))
            st = states[start:start + k] if record_states else states
            K.glauber_run(ptr, rows, code.n, bits, synd, params.beta, U, obs[start:start + k], st)
        return ChainRun(chain, obs, BitVector.from_bits(bits), states if record_states else None)

    raise ValueError(f"unknown chain {chain!r}")


def _words_to_bits(words: np.ndarray, n: int) -> np.ndarray:
    if words.shape[0] == 0:
        return np.zeros((0, n), dtype=np.uint8)
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :n]


def states_to_ints(states: np.ndarray) -> np.ndarray:
    """Encode bit-array rows as little-endian integers (for ``n`` or ``c`` <= 62)."""
    weights = (np.ones(states.shape[1], dtype=np.int64) << np.arange(states.shape[1], dtype=np.int64))
    return states.astype(np.int64) @ weights
