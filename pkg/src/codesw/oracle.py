"""Exhaustive-enumeration ground truth for small instances.

Everything here is assembled directly from the defining weights and case rules.
Ranks are computed by a separate integer-bitmask elimination rather than the
packed kernels, so comparisons against :mod:`codesw.dynamics` are two
independent routes to the same numbers.

State encoding: a configuration or check subset is an int whose bit ``j`` is
coordinate ``j``; state lists are in increasing integer order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from .codes import Graph, ParityCheckCode, certify_graphic, incidence_matrix
from .gf2 import BitMatrix

DEFAULT_TOL = 1e-10
OPERATOR_TOL = 1e-12
MAX_STATES = 1 << 14
KERNELS = ("sw", "sw-rc", "metropolis-rc", "single-check", "glauber", "worm")
FAULTS = ("metropolis-inverted",)


# -- small GF(2) helpers on int bitmasks --------------------------------------


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a.astype(np.uint64)).astype(np.int64)


def _rank_of_ints(rows: Sequence[int]) -> int:
    """Rank of GF(2) vectors given as ints (xor basis keyed by leading bit)."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def _span_of_ints(gens: Sequence[int]) -> list[int]:
    span = {0}
    for g in gens:
        if g not in span:
            span |= {s ^ g for s in span}
    return sorted(span)


class _Tables:
    """Row/column bitmasks, syndromes and ``k(A)`` for a small code."""

    def __init__(self, code: ParityCheckCode):
        dense = code.h.to_dense().astype(np.int64)
        self.c, self.n = dense.shape
        self.dense = dense
        self.row_ints = [int(sum(int(b) << j for j, b in enumerate(r))) for r in dense]
        self.col_ints = [int(sum(int(b) << i for i, b in enumerate(col))) for col in dense.T]

    @cached_property
    def syndromes(self) -> np.ndarray:
        """``synd[x]`` = integer encoding of ``hx`` for every configuration ``x``."""
        if self.n > 22:
            raise ValueError(f"n = {self.n} is too large to enumerate configurations")
        synd = np.zeros(1 << self.n, dtype=np.int64)
        for j, col in enumerate(self.col_ints):
            step = 1 << j
            synd[step:2 * step] = synd[:step] ^ col
        return synd

    @cached_property
    def k_table(self) -> np.ndarray:
        """``k(A) = n - rank(h_A)`` for every check subset ``A``."""
        if self.c > 22:
            raise ValueError(f"c = {self.c} is too large to enumerate check subsets")
        out = np.empty(1 << self.c, dtype=np.int64)
        for A in range(1 << self.c):
            out[A] = self.n - _rank_of_ints([self.row_ints[e] for e in range(self.c) if (A >> e) & 1])
        return out

    @cached_property
    def sizes(self) -> np.ndarray:
        return _popcount(np.arange(1 << self.c))

    @property
    def full(self) -> int:
        return (1 << self.c) - 1


# -- distributions -----------------------------------------------------------


@dataclass
class ExactDistribution:
    """Normalized probability table over integer-encoded states."""

    states: np.ndarray
    probs: np.ndarray
    nbits: int
    label: str = ""

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int64)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.states.shape != self.probs.shape:
            raise ValueError("states and probs must align")
        if np.any(self.probs < 0) or abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")

    @classmethod
    def from_log_weights(cls, states, logw, nbits: int, label: str = "") -> "ExactDistribution":
        logw = np.asarray(logw, dtype=np.float64)
        probs = np.exp(logw - logsumexp(logw))
        return cls(states, probs / probs.sum(), nbits, label)

    @classmethod
    def point_mass(cls, state: int, nbits: int, label: str = "") -> "ExactDistribution":
        return cls(np.array([state]), np.array([1.0]), nbits, label)

    def dense(self) -> np.ndarray:
        """Probability vector over all ``2**nbits`` states."""
        out = np.zeros(1 << self.nbits)
        out[self.states] = self.probs
        return out

    def on(self, states: np.ndarray) -> np.ndarray:
        """Probabilities of the given states (zero for states outside the support)."""
        lookup = dict(zip(self.states.tolist(), self.probs.tolist()))
        return np.array([lookup.get(int(s), 0.0) for s in states])

    def l1(self, other: "ExactDistribution") -> float:
        keys = np.union1d(self.states, other.states)
        return float(np.abs(self.on(keys) - other.on(keys)).sum())

    def tv(self, other: "ExactDistribution") -> float:
        return 0.5 * self.l1(other)

    def pushforward(self, fn, nbits: int, label: str = "") -> "ExactDistribution":
        images = np.array([fn(int(s)) for s in self.states], dtype=np.int64)
        keys, inv = np.unique(images, return_inverse=True)
        probs = np.bincount(inv, weights=self.probs, minlength=len(keys))
        return ExactDistribution(keys, probs / probs.sum(), nbits, label)

    @property
    def min_prob(self) -> float:
        return float(self.probs[self.probs > 0].min())


def _log_ratio(p: float) -> float:
    if p <= 0.0:
        return -math.inf
    if p >= 1.0:
        return math.inf
    return math.log(p) - math.log1p(-p)


def enumerate_gibbs(code: ParityCheckCode, beta: float) -> ExactDistribution:
    """``pi(x) ∝ exp(-beta 2|hx|)`` over all ``2**n`` configurations."""
    t = _Tables(code)
    energy = 2 * _popcount(t.syndromes)
    states = np.arange(1 << t.n)
    if math.isinf(beta):
        ground = energy == 0
        return ExactDistribution(states[ground], np.full(ground.sum(), 1.0 / ground.sum()), t.n, "pi")
    return ExactDistribution.from_log_weights(states, -beta * energy, t.n, "pi")


def enumerate_rc(code: ParityCheckCode, p: float) -> ExactDistribution:
    """``phi(A) ∝ (p/(1-p))^|A| 2^k(A)`` over all check subsets."""
    t = _Tables(code)
    if p == 0.0:
        return ExactDistribution.point_mass(0, t.c, "phi")
    if p == 1.0:
        return ExactDistribution.point_mass(t.full, t.c, "phi")
    states = np.arange(1 << t.c)
    logw = t.sizes * _log_ratio(p) + t.k_table * math.log(2.0)
    return ExactDistribution.from_log_weights(states, logw, t.c, "phi")


def even_cover_space(M: BitMatrix) -> list[int]:
    """All vectors of ``ker(M^T)`` as ints over the ``M.rows`` coordinates."""
    cols = [int(sum(int(b) << i for i, b in enumerate(col))) for col in M.to_dense().T]
    c = M.rows
    # ker(M^T) = orthogonal complement of span(columns); enumerate via a basis.
    basis = _complement_basis(cols, c)
    if len(basis) > 20:
        raise ValueError(f"even-cover space has dimension {len(basis)} > 20")
    return _span_of_ints(basis)


def _complement_basis(gens: Sequence[int], c: int) -> list[int]:
    """Basis of ``{v : <v, g> = 0 for all g}`` in GF(2)^c."""
    # Reduced row echelon of the generators over bitmasks, pivots at lowest set bit.
    rows: list[int] = []
    for g in gens:
        for r in rows:
            if g & (r & -r):
                g ^= r
        if g:
            lead = g & -g
            rows = [r ^ g if r & lead else r for r in rows]
            rows.append(g)
    pivots = {(r & -r).bit_length() - 1: r for r in rows}
    basis = []
    for f in range(c):
        if f in pivots:
            continue
        v = 1 << f
        for j, r in pivots.items():
            if (r >> f) & 1:
                v |= 1 << j
        basis.append(v)
    return basis


def enumerate_even_covers(M: BitMatrix | ParityCheckCode, p: float) -> ExactDistribution:
    """``xi_{M,p}(A) ∝ (p/(1-p))^|A|`` on ``ker(M^T)``, iterating the kernel directly."""
    if isinstance(M, ParityCheckCode):
        M = M.h
    states = np.array(even_cover_space(M), dtype=np.int64)
    sizes = _popcount(states)
    if p == 0.0:
        return ExactDistribution.point_mass(0, M.rows, "xi")
    if p == 1.0:
        top = states[sizes == sizes.max()]
        return ExactDistribution(top, np.full(len(top), 1.0 / len(top)), M.rows, "xi")
    return ExactDistribution.from_log_weights(states, sizes * _log_ratio(p), M.rows, "xi")


def enumerate_syndromes(code: ParityCheckCode, beta: float) -> ExactDistribution:
    """Law of ``hx`` under the Gibbs distribution."""
    t = _Tables(code)
    pi = enumerate_gibbs(code, beta)
    synd = t.syndromes
    return pi.pushforward(lambda x: int(synd[x]), t.c, "zeta")


def dual_generator(code: ParityCheckCode) -> BitMatrix:
    """Columns spanning ``col(h)^⊥``, computed by the oracle's own elimination."""
    t = _Tables(code)
    cols = [int(sum(int(b) << i for i, b in enumerate(col))) for col in t.dense.T]
    basis = _complement_basis(cols, t.c)
    dense = np.zeros((t.c, len(basis)), dtype=np.uint8)
    for j, v in enumerate(basis):
        for i in range(t.c):
            dense[i, j] = (v >> i) & 1
    return BitMatrix.from_dense(dense)


def enumerate_fk(code: ParityCheckCode, p: float) -> np.ndarray:
    """Joint FK table ``mu[A, x] ∝ (p/(1-p))^|A| 1(A ⊆ E(x))`` for ``0 < p < 1``."""
    t = _Tables(code)
    synd = t.syndromes
    A = np.arange(1 << t.c)[:, None]
    allowed = (A & synd[None, :]) == 0
    w = np.where(allowed, np.exp(t.sizes[:, None] * _log_ratio(p)), 0.0)
    return w / w.sum()


def _defect_counts(G: Graph) -> np.ndarray:
    """Number of odd-degree vertices for every edge subset of ``G``."""
    c = G.n_edges
    if c > 22:
        raise ValueError("too many edges to enumerate")
    parity = np.zeros(1 << c, dtype=np.int64)  # vertex-parity bitmask per subset
    for e, (u, v) in enumerate(G.edges):
        step = 1 << e
        parity[step:2 * step] = parity[:step] ^ ((1 << u) | (1 << v))
    return np.array([int(x).bit_count() for x in parity], dtype=np.int64)


def enumerate_worm(G: Graph, p_weight: float) -> ExactDistribution:
    """``omega_g``: ``w(S) = (p'/(1-p'))^|S|``, divided by ``C(m,2)`` on two-defect states."""
    d = _defect_counts(G)
    states = np.flatnonzero((d == 0) | (d == 2))
    pairs = math.comb(G.m, 2)
    if pairs == 0:
        states = states[d[states] == 0]
    sizes = _popcount(states)
    logw = sizes * _log_ratio(p_weight) if p_weight > 0 else np.where(sizes == 0, 0.0, -np.inf)
    logw = logw - np.where(d[states] == 2, math.log(pairs) if pairs else 0.0, 0.0)
    keep = np.isfinite(logw)
    return ExactDistribution.from_log_weights(states[keep], logw[keep], G.n_edges, "omega")


def lift_pushforward(source: ExactDistribution, q: float, direction: str) -> ExactDistribution:
    """Add every check outside ``W`` independently with probability ``q``; complement for dual."""
    c = source.nbits
    full = (1 << c) - 1
    B = np.arange(1 << c)
    sizeB = _popcount(B)
    out = np.zeros(1 << c)
    for W, pw in zip(source.states.tolist(), source.probs.tolist()):
        sup = (B & W) == W
        added = sizeB - int(W).bit_count()
        left = c - sizeB
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(sup, np.power(q, added) * np.power(1 - q, left), 0.0)
        out += pw * w
    if direction == "dual":
        out = out[full ^ B]
    keys = np.flatnonzero(out > 0)
    return ExactDistribution(keys, out[keys] / out[keys].sum(), c, f"lift-{direction}")


def lift_weight(direction: str, p: float) -> float:
    return p / 2 if direction == "primal" else (1 - p) / (2 - p)


def lift_of_even_covers(code: ParityCheckCode, p: float, direction: str) -> ExactDistribution:
    w = lift_weight(direction, p)
    M = code.h if direction == "primal" else dual_generator(code)
    xi = enumerate_even_covers(M, w)
    return lift_pushforward(xi, w / (1 - w), direction)


def lift_of_worm(G: Graph, p: float, direction: str) -> ExactDistribution:
    w = lift_weight(direction, p)
    return lift_pushforward(enumerate_worm(G, w), w / (1 - w), direction)


# -- transition matrices -----------------------------------------------------


@dataclass
class TransitionMatrix:
    kernel: str
    states: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        if self.P.shape != (len(self.states), len(self.states)):
            raise ValueError("matrix and state list disagree")

    @property
    def row_sum_error(self) -> float:
        return float(np.abs(self.P.sum(axis=1) - 1).max())

    def stationarity_error(self, dist: ExactDistribution) -> float:
        """``||pi P - pi||_1`` with ``pi`` restricted to this state list."""
        pi = dist.on(self.states)
        return float(np.abs(pi @ self.P - pi).sum())

    def detailed_balance_error(self, dist: ExactDistribution) -> float:
        pi = dist.on(self.states)
        flow = pi[:, None] * self.P
        return float(np.abs(flow - flow.T).max())


def _sw_matrix(t: _Tables, p: float) -> np.ndarray:
    N = 1 << t.n
    synd = t.syndromes
    P = np.zeros((N, N))
    kt = t.k_table
    # Group configurations by satisfied set; rows with the same E(x) are identical.
    for s in np.unique(synd):
        Ex = t.full ^ int(s)
        row = np.zeros(N)
        A = Ex
        size_E = Ex.bit_count()
        while True:
            a = A.bit_count()
            prob = (p**a) * ((1 - p) ** (size_E - a))
            if prob > 0:
                members = (synd & A) == 0
                row += prob * members / (2.0 ** kt[A])
            if A == 0:
                break
            A = (A - 1) & Ex
        P[synd == s] = row
    return P


def _sw_rc_matrix(t: _Tables, p: float) -> np.ndarray:
    C = 1 << t.c
    synd = t.syndromes
    P = np.zeros((C, C))
    B = np.arange(C)
    sizeB = t.sizes
    # Distribution of E(x) for x uniform in ker(h_A), then cluster formation.
    form = {}
    for s in np.unique(synd):
        Ex = t.full ^ int(s)
        sub = (B & ~Ex) == 0
        with np.errstate(invalid="ignore"):
            form[int(s)] = np.where(sub, (p**sizeB) * ((1 - p) ** (Ex.bit_count() - sizeB)), 0.0)
    for A in range(C):
        members = synd[(synd & A) == 0]
        vals, counts = np.unique(members, return_counts=True)
        row = np.zeros(C)
        for s, cnt in zip(vals.tolist(), counts.tolist()):
            row += cnt * form[s]
        P[A] = row / len(members)
    return P


def _metropolis_rc_matrix(t: _Tables, p: float, inverted: bool = False) -> np.ndarray:
    C = 1 << t.c
    kt = t.k_table
    r = math.inf if p == 1.0 else p / (1 - p)
    P = np.zeros((C, C))
    for A in range(C):
        for e in range(t.c):
            B = A ^ (1 << e)
            dk = kt[B] - kt[A]
            if (B >> e) & 1:
                ratio = r * 2.0**dk
            else:
                ratio = (0.0 if math.isinf(r) else (math.inf if r == 0 else 1 / r)) * 2.0**dk
            if inverted:
                ratio = math.inf if ratio == 0 else 1 / ratio
            P[A, B] += min(1.0, ratio) / (2 * t.c)
        P[A, A] = 1 - P[A].sum()
    return P


def _single_check_matrix(t: _Tables, p: float) -> np.ndarray:
    C = 1 << t.c
    kt = t.k_table
    P = np.zeros((C, C))
    for A in range(C):
        P[A, A] += 0.5
        for e in range(t.c):
            up, down = A | (1 << e), A & ~(1 << e)
            if kt[A] == kt[up]:
                P[A, up] += p / (2 * t.c)
                P[A, down] += (1 - p) / (2 * t.c)
            else:
                P[A, up] += (p / 2) / (2 * t.c)
                P[A, A] += (1 - p / 2) / (2 * t.c)
    return P


def _glauber_matrix(t: _Tables, beta: float) -> np.ndarray:
    N = 1 << t.n
    energy = 2 * _popcount(t.syndromes)
    P = np.zeros((N, N))
    for x in range(N):
        for i in range(t.n):
            y = x ^ (1 << i)
            dH = energy[y] - energy[x]
            acc = 1.0 if dH <= 0 else math.exp(-beta * dH)
            P[x, y] += acc / t.n
        P[x, x] = 1 - P[x].sum()
    return P


def _worm_matrix(G: Graph, p_weight: float) -> tuple[np.ndarray, np.ndarray]:
    omega = enumerate_worm(G, p_weight)
    states = omega.states
    index = {int(s): i for i, s in enumerate(states)}
    logw = np.log(omega.probs)
    c = G.n_edges
    P = np.zeros((len(states), len(states)))
    for i, S in enumerate(states.tolist()):
        for e in range(c):
            j = index.get(S ^ (1 << e))
            if j is None:
                continue
            P[i, j] += min(1.0, math.exp(logw[j] - logw[i])) / (2 * c)
        P[i, i] = 1 - P[i].sum()
    return states, P


def build_transition_matrix(
    kernel: str,
    code: ParityCheckCode,
    beta: Optional[float] = None,
    p: Optional[float] = None,
    graph: Optional[Graph] = None,
    worm_weight: Optional[float] = None,
    fault: Optional[str] = None,
) -> TransitionMatrix:
    """Exact one-step matrix of ``kernel``.  Give ``beta`` or ``p``; the worm
    kernel needs ``graph`` and its weight parameter ``worm_weight``."""
    if fault is not None and fault not in FAULTS:
        raise ValueError(f"unknown fault {fault!r}")
    if kernel == "worm":
        if graph is None or worm_weight is None:
            raise ValueError("worm kernel needs a graph and a weight parameter")
        states, P = _worm_matrix(graph, worm_weight)
        return TransitionMatrix(kernel, states, P)
    if p is None:
        if beta is None:
            raise ValueError("give beta or p")
        p = 1.0 if math.isinf(beta) else -math.expm1(-2 * beta)
    if beta is None:
        beta = math.inf if p == 1.0 else -0.5 * math.log1p(-p)
    t = _Tables(code)
    space = 1 << (t.n if kernel in ("sw", "glauber") else t.c)
    if space > MAX_STATES:
        raise ValueError(f"state space of size {space} exceeds the oracle limit {MAX_STATES}")
    if kernel == "sw":
        P = _sw_matrix(t, p)
    elif kernel == "sw-rc":
        P = _sw_rc_matrix(t, p)
    elif kernel == "metropolis-rc":
        P = _metropolis_rc_matrix(t, p, inverted=fault == "metropolis-inverted")
    elif kernel == "single-check":
        P = _single_check_matrix(t, p)
    elif kernel == "glauber":
        P = _glauber_matrix(t, beta)
    else:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {', '.join(KERNELS)}")
    return TransitionMatrix(kernel, np.arange(space), P)


def stationary_law(kernel: str, code: ParityCheckCode, p: float, graph: Optional[Graph] = None,
                   worm_weight: Optional[float] = None) -> ExactDistribution:
    if kernel in ("sw", "glauber"):
        return enumerate_gibbs(code, -0.5 * math.log1p(-p) if p < 1 else math.inf)
    if kernel == "worm":
        return enumerate_worm(graph, worm_weight)
    return enumerate_rc(code, p)


# -- spectral quantities -----------------------------------------------------


def spectral_gap(P: np.ndarray | TransitionMatrix, pi: Optional[np.ndarray] = None) -> float:
    """``1 - max |lambda|`` over the spectrum with one unit eigenvalue removed.

    ``pi`` defaults to the left Perron vector.  The chain must be reversible
    w.r.t. ``pi``; states of zero stationary weight are dropped.
    """
    if isinstance(P, TransitionMatrix):
        P = P.P
    P = np.asarray(P, dtype=np.float64)
    if pi is None:
        pi = _perron(P)
    pi = np.asarray(pi, dtype=np.float64)
    keep = pi > 0
    P, pi = P[np.ix_(keep, keep)], pi[keep]
    d = np.sqrt(pi)
    S = d[:, None] * P / d[None, :]
    if np.abs(S - S.T).max() > 1e-9:
        raise ValueError("chain is not reversible with respect to pi")
    lam = np.linalg.eigvalsh((S + S.T) / 2)
    top = int(np.argmin(np.abs(lam - 1.0)))
    rest = np.delete(lam, top)
    if rest.size == 0:
        return 1.0
    return float(1.0 - np.abs(rest).max())


def _perron(P: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eig(P.T)
    i = int(np.argmin(np.abs(w - 1)))
    vec = np.real(v[:, i])
    return vec / vec.sum()


def worst_case_distance(P: np.ndarray, pi: np.ndarray, steps: int) -> np.ndarray:
    """``d(t) = max_x sum_y |P^t(x,y) - pi(y)|`` for ``t = 0..steps``."""
    P = np.asarray(P, dtype=np.float64)
    Pt = np.eye(P.shape[0])
    out = np.empty(steps + 1)
    for t in range(steps + 1):
        out[t] = np.abs(Pt - pi[None, :]).sum(axis=1).max()
        Pt = Pt @ P
    return out


def exact_mixing_time(P: np.ndarray | TransitionMatrix, pi: np.ndarray, threshold: float = math.exp(-1),
                      max_steps: int = 100_000) -> int:
    """Smallest ``t`` with worst-start ``sum_y |P^t(x,y) - pi(y)| <= threshold``."""
    if isinstance(P, TransitionMatrix):
        P = P.P
    P = np.asarray(P, dtype=np.float64)
    pi = np.asarray(pi, dtype=np.float64)
    Pt = np.eye(P.shape[0])
    for t in range(max_steps + 1):
        if np.abs(Pt - pi[None, :]).sum(axis=1).max() <= threshold:
            return t
        Pt = Pt @ P
    raise RuntimeError(f"chain did not mix within {max_steps} steps")


# -- reports -----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    @classmethod
    def le(cls, name: str, deviation: float, tolerance: float, **detail) -> "CheckResult":
        return cls(name, float(deviation), float(tolerance), bool(deviation <= tolerance), detail)

    def to_dict(self) -> dict:
        d = {"name": self.name, "deviation": self.deviation, "tolerance": self.tolerance, "pass": self.passed}
        if self.detail:
            d["detail"] = self.detail
        return d


@dataclass
class Report:
    title: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"title": self.title, "pass": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


# -- stationarity ------------------------------------------------------------


def stationarity_suite(code: ParityCheckCode, p: float, tol: float = DEFAULT_TOL,
                       graph: Optional[Graph] = None, fault: Optional[str] = None,
                       label: str = "") -> Report:
    """Every kernel's exact matrix fixes its stationary law (and rows sum to one)."""
    rep = Report(f"stationarity {label}".strip())
    for kernel in ("sw", "sw-rc", "metropolis-rc", "single-check", "glauber"):
        T = build_transition_matrix(kernel, code, p=p, fault=fault)
        law = stationary_law(kernel, code, p)
        rep.checks.append(CheckResult.le(f"{label}{kernel} p={p:g} stationarity", T.stationarity_error(law), tol))
        rep.checks.append(CheckResult.le(f"{label}{kernel} p={p:g} row sums", T.row_sum_error, tol))
    if graph is not None:
        for direction in ("primal", "dual"):
            w = lift_weight(direction, p)
            T = build_transition_matrix("worm", code, graph=graph, worm_weight=w)
            law = enumerate_worm(graph, w)
            rep.checks.append(CheckResult.le(f"{label}worm({direction}) p={p:g} stationarity",
                                             T.stationarity_error(law), tol))
    return rep


# -- couplings and lifts -----------------------------------------------------


def _candidate_graphs(code: ParityCheckCode) -> list[tuple[Graph, str]]:
    dense = code.h.to_dense()
    out: list[tuple[Graph, str]] = []
    if np.all(dense.sum(axis=1) == 2):
        out.append((Graph(code.n, tuple(tuple(np.flatnonzero(r).tolist()) for r in dense)), "primal"))
    out.append((Graph.path(code.c + 1), "primal"))
    if code.c >= 2:
        out.append((Graph.cycle(code.c), "primal"))
    out.append((Graph.bundle(code.c), "dual"))
    return out


def default_couplings(code: ParityCheckCode) -> list[tuple[Graph, str, int]]:
    """Best-delta certified coupling per direction among a few standard graphs."""
    best: dict[str, tuple[Graph, str, int]] = {}
    for G, direction in _candidate_graphs(code):
        cert = certify_graphic(code, G, direction)
        if cert is None:
            continue
        if direction not in best or cert.delta < best[direction][2]:
            best[direction] = (G, direction, cert.delta)
    return [best[d] for d in ("primal", "dual") if d in best]


def coupling_suite(code: ParityCheckCode, p: float, couplings: Optional[Sequence[tuple[Graph, str]]] = None,
                   tol: float = DEFAULT_TOL, label: str = "") -> Report:
    """FK marginals, both even-cover lifts, the syndrome law, and subspace-loss ratios."""
    rep = Report(f"couplings {label}".strip())
    beta = -0.5 * math.log1p(-p)
    pi = enumerate_gibbs(code, beta)
    phi = enumerate_rc(code, p)
    mu = enumerate_fk(code, p)
    rep.checks.append(CheckResult.le(f"{label}mu x-marginal = pi p={p:g}", np.abs(mu.sum(axis=0) - pi.dense()).sum(), tol))
    rep.checks.append(CheckResult.le(f"{label}mu A-marginal = phi p={p:g}", np.abs(mu.sum(axis=1) - phi.dense()).sum(), tol))
    for direction in ("primal", "dual"):
        lifted = lift_of_even_covers(code, p, direction)
        rep.checks.append(CheckResult.le(f"{label}{direction} lift = phi p={p:g}", lifted.l1(phi), tol))
    zeta = enumerate_syndromes(code, beta)
    xi_dual = enumerate_even_covers(dual_generator(code), lift_weight("dual", p))
    rep.checks.append(CheckResult.le(f"{label}syndrome law = dual even covers p={p:g}", zeta.l1(xi_dual), tol))

    if couplings is None:
        found = default_couplings(code)
    else:
        found = []
        for G, direction in couplings:
            cert = certify_graphic(code, G, direction)
            if cert is None:
                rep.checks.append(CheckResult(f"{label}certify {direction}", math.inf, 0.0, False))
                continue
            found.append((G, direction, cert.delta))
    for G, direction, delta in found:
        ratio = subspace_loss_ratio(code, G, p, direction)
        bound = 2.0 ** (delta + 1)
        rep.checks.append(CheckResult.le(f"{label}subspace loss {direction} delta={delta} p={p:g}", ratio, bound,
                                         bound=bound))
    return rep


def worm_partition_functions(code: ParityCheckCode, G: Graph, p_weight: float,
                             direction: str) -> tuple[float, float, float]:
    """``(Z_down, Z_0, Z_2)``: weight ``(p'/(1-p'))^|S|`` summed over the code's even
    covers (of ``h`` or of ``col(h)``), over all even subgraphs of ``G``, and over the
    two-defect subgraphs of ``G`` (without the pair penalty)."""
    r = p_weight / (1 - p_weight)
    M = code.h if direction == "primal" else dual_generator(code)
    down = np.array(even_cover_space(M), dtype=np.int64)
    d = _defect_counts(G)
    sizes = _popcount(np.arange(1 << G.n_edges))
    z = lambda s: float(np.sum(np.power(r, s, dtype=np.float64)))
    return z(_popcount(down)), z(sizes[d == 0]), z(sizes[d == 2])


def subspace_loss_ratio(code: ParityCheckCode, G: Graph, p: float, direction: str) -> float:
    """``max_B phi_lift(B) / phi(B)`` where the lift starts from the worm distribution on ``G``."""
    phi = enumerate_rc(code, p)
    lifted = lift_of_worm(G, p, direction)
    return float(np.max(lifted.dense() / phi.dense()))


# -- operator identities -----------------------------------------------------


def factorization_operators(code: ParityCheckCode, p: float) -> tuple[sp.csr_matrix, sp.csr_matrix, list[sp.csr_matrix]]:
    """``M`` (RC x joint), ``M*`` (joint x RC) and the ``T_e`` (joint x joint).

    Joint state ``(x, A)`` has index ``A * 2**n + x``.
    """
    t = _Tables(code)
    N, C = 1 << t.n, 1 << t.c
    J = N * C
    if J > 1 << 16:
        raise ValueError(f"joint space of size {J} exceeds 2^16")
    synd = t.syndromes
    kt = t.k_table
    idx = np.arange(J)
    A_of, x_of = idx // N, idx % N
    in_kernel = (synd[x_of] & A_of) == 0
    M = sp.csr_matrix((2.0 ** (-kt[A_of[in_kernel]]), (A_of[in_kernel], idx[in_kernel])), shape=(C, J))
    Mstar = sp.csr_matrix((np.ones(J), (idx, A_of)), shape=(J, C))
    Ts = []
    for e in range(t.c):
        bit = 1 << e
        sat = ((synd[x_of] >> e) & 1) == 0
        rows, cols, vals = [], [], []
        r = idx[sat]
        rows += [r, r]
        cols += [(A_of[sat] | bit) * N + x_of[sat], (A_of[sat] & ~bit) * N + x_of[sat]]
        vals += [np.full(r.size, p), np.full(r.size, 1 - p)]
        r = idx[~sat]
        rows.append(r)
        cols.append(r)
        vals.append(np.ones(r.size))
        T = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(J, J))
        T.sum_duplicates()
        Ts.append(T)
    return M, Mstar, Ts


def _maxabs(X) -> float:
    if sp.issparse(X):
        X = X.tocoo()
        return float(np.abs(X.data).max()) if X.nnz else 0.0
    return float(np.abs(X).max()) if X.size else 0.0


def operator_identity_check(code: ParityCheckCode, p: float, tol: float = OPERATOR_TOL, label: str = "") -> Report:
    """Verify the FK operator factorizations of the SW and single-check RC kernels."""
    rep = Report(f"operators {label}".strip())
    M, Mstar, Ts = factorization_operators(code, p)
    C = M.shape[0]
    prod = Mstar
    for T in reversed(Ts):
        prod = T @ prod
    sw = (M @ prod).toarray()
    P_sw = build_transition_matrix("sw-rc", code, p=p).P
    rep.checks.append(CheckResult.le(f"{label}P_SW = M prod(T_e) M* p={p:g}", _maxabs(sw - P_sw), tol))
    total = Ts[0].copy()
    for T in Ts[1:]:
        total = total + T
    sc = 0.5 * np.eye(C) + (M @ total @ Mstar).toarray() / (2 * len(Ts))
    P_sc = build_transition_matrix("single-check", code, p=p).P
    rep.checks.append(CheckResult.le(f"{label}P_SC = I/2 + M sum(T_e) M*/(2c) p={p:g}", _maxabs(sc - P_sc), tol))
    rep.checks.append(CheckResult.le(f"{label}M M* = I p={p:g}", _maxabs((M @ Mstar).toarray() - np.eye(C)), tol))
    idem = max(_maxabs(T @ T - T) for T in Ts)
    rep.checks.append(CheckResult.le(f"{label}T_e idempotent p={p:g}", idem, tol))
    comm = 0.0
    for i in range(len(Ts)):
        for j in range(i + 1, len(Ts)):
            comm = max(comm, _maxabs(Ts[i] @ Ts[j] - Ts[j] @ Ts[i]))
    rep.checks.append(CheckResult.le(f"{label}T_e commute p={p:g}", comm, tol))
    return rep


def entrywise_sandwich_violation(sc: np.ndarray, met: np.ndarray) -> float:
    """Largest off-diagonal excess in ``P_SC <= P_Met <= 2 P_SC`` (0 when it holds)."""
    off = ~np.eye(sc.shape[0], dtype=bool)
    lo = float(np.max(np.where(off, sc - met, 0.0)))
    hi = float(np.max(np.where(off, met - 2 * sc, 0.0)))
    return max(lo, hi)


def comparison_suite(code: ParityCheckCode, p: float, fault: Optional[str] = None, label: str = "",
                     strict: bool = False, gap_always: bool = False) -> Report:
    """Entrywise sandwich, spectral-gap sandwich and the SW vs Metropolis mixing-time ratio.

    ``strict`` asserts the entrywise sandwich at every ``p``; ``gap_always``
    asserts the gap sandwich even where the entrywise premise fails.
    """
    rep = Report(f"comparison {label}".strip())
    phi = enumerate_rc(code, p).dense()
    met = build_transition_matrix("metropolis-rc", code, p=p, fault=fault).P
    sc = build_transition_matrix("single-check", code, p=p).P
    sw = build_transition_matrix("sw-rc", code, p=p).P
    # Beyond p = 1/2 rank-changing moves break the entrywise sandwich (adding an
    # independent check has P_Met = 1/(2c) > 2 P_SC = p/(2c)), and with it the
    # premise of the gap comparison; both are only asserted where the premise holds.
    premise = p <= 0.5 or strict
    if premise:
        rep.checks.append(CheckResult.le(f"{label}P_SC <= P_Met <= 2 P_SC p={p:g}",
                                         entrywise_sandwich_violation(sc, met), OPERATOR_TOL))
    try:
        g_sc, g_met = spectral_gap(sc, phi), spectral_gap(met, phi)
        slack = max(g_sc - g_met, g_met - 2 * g_sc, 0.0)
        if premise or gap_always:
            rep.checks.append(CheckResult.le(f"{label}gap(SC) <= gap(Met) <= 2 gap(SC) p={p:g}", slack, 1e-12,
                                             gap_sc=g_sc, gap_met=g_met))
    except ValueError:
        rep.checks.append(CheckResult(f"{label}gap(SC) <= gap(Met) <= 2 gap(SC) p={p:g}", math.inf, 1e-12, False,
                                      {"error": "non-reversible"}))
    name = f"{label}tau(Met) >= tau(SW)/2 p={p:g}"
    try:
        t_met, t_sw = exact_mixing_time(met, phi, max_steps=20_000), exact_mixing_time(sw, phi, max_steps=20_000)
    except RuntimeError:
        rep.checks.append(CheckResult(name, math.inf, 0.0, False, {"error": "no convergence to phi"}))
    else:
        rep.checks.append(CheckResult.le(name, max(0.5 * t_sw - t_met, 0.0), 0.0, tau_met=t_met, tau_sw=t_sw))
    return rep


def full_suite(code: ParityCheckCode, ps: Sequence[float] = (0.2, 0.5, 0.8), tol: float = DEFAULT_TOL,
               fault: Optional[str] = None, graph: Optional[Graph] = None) -> Report:
    rep = Report(f"verify {code.name}")
    for p in ps:
        rep.extend(stationarity_suite(code, p, tol, graph=graph, fault=fault))
        rep.extend(coupling_suite(code, p, tol=tol))
        rep.extend(comparison_suite(code, p, fault=fault))
        if (1 << (code.n + code.c)) <= 1 << 12:
            rep.extend(operator_identity_check(code, p, min(tol, OPERATOR_TOL)))
    return rep
