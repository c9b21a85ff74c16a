"""Worm space over a coupling graph, canonical paths between even subgraphs,
and exact congestion of the lifted random-cluster flow.

Edge subsets are int bitmasks over the graph's edge indices, which coincide with
the check indices of the coupled code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels as K
from .codes import Graph, ParityCheckCode, certify_graphic
from .oracle import (
    ExactDistribution,
    build_transition_matrix,
    dual_generator,
    enumerate_even_covers,
    enumerate_rc,
    enumerate_worm,
    exact_mixing_time,
    lift_weight,
)

MAX_FLOW_CHECKS = 14


@dataclass(frozen=True)
class WormSpace:
    """Worm states of ``graph`` weighted by ``w(S) = (p'/(1-p'))^|S|``."""

    graph: Graph
    p_weight: float

    def __post_init__(self):
        if not 0.0 <= self.p_weight <= 0.5:
            raise ValueError(f"worm weight parameter must lie in [0, 1/2], got {self.p_weight}")

    @classmethod
    def for_lift(cls, graph: Graph, p: float, direction: str) -> "WormSpace":
        return cls(graph, lift_weight(direction, p))

    @property
    def c(self) -> int:
        return self.graph.n_edges

    @property
    def ratio(self) -> float:
        return self.p_weight / (1 - self.p_weight)

    @property
    def log_pair_penalty(self) -> float:
        pairs = math.comb(self.graph.m, 2)
        return -math.log(pairs) if pairs else -math.inf


def defects(G: Graph, S: int) -> frozenset[int]:
    """Odd-degree vertices of the edge subset ``S``."""
    parity = 0
    for e, (u, v) in enumerate(G.edges):
        if (S >> e) & 1:
            parity ^= (1 << u) | (1 << v)
    return frozenset(i for i in range(G.m) if (parity >> i) & 1)


def in_worm_space(G: Graph, S: int) -> bool:
    d = len(defects(G, S))
    return d == 0 or (d == 2 and G.m >= 2)


def worm_weight_log(space: WormSpace, S: int) -> float:
    """Unnormalized ``log omega_g(S)``; ``-inf`` outside the worm space."""
    d = len(defects(space.graph, S))
    if d not in (0, 2):
        return -math.inf
    size = bin(S).count("1")
    if space.p_weight == 0.0:
        base = 0.0 if size == 0 else -math.inf
    else:
        base = size * math.log(space.ratio)
    return base + (space.log_pair_penalty if d == 2 else 0.0)


@dataclass
class WormRun:
    sizes: np.ndarray
    defect_counts: np.ndarray
    final: int
    states: Optional[np.ndarray] = None


def run_worm(space: WormSpace, steps: int, rng: np.random.Generator, S0: int = 0,
             record_states: bool = False) -> WormRun:
    """Lazy Metropolis single-edge flips restricted to the worm space (3 uniforms per step)."""
    G = space.graph
    if not in_worm_space(G, S0):
        raise ValueError("initial state has more than two defects")
    eu = np.array([u for u, _ in G.edges], dtype=np.int64)
    ev = np.array([v for _, v in G.edges], dtype=np.int64)
    S = np.array([(S0 >> e) & 1 for e in range(G.n_edges)], dtype=np.uint8)
    parity = np.zeros(G.m, dtype=np.uint8)
    for v in defects(G, S0):
        parity[v] = 1
    log_r = math.log(space.ratio) if space.p_weight > 0 else -math.inf
    U = rng.random((steps, 3))
    sizes = np.zeros(steps, dtype=np.int64)
    nd = np.zeros(steps, dtype=np.int64)
    states = np.zeros((steps if record_states else 0, G.n_edges), dtype=np.uint8)
    K.worm_run(eu, ev, S, parity, log_r, space.log_pair_penalty, U, sizes, nd, states)
    final = sum(int(b) << e for e, b in enumerate(S))
    return WormRun(sizes, nd, final, states if record_states else None)


def worm_step(space: WormSpace, S: int, rng: np.random.Generator) -> int:
    return run_worm(space, 1, rng, S).final


# -- canonical paths ---------------------------------------------------------


@dataclass(frozen=True)
class CanonicalPath:
    start: int
    end: int
    edges: tuple[int, ...]

    @property
    def states(self) -> list[int]:
        out = [self.start]
        for e in self.edges:
            out.append(out[-1] ^ (1 << e))
        return out

    @property
    def transitions(self) -> list[tuple[int, int]]:
        s = self.states
        return list(zip(s[:-1], s[1:]))

    def __len__(self) -> int:
        return len(self.edges)


def cycle_order(G: Graph, D: int) -> tuple[int, ...]:
    """Canonical edge order of the even subgraph ``D``.

    Repeatedly take the lowest remaining edge, traverse it from its first
    endpoint, and keep taking the lowest unused incident edge until the walk
    returns to its start.  Raises if ``D`` has an odd-degree vertex.
    """
    if defects(G, D):
        raise ValueError("edge set is not an even subgraph")
    remaining = {e for e in range(G.n_edges) if (D >> e) & 1}
    incident: dict[int, list[int]] = {v: [] for v in range(G.m)}
    for e in sorted(remaining):
        u, v = G.edges[e]
        incident[u].append(e)
        incident[v].append(e)
    order: list[int] = []
    while remaining:
        first = min(remaining)
        start, here = G.edges[first]
        remaining.discard(first)
        order.append(first)
        while here != start:
            e = next(e for e in incident[here] if e in remaining)
            remaining.discard(e)
            order.append(e)
            u, v = G.edges[e]
            here = v if here == u else u
    return tuple(order)


def canonical_path(space: WormSpace | Graph, A: int, B: int) -> CanonicalPath:
    G = space.graph if isinstance(space, WormSpace) else space
    return CanonicalPath(A, B, cycle_order(G, A ^ B))


def phi_encode(W: int, A: int, B: int) -> int:
    """``W ⊕ A ⊕ B``; pass ``W' = W ⊕ e`` as ``W`` for the alternative encoder."""
    return W ^ A ^ B


def phi_decode(G: Graph, W: int, W_next: int, U: int, encoded_at_next: bool = False) -> Optional[tuple[int, int]]:
    """Recover ``(A, B)`` from the transition ``(W, W_next)`` and ``U = phi_encode``.

    Edges before the flipped edge carry their ``B`` status in ``W``; the rest carry
    their ``A`` status.  Returns None when ``U`` is not in the image.
    """
    flip = W ^ W_next
    if flip == 0 or flip & (flip - 1):
        return None
    e = flip.bit_length() - 1
    anchor = W_next if encoded_at_next else W
    diff = U ^ anchor
    try:
        order = cycle_order(G, diff)
    except ValueError:
        return None
    if e not in order:
        return None
    before = 0
    for f in order[: order.index(e)]:
        before |= 1 << f
    A = W ^ before
    B = A ^ diff
    path = canonical_path(G, A, B)
    if (W, W_next) not in path.transitions:
        return None
    return A, B


# -- flows -------------------------------------------------------------------


def _even_cover_model(code: ParityCheckCode, p: float, direction: str) -> ExactDistribution:
    M = code.h if direction == "primal" else dual_generator(code)
    return enumerate_even_covers(M, lift_weight(direction, p))


def worm_path_loads(code: ParityCheckCode, G: Graph, p: float, direction: str) -> dict[tuple[int, int], float]:
    """``sum_{gamma ∋ (W, W')} f(gamma)`` with ``f(gamma_{A,B}) = xi(A) xi(B)``."""
    xi = _even_cover_model(code, p, direction)
    loads: dict[tuple[int, int], float] = {}
    for A, pa in zip(xi.states.tolist(), xi.probs.tolist()):
        for B, pb in zip(xi.states.tolist(), xi.probs.tolist()):
            for t in canonical_path(G, A, B).transitions:
                loads[t] = loads.get(t, 0.0) + pa * pb
    return loads


@dataclass
class WormBoundReport:
    delta: int
    max_ratio: float
    max_ratio_add: float
    transitions: int

    @property
    def passed(self) -> bool:
        return self.max_ratio <= 1 + 1e-12 and self.max_ratio_add <= 1 + 1e-12


def worm_flow_bound(code: ParityCheckCode, G: Graph, p: float, direction: str) -> WormBoundReport:
    """Largest ``load / (2^{Δ+1} m^4 omega_g(W))`` over worm transitions; the add-edge
    ratio carries the extra factor ``p'/(1-p')`` in the denominator."""
    cert = certify_graphic(code, G, direction)
    if cert is None:
        raise ValueError(f"graph is not a {direction} coupling of the code")
    space = WormSpace.for_lift(G, p, direction)
    omega = enumerate_worm(G, space.p_weight)
    om = dict(zip(omega.states.tolist(), omega.probs.tolist()))
    base = 2.0 ** (cert.delta + 1) * G.m**4
    worst = worst_add = 0.0
    loads = worm_path_loads(code, G, p, direction)
    for (W, W2), load in loads.items():
        worst = max(worst, load / (base * om[W]))
        if W2 & ~W:
            worst_add = max(worst_add, load / (base * om[W] * space.ratio))
    return WormBoundReport(cert.delta, worst, worst_add, len(loads))


@dataclass
class CongestionReport:
    direction: str
    delta: int
    congestion: float
    bound: float
    validity_error: Optional[float]
    argmax: tuple[int, int]

    @property
    def within_bound(self) -> bool:
        return self.congestion <= self.bound


def _product_law(W: int, r: float, c: int, Ys: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """``delta(W, Y)``: ``Y ⊇ W`` with each other edge present independently w.p. ``r``."""
    sup = (Ys & W) == W
    extra = sizes - bin(W).count("1")
    return np.where(sup, r**extra * (1 - r) ** (c - sizes), 0.0)


def _lifted_stages(path: CanonicalPath, c: int) -> list[tuple[str, int]]:
    """Stage list of a lifted path: follow each flip, then re-randomize ``E \\ W_end``."""
    stages = []
    for W, W2 in path.transitions:
        e = (W ^ W2).bit_length() - 1
        stages.append(("add" if W2 & (1 << e) else "remove", e))
    for e in range(c):
        if not (path.end >> e) & 1:
            stages.append(("rerandomize", e))
    return stages


def flow_congestion_exact(code: ParityCheckCode, G: Graph, p: float, direction: str = "primal",
                          check_validity: bool = True) -> CongestionReport:
    """Exact congestion of the lifted flow against the Metropolis RC chain.

    Works in coordinates ``Y = Z`` (primal) or ``Y = E \\ Z`` (dual), where both
    lifts follow the same rules with ``r = p'/(1-p')``.  The load of a transition
    is ``sum_gamma f(gamma) L(gamma) E[#traversals | gamma]``.
    """
    c = code.c
    if c > MAX_FLOW_CHECKS:
        raise ValueError(f"flow enumeration limited to c <= {MAX_FLOW_CHECKS}")
    cert = certify_graphic(code, G, direction)
    if cert is None:
        raise ValueError(f"graph is not a {direction} coupling of the code")
    r = WormSpace.for_lift(G, p, direction).ratio
    xi = _even_cover_model(code, p, direction)
    phi = enumerate_rc(code, p).dense()
    P = build_transition_matrix("metropolis-rc", code, p=p).P
    full = (1 << c) - 1
    Ys = np.arange(1 << c)
    sizes = np.bitwise_count(Ys.astype(np.uint64)).astype(np.int64)
    to_Z = Ys if direction == "primal" else full ^ Ys

    stay = np.zeros(1 << c)         # load on (Y, Y)
    flip = np.zeros((1 << c, c))    # load on (Y, Y ⊕ e)
    joint = np.zeros((1 << c, 1 << c)) if check_validity and c <= 10 else None

    for U, pu in zip(xi.states.tolist(), xi.probs.tolist()):
        for V, pv in zip(xi.states.tolist(), xi.probs.tolist()):
            path = canonical_path(G, U, V)
            stages = _lifted_stages(path, c)
            weight = pu * pv * len(stages)
            W = U
            if joint is not None:
                J = np.diag(_product_law(U, r, c, Ys, sizes))
            for kind, e in stages:
                law = _product_law(W, r, c, Ys, sizes)
                bit = 1 << e
                has = (Ys & bit) != 0
                if kind == "add":
                    stay += weight * law * has
                    flip[:, e] += weight * law * ~has
                    move = (np.ones_like(law), np.zeros_like(law))  # (to Y|e, to Y\e)
                    W |= bit
                elif kind == "remove":
                    stay += weight * law * r
                    flip[:, e] += weight * law * (1 - r)
                    move = (np.full_like(law, r), np.full_like(law, 1 - r))
                    W &= ~bit
                else:
                    stay += weight * law * np.where(has, r, 1 - r)
                    flip[:, e] += weight * law * np.where(has, 1 - r, r)
                    move = (np.full_like(law, r), np.full_like(law, 1 - r))
                if joint is not None:
                    J = J @ _stage_matrix(bit, move[0], move[1], Ys)
            if joint is not None:
                joint += pu * pv * J

    congestion, argmax = 0.0, (0, 0)
    Zidx = to_Z
    for Y in range(1 << c):
        Z = int(Zidx[Y])
        if stay[Y] > 0:
            val = stay[Y] / (phi[Z] * P[Z, Z])
            if val > congestion:
                congestion, argmax = val, (Z, Z)
        for e in range(c):
            if flip[Y, e] > 0:
                Z2 = Z ^ (1 << e)
                val = flip[Y, e] / (phi[Z] * P[Z, Z2]) if P[Z, Z2] > 0 else math.inf
                if val > congestion:
                    congestion, argmax = val, (Z, Z2)

    validity = None
    if joint is not None:
        jz = joint[np.ix_(np.argsort(to_Z), np.argsort(to_Z))]
        validity = float(np.abs(jz - np.outer(phi, phi)).max())
    bound = c**2 * 2.0 ** (2 * cert.delta + 5) * G.m**4
    return CongestionReport(direction, cert.delta, float(congestion), float(bound), validity, argmax)


def _stage_matrix(bit: int, p_in: np.ndarray, p_out: np.ndarray, Ys: np.ndarray) -> np.ndarray:
    """Stochastic matrix of one stage acting on edge ``bit``; ``p_in[Y]`` is the
    probability that the edge ends up present."""
    T = np.zeros((len(Ys), len(Ys)))
    np.add.at(T, (Ys, Ys | bit), p_in)
    np.add.at(T, (Ys, Ys & ~bit), p_out)
    return T


def mixing_time_check(code: ParityCheckCode, G: Graph, p: float, direction: str = "primal") -> dict:
    """``tau(P_Met) <= ln(2e / min phi) rho(F)`` for the computed lifted flow."""
    phi = enumerate_rc(code, p)
    P = build_transition_matrix("metropolis-rc", code, p=p).P
    tau = exact_mixing_time(P, phi.dense())
    rep = flow_congestion_exact(code, G, p, direction, check_validity=False)
    rhs = math.log(2 * math.e / phi.min_prob) * rep.congestion
    return {"tau": tau, "congestion": rep.congestion, "upper": rhs, "holds": tau <= rhs}
