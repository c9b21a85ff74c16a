"""Worm space, worm sampler, canonical paths, the encoding Phi, and flow bounds."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from codesw import oracle
from codesw.analysis import empirical_tv
from codesw.codes import Graph, delta_one_instance, ising_code
from codesw.dynamics import states_to_ints
from codesw.worm import (
    WormSpace,
    canonical_path,
    cycle_order,
    defects,
    flow_congestion_exact,
    in_worm_space,
    mixing_time_check,
    phi_decode,
    phi_encode,
    run_worm,
    worm_flow_bound,
    worm_weight_log,
)

GRAPHS = {"C4": Graph.cycle(4), "C6": Graph.cycle(6), "K4": Graph.complete(4), "K3": Graph.complete(3)}


def even_subgraphs(G):
    return [S for S in range(1 << G.n_edges) if not defects(G, S)]


def test_defects_examples():
    G = Graph.cycle(4)
    assert defects(G, 0) == frozenset()
    assert defects(G, 0b0001) == frozenset({0, 1})
    assert defects(G, 0b1111) == frozenset()
    assert not in_worm_space(G, 0b0101)


def test_weight_log_examples():
    space = WormSpace(Graph.complete(3), 0.25)
    assert worm_weight_log(space, 0) == 0.0
    assert worm_weight_log(space, 0b001) == pytest.approx(2 * math.log(1 / 3))
    with pytest.raises(ValueError):
        WormSpace(Graph.complete(3), 0.6)


def test_worm_sampler_matches_omega():
    G = Graph.cycle(4)
    space = WormSpace(G, 0.35)
    run = run_worm(space, 200_000, np.random.default_rng(9), record_states=True)
    assert run.defect_counts.max() <= 2
    assert empirical_tv(states_to_ints(run.states[20_000:]), oracle.enumerate_worm(G, 0.35)) < 0.02


def test_worm_sampler_rejects_four_defect_moves():
    G = Graph.path(5)
    space = WormSpace(G, 0.5)
    run = run_worm(space, 5000, np.random.default_rng(1), S0=0b0001)
    assert set(np.unique(run.defect_counts)) <= {0, 2}
    with pytest.raises(ValueError):
        run_worm(space, 10, np.random.default_rng(1), S0=0b0101)


# -- canonical paths -----------------------------------------------------------

def test_path_examples():
    K3 = Graph.complete(3)
    assert len(canonical_path(K3, 0b101, 0b101)) == 0
    path = canonical_path(K3, 0, 0b111)
    assert len(path) == 3
    assert [len(defects(K3, S)) for S in path.states[1:]] == [2, 2, 0]
    C6 = Graph.cycle(6)
    path = canonical_path(C6, 0, 0b111111)
    assert len(path) == 6
    assert all(len(defects(C6, S)) == 2 for S in path.states[1:-1])


def test_cycle_order_rejects_odd_sets():
    with pytest.raises(ValueError):
        cycle_order(Graph.cycle(4), 0b0011)


@pytest.mark.parametrize("name", ["C4", "C6", "K4"])
def test_path_intermediates_stay_in_worm_space(name):
    G = GRAPHS[name]
    evens = even_subgraphs(G)
    for A, B in itertools.product(evens, repeat=2):
        path = canonical_path(G, A, B)
        assert path.states[-1] == B
        for W, W2 in path.transitions:
            assert in_worm_space(G, W) and in_worm_space(G, W2)
            assert bin(W ^ W2).count("1") == 1
            assert in_worm_space(G, phi_encode(W, A, B))


@pytest.mark.parametrize("name", ["C4", "C6", "K4"])
@pytest.mark.parametrize("at_next", [False, True])
def test_phi_is_injective_and_decodes(name, at_next):
    G = GRAPHS[name]
    evens = even_subgraphs(G)
    seen = {}
    for A, B in itertools.product(evens, repeat=2):
        for W, W2 in canonical_path(G, A, B).transitions:
            U = phi_encode(W2 if at_next else W, A, B)
            key = (W, W2, U)
            assert key not in seen, (key, seen.get(key), (A, B))
            seen[key] = (A, B)
            assert phi_decode(G, W, W2, U, encoded_at_next=at_next) == (A, B)


def test_phi_at_path_start():
    G = GRAPHS["K4"]
    for A, B in itertools.product(even_subgraphs(G), repeat=2):
        if A != B:
            assert phi_encode(A, A, B) == B


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_phi_decode_rejects_non_image(seed):
    rng = np.random.default_rng(seed)
    G = GRAPHS["K4"]
    W = int(rng.integers(0, 1 << 6))
    e = int(rng.integers(0, 6))
    U = int(rng.integers(0, 1 << 6))
    out = phi_decode(G, W, W ^ (1 << e), U)
    if out is not None:
        A, B = out
        assert (W, W ^ (1 << e)) in canonical_path(G, A, B).transitions
        assert phi_encode(W, A, B) == U


# -- flow bounds ---------------------------------------------------------------

COUPLINGS = [
    ("C4", ising_code(Graph.cycle(4)), Graph.cycle(4), "primal"),
    ("C6", ising_code(Graph.cycle(6)), Graph.cycle(6), "primal"),
    ("K4", ising_code(Graph.complete(4)), Graph.complete(4), "primal"),
    ("K3", ising_code(Graph.complete(3)), Graph.complete(3), "primal"),
    ("C4-dual", ising_code(Graph.cycle(4)), Graph.bundle(4), "dual"),
    ("K3-dual", ising_code(Graph.complete(3)), Graph.bundle(3), "dual"),
    ("delta1-primal",) + delta_one_instance("primal") + ("primal",),
    ("delta1-dual",) + delta_one_instance("dual") + ("dual",),
]


@pytest.mark.parametrize("name,code,G,direction", COUPLINGS, ids=[c[0] for c in COUPLINGS])
def test_per_transition_flow_bound(name, code, G, direction):
    for p in (0.3, 0.7):
        rep = worm_flow_bound(code, G, p, direction)
        assert rep.passed, rep


@pytest.mark.parametrize("name,code,G,direction", COUPLINGS, ids=[c[0] for c in COUPLINGS])
def test_lifted_flow_congestion(name, code, G, direction):
    rep = flow_congestion_exact(code, G, 0.5, direction)
    assert rep.validity_error is not None and rep.validity_error < 1e-12
    assert rep.within_bound
    assert rep.bound == code.c**2 * 2.0 ** (2 * rep.delta + 5) * G.m**4


def test_flow_bound_requires_certificate():
    with pytest.raises(ValueError):
        worm_flow_bound(ising_code(Graph.cycle(4)), Graph.path(5), 0.5, "primal")


def test_mixing_time_upper_bound_on_k3():
    G = Graph.complete(3)
    for p in (0.3, 0.5, 0.8):
        out = mixing_time_check(ising_code(G), G, p)
        assert out["holds"], out
