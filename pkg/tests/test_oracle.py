"""Exact enumeration oracle: hand-derived tables, stationarity, couplings,
operator identities and the comparison inequalities."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from codesw import oracle
from codesw.codes import Graph, ParityCheckCode, delta_one_instance, ising_code, toric2d
from codesw.gf2 import BitMatrix

K3 = ising_code(Graph.complete(3))
PAIR = ParityCheckCode(BitMatrix.from_rows(["11"]), name="[[1,1]]")
C4 = ising_code(Graph.cycle(4))
TORIC = toric2d(2)[0]
INSTANCES = {"K3": K3, "pair": PAIR, "C4": C4, "toric2d": TORIC}


def random_code(seed, c=4, n=5):
    rng = np.random.default_rng(seed)
    return ParityCheckCode(BitMatrix.from_dense(rng.integers(0, 2, (c, n), dtype=np.uint8)))


# -- distributions -------------------------------------------------------------

def test_gibbs_examples():
    assert np.allclose(oracle.enumerate_gibbs(K3, 0.0).dense(), 1 / 8)
    pi = oracle.enumerate_gibbs(K3, 1.0).dense()
    Z = 2 + 6 * math.exp(-4)
    assert pi[0] == pytest.approx(1 / Z) and pi[7] == pytest.approx(1 / Z)
    ground = oracle.enumerate_gibbs(TORIC, math.inf)
    assert len(ground.states) == 2 ** TORIC.k


def test_gibbs_constant_on_kernel_cosets():
    pi = oracle.enumerate_gibbs(TORIC, 0.7).dense()
    ker = oracle.even_cover_space(TORIC.h.T)  # ker(h) as ints over the n variables
    for x in range(0, 256, 7):
        assert np.allclose(pi[[x ^ k for k in ker]], pi[x])


def test_rc_examples():
    phi = oracle.enumerate_rc(K3, 0.0)
    assert phi.states.tolist() == [0] and phi.probs.tolist() == [1.0]
    assert oracle.enumerate_rc(PAIR, 0.5).probs.tolist() == pytest.approx([2 / 3, 1 / 3])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.05, 0.95))
def test_fk_marginals(seed, p):
    code = random_code(seed)
    mu = oracle.enumerate_fk(code, p)
    beta = -0.5 * math.log1p(-p)
    assert np.abs(mu.sum(axis=0) - oracle.enumerate_gibbs(code, beta).dense()).sum() < 1e-10
    assert np.abs(mu.sum(axis=1) - oracle.enumerate_rc(code, p).dense()).sum() < 1e-10


def test_even_cover_examples():
    assert sorted(oracle.even_cover_space(ising_code(Graph.cycle(3)).h)) == [0, 0b111]
    xi = oracle.enumerate_even_covers(BitMatrix.identity(3), 0.3)
    assert xi.states.tolist() == [0]


@pytest.mark.parametrize("name", list(INSTANCES))
@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_syndrome_law_is_dual_even_cover_law(name, p):
    code = INSTANCES[name]
    beta = -0.5 * math.log1p(-p)
    zeta = oracle.enumerate_syndromes(code, beta)
    xi = oracle.enumerate_even_covers(oracle.dual_generator(code), (1 - p) / (2 - p))
    assert zeta.l1(xi) < 1e-10


@pytest.mark.parametrize("name", list(INSTANCES))
@pytest.mark.parametrize("direction", ["primal", "dual"])
def test_lifts_push_forward_to_rc(name, direction):
    code = INSTANCES[name]
    for p in (0.2, 0.5, 0.8):
        assert oracle.lift_of_even_covers(code, p, direction).l1(oracle.enumerate_rc(code, p)) < 1e-10


def test_worm_examples_and_normalizations():
    G = Graph.cycle(4)
    w = oracle.enumerate_worm(G, 0.25)
    r = 0.25 / 0.75
    # single edge of C4: weight r / C(4,2); empty set: 1
    d = w.dense()
    assert d[0b0001] / d[0] == pytest.approx(r / 6)
    for direction in ("primal", "dual"):
        code, K4 = delta_one_instance(direction)
        for p in (0.2, 0.5, 0.8):
            q = oracle.lift_weight(direction, p)
            z_down, z0, z2 = oracle.worm_partition_functions(code, K4, q, direction)
            assert z_down <= z0 <= 2 * z_down
            assert z2 <= math.comb(4, 2) * z0


# -- transition matrices -------------------------------------------------------

@pytest.mark.parametrize("name", list(INSTANCES))
@pytest.mark.parametrize("kernel", ["sw", "sw-rc", "metropolis-rc", "single-check", "glauber"])
def test_rows_sum_to_one_and_fix_law(name, kernel):
    code = INSTANCES[name]
    for p in (0.2, 0.5, 0.8):
        T = oracle.build_transition_matrix(kernel, code, p=p)
        assert T.row_sum_error < 1e-12
        assert T.stationarity_error(oracle.stationary_law(kernel, code, p)) < 1e-10


def test_sw_ratio_identity_on_k3():
    T = oracle.build_transition_matrix("sw", K3, beta=1.0)
    pi = oracle.enumerate_gibbs(K3, 1.0).dense()
    mask = (T.P > 0) & (T.P.T > 0)
    ratio = np.where(mask, T.P / np.where(mask, T.P.T, 1), 0)
    expect = np.where(mask, pi[None, :] / pi[:, None], 0)
    assert np.allclose(ratio, expect, atol=1e-12)
    assert (T.P > 0).sum() == (T.P.T > 0).sum()


def test_worm_matrix_detailed_balance():
    G = Graph.cycle(4)
    T = oracle.build_transition_matrix("worm", C4, graph=G, worm_weight=0.3)
    law = oracle.enumerate_worm(G, 0.3)
    assert T.detailed_balance_error(law) < 1e-12
    even = law.states[[bin(int(s)).count("1") in (0, 4) for s in law.states]]
    cond = law.on(even) / law.on(even).sum()
    xi = oracle.enumerate_even_covers(ising_code(G).h, 0.3)
    assert np.allclose(cond, xi.on(even))


def test_matrix_limits_and_faults():
    with pytest.raises(ValueError):
        oracle.build_transition_matrix("sw", K3)
    with pytest.raises(ValueError):
        oracle.build_transition_matrix("sw", K3, p=0.5, fault="bogus")
    with pytest.raises(ValueError):
        oracle.build_transition_matrix("worm", K3, p=0.5)
    big = ising_code(Graph.cycle(15))
    with pytest.raises(ValueError):
        oracle.build_transition_matrix("sw-rc", big, p=0.5)


# -- spectral and mixing -------------------------------------------------------

def test_spectral_gap_examples():
    assert oracle.spectral_gap(np.full((2, 2), 0.5)) == pytest.approx(1.0)
    assert oracle.spectral_gap(np.eye(3), np.full(3, 1 / 3)) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        oracle.spectral_gap(np.array([[0, 1, 0], [0, 0, 1], [0.5, 0.5, 0]]), np.array([0.2, 0.4, 0.4]))


def test_mixing_time_examples():
    pi = np.array([0.2, 0.3, 0.5])
    assert oracle.exact_mixing_time(np.tile(pi, (3, 1)), pi) == 1
    assert oracle.exact_mixing_time(np.tile([1.0], (1, 1)), np.array([1.0])) == 0
    with pytest.raises(RuntimeError):
        oracle.exact_mixing_time(np.eye(2), np.array([0.5, 0.5]), max_steps=10)
    d = oracle.worst_case_distance(np.tile(pi, (3, 1)), pi, 2)
    assert d[0] == pytest.approx(2 * (1 - 0.2)) and d[1] == pytest.approx(0)


# -- comparison inequalities ---------------------------------------------------

@pytest.mark.parametrize("name", list(INSTANCES))
@pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
def test_entrywise_sandwich_for_p_at_most_half(name, p):
    code = INSTANCES[name]
    sc = oracle.build_transition_matrix("single-check", code, p=p).P
    met = oracle.build_transition_matrix("metropolis-rc", code, p=p).P
    assert oracle.entrywise_sandwich_violation(sc, met) <= 1e-15


@pytest.mark.parametrize("p", [0.6, 0.8, 0.9])
def test_entrywise_sandwich_fails_above_half(p):
    # h = [[1,1]], c = 1, r = p/(1-p); adding the check drops k from 2 to 1.
    # SC: add p/4, remove (1-p)/2.  Metropolis: add min(1, r/2)/2, remove min(1, 2/r)/2.
    r = p / (1 - p)
    sc_add, sc_rem = p / 4, (1 - p) / 2
    met_add, met_rem = min(1, r / 2) / 2, min(1, 2 / r) / 2
    expected = max(met_add - 2 * sc_add, met_rem - 2 * sc_rem, sc_add - met_add, sc_rem - met_rem, 0)
    sc = oracle.build_transition_matrix("single-check", PAIR, p=p).P
    met = oracle.build_transition_matrix("metropolis-rc", PAIR, p=p).P
    assert sc[0, 1] == pytest.approx(sc_add) and met[1, 0] == pytest.approx(met_rem)
    assert expected > 0
    assert oracle.entrywise_sandwich_violation(sc, met) == pytest.approx(expected)


def test_gap_sandwich_breaks_with_its_premise():
    rep = oracle.comparison_suite(PAIR, 0.8, gap_always=True)
    gap = [c for c in rep.checks if c.name.startswith("gap")][0]
    assert not gap.passed
    assert gap.detail["gap_sc"] == pytest.approx(0.3) and gap.detail["gap_met"] == pytest.approx(0.75)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.9])
def test_k3_comparison_holds(p):
    rep = oracle.comparison_suite(K3, p, strict=False, gap_always=True)
    assert rep.passed, rep.failures()


def test_operator_identities_on_k3():
    for p in (0.3, 0.5, 0.9):
        rep = oracle.operator_identity_check(K3, p)
        assert rep.passed, rep.failures()
        assert len(rep.checks) == 5


# -- suites ---------------------------------------------------------------------

def test_full_suite_passes_on_k3_and_toric():
    assert oracle.full_suite(K3, graph=Graph.complete(3)).passed
    assert oracle.full_suite(TORIC).passed


def test_fault_injection_is_caught_by_name():
    rep = oracle.full_suite(K3, fault="metropolis-inverted")
    assert not rep.passed
    names = rep.failures()
    assert any("metropolis-rc" in n and "stationarity" in n for n in names)
    assert not any(n.startswith("sw ") for n in names)


def test_subspace_loss_bounds():
    ratio = oracle.subspace_loss_ratio(TORIC, Graph.cycle(4), 0.5, "primal")
    assert ratio <= 2
    for direction in ("primal", "dual"):
        code, K4 = delta_one_instance(direction)
        for p in (0.2, 0.5, 0.8):
            assert oracle.subspace_loss_ratio(code, K4, p, direction) <= 4


def test_report_json_is_sorted_and_stable():
    rep = oracle.coupling_suite(K3, 0.4)
    assert rep.to_json() == oracle.coupling_suite(K3, 0.4).to_json()
    assert '"pass": true' in rep.to_json()
