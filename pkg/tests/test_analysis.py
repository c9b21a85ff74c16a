"""Empirical TV, autocorrelation times and KS consistency."""

import numpy as np
import pytest

from codesw import oracle
from codesw.analysis import (
    TraceSeries,
    autocorrelation_function,
    autocorrelation_time,
    empirical_tv,
    histogram,
    ks_consistency,
    two_seed_consistency,
    write_trace_csv,
)
from codesw.codes import Graph, ising_code
from codesw.dynamics import ChainParams, run_chain, states_to_ints


def test_tv_of_exact_draws_is_small():
    exact = oracle.enumerate_gibbs(ising_code(Graph.cycle(5)), 0.6)
    draws = np.random.default_rng(0).choice(exact.states, size=1_000_000, p=exact.probs)
    assert empirical_tv(draws, exact) <= 0.01


def test_tv_of_point_mass_against_uniform():
    N = 16
    uniform = oracle.ExactDistribution(np.arange(N), np.full(N, 1 / N), 4)
    assert empirical_tv(np.full(100, 3), uniform) == pytest.approx(1 - 1 / N)


def test_k3_sw_samples():
    code = ising_code(Graph.complete(3))
    run = run_chain(code, "sw", ChainParams(1.0), 110_000, np.random.default_rng(1), record_states=True)
    assert empirical_tv(states_to_ints(run.states[10_000:]), oracle.enumerate_gibbs(code, 1.0)) <= 0.02


def test_histogram():
    assert histogram(np.array([0, 0, 1, 3]), 4).tolist() == [0.5, 0.25, 0, 0.25]
    with pytest.raises(ValueError):
        histogram(np.array([5]), 4)


def test_autocorrelation_iid_and_degenerate():
    x = np.random.default_rng(2).normal(size=200_000)
    assert autocorrelation_time(x) == pytest.approx(1.0, rel=0.1)
    assert autocorrelation_function(np.ones(10)).tolist() == [1.0] + [0.0] * 9
    alt = np.tile([1.0, -1.0], 5000)
    # rho(1) = -1 makes tau negative, so the window closes at W = 1 with tau = 1 - 2
    assert autocorrelation_time(alt) == pytest.approx(-1.0, abs=0.01)


def test_autocorrelation_of_ar1():
    rng = np.random.default_rng(3)
    a = 0.8
    x = np.zeros(400_000)
    noise = rng.normal(size=x.size)
    for t in range(1, x.size):
        x[t] = a * x[t - 1] + noise[t]
    assert autocorrelation_time(x) == pytest.approx((1 + a) / (1 - a), rel=0.1)


def test_ks_identical_and_null():
    a = np.random.default_rng(4).normal(size=1000)
    rep = ks_consistency(a, a)
    assert rep.statistic == 0 and rep.verdict
    exact = oracle.enumerate_gibbs(ising_code(Graph.cycle(4)), 0.5)
    rng = np.random.default_rng(5)
    draw = lambda: rng.choice(exact.states, size=10_000, p=exact.probs)
    assert ks_consistency(draw(), draw(), alpha=0.01).verdict
    shifted = ks_consistency(rng.normal(size=5000), rng.normal(0.3, size=5000))
    assert not shifted.verdict and shifted.to_dict()["verdict"] == "fail"


def test_two_seed_consistency_requires_two_seeds():
    code = ising_code(Graph.cycle(6))
    run = lambda s: run_chain(code, "sw", ChainParams(0.4), 4000, np.random.default_rng(s)).observable
    rep = two_seed_consistency(run, [1, 2], 4000)
    assert rep.verdict and rep.detail["burn_in"] == 2000
    with pytest.raises(ValueError):
        two_seed_consistency(run, [1], 10)
    assert len(TraceSeries(np.arange(10)).after_burn_in()) == 5


def test_trace_csv(tmp_path):
    path = tmp_path / "t.csv"
    write_trace_csv(path, {"energy": np.array([0, 2]), "m": np.array([0.5, 1.0])})
    assert path.read_text() == "step,energy,m\n1,0,0.5\n2,2,1.0\n"
