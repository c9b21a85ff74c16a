"""Sampling the Gibbs state of a commuting Pauli Hamiltonian.

For {XX, ZZ} we iterate the exact channel and watch the trace distance to the
Gibbs state fall below the classical chain's worst-case distance.  For the
L=2 toric code we run the Pauli-frame version and compare measured syndromes
with the exact syndrome law.
"""

import numpy as np

from codesw import oracle
from codesw.analysis import empirical_tv
from codesw.codes import toric2d
from codesw.dynamics import states_to_ints
from codesw.gf2 import BitMatrix
from codesw.stabilizer import StabilizerModel, css_model, exact_run, trajectory_sampler

model = StabilizerModel(BitMatrix.from_rows(["1100", "0011"]), name="xx-zz")
beta = 0.7
Q = oracle.build_transition_matrix("glauber", model.classical_code, beta=beta).P
pi = oracle.enumerate_gibbs(model.classical_code, beta).dense()
td = exact_run(model, Q, beta, 200)
cl = oracle.worst_case_distance(Q, pi, 200) / 2
for t in (0, 1, 5, 20, 50, 100, 200):
    print(f"t={t:3d}  quantum {td[t]:.3e}  classical worst case {cl[t]:.3e}")

hx, hz = toric2d(2)
toric = css_model(hx.h, hz.h, name="toric2d L=2")
for beta in (0.3, 1.0):
    synd = trajectory_sampler(toric, "glauber", beta, 200_000, np.random.default_rng(0))
    zeta = oracle.enumerate_syndromes(toric.classical_code, beta)
    tv = empirical_tv(states_to_ints(synd[1:]), zeta)
    print(f"toric beta={beta}: mean syndrome weight {synd[1:].sum(axis=1).mean():.3f}, TV to exact {tv:.3f}")
