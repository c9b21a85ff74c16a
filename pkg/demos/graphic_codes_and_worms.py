"""Graphic certificates and the worm construction behind the RC mixing bound.

A code is coupled to a graph when its check dependencies sit inside the graph's
cycle space; the worm chain on that graph then routes canonical paths whose
congestion we compute exactly on small instances.
"""

from codesw.codes import Graph, certify_graphic, delta_one_instance, ising_code, toric2d, toric4d
from codesw.worm import canonical_path, defects, flow_congestion_exact, mixing_time_check

for L in (2, 3, 4):
    cert = certify_graphic(toric2d(L)[0], Graph.cycle(L * L), "primal")
    print(f"2D toric L={L}: primal delta = {cert.delta}")
for L in (2, 3):
    cert = certify_graphic(toric4d(L)[0], Graph.torus(L, 4), "dual")
    print(f"4D toric L={L}: dual delta = {cert.delta} against the {L}^4 torus skeleton")

# one canonical path: empty set to the full 6-cycle, flipping one edge at a time
C6 = Graph.cycle(6)
path = canonical_path(C6, 0, (1 << 6) - 1)
print("C6 path edges:", path.edges, "defects along the way:", [len(defects(C6, S)) for S in path.states])

for name, code, G in [("C4", ising_code(Graph.cycle(4)), Graph.cycle(4)),
                      ("K4", ising_code(Graph.complete(4)), Graph.complete(4)),
                      ("K4 delta=1", *delta_one_instance("primal"))]:
    rep = flow_congestion_exact(code, G, 0.5, "primal")
    print(f"{name:>10}: congestion {rep.congestion:8.2f}  bound {rep.bound:.3g}  delta {rep.delta}")

K3 = Graph.complete(3)
out = mixing_time_check(ising_code(K3), K3, 0.5)
print(f"K3 p=0.5: tau(Metropolis) = {out['tau']} <= {out['upper']:.2f}")
