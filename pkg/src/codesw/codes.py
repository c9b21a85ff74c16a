"""Classical parity-check codes: Ising codes on graphs, toric families, file I/O,
and certificates that a code's check dependencies embed in a graph's cycle space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .gf2 import (
    BitMatrix,
    BitVector,
    kernel_basis,
    kernel_dim,
    orthogonal_complement_generator,
)

__all__ = [
    "Graph",
    "ParityCheckCode",
    "GraphicCertificate",
    "incidence_matrix",
    "ising_code",
    "toric2d",
    "toric4d",
    "torus_boundary",
    "code_from_even_covers",
    "delta_one_instance",
    "certify_graphic",
    "read_check_list",
    "write_check_list",
    "read_graph",
    "write_graph",
]


@dataclass(frozen=True)
class Graph:
    """Undirected multigraph on vertices ``0..m-1``; edge order is the edge indexing."""

    m: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.m < 0:
            raise ValueError("vertex count must be non-negative")
        for idx, (u, v) in enumerate(edges):
            if not (0 <= u < self.m and 0 <= v < self.m):
                raise ValueError(f"edge {idx} = ({u}, {v}) has an endpoint outside 0..{self.m - 1}")
            if u == v:
                raise ValueError(f"edge {idx} is a self-loop at vertex {u}")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @classmethod
    def cycle(cls, m: int) -> "Graph":
        if m < 2:
            raise ValueError("a cycle needs at least 2 vertices")
        return cls(m, tuple((i, (i + 1) % m) for i in range(m)))

    @classmethod
    def path(cls, m: int) -> "Graph":
        return cls(m, tuple((i, i + 1) for i in range(m - 1)))

    @classmethod
    def complete(cls, m: int) -> "Graph":
        return cls(m, tuple(itertools.combinations(range(m), 2)))

    @classmethod
    def bundle(cls, k: int) -> "Graph":
        """Two vertices joined by ``k`` parallel edges."""
        return cls(2, tuple((0, 1) for _ in range(k)))

    @classmethod
    def torus(cls, L: int, dim: int) -> "Graph":
        """1-skeleton of the periodic ``L^dim`` hypercubic lattice.

        Edge ``axis * L**dim + v`` joins vertex ``v`` to its neighbour along ``axis``.
        """
        nv = L**dim
        edges = []
        for axis in range(dim):
            for v in range(nv):
                edges.append((v, _shift(v, axis, L, dim)))
        return cls(nv, tuple(edges))


def _coords(v: int, L: int, dim: int) -> list[int]:
    return [(v // L**a) % L for a in range(dim)]


def _shift(v: int, axis: int, L: int, dim: int) -> int:
    c = _coords(v, L, dim)
    c[axis] = (c[axis] + 1) % L
    return sum(x * L**a for a, x in enumerate(c))


def incidence_matrix(G: Graph) -> BitMatrix:
    """Edge-vertex incidence matrix: row ``e`` marks the two endpoints of edge ``e``."""
    dense = np.zeros((G.n_edges, G.m), dtype=np.uint8)
    for e, (u, v) in enumerate(G.edges):
        dense[e, u] = 1
        dense[e, v] = 1
    return BitMatrix.from_dense(dense)


class ParityCheckCode:
    """Code ``ker(h)`` for a c x n parity-check matrix with energy ``2|hx|``."""

    def __init__(self, h: BitMatrix, name: str | None = None):
        if h.rows < 1 or h.cols < 1:
            raise ValueError(f"parity-check matrix must be at least 1x1, got {h.shape}")
        self.h = h
        self.name = name or f"code{h.rows}x{h.cols}"

    @property
    def c(self) -> int:
        return self.h.rows

    @property
    def n(self) -> int:
        return self.h.cols

    @property
    def rank(self) -> int:
        return self.h.rank

    @property
    def k(self) -> int:
        """Dimension of the code."""
        return self.n - self.rank

    @cached_property
    def column_supports(self) -> list[np.ndarray]:
        dense = self.h.to_dense()
        return [np.flatnonzero(dense[:, j]) for j in range(self.n)]

    def _check(self, x: BitVector) -> None:
        if len(x) != self.n:
            raise ValueError(f"configuration has length {len(x)}, code has n = {self.n}")

    def syndrome(self, x: BitVector) -> BitVector:
        self._check(x)
        return self.h @ x

    def energy(self, x: BitVector) -> int:
        """``H(x) = 2|hx|``."""
        return 2 * self.syndrome(x).weight

    def satisfied_checks(self, x: BitVector) -> frozenset[int]:
        """``E(x)``: indices of checks with ``(hx)_e = 0``."""
        s = self.syndrome(x).to_array()
        return frozenset(np.flatnonzero(s == 0).tolist())

    def __repr__(self) -> str:
        return f"ParityCheckCode({self.name!r}, c={self.c}, n={self.n}, k={self.k})"


def ising_code(G: Graph) -> ParityCheckCode:
    if G.n_edges == 0:
        raise ValueError("graph has no edges")
    return ParityCheckCode(incidence_matrix(G), name=f"ising(m={G.m},|E|={G.n_edges})")


def _cells(L: int, dim: int, k: int) -> list[tuple[int, tuple[int, ...]]]:
    nv = L**dim
    return [(v, axes) for axes in itertools.combinations(range(dim), k) for v in range(nv)]


def torus_boundary(L: int, dim: int, k: int) -> np.ndarray:
    """Mod-2 boundary map from k-cells to (k-1)-cells of the periodic ``L^dim`` torus.

    A k-cell is ``(base vertex, sorted axis tuple)``; cells are indexed by axis
    combination (in ``itertools.combinations`` order) and then by base vertex.
    Returns a dense ``#(k-1)-cells x #k-cells`` array.
    """
    lower = {cell: i for i, cell in enumerate(_cells(L, dim, k - 1))}
    upper = _cells(L, dim, k)
    out = np.zeros((len(lower), len(upper)), dtype=np.uint8)
    for j, (v, axes) in enumerate(upper):
        for a in axes:
            rest = tuple(b for b in axes if b != a)
            out[lower[(v, rest)], j] ^= 1
            out[lower[(_shift(v, a, L, dim), rest)], j] ^= 1
    return out


def toric2d(L: int) -> tuple[ParityCheckCode, ParityCheckCode]:
    """2D toric code on the L x L torus: qubits on edges, X checks on vertices,
    Z checks on plaquettes."""
    if L < 2:
        raise ValueError("toric code needs L >= 2")
    hx = torus_boundary(L, 2, 1)
    hz = torus_boundary(L, 2, 2).T
    return (
        ParityCheckCode(BitMatrix.from_dense(hx), name=f"toric2d(L={L}).X"),
        ParityCheckCode(BitMatrix.from_dense(hz), name=f"toric2d(L={L}).Z"),
    )


def toric4d(L: int) -> tuple[ParityCheckCode, ParityCheckCode]:
    """4D toric code: qubits on faces, X checks on edges, Z checks on 3-cells."""
    if L < 2:
        raise ValueError("toric code needs L >= 2")
    hx = torus_boundary(L, 4, 2)
    hz = torus_boundary(L, 4, 3).T
    return (
        ParityCheckCode(BitMatrix.from_dense(hx), name=f"toric4d(L={L}).X"),
        ParityCheckCode(BitMatrix.from_dense(hz), name=f"toric4d(L={L}).Z"),
    )


def code_from_even_covers(covers: Sequence[BitVector], c: int) -> ParityCheckCode:
    """A code on ``c`` checks whose even covers ``ker(h^T)`` are exactly ``span(covers)``.

    The columns of ``h`` span the orthogonal complement of the given subspace.
    """
    U = BitMatrix.from_columns(list(covers), c)
    h = orthogonal_complement_generator(U)
    if h.cols == 0:
        raise ValueError("the covers span the whole space; no checks remain")
    return ParityCheckCode(h, name=f"even-cover-code(c={c})")


def delta_one_instance(direction: str = "primal") -> tuple[ParityCheckCode, Graph]:
    """A code on the six edges of K4 whose certificate against K4 has delta 1.

    Two triangles of K4 span a codim-1 subspace of its 3-dimensional cycle space.
    Primal: those triangles are the code's even covers.  Dual: they are the
    columns of ``h``, so ``col(h)`` is that subspace.
    """
    G = Graph.complete(4)
    tri = [BitVector.from_support(s, G.n_edges) for s in ((0, 1, 3), (0, 2, 4))]
    if direction == "primal":
        code = code_from_even_covers(tri, G.n_edges)
    elif direction == "dual":
        code = ParityCheckCode(BitMatrix.from_columns(tri, G.n_edges), name="triangles(K4)")
    else:
        raise ValueError(f"direction must be 'primal' or 'dual', got {direction!r}")
    return code, G


@dataclass(frozen=True)
class GraphicCertificate:
    """Witness that the check dependencies of a code embed in a graph's cycle space."""

    graph: Graph
    direction: str
    delta: int
    incidence: BitMatrix = field(repr=False)

    @property
    def m(self) -> int:
        return self.graph.m

    def verify(self, code: ParityCheckCode) -> bool:
        again = certify_graphic(code, self.graph, self.direction)
        return again is not None and again.delta == self.delta


def _target_matrix(code: ParityCheckCode, direction: str) -> BitMatrix:
    if direction == "primal":
        return code.h
    if direction == "dual":
        return orthogonal_complement_generator(code.h)
    raise ValueError(f"direction must be 'primal' or 'dual', got {direction!r}")


def certify_graphic(code: ParityCheckCode, G: Graph, direction: str = "primal") -> GraphicCertificate | None:
    """Check ``ker(g^T) ⊇ ker(t^T)`` for ``g`` the incidence of ``G`` and ``t`` either
    ``h`` (primal) or a column generator of ``col(h)^⊥`` (dual).

    Returns the certificate with ``delta = dim ker(g^T) - dim ker(t^T)``, or None
    when the containment fails.  The vertex count is recorded, not bounded.
    """
    target = _target_matrix(code, direction)
    g = incidence_matrix(G)
    if g.rows != code.c:
        raise ValueError(f"graph has {g.rows} edges but the code has {code.c} checks")
    gT = g.T
    for v in kernel_basis(target.T):
        if (gT @ v).any():
            return None
    delta = kernel_dim(gT) - kernel_dim(target.T)
    return GraphicCertificate(graph=G, direction=direction, delta=delta, incidence=g)


# -- file formats ------------------------------------------------------------


def _content_lines(path) -> list[str]:
    with open(path) as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]


def parse_check_list(lines: Sequence[str]) -> ParityCheckCode:
    if not lines:
        raise ValueError("empty check-list file")
    try:
        c, n = (int(t) for t in lines[0].split())
    except ValueError as exc:
        raise ValueError(f"bad header {lines[0]!r}; expected 'c n'") from exc
    body = lines[1:]
    if len(body) != c:
        raise ValueError(f"header declares {c} checks, found {len(body)}")
    dense = np.zeros((c, n), dtype=np.uint8)
    for i, line in enumerate(body):
        for tok in line.split():
            j = int(tok)
            if not 0 <= j < n:
                raise ValueError(f"check {i} references variable {j} outside 0..{n - 1}")
            dense[i, j] ^= 1
    return ParityCheckCode(BitMatrix.from_dense(dense))


def read_check_list(path) -> ParityCheckCode:
    """Read ``c n`` followed by one line of variable indices per check."""
    code = parse_check_list(_content_lines(path))
    code.name = str(path)
    return code


def format_check_list(code: ParityCheckCode) -> str:
    lines = [f"{code.c} {code.n}"]
    for row in code.h.to_dense():
        lines.append(" ".join(str(j) for j in np.flatnonzero(row)))
    return "\n".join(lines) + "\n"


def write_check_list(code: ParityCheckCode, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_check_list(code))


def parse_graph(lines: Sequence[str]) -> Graph:
    if not lines:
        raise ValueError("empty graph file")
    m = int(lines[0].split()[0])
    edges = []
    for line in lines[1:]:
        u, v = (int(t) for t in line.split())
        edges.append((u, v))
    return Graph(m, tuple(edges))


def read_graph(path) -> Graph:
    """Read ``m`` followed by one ``u v`` pair per edge."""
    return parse_graph(_content_lines(path))


def format_graph(G: Graph) -> str:
    return "\n".join([str(G.m)] + [f"{u} {v}" for u, v in G.edges]) + "\n"


def write_graph(G: Graph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(G))


def graph_from_spec(spec: str) -> Graph:
    """Builtin graph names: ``cycle:m``, ``path:m``, ``complete:m``, ``bundle:k``,
    ``torus2d:L``, ``torus4d:L``.  Anything else is read as a graph file."""
    kind, _, arg = spec.partition(":")
    builders = {
        "cycle": Graph.cycle,
        "path": Graph.path,
        "complete": Graph.complete,
        "bundle": Graph.bundle,
        "torus2d": lambda L: Graph.torus(L, 2),
        "torus4d": lambda L: Graph.torus(L, 4),
    }
    if kind in builders and arg:
        return builders[kind](int(arg))
    return read_graph(spec)


def iter_subsets(mask_bits: int) -> Iterable[int]:
    """All integers whose set bits lie inside ``mask_bits``."""
    sub = mask_bits
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask_bits
