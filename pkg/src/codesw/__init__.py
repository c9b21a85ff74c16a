"""Swendsen-Wang style samplers for classical parity-check codes and
commuting Pauli stabilizer Hamiltonians, with exact small-instance oracles."""

from .gf2 import BitMatrix, BitVector, kernel_basis, lex_min_solution, rank, uniform_kernel_sample
from .codes import (
    Graph,
    GraphicCertificate,
    ParityCheckCode,
    certify_graphic,
    code_from_even_covers,
    incidence_matrix,
    ising_code,
    toric2d,
    toric4d,
)
from .dynamics import CHAINS, ChainParams, ChainRun, LiftParams, run_chain
from .stabilizer import PauliLabel, StabilizerModel, css_model, exact_run, trajectory_sampler
from .worm import WormSpace, canonical_path, flow_congestion_exact, run_worm
from .oracle import ExactDistribution, Report, build_transition_matrix, spectral_gap, exact_mixing_time

__version__ = "0.1.0"

__all__ = [
    "BitMatrix", "BitVector", "kernel_basis", "lex_min_solution", "rank", "uniform_kernel_sample",
    "Graph", "GraphicCertificate", "ParityCheckCode", "certify_graphic", "code_from_even_covers",
    "incidence_matrix", "ising_code", "toric2d", "toric4d",
    "CHAINS", "ChainParams", "ChainRun", "LiftParams", "run_chain",
    "PauliLabel", "StabilizerModel", "css_model", "exact_run", "trajectory_sampler",
    "WormSpace", "canonical_path", "flow_congestion_exact", "run_worm",
    "ExactDistribution", "Report", "build_transition_matrix", "spectral_gap", "exact_mixing_time",
]
