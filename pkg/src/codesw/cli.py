"""Command-line entry point: ``codesw {gen,sample,verify,certify,quantum}``.

Exit codes: 0 success, 1 a check failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import analysis, oracle
from .codes import (
    Graph,
    ParityCheckCode,
    certify_graphic,
    graph_from_spec,
    ising_code,
    read_check_list,
    toric2d,
    toric4d,
    write_check_list,
    write_graph,
)
from .dynamics import CHAINS, ChainParams, beta_from_p, run_chain, states_to_ints
from .gf2 import BitMatrix, BitVector
from .stabilizer import (
    StabilizerModel,
    css_model,
    exact_run,
    read_stabilizer,
    trajectory_sampler,
    write_stabilizer,
)
from .worm import WormSpace, run_worm

ALL_CHAINS = CHAINS + ("worm",)
ENUM_LIMIT = 16


class UsageError(Exception):
    pass


# -- spec parsing ------------------------------------------------------------


def load_code(spec: str) -> ParityCheckCode:
    """``ising:<graph>``, ``toric2d:L[:X|Z]``, ``toric4d:L[:X|Z]`` or a check-list file."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "ising":
            return ising_code(graph_from_spec(rest))
        if kind in ("toric2d", "toric4d"):
            L, _, sector = rest.partition(":")
            pair = (toric2d if kind == "toric2d" else toric4d)(int(L))
            return pair[0] if sector in ("", "X") else pair[1]
        return read_check_list(spec)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load code {spec!r}: {exc}") from exc


def load_stabilizer(spec: str) -> StabilizerModel:
    """``xx-zz`` (two-qubit {XX, ZZ}), ``toric2d:L`` or a stabilizer file."""
    try:
        if spec == "xx-zz":
            return StabilizerModel(BitMatrix.from_rows(["1100", "0011"]), name="xx-zz")
        kind, _, rest = spec.partition(":")
        if kind in ("toric2d", "toric4d"):
            hx, hz = (toric2d if kind == "toric2d" else toric4d)(int(rest))
            return css_model(hx.h, hz.h, name=spec)
        return read_stabilizer(spec)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load stabilizer model {spec!r}: {exc}") from exc


def load_graph(spec: str) -> Graph:
    try:
        return graph_from_spec(spec)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load graph {spec!r}: {exc}") from exc


def resolve_beta(args) -> float:
    if args.beta is not None and args.p is not None:
        raise UsageError("give --beta or --p, not both")
    if args.p is not None:
        if not 0 <= args.p <= 1:
            raise UsageError("--p must lie in [0, 1]")
        return beta_from_p(args.p)
    beta = 1.0 if args.beta is None else args.beta
    if not beta >= 0:
        raise UsageError("--beta must be non-negative")
    return beta


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(payload: dict, out: Optional[str]) -> None:
    text = _dump(payload)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


# -- subcommands -------------------------------------------------------------


def cmd_gen(args) -> int:
    fam = args.family
    os.makedirs(args.out, exist_ok=True)
    written = []

    def put(code: ParityCheckCode, name: str):
        path = os.path.join(args.out, name)
        write_check_list(code, path)
        written.append(path)

    if fam in ("toric2d", "toric4d"):
        if args.size is None:
            raise UsageError(f"--size is required for {fam}")
        hx, hz = (toric2d if fam == "toric2d" else toric4d)(args.size)
        stem = f"{fam}_L{args.size}"
        put(hx, f"{stem}_X.checks")
        put(hz, f"{stem}_Z.checks")
        path = os.path.join(args.out, f"{stem}.stab")
        write_stabilizer(css_model(hx.h, hz.h), path)
        written.append(path)
    elif fam == "ising-graph":
        if not args.graph:
            raise UsageError("--graph is required for ising-graph")
        G = load_graph(args.graph)
        put(ising_code(G), "ising.checks")
        path = os.path.join(args.out, "ising.graph")
        write_graph(G, path)
        written.append(path)
    elif fam == "from-file":
        if not args.code:
            raise UsageError("--code is required for from-file")
        put(load_code(args.code), "code.checks")
    else:
        raise UsageError(f"unknown family {fam!r}")
    _emit({"written": written}, None)
    return 0


def _initial(code: ParityCheckCode, chain: str, init: str, rng: np.random.Generator):
    if init == "cold":
        return None, 0
    if chain in ("sw", "glauber"):
        return BitVector.from_bits(rng.integers(0, 2, code.n)), 0
    if chain == "worm":
        return None, 0
    return None, int(sum(int(b) << e for e, b in enumerate(rng.integers(0, 2, code.c))))


def cmd_sample(args) -> int:
    code = load_code(args.code)
    beta = resolve_beta(args)
    params = ChainParams(beta)
    if args.steps < 1:
        raise UsageError("--steps must be positive")
    if args.replicas < 1:
        raise UsageError("--replicas must be positive")
    graph = load_graph(args.graph) if args.graph else None
    if args.chain == "worm":
        if graph is None:
            raise UsageError("--chain worm needs --graph")
        if graph.n_edges != code.c:
            raise UsageError("graph edges must match the code's checks")
    seqs = np.random.SeedSequence(args.seed).spawn(args.replicas)
    summaries = []
    for i, ss in enumerate(seqs):
        rng = np.random.Generator(np.random.PCG64(ss))
        suffix = f".r{i}" if args.replicas > 1 else ""
        summaries.append(_sample_one(args, code, params, graph, rng, suffix))
    payload = {
        "code": code.name, "n": code.n, "c": code.c, "chain": args.chain, "beta": beta,
        "p": params.p, "steps": args.steps, "seed": args.seed, "init": args.init,
        "replicas": summaries,
    }
    _emit(payload, f"{args.out}.json" if args.out else None)
    return 0


def _sample_one(args, code, params, graph, rng, suffix) -> dict:
    steps = args.steps
    burn = steps // 2
    summary: dict = {}
    if args.chain == "worm":
        direction = args.direction or "primal"
        space = WormSpace.for_lift(graph, params.p, direction)
        run = run_worm(space, steps, rng, record_states=graph.n_edges <= ENUM_LIMIT)
        cols = {"size": run.sizes, "defects": run.defect_counts}
        summary["final"] = format(run.final, f"0{graph.n_edges}b")[::-1]
        if run.states is not None:
            exact = oracle.enumerate_worm(graph, space.p_weight)
            summary["tv_post_burn_in"] = analysis.empirical_tv(states_to_ints(run.states[burn:]), exact)
    else:
        x0, A0 = _initial(code, args.chain, args.init, rng)
        enumerable = (code.n if args.chain in ("sw", "glauber") else code.c) <= ENUM_LIMIT
        run = run_chain(code, args.chain, params, steps, rng, x0=x0, A0=A0, record_states=enumerable)
        cols = {run.observable_name: run.observable}
        final = run.final
        summary["final"] = str(final) if isinstance(final, BitVector) else format(final, f"0{code.c}b")[::-1]
        if enumerable:
            if args.chain in ("sw", "glauber"):
                exact = oracle.enumerate_gibbs(code, params.beta)
            else:
                exact = oracle.enumerate_rc(code, params.p)
            summary["tv_post_burn_in"] = analysis.empirical_tv(states_to_ints(run.states[burn:]), exact)
    name = next(iter(cols))
    tail = cols[name][burn:]
    summary.update({
        "observable": name,
        "mean_post_burn_in": float(np.mean(tail)),
        "autocorrelation_time": analysis.autocorrelation_time(tail),
        "burn_in": burn,
    })
    if args.out:
        path = f"{args.out}{suffix}.csv"
        analysis.write_trace_csv(path, cols)
        summary["trace"] = path
    return summary


def _parse_ps(text: str) -> list[float]:
    try:
        ps = [float(t) for t in text.split(",") if t]
    except ValueError as exc:
        raise UsageError(f"bad --p list {text!r}") from exc
    if not ps or any(not 0 < p < 1 for p in ps):
        raise UsageError("--p values must lie strictly between 0 and 1")
    return ps


def cmd_verify(args) -> int:
    code = load_code(args.code)
    ps = _parse_ps(args.p) if args.p else [0.2, 0.5, 0.8]
    if args.beta is not None:
        ps = [ChainParams(args.beta).p]
    graph = load_graph(args.graph) if args.graph else None
    tol = args.tol
    suite = args.suite
    rep = oracle.Report(f"verify {code.name}")
    try:
        for p in ps:
            if suite in ("full", "stationarity"):
                rep.extend(oracle.stationarity_suite(code, p, tol, graph=graph, fault=args.inject_fault))
            if suite in ("full", "coupling"):
                rep.extend(oracle.coupling_suite(code, p, tol=tol))
            if suite in ("full", "comparison"):
                rep.extend(oracle.comparison_suite(code, p, fault=args.inject_fault))
            if suite in ("full", "operators") and (1 << (code.n + code.c)) <= 1 << 16:
                rep.extend(oracle.operator_identity_check(code, p, min(tol, oracle.OPERATOR_TOL)))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload = rep.to_dict()
    payload["failed"] = rep.failures()
    _emit(payload, args.out)
    return 0 if rep.passed else 1


def cmd_certify(args) -> int:
    code = load_code(args.code)
    if not args.graph:
        raise UsageError("--graph is required")
    G = load_graph(args.graph)
    direction = args.direction
    try:
        cert = certify_graphic(code, G, direction)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    payload = {"code": code.name, "direction": direction, "graph_vertices": G.m, "graph_edges": G.n_edges}
    if cert is None:
        payload.update({"certified": False, "reason": "containment failed"})
        _emit(payload, args.out)
        return 1
    ok = args.delta is None or cert.delta <= args.delta
    payload.update({"certified": ok, "delta": cert.delta, "requested_delta": args.delta})
    _emit(payload, args.out)
    return 0 if ok else 1


def cmd_quantum(args) -> int:
    model = load_stabilizer(args.code)
    beta = resolve_beta(args)
    chain = args.chain or "glauber"
    payload: dict = {"model": model.name, "n": model.n, "c": model.c, "k": model.k, "beta": beta,
                     "steps": args.steps, "mode": args.mode, "chain": chain}
    if args.mode == "exact":
        if model.n > 4:
            raise UsageError("exact mode supports n <= 4")
        Q = oracle.build_transition_matrix(chain, model.classical_code, beta=beta)
        pi = oracle.enumerate_gibbs(model.classical_code, beta).dense()
        td = exact_run(model, Q.P, beta, args.steps)
        classical = oracle.worst_case_distance(Q.P, pi, args.steps) / 2
        ok = bool(np.all(td <= classical + 1e-12))
        payload.update({
            "trace_distance": td.tolist(),
            "classical_worst_tv": classical.tolist(),
            "final_trace_distance": float(td[-1]),
            "quantum_below_classical": ok,
        })
        if args.tol is not None:
            ok = ok and td[-1] <= args.tol
        payload["pass"] = ok
        _emit(payload, args.out)
        return 0 if ok else 1
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
    synd = trajectory_sampler(model, chain, beta, args.steps, rng)
    weights = np.bincount(synd.sum(axis=1), minlength=model.c + 1)
    payload["syndrome_weight_counts"] = weights.tolist()
    if model.c <= 20:
        zeta = oracle.enumerate_syndromes(model.classical_code, beta) if 2 * model.n <= ENUM_LIMIT else None
        if zeta is not None:
            samples = states_to_ints(synd[1 + args.steps // 2:])
            tv = analysis.empirical_tv(samples, zeta)
            payload["tv_post_burn_in"] = tv
    payload["pass"] = True
    _emit(payload, args.out)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="codesw", description="Code Swendsen-Wang sampling and verification")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write check-list / stabilizer files for a code family")
    g.add_argument("--family", required=True, choices=["ising-graph", "toric2d", "toric4d", "from-file"])
    g.add_argument("--size", type=int)
    g.add_argument("--graph")
    g.add_argument("--code")
    g.add_argument("--out", required=True, help="output directory")

    s = sub.add_parser("sample", help="run a chain and write traces")
    s.add_argument("--code", required=True)
    s.add_argument("--chain", required=True, choices=ALL_CHAINS)
    s.add_argument("--beta", type=float)
    s.add_argument("--p", type=float)
    s.add_argument("--steps", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--replicas", type=int, default=1)
    s.add_argument("--init", choices=["cold", "hot"], default="cold")
    s.add_argument("--graph")
    s.add_argument("--direction", choices=["primal", "dual"])
    s.add_argument("--out", help="output prefix for <out>.csv and <out>.json")

    v = sub.add_parser("verify", help="exact oracle suites")
    v.add_argument("--code", required=True)
    v.add_argument("--suite", default="full", choices=["full", "stationarity", "coupling", "comparison", "operators"])
    v.add_argument("--p", help="comma-separated bond probabilities (default 0.2,0.5,0.8)")
    v.add_argument("--beta", type=float)
    v.add_argument("--graph", help="coupling graph for worm stationarity")
    v.add_argument("--tol", type=float, default=oracle.DEFAULT_TOL)
    v.add_argument("--inject-fault", choices=oracle.FAULTS)
    v.add_argument("--out")

    c = sub.add_parser("certify", help="check a graphic / cographic certificate")
    c.add_argument("--code", required=True)
    c.add_argument("--graph", required=True)
    c.add_argument("--direction", "--mode", dest="direction", choices=["primal", "dual"], default="primal")
    c.add_argument("--delta", type=int)
    c.add_argument("--out")

    q = sub.add_parser("quantum", help="quantum Gibbs sampler (exact channel or Pauli-frame trajectory)")
    q.add_argument("--code", required=True, help="stabilizer file, 'xx-zz' or 'toric2d:L'")
    q.add_argument("--beta", type=float)
    q.add_argument("--p", type=float)
    q.add_argument("--steps", type=int, default=200)
    q.add_argument("--mode", choices=["exact", "trajectory"], default="exact")
    q.add_argument("--chain", choices=CHAINS[:1] + ("glauber",))
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tol", type=float)
    q.add_argument("--out")
    return ap


COMMANDS = {"gen": cmd_gen, "sample": cmd_sample, "verify": cmd_verify, "certify": cmd_certify,
            "quantum": cmd_quantum}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"codesw: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"codesw: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
