"""Command-line interface: files, exit codes and byte-level determinism."""

import json

import numpy as np
import pytest

from codesw.cli import main
from codesw.codes import read_check_list
from codesw.stabilizer import read_stabilizer


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_toric2d(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "--family", "toric2d", "--size", 2, "--out", tmp_path)
    assert code == 0
    for sector in "XZ":
        c = read_check_list(tmp_path / f"toric2d_L2_{sector}.checks")
        assert (c.c, c.n) == (4, 8)
    model = read_stabilizer(tmp_path / "toric2d_L2.stab")
    assert (model.n, model.c, model.k) == (8, 8, 2)
    assert len(json.loads(out)["written"]) == 3


def test_gen_ising_and_errors(tmp_path, capsys):
    assert run(capsys, "gen", "--family", "ising-graph", "--graph", "complete:3", "--out", tmp_path)[0] == 0
    c = read_check_list(tmp_path / "ising.checks")
    assert (c.c, c.n) == (3, 3)
    assert run(capsys, "gen", "--family", "hexagonal", "--out", tmp_path)[0] == 2
    assert run(capsys, "gen", "--family", "toric2d", "--out", tmp_path)[0] == 2
    assert run(capsys, "gen", "--family", "ising-graph", "--graph", tmp_path / "missing", "--out", tmp_path)[0] == 2


@pytest.mark.parametrize("chain", ["sw", "sw-rc", "metropolis-rc", "single-check", "glauber"])
def test_sample_is_deterministic(tmp_path, capsys, chain):
    outs = []
    for k in range(2):
        prefix = tmp_path / f"{chain}{k}"
        code, out, _ = run(capsys, "sample", "--code", "toric2d:2", "--chain", chain, "--beta", 0.4,
                           "--steps", 3000, "--seed", 17, "--out", prefix)
        assert code == 0
        outs.append(((tmp_path / f"{chain}{k}.csv").read_bytes(),
                     out.replace(str(prefix), "PREFIX")))
    assert outs[0] == outs[1]
    summary = json.loads(outs[0][1])
    assert 0 <= summary["replicas"][0]["tv_post_burn_in"] <= 1


def test_sample_replicas_and_worm(tmp_path, capsys):
    prefix = tmp_path / "w"
    code, out, _ = run(capsys, "sample", "--code", "ising:cycle:4", "--chain", "worm", "--graph", "cycle:4",
                       "--p", 0.4, "--steps", 20_000, "--seed", 2, "--replicas", 3, "--out", prefix)
    assert code == 0
    summary = json.loads(out)
    assert len(summary["replicas"]) == 3
    traces = [(tmp_path / f"w.r{i}.csv").read_text() for i in range(3)]
    assert len(set(traces)) == 3
    assert all(r["tv_post_burn_in"] < 0.05 for r in summary["replicas"])
    assert run(capsys, "sample", "--code", "ising:cycle:4", "--chain", "worm", "--steps", 10)[0] == 2


def test_sample_usage_errors(capsys):
    assert run(capsys, "sample", "--code", "toric2d:2", "--chain", "sw", "--beta", 1, "--p", 0.5)[0] == 2
    assert run(capsys, "sample", "--code", "toric2d:2", "--chain", "sw", "--beta", -1)[0] == 2
    assert run(capsys, "sample", "--code", "toric2d:2", "--chain", "heatbath")[0] == 2
    assert run(capsys, "sample", "--code", "nowhere.checks", "--chain", "sw")[0] == 2


def test_sample_hot_start_differs(tmp_path, capsys):
    def final(init):
        _, out, _ = run(capsys, "sample", "--code", "ising:cycle:8", "--chain", "glauber", "--beta", 0.1,
                        "--steps", 1, "--seed", 5, "--init", init)
        return json.loads(out)["replicas"][0]["final"]
    assert final("cold").count("1") <= 1
    assert final("hot") != final("cold")


def test_verify_pass_and_fault(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--code", "ising:complete:3", "--out", tmp_path / "r.json")
    assert code == 0 and json.loads(out)["pass"]
    assert (tmp_path / "r.json").read_text() == out
    code, out, _ = run(capsys, "verify", "--code", "ising:complete:3", "--suite", "stationarity",
                       "--inject-fault", "metropolis-inverted")
    assert code == 1
    failed = json.loads(out)["failed"]
    assert failed and all("metropolis-rc" in name for name in failed)
    code, out, _ = run(capsys, "verify", "--code", "toric2d:2", "--suite", "coupling")
    assert code == 0
    assert run(capsys, "verify", "--code", "toric2d:2", "--p", "0,1.5")[0] == 2


def test_certify(tmp_path, capsys):
    code, out, _ = run(capsys, "certify", "--code", "toric2d:2", "--graph", "cycle:4", "--direction", "primal")
    assert code == 0 and json.loads(out)["delta"] == 0
    code, out, _ = run(capsys, "certify", "--code", "toric4d:2", "--graph", "torus4d:2", "--direction", "dual",
                       "--delta", 4)
    assert code == 0 and json.loads(out)["delta"] == 4
    assert run(capsys, "certify", "--code", "toric4d:2", "--graph", "torus4d:2", "--direction", "dual",
               "--delta", 3)[0] == 1
    # a random graph on the right number of edges: containment fails
    rng = np.random.default_rng(0)
    edges = set()
    while len(edges) < 4:
        u, v = sorted(rng.choice(5, 2, replace=False).tolist())
        edges.add((u, v))
    gpath = tmp_path / "rand.graph"
    gpath.write_text("5 4\n" + "".join(f"{u} {v}\n" for u, v in sorted(edges)))
    code, out, _ = run(capsys, "certify", "--code", "toric2d:2", "--graph", gpath)
    assert code == 1 and json.loads(out)["certified"] is False


def test_quantum_exact_and_trajectory(capsys):
    code, out, _ = run(capsys, "quantum", "--code", "xx-zz", "--beta", 0.7, "--steps", 200, "--mode", "exact")
    res = json.loads(out)
    assert code == 0 and res["final_trace_distance"] <= 1e-8 and res["quantum_below_classical"]
    code, out, _ = run(capsys, "quantum", "--code", "toric2d:2", "--beta", 0, "--steps", 20_000,
                       "--mode", "trajectory", "--chain", "sw", "--seed", 1)
    res = json.loads(out)
    assert code == 0
    # at beta = 0 syndromes are uniform over col(h): weight counts follow the even-weight binomial
    counts = np.array(res["syndrome_weight_counts"], dtype=float)
    assert counts[1::2].sum() == 0
    assert res["tv_post_burn_in"] < 0.1
    assert run(capsys, "quantum", "--code", "toric2d:2", "--beta", 1, "--mode", "exact")[0] == 2
