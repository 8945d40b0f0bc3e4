import itertools
import json
import math
import os
import pathlib

import pytest

import loopseries as ls

DATA = pathlib.Path(os.environ.get("LOOPSERIES_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))

TWO_NODE = {"nodes": 2, "edges": [{"i": 0, "j": 1, "psi": [[2, 1], [1, 2]]}]}


def brute_z(spec):
    total = 0.0
    for x in itertools.product(range(2), repeat=spec["nodes"]):
        w = 1.0
        for e in spec["edges"]:
            w *= e["psi"][x[e["i"]]][x[e["j"]]]
        total += w
    return total


def test_two_node_partition():
    g = ls.graph_from_dict(TWO_NODE)
    assert g.node_count == 2
    assert g.edges == [(0, 1)]
    assert ls.exact_partition(g) == 6.0


def test_diamond_identity_and_marginals():
    spec = json.loads((DATA / "diamond.json").read_text())
    g = ls.Graph.load(str(DATA / "diamond.json"))
    z = brute_z(spec)
    s = ls.loop_series(g)
    assert math.isclose(s["z_estimate"], z, rel_tol=1e-9)
    assert math.isclose(s["z_bethe"] * s["theta"], s["z_estimate"], rel_tol=1e-14)
    assert len(s["terms"]) == 4
    exact = ls.exact_marginals(g)
    for v in range(g.node_count):
        t = ls.marginal(g, v, "transfer")
        d = ls.marginal(g, v, "diagram")
        assert math.isclose(t["p"][0], exact[v][0], rel_tol=1e-8)
        assert math.isclose(d["p"][0], exact[v][0], rel_tol=1e-8)


def test_lbp_and_coefficients():
    g = ls.Graph.load(str(DATA / "diamond.json"))
    r = ls.lbp(g)
    assert r["converged"]
    k = ls.coefficients(g)
    assert len(k["beta"]) == 5 and len(k["gamma"]) == 4
    assert ls.loop_count_bound(g)["count"] == 5


def test_f_polynomials():
    assert ls.f_poly(4) == [1, 0, 1]  # x^2 + 1
    for n in range(6):
        for x in (-1.3, 0.0, 0.7):
            f = [1.0, 0.0]
            while len(f) <= n:
                f.append(x * f[-1] + f[-2])
            assert math.isclose(ls.f_eval(n, x), f[n], rel_tol=1e-12, abs_tol=1e-14)


def test_ising_corollary():
    c = ls.ising_corollary(ls.Graph.cycle(4), 0.2, 0.3)
    assert c["rel_error"] <= 1e-8


def test_errors():
    with pytest.raises(ls.InputError):
        ls.graph_from_dict({"nodes": 2, "edges": [{"i": 0, "j": 1, "psi": [[1, 1], [1, -1]]}]})
    with pytest.raises(ValueError):
        ls.Graph.from_json("{")
    code, out, err = ls.run_cli(["lbp", "--graph", str(DATA / "diamond.json"), "--max-iters", "2"])
    assert code == 2
    assert json.loads(err)["error"] == "not_converged"


def test_cli_in_process():
    code, out, _ = ls.run_cli(["verify", "--graph", str(DATA / "diamond.json")])
    assert code == 0
    assert json.loads(out)["passed"]
