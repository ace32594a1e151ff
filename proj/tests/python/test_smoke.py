import json
import math
import os
import subprocess

import jsonschema
import pytest

import pairsim

CLI = os.environ.get("PAIRSIM_CLI")
SCHEMAS = os.environ.get("PAIRSIM_SCHEMAS")
needs_cli = pytest.mark.skipif(not CLI, reason="PAIRSIM_CLI not set")

PI = [[2.0, 1.0], [1.0, 3.0]]
PI_FB = [[2.0, 3.0], [3.0, 4.0]]


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


# ---------------------------------------------------------------- library


def test_params_construction():
    p = pairsim.params_from_pi(PI)
    assert p.k == 2
    assert p.pi == PI
    q = pairsim.build_params([1.0, 2.0], [0.5, 0.5], [[1.0, 0.5], [0.5, 1.0]])
    assert close(q.pi[0][0], 1.5)
    assert close(q.pi[1][1], 2.5)
    with pytest.raises(ValueError):
        pairsim.params_from_pi([[1.0, -2.0], [3.0, 4.0]])
    with pytest.raises(ValueError):
        pairsim.make_fractions([0.4, 0.7], [0.5, 0.5])


def test_population_rounding():
    fr = pairsim.make_fractions([0.4, 0.6], [0.3, 0.7])
    pop = pairsim.round_fractions(fr, 50)
    assert pop.n == 50
    assert sum(pop.x) == 50 and sum(pop.y) == 50
    assert pop.x == [20, 30] and pop.y == [15, 35]
    back = pairsim.make_counts(pop.x, pop.y)
    assert back.n == 50


def test_fluid_solution():
    p = pairsim.params_from_pi(PI)
    fr = pairsim.make_fractions([0.4, 0.6], [0.3, 0.7])
    fl = pairsim.integrate_fluid(p, fr, 2.0)
    assert fl.t_end >= 2.0
    q0 = fl.eval(0.0)
    assert all(v == 0.0 for row in q0 for v in row)
    q1 = fl.eval(1.0)
    q2 = fl.eval(2.0)
    for i in range(2):
        for j in range(2):
            assert 0.0 <= q1[i][j] <= q2[i][j]
    d = pairsim.drift(p, fr, q1)
    assert all(v >= 0.0 for row in d for v in row)


def test_fine_balance():
    fb = pairsim.params_from_pi(PI_FB)
    rep = pairsim.check_fine_balance(fb)
    assert rep is not None
    assert close(min(rep["alpha_bar"]), 0.0)
    assert pairsim.check_fine_balance(pairsim.params_from_pi(PI)) is None
    fr = pairsim.make_fractions([0.4, 0.6], [0.3, 0.7])
    pat, bound = pairsim.mating_pattern_limit(fb, fr)
    assert bound < 1e-7
    for i, xi in enumerate([0.4, 0.6]):
        for j, yj in enumerate([0.3, 0.7]):
            assert close(pat[i][j], xi * yj, 1e-6)
    sol = pairsim.FineBalanceSolution(fb, fr)
    state = sol.eval(1.0)
    assert set(state) == {"A", "B", "Z", "Q"}
    assert close(sum(sum(r) for r in state["Q"]), 1.0 - state["Z"])
    lim = sol.pattern()
    for i, xi in enumerate([0.4, 0.6]):
        for j, yj in enumerate([0.3, 0.7]):
            assert close(lim[i][j], xi * yj, 1e-9)


def test_sym2x2_report():
    p = pairsim.params_from_pi([[3.0, 1.0], [1.0, 2.0]])
    fr = pairsim.make_fractions([0.35, 0.65], [0.35, 0.65])
    sol = pairsim.Sym2x2Solution(p, fr)
    rep = sol.report()
    assert rep["case"] == "generic"
    assert close(rep["gamma"], 1.0 / 3.0)
    assert rep["class"] == "homogamous"
    assert 0.0 <= rep["q12_inf"] <= 0.35
    assert close(sol.q12_of_t(1e9), sol.q12_infinity(), 1e-6)
    assert pairsim.classify(p) == "homogamous"
    assert pairsim.classify(pairsim.params_from_pi([[1.0, 2.0], [2.0, 1.0]])) == "heterogamous"


def test_simulate_trajectory():
    p = pairsim.params_from_pi(PI)
    pop = pairsim.make_counts([20, 30], [15, 35])
    t = pairsim.simulate(p, pop, seed=9)
    assert len(t["events"]) == 50
    assert t["t_absorb"] is not None
    for ev in t["events"]:
        assert 1 <= ev[1] <= 2 and 1 <= ev[2] <= 2
    times = [ev[0] for ev in t["events"]]
    assert times == sorted(times)
    again = pairsim.simulate(p, pop, seed=9)
    assert again == t
    other = pairsim.simulate(p, pop, seed=10)
    assert other != t


def test_mc_against_exact_oracle():
    p = pairsim.params_from_pi(PI)
    pop = pairsim.make_counts([1, 1], [1, 1])
    exact = pairsim.exact_pattern_oracle(p, pop)
    mc = pairsim.mc_pattern(p, pop, 4000, seed=3)
    for i in range(2):
        for j in range(2):
            se = math.sqrt(mc["variance"][i][j] / mc["replicates"])
            assert abs(mc["mean"][i][j] - exact[i][j]) <= 4.0 * se + 1e-12


def test_clt_and_diffusion():
    p = pairsim.params_from_pi([[1.0]])
    fr = pairsim.make_fractions([1.0], [1.0])
    fl = pairsim.integrate_fluid(p, fr, 1.0)
    path = pairsim.simulate_clt_limit(p, fr, fl, 1.0, 1e-3, seed=5)
    assert path["v"][0] == [[0.0]]
    assert len(path["times"]) == len(path["v"])
    z = pairsim.simulate_diffusion(p, fr, 200, 1.0, 1e-3, seed=5)
    for snap in z["z"]:
        assert -1e-12 <= snap[0][0] <= 1.0 + 1e-12


def test_experiments_smoke():
    p = pairsim.params_from_pi(PI)
    fr = pairsim.make_fractions([0.4, 0.6], [0.3, 0.7])
    rows = pairsim.convergence_study(p, fr, [40, 400], 3, 17, 2.0)
    assert len(rows) == 6
    assert all(r["sup_error"] > 0.0 for r in rows)
    grid = pairsim.levelcurves_grid(0.2, 1.8, 5)
    assert len(grid["values"]) == 5
    q = grid["q12"]
    for a in range(5):
        for b in range(5):
            assert close(q[a][b], q[b][a], 1e-6)


def test_error_mapping():
    p = pairsim.params_from_pi(PI)
    with pytest.raises(ValueError):
        pairsim.integrate_fluid(p, pairsim.make_fractions([1.0], [1.0]), 1.0)
    stiff = pairsim.params_from_pi([[1e9, 1.0], [1.0, 3.0]])
    fr = pairsim.make_fractions([0.4, 0.6], [0.3, 0.7])
    with pytest.raises(ArithmeticError):
        pairsim.mating_pattern_limit(stiff, fr)


# ---------------------------------------------------------------- CLI


def run_cli(*args, expect=0):
    res = subprocess.run([CLI, *args], capture_output=True)
    assert res.returncode == expect, res.stderr.decode()
    return res.stdout


def load_schema(name):
    with open(os.path.join(SCHEMAS, name)) as f:
        return json.load(f)


def check(payload, schema_name):
    doc = json.loads(payload)
    if SCHEMAS:
        jsonschema.validate(doc, load_schema(schema_name))
    return doc


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    paths = {}
    for name, doc in [
        ("params", {"pi": PI}),
        ("params_fb", {"pi": PI_FB}),
        ("params_k1", {"pi": [[1.0]]}),
        ("pop", {"x_frac": [0.4, 0.6], "y_frac": [0.3, 0.7]}),
        ("pop_counts", {"x": [8, 12], "y": [5, 15]}),
        ("pop_k1", {"x_frac": [1.0], "y_frac": [1.0]}),
    ]:
        p = d / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = str(p)
    return paths


@needs_cli
def test_cli_simulate_deterministic(files):
    args = ["simulate", "--params", files["params"], "--population",
            files["pop_counts"], "--seed", "11", "--json"]
    first = run_cli(*args)
    second = run_cli(*args)
    assert first == second
    other = run_cli(*args[:-2], "12", "--json")
    assert other != first
    doc = check(first, "trajectory.schema.json")
    assert len(doc["events"]) == 20
    assert doc["t_absorb"] is not None


@needs_cli
def test_cli_simulate_csv(files):
    out = run_cli("simulate", "--params", files["params"], "--population",
                  files["pop"], "--n", "10", "--seed", "2").decode()
    lines = out.strip().split("\n")
    assert lines[0] == "t,i,j"
    assert len(lines) == 11


@needs_cli
def test_cli_fluid_csv(files):
    out = run_cli("fluid", "--params", files["params"], "--population",
                  files["pop"], "--t-end", "1.0").decode()
    lines = out.strip().split("\n")
    assert lines[0] == "t,Q11,Q12,Q21,Q22"
    assert lines[1].startswith("0,0,0,0,0")


@needs_cli
def test_cli_pattern(files):
    doc = check(run_cli("pattern", "--params", files["params_fb"],
                        "--population", files["pop"]), "pattern.schema.json")
    for i, xi in enumerate([0.4, 0.6]):
        for j, yj in enumerate([0.3, 0.7]):
            assert close(doc["pattern"][i][j], xi * yj, 1e-6)


@needs_cli
def test_cli_fine_balance(files):
    doc = check(run_cli("fine-balance", "--params", files["params_fb"]),
                "fine_balance.schema.json")
    assert close(min(doc["alpha_bar"]), 0.0)
    run_cli("fine-balance", "--params", files["params"], expect=2)


@needs_cli
def test_cli_sym2x2_and_classify(files):
    doc = check(run_cli("sym2x2", "--params", files["params"], "--x1", "0.5"),
                "sym2x2.schema.json")
    assert doc["case"] == "generic"
    cls = check(run_cli("classify", "--params", files["params"]),
                "classify.schema.json")
    assert cls["class"] == "homogamous"
    assert close(cls["delta"], 3.0)


@needs_cli
def test_cli_converge_csv(files):
    out = run_cli("converge", "--params", files["params"], "--population",
                  files["pop"], "--n-list", "30,60", "--replicates", "2",
                  "--seed", "5", "--t-end", "1.0").decode()
    lines = out.strip().split("\n")
    assert lines[0] == "n,seed,sup_error"
    assert len(lines) == 5


@needs_cli
def test_cli_clt_report(files):
    doc = check(run_cli("clt", "--params", files["params_k1"], "--population",
                        files["pop_k1"], "--n", "1000", "--replicates", "1000",
                        "--t-end", "0.5", "--seed", "3"),
                "clt_report.schema.json")
    assert doc["n"] == 1000
    target = math.exp(-0.5) - math.exp(-1.0)
    # both covariance estimates are Monte Carlo with 1000 replicates,
    # so allow a few standard errors of slack
    assert abs(doc["cov_limit"][0][0] / target - 1.0) < 0.25
    assert abs(doc["cov_empirical"][0][0] / target - 1.0) < 0.25


@needs_cli
def test_cli_levelcurves():
    out = run_cli("levelcurves", "--grid", "0:2:5", "--pi12", "0.5",
                  "--x1", "0.5").decode()
    lines = out.strip().split("\n")
    assert lines[0] == "pi11,pi22,q12"
    assert len(lines) == 26


@needs_cli
def test_cli_exit_codes(files):
    run_cli("simulate", "--params", "/definitely/missing.json",
            "--population", files["pop"], expect=2)
    run_cli("pattern", "--params", files["params"], "--population",
            files["pop"], "--set", "/pi/0/0=1e9", expect=3)
    res = subprocess.run([CLI, "simulate", "--no-such-flag"], capture_output=True)
    assert res.returncode == 2
