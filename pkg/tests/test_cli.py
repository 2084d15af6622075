"""Command-line surface tests, one smoke per subcommand."""

import json

import pytest

from hallab.cli import main
from hallab.harness import required_n


def write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def run_cli(tmp_path, argv):
    out = tmp_path / "out.json"
    code = main(argv + ["--out", str(out)])
    assert code == 0
    return out.read_text()


def run_cli_json(tmp_path, argv):
    return json.loads(run_cli(tmp_path, argv))


@pytest.fixture
def dist_files(tmp_path):
    p = write(tmp_path, "p.json", {"universe_size": 4, "weights": {"0": 0.5, "1": 0.5}})
    q = write(tmp_path, "q.json", {"universe_size": 4, "weights": {"0": 0.25, "1": 0.25, "2": 0.25, "3": 0.25}})
    t = write(tmp_path, "t.json", {"members": [0, 1]})
    return p, q, t


def test_measure_hall(tmp_path, dist_files):
    p, q, t = dist_files
    out = run_cli_json(tmp_path, ["measure", "hall", "--dist", p, "--event", t])
    assert out["hall"] == 0.0
    out = run_cli_json(tmp_path, ["measure", "hall", "--dist", q, "--event", t])
    assert out["hall"] == 0.5


def test_measure_hall_eps_tv_kl(tmp_path, dist_files):
    p, q, t = dist_files
    out = run_cli_json(tmp_path, ["measure", "hall-eps", "--dist", p, "--dist-q", q, "--eps", "0.25"])
    assert out["hall_eps"] == 0.5
    out = run_cli_json(tmp_path, ["measure", "tv", "--dist", p, "--dist-q", q])
    assert out["tv"] == 0.5
    out = run_cli_json(tmp_path, ["measure", "kl", "--dist", p, "--dist-q", q])
    assert abs(out["kl"] - 0.6931471805599453) < 1e-12


def test_measure_entropy(tmp_path, dist_files):
    p, q, t = dist_files
    out = run_cli_json(tmp_path, ["measure", "entropy", "--dist", q])
    assert abs(out["info"] - 1.3862943611198906) < 1e-12
    out = run_cli_json(tmp_path, ["measure", "entropy", "--dist", q, "--renyi-alpha", "2.0"])
    assert abs(out["info"] - 1.3862943611198906) < 1e-12
    s = write(tmp_path, "s.json", {"universe_size": 4, "points": [0, 1]})
    out = run_cli_json(
        tmp_path, ["measure", "entropy", "--dist", q, "--measure", "out_of_sample", "--sample", s]
    )
    assert out["info"] == 0.5


def test_concepts_commands(tmp_path):
    cls = write(
        tmp_path,
        "cls.json",
        {"name": "pair", "universe_size": 3, "concepts": [[0], [1], [0, 1], []]},
    )
    out = run_cli_json(tmp_path, ["concepts", "vc", "--class", cls, "--cap", "3"])
    assert out["dimension"] == 2 and not out["saturated"]
    s = write(tmp_path, "s.json", {"universe_size": 3, "points": [0]})
    out = run_cli_json(tmp_path, ["concepts", "version-space", "--class", cls, "--sample", s])
    assert out["concepts"] == [[0], [0, 1]]
    out = run_cli_json(tmp_path, ["concepts", "packing", "--d", "8", "--seed", "3"])
    assert out["provenance"]["achieved_size"] == len(out["class"]["concepts"])


def test_solve_max_info(tmp_path):
    region = write(
        tmp_path,
        "region.json",
        {"universe_size": 4, "constraints": [{"members": [0, 1], "eps": 0.25}]},
    )
    s = write(tmp_path, "s.json", {"universe_size": 4, "points": [0]})
    out = run_cli_json(
        tmp_path,
        ["solve", "max-info", "--region", region, "--measure", "out_of_sample", "--sample", s],
    )
    assert out["status"] == "optimal"
    assert abs(out["value"] - 1.0) < 1e-8
    out = run_cli_json(tmp_path, ["solve", "max-info", "--region", region, "--measure", "shannon"])
    assert out["status"] == "optimal"


def test_learn_commands(tmp_path):
    s = write(tmp_path, "s.json", {"universe_size": 4, "points": [0, 0, 1]})
    out = run_cli_json(tmp_path, ["learn", "empirical", "--sample", s])
    assert out["dist"]["weights"]["0"] == pytest.approx(2 / 3)
    spec = write(
        tmp_path,
        "spec.json",
        {
            "measure": "out_of_sample",
            "eps": 0.2,
            "class": {"name": "c", "universe_size": 4, "concepts": [[0, 1], [0, 1, 2]]},
        },
    )
    out = run_cli_json(tmp_path, ["learn", "improper", "--spec", spec, "--sample", s])
    assert out["version_space_size"] == 2
    assert out["solver_report"]["status"] == "optimal"
    spec_p = write(
        tmp_path,
        "spec_p.json",
        {
            "measure": "shannon",
            "eps": 0.2,
            "class": {"name": "c", "universe_size": 4, "concepts": [[0, 1]]},
            "hypotheses": [
                {"universe_size": 4, "weights": {"0": 0.5, "1": 0.5}},
                {"universe_size": 4, "weights": {"3": 1.0}},
            ],
        },
    )
    out = run_cli_json(tmp_path, ["learn", "proper", "--spec", spec_p, "--sample", s])
    assert out["hypothesis_index"] == 0 and not out["relaxed"]
    spec_f = write(
        tmp_path,
        "spec_f.json",
        {"hypotheses": [{"universe_size": 4, "weights": {"0": 1.0}}]},
    )
    out = run_cli_json(tmp_path, ["learn", "fixed", "--spec", spec_f, "--sample", s])
    assert out["hypothesis_index"] == 0


def test_adversary_gen(tmp_path):
    out = run_cli_json(tmp_path, ["adversary", "gen", "example4"])
    assert len(out["class"]["concepts"]) == 2
    params = write(tmp_path, "params.json", {"d": 4, "eps_prime": 0.3})
    out = run_cli_json(tmp_path, ["adversary", "gen", "theorem3", "--params", params, "--seed", "5"])
    assert out["instance"]["q"]["weights"]["0"] == 0.7
    params1 = write(tmp_path, "params1.json", {"n": 4, "atoms_per_side": 3200, "tilde_size": 32})
    out = run_cli_json(tmp_path, ["adversary", "gen", "theorem1", "--params", params1])
    assert out["instance"]["meta"]["discretization_gap"] == 0.01


def test_experiment_run_and_curve(tmp_path):
    cfg = {
        "schema": "v1",
        "construction": {"name": "theorem3", "params": {"d": 4, "eps_prime": 0.3, "explicit_class": True}},
        "learner": {"kind": "improper_max_info", "measure": "out_of_sample", "eps": 0.1},
        "n_values": [10, 20],
        "trials": 8,
        "epsilon": 0.1,
        "delta": 0.1,
        "base_seed": 3,
        "output_dir": str(tmp_path / "exp"),
    }
    path = write(tmp_path, "cfg.json", cfg)
    out = run_cli_json(tmp_path, ["experiment", "run", path])
    assert [row["n"] for row in out] == [10, 20]
    csv_text = run_cli(tmp_path, ["experiment", "curve", path, "--format", "csv"])
    assert csv_text.splitlines()[0].startswith("n,trials,failures")
    assert (tmp_path / "exp" / "trials.jsonl").exists()


def test_bounds_commands(tmp_path):
    out = run_cli_json(tmp_path, ["bounds", "required-n", "--d", "8", "--eps", "0.1", "--delta", "0.1"])
    assert out["required_n"] == required_n(8, 0.1, 0.1) == 2516
    out = run_cli_json(
        tmp_path, ["bounds", "fano", "--n", "1", "--class-size", "4", "--kl-sup", "0.6931471805599453"]
    )
    assert out["fano"] == 0.0
    out = run_cli_json(tmp_path, ["bounds", "entropy-threshold"])
    assert 0.07 <= out["root_bits"] <= 0.10
    assert abs(out["root_nats"] - 0.0999) < 5e-3
