import json
from pathlib import Path

import pytest

from epidemic_game.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def cfg(name):
    return str(CONFIGS / f"{name}.json")


def test_reliability_exact_and_oracle(capsys):
    code, out, _ = run(capsys, "reliability", "--config", cfg("diamond"), "--exact", "--oracle")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1.0" and doc["command"] == "reliability"
    row = doc["results"]["rows"][0]
    assert row["target"] == 2
    assert abs(row["exact_q"] - 0.5625) <= 1e-12 and abs(row["oracle_q"] - 0.5625) <= 1e-12
    assert row["max_abs_diff"] <= 1e-12
    assert len(doc["scenario_digest"]) == 64


def test_reliability_chain_mc(capsys):
    code, out, _ = run(capsys, "reliability", "--config", cfg("chain"), "--mc", "1000", "7")
    assert code == 0
    doc = json.loads(out)
    assert all(r["mc_q"] == 0 for r in doc["results"]["rows"])
    assert doc["provenance"]["seed"] == 7 and "PCG64" in doc["provenance"]["prng"]


def test_reliability_size_cap(capsys, tmp_path):
    n = 15
    big = {"graph": {"nodes": n, "edges": [[i, (i + 1) % n] for i in range(n)], "source_targets": [0]},
           "profile": {"source_probs": 0.5, "node_probs": 0.5}, "utility": {"beta": 2, "omega": 0.9}}
    path = tmp_path / "big.json"
    path.write_text(json.dumps(big))
    code, _, err = run(capsys, "reliability", "--config", str(path), "--exact")
    assert code == 3 and "14" in err


def test_config_error_exit(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"graph": {"nodes": 2, "edges": [[0, 9]], "source_targets": [0]}}')
    code, _, err = run(capsys, "check-topology", "--config", str(path))
    assert code == 2 and "graph.edges[0][1]" in err
    code, _, _ = run(capsys, "reliability", "--config", str(tmp_path / "missing.json"))
    assert code == 2


def test_check_topology_examples(capsys):
    doc = json.loads(run(capsys, "check-topology", "--config", cfg("cycle_private"))[1])
    verdicts = {tuple(e["edge"]): e["punishment_paths"] for e in doc["results"]["edges"]}
    assert verdicts[(0, 1)] is False
    doc = json.loads(run(capsys, "check-topology", "--config", cfg("tree"))[1])
    assert not any(e["punishment_paths"] for e in doc["results"]["edges"])
    doc = json.loads(run(capsys, "check-topology", "--config", cfg("k4_grim"))[1])
    r = doc["results"]
    assert r["is_redundant"] and all(e["punishment_paths"] for e in r["edges"])
    assert all(n["supports_full_indirect"] for n in r["nodes"])


def test_check_equilibrium_pair(capsys, tmp_path):
    code, out, _ = run(capsys, "check-equilibrium", "--config", cfg("pair_direct"), "--solve-omega")
    assert code == 0
    res = json.loads(out)["results"]
    assert res["verdict"] == "pass"
    assert abs(res["min_margin"] - 1.9740625) <= 1e-9
    assert set(res["solved_omega"]) == {"0", "1"}
    low = json.loads(Path(cfg("pair_direct")).read_text())
    low["utility"]["beta"] = 1
    path = tmp_path / "low.json"
    path.write_text(json.dumps(low))
    code, out, _ = run(capsys, "check-equilibrium", "--config", str(path))
    res = json.loads(out)["results"]
    assert code == 1 and res["verdict"] == "fail"
    assert res["worst"]["deviator"] == 0 and res["worst"]["dropped"] == [1]


def test_check_equilibrium_uncoordinated_exit_4(capsys):
    code, _, err = run(capsys, "check-equilibrium", "--config", cfg("collapse_private"))
    assert code == 4 and "triple" in err
    code, _, _ = run(capsys, "check-equilibrium", "--config", cfg("cycle_private"))
    assert code == 4


def test_effectiveness_grim_k4(capsys):
    code, out, _ = run(capsys, "effectiveness", "--config", cfg("k4_grim"))
    assert code == 0
    row = json.loads(out)["results"]["rows"][0]
    assert abs(row["threshold"] - row["folk"]) <= 1e-3 * row["folk"]


def test_effectiveness_sweep_csv(capsys):
    code, out, _ = run(capsys, "effectiveness", "--config", cfg("collapse_private"),
                       "--sweep", "p=0.8,0.9", "--csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("param,value,folk,threshold")
    t = [float(line.split(",")[3]) for line in lines[1:]]
    assert len(t) == 2 and t[1] > t[0]
    code, _, err = run(capsys, "effectiveness", "--config", cfg("pair_direct"), "--sweep", "beta=1")
    assert code == 2 and "--sweep" in err


def test_verify_lemmas(capsys):
    code, out, _ = run(capsys, "verify-lemmas", "--cases", "5", "--seed", "42")
    assert code == 0
    doc = json.loads(out)
    assert doc["results"]["passed"] and len(doc["results"]["suites"]) == 8
    code, out, err = run(capsys, "verify-lemmas", "--cases", "0")
    assert code == 0 and "vacuous" in err


def test_verify_lemmas_injected_fault(capsys):
    code, out, _ = run(capsys, "verify-lemmas", "--cases", "30", "--suite", "ds_public", "--inject-fault")
    assert code == 1
    suite = json.loads(out)["results"]["suites"][0]
    assert suite["failures"] > 0 and suite["counterexample"] is not None


def test_out_file_and_bad_seed(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "reliability", "--config", cfg("diamond"), "--out", str(out))
    assert code == 0 and text == ""
    assert json.loads(out.read_text())["command"] == "reliability"
    with pytest.raises(SystemExit):
        main(["reliability", "--config", cfg("diamond"), "--seed", "-1"])
