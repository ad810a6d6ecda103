import json
import math

import numpy as np
import pytest

from cainlab import io
from cainlab.bsc import c1_bsc_table, c1_params_bsc
from cainlab.cli import run
from cainlab.config import TOLERANCES, ConfigError, RunConfig
from cainlab.szilard import random_q2_params, table_c1, table_q2
from cainlab.verify import verify_suite


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- config and io --------------------------------------------------------------------


def test_run_config_validation():
    RunConfig.from_dict({"command": "verify", "seed": 1})
    with pytest.raises(ConfigError, match="unknown configuration fields: colour"):
        RunConfig.from_dict({"command": "verify", "colour": "red"})
    with pytest.raises(ConfigError, match="seed"):
        RunConfig(command="reverse", mode="mc", samples=100)
    with pytest.raises(ConfigError):
        RunConfig(command="szilard", format="xml")
    with pytest.raises(ConfigError):
        RunConfig(command="verify", tolerances={"nonsense": 1.0})
    assert RunConfig(command="verify", tolerances={"reversal": 0.5}).tolerance("reversal") == 0.5
    assert RunConfig(command="verify").tolerance("reversal") == TOLERANCES["reversal"]


def test_parse_json_reports_position():
    with pytest.raises(io.InputError, match="line 2, column 8"):
        io.parse_json('{"a": 1,\n  "b": ]}')


def test_dumps_is_deterministic_and_strict():
    a = io.dumps({"b": np.float64(0.1), "a": np.array([1 + 2j]), "c": math.inf})
    assert a == io.dumps({"c": math.inf, "a": np.array([1 + 2j]), "b": 0.1})
    assert json.loads(a) == {"a": [[1.0, 2.0]], "b": 0.1, "c": "inf"}


def test_quantum_params_round_trip():
    p = random_q2_params(np.random.default_rng(0))
    q = io.params_from_dict(io.parse_json(io.dumps(p.to_dict())))
    np.testing.assert_array_equal(table_q2(q).direct, table_q2(p).direct)


def test_params_errors():
    with pytest.raises(io.InputError, match="missing"):
        io.params_from_dict({"p_s0": [1.0]}, "c1")
    with pytest.raises(io.InputError, match="unknown c1 parameter fields"):
        io.params_from_dict({**c1_params_bsc(0.5, 0.5, 0.5).to_dict(), "bogus": 1})
    with pytest.raises(io.InputError, match="case"):
        io.params_from_dict(c1_params_bsc(0.5, 0.5, 0.5).to_dict(), "c2")
    with pytest.raises(io.InputError, match="invalid c1"):
        io.params_from_dict({"p_s0": [0.5, 0.6], "p_sigma1_given_s0": np.eye(2).tolist(), "p_s2_given_sigma1": np.eye(2).tolist()}, "c1")


def test_chain_decoding():
    chain = io.chain_from_dict({"initial": [0.5, 0.5], "steps": [[[1, 0], [0, 1]]]})
    assert chain.horizon == 1
    with pytest.raises(io.InputError):
        io.chain_from_dict({"initial": [0.5, 0.5], "steps": [], "extra": 1})
    with pytest.raises(io.InputError):
        io.chain_from_dict({"initial": [0.5, 0.5], "steps": [[[1, 0], [0, 1]]], "thermal": ["x"]})


# --- commands ---------------------------------------------------------------------------


def test_szilard_markdown_from_params(tmp_path, capsys):
    path = tmp_path / "c1.json"
    path.write_text(json.dumps(c1_params_bsc(0.5, 0.8, 0.9).to_dict()))
    code, out, _ = _run(capsys, "szilard", "--case", "c1", "--params", str(path), "--format", "markdown")
    assert code == 0
    assert out.count("\n| ") == 5 and "2 ← 1" in out


def test_bsc_table_matches_szilard_pipeline(capsys):
    code, out, _ = _run(capsys, "bsc", "table", "--l", "0.5", "--alpha", "0.8", "--beta", "0.9")
    assert code == 0
    rows = json.loads(out)["table"]["rows"]
    generic = table_c1(c1_params_bsc(0.5, 0.8, 0.9))
    for i, leg in enumerate(("1<-0", "2<-1", "3<-2", "0<-3")):
        for j, col in enumerate(("system", "system+sensor")):
            assert rows[leg][col]["closed_form"] == pytest.approx(generic.direct[i, j], abs=1e-12)
    assert rows["1<-0"]["system+sensor"]["closed_form"] == c1_bsc_table(0.5, 0.8, 0.9).closed_form[0, 1]


def test_output_file_and_env_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("CAINLAB_OUTPUT_DIR", str(tmp_path))
    code, out, _ = _run(capsys, "ledger", "engine", "--th", "400", "--tc", "300", "--qc", "3", "--out", "sub/e.json")
    assert code == 0 and out == ""
    data = json.loads((tmp_path / "sub" / "e.json").read_text())
    assert data["work"] == 1.0 and data["efficiency"] == 1 / 3


def test_usage_and_input_errors(tmp_path, capsys):
    assert _run(capsys, "frobnicate")[0] == 1
    assert _run(capsys)[0] == 1
    assert _run(capsys, "szilard", "--case", "c9")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "p_s0": [0.5, 0.5],\n  oops\n}')
    code, _, err = _run(capsys, "szilard", "--case", "c1", "--params", str(bad))
    assert code == 1 and "line 3, column 3" in err
    assert _run(capsys, "szilard", "--case", "c1", "--params", str(tmp_path / "missing.json"))[0] == 1
    assert _run(capsys, "ledger", "engine", "--th", "300", "--tc", "400", "--qc", "1")[0] == 1
    assert _run(capsys, "bsc", "table", "--l", "1.5", "--alpha", "0.5", "--beta", "0.5")[0] == 1
    assert _run(capsys, "--help")[0] == 0


def test_config_file_rejects_unknown_fields(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "verify", "suite_name": "bsc"}))
    code, _, err = _run(capsys, "verify", "--config", str(cfg))
    assert code == 1 and "suite_name" in err


def test_reverse_exact_and_mc(tmp_path, capsys):
    rng = np.random.default_rng(3)
    from cainlab.cbnet import random_cain_chain

    spec = random_cain_chain(2, 2, 2, rng)
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({**{k: v for k, v in spec.chain.to_dict().items() if k != "flagged"},
                                "sub_axes": [list(a) for a in spec.sub_axes], "thermal": list(spec.thermal)}))
    code, out, _ = _run(capsys, "reverse", "--params", str(path))
    d = json.loads(out)
    assert code == 0 and d["ratio_identity_error"] <= 1e-12
    assert d["sigma_hat"]["mean_sigma"] == pytest.approx(d["conditional_entropy_change"], abs=1e-10)
    assert _run(capsys, "reverse", "--params", str(path), "--mode", "mc", "--samples", "100")[0] == 1
    code, out, _ = _run(capsys, "reverse", "--params", str(path), "--mode", "mc", "--samples", "4000", "--seed", "5")
    mc = json.loads(out)["sigma_hat"]
    assert code == 0 and abs(mc["mean_sigma"] - d["conditional_entropy_change"]) <= 6 * mc["stderr_sigma"]


def test_thermal_command(tmp_path, capsys):
    code, out, _ = _run(capsys, "thermal", "--energies", "0", "1", "--beta", "1")
    d = json.loads(out)
    assert code == 0 and d["free_energy"] == pytest.approx(-math.log(1 + math.exp(-1)), abs=1e-15)
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"hamiltonian": [[0, 1], [1, 0]], "temperature": 2.0}))
    d = json.loads(_run(capsys, "thermal", "--params", str(path))[1])
    assert d["ground_energy"] == pytest.approx(-1.0) and d["beta"] == 0.5


def test_ledger_process_check(tmp_path, capsys):
    good = {
        "steps": [
            {"ledgers": {"s": {"dQ": 1, "dE": 1, "dW": 0, "dS": 0.5}, "b": {"dQ": -1, "dE": -1, "dW": 0}},
             "thermal_edges": [["s", "b"]]},
            {"ledgers": {"s": {"dQ": -1, "dE": -1, "dW": 0, "dS": -0.5}}},
        ],
        "cyclic": ["s"],
    }
    p = tmp_path / "p.json"
    p.write_text(json.dumps(good))
    assert _run(capsys, "ledger", "check", "--params", str(p))[0] == 0
    good["steps"][0]["ledgers"]["b"]["dQ"] = -0.5
    good["steps"][0]["ledgers"]["b"]["dE"] = -0.5
    p.write_text(json.dumps(good))
    code, out, _ = _run(capsys, "ledger", "check", "--params", str(p))
    assert code == 2 and json.loads(out)["status"] == "fail"


def test_ledger_commands(capsys):
    d = json.loads(_run(capsys, "ledger", "carnot", "--th", "400", "--tc", "300", "--s-low", "0", "--s-high", "1")[1])
    assert d["net_work"] == 100 and d["ok"]
    d = json.loads(_run(capsys, "ledger", "flow", "--th", "400", "--tc", "300", "--qc", "-1")[1])
    assert d["valid"] is False
    d = json.loads(_run(capsys, "ledger", "gas", "--temperature", "1", "--v1", "1", "--v2", "2")[1])
    assert d["error"] <= 1e-8


def test_verify_exit_codes(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "ledger", "--seed", "3")
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    assert [c["name"] for c in rep["checks"]] == sorted(c["name"] for c in rep["checks"])
    assert all(c["anchor"] for c in rep["checks"])
    code, out, _ = _run(capsys, "verify", "--suite", "ledger", "--seed", "3", "--tol", "ledger_quadrature=0")
    assert code == 2 and json.loads(out)["status"] == "fail"
    assert _run(capsys, "verify", "--suite", "nope")[0] == 1


def test_suite_results_do_not_depend_on_grouping():
    alone = verify_suite("ledger", 11)
    # reuse of the same child seed gives identical values
    again = verify_suite("ledger", 11)
    assert [c.to_dict() for c in alone.checks] == [c.to_dict() for c in again.checks]
    with pytest.raises(ValueError):
        verify_suite("bogus")
