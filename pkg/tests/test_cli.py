import json

import pytest

from main import main, parse_param
from veriwall.errors import InputError
from veriwall.storage import run_events


@pytest.fixture
def out(tmp_path):
    return tmp_path / "out"


@pytest.fixture
def desk(tmp_path):
    path = tmp_path / "desk.env"
    path.write_text("kt_mesh_factor=0\n")
    return path


def cli(*args):
    return main([str(a) for a in args])


def test_parse_param():
    assert parse_param("q=2") == ("q", 2)
    assert parse_param("sets=[[0],[5]]") == ("sets", [[0], [5]])
    assert parse_param("base=wall") == ("base", "wall")
    with pytest.raises(InputError):
        parse_param("novalue")


def test_gen_wall(out):
    assert cli("--out", out, "gen", "wall", 5, 3) == 0
    data = json.loads((out / "wall-5-3.json").read_text())
    assert data["family"] == "wall"
    assert data["params"] == {"n": 5, "m": 3}
    assert data["mesh"]["kind"] == "wall"


def test_gen_dyck_with_a_handle(out):
    assert cli("--out", out, "gen", "dyck", 5, "--handles", 1) == 0
    assert json.loads((out / "dyck-5.json").read_text())["params"]["handles"] == 1


def test_gen_bad_size_is_an_input_error(out, capsys):
    assert cli("--out", out, "gen", "wall", 1, 3) == 2
    assert "[error]" in capsys.readouterr().err


def test_run_then_verify(out):
    cli("--out", out, "gen", "society-from-mesh", 3, 3)
    inst = out / "society-from-mesh-3-3.json"
    assert cli("--out", out, "run", "transaction-duality", inst, "--param", "p=2") == 0
    cert = out / "society-from-mesh-3-3.transaction-duality.json"
    assert json.loads(cert.read_text())["outcome"] == "transaction"
    manifest = json.loads((out / "society-from-mesh-3-3.transaction-duality.manifest.json").read_text())
    assert manifest["outcome"] == "transaction"
    assert str(inst) in manifest["inputs"]
    assert [e.kind for e in run_events(manifest["run_id"])] == ["start", "outcome", "manifest"]
    assert cli("verify", cert, inst) == 0


def test_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli("--out", a, "gen", "crossed-grid", 1, 10)
    inst = a / "crossed-grid-1-10.json"
    for where in (a, b):
        assert cli("--out", where, "--seed", 3, "run", "ktcrosses", inst, "--param", "t=5") == 0
    name = "crossed-grid-1-10.ktcrosses.json"
    assert (a / name).read_bytes() == (b / name).read_bytes()


def test_mutated_certificate_fails_verification(out, capsys):
    cli("--out", out, "gen", "crossed-grid", 1, 10)
    inst = out / "crossed-grid-1-10.json"
    cli("--out", out, "run", "ktcrosses", inst, "--param", "t=5")
    cert = out / "crossed-grid-1-10.ktcrosses.json"
    data = json.loads(cert.read_text())
    sets = data["payload"]["branch_sets"]
    sets["0"] = sets["0"] + sets["1"][:1]
    cert.write_text(json.dumps(data))
    assert cli("verify", cert, inst) == 1
    assert "[error]" in capsys.readouterr().err


def test_empty_certificate_on_empty_instance(tmp_path):
    inst = tmp_path / "empty.json"
    inst.write_text(json.dumps({"graph": {"n": 0}}))
    cert = tmp_path / "empty.cert.json"
    cert.write_text(json.dumps({"outcome": "model", "pipeline": "gallai"}))
    assert cli("verify", cert, inst) == 0


def test_infeasible_dissolve_exits_with_input_error(out, capsys):
    cli("--out", out, "gen", "dyck", 8, "--handles", 1, "--crosscaps", 1)
    inst = out / "dyck-8.json"
    code = cli("--out", out, "run", "dissolve", inst, "--param", "i=0", "--param", "a0=2", "--param", "b0=1", "--param", "c0=1")
    assert code == 2
    assert "6a0+6b0+4c0" in capsys.readouterr().err


def test_cross_budget_exits_with_capacity_error(out, desk):
    cli("--out", out, "gen", "grid", 24, 18)
    inst = out / "grid-24-18.json"
    args = ("--out", out, "--constants", desk, "--budget-vertices", 4, "run", "flatmesh", inst)
    assert cli(*args, "--param", "t=5", "--param", "n_prime=2") == 3


def test_flatmesh_certificate_verifies(out, desk):
    cli("--out", out, "gen", "grid", 24, 18)
    inst = out / "grid-24-18.json"
    assert cli("--out", out, "--constants", desk, "run", "flatmesh", inst, "--param", "t=5", "--param", "n_prime=2") == 0
    cert = out / "grid-24-18.flatmesh.json"
    data = json.loads(cert.read_text())
    assert data["outcome"] == "flat"
    assert data["constants"]["nonstandard"] is True
    assert cli("verify", cert, inst) == 0


def test_jobs_keep_the_input_order(tmp_path, out, capsys):
    cli("--out", out, "gen", "society-from-mesh", 3, 3)
    cli("--out", out, "gen", "society-from-mesh", 3, 4)
    capsys.readouterr()
    files = [out / "society-from-mesh-3-4.json", out / "society-from-mesh-3-3.json"]
    assert cli("--out", out, "--jobs", 2, "run", "transaction-duality", *files, "--param", "p=1") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].endswith("society-from-mesh-3-4.transaction-duality.json")
    assert lines[1].endswith("society-from-mesh-3-3.transaction-duality.json")


def test_export_json_is_identity(out, capsys):
    cli("--out", out, "gen", "wall", 4, 2)
    inst = out / "wall-4-2.json"
    capsys.readouterr()
    assert cli("export", inst, "--format", "json") == 0
    assert capsys.readouterr().out == inst.read_text()


def test_export_dot_highlights_crossings(out, tmp_path):
    cli("--out", out, "gen", "crossed-grid", 3, 6)
    target = tmp_path / "cg.dot"
    assert cli("export", out / "crossed-grid-3-6.json", "--format", "dot", "-o", target) == 0
    text = target.read_text()
    assert text.count("red") == 6
    assert "pos=" in text


def test_constants_file_budget_is_not_reset_by_the_config(out, tmp_path):
    tight = tmp_path / "tight.env"
    tight.write_text("kt_mesh_factor=0\nbudget_vertices=4\n")
    cli("--out", out, "gen", "grid", 24, 18)
    inst = out / "grid-24-18.json"
    assert cli("--out", out, "--constants", tight, "run", "flatmesh", inst, "--param", "t=5", "--param", "n_prime=2") == 3


def test_malformed_env_setting_exits_with_input_error(out, monkeypatch, capsys):
    monkeypatch.setenv("VERIWALL_JOBS", "abc")
    assert cli("--out", out, "gen", "wall", 5, 3) == 2
    assert "VERIWALL_JOBS" in capsys.readouterr().err
