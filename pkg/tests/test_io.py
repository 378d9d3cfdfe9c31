import json

import pytest

from veriwall.errors import InputError
from veriwall.graph import Graph
from veriwall.io import (
    CertificateModel,
    GraphModel,
    InstanceModel,
    MeshModel,
    digest,
    dumps,
    manifest_path,
    positions,
    read_model,
    to_dot,
    write_model,
)
from veriwall.mesh import make_grid, make_wall, verify_mesh


def test_graph_model_keeps_labels():
    g = Graph(3, [(0, 1), (1, 2)], {0: "a"})
    gm = GraphModel.from_graph(g)
    assert gm.edges == [(0, 1), (1, 2)]
    assert gm.to_graph() == g


def test_mesh_model_restores_paths_and_coords():
    mesh = make_wall(4, 3)
    mm = MeshModel.model_validate_json(MeshModel.from_mesh(mesh).model_dump_json())
    back = mm.to_mesh(mesh.graph)
    assert back.vertical == mesh.vertical
    assert back.horizontal == mesh.horizontal
    assert back.coords == mesh.coords
    assert verify_mesh(mesh.graph, back)


def test_dumps_is_canonical():
    a = InstanceModel(graph=GraphModel(n=2, edges=[(0, 1)]), params={"b": 1, "a": 2})
    b = InstanceModel(graph=GraphModel(n=2, edges=[(0, 1)]), params={"a": 2, "b": 1})
    assert dumps(a) == dumps(b)
    assert digest(a) == digest(b)
    assert dumps(a).endswith("\n")


def test_payload_kind_selects_the_model():
    raw = {"outcome": "blocker", "pipeline": "gallai", "payload": {"kind": "a-blocker", "z": [3, 1]}}
    cert = CertificateModel.model_validate(raw)
    assert cert.payload.kind == "a-blocker"
    assert cert.payload.z == [3, 1]


def test_read_model_reports_the_field(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"graph": {"edges": []}}))
    with pytest.raises(InputError, match="graph.n"):
        read_model(bad, InstanceModel)


def test_read_model_missing_file(tmp_path):
    with pytest.raises(InputError, match="cannot read"):
        read_model(tmp_path / "none.json", InstanceModel)


def test_write_then_read(tmp_path):
    model = InstanceModel(family="grid", params={"n": 2, "m": 2}, graph=GraphModel.from_graph(make_grid(2, 2).graph))
    path = write_model(tmp_path / "sub" / "g.json", model)
    assert read_model(path, InstanceModel) == model


def test_manifest_sidecar_name(tmp_path):
    assert manifest_path(tmp_path / "wall.gallai.json").name == "wall.gallai.manifest.json"


def test_positions_of_grid_and_segment_keys():
    assert positions({0: (2, 3)}) == {0: (3, -2)}
    pos = positions({0: ("b", 0, 1, 4), 1: ("b", 1, 1, 4), 2: "x"})
    assert pos[1][0] - pos[0][0] == 5
    assert 2 not in pos


def test_dot_pins_positions_and_marks_edges():
    mesh = make_grid(2, 2)
    a, b = mesh.vid[(1, 1)], mesh.vid[(1, 2)]
    text = to_dot(mesh.graph, mesh.coords, [(b, a)])
    assert "pos=" in text
    assert "!" in text
    assert text.count("red") == 1
