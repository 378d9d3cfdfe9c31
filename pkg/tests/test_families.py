import pytest

from veriwall.errors import InputError
from veriwall.families import from_model, generate, positional_params, to_model
from veriwall.io import InstanceModel
from veriwall.mesh import verify_mesh


def test_positional_params_follow_the_family():
    assert positional_params("wall", ["5", "3"]) == {"n": 5, "m": 3}
    assert positional_params("dyck", ["5"]) == {"n": 5}
    with pytest.raises(InputError, match="at most 2"):
        positional_params("grid", ["1", "2", "3"])
    with pytest.raises(InputError, match="integer"):
        positional_params("grid", ["x"])


def test_unknown_family():
    with pytest.raises(InputError, match="unknown family"):
        generate("moebius", {})


def test_wall_instance_carries_its_mesh():
    inst = generate("wall", {"n": 5, "m": 3})
    assert inst.mesh is not None and inst.mesh.kind == "wall"
    assert verify_mesh(inst.graph, inst.mesh)


def test_dyck_wall_with_a_handle():
    inst = generate("dyck", {"n": 5, "handles": 1})
    assert inst.mesh.meta.signature == (1, 0, 0)
    assert inst.mesh.meta.euler_genus == 2


def test_crossed_grid_marks_its_crosses():
    inst = generate("crossed-grid", {"c": 3, "h": 6})
    assert inst.graph.n == 10 * 6
    assert len(inst.highlight()) == 2 * 3
    assert all(inst.graph.has_edge(u, v) for u, v in inst.highlight())


def test_society_from_mesh_lists_the_perimeter():
    inst = generate("society-from-mesh", {"n": 3, "m": 4})
    assert len(inst.extra["omega"]) == 2 * (3 + 4) - 4


def test_random_graph_is_seeded():
    a = generate("random", {"n": 12, "p": 0.3, "seed": 7, "omega": 5})
    b = generate("random", {"n": 12, "p": 0.3, "seed": 7, "omega": 5})
    assert a.graph == b.graph
    assert a.extra["omega"] == [0, 1, 2, 3, 4]


def test_planted_grid_links():
    inst = generate("planted-grid", {"n": 4, "m": 4, "pairs": [[[1, 1], [3, 3]]]})
    (link,) = inst.extra["links"]
    assert link[1] == inst.graph.n - 1
    with pytest.raises(InputError, match="leaves the grid"):
        generate("planted-grid", {"n": 4, "m": 4, "pairs": [[[1, 1], [9, 9]]]})


def test_model_roundtrip_regenerates_metadata():
    inst = generate("extended", {"n": 4, "crosscaps": 1})
    back = from_model(InstanceModel.model_validate_json(to_model(inst).model_dump_json()))
    assert back.mesh.meta is not None
    assert back.graph.edges == inst.graph.edges


def test_edited_graph_breaks_the_recipe():
    model = to_model(generate("grid", {"n": 3, "m": 3}))
    model.graph.edges = model.graph.edges[1:]
    with pytest.raises(InputError, match="recipe"):
        from_model(model)


def test_plain_graph_instance_keeps_its_mesh():
    model = to_model(generate("grid", {"n": 3, "m": 3}))
    model.family = "graph"
    inst = from_model(model)
    assert inst.mesh is not None
    assert verify_mesh(inst.graph, inst.mesh)
    assert inst.coords == generate("grid", {"n": 3, "m": 3}).coords
