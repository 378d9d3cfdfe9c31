from dataclasses import replace

import pytest

from veriwall.config import DEFAULT_CONSTANTS
from veriwall.errors import InputError
from veriwall.flatten import (
    FlatCertificate,
    Isolation,
    eta_jumps,
    flat_mesh_or_kt,
    grid_model,
    independent,
    isolated_grid_submodel,
    verify_flat_certificate,
    verify_isolation,
)
from veriwall.mesh import make_grid, make_wall, transpose
from veriwall.minors import MinorModel, complete_graph, verify_controlled, verify_model

DESK = DEFAULT_CONSTANTS.with_overrides(kt_mesh_factor=0)


def planted(rows, cols, pairs):
    """A grid with one private vertex joining each pair of (row, col) positions."""
    mesh = make_grid(rows, cols)
    vid = mesh.vid
    n = mesh.graph.n
    edges = []
    for k, (a, b) in enumerate(pairs):
        edges += [(vid[a], n + k), (n + k, vid[b])]
    return mesh, mesh.graph.with_edges(edges, len(pairs))


def test_grid_model_of_a_wall():
    mesh = make_wall(6, 4)
    gm = grid_model(mesh)
    assert gm.associated
    assert verify_model(mesh.graph, gm.eta.h, gm.eta)
    assert gm.union() == frozenset(mesh.vertex_set())
    assert set(gm.cells) == {(i, j) for i in range(1, mesh.w + 1) for j in range(1, mesh.h + 1)}


def test_grid_model_of_transposed_mesh():
    mesh = make_grid(6, 9)
    gm, gt = grid_model(mesh), grid_model(transpose(mesh))
    assert all(gt.cells[(j, i)] == vs for (i, j), vs in gm.cells.items())


def test_independence():
    assert independent((2, 2), (4, 2), 6, 6)
    assert independent((3, 3), (3, 5), 6, 6)
    assert not independent((2, 2), (3, 3), 6, 6)
    assert not independent((1, 1), (1, 3), 6, 6)


def test_clean_grid_has_no_eta_jumps():
    mesh = make_grid(8, 8)
    assert eta_jumps(mesh.graph, grid_model(mesh)) == []


def test_chord_across_three_columns_is_one_jump():
    mesh = make_grid(8, 8)
    a, b = mesh.vid[(3, 2)], mesh.vid[(3, 5)]
    g = mesh.graph.with_edges([(a, b)])
    jumps = eta_jumps(g, grid_model(mesh))
    assert len(jumps) == 1
    assert set(jumps[0].ends) == {a, b}


def test_diagonal_chord_is_not_a_jump():
    mesh = make_grid(8, 8)
    g = mesh.graph.with_edges([(mesh.vid[(3, 2)], mesh.vid[(4, 3)])])
    assert eta_jumps(g, grid_model(mesh)) == []


def test_jump_through_a_private_vertex():
    mesh, g = planted(8, 8, [((3, 2), (3, 6))])
    (p,) = eta_jumps(g, grid_model(mesh))
    assert len(p) == 3
    assert p.inner == (g.n - 1,)


def test_clean_grid_isolates_with_nothing_removed():
    mesh = make_grid(20, 20)
    gm = grid_model(mesh)
    iso = isolated_grid_submodel(mesh.graph, mesh, gm, 5)
    assert iso == Isolation(frozenset(), frozenset(), frozenset())
    assert len(list(iso.clean_cells(gm, 5))) == 8 * 8


def test_local_jump_is_isolated():
    mesh, g = planted(20, 20, [((8, 8), (8, 12))])
    gm = grid_model(mesh)
    iso = isolated_grid_submodel(g, mesh, gm, 5)
    assert isinstance(iso, Isolation)
    u, v, m = mesh.vid[(8, 8)], mesh.vid[(8, 12)], g.n - 1
    assert iso.z & {u, v, m}
    assert {8, 12} <= iso.i_star
    assert not iso.j_star
    assert verify_isolation(g, gm, iso, 5)


def test_unblocked_jump_fails_isolation_check():
    mesh, g = planted(20, 20, [((9, 9), (9, 12))])
    gm = grid_model(mesh)
    c = verify_isolation(g, gm, Isolation(frozenset(), frozenset(), frozenset()), 5)
    assert not c
    assert "clean cell" in c.reason


def test_isolation_needs_margin():
    mesh = make_grid(12, 12)
    with pytest.raises(InputError, match="2t\\+5"):
        isolated_grid_submodel(mesh.graph, mesh, grid_model(mesh), 5)


def test_many_wide_jumps_give_kt():
    t = 5
    pairs = [((8, 7 + 4 * k), (8, 9 + 4 * k)) for k in range(t**3)]
    mesh, g = planted(2 * t + 5, 511, pairs)
    model = isolated_grid_submodel(g, mesh, grid_model(mesh), t)
    assert isinstance(model, MinorModel)
    assert model.origin.startswith("isolate:jumps")
    assert verify_model(g, complete_graph(t), model)
    assert verify_controlled(g, mesh, model, t)


def test_planar_host_is_flat():
    mesh = make_grid(24, 18)
    cert = flat_mesh_or_kt(mesh.graph, mesh, 5, 2, DESK)
    assert isinstance(cert, FlatCertificate)
    assert cert.z == frozenset()
    assert (cert.submesh.w, cert.submesh.h) == (2, 2)
    assert cert.nonstandard
    sel = cert.candidates[cert.selected]
    assert sel.columns == (8, 11)
    assert sel.rows == (11, 14)
    assert cert.omega[0] == mesh.vid[(11, 8)]
    assert verify_flat_certificate(mesh.graph, cert, 5, DESK)


def test_planted_cross_gives_kt():
    mesh, g = planted(24, 18, [((12, 9), (13, 10)), ((12, 10), (13, 9))])
    model = flat_mesh_or_kt(g, mesh, 5, 2, DESK)
    assert isinstance(model, MinorModel)
    assert model.origin == "flat:crosses"
    assert verify_model(g, complete_graph(5), model)
    assert verify_controlled(g, mesh, model, 5)


def test_tampered_flat_certificate():
    mesh = make_grid(24, 18)
    cert = flat_mesh_or_kt(mesh.graph, mesh, 5, 2, DESK)
    hit = replace(cert, z=frozenset(cert.submesh.vertex_set()))
    assert "submesh meets Z" in verify_flat_certificate(mesh.graph, hit, 5, DESK).reason
    sel = cert.candidates[cert.selected]
    a, b, c, _ = sel.omega
    bad = replace(cert, candidates=(replace(sel, omega=(a, b, c, a)),))
    assert "four vertices" in verify_flat_certificate(mesh.graph, bad, 5, DESK).reason


def test_default_constants_need_a_huge_mesh():
    mesh = make_grid(24, 18)
    with pytest.raises(InputError, match="100t\\^3"):
        flat_mesh_or_kt(mesh.graph, mesh, 5, 2)


def test_narrow_mesh_has_no_room():
    mesh = make_grid(24, 16)
    with pytest.raises(InputError, match="room for 0 of 1"):
        flat_mesh_or_kt(mesh.graph, mesh, 5, 2, DESK)
