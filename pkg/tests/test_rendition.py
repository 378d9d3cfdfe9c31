from dataclasses import replace
from itertools import combinations

import networkx as nx
import pytest

from veriwall.errors import InputError
from veriwall.graph import Linkage
from veriwall.mesh import make_annulus_wall, make_extended_surface_wall, verify_mesh
from veriwall.rendition import (
    FaceKey,
    c0_disk_contains,
    check_orthogonal,
    classify_sticking,
    config_to_wall,
    dissolve_crosscap,
    is_cozy,
    make_nest_cozy,
    make_rendition,
    nest_from_rows,
    normalize_all_crosscaps,
    plant_bulges,
    rendition_from_annulus_wall,
    verify_configuration,
    verify_nest,
    wall_to_config,
)


def away_paths(r, nest, i):
    """Brute force: every C_i-path outside the c0-disk avoiding omega and the other cycles."""
    c = nest.cycles[i]
    fixed = set(r.omega) | {v for k, d in enumerate(nest.cycles) if k != i for v in d}
    free = [v for v in r.graph.vertices() if v not in c and v not in fixed and not c0_disk_contains(r, c, v)]
    feet = [v for v in c if v not in fixed]
    g = r.graph.to_networkx()
    ring = {frozenset(e) for e in zip(c, [*c[1:], c[0]])}
    out = []
    for a, b in combinations(feet, 2):
        for p in nx.all_simple_paths(g.subgraph([a, b, *free]), a, b):
            if len(p) == 2 and frozenset(p) in ring:
                continue
            if classify_sticking(r, c, p) == "away":
                out.append(p)
    return out


@pytest.fixture
def annulus():
    mesh = make_annulus_wall(5, 4)
    return mesh, rendition_from_annulus_wall(mesh)


def test_annulus_rendition_faces(annulus):
    mesh, r = annulus
    rows = mesh.meta.base_cycles
    assert set(r.faces[r.vortex_face]) == set(rows[0])
    assert set(r.faces[r.outer_face]) == set(rows[-1])
    g = mesh.graph
    assert g.n - len(g.edges) + len(r.faces) == 2


def test_c0_disk_containment(annulus):
    mesh, r = annulus
    rows = mesh.meta.base_cycles
    assert c0_disk_contains(r, rows[2], rows[0])
    assert c0_disk_contains(r, rows[2], rows[1][3])
    assert not c0_disk_contains(r, rows[2], rows[3][0])
    assert not c0_disk_contains(r, rows[2], rows[2][0])
    assert c0_disk_contains(r, rows[0], r.vortex_face)
    assert not c0_disk_contains(r, rows[0], r.outer_face)


def test_classify_sticking(annulus):
    mesh, r = annulus
    vid = mesh.vid
    row3 = mesh.meta.base_cycles[2]
    down = [vid[(3, 2)], vid[(2, 2)], vid[(2, 3)], vid[(2, 4)], vid[(3, 4)]]
    up = [vid[(3, 1)], vid[(4, 1)], vid[(4, 2)], vid[(4, 3)], vid[(3, 3)]]
    assert classify_sticking(r, row3, down) == "towards"
    assert classify_sticking(r, row3, up) == "away"
    with pytest.raises(InputError, match="edge of C"):
        classify_sticking(r, row3, [vid[(3, 1)], vid[(3, 2)]])
    with pytest.raises(InputError, match="two distinct"):
        classify_sticking(r, row3, [vid[(3, 1)], vid[(4, 1)]])


def test_make_rendition_rejects_bad_rotation(annulus):
    mesh, r = annulus
    rot = dict(r.rotation)
    v = next(v for v, nbrs in rot.items() if len(nbrs) == 3)
    a, b, c = rot[v]
    rot[v] = (a, c, b)
    with pytest.raises(InputError):
        make_rendition(mesh.graph, rot, r.omega, vortex_face=r.vortex_face)


def test_make_rendition_rejects_unknown_vortex(annulus):
    mesh, r = annulus
    with pytest.raises(InputError, match="not a face"):
        make_rendition(mesh.graph, r.rotation, r.omega, vortex_face=FaceKey(0, mesh.graph.n - 1))


def test_rows_form_a_nest(annulus):
    mesh, r = annulus
    nest = nest_from_rows(mesh, [1, 2, 3, 4])
    assert verify_nest(r, nest)
    backwards = replace(nest, cycles=nest.cycles[::-1])
    assert "not inside" in verify_nest(r, backwards).reason


def test_plain_rows_are_cozy():
    mesh = make_annulus_wall(6, 4)
    r = rendition_from_annulus_wall(mesh)
    nest = nest_from_rows(mesh, range(1, 6))
    assert is_cozy(r, nest)
    assert make_nest_cozy(r, nest) == nest


def test_bulges_are_absorbed():
    mesh = make_annulus_wall(6, 4)
    g = plant_bulges(mesh, [(3, 1), (4, 2)])
    x3, x4 = g.n - 2, g.n - 1
    r = rendition_from_annulus_wall(mesh, g)
    nest = nest_from_rows(mesh, range(1, 6))
    c = is_cozy(r, nest)
    assert not c
    assert "C3" in c.reason
    assert away_paths(r, nest, 2)
    cozy = make_nest_cozy(r, nest)
    assert cozy.order == nest.order
    assert verify_nest(r, cozy)
    assert is_cozy(r, cozy)
    assert x3 in cozy.cycles[2]
    assert x4 in cozy.cycles[3]
    for i in range(cozy.order):
        assert not away_paths(r, cozy, i)
    inner = cozy.cycles[0]
    assert all(v in inner or not c0_disk_contains(r, inner, v) for c in cozy.cycles for v in c)


def test_plant_bulges_needs_a_brick():
    mesh = make_annulus_wall(6, 4)
    with pytest.raises(InputError):
        plant_bulges(mesh, [(3, 2)])
    with pytest.raises(InputError):
        plant_bulges(mesh, [(1, 1)])


@pytest.mark.parametrize(
    "h, c, strength",
    [(0, 0, (4, 16)), (1, 0, (4, 16, 8)), (0, 1, (4, 16, 8)), (1, 1, (4, 16, 8, 8))],
)
def test_wall_to_config(h, c, strength):
    mesh = make_extended_surface_wall(4, h=h, c=c)
    cfg = wall_to_config(mesh)
    assert cfg.strength == strength
    assert (cfg.handles, cfg.crosscaps) == (h, c)
    assert verify_configuration(cfg)


def test_wall_to_config_keeps_outer_rows():
    mesh = make_extended_surface_wall(6, c=1)
    cfg = wall_to_config(mesh, 4)
    assert cfg.strength == (4, 16, 8)
    assert cfg.nest.cycles[-1] == tuple(mesh.meta.simple_cycle)
    assert cfg.nest.cycles[0] == tuple(mesh.meta.base_cycles[2])
    with pytest.raises(InputError):
        wall_to_config(mesh, 3)


def test_wall_to_config_after_wall_segment():
    mesh = make_extended_surface_wall(4, h=1, c=1, segment_order=["crosscap", "wall", "handle"])
    cfg = wall_to_config(mesh)
    assert cfg.kinds == ("handle", "crosscap")
    assert verify_configuration(cfg)


def test_verify_configuration_catches_tampering():
    cfg = wall_to_config(make_extended_surface_wall(4, c=1))
    relabelled = replace(cfg, kinds=("handle",))
    assert "not a handle" in verify_configuration(relabelled).reason
    shuffled = replace(cfg, transactions=(Linkage(cfg.transactions[0].paths[::-1]),))
    assert "order of their I-ends" in verify_configuration(shuffled).reason
    clash = replace(cfg, radial=Linkage([*cfg.radial, cfg.transactions[0].paths[0]]))
    assert not verify_configuration(clash)


def test_configuration_paths_are_orthogonal_to_the_nest():
    cfg = wall_to_config(make_extended_surface_wall(4, c=1))
    assert check_orthogonal(cfg.nest, cfg.radial, 1)
    assert check_orthogonal(cfg.nest, cfg.transactions[0], 2)
    assert "pieces, not 2" in check_orthogonal(cfg.nest, cfg.radial, 2).reason


@pytest.mark.parametrize("h, c", [(1, 0), (0, 1), (0, 0)])
def test_config_to_wall(h, c):
    cfg = wall_to_config(make_extended_surface_wall(6, h=h, c=c))
    wall = config_to_wall(cfg, 3)
    assert wall.kind == "surface-wall"
    assert wall.meta.signature == (h, c, 0)
    assert wall.h == 3
    assert wall.w == 12 + 12 * (h + c)
    assert verify_mesh(cfg.society.graph, wall)


def test_config_to_wall_needs_strength():
    cfg = wall_to_config(make_extended_surface_wall(6, c=1))
    with pytest.raises(InputError, match="4k"):
        config_to_wall(cfg, 4)


def test_dissolve_crosscap():
    cfg = wall_to_config(make_extended_surface_wall(8, h=1, c=1))
    out = dissolve_crosscap(cfg, 0, 1, 1, 1)
    assert out.strength == (3, 32, 1, 1, 1)
    assert out.kinds == ("crosscap",) * 3
    assert out.nest.cycles == cfg.nest.cycles[5:]
    assert verify_configuration(out)


def test_dissolve_crosscap_on_the_left():
    mesh = make_extended_surface_wall(11, h=1, c=1, segment_order=["wall", "crosscap", "handle"])
    cfg = wall_to_config(mesh)
    assert cfg.kinds == ("crosscap", "handle")
    out = dissolve_crosscap(cfg, 1, 2, 1, 1)
    assert out.strength == (4, 44, 1, 1, 2)
    assert out.handles == 0
    assert verify_configuration(out)


def test_dissolve_crosscap_rejects_weak_handle():
    cfg = wall_to_config(make_extended_surface_wall(8, h=1, c=1))
    with pytest.raises(InputError, match="6a0\\+6b0\\+4c0"):
        dissolve_crosscap(cfg, 0, 2, 1, 1)
    with pytest.raises(InputError, match="not a handle"):
        dissolve_crosscap(cfg, 1, 1, 1, 1)


def test_normalize_without_handles_is_identity():
    cfg = wall_to_config(make_extended_surface_wall(4, c=2))
    assert normalize_all_crosscaps(cfg, 8, 4) == cfg


def test_normalize_trims_to_k():
    cfg = wall_to_config(make_extended_surface_wall(4, c=2))
    out = normalize_all_crosscaps(cfg, 2, 1)
    assert out.strength == (1, 16, 2, 2)
    assert out.nest.cycles == (cfg.nest.cycles[-1],)


def test_normalize_rejects_shallow_nest():
    cfg = wall_to_config(make_extended_surface_wall(8, h=1, c=1))
    with pytest.raises(InputError, match="\\(6h\\+7\\)hk\\+s0"):
        normalize_all_crosscaps(cfg, 1, 0)


def test_normalize_torus_with_crosscap():
    cfg = wall_to_config(make_extended_surface_wall(24, h=1, c=1))
    out = normalize_all_crosscaps(cfg, 1, 11)
    assert out.kinds == ("crosscap",) * 3
    assert out.strength == (11, 96, 1, 1, 1)
    assert verify_configuration(out)
