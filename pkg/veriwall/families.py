from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import networkx as nx

from veriwall.errors import InputError, require_input
from veriwall.graph import Graph
from veriwall.io import GraphModel, InstanceModel, MeshModel
from veriwall.mesh import (
    LabeledMesh,
    make_annulus_grid,
    make_annulus_wall,
    make_dyck_wall,
    make_extended_surface_wall,
    make_grid,
    make_wall,
)
from veriwall.minors import make_crossed_grid, plant_middle_jumps, plant_vortex_crosses
from veriwall.rendition import plant_bulges
from veriwall.society import society_from_mesh

log = logging.getLogger(__name__)


@dataclass
class Instance:
    family: str
    params: Dict[str, Any]
    graph: Graph
    mesh: Optional[LabeledMesh] = None
    coords: Dict[int, Hashable] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)

    def highlight(self) -> List[Tuple[int, int]]:
        """Edges worth drawing apart: crossings of a crossed grid and planted extras."""
        out: List[Tuple[int, int]] = []
        for a, b in self.extra.get("crossings", []):
            out += [tuple(a), tuple(b)]
        for key in ("jumps", "crosses", "links"):
            for p in _flatten_paths(self.extra.get(key, [])):
                out += list(zip(p, p[1:]))
        return out


def _flatten_paths(raw: Any) -> List[List[int]]:
    out: List[List[int]] = []
    for item in raw:
        if item and isinstance(item[0], list):
            out += _flatten_paths(item)
        else:
            out.append(list(item))
    return out


def _int(params: Dict[str, Any], key: str, default: Optional[int] = None) -> int:
    if key not in params:
        require_input(default is not None, f"missing parameter {key}")
        return default  # type: ignore[return-value]
    try:
        return int(params[key])
    except (TypeError, ValueError):
        raise InputError(f"parameter {key} must be an integer, got {params[key]!r}") from None


def _pairs(params: Dict[str, Any], key: str) -> List[Tuple[Any, Any]]:
    raw = params.get(key, [])
    require_input(isinstance(raw, list), f"parameter {key} must be a list")
    return [tuple(x) for x in raw]


def _of_mesh(family: str, params: Dict[str, Any], mesh: LabeledMesh, graph: Optional[Graph] = None, **extra: Any) -> Instance:
    return Instance(family, params, graph or mesh.graph, mesh, dict(mesh.coords), extra)


def gen_grid(p: Dict[str, Any]) -> Instance:
    return _of_mesh("grid", p, make_grid(_int(p, "n"), _int(p, "m")))


def gen_wall(p: Dict[str, Any]) -> Instance:
    return _of_mesh("wall", p, make_wall(_int(p, "n"), _int(p, "m")))


def gen_annulus(p: Dict[str, Any]) -> Instance:
    return _of_mesh("annulus", p, make_annulus_wall(_int(p, "n"), _int(p, "m")))


def gen_annulus_grid(p: Dict[str, Any]) -> Instance:
    return _of_mesh("annulus-grid", p, make_annulus_grid(_int(p, "n"), _int(p, "m")))


def gen_dyck(p: Dict[str, Any]) -> Instance:
    return _of_mesh("dyck", p, make_dyck_wall(_int(p, "n"), _int(p, "handles", 0), _int(p, "crosscaps", 0)))


def gen_extended(p: Dict[str, Any]) -> Instance:
    mesh = make_extended_surface_wall(
        _int(p, "n"), _int(p, "handles", 0), _int(p, "crosscaps", 0), _int(p, "vortices", 0), p.get("order")
    )
    return _of_mesh("extended", p, mesh)


def gen_crossed_grid(p: Dict[str, Any]) -> Instance:
    cg = make_crossed_grid(_int(p, "c"), _int(p, "h"))
    coords = {v: (j, i) for v, (i, j) in cg.coords.items()}
    crossings = [[list(a), list(b)] for a, b in cg.crossings]
    return Instance("crossed-grid", p, cg.graph, None, coords, {"crossings": crossings})


def gen_society_from_mesh(p: Dict[str, Any]) -> Instance:
    base = p.get("base", "grid")
    require_input(base in ("grid", "wall"), f"society base must be grid or wall, got {base!r}")
    mesh = (make_grid if base == "grid" else make_wall)(_int(p, "n"), _int(p, "m"))
    return _of_mesh("society-from-mesh", p, mesh, omega=list(society_from_mesh(mesh).omega))


def gen_random(p: Dict[str, Any]) -> Instance:
    """G(n, p) from networkx with the recorded seed; omega is the first `omega` vertices."""
    n = _int(p, "n")
    prob = float(p.get("p", 0.2))
    require_input(0.0 <= prob <= 1.0, f"edge probability must lie in [0, 1], got {prob}")
    rng = nx.gnp_random_graph(n, prob, seed=_int(p, "seed", 0))
    g = Graph(n, rng.edges())
    k = _int(p, "omega", 0)
    require_input(0 <= k <= n, f"omega size {k} exceeds n={n}")
    return Instance("random", p, g, None, {}, {"omega": list(range(k))} if k else {})


def gen_middle_jumps(p: Dict[str, Any]) -> Instance:
    t, w = _int(p, "t"), _int(p, "w")
    g, mesh, jumps = plant_middle_jumps(t, w, _pairs(p, "intervals"))
    return _of_mesh("middle-jumps", p, mesh, g, jumps=[list(q) for q in jumps])


def gen_vortex_crosses(p: Dict[str, Any]) -> Instance:
    mesh = make_extended_surface_wall(_int(p, "n"), _int(p, "handles", 0), 0, _int(p, "vortices", 1), p.get("order"))
    rails = p.get("rails")
    g, crosses = plant_vortex_crosses(mesh, _int(p, "t", 5), tuple(rails) if rails is not None else None)
    return _of_mesh("vortex-crosses", p, mesh, g, crosses=[[list(a), list(b)] for a, b in crosses])


def gen_bulges(p: Dict[str, Any]) -> Instance:
    mesh = make_annulus_wall(_int(p, "n"), _int(p, "m"))
    return _of_mesh("bulges", p, mesh, plant_bulges(mesh, _pairs(p, "spots")))


def gen_planted_grid(p: Dict[str, Any]) -> Instance:
    """A grid with one private vertex joining each listed pair of (row, col) positions."""
    mesh = make_grid(_int(p, "n"), _int(p, "m"))
    vid = mesh.vid
    n = mesh.graph.n
    edges, links = [], []
    for k, (a, b) in enumerate(_pairs(p, "pairs")):
        a, b = tuple(a), tuple(b)
        require_input(a in vid and b in vid, f"pair {list(a)}-{list(b)} leaves the grid")
        edges += [(vid[a], n + k), (n + k, vid[b])]
        links.append([vid[a], n + k, vid[b]])
    g = mesh.graph.with_edges(edges, len(links))
    return _of_mesh("planted-grid", p, mesh, g, links=links)


# family -> (positional parameter names, generator)
GENERATORS: Dict[str, Tuple[Tuple[str, ...], Callable[[Dict[str, Any]], Instance]]] = {
    "grid": (("n", "m"), gen_grid),
    "wall": (("n", "m"), gen_wall),
    "annulus": (("n", "m"), gen_annulus),
    "annulus-grid": (("n", "m"), gen_annulus_grid),
    "dyck": (("n",), gen_dyck),
    "extended": (("n",), gen_extended),
    "crossed-grid": (("c", "h"), gen_crossed_grid),
    "society-from-mesh": (("n", "m"), gen_society_from_mesh),
    "random": (("n",), gen_random),
    "middle-jumps": (("t", "w"), gen_middle_jumps),
    "vortex-crosses": (("n",), gen_vortex_crosses),
    "bulges": (("n", "m"), gen_bulges),
    "planted-grid": (("n", "m"), gen_planted_grid),
}


def generate(family: str, params: Dict[str, Any]) -> Instance:
    if family not in GENERATORS:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(GENERATORS)}")
    inst = GENERATORS[family][1](dict(params))
    log.debug("generated %s %s: %r", family, params, inst.graph)
    return inst


def positional_params(family: str, values: Sequence[str]) -> Dict[str, Any]:
    if family not in GENERATORS:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(GENERATORS)}")
    names = GENERATORS[family][0]
    require_input(len(values) <= len(names), f"{family} takes at most {len(names)} positional values ({', '.join(names)})")
    out: Dict[str, Any] = {}
    for name, raw in zip(names, values):
        try:
            out[name] = int(raw)
        except ValueError:
            raise InputError(f"{name} must be an integer, got {raw!r}") from None
    return out


# wire conversion


def to_model(inst: Instance) -> InstanceModel:
    return InstanceModel(
        family=inst.family,
        params=inst.params,
        graph=GraphModel.from_graph(inst.graph),
        mesh=MeshModel.from_mesh(inst.mesh) if inst.mesh is not None else None,
        extra=inst.extra,
    )


def from_model(model: InstanceModel) -> Instance:
    """Rebuild an instance; generated families are regenerated and checked against the stored graph."""
    graph = model.graph.to_graph()
    if model.family == "graph":
        mesh = model.mesh.to_mesh(graph) if model.mesh is not None else None
        return Instance("graph", model.params, graph, mesh, dict(mesh.coords) if mesh else {}, dict(model.extra))
    inst = generate(model.family, model.params)
    if inst.graph.n != graph.n or inst.graph.edges != graph.edges:
        raise InputError(f"instance graph does not match its {model.family} recipe {model.params}")
    inst.extra = {**inst.extra, **model.extra}
    return inst
