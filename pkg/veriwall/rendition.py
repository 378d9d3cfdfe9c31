from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, FrozenSet, List, Literal, NamedTuple, Optional, Sequence, Set, Tuple

import networkx as nx

from veriwall.errors import PASS, Check, ContractError, InputError, fail, require_input
from veriwall.graph import Edge, Graph, Linkage, Path, check_linkage, norm_edge, shortest_path
from veriwall.mesh import LabeledMesh, SegmentMeta, SurfaceWallMeta, verify_mesh
from veriwall.society import Segment, Society

log = logging.getLogger(__name__)

Dart = Tuple[int, int]
TransactionKind = Literal["handle", "crosscap"]
Sticking = Literal["towards", "away"]


class FaceKey(NamedTuple):
    """A face, named by the smallest dart on its boundary walk."""

    tail: int
    head: int


@dataclass(frozen=True)
class PlaneRendition:
    """A connected plane graph given by its rotation system (clockwise neighbour order).

    Every vertex is grounded and every cell is an edge; the vortex is a
    designated face distinct from the outer face.
    """

    graph: Graph
    rotation: Dict[int, Tuple[int, ...]]
    outer_face: FaceKey
    vortex_face: FaceKey
    omega: Tuple[int, ...]

    @cached_property
    def _tracing(self) -> Tuple[Dict[FaceKey, Tuple[int, ...]], Dict[Dart, FaceKey]]:
        return _trace_faces(self.rotation)

    @property
    def faces(self) -> Dict[FaceKey, Tuple[int, ...]]:
        return self._tracing[0]

    def face_of(self, u: int, v: int) -> FaceKey:
        return self._tracing[1][(u, v)]

    def face_at(self, v: int) -> FaceKey:
        return self.face_of(v, self.rotation[v][0])


def _embedding(rotation: Dict[int, Sequence[int]]) -> nx.PlanarEmbedding:
    emb = nx.PlanarEmbedding()
    emb.set_data({v: list(nbrs) for v, nbrs in rotation.items()})
    try:
        emb.check_structure()
    except nx.NetworkXException as e:
        raise InputError(f"rotation system is not a plane embedding: {e}") from None
    return emb


def _trace_faces(rotation: Dict[int, Sequence[int]]) -> Tuple[Dict[FaceKey, Tuple[int, ...]], Dict[Dart, FaceKey]]:
    emb = _embedding(rotation)
    marked: Set[Dart] = set()
    faces: Dict[FaceKey, Tuple[int, ...]] = {}
    dart_face: Dict[Dart, FaceKey] = {}
    for v in sorted(rotation):
        for w in rotation[v]:
            if (v, w) in marked:
                continue
            walk = emb.traverse_face(v, w, mark_half_edges=marked)
            darts = list(zip(walk, [*walk[1:], walk[0]]))
            key = FaceKey(*min(darts))
            faces[key] = tuple(walk)
            for d in darts:
                dart_face[d] = key
    return faces, dart_face


def faces(r: PlaneRendition) -> Dict[FaceKey, Tuple[int, ...]]:
    return dict(r.faces)


def _face_bounded_by(fs: Dict[FaceKey, Tuple[int, ...]], cyc: Sequence[int]) -> FaceKey:
    want = set(cyc)
    hits = sorted(k for k, walk in fs.items() if set(walk) == want and len(walk) == len(want))
    require_input(bool(hits), "no face is bounded by the given cycle")
    return hits[0]


def make_rendition(
    g: Graph,
    rotation: Dict[int, Sequence[int]],
    omega: Sequence[int],
    vortex_face: Optional[FaceKey] = None,
    vortex_boundary: Optional[Sequence[int]] = None,
) -> PlaneRendition:
    """Validate a rotation system and name its outer and vortex faces.

    The outer face is the face whose boundary carries all of omega; the
    vortex face is given directly or by the cycle bounding it.
    """
    require_input(set(rotation) == set(g.vertices()), "rotation system must list every vertex")
    for v, nbrs in rotation.items():
        require_input(sorted(nbrs) == list(g.neighbors(v)), f"rotation at {v} does not list its neighbours")
    require_input(g.n > 1 and g.is_connected_set(g.vertices()), "renditions need a connected graph")
    rot = {v: tuple(nbrs) for v, nbrs in rotation.items()}
    fs, _ = _trace_faces(rot)
    require_input(g.n - len(g.edges) + len(fs) == 2, "rotation system does not satisfy Euler's formula")
    if vortex_face is None:
        require_input(vortex_boundary is not None, "name the vortex face or its boundary cycle")
        vortex_face = _face_bounded_by(fs, vortex_boundary)
    vortex_face = FaceKey(*vortex_face)
    require_input(vortex_face in fs, f"vortex face {tuple(vortex_face)} is not a face")
    om = set(omega)
    outer = sorted(k for k, walk in fs.items() if om <= set(walk) and k != vortex_face)
    require_input(bool(outer), "omega does not lie on a single face")
    walk = fs[outer[0]]
    if len(set(walk)) == len(walk):
        ps = [walk.index(v) for v in omega]
        k = ps.index(min(ps))
        ps = ps[k:] + ps[:k]
        require_input(ps == sorted(ps) or [ps[0], *ps[:0:-1]] == sorted(ps), "omega does not follow the outer face")
    return PlaneRendition(g, rot, outer[0], vortex_face, tuple(omega))


def rendition_from_annulus_wall(mesh: LabeledMesh, graph: Optional[Graph] = None) -> PlaneRendition:
    """Planar rendition of an annulus wall (or a planar supergraph of it).

    Row 1 bounds the vortex face and the outermost row is omega.
    """
    require_input(mesh.kind == "annulus" and mesh.meta is not None, f"expected an annulus wall, got {mesh.kind}")
    g = graph if graph is not None else mesh.graph
    require_input(g.n >= mesh.graph.n and mesh.graph.edges <= g.edges, "graph must contain the annulus wall")
    planar, emb = nx.check_planarity(g.to_networkx())
    require_input(planar, "graph is not planar")
    rotation = {v: tuple(nbrs) for v, nbrs in emb.get_data().items()}
    cycles = mesh.meta.base_cycles
    r = make_rendition(g, rotation, cycles[-1], vortex_boundary=cycles[0])
    log.debug("annulus rendition: %d faces", len(r.faces))
    return r


def plant_bulges(mesh: LabeledMesh, spots: Sequence[Tuple[int, int]]) -> Graph:
    """One new vertex per spot (i, j), joined to (i, j) and (i, j+2) inside the brick below row i."""
    vid = mesh.vid
    n = mesh.h
    g = mesh.graph
    extra: List[Edge] = []
    for q, (i, j) in enumerate(spots):
        require_input(2 <= i <= n - 1, f"bulges sit strictly between the inner and outer rows, got row {i}")
        require_input((i - j) % 2 == 0 and (i, j + 2) in vid, f"no brick below row {i} starts at column {j}")
        x = g.n + q
        extra += [(vid[(i, j)], x), (x, vid[(i, j + 2)])]
    return g.with_edges(extra, len(spots))


# cycles and c0-disks

def _cycle_edges(cyc: Sequence[int]) -> Set[Edge]:
    return {norm_edge(a, b) for a, b in zip(cyc, [*cyc[1:], cyc[0]])}


def _check_cycle(g: Graph, cyc: Sequence[int], name: str) -> Check:
    if len(cyc) < 3:
        return fail(f"{name} has fewer than three vertices")
    if len(set(cyc)) != len(cyc):
        return fail(f"{name} repeats a vertex")
    for a, b in zip(cyc, [*cyc[1:], cyc[0]]):
        if not g.has_edge(a, b):
            return fail(f"{name} step {a}-{b} is not an edge")
    return PASS


def _bounded_side(r: PlaneRendition, cyc: Sequence[int]) -> FrozenSet[FaceKey]:
    """Faces separated from the outer face by the cycle."""
    cut = _cycle_edges(cyc)
    dual = nx.Graph()
    dual.add_nodes_from(r.faces)
    for u, v in r.graph.edges:
        if (u, v) not in cut:
            dual.add_edge(r.face_of(u, v), r.face_of(v, u))
    outside = nx.node_connected_component(dual, r.outer_face)
    return frozenset(f for f in r.faces if f not in outside)


def _c0_disk(r: PlaneRendition, cyc: Sequence[int]) -> FrozenSet[FaceKey]:
    c = _check_cycle(r.graph, cyc, "cycle")
    require_input(c.ok, c.reason)
    inside = _bounded_side(r, cyc)
    require_input(r.vortex_face in inside, "cycle has no c0-disk: the vortex face lies outside it")
    return inside


def c0_disk_contains(r: PlaneRendition, c: Sequence[int], item: int | FaceKey | Path | Sequence[int]) -> bool:
    """Whether a vertex, a face or every vertex of a path lies strictly inside the c0-disk of c."""
    disk = _c0_disk(r, c)
    if isinstance(item, FaceKey):
        return item in disk
    on = set(c)
    vs = [item] if isinstance(item, int) else list(item)
    return all(v not in on and r.face_at(v) in disk for v in vs)


def _require_c_path(r: PlaneRendition, c: Sequence[int], p: Sequence[int]) -> None:
    on = set(c)
    require_input(len(p) >= 2, "a C-path needs length at least one")
    require_input(p[0] in on and p[-1] in on and p[0] != p[-1], "C-path must join two distinct vertices of C")
    require_input(not any(v in on for v in p[1:-1]), "C-path meets C internally")
    require_input(len(p) > 2 or norm_edge(p[0], p[1]) not in _cycle_edges(c), "an edge of C is not a C-path")
    for a, b in zip(p, p[1:]):
        require_input(r.graph.has_edge(a, b), f"C-path step {a}-{b} is not an edge")


def classify_sticking(r: PlaneRendition, c: Sequence[int], p: Path | Sequence[int]) -> Sticking:
    vs = list(p)
    _require_c_path(r, c, vs)
    disk = _c0_disk(r, c)
    return "towards" if r.face_of(vs[0], vs[1]) in disk else "away"


# nests

@dataclass(frozen=True)
class Nest:
    """Disjoint cycles around the vortex, innermost first."""

    cycles: Tuple[Tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return len(self.cycles)

    def vset(self) -> FrozenSet[int]:
        return frozenset(v for c in self.cycles for v in c)


def nest_from_rows(mesh: LabeledMesh, rows: Optional[Sequence[int]] = None) -> Nest:
    """Base cycles of a surface or annulus wall as a nest; rows are 1-based, innermost first."""
    require_input(mesh.meta is not None, f"{mesh.kind} mesh has no base cycles")
    cycles = mesh.meta.base_cycles
    rows = list(rows) if rows is not None else list(range(1, len(cycles) + 1))
    require_input(rows == sorted(set(rows)) and 1 <= rows[0] and rows[-1] <= len(cycles), f"bad rows {rows}")
    return Nest(tuple(tuple(cycles[i - 1]) for i in rows))


def verify_nest(r: PlaneRendition, nest: Nest) -> Check:
    seen: Set[int] = set()
    for i, c in enumerate(nest.cycles, 1):
        chk = _check_cycle(r.graph, c, f"C{i}")
        if not chk:
            return chk
        if seen & set(c):
            return fail(f"C{i} meets an earlier nest cycle")
        seen |= set(c)
    sides = [_bounded_side(r, c) for c in nest.cycles]
    for i, side in enumerate(sides, 1):
        if r.vortex_face not in side:
            return fail(f"C{i} has no c0-disk")
    for i in range(len(sides) - 1):
        if any(r.face_at(v) not in sides[i + 1] for v in nest.cycles[i]):
            return fail(f"C{i + 1} is not inside the c0-disk of C{i + 2}")
    return PASS


def _escape(r: PlaneRendition, cyc: Sequence[int], fixed: Set[int]) -> Optional[Path]:
    """A C-path sticking out away from the vortex that avoids `fixed`, if one exists."""
    disk = _c0_disk(r, cyc)
    g = r.graph
    on = set(cyc)
    cut = _cycle_edges(cyc)
    feet = on - fixed
    for u, v in g.edge_list():
        if u in feet and v in feet and (u, v) not in cut and r.face_of(u, v) not in disk:
            return Path([u, v])
    free = [v for v in g.vertices() if v not in on and v not in fixed and r.face_at(v) not in disk]
    for comp in g.components(free):
        cs = set(comp)
        att = sorted({w for v in comp for w in g.neighbors(v) if w in feet})
        if len(att) < 2:
            continue
        a, b = att[0], att[1]
        mid = shortest_path(g, [v for v in g.neighbors(a) if v in cs], [v for v in g.neighbors(b) if v in cs], cs)
        if mid is None:
            raise ContractError("bridge component is not connected")
        return Path([a, *mid, b])
    return None


def _absorb(r: PlaneRendition, cyc: Sequence[int], p: Path) -> List[int]:
    """The cycle in cyc + p that keeps the vortex inside and the larger disk."""
    a, b = p.ends
    n = len(cyc)
    ia, ib = cyc.index(a), cyc.index(b)
    forward = [cyc[(ib + k) % n] for k in range(1, (ia - ib) % n)]
    backward = [cyc[(ib - k) % n] for k in range(1, (ib - ia) % n)]
    best: Optional[Tuple[List[int], int]] = None
    for arc in (forward, backward):
        cand = [*p.vertices, *arc]
        if len(cand) < 3:
            continue
        side = _bounded_side(r, cand)
        if r.vortex_face in side and (best is None or len(side) > best[1]):
            best = (cand, len(side))
    if best is None:
        raise ContractError("no cycle through the escape path encloses the vortex")
    return best[0]


def is_cozy(r: PlaneRendition, nest: Nest) -> Check:
    om = set(r.omega)
    for i, c in enumerate(nest.cycles):
        fixed = om | {v for k, d in enumerate(nest.cycles) if k != i for v in d}
        p = _escape(r, c, fixed)
        if p is not None:
            return fail(f"C{i + 1}-path {list(p.vertices)} sticks out away from the vortex")
    return PASS


def make_nest_cozy(r: PlaneRendition, nest: Nest) -> Nest:
    """Push every cycle outwards, outermost first, until no escape path is left."""
    chk = verify_nest(r, nest)
    require_input(chk.ok, f"not a nest: {chk.reason}")
    om = set(r.omega)
    s = nest.order
    done: List[List[int]] = [[] for _ in range(s)]
    for j in range(s - 1, -1, -1):
        fixed = set(om)
        for k in range(j):
            fixed |= set(nest.cycles[k])
        for k in range(j + 1, s):
            fixed |= set(done[k])
        cur = list(nest.cycles[j])
        for _ in range(len(r.faces) + 1):
            p = _escape(r, cur, fixed)
            if p is None:
                break
            cur = _absorb(r, cur, p)
        else:
            raise ContractError(f"C{j + 1} kept growing")
        done[j] = cur
    out = Nest(tuple(tuple(c) for c in done))
    verify_nest(r, out).require()
    is_cozy(r, out).require()
    log.debug("cozy nest of order %d", out.order)
    return out


# surface configurations

@dataclass(frozen=True)
class SurfaceConfiguration:
    """A society with a nest, a radial linkage and ordered handle/crosscap transactions.

    Transaction paths run from I_i to J_i and are listed in the order of
    their I-ends along the linearisation that starts at I_1; radial paths
    start on omega.
    """

    society: Society
    nest: Nest
    radial: Linkage
    transactions: Tuple[Linkage, ...]
    kinds: Tuple[TransactionKind, ...]

    @property
    def strength(self) -> Tuple[int, ...]:
        return (self.nest.order, self.radial.order, *(lk.order for lk in self.transactions))

    @property
    def handles(self) -> int:
        return self.kinds.count("handle")

    @property
    def crosscaps(self) -> int:
        return self.kinds.count("crosscap")

    def _ends(self) -> List[Tuple[int, int]]:
        pos = self.society.pos
        out: List[Tuple[int, int]] = []
        for i, lk in enumerate(self.transactions):
            for p in lk:
                out += [(pos(p.vertices[0]), 2 * i), (pos(p.vertices[-1]), 2 * i + 1)]
        out += [(pos(p.vertices[0]), 2 * len(self.transactions)) for p in self.radial]
        return sorted(out)

    @cached_property
    def origin(self) -> int:
        ends = self._ends()
        if not ends:
            return 0
        k = next((q for q in range(len(ends)) if ends[q][1] == 0 and ends[q - 1][1] != 0), 0)
        return ends[k][0]

    def offset(self, v: int) -> int:
        return (self.society.pos(v) - self.origin) % len(self.society)

    @property
    def signature(self) -> Tuple[Segment, ...]:
        groups: Dict[int, List[int]] = {}
        for pos, lab in self._ends():
            groups.setdefault(lab, []).append((pos - self.origin) % len(self.society))
        return tuple(
            ((min(offs) + self.origin) % len(self.society), (max(offs) + self.origin) % len(self.society))
            for _, offs in sorted(groups.items())
        )


def _natural(cfg: SurfaceConfiguration) -> SurfaceConfiguration:
    key = lambda p: cfg.offset(p.vertices[0])  # noqa: E731
    return replace(
        cfg,
        radial=Linkage(sorted(cfg.radial, key=key)),
        transactions=tuple(Linkage(sorted(lk, key=key)) for lk in cfg.transactions),
    )


def _runs(vs: Sequence[int], cset: Set[int] | FrozenSet[int], cedges: Set[Edge]) -> List[Tuple[int, int]]:
    """Index ranges of the components of path ∩ cycle, in path order."""
    out: List[Tuple[int, int]] = []
    i = 0
    while i < len(vs):
        if vs[i] not in cset:
            i += 1
            continue
        j = i
        while j + 1 < len(vs) and vs[j + 1] in cset and norm_edge(vs[j], vs[j + 1]) in cedges:
            j += 1
        out.append((i, j))
        i = j + 1
    return out


def _monotone(xs: Sequence[int], up: bool) -> bool:
    return all((a < b) if up else (a > b) for a, b in zip(xs, xs[1:]))


def check_orthogonal(nest: Nest, paths: Linkage | Sequence[Path], pieces: int, name: str = "path ") -> Check:
    """Every path meets every nest cycle in exactly `pieces` subpaths (1 for radial paths, 2 for transactions)."""
    for d, c in enumerate(nest.cycles, 1):
        cset, cedges = set(c), _cycle_edges(c)
        for q, p in enumerate(paths, 1):
            k = len(_runs(p.vertices, cset, cedges))
            if k != pieces:
                return fail(f"{name}{q} meets C{d} in {k} pieces, not {pieces}")
    return PASS


def verify_configuration(cfg: SurfaceConfiguration) -> Check:
    g = cfg.society.graph
    om = cfg.society.vset
    seen: Set[int] = set()
    for i, c in enumerate(cfg.nest.cycles, 1):
        chk = _check_cycle(g, c, f"C{i}")
        if not chk:
            return chk
        if seen & set(c):
            return fail(f"C{i} meets an earlier nest cycle")
        seen |= set(c)
    if len(cfg.kinds) != len(cfg.transactions):
        return fail("every transaction needs a kind")
    everything = [*cfg.radial, *(p for lk in cfg.transactions for p in lk)]
    chk = check_linkage(g, Linkage(everything))
    if not chk:
        return fail(f"transactions and radial linkage are not disjoint paths: {chk.reason}")
    for p in everything:
        if p.vertices[0] not in om or any(v in om for v in p.vertices[1:-1]):
            return fail(f"path {list(p)} does not leave omega at its first vertex")
    for lk in cfg.transactions:
        for p in lk:
            if p.vertices[-1] not in om or len(p) < 2:
                return fail(f"transaction path {list(p)} does not end on omega")
    chk = check_orthogonal(cfg.nest, cfg.radial, 1, "radial path R")
    if not chk:
        return chk
    for i, lk in enumerate(cfg.transactions, 1):
        chk = check_orthogonal(cfg.nest, lk, 2, f"P{i} path ")
        if not chk:
            return chk
    labels = [lab for _, lab in cfg._ends()]
    k = next((q for q in range(len(labels)) if labels[q] == 0 and labels[q - 1] != 0), 0)
    rot = labels[k:] + labels[:k]
    if cfg.transactions and rot != sorted(rot):
        return fail("segments I_1, J_1, ..., J_l, R do not appear on omega in this order")
    for i, (lk, kind) in enumerate(zip(cfg.transactions, cfg.kinds), 1):
        if not lk.order:
            return fail(f"P{i} is empty")
        xs = [cfg.offset(p.vertices[0]) for p in lk]
        ys = [cfg.offset(p.vertices[-1]) for p in lk]
        if xs != sorted(xs):
            return fail(f"paths of P{i} are not listed in the order of their I-ends")
        if kind == "crosscap":
            if not _monotone(ys, True):
                return fail(f"P{i} is not a crosscap transaction")
        elif kind == "handle":
            half = lk.order // 2
            if lk.order % 2 or not _monotone(ys[:half], False) or not _monotone(ys[half:], False) or max(ys[:half]) > min(ys[half:]):
                return fail(f"P{i} is not a handle transaction")
        else:
            return fail(f"unknown transaction kind {kind!r}")
    return PASS


def _require_config(cfg: SurfaceConfiguration) -> None:
    chk = verify_configuration(cfg)
    require_input(chk.ok, f"not a surface configuration: {chk.reason}")


def wall_to_config(mesh: LabeledMesh, k: Optional[int] = None) -> SurfaceConfiguration:
    """Surface configuration of strength (k, 4k, 2k, ..., 2k) on the simple cycle of a surface wall.

    The nest is the outermost k base cycles, the radial linkage the first 4k
    vertical paths of the wall segment.
    """
    meta = mesh.meta
    require_input(meta is not None and mesh.kind == "surface-wall", f"expected a surface wall without vortices, got {mesh.kind}")
    n = mesh.h
    k = n if k is None else k
    require_input(4 <= k <= n, f"need 4 <= k <= {n}, got k={k}")
    vid = mesh.vid
    cols = 4 * n
    ell = len(meta.segments)

    def leg(s: int, t: int) -> Tuple[int, ...]:
        return mesh.vertical[s * cols + t - 1].vertices

    def pair(s: int, t: int, u: int) -> Path:
        return Path([*leg(s, t)[::-1], vid[("b", s, 1, 2 * t)], vid[("b", s, 1, 2 * u)], *leg(s, u)])

    w = next(s for s, seg in enumerate(meta.segments) if seg.kind == "wall")
    inner_row = n - k + 1
    radial = []
    for t in range(1, 4 * k + 1):
        up = leg(w, t)[::-1]
        cut = next(q for q, v in enumerate(up) if mesh.coords[v][2] == inner_row)
        radial.append(Path(up[: cut + 1]))
    transactions: List[Linkage] = []
    kinds: List[TransactionKind] = []
    for s in ((w + q) % ell for q in range(1, ell)):
        kind = meta.segments[s].kind
        if kind == "handle":
            paths = [pair(s, i, 3 * n + 1 - i) for i in range(1, k + 1)]
            paths += [pair(s, i, 5 * n + 1 - i) for i in range(n + 1, n + k + 1)]
        else:
            paths = [pair(s, i, 2 * n + i) for i in range(1, 2 * k + 1)]
        transactions.append(Linkage(paths))
        kinds.append(kind)
    nest = Nest(tuple(tuple(c) for c in meta.base_cycles[n - k :]))
    cfg = _natural(SurfaceConfiguration(Society(mesh.graph, meta.simple_cycle), nest, Linkage(radial), tuple(transactions), tuple(kinds)))
    verify_configuration(cfg).require()
    log.debug("surface configuration of strength %s", cfg.strength)
    return cfg


def _legs(vs: Sequence[int], runs_by_cycle: List[List[Tuple[int, int]]], side: int) -> Path:
    """The piece of one leg between the innermost and the outermost chosen cycle, innermost first."""
    inner, outer = runs_by_cycle[0][side], runs_by_cycle[-1][side]
    if side == 0:
        return Path(vs[outer[0] : inner[1] + 1][::-1])
    return Path(vs[inner[0] : outer[1] + 1])


def config_to_wall(cfg: SurfaceConfiguration, k: int) -> LabeledMesh:
    """A k-surface-wall inside the configuration: base cycles from the nest, wall verticals from the radial paths."""
    _require_config(cfg)
    s, r, *ps = cfg.strength
    require_input(k >= 3, f"need k >= 3, got {k}")
    require_input(s >= k, f"nest of order {s} is below k = {k}")
    require_input(r >= 4 * k, f"radial linkage of order {r} is below 4k = {4 * k}")
    for i, p in enumerate(ps, 1):
        require_input(p >= 4 * k, f"P{i} of order {p} is below 4k = {4 * k}")
    g = cfg.society.graph
    cycles = cfg.nest.cycles[:k]
    sets = [(set(c), _cycle_edges(c)) for c in cycles]

    def runs(vs: Sequence[int]) -> List[List[Tuple[int, int]]]:
        return [_runs(vs, cs, ce) for cs, ce in sets]

    verticals: List[Path] = []
    segments: List[SegmentMeta] = []
    wall = [_legs(p.vertices, runs(p.vertices), 0) for p in sorted(cfg.radial, key=lambda p: cfg.offset(p.vertices[0]))[: 4 * k]]
    verticals += wall
    segments.append(SegmentMeta("wall", [], [], [q.vertices[0] for q in wall]))
    for lk, kind in zip(cfg.transactions, cfg.kinds):
        half = lk.order // 2
        chosen = [*lk.paths[:k], *lk.paths[half : half + k]] if kind == "handle" else list(lk.paths[: 2 * k])
        ins = [_legs(p.vertices, runs(p.vertices), 0) for p in chosen]
        outs = [_legs(p.vertices, runs(p.vertices), 1) for p in sorted(chosen, key=lambda p: cfg.offset(p.vertices[-1]))]
        verticals += ins + outs
        segments.append(SegmentMeta(kind, [], [], [q.vertices[0] for q in ins + outs]))
    horizontal: List[Path] = []
    base: List[List[int]] = []
    for c in cycles:
        cyc = list(c)
        size = len(cyc)
        idx = {v: q for q, v in enumerate(cyc)}
        marks = [next(idx[v] for v in q.vertices if v in idx) for q in verticals]
        a, b, e = marks[0], marks[1], marks[-1]
        if not (b - a) % size < (e - a) % size:
            cyc.reverse()
            idx = {v: q for q, v in enumerate(cyc)}
            marks = [next(idx[v] for v in q.vertices if v in idx) for q in verticals]
        first = set(verticals[0].vertices)
        start = marks[0]
        while cyc[(start - 1) % size] in first:
            start = (start - 1) % size
        rot = cyc[start:] + cyc[:start]
        last = set(verticals[-1].vertices)
        end = max(q for q, v in enumerate(rot) if v in last)
        horizontal.append(Path(rot[: end + 1]))
        base.append(rot)
    meta = SurfaceWallMeta((cfg.handles, cfg.crosscaps, 0), segments, base)
    mesh = LabeledMesh(g, tuple(verticals), tuple(horizontal), "surface-wall", {}, meta)
    verify_mesh(g, mesh).require()
    log.debug("%d-surface-wall with signature %s", k, meta.signature)
    return mesh


# crosscap surgery

class _Tracer:
    """Collects one route that alternates between transaction paths and nest cycles."""

    def __init__(self, cycles: Sequence[Sequence[int]], avoid: Set[int]) -> None:
        self.cycles = cycles
        self.avoid = avoid
        self.out: List[int] = []

    def walk(self, vs: Sequence[int], a: int, b: int) -> None:
        step = 1 if b >= a else -1
        for q in range(a, b + step, step):
            if not self.out or self.out[-1] != vs[q]:
                self.out.append(vs[q])

    def ring(self, d: int, targets: Set[int]) -> int:
        """Follow cycle d from the current vertex to the first target, on the side free of `avoid`."""
        cyc = self.cycles[d]
        n = len(cyc)
        at = cyc.index(self.out[-1])
        for step in (1, -1):
            arc: List[int] = []
            for q in range(1, n):
                v = cyc[(at + q * step) % n]
                arc.append(v)
                if v in targets or v in self.avoid:
                    break
            if arc[-1] in targets and not self.avoid & set(arc):
                self.out.extend(arc)
                return arc[-1]
        raise ContractError(f"no free arc of C{d + 1} reaches the target path")


def _mirror(cfg: SurfaceConfiguration) -> SurfaceConfiguration:
    soc = Society(cfg.society.graph, cfg.society.omega[::-1])
    flipped = tuple(Linkage(p.reversed() for p in lk) for lk in cfg.transactions[::-1])
    return _natural(SurfaceConfiguration(soc, cfg.nest, cfg.radial, flipped, cfg.kinds[::-1]))


def _dissolve(cfg: SurfaceConfiguration, i: int, a0: int, b0: int, c0: int) -> SurfaceConfiguration:
    """Handle P_i followed by crosscap P_{i+1} become crosscaps of orders a0, b0, c0."""
    n_c = a0 + b0 + c0
    m = n_c + a0 + b0
    handle, cross = cfg.transactions[i], cfg.transactions[i + 1]
    require_input(cfg.nest.order >= m, f"nest of order {cfg.nest.order} is below 2a0+2b0+c0 = {m}")
    require_input(cross.order >= n_c, f"crosscap of order {cross.order} is below a0+b0+c0 = {n_c}")
    require_input(handle.order >= 6 * a0 + 6 * b0 + 4 * c0, f"handle of order {handle.order} is below 6a0+6b0+4c0 = {6 * a0 + 6 * b0 + 4 * c0}")
    require_input(cfg.radial.order >= 1, "crosscap surgery needs a radial path")
    om = cfg.society.vset
    cycles = [list(c) for c in cfg.nest.cycles]
    require_input(not any(set(c) & om for c in cycles[:m]), "the innermost 2a0+2b0+c0 nest cycles must avoid omega")
    sets = [(set(c), _cycle_edges(c)) for c in cycles]
    avoid = set(cfg.radial.vset)
    p = handle.order // 2
    l1 = [q.vertices for q in handle.paths[:p]]
    l2 = [q.vertices for q in handle.paths[p:]]
    pp = [q.vertices for q in cross.paths]

    def run(vs: Sequence[int], d: int, side: int) -> Tuple[int, int]:
        rs = _runs(vs, *sets[d])
        if len(rs) != 2:
            raise ContractError(f"route meets C{d + 1} in {len(rs)} pieces")
        return rs[side]

    def at(vs: Sequence[int], d: int, side: int) -> Set[int]:
        lo, hi = run(vs, d, side)
        return set(vs[lo : hi + 1])

    # one crosscap of order a0+b0+c0 threaded through both halves of the handle
    c1: List[List[int]] = []
    for j in range(1, n_c + 1):
        d = j - 1
        a, b, c, e = l2[p - j], l1[p - j], l2[j - 1], pp[j - 1]
        tr = _Tracer(cycles, avoid)
        tr.walk(a, len(a) - 1, run(a, d, 0)[1])
        h = tr.ring(d, at(b, d, 1))
        tr.walk(b, b.index(h), run(b, d, 0)[1])
        h = tr.ring(d, at(c, d, 0))
        tr.walk(c, c.index(h), run(c, d, 1)[0])
        h = tr.ring(d, at(e, d, 0))
        tr.walk(e, e.index(h), len(e) - 1)
        c1.append(tr.out)
    # untangle it against the untouched left paths of each half
    q1: List[Path] = []
    for j in range(1, a0 + 1):
        d = n_c + j - 1
        a, b, c = l1[j - 1], l2[n_c + j - 1], c1[j - 1]
        tr = _Tracer(cycles, avoid)
        tr.walk(a, 0, run(a, d, 1)[0])
        h = tr.ring(d, at(c, d, 0))
        tr.walk(c, c.index(h), run(c, d, 1)[0])
        h = tr.ring(d, at(b, d, 1))
        tr.walk(b, b.index(h), 0)
        q1.append(Path(tr.out))
    q2: List[Path] = []
    for j in range(1, b0 + 1):
        d = n_c + a0 + j - 1
        b, c = l2[n_c + a0 + j - 1], c1[a0 + j - 1]
        tr = _Tracer(cycles, avoid)
        tr.walk(b, 0, run(b, d, 1)[0])
        h = tr.ring(d, at(c, d, 1))
        tr.walk(c, c.index(h), 0)
        q2.append(Path(tr.out))
    q3 = [Path(c) for c in c1[a0 + b0 :]]
    out = SurfaceConfiguration(
        cfg.society,
        Nest(cfg.nest.cycles[m:]),
        cfg.radial,
        (*cfg.transactions[:i], Linkage(q1), Linkage(q2), Linkage(q3), *cfg.transactions[i + 2 :]),
        (*cfg.kinds[:i], "crosscap", "crosscap", "crosscap", *cfg.kinds[i + 2 :]),
    )
    return _natural(out)


def dissolve_crosscap(cfg: SurfaceConfiguration, i: int, a0: int, b0: int, c0: int) -> SurfaceConfiguration:
    """Trade handle P_i and a neighbouring crosscap for three crosscaps of orders a0, b0, c0.

    With the crosscap on the right the new transactions appear as a0, b0,
    c0; with the crosscap on the left (mirror case) as c0, b0, a0. The
    innermost 2a0+2b0+c0 nest cycles are used up.
    """
    _require_config(cfg)
    ell = len(cfg.transactions)
    require_input(0 <= i < ell and cfg.kinds[i] == "handle", f"P{i + 1} is not a handle transaction")
    require_input(min(a0, b0, c0) >= 1, f"crosscap orders must be positive, got {(a0, b0, c0)}")
    if i + 1 < ell and cfg.kinds[i + 1] == "crosscap":
        out = _dissolve(cfg, i, a0, b0, c0)
    else:
        require_input(i >= 1 and cfg.kinds[i - 1] == "crosscap", f"handle P{i + 1} has no neighbouring crosscap")
        out = _mirror(_dissolve(_mirror(cfg), ell - 1 - i, a0, b0, c0))
    verify_configuration(out).require()
    log.debug("dissolved handle P%d: strength %s", i + 1, out.strength)
    return out


def _strength_bound(cfg: SurfaceConfiguration, i: int, h: int, k: int) -> int:
    kinds = cfg.kinds
    if kinds[i] == "handle":
        return (20 * h + 28) * k
    near = [kinds[j] == "handle" for j in (i - 1, i + 1) if 0 <= j < len(kinds)]
    if sum(near) == 2:
        return (4 * h + 5) * k
    if sum(near) == 1:
        return (2 * h + 3) * k
    return k


def normalize_all_crosscaps(cfg: SurfaceConfiguration, k: int, s0: int) -> SurfaceConfiguration:
    """Replace every handle by crosscaps; the result has 2h+c crosscaps of order k and a nest of order s0."""
    _require_config(cfg)
    require_input(k >= 1 and s0 >= 0, f"need k >= 1 and s0 >= 0, got k={k}, s0={s0}")
    h = cfg.handles
    require_input(h == 0 or cfg.crosscaps >= 1, "handles can only be dissolved next to a crosscap")
    need_s = (6 * h + 7) * h * k + s0
    require_input(cfg.nest.order >= need_s, f"nest of order {cfg.nest.order} is below (6h+7)hk+s0 = {need_s}")
    for i, lk in enumerate(cfg.transactions):
        bound = _strength_bound(cfg, i, h, k)
        require_input(lk.order >= bound, f"P{i + 1} ({cfg.kinds[i]}) of order {lk.order} is below {bound}")
    while cfg.handles:
        h = cfg.handles
        i = next(
            q
            for q, kind in enumerate(cfg.kinds)
            if kind == "crosscap" and any(0 <= j < len(cfg.kinds) and cfg.kinds[j] == "handle" for j in (q - 1, q + 1))
        )
        left = i >= 1 and cfg.kinds[i - 1] == "handle"
        right = i + 1 < len(cfg.kinds) and cfg.kinds[i + 1] == "handle"
        x = 4 * h + 5 if left and right else 2 * h + 3
        a0, b0, c0 = (2 * h + 1) * k, k, (x - 2 * h - 2) * k
        if left:
            cfg = _dissolve(cfg, i - 1, a0, b0, c0)
        else:
            cfg = _mirror(_dissolve(_mirror(cfg), len(cfg.kinds) - 2 - i, a0, b0, c0))
        verify_configuration(cfg).require()
        log.debug("%d handles left, strength %s", cfg.handles, cfg.strength)
    out = SurfaceConfiguration(
        cfg.society,
        Nest(cfg.nest.cycles[cfg.nest.order - s0 :] if s0 else ()),
        cfg.radial,
        tuple(Linkage(lk.paths[:k]) for lk in cfg.transactions),
        cfg.kinds,
    )
    verify_configuration(out).require()
    return out
