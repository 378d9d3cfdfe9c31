from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple, TypedDict

from langgraph.graph import END, StateGraph

from veriwall.apaths import JumpBlocker, Jumps, pp_jumps, verify_jump_blocker
from veriwall.config import DEFAULT_CONSTANTS, Constants
from veriwall.errors import PASS, Check, ContractError, fail, require_input
from veriwall.graph import Graph, Linkage, Path, check_path, shortest_path
from veriwall.mesh import LabeledMesh, make_grid, select_submesh, submesh, transpose, verify_mesh
from veriwall.minors import (
    Coord,
    MinorModel,
    complete_graph,
    grid_cells,
    kt_from_crossed_grid,
    kt_from_jumps,
    lift_model,
    verify_controlled,
    verify_model,
)
from veriwall.society import Society, detect_cross

log = logging.getLogger(__name__)

# maximum degree inside a strip of the grid model
STRIP_DEGREE = 4


@dataclass
class GridModel:
    """A model of the (w x h)-grid in a mesh, with every cell keyed (column, row)."""

    mesh: LabeledMesh
    cells: Dict[Coord, FrozenSet[int]]
    eta: MinorModel
    coords: Dict[int, Coord] = field(default_factory=dict)
    associated: bool = False

    @property
    def w(self) -> int:
        return self.mesh.w

    @property
    def h(self) -> int:
        return self.mesh.h

    def union(self) -> FrozenSet[int]:
        return frozenset(self.coords)

    def block(self, cols: Sequence[int], rows: Sequence[int]) -> FrozenSet[int]:
        return frozenset(v for i in cols for j in rows for v in self.cells[(i, j)])


def grid_model(mesh: LabeledMesh) -> GridModel:
    """The canonical grid model: intersections seed the cells, other path vertices join the nearest one."""
    cells = {xy: frozenset(vs) for xy, vs in grid_cells(mesh).items()}
    grid = make_grid(mesh.h, mesh.w)
    vid = grid.vid
    eta = MinorModel(grid.graph, {vid[(j, i)]: vs for (i, j), vs in cells.items()}, "grid")
    verify_model(mesh.graph, grid.graph, eta).require()
    coords = {v: xy for xy, vs in cells.items() for v in vs}
    associated = all(
        v in cells[(i, j)]
        for i, p in enumerate(mesh.vertical, 1)
        for j, q in enumerate(mesh.horizontal, 1)
        for v in p.vset & q.vset
    )
    return GridModel(mesh, cells, eta, coords, associated)


def independent(a: Coord, b: Coord, w: int, h: int) -> bool:
    """One cell lies off the perimeter and the two are not within one step in both directions."""
    inner = any(2 <= i <= w - 1 and 2 <= j <= h - 1 for i, j in (a, b))
    return inner and (abs(a[0] - b[0]) >= 2 or abs(a[1] - b[1]) >= 2)


def _path_edges(mesh: LabeledMesh) -> List[Tuple[int, int]]:
    return [(u, v) for p in mesh.paths() for u, v in zip(p.vertices, p.vertices[1:])]


def eta_jumps(g: Graph, gm: GridModel) -> List[Path]:
    """One path per bridge of the grid model and per pair of its independent attachments."""
    out: List[Path] = []
    coords = gm.coords
    for vs, att in g.bridges_of(gm.union(), _path_edges(gm.mesh)):
        ends = sorted(att)
        inner = set(vs) - att
        for k, a in enumerate(ends):
            for b in ends[k + 1 :]:
                if not independent(coords[a], coords[b], gm.w, gm.h):
                    continue
                if not inner:
                    out.append(Path([a, b]))
                    continue
                p = shortest_path(g, [x for x in g.neighbors(a) if x in inner], [x for x in g.neighbors(b) if x in inner], inner)
                if p is None:
                    raise ContractError(f"bridge attachments {a} and {b} are not joined through the bridge")
                out.append(Path([a, *p, b]))
    log.debug("%d eta-jumps", len(out))
    return out


# isolating a grid submodel


@dataclass(frozen=True)
class Isolation:
    """Deleted set Z and the excluded columns I* and rows J*."""

    z: FrozenSet[int]
    i_star: FrozenSet[int]
    j_star: FrozenSet[int]

    def clean_cells(self, gm: GridModel, t: int) -> Iterator[Coord]:
        for i in range(t + 2, gm.w - t):
            if i in self.i_star:
                continue
            for j in range(t + 2, gm.h - t):
                if j not in self.j_star:
                    yield (i, j)


def _drop_vertices(g: Graph, gone: Set[int] | FrozenSet[int]) -> Graph:
    if not gone:
        return g
    return g.without_edges(e for e in g.edges if e[0] in gone or e[1] in gone)


def _strips(gm: GridModel, t: int) -> List[FrozenSet[int]]:
    """Left block, one centre strip per middle column, right block."""
    w, h = gm.w, gm.h
    centre = range(t + 1, h - t + 1)
    seq = [gm.block(range(1, t + 1), range(1, h + 1))]
    seq += [gm.block([i], centre) for i in range(t + 1, w - t + 1)]
    seq.append(gm.block(range(w - t + 1, w + 1), range(1, h + 1)))
    return seq


def _caps(gm: GridModel, t: int) -> FrozenSet[int]:
    rows = [*range(1, t + 1), *range(gm.h - t + 1, gm.h + 1)]
    return gm.block(range(t + 1, gm.w - t + 1), rows)


@dataclass
class _StripPass:
    gm: GridModel
    graph: Graph
    seq: List[FrozenSet[int]]
    outcome: Jumps | JumpBlocker

    def lines(self, t: int) -> FrozenSet[int]:
        assert isinstance(self.outcome, JumpBlocker)
        return frozenset(t + k for k in self.outcome.y if 1 <= k <= self.gm.w - 2 * t)


def _strip_pass(g: Graph, gm: GridModel, t: int) -> _StripPass:
    g1 = _drop_vertices(g, _caps(gm, t))
    seq = _strips(gm, t)
    out = pp_jumps(g1, seq, STRIP_DEGREE, t**3)
    if isinstance(out, JumpBlocker):
        verify_jump_blocker(g1, seq, out, both=True).require()
    return _StripPass(gm, g1, seq, out)


def _to_column(gm: GridModel, u: int, col: int) -> List[int]:
    """From u along its horizontal path to the nearest vertex of P_col, staying inside u's cell."""
    p = gm.mesh.vertical[col - 1]
    if u in p.vset:
        return [u]
    j = gm.coords[u][1]
    q = gm.mesh.horizontal[j - 1]
    if u not in q.vset:
        raise ContractError(f"vertex {u} of column {col} lies on no path of the mesh")
    on_vertical = {v for r in gm.mesh.vertical for v in r}
    k = q.index(u)
    best: Optional[List[int]] = None
    for step in (-1, 1):
        idx = k + step
        while 0 <= idx < len(q) and q.vertices[idx] not in on_vertical:
            idx += step
        if 0 <= idx < len(q) and q.vertices[idx] in p.vset:
            seg = list(q.vertices[k : idx + 1]) if step == 1 else list(q.vertices[idx : k + 1])[::-1]
            if best is None or len(seg) < len(best):
                best = seg
    if best is None:
        raise ContractError(f"vertex {u} cannot reach P{col} inside its cell")
    return best


def _kt_from_strip_jumps(g: Graph, sp: _StripPass, t: int) -> MinorModel:
    """Extend G-jumps between centre strips to middle jumps of the mesh on the outer t rows."""
    gm = sp.gm
    jumps = sp.outcome
    assert isinstance(jumps, Jumps)
    w, h = gm.w, gm.h
    last = w - 2 * t + 1
    paths = []
    for p, (a, b) in zip(jumps.paths, jumps.hosts):
        if a == 0 or b == last:
            continue
        head = _to_column(gm, p.vertices[0], t + a)
        tail = _to_column(gm, p.vertices[-1], t + b)
        paths.append(Path([*head[::-1], *p.vertices[1:-1], *tail]))
    cols = [1, *(t + k for k in jumps.members if 1 <= k <= w - 2 * t), w]
    rows = [*range(1, t + 1), *range(h - t + 1, h + 1)]
    mstar = select_submesh(gm.mesh, rows, cols)
    verify_mesh(g, mstar).require()
    model = kt_from_jumps(g, mstar, Linkage(paths), t)
    verify_controlled(g, gm.mesh, model, t).require()
    model.origin = f"isolate:{model.origin}"
    return model


def _check_bounds(iso: Isolation, t: int, constants: Constants) -> None:
    if constants.nonstandard:
        log.info("nonstandard constants: |Z|=%d |I*|=%d |J*|=%d reported only", len(iso.z), len(iso.i_star), len(iso.j_star))
        return
    if len(iso.z) >= constants.z_bound(t):
        raise ContractError(f"|Z|={len(iso.z)} breaks the bound {constants.z_bound(t)}")
    for name, s in (("I*", iso.i_star), ("J*", iso.j_star)):
        if len(s) >= constants.ij_bound(t):
            raise ContractError(f"|{name}|={len(s)} breaks the bound {constants.ij_bound(t)}")


def verify_isolation(g: Graph, gm: GridModel, iso: Isolation, t: int) -> Check:
    """Clean cells hold no vertex of Z and no end of an eta-jump of G - Z."""
    clean = set(iso.clean_cells(gm, t))
    for xy in sorted(clean):
        if gm.cells[xy] & iso.z:
            return fail(f"clean cell {xy} meets Z")
    for p in eta_jumps(_drop_vertices(g, iso.z), gm):
        for v in p.ends:
            if gm.coords[v] in clean:
                return fail(f"eta-jump {p.ends[0]}-{p.ends[1]} ends in clean cell {gm.coords[v]}")
    return PASS


def _check_isolation_input(m: LabeledMesh, gm: GridModel, t: int, constants: Constants) -> None:
    require_input(t >= 5, f"need t >= 5, got {t}")
    require_input(gm.mesh is m or (gm.w, gm.h) == (m.w, m.h), "grid model does not belong to the mesh")
    need = 2 * t + constants.margin
    require_input(min(m.w, m.h) >= need, f"mesh of size {m.w}x{m.h} is below 2t+{constants.margin} = {need}")


def _isolate(g: Graph, gm: GridModel, t: int) -> Tuple[Optional[_StripPass], Optional[Isolation]]:
    """The first pass that finds jumps, or the combined blocker of both passes."""
    wide = _strip_pass(g, gm, t)
    if isinstance(wide.outcome, Jumps):
        return wide, None
    tall = _strip_pass(g, grid_model(transpose(gm.mesh)), t)
    if isinstance(tall.outcome, Jumps):
        return tall, None
    iso = Isolation(wide.outcome.z | tall.outcome.z, wide.lines(t), tall.lines(t))
    return None, iso


def isolated_grid_submodel(
    g: Graph, m: LabeledMesh, gm: GridModel, t: int, constants: Constants = DEFAULT_CONSTANTS
) -> MinorModel | Isolation:
    """A K_t model controlled by m, or (Z, I*, J*) leaving every clean cell free of Z and of eta-jump ends.

    Jumps between column strips are sought first, then between row strips.
    """
    _check_isolation_input(m, gm, t, constants)
    found, iso = _isolate(g, gm, t)
    if found is not None:
        return _kt_from_strip_jumps(g, found, t)
    assert iso is not None
    _check_bounds(iso, t, constants)
    verify_isolation(g, gm, iso, t).require()
    log.debug("isolation: |Z|=%d I*=%s J*=%s", len(iso.z), sorted(iso.i_star), sorted(iso.j_star))
    return iso


# flat submesh or K_t


@dataclass(frozen=True)
class CandidateTranscript:
    """Outcome of the exhaustive cross search on one candidate society."""

    index: int
    columns: Tuple[int, int]
    rows: Tuple[int, int]
    omega: Tuple[int, int, int, int]
    vertices: FrozenSet[int]
    cross: Optional[Tuple[Path, Path]] = None

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class FlatCertificate:
    z: FrozenSet[int]
    submesh: LabeledMesh
    candidates: Tuple[CandidateTranscript, ...]
    selected: int
    constants: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def omega(self) -> Tuple[int, int, int, int]:
        return self.candidates[self.selected].omega

    @property
    def nonstandard(self) -> bool:
        return bool(self.constants.get("nonstandard", False))


def _place_windows(gm: GridModel, iso: Isolation, t: int, n_prime: int, c: int) -> Tuple[int, List[int]]:
    """A row offset r0 for the band and the left columns of c windows of width n'+2."""
    band = n_prime + 2 * t + 2
    r0 = next(
        (r for r in range(t, gm.h - t - band + 1) if not any(r + k in iso.j_star for k in range(1, band + 1))),
        None,
    )
    require_input(r0 is not None, f"no band of {band} rows avoids J* inside the {gm.h} rows of the mesh")
    lefts: List[int] = []
    i = t + 3
    while len(lefts) < c and i + n_prime + 1 <= gm.w - t - 2:
        bad = [x for x in range(i, i + n_prime + 2) if x in iso.i_star]
        if bad:
            i = max(bad) + 1
            continue
        lefts.append(i)
        i += n_prime + 3
    require_input(len(lefts) == c, f"room for {len(lefts)} of {c} candidate windows in {gm.w} columns")
    return r0, lefts


def _corner(g: Graph, gm: GridModel, cell: Coord, toward: Coord) -> int:
    there = gm.cells[toward]
    hits = [v for v in sorted(gm.cells[cell]) if any(w in there for w in g.neighbors(v))]
    if not hits:
        raise ContractError(f"cell {cell} has no edge to cell {toward}")
    return hits[0]


def _local_society(g: Graph, vertices: FrozenSet[int], omega: Sequence[int]) -> Tuple[Society, List[int]]:
    sub, back = g.induced(vertices)
    idx = {v: i for i, v in enumerate(back)}
    return Society(sub, [idx[v] for v in omega]), back


def _candidates(
    g: Graph, gm: GridModel, iso: Isolation, r0: int, lefts: Sequence[int], t: int, n_prime: int, budget: int
) -> List[CandidateTranscript]:
    gz = _drop_vertices(g, iso.z)
    bridges = gz.bridges_of(gm.union() - iso.z, _path_edges(gm.mesh))
    top, bottom = r0 + t + 1, r0 + t + n_prime + 2
    out = []
    for a, left in enumerate(lefts):
        right = left + n_prime + 1
        window = gm.block(range(left, right + 1), range(top, bottom + 1))
        vs = set(window)
        for bvs, att in bridges:
            if not any(left < gm.coords[v][0] < right and top < gm.coords[v][1] < bottom for v in att):
                continue
            if not att <= window:
                raise ContractError(f"bridge at window {a} attaches outside it")
            vs |= bvs
        omega = (
            _corner(g, gm, (left, top), (left, top - 1)),
            _corner(g, gm, (right, top), (right, top - 1)),
            _corner(g, gm, (right, bottom), (right, bottom + 1)),
            _corner(g, gm, (left, bottom), (left, bottom + 1)),
        )
        s, back = _local_society(gz, frozenset(vs), omega)
        found = detect_cross(s, budget)
        cross = None
        if found is not None:
            p1, p2 = (Path(back[v] for v in p) for p in found)
            cross = (p1, p2) if omega[0] in p1.ends else (p2, p1)
        log.debug("candidate %d: %d vertices, %s", a, len(vs), "cross" if cross else "no cross")
        out.append(CandidateTranscript(a, (left, right), (top, bottom), omega, frozenset(vs), cross))
    return out


def _kt_from_crosses(g: Graph, gm: GridModel, r0: int, cands: Sequence[CandidateTranscript], t: int, n_prime: int) -> MinorModel:
    """Model the crossed grid H'_{c,2t} on the band, one cross per window, and lift K_t through it."""
    cg, mu0 = kt_from_crossed_grid(t)
    require_input(cg.c == len(cands), f"{len(cands)} crosses for a crossed grid with {cg.c}")
    x = {1: cands[0].columns[0] - 1}
    for a, cand in enumerate(cands, 1):
        left, right = cand.columns
        x[3 * a - 1], x[3 * a], x[3 * a + 1] = left, right, right + 1
    y = {j: r0 + j if j <= t else r0 + n_prime + 2 + j for j in range(1, 2 * t + 1)}
    middle = range(r0 + t + 1, r0 + t + n_prime + 3)
    sets: Dict[Coord, Set[int]] = {}
    for i in range(1, cg.w + 1):
        hi = x[i + 1] - 1 if i < cg.w else x[i]
        for j in range(1, 2 * t + 1):
            vs = set(gm.block(range(x[i], hi + 1), [y[j]]))
            if j == t and i % 3 == 1:
                vs |= gm.block([x[i]], middle)
            sets[(i, j)] = vs
    for a, cand in enumerate(cands, 1):
        assert cand.cross is not None
        down, up = cand.cross
        sets[(3 * a - 1, t)] |= down.vset
        sets[(3 * a - 1, t + 1)] |= up.vset
    vid = cg.vid
    nu = MinorModel(cg.graph, {vid[xy]: frozenset(vs) for xy, vs in sets.items()}, "crossed-grid")
    verify_model(g, cg.graph, nu).require()
    mu = lift_model(nu, mu0)
    mu.origin = "flat:crosses"
    verify_model(g, complete_graph(t), mu).require()
    verify_controlled(g, gm.mesh, mu, t).require()
    return mu


def verify_flat_certificate(g: Graph, cert: FlatCertificate, t: int, constants: Constants = DEFAULT_CONSTANTS) -> Check:
    if not 0 <= cert.selected < len(cert.candidates):
        return fail("selected candidate out of range")
    mv = cert.submesh.vertex_set()
    if mv & cert.z:
        return fail("submesh meets Z")
    c = verify_mesh(g, cert.submesh)
    if not c:
        return fail(f"submesh: {c.reason}")
    if not cert.nonstandard and len(cert.z) >= constants.z_bound(t):
        return fail(f"|Z|={len(cert.z)} breaks the bound {constants.z_bound(t)}")
    sel = cert.candidates[cert.selected]
    if sel.cross is not None:
        return fail("selected candidate society has a cross")
    if len(set(sel.omega)) != 4 or not set(sel.omega) <= sel.vertices:
        return fail("omega is not four vertices of the candidate society")
    if not mv <= sel.vertices:
        return fail("submesh leaves the candidate society")
    if sel.vertices & cert.z:
        return fail("candidate society meets Z")
    for cand in cert.candidates:
        if cand.cross is None:
            continue
        for p in cand.cross:
            pc = check_path(g, p)
            if not pc:
                return fail(f"candidate {cand.index}: {pc.reason}")
    s, _ = _local_society(_drop_vertices(g, cert.z), sel.vertices, sel.omega)
    if detect_cross(s, constants.budget_vertices) is not None:
        return fail("cross search finds a cross in the selected candidate society")
    return PASS


# pipeline


class FlatState(TypedDict, total=False):
    g: Graph
    mesh: LabeledMesh
    t: int
    n_prime: int
    constants: Constants
    gm: GridModel
    found: Optional[_StripPass]
    iso: Optional[Isolation]
    model: Optional[MinorModel]
    certificate: Optional[FlatCertificate]


def build_grid_model(state: FlatState) -> FlatState:
    state["gm"] = grid_model(state["mesh"])
    return state


def isolate_submodel(state: FlatState) -> FlatState:
    _check_isolation_input(state["mesh"], state["gm"], state["t"], state["constants"])
    found, iso = _isolate(state["g"], state["gm"], state["t"])
    state["found"], state["iso"] = found, iso
    if iso is not None:
        _check_bounds(iso, state["t"], state["constants"])
        verify_isolation(state["g"], state["gm"], iso, state["t"]).require()
    return state


def kt_from_isolation_jumps(state: FlatState) -> FlatState:
    assert state["found"] is not None
    state["model"] = _kt_from_strip_jumps(state["g"], state["found"], state["t"])
    return state


def candidate_societies(state: FlatState) -> FlatState:
    g, gm, iso, t, n_prime = state["g"], state["gm"], state["iso"], state["t"], state["n_prime"]
    constants = state["constants"]
    assert iso is not None
    c = (t - 3) * (t - 4) // 2
    r0, lefts = _place_windows(gm, iso, t, n_prime, c)
    cands = _candidates(g, gm, iso, r0, lefts, t, n_prime, constants.budget_vertices)
    flat = next((cand for cand in cands if cand.cross is None), None)
    if flat is None:
        state["model"] = _kt_from_crosses(g, gm, r0, cands, t, n_prime)
        return state
    (left, right), (top, bottom) = flat.columns, flat.rows
    inner = submesh(gm.mesh, (top + 1, bottom - 1), (left + 1, right - 1))
    cert = FlatCertificate(iso.z, inner, tuple(cands), flat.index, constants.echo())
    verify_flat_certificate(g, cert, t, constants).require()
    state["certificate"] = cert
    return state


flat_graph = StateGraph(FlatState)
flat_graph.add_node("BuildGridModel", build_grid_model)
flat_graph.add_node("IsolateSubmodel", isolate_submodel)
flat_graph.add_node("KtFromJumps", kt_from_isolation_jumps)
flat_graph.add_node("CandidateSocieties", candidate_societies)
flat_graph.set_entry_point("BuildGridModel")
flat_graph.add_edge("BuildGridModel", "IsolateSubmodel")
flat_graph.add_conditional_edges(
    "IsolateSubmodel",
    lambda s: "KtFromJumps" if s.get("found") is not None else "CandidateSocieties",
    {"KtFromJumps": "KtFromJumps", "CandidateSocieties": "CandidateSocieties"},
)
flat_graph.add_edge("KtFromJumps", END)
flat_graph.add_edge("CandidateSocieties", END)
flat_app = flat_graph.compile()


def flat_mesh_or_kt(
    g: Graph, m: LabeledMesh, t: int, n_prime: int, constants: Constants = DEFAULT_CONSTANTS
) -> MinorModel | FlatCertificate:
    """A K_t model controlled by m, or Z with a flat (n' x n')-submesh in G - Z.

    The mesh must have order at least the theorem's bound unless the
    constants are overridden; then bounds are reported, not asserted.
    """
    require_input(t >= 5, f"need t >= 5, got {t}")
    require_input(n_prime >= 2, f"need n' >= 2, got {n_prime}")
    need = constants.mesh_order(t, n_prime)
    n = min(m.w, m.h)
    if not constants.nonstandard:
        require_input(n >= need, f"mesh of order {n} is below 100t^3(n'+2t+2) = {need}")
    g.check_vertices(m.vertex_set())
    state = flat_app.invoke({"g": g, "mesh": m, "t": t, "n_prime": n_prime, "constants": constants})
    if state.get("model") is not None:
        log.info("flat mesh pipeline: K_%d via %s", t, state["model"].origin)
        return state["model"]
    log.info("flat mesh pipeline: flat submesh with |Z|=%d", len(state["certificate"].z))
    return state["certificate"]
