from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Set, Tuple

from veriwall.apaths import IntervalSet, select_d_independent, select_disjoint_intervals
from veriwall.errors import PASS, Check, ContractError, InputError, fail, require_input
from veriwall.graph import Edge, Graph, Linkage, Path, check_linkage, check_path, max_linkage_or_separation, norm_edge
from veriwall.mesh import LabeledMesh, make_grid, mesh_from_surface_wall, submesh

log = logging.getLogger(__name__)

Coord = Tuple[int, int]


@dataclass
class MinorModel:
    """Branch sets of a model of `h` in some host graph, keyed by H-vertex."""

    h: Graph
    branch_sets: Dict[int, FrozenSet[int]]
    origin: str = ""

    def vertices(self) -> FrozenSet[int]:
        return frozenset(v for bs in self.branch_sets.values() for v in bs)


def complete_graph(t: int) -> Graph:
    return Graph(t, itertools.combinations(range(t), 2), {v: f"k{v}" for v in range(t)})


def verify_model(g: Graph, h: Graph, m: MinorModel) -> Check:
    if set(m.branch_sets) != set(h.vertices()):
        return fail("branch sets do not match the vertices of H")
    owner: Dict[int, int] = {}
    for x in sorted(m.branch_sets):
        bs = m.branch_sets[x]
        if not bs:
            return fail(f"branch set of {x} is empty")
        bad = [v for v in bs if not (isinstance(v, int) and 0 <= v < g.n)]
        if bad:
            return fail(f"branch set of {x} has vertices outside G: {sorted(bad)[:5]}")
        for v in bs:
            if v in owner:
                return fail(f"branch sets of {owner[v]} and {x} share vertex {v}")
            owner[v] = x
        if not g.is_connected_set(bs):
            return fail(f"branch set of {x} is not connected")
    realized: Set[Edge] = set()
    for u, v in g.edges:
        a, b = owner.get(u), owner.get(v)
        if a is not None and b is not None and a != b:
            realized.add(norm_edge(a, b))
    for e in h.edge_list():
        if e not in realized:
            return fail(f"H-edge {e[0]}-{e[1]} is not realized")
    return PASS


def _linked(g: Graph, x: FrozenSet[int], y: FrozenSet[int], k: int) -> bool:
    if any(w in y for v in x for w in g.neighbors(v)):
        return True
    blocked = x | y
    xs = {w for v in x for w in g.neighbors(v)} - blocked
    ys = {w for v in y for w in g.neighbors(v)} - blocked
    return isinstance(max_linkage_or_separation(g, xs, ys, k, avoid=blocked), Linkage)


def verify_controlled(g: Graph, mesh: LabeledMesh, m: MinorModel, t: int) -> Check:
    """Every branch set reaches every mesh path through t internally disjoint paths.

    Needs t <= min(w, h). A branch set meeting t horizontal paths passes
    for all vertical paths (the horizontals carry the paths), and
    symmetrically; the rest goes through the Menger kernel.
    """
    if t > min(mesh.w, mesh.h):
        return fail(f"t={t} exceeds min(w, h)={min(mesh.w, mesh.h)} of the {mesh.w}x{mesh.h} mesh")
    row_of = {v: j for j, q in enumerate(mesh.horizontal) for v in q}
    col_of = {v: i for i, p in enumerate(mesh.vertical) for v in p}
    for x in sorted(m.branch_sets):
        bs = frozenset(m.branch_sets[x])
        rows = {row_of[v] for v in bs if v in row_of}
        cols = {col_of[v] for v in bs if v in col_of}
        for name, fam, hit, across in (("P", mesh.vertical, cols, rows), ("Q", mesh.horizontal, rows, cols)):
            if len(across) >= t:
                continue
            for i, p in enumerate(fam):
                if i in hit or _linked(g, bs, p.vset, t):
                    continue
                return fail(f"branch set of {x} is cut from {name}{i + 1} by fewer than {t} vertices")
    return PASS


def lift_model(outer: MinorModel, inner: MinorModel) -> MinorModel:
    """Compose a model of H' in G with a model of H in H'."""
    out = {}
    for u, xs in inner.branch_sets.items():
        out[u] = frozenset(v for x in xs for v in outer.branch_sets[x])
    return MinorModel(inner.h, out, inner.origin)


# crossed grids


@dataclass
class CrossedGrid:
    """The (3c+1 x h)-grid with the middle seam cut except every third column, plus c crosses."""

    c: int
    h: int
    graph: Graph
    coords: Dict[int, Coord]
    crossings: List[Tuple[Edge, Edge]] = field(default_factory=list)
    deleted: List[Tuple[Coord, Coord]] = field(default_factory=list)

    @property
    def w(self) -> int:
        return 3 * self.c + 1

    @property
    def vid(self) -> Dict[Coord, int]:
        return {xy: v for v, xy in self.coords.items()}

    def underlying(self) -> Tuple[LabeledMesh, LabeledMesh]:
        """The top and bottom (w x h/2)-grids."""
        vid = self.vid
        half = self.h // 2
        out = []
        for rows in (range(1, half + 1), range(half + 1, self.h + 1)):
            vertical = tuple(Path(vid[(i, j)] for j in rows) for i in range(1, self.w + 1))
            horizontal = tuple(Path(vid[(i, j)] for i in range(1, self.w + 1)) for j in rows)
            out.append(LabeledMesh(self.graph, vertical, horizontal, "grid", dict(self.coords)))
        return out[0], out[1]


def make_crossed_grid(c: int, h: int) -> CrossedGrid:
    require_input(c >= 1, f"need at least one cross, got c={c}")
    require_input(h >= 2 and h % 2 == 0, f"height must be even and positive, got {h}")
    w = 3 * c + 1
    mid = h // 2
    vid = {(i, j): (j - 1) * w + (i - 1) for j in range(1, h + 1) for i in range(1, w + 1)}
    edges: List[Edge] = []
    deleted: List[Tuple[Coord, Coord]] = []
    for (i, j), v in vid.items():
        if i < w:
            edges.append((v, vid[(i + 1, j)]))
        if j < h:
            if j == mid and i % 3 != 1:
                deleted.append(((i, j), (i, j + 1)))
            else:
                edges.append((v, vid[(i, j + 1)]))
    crossings = []
    for i in range(2, 3 * c + 1, 3):
        a = norm_edge(vid[(i, mid)], vid[(i + 1, mid + 1)])
        b = norm_edge(vid[(i, mid + 1)], vid[(i + 1, mid)])
        crossings.append((a, b))
        edges += [a, b]
    labels = {v: f"{i},{j}" for (i, j), v in vid.items()}
    g = Graph(w * h, edges, labels)
    return CrossedGrid(c, h, g, {v: xy for xy, v in vid.items()}, crossings, deleted)


def kt_from_crossed_grid(t: int) -> Tuple[CrossedGrid, MinorModel]:
    """A K_t model in H'_{c,2t} with c = (t-3)(t-4)/2.

    K_t vertices 0..t-4 are crossing strands, t-3..t-1 the outer sets
    (left column and top row, bottom row, right column). Crosses are used
    in segments s = 2..t-3: segment s spends s-1 consecutive crosses in
    which strand s (the leg) meets every earlier strand (the bars) once.
    Strands travel along the seam at depths 1..t-3 and reach depth t-1 on
    both sides through vertical tentacles.
    """
    require_input(t >= 5, f"need t >= 5, got {t}")
    k = t - 3
    c = k * (k - 1) // 2
    cg = make_crossed_grid(c, 2 * t)
    w = cg.w
    cells: Dict[int, Set[Coord]] = {a: set() for a in range(1, k + 1)}
    flip = {"T": "B", "B": "T"}

    def at(side: str, col: int, depth: int) -> Coord:
        return (col, t + 1 - depth) if side == "T" else (col, t + depth)

    def run(a: int, side: str, c0: int, c1: int, depth: int) -> None:
        cells[a].update(at(side, x, depth) for x in range(c0, c1 + 1))

    def drop(a: int, side: str, col: int, d1: int) -> None:
        cells[a].update(at(side, col, d) for d in range(1, d1 + 1))

    drop(1, "T", 2, t - 1)
    pos, depth = {1: 2}, {1: 1}
    order = [1]
    cross = 1
    far = "B"
    for s in range(2, k + 1):
        near = "T" if s % 2 == 0 else "B"
        far = flip[near]
        m = s - 1
        xs = [3 * (cross + r) - 1 for r in range(m)]
        drop(s, far, xs[0], t - 1)
        for r, (a, x) in enumerate(zip(order, xs), 1):
            if depth[a] != r:
                raise ContractError(f"strand {a} arrives at depth {depth[a]}, expected {r}")
            run(a, near, pos[a], x, r)
            drop(a, near, x, r)
            depth[a] = m - r + 2
            drop(a, far, x + 1, t - 1 if r == 1 else depth[a])
            pos[a] = x + 1
            cells[s] |= {at(far, x, 1), at(near, x + 1, 1)}
            if r < m:
                cells[s] |= {at(near, x + 2, 1), at(far, x + 2, 1)}
        last = xs[-1]
        if s < k:
            cells[s] |= {at(near, last + 2, 1), at(far, last + 2, 1)}
            pos[s], depth[s] = last + 2, 1
        else:
            drop(s, near, last + 1, t - 1)
        order = [s] + order[::-1]
        cross += m
    for a in order[1:]:
        run(a, far, pos[a], w - 1, depth[a])
    outer = [
        {(1, j) for j in range(1, 2 * t + 1)} | {(i, 1) for i in range(2, w)},
        {(i, 2 * t) for i in range(2, w)},
        {(w, j) for j in range(1, 2 * t + 1)},
    ]
    vid = cg.vid
    branch = {a - 1: frozenset(vid[xy] for xy in cells[a]) for a in cells}
    branch.update({k + q: frozenset(vid[xy] for xy in o) for q, o in enumerate(outer)})
    model = MinorModel(complete_graph(t), branch, "crossed-grid")
    verify_model(cg.graph, model.h, model).require()
    owner = {v: x for x, bs in branch.items() for v in bs}
    used = sum(all(owner.get(u) is not None and owner.get(u) == owner.get(v) for u, v in pair) for pair in cg.crossings)
    if used != c:
        raise ContractError(f"model uses {used} of {c} crosses")
    log.debug("K_%d model in H'_{%d,%d}", t, c, 2 * t)
    return cg, model


# meshes with middle jumps


def ltor_linkage(m: LabeledMesh, j1: int, j2: int, t: int) -> Linkage:
    """t disjoint P_1-P_w paths; path a runs from row j1+a on P_1 to row j2+a on P_w."""
    require_input(m.h == 2 * t, f"mesh needs {2 * t} horizontal paths, has {m.h}")
    require_input(m.w >= t + 2, f"mesh needs at least {t + 2} vertical paths, has {m.w}")
    require_input(0 <= j1 <= t and 0 <= j2 <= t, f"offsets must lie in [0, {t}]")
    paths = []
    for a in range(1, t + 1):
        q1, q2 = m.horizontal[j1 + a - 1], m.horizontal[j2 + a - 1]
        p = m.vertical[a if j1 >= j2 else m.w - a - 1]
        head = list(q1.vertices)
        cut = next(i for i, v in enumerate(head) if v in p.vset)
        head = head[: cut + 1]
        iu = p.index(head[-1])
        step = 1 if j2 > j1 else -1
        iv = iu
        while p.vertices[iv] not in q2.vset:
            iv += step
        mid = p.vertices[iu : iv + 1] if step == 1 else p.vertices[iv : iu + 1][::-1]
        tail = q2.vertices[q2.index(mid[-1]) :]
        paths.append(Path([*head, *mid[1:], *tail[1:]]))
    lk = Linkage(paths)
    check_linkage(m.graph, lk).require()
    return lk


def middle_vertices(mesh: LabeledMesh, t: int) -> Dict[int, int]:
    """Inner vertices of the Q_t-Q_{t+1} subpaths, mapped to their 1-based column."""
    require_input(mesh.h == 2 * t, f"mesh needs {2 * t} horizontal paths, has {mesh.h}")
    qt, qn = mesh.horizontal[t - 1].vset, mesh.horizontal[t].vset
    out: Dict[int, int] = {}
    for i, p in enumerate(mesh.vertical, 1):
        lo = max(k for k, v in enumerate(p.vertices) if v in qt)
        hi = min(k for k, v in enumerate(p.vertices) if v in qn)
        out.update({v: i for v in p.vertices[lo + 1 : hi]})
    return out


def grid_cells(mesh: LabeledMesh, splits: Optional[Dict[int, int]] = None) -> Dict[Coord, Set[int]]:
    """Canonical model of the (w x h)-grid in a mesh, keyed (column, row).

    Intersections seed the cells; every other path vertex joins the nearest
    intersection along its path, the lower index on ties. `splits` maps a
    column to a middle vertex x: the Q_t side up to x joins row t, the rest
    row t+1.
    """
    splits = splits or {}
    half = mesh.h // 2
    cells: Dict[Coord, Set[int]] = {(i, j): set() for i in range(1, mesh.w + 1) for j in range(1, mesh.h + 1)}
    row_of = {v: j for j, q in enumerate(mesh.horizontal, 1) for v in q}
    col_of = {v: i for i, p in enumerate(mesh.vertical, 1) for v in p}

    def fill(path: Path, index_of: Dict[int, int], key, cut: Optional[int]) -> None:
        hits = [(k, index_of[v]) for k, v in enumerate(path.vertices) if v in index_of]
        for (k0, a), (k1, b) in zip(hits, hits[1:]):
            for k in range(k0 + 1, k1):
                v = path.vertices[k]
                if cut is not None and {a, b} == {half, half + 1}:
                    tgt = half if k <= cut else half + 1
                elif k - k0 != k1 - k:
                    tgt = a if k - k0 < k1 - k else b
                else:
                    tgt = min(a, b)
                cells[key(tgt)].add(v)

    for v in row_of.keys() & col_of.keys():
        cells[(col_of[v], row_of[v])].add(v)
    for i, p in enumerate(mesh.vertical, 1):
        cut = p.index(splits[i]) if i in splits else None
        fill(p, row_of, lambda j, i=i: (i, j), cut)
    for j, q in enumerate(mesh.horizontal, 1):
        fill(q, col_of, lambda i, j=j: (i, j), None)
    return cells


@dataclass
class _Jump:
    path: Path
    left: int
    right: int
    x: int
    y: int

    @property
    def interval(self) -> Tuple[int, int]:
        return (self.left, self.right)


def _read_jumps(g: Graph, mesh: LabeledMesh, jumps: Linkage, t: int) -> List[_Jump]:
    mids = middle_vertices(mesh, t)
    inside = mesh.vertex_set()
    c = check_linkage(g, jumps)
    if not c:
        raise InputError(f"jumps are not disjoint paths of G: {c.reason}")
    out = []
    for p in jumps:
        a, b = p.ends
        if a not in mids or b not in mids:
            raise InputError(f"jump {list(p)[:4]}... does not join two middle vertices")
        if any(v in inside for v in p.inner):
            raise InputError(f"jump {list(p)[:4]}... is not a V(M)-path")
        if mids[a] > mids[b]:
            a, b = b, a
        if mids[b] - mids[a] < 2:
            raise InputError(f"jump ends on columns {mids[a]} and {mids[b]} are not independent")
        out.append(_Jump(p, mids[a], mids[b], a, b))
    if not IntervalSet(j.interval for j in out).is_independent(2):
        raise InputError("jump endpoints are not pairwise independent")
    return out


def _short_branch(g: Graph, mesh: LabeledMesh, jumps: List[_Jump], t: int) -> MinorModel:
    jumps = [j for j in jumps if j.left != 1 and j.right != mesh.w]
    cg, mu0 = kt_from_crossed_grid(t)
    chosen = select_disjoint_intervals(IntervalSet(j.interval for j in jumps), cg.c, t)
    by_iv = {j.interval: j for j in jumps}
    sel = [by_iv[iv] for iv in sorted(chosen.intervals)]
    splits = {j.left: j.x for j in sel} | {j.right: j.y for j in sel}
    eta0 = grid_cells(mesh, splits)
    w = mesh.w

    def cols(lo: int, hi: int, row: int) -> Set[int]:
        return {v for i in range(lo, hi + 1) for v in eta0[(i, row)]}

    eta: Dict[Coord, Set[int]] = {}
    bounds = [0] + [b for j in sel for b in (j.left, j.right)] + [w + 1]
    for alpha in range(1, cg.c + 2):
        lo, hi = bounds[2 * alpha - 2] + 1, bounds[2 * alpha - 1] - 1
        for row in range(1, 2 * t + 1):
            eta[(3 * alpha - 2, row)] = cols(lo, hi, row)
    for alpha, j in enumerate(sel, 1):
        rv = j.path.vset
        for row in range(1, 2 * t + 1):
            if row < t:
                eta[(3 * alpha - 1, row)] = set(eta0[(j.left, row)])
                eta[(3 * alpha, row)] = cols(j.left + 1, j.right, row)
            elif row == t:
                eta[(3 * alpha - 1, row)] = set(eta0[(j.left, row)]) | rv
                eta[(3 * alpha, row)] = cols(j.left + 1, j.right, row) - rv
            else:
                eta[(3 * alpha - 1, row)] = cols(j.left, j.right - 1, row)
                eta[(3 * alpha, row)] = set(eta0[(j.right, row)])
    vid = cg.vid
    outer = MinorModel(cg.graph, {vid[xy]: frozenset(vs) for xy, vs in eta.items()}, "jumps")
    verify_model(g, cg.graph, outer).require()
    mu = lift_model(outer, mu0)
    mu.origin = "jumps:short"
    return mu


def _splice(prev: List[int], nxt: Sequence[int]) -> List[int]:
    if nxt[0] not in prev:
        raise ContractError("linkage pieces do not meet at the shared column")
    return prev[: prev.index(nxt[0])] + list(nxt)


def _down_to_row(p: Path, x: int, row: FrozenSet[int]) -> List[int]:
    """Vertices of p from x towards higher indices, stopping before `row`."""
    out = []
    for v in p.vertices[p.index(x) :]:
        if v in row:
            return out
        out.append(v)
    raise ContractError("vertical path ends before reaching the row")


def _long_branch(g: Graph, mesh: LabeledMesh, jumps: List[_Jump], t: int) -> MinorModel:
    k = t * (t - 1) // 2
    chosen = select_d_independent(IntervalSet(j.interval for j in jumps), k, t + 1)
    by_iv = {j.interval: j for j in jumps}
    sel = [by_iv[iv] for iv in sorted(chosen.intervals)]
    label: Dict[int, int] = {}
    for j, (a, b) in zip(sel, itertools.combinations(range(1, t + 1), 2)):
        label[j.left], label[j.right] = a, b
    ends = sorted(label)
    strands: List[List[int]] = [[] for _ in range(t)]
    for lo, hi in zip(ends, ends[1:]):
        piece = ltor_linkage(submesh(mesh, (1, 2 * t), (lo, hi)), label[lo], label[hi], t)
        for a, p in enumerate(piece):
            strands[a] = _splice(strands[a], p.vertices) if strands[a] else list(p.vertices)
    below = mesh.horizontal[t].vset
    branch: Dict[int, Set[int]] = {lab: set(strands[t - lab]) for lab in range(1, t + 1)}
    for j in sel:
        a = label[j.left]
        branch[a] |= set(j.path.vset)
        branch[a] |= set(_down_to_row(mesh.vertical[j.left - 1], j.x, below))
        branch[a] |= set(_down_to_row(mesh.vertical[j.right - 1], j.y, below))
    return MinorModel(complete_graph(t), {lab - 1: frozenset(vs) for lab, vs in branch.items()}, "jumps:long")


def kt_from_jumps(g: Graph, mesh: LabeledMesh, jumps: Linkage, t: int) -> MinorModel:
    """A K_t model controlled by a (w x 2t)-mesh carrying t^3 - 2 middle jumps.

    Short jumps (span at most t) are stretched into the crosses of H'_{c,2t};
    otherwise C(t,2) long jumps spaced more than t apart join t left-to-right
    strands pairwise. The branch taken is recorded in `origin`.
    """
    require_input(t >= 5, f"need t >= 5, got {t}")
    require_input(mesh.h == 2 * t, f"mesh needs {2 * t} horizontal paths, has {mesh.h}")
    require_input(len(jumps) >= t**3 - 2, f"{len(jumps)} jumps, need at least {t**3 - 2}")
    read = _read_jumps(g, mesh, jumps, t)
    short = [j for j in read if j.right - j.left <= t]
    if 4 * len(short) >= t**3 - 4:
        model = _short_branch(g, mesh, short, t)
    else:
        model = _long_branch(g, mesh, [j for j in read if j.right - j.left > t], t)
    verify_model(g, model.h, model).require()
    verify_controlled(g, mesh, model, t).require()
    log.debug("K_%d from %d jumps via the %s branch", t, len(read), model.origin)
    return model


def plant_middle_jumps(t: int, w: int, intervals: Iterable[Sequence[int]]) -> Tuple[Graph, LabeledMesh, Linkage]:
    """The (w x 2t)-grid with the middle edge of each endpoint column subdivided and one jump per interval."""
    ivs = [tuple(iv) for iv in intervals]
    base = make_grid(2 * t, w)
    vid = base.vid
    cols = sorted({c for iv in ivs for c in iv})
    require_input(all(1 <= c <= w for c in cols), f"interval endpoints must lie in [1, {w}]")
    require_input(len(cols) == 2 * len(ivs), "intervals must have distinct endpoints")
    mid = {c: base.graph.n + q for q, c in enumerate(cols)}
    gone = {norm_edge(vid[(t, c)], vid[(t + 1, c)]) for c in cols}
    edges = [e for e in base.graph.edges if e not in gone]
    for c, m in mid.items():
        edges += [(vid[(t, c)], m), (m, vid[(t + 1, c)])]
    labels = dict(base.graph.labels) | {m: f"m,{c}" for c, m in mid.items()}
    mg = Graph(base.graph.n + len(mid), edges, labels)
    vertical = []
    for c, p in enumerate(base.vertical, 1):
        vs = list(p.vertices)
        if c in mid:
            vs.insert(t, mid[c])
        vertical.append(Path(vs))
    coords: Dict[int, Hashable] = dict(base.coords) | {m: ("m", c) for c, m in mid.items()}
    mesh = LabeledMesh(mg, tuple(vertical), base.horizontal, "mesh", coords)
    jumps = Linkage(Path([mid[a], mid[b]]) for a, b in ivs)
    g = mg.with_edges(p.ends for p in jumps)
    return g, mesh, jumps


# extended surface walls


def plant_vortex_crosses(
    mesh: LabeledMesh, t: int = 5, rails: Optional[Sequence[int]] = None
) -> Tuple[Graph, List[Tuple[Path, Path]]]:
    """A cross on the innermost nest cycle of every vortex segment.

    `rails` are the 1-based rails (a, b, c, d), by default t+2..t+5, the
    first rails past those the K_t routing climbs; L joins the ends of a
    and c and R those of b and d, each through one new vertex.
    """
    require_input(mesh.meta is not None, "mesh carries no surface-wall bookkeeping")
    rails = tuple(range(t + 2, t + 6)) if rails is None else tuple(rails)
    require_input(len(rails) == 4 and list(rails) == sorted(set(rails)), "need four increasing rail indices")
    nxt = mesh.graph.n
    edges: List[Edge] = []
    crosses = []
    for seg in mesh.meta.vortex_segments():
        require_input(rails[-1] <= len(seg.rails), f"segment has only {len(seg.rails)} rails")
        ends = [seg.rails[r - 1].vertices[-1] for r in rails]
        lp = Path([ends[0], nxt, ends[2]])
        rp = Path([ends[1], nxt + 1, ends[3]])
        edges += [(ends[0], nxt), (nxt, ends[2]), (ends[1], nxt + 1), (nxt + 1, ends[3])]
        crosses.append((lp, rp))
        nxt += 2
    return mesh.graph.with_edges(edges, nxt - mesh.graph.n), crosses


def _read_cross(g: Graph, seg, pair: Tuple[Path, Path], n_wall: int) -> Tuple[int, int, int, int, Path, Path]:
    tips = {r.vertices[-1]: tau for tau, r in enumerate(seg.rails, 1)}
    ends = []
    for p in pair:
        c = check_path(g, p)
        if not c:
            raise InputError(f"cross path is not a path of G: {c.reason}")
        if any(v < n_wall for v in p.inner):
            raise InputError("cross path runs through the wall")
        u, v = p.ends
        if u not in tips or v not in tips:
            raise InputError("cross path does not end on rail endpoints")
        ends.append(sorted((tips[u], tips[v])))
    a, b, c_, d = sorted(ends[0] + ends[1])
    if len({a, b, c_, d}) != 4:
        raise InputError("cross paths share a rail")
    if ends[0] == [a, c_] and ends[1] == [b, d]:
        return a, b, c_, d, pair[0], pair[1]
    if ends[1] == [a, c_] and ends[0] == [b, d]:
        return a, b, c_, d, pair[1], pair[0]
    raise InputError("paths do not form a cross on the nest")


def kt_in_extended_wall(g: Graph, mesh: LabeledMesh, crosses: Sequence[Tuple[Path, Path]], t: int) -> MinorModel:
    """A K_t model controlled by the base wall, routed through the crossed vortices.

    The wall segment keeps only its outer columns; between consecutive
    vortices the 2t rows run along base cycles 1..t and t+3..2t+2. At a
    vortex, top row j climbs the nest at rail j+1, crosses the seam of nest
    cycle j and comes back down at rail 4n-1-j. The columns of the
    crossed grid are rails 1, 4n-1 and 4n of every vortex, and the cross
    joins the four rail stubs hanging into the vortex.
    """
    require_input(t >= 5, f"need t >= 5, got {t}")
    meta = mesh.meta
    require_input(meta is not None and mesh.kind == "extended", "need an extended surface wall")
    n = len(meta.base_cycles)
    c = (t - 3) * (t - 4) // 2
    require_input(n >= 2 * t + 2, f"wall order {n} is below {2 * t + 2}")
    kinds = [s.kind for s in meta.segments]
    require_input(kinds.count("vortex") == c, f"need {c} vortex segments, found {kinds.count('vortex')}")
    require_input(len(crosses) == c, f"{len(crosses)} crosses given for {c} vortex segments")
    require_input(all(e in g.edges for e in mesh.graph.edges), "G does not contain the wall")
    check_linkage(g, Linkage(p for pair in crosses for p in pair)).require()
    ell = len(kinds)
    w0 = kinds.index("wall")
    order = [(w0 + q) % ell for q in range(ell)]
    vortices = [s for s in order if kinds[s] == "vortex"]
    vid = mesh.vid
    top_l = lambda j: j + 1  # noqa: E731
    top_r = lambda j: 4 * n - 1 - j  # noqa: E731

    def B(s: int, r: int, tau: int) -> Set[int]:
        return {vid[("b", s, r, 2 * tau - 1)], vid[("b", s, r, 2 * tau)]}

    def V(s: int, r: int, tau: int) -> Set[int]:
        return {vid[("v", s, r, 2 * tau - 1)], vid[("v", s, r, 2 * tau)]}

    def beta(j: int) -> int:
        return j if j <= t else j + 2

    seq = [(s, tau) for s in order for tau in range(1, 4 * n + 1)] + [(order[0], 1)]
    index = {st: q for q, st in enumerate(seq[:-1])}
    pos = [index[(w0, 4 * n)]]
    for alpha, s in enumerate(vortices, 1):
        pos += [index[(s, 1)], index[(s, 4 * n - 1)]]
        pos.append(index[(s, 4 * n)] if alpha < c else len(seq) - 1)
    if len(pos) != 3 * (t - 3) * (t - 4) // 2 + 1:
        raise ContractError(f"collected {len(pos)} vertical paths")
    cg, mu0 = kt_from_crossed_grid(t)
    eta: Dict[Coord, Set[int]] = {xy: set() for xy in cg.vid}
    for i, q in enumerate(pos, 1):
        s, tau = seq[q]
        nxt = pos[i] if i < len(pos) else q + 1
        for j in range(1, 2 * t + 1):
            eta[(i, j)] |= B(s, beta(j), tau)
            if not (i % 3 == 2 and j <= t):
                for q2 in range(q + 1, nxt):
                    eta[(i, j)] |= B(*_at(seq[q2], beta(j)))
        for r in range(beta(2 * t) + 1, n + 1):
            eta[(i, 2 * t)] |= B(s, r, tau)
        if i % 3 == 1:
            eta[(i, t)] |= B(s, t + 1, tau) | B(s, t + 2, tau)

    for alpha, s in enumerate(vortices, 1):
        x = 3 * alpha - 1
        seg = meta.segments[s]
        a, b, c_, d, lp, rp = _read_cross(g, seg, crosses[alpha - 1], mesh.graph.n)
        require_input(top_l(t) < a and d < top_r(t), f"cross rails must lie strictly between rails {top_l(t)} and {top_r(t)}")
        for j in range(1, t + 1):
            lj, rj = top_l(j), top_r(j)
            arch: Set[int] = set()
            for tau in range(2, lj + 1):
                arch |= B(s, j, tau)
            for r in range(1, j):
                arch |= B(s, r, lj) | V(s, r, rj) | B(s, r, rj)
            for r in range(1, j + 1):
                arch |= V(s, r, lj)
            for tau in [*range(1, lj), *range(rj, 4 * n + 1)]:
                arch |= V(s, j, tau)
            arch |= B(s, j, rj)
            for tau in range(rj + 1, 4 * n - 1):
                arch |= B(s, j, tau)
            eta[(x, j)] |= arch

        def stub(tau: int, depth: int) -> Set[int]:
            out: Set[int] = set()
            for r in range(1, depth + 1):
                out |= B(s, r, tau)
            for r in range(1, n + 1):
                out |= V(s, r, tau)
            return out

        for tau in range(1, a + 1):
            eta[(x, t)] |= B(s, t + 1, tau)
        for tau in range(d, 4 * n):
            eta[(x + 1, t)] |= B(s, t + 1, tau)
        for tau in range(1, b + 1):
            eta[(x, t + 1)] |= B(s, t + 2, tau)
        for tau in range(c_, 4 * n):
            eta[(x + 1, t + 1)] |= B(s, t + 2, tau)
        eta[(x, t)] |= stub(a, t + 1) | set(lp.inner)
        eta[(x + 1, t)] |= stub(d, t + 1)
        eta[(x, t + 1)] |= stub(b, t + 2) | set(rp.inner)
        eta[(x + 1, t + 1)] |= stub(c_, t + 2)

    cvid = cg.vid
    outer = MinorModel(cg.graph, {cvid[xy]: frozenset(vs) for xy, vs in eta.items()}, "extended-wall")
    verify_model(g, cg.graph, outer).require()
    mu = lift_model(outer, mu0)
    mu.origin = "extended-wall"
    verify_model(g, mu.h, mu).require()
    verify_controlled(g, mesh_from_surface_wall(mesh), mu, t).require()
    return mu


def _at(st: Tuple[int, int], row: int) -> Tuple[int, int, int]:
    s, tau = st
    return s, row, tau
