from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Literal, Optional, Sequence, Set, Tuple

from veriwall.errors import PASS, Check, ContractError, fail, require_input
from veriwall.graph import Graph, Path, Separation, check_path, subdivide

log = logging.getLogger(__name__)

MeshKind = Literal["grid", "wall", "mesh", "annulus", "surface-wall", "extended"]
SegmentKind = Literal["wall", "handle", "crosscap", "vortex"]
SEGMENT_KINDS = ("wall", "handle", "crosscap", "vortex")


@dataclass
class LabeledMesh:
    """A graph with a fixed choice of vertical paths P_1..P_w and horizontal paths Q_1..Q_h."""

    graph: Graph
    vertical: Tuple[Path, ...]
    horizontal: Tuple[Path, ...]
    kind: MeshKind = "mesh"
    coords: Dict[int, Hashable] = field(default_factory=dict)
    meta: Optional["SurfaceWallMeta"] = None

    @property
    def w(self) -> int:
        return len(self.vertical)

    @property
    def h(self) -> int:
        return len(self.horizontal)

    @property
    def vid(self) -> Dict[Hashable, int]:
        return {c: v for v, c in self.coords.items()}

    def paths(self) -> List[Path]:
        return [*self.vertical, *self.horizontal]

    def vertex_set(self) -> Set[int]:
        return {v for p in self.paths() for v in p}


@dataclass
class SegmentMeta:
    kind: str
    left: List[int]
    right: List[int]
    top: List[int]
    nest: List[List[int]] = field(default_factory=list)
    rails: List[Path] = field(default_factory=list)
    added_edges: List[Tuple[int, int]] = field(default_factory=list)


@dataclass
class SurfaceWallMeta:
    """Bookkeeping of a (extended) surface wall.

    base_cycles[0] is C_1 (the row carrying the top boundaries) and
    base_cycles[-1] is C_n, the simple cycle. Nest cycles of a vortex are
    listed innermost first.
    """

    signature: Tuple[int, int, int]
    segments: List[SegmentMeta]
    base_cycles: List[List[int]]

    @property
    def simple_cycle(self) -> List[int]:
        return self.base_cycles[-1]

    @property
    def euler_genus(self) -> int:
        return euler_genus(self.signature[0], self.signature[1])

    def vortex_segments(self) -> List[SegmentMeta]:
        return [s for s in self.segments if s.kind == "vortex"]


def euler_genus(handles: int, crosscaps: int) -> int:
    return 2 * handles + crosscaps


class _Builder:
    """Collects coordinate-keyed vertices and edges, then numbers them in key order."""

    def __init__(self) -> None:
        self.keys: Set[Hashable] = set()
        self.edges: Set[Tuple[Hashable, Hashable]] = set()

    def vertex(self, k: Hashable) -> None:
        self.keys.add(k)

    def edge(self, a: Hashable, b: Hashable) -> None:
        self.keys.add(a)
        self.keys.add(b)
        self.edges.add((a, b))

    def drop(self, k: Hashable) -> None:
        self.keys.discard(k)
        self.edges = {e for e in self.edges if k not in e}

    def degree(self) -> Dict[Hashable, int]:
        deg = {k: 0 for k in self.keys}
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def build(self) -> Tuple[Graph, Dict[Hashable, int]]:
        order = sorted(self.keys, key=_key_order)
        vid = {k: i for i, k in enumerate(order)}
        labels = {i: ",".join(str(x) for x in (k if isinstance(k, tuple) else (k,))) for k, i in vid.items()}
        g = Graph(len(order), ((vid[a], vid[b]) for a, b in self.edges), labels)
        return g, vid


def _key_order(k: Hashable):
    return tuple(str(x) if isinstance(x, str) else x for x in (k if isinstance(k, tuple) else (k,)))


def _brick(b: _Builder, key, n: int, cols: int, wrap: bool = False) -> None:
    """Rows 1..n of a (n x cols)-grid keeping vertical edges with i == j mod 2."""
    for i in range(1, n + 1):
        for j in range(1, cols + 1):
            b.vertex(key(i, j))
            if j < cols:
                b.edge(key(i, j), key(i, j + 1))
            if i < n and (i - j) % 2 == 0:
                b.edge(key(i, j), key(i + 1, j))
        if wrap:
            b.edge(key(i, cols), key(i, 1))


def _zigzag(key, n: int, k: int, alive: Set[Hashable]) -> List[Hashable]:
    """Vertical path k of a brick pattern, through columns 2k-1 and 2k, top to bottom."""
    a, c = 2 * k - 1, 2 * k
    col = a
    out = [key(1, col)]
    for i in range(1, n):
        want = a if (i - a) % 2 == 0 else c
        if col != want:
            col = want
            out.append(key(i, col))
        out.append(key(i + 1, col))
    return [v for v in out if v in alive]


def _trim_row(row: List[int], first: Set[int], last: Set[int]) -> List[int]:
    lo = min(i for i, v in enumerate(row) if v in first)
    hi = max(i for i, v in enumerate(row) if v in last)
    return row[lo : hi + 1]


def make_grid(n: int, m: int) -> LabeledMesh:
    """The (n x m)-grid: rows are the horizontal paths, columns the vertical ones."""
    require_input(n >= 1 and m >= 1, f"grid needs n, m >= 1, got {n}x{m}")
    b = _Builder()
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            b.vertex((i, j))
            if j < m:
                b.edge((i, j), (i, j + 1))
            if i < n:
                b.edge((i, j), (i + 1, j))
    g, vid = b.build()
    horizontal = tuple(Path(vid[(i, j)] for j in range(1, m + 1)) for i in range(1, n + 1))
    vertical = tuple(Path(vid[(i, j)] for i in range(1, n + 1)) for j in range(1, m + 1))
    return LabeledMesh(g, vertical, horizontal, "grid", {v: k for k, v in vid.items()})


def make_wall(n: int, m: int) -> LabeledMesh:
    """The elementary (n x m)-wall derived from the (n x 2m)-grid."""
    require_input(n >= 2 and m >= 1, f"wall needs n >= 2 and m >= 1, got {n}x{m}")
    b = _Builder()
    _brick(b, lambda i, j: (i, j), n, 2 * m)
    while True:
        low = [k for k, d in b.degree().items() if d <= 1]
        if not low:
            break
        for k in low:
            b.drop(k)
    g, vid = b.build()
    return _brick_mesh(g, vid, lambda i, j: (i, j), n, m, "wall")


def _brick_mesh(g: Graph, vid: Dict[Hashable, int], key, n: int, m: int, kind: MeshKind) -> LabeledMesh:
    alive = set(vid)
    vertical = [Path(vid[k] for k in _zigzag(key, n, k, alive)) for k in range(1, m + 1)]
    first, last = vertical[0].vset, vertical[-1].vset
    horizontal = []
    for i in range(1, n + 1):
        row = [vid[key(i, j)] for j in range(1, 2 * m + 1) if key(i, j) in vid]
        horizontal.append(Path(_trim_row(row, first, last)))
    return LabeledMesh(g, tuple(vertical), tuple(horizontal), kind, {v: k for k, v in vid.items()})


def make_annulus_wall(n: int, m: int) -> LabeledMesh:
    """The (n x m)-annulus wall; its rows are the base cycles, listed in meta order."""
    require_input(n >= 2 and m >= 2, f"annulus wall needs n, m >= 2, got {n}x{m}")
    b = _Builder()
    _brick(b, lambda i, j: (i, j), n, 2 * m, wrap=True)
    g, vid = b.build()
    mesh = _brick_mesh(g, vid, lambda i, j: (i, j), n, m, "annulus")
    cycles = [[vid[(i, j)] for j in range(1, 2 * m + 1)] for i in range(1, n + 1)]
    mesh.meta = SurfaceWallMeta((0, 0, 0), [], cycles)
    return mesh


def make_annulus_grid(n: int, m: int) -> LabeledMesh:
    """n concentric m-cycles joined by m radial columns; row 1 is the innermost."""
    require_input(n >= 2 and m >= 3, f"annulus grid needs n >= 2 and m >= 3, got {n}x{m}")
    b = _Builder()
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            b.edge((i, j), (i, j % m + 1))
            if i < n:
                b.edge((i, j), (i + 1, j))
    g, vid = b.build()
    cycles = [[vid[(i, j)] for j in range(1, m + 1)] for i in range(1, n + 1)]
    horizontal = tuple(Path(c) for c in cycles)
    vertical = tuple(Path(vid[(i, j)] for i in range(1, n + 1)) for j in range(1, m + 1))
    return LabeledMesh(g, vertical, horizontal, "annulus", {v: k for k, v in vid.items()}, SurfaceWallMeta((0, 0, 0), [], cycles))


def mesh_from_surface_wall(mesh: LabeledMesh) -> LabeledMesh:
    """The base wall of a surface, extended or annulus wall as a plain mesh."""
    require_input(mesh.meta is not None, f"{mesh.kind} mesh carries no surface-wall metadata")
    return LabeledMesh(mesh.graph, mesh.vertical, mesh.horizontal, "mesh", dict(mesh.coords))


# segments

def _segment(b: _Builder, kind: str, s: int, n: int) -> Dict[str, object]:
    """Adds segment s to the builder; returns key lists for its metadata."""
    cols = 8 * n
    base = lambda i, j: ("b", s, i, j)  # noqa: E731
    _brick(b, base, n, cols)
    top = [base(1, 2 * t) for t in range(1, 4 * n + 1)]
    added: List[Tuple[Hashable, Hashable]] = []
    if kind == "handle":
        added += [(base(1, 2 * i), base(1, 6 * n + 2 - 2 * i)) for i in range(1, n + 1)]
        # the displayed second index set collides with the first; block 2 pairs with block 4
        added += [(base(1, 2 * i), base(1, 10 * n + 2 - 2 * i)) for i in range(n + 1, 2 * n + 1)]
    elif kind == "crosscap":
        added += [(base(1, 2 * i), base(1, 4 * n + 2 * i)) for i in range(1, 2 * n + 1)]
    nest: List[List[Hashable]] = []
    rails: List[List[Hashable]] = []
    if kind == "vortex":
        inner = lambda i, j: ("v", s, i, j)  # noqa: E731
        _brick(b, inner, n, cols, wrap=True)
        added += [(base(1, 2 * t), inner(1, 2 * t)) for t in range(1, 4 * n + 1)]
        nest = [[inner(i, j) for j in range(1, cols + 1)] for i in range(n, 0, -1)]
        everything = set(b.keys)
        for t in range(1, 4 * n + 1):
            up = _zigzag(base, n, t, everything)[::-1]
            down = _zigzag(inner, n, t, everything)
            rails.append([*up, base(1, 2 * t), inner(1, 2 * t), *down])
    for a, c in added:
        b.edge(a, c)
    return {
        "left": [base(i, 1) for i in range(1, n + 1)],
        "right": [base(i, cols) for i in range(1, n + 1)],
        "top": top,
        "added": added,
        "nest": nest,
        "rails": rails,
    }


def _segment_meta(kind: str, raw: Dict[str, object], vid: Dict[Hashable, int]) -> SegmentMeta:
    ids = lambda ks: [vid[k] for k in ks]  # noqa: E731
    return SegmentMeta(
        kind=kind,
        left=ids(raw["left"]),
        right=ids(raw["right"]),
        top=ids(raw["top"]),
        nest=[ids(c) for c in raw["nest"]],
        rails=[Path(ids(r)) for r in raw["rails"]],
        added_edges=[(vid[a], vid[c]) for a, c in raw["added"]],
    )


def make_segment(kind: str, n: int) -> Tuple[Graph, SegmentMeta]:
    require_input(kind in SEGMENT_KINDS, f"unknown segment kind {kind!r}")
    require_input(n >= 2, f"segments need n >= 2, got {n}")
    b = _Builder()
    raw = _segment(b, kind, 0, n)
    g, vid = b.build()
    return g, _segment_meta(kind, raw, vid)


def make_extended_surface_wall(
    n: int, h: int = 0, c: int = 0, b: int = 0, segment_order: Optional[Sequence[str]] = None
) -> LabeledMesh:
    """Cylindrical closure of one wall segment, h handles, c crosscaps and b vortices.

    The wall segment sits at position 1 unless `segment_order` lists the
    kinds explicitly.
    """
    require_input(n >= 2, f"surface walls need n >= 2, got {n}")
    require_input(min(h, c, b) >= 0, "segment counts must be non-negative")
    kinds = list(segment_order) if segment_order is not None else ["wall"] + ["handle"] * h + ["crosscap"] * c + ["vortex"] * b
    require_input(all(k in SEGMENT_KINDS for k in kinds), f"unknown segment kind in {kinds}")
    require_input(kinds.count("wall") == 1, "exactly one wall segment is required")
    require_input(
        (kinds.count("handle"), kinds.count("crosscap"), kinds.count("vortex")) == (h, c, b),
        "segment_order does not match the signature",
    )
    bld = _Builder()
    raws = [_segment(bld, kind, s, n) for s, kind in enumerate(kinds)]
    ell = len(kinds)
    for s in range(ell):
        for i in range(1, n + 1):
            bld.edge(("b", s, i, 8 * n), ("b", (s + 1) % ell, i, 1))
    g, vid = bld.build()
    segs = [_segment_meta(kind, raw, vid) for kind, raw in zip(kinds, raws)]
    key = lambda i, j: ("b", (j - 1) // (8 * n), i, (j - 1) % (8 * n) + 1)  # noqa: E731
    mesh = _brick_mesh(g, vid, key, n, 4 * n * ell, "surface-wall" if b == 0 else "extended")
    cycles = [[vid[key(i, j)] for j in range(1, 8 * n * ell + 1)] for i in range(1, n + 1)]
    mesh.meta = SurfaceWallMeta((h, c, b), segs, cycles)
    log.debug("surface wall n=%d signature=%s: %r", n, (h, c, b), g)
    return mesh


def make_dyck_wall(n: int, handles: int = 0, crosscaps: int = 0) -> LabeledMesh:
    return make_extended_surface_wall(n, handles, crosscaps, 0)


def subdivide_mesh(mesh: LabeledMesh, k: int) -> LabeledMesh:
    """Uniform subdivision; every path keeps its route through the new vertices."""
    g, inner = subdivide(mesh.graph, k)

    def lift(p: Path) -> Path:
        out: List[int] = [p.vertices[0]]
        for u, v in zip(p.vertices, p.vertices[1:]):
            mids = inner[(u, v)] if u < v else inner[(v, u)][::-1]
            out.extend(mids)
            out.append(v)
        return Path(out)

    return LabeledMesh(g, tuple(map(lift, mesh.vertical)), tuple(map(lift, mesh.horizontal)), mesh.kind, dict(mesh.coords), mesh.meta)


# validation and queries

def _hits(p: Path, other: Set[int]) -> List[int]:
    return [i for i, v in enumerate(p.vertices) if v in other]


def _check_family_order(fam: Sequence[Path], cross: Sequence[Path], name: str) -> Check:
    sets = [q.vset for q in cross]
    for a, p in enumerate(fam, 1):
        prev = -1
        for b, q in enumerate(cross, 1):
            idx = _hits(p, sets[b - 1])
            if not idx:
                return fail(f"intersection axiom: {name}{a} misses path {b}")
            if idx != list(range(idx[0], idx[-1] + 1)):
                return fail(f"intersection axiom: {name}{a} meets path {b} in a non-path")
            if idx[0] <= prev:
                return fail(f"order axiom: {name}{a} meets the crossing paths out of order at {b}")
            prev = idx[-1]
        if p.vertices[0] not in sets[0] or p.vertices[-1] not in sets[-1]:
            return fail(f"endpoint axiom: {name}{a} does not run from the first to the last crossing path")
    return PASS


def verify_mesh(g: Graph, mesh: LabeledMesh) -> Check:
    if not mesh.vertical or not mesh.horizontal:
        return fail("mesh needs at least one vertical and one horizontal path")
    for p in mesh.paths():
        c = check_path(g, p)
        if not c:
            return fail(f"path axiom: {c.reason}")
    for fam, name in ((mesh.vertical, "P"), (mesh.horizontal, "Q")):
        seen: Set[int] = set()
        for i, p in enumerate(fam, 1):
            if seen & p.vset:
                return fail(f"disjointness axiom: {name}{i} meets an earlier {name} path")
            seen |= p.vset
    c = _check_family_order(mesh.vertical, mesh.horizontal, "P")
    if not c:
        return c
    return _check_family_order(mesh.horizontal, mesh.vertical, "Q")


def perimeter(mesh: LabeledMesh) -> Set[int]:
    return set(mesh.vertical[0]) | set(mesh.vertical[-1]) | set(mesh.horizontal[0]) | set(mesh.horizontal[-1])


def _span(p: Path, first: Set[int], last: Set[int]) -> Path:
    lo = min(_hits(p, first))
    hi = max(_hits(p, last))
    return Path(p.vertices[lo : hi + 1])


def select_submesh(mesh: LabeledMesh, rows: Iterable[int], cols: Iterable[int]) -> LabeledMesh:
    """Any choice of horizontal and vertical paths (1-based), each cut to the outermost chosen crossers."""
    rs, cs = sorted(set(rows)), sorted(set(cols))
    require_input(len(rs) >= 2 and 1 <= rs[0] and rs[-1] <= mesh.h, f"rows {rs[:3]}... invalid for {mesh.h} horizontal paths")
    require_input(len(cs) >= 2 and 1 <= cs[0] and cs[-1] <= mesh.w, f"columns {cs[:3]}... invalid for {mesh.w} vertical paths")
    hs = [mesh.horizontal[r - 1] for r in rs]
    vs = [mesh.vertical[c - 1] for c in cs]
    vertical = tuple(_span(p, hs[0].vset, hs[-1].vset) for p in vs)
    horizontal = tuple(_span(q, vs[0].vset, vs[-1].vset) for q in hs)
    return LabeledMesh(mesh.graph, vertical, horizontal, "mesh", dict(mesh.coords))


def submesh(mesh: LabeledMesh, rows: Tuple[int, int], cols: Tuple[int, int]) -> LabeledMesh:
    """Horizontal paths rows[0]..rows[1] and vertical paths cols[0]..cols[1], 1-based inclusive."""
    r0, r1 = rows
    c0, c1 = cols
    require_input(1 <= r0 < r1 <= mesh.h, f"row range {rows} invalid for {mesh.h} horizontal paths")
    require_input(1 <= c0 < c1 <= mesh.w, f"column range {cols} invalid for {mesh.w} vertical paths")
    return select_submesh(mesh, range(r0, r1 + 1), range(c0, c1 + 1))


def transpose(mesh: LabeledMesh) -> LabeledMesh:
    """The same mesh with the roles of the two path families swapped."""
    return LabeledMesh(mesh.graph, mesh.horizontal, mesh.vertical, mesh.kind, dict(mesh.coords), mesh.meta)


def tangle_orient(mesh: LabeledMesh, s: Separation) -> Literal["a", "b"]:
    """The big side of a small-order separation in the tangle induced by the mesh."""
    require_input(s.order < min(mesh.w, mesh.h), f"separation order {s.order} not below mesh order")

    def big(side: frozenset, other: frozenset) -> bool:
        diff = side - other
        return any(p.vset <= diff for p in mesh.vertical) and any(q.vset <= diff for q in mesh.horizontal)

    in_a, in_b = big(s.a, s.b), big(s.b, s.a)
    if in_a == in_b:
        raise ContractError("separation does not orient uniquely; input is not a mesh of this order")
    return "a" if in_a else "b"
