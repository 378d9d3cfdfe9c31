from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx

from veriwall.errors import PASS, Check, InputError, fail

log = logging.getLogger(__name__)

Edge = Tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Finite simple graph over dense integer ids 0..n-1.

    Adjacency is kept as sorted neighbor tuples; instances are treated as
    immutable once built.
    """

    __slots__ = ("n", "_adj", "_edges", "labels")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = (), labels: Optional[Dict[int, str]] = None) -> None:
        if n < 0:
            raise InputError("vertex count must be non-negative")
        es: Set[Edge] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InputError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge {u}-{v} out of range for n={n}")
            es.add(norm_edge(u, v))
        nbrs: List[List[int]] = [[] for _ in range(n)]
        for u, v in es:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.n = n
        self._adj: Tuple[Tuple[int, ...], ...] = tuple(tuple(sorted(a)) for a in nbrs)
        self._edges: FrozenSet[Edge] = frozenset(es)
        self.labels: Dict[int, str] = dict(labels or {})

    # basic queries

    @property
    def vertex_count(self) -> int:
        return self.n

    @property
    def edges(self) -> FrozenSet[Edge]:
        return self._edges

    def edge_list(self) -> List[Edge]:
        return sorted(self._edges)

    def vertices(self) -> range:
        return range(self.n)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def max_degree(self) -> int:
        return max((len(a) for a in self._adj), default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return norm_edge(u, v) in self._edges

    def check_vertices(self, vs: Iterable[int]) -> None:
        for v in vs:
            if not (isinstance(v, int) and 0 <= v < self.n):
                raise InputError(f"invalid vertex id {v!r} for n={self.n}")

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self._edges == other._edges and self.labels == other.labels

    def __hash__(self) -> int:
        return hash((self.n, self._edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={len(self._edges)})"

    # derived graphs

    def with_edges(self, extra: Iterable[Sequence[int]], extra_vertices: int = 0) -> "Graph":
        return Graph(self.n + extra_vertices, itertools.chain(self._edges, extra), self.labels)

    def without_edges(self, drop: Iterable[Sequence[int]]) -> "Graph":
        gone = {norm_edge(e[0], e[1]) for e in drop}
        return Graph(self.n, (e for e in self._edges if e not in gone), self.labels)

    def components(self, within: Optional[Iterable[int]] = None) -> List[List[int]]:
        allowed = set(self.vertices()) if within is None else set(within)
        seen: Set[int] = set()
        out: List[List[int]] = []
        for s in sorted(allowed):
            if s in seen:
                continue
            comp = bfs_reach(self, [s], allowed)
            seen |= comp
            out.append(sorted(comp))
        return out

    def is_connected_set(self, vs: Iterable[int]) -> bool:
        vs = set(vs)
        if not vs:
            return False
        return bfs_reach(self, [min(vs)], vs) == vs

    def bridges_of(self, h: Iterable[int], h_edges: Iterable[Sequence[int]] = ()) -> List[Tuple[Set[int], Set[int]]]:
        """H-bridges as (vertex set, attachments).

        A bridge is either an edge not in H with both ends in H, or a
        component of G - V(H) together with its attachments in V(H).
        """
        hv = set(h)
        he = {norm_edge(e[0], e[1]) for e in h_edges}
        out: List[Tuple[Set[int], Set[int]]] = []
        for u, v in self.edge_list():
            if u in hv and v in hv and (u, v) not in he:
                out.append(({u, v}, {u, v}))
        rest = [v for v in self.vertices() if v not in hv]
        for comp in self.components(rest):
            att = {w for v in comp for w in self._adj[v] if w in hv}
            out.append((set(comp) | att, att))
        return out

    def subgraph(self, vertices: Iterable[int], edges: Iterable[Sequence[int]]) -> Tuple["Graph", List[int]]:
        """Compact copy of (vertices, edges); returns it with the new-to-old id list."""
        back = sorted(set(vertices))
        idx = {v: i for i, v in enumerate(back)}
        es = []
        for e in edges:
            u, v = e[0], e[1]
            if u not in idx or v not in idx:
                raise InputError(f"edge {u}-{v} leaves the chosen vertex set")
            if not self.has_edge(u, v):
                raise InputError(f"{u}-{v} is not an edge")
            es.append((idx[u], idx[v]))
        labels = {idx[v]: lab for v, lab in self.labels.items() if v in idx}
        return Graph(len(back), es, labels), back

    def induced(self, vertices: Iterable[int]) -> Tuple["Graph", List[int]]:
        vs = set(vertices)
        return self.subgraph(vs, (e for e in self._edges if e[0] in vs and e[1] in vs))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self._edges)
        for v, lab in self.labels.items():
            g.nodes[v]["label"] = lab
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        order = sorted(g.nodes)
        idx = {v: i for i, v in enumerate(order)}
        return cls(len(order), ((idx[u], idx[v]) for u, v in g.edges))


def bfs_reach(g: Graph, sources: Iterable[int], allowed: Optional[Set[int]] = None) -> Set[int]:
    seen = {s for s in sources if allowed is None or s in allowed}
    queue = deque(sorted(seen))
    while queue:
        v = queue.popleft()
        for w in g.neighbors(v):
            if w not in seen and (allowed is None or w in allowed):
                seen.add(w)
                queue.append(w)
    return seen


def shortest_path(g: Graph, sources: Iterable[int], targets: Iterable[int], allowed: Optional[Set[int]] = None) -> Optional[List[int]]:
    """BFS path from a source to a target inside `allowed`, smallest ids first."""
    tgt = set(targets)
    parent: Dict[int, int] = {}
    queue: deque[int] = deque()
    for s in sorted(set(sources)):
        if allowed is not None and s not in allowed:
            continue
        parent[s] = -1
        queue.append(s)
    while queue:
        v = queue.popleft()
        if v in tgt:
            out = [v]
            while parent[out[-1]] != -1:
                out.append(parent[out[-1]])
            return out[::-1]
        for w in g.neighbors(v):
            if w not in parent and (allowed is None or w in allowed):
                parent[w] = v
                queue.append(w)
    return None


def subdivide(g: Graph, k: int) -> Tuple[Graph, Dict[Edge, List[int]]]:
    """Replace every edge by a path with k new internal vertices.

    Returns the new graph and, per original edge (u<v), the inserted vertices
    in order from u to v.
    """
    if k < 0:
        raise InputError("subdivision count must be non-negative")
    if k == 0:
        return g, {e: [] for e in g.edge_list()}
    nxt = g.n
    edges: List[Edge] = []
    inner: Dict[Edge, List[int]] = {}
    for u, v in g.edge_list():
        mids = list(range(nxt, nxt + k))
        nxt += k
        chain = [u, *mids, v]
        edges.extend(zip(chain, chain[1:]))
        inner[(u, v)] = mids
    return Graph(nxt, edges, g.labels), inner


@dataclass(frozen=True)
class Path:
    vertices: Tuple[int, ...]

    def __init__(self, vertices: Iterable[int]) -> None:
        object.__setattr__(self, "vertices", tuple(vertices))

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.vertices)

    @property
    def ends(self) -> Tuple[int, int]:
        return self.vertices[0], self.vertices[-1]

    @property
    def vset(self) -> FrozenSet[int]:
        return frozenset(self.vertices)

    @property
    def inner(self) -> Tuple[int, ...]:
        return self.vertices[1:-1]

    def reversed(self) -> "Path":
        return Path(self.vertices[::-1])

    def index(self, v: int) -> int:
        return self.vertices.index(v)

    def sub(self, u: int, v: int) -> "Path":
        """The subpath uPv, oriented from u to v."""
        i, j = self.vertices.index(u), self.vertices.index(v)
        if i <= j:
            return Path(self.vertices[i : j + 1])
        return Path(self.vertices[j : i + 1][::-1])


def check_path(g: Graph, p: Path) -> Check:
    vs = p.vertices
    if not vs:
        return fail("empty path")
    if len(set(vs)) != len(vs):
        return fail(f"path repeats a vertex: {list(vs)}")
    for v in vs:
        if not 0 <= v < g.n:
            return fail(f"path vertex {v} not in graph")
    for u, v in zip(vs, vs[1:]):
        if not g.has_edge(u, v):
            return fail(f"path step {u}-{v} is not an edge")
    return PASS


@dataclass(frozen=True)
class Linkage:
    paths: Tuple[Path, ...] = ()

    def __init__(self, paths: Iterable[Path | Sequence[int]] = ()) -> None:
        object.__setattr__(self, "paths", tuple(p if isinstance(p, Path) else Path(p) for p in paths))

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self) -> Iterator[Path]:
        return iter(self.paths)

    @property
    def order(self) -> int:
        return len(self.paths)

    @property
    def vset(self) -> FrozenSet[int]:
        return frozenset(v for p in self.paths for v in p)


def check_linkage(g: Graph, lk: Linkage) -> Check:
    seen: Set[int] = set()
    for p in lk:
        c = check_path(g, p)
        if not c:
            return c
        if seen & p.vset:
            return fail(f"paths share vertices {sorted(seen & p.vset)}")
        seen |= p.vset
    return PASS


def check_xy_linkage(g: Graph, lk: Linkage, x: Set[int], y: Set[int]) -> Check:
    c = check_linkage(g, lk)
    if not c:
        return c
    for p in lk:
        a, b = p.ends
        if a not in x or b not in y:
            return fail(f"path {list(p)} does not run from X to Y")
        if any(v in x for v in p.vertices[1:]) or any(v in y for v in p.vertices[:-1]):
            return fail(f"path {list(p)} meets X or Y internally")
    return PASS


@dataclass(frozen=True)
class Separation:
    a: FrozenSet[int]
    b: FrozenSet[int]
    certificate: Optional[Linkage] = field(default=None, compare=False)

    @property
    def order(self) -> int:
        return len(self.a & self.b)

    @property
    def separator(self) -> FrozenSet[int]:
        return self.a & self.b


def check_separation(g: Graph, s: Separation) -> Check:
    if s.a | s.b != frozenset(g.vertices()):
        return fail("sides do not cover V(G)")
    only_a, only_b = s.a - s.b, s.b - s.a
    for u, v in g.edges:
        if (u in only_a and v in only_b) or (u in only_b and v in only_a):
            return fail(f"edge {u}-{v} crosses the separation")
    return PASS


@dataclass(frozen=True)
class NoSeparator:
    """Explicit result of a bounded search that found nothing."""

    bound: int


# Menger kernel: unit vertex capacities by splitting v into v_in=2v, v_out=2v+1.

_INF = 1 << 30


class _FlowNet:
    def __init__(self, size: int) -> None:
        self.head: List[List[int]] = [[] for _ in range(size)]
        self.to: List[int] = []
        self.cap: List[int] = []

    def add(self, u: int, v: int, c: int) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)

    def augment(self, s: int, t: int) -> bool:
        prev = [-1] * len(self.head)
        prev[s] = -2
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.head[u]:
                w = self.to[e]
                if self.cap[e] > 0 and prev[w] == -1:
                    prev[w] = e
                    if w == t:
                        queue.clear()
                        break
                    queue.append(w)
        if prev[t] == -1:
            return False
        w = t
        while w != s:
            e = prev[w]
            self.cap[e] -= 1
            self.cap[e ^ 1] += 1
            w = self.to[e ^ 1]
        return True

    def reachable(self, s: int) -> Set[int]:
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.head[u]:
                w = self.to[e]
                if self.cap[e] > 0 and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return seen


def _trim(walk: List[int], x: Set[int], y: Set[int]) -> List[int]:
    start = max(i for i, v in enumerate(walk) if v in x)
    walk = walk[start:]
    end = min(i for i, v in enumerate(walk) if v in y)
    return walk[: end + 1]


def max_linkage_or_separation(
    g: Graph, x: Iterable[int], y: Iterable[int], k: int, avoid: Iterable[int] = ()
) -> Linkage | Separation:
    """An X-Y linkage of order k, or an X-Y separation of order < k.

    Max flow with unit vertex capacities and BFS augmenting paths; the
    separation carries a maximum linkage as certificate. Vertices in `avoid`
    are treated as deleted, so a separation is then one of G - avoid.
    """
    blocked = set(avoid)
    xs, ys = set(x) - blocked, set(y) - blocked
    g.check_vertices(xs | ys)
    if k < 0:
        raise InputError("k must be non-negative")
    if k == 0:
        return Linkage()
    n = g.n
    s, t = 2 * n, 2 * n + 1
    net = _FlowNet(2 * n + 2)
    for v in range(n):
        net.add(2 * v, 2 * v + 1, 0 if v in blocked else 1)
    for u in range(n):
        for w in g.neighbors(u):
            net.add(2 * u + 1, 2 * w, _INF)
    for v in sorted(xs):
        net.add(s, 2 * v, _INF)
    for v in sorted(ys):
        net.add(2 * v + 1, t, _INF)
    flow = 0
    while flow < k and net.augment(s, t):
        flow += 1
    paths = _decompose(net, n, s, t, xs, ys)
    lk = Linkage(paths)
    if flow >= k:
        log.debug("menger: linkage of order %d", k)
        return lk
    reach = net.reachable(s)
    cut = {v for v in range(n) if 2 * v in reach and 2 * v + 1 not in reach and v not in blocked}
    inside = {v for v in range(n) if 2 * v + 1 in reach}
    a = frozenset(inside | cut)
    b = frozenset(set(range(n)) - inside)
    log.debug("menger: separation of order %d < %d", len(cut), k)
    return Separation(a, b, lk)


def _decompose(net: _FlowNet, n: int, s: int, t: int, xs: Set[int], ys: Set[int]) -> List[List[int]]:
    # net flow on a forward arc = capacity on its reverse twin (forward arcs are even ids)
    used: Set[int] = set()
    out: List[List[int]] = []
    for e in net.head[s]:
        if e % 2 or net.cap[e ^ 1] <= 0:
            continue
        walk: List[int] = []
        node = net.to[e]
        while node != t:
            if node % 2 == 0:
                walk.append(node // 2)
            nxt = None
            for f in net.head[node]:
                if f % 2 == 0 and f not in used and net.cap[f ^ 1] > 0:
                    nxt = f
                    break
            if nxt is None:
                break
            used.add(nxt)
            node = net.to[nxt]
        if node == t and walk:
            out.append(_trim(walk, xs, ys))
    return out


def brute_force_min_separator(g: Graph, x: Iterable[int], y: Iterable[int], bound: int) -> Separation | NoSeparator:
    """Minimum-order X-Y separation by subset enumeration, up to `bound`."""
    if bound > 8:
        raise InputError("brute-force separator bound must be at most 8")
    xs, ys = set(x), set(y)
    g.check_vertices(xs | ys)
    forced = xs & ys
    pool = [v for v in g.vertices() if v not in forced]
    for size in range(len(forced), bound + 1):
        for extra in itertools.combinations(pool, size - len(forced)):
            z = forced | set(extra)
            allowed = set(g.vertices()) - z
            reach = bfs_reach(g, xs - z, allowed)
            if reach & (ys - z):
                continue
            a = frozenset(reach | z)
            b = frozenset(set(g.vertices()) - reach)
            return Separation(a, b)
    return NoSeparator(bound)
