from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from veriwall.config import DEFAULT_CONSTANTS
from veriwall.errors import CapacityError, ContractError, InputError, require_input
from veriwall.graph import (
    Graph,
    Linkage,
    Path,
    bfs_reach,
    check_linkage,
    max_linkage_or_separation,
    norm_edge,
    shortest_path,
)
from veriwall.mesh import LabeledMesh

log = logging.getLogger(__name__)

Segment = Tuple[int, int]


class Society:
    """A graph with a cyclic ordering of some of its vertices.

    `omega` is stored rotated so that it starts at its smallest vertex id;
    segments are inclusive (start, end) index pairs read clockwise.
    """

    __slots__ = ("graph", "omega", "_pos")

    def __init__(self, graph: Graph, omega: Sequence[int]) -> None:
        om = list(omega)
        graph.check_vertices(om)
        if len(set(om)) != len(om):
            raise InputError("omega repeats a vertex")
        if om:
            k = om.index(min(om))
            om = om[k:] + om[:k]
        self.graph = graph
        self.omega: Tuple[int, ...] = tuple(om)
        self._pos: Dict[int, int] = {v: i for i, v in enumerate(self.omega)}

    def __len__(self) -> int:
        return len(self.omega)

    def __repr__(self) -> str:
        return f"Society({self.graph!r}, |omega|={len(self.omega)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Society) and self.graph == other.graph and self.omega == other.omega

    def __hash__(self) -> int:
        return hash((self.graph, self.omega))

    @property
    def vset(self) -> FrozenSet[int]:
        return frozenset(self.omega)

    def pos(self, v: int) -> int:
        try:
            return self._pos[v]
        except KeyError:
            raise KeyError(f"vertex {v} is not on omega") from None

    def segment(self, seg: Segment) -> List[int]:
        a, b = seg
        n = len(self.omega)
        return [self.omega[(a + i) % n] for i in range((b - a) % n + 1)]

    def offset(self, seg: Segment, v: int) -> int:
        return (self.pos(v) - seg[0]) % len(self.omega)

    def segment_pairs(self) -> Iterator[Tuple[List[int], List[int]]]:
        """Every split of omega into two complementary non-empty segments."""
        n = len(self.omega)
        for i in range(n):
            for j in range(i + 1, n):
                yield self.segment((i, j - 1)), self.segment((j, (i - 1) % n))

    def in_cyclic_order(self, vs: Sequence[int]) -> bool:
        """True if vs appear in omega in the listed cyclic order or its reverse."""
        ps = [self.pos(v) for v in vs]
        if len(ps) <= 2:
            return True

        def clockwise(qs: List[int]) -> bool:
            k = qs.index(min(qs))
            rot = qs[k:] + qs[:k]
            return rot == sorted(rot)

        return clockwise(ps) or clockwise(ps[::-1])


def society_from_mesh(mesh: LabeledMesh) -> Society:
    """The society whose omega is the perimeter cycle of the mesh."""
    q1, qh = mesh.horizontal[0], mesh.horizontal[-1]
    p1, pw = mesh.vertical[0], mesh.vertical[-1]
    walk = list(q1.vertices)
    walk += list(pw.sub(q1.vertices[-1], qh.vertices[-1]).vertices[1:])
    walk += list(qh.vertices[::-1][1:])
    walk += list(p1.sub(qh.vertices[0], q1.vertices[0]).vertices[1:-1])
    if len(set(walk)) != len(walk):
        raise InputError("mesh perimeter is not a cycle")
    return Society(mesh.graph, walk)


# transactions

@dataclass(frozen=True)
class Transaction:
    """Disjoint X-Y paths between two disjoint segments of omega.

    Paths are oriented from X to Y and stored in natural order, that is
    sorted by the position of their X-end inside X.
    """

    paths: Linkage
    x: Segment
    y: Segment

    @property
    def order(self) -> int:
        return len(self.paths)

    def x_ends(self) -> List[int]:
        return [p.vertices[0] for p in self.paths]

    def y_ends(self) -> List[int]:
        return [p.vertices[-1] for p in self.paths]


def make_transaction(s: Society, paths: Iterable[Path | Sequence[int]]) -> Transaction:
    lk = Linkage(paths)
    require_input(lk.order >= 1, "a transaction needs at least one path")
    c = check_linkage(s.graph, lk)
    require_input(c.ok, f"not a linkage: {c.reason}")
    ends: List[Tuple[int, int, int]] = []
    for i, p in enumerate(lk):
        a, b = p.ends
        require_input(a != b, "transaction paths must have two distinct ends")
        require_input(a in s.vset and b in s.vset, f"path {list(p)} does not end on omega")
        ends += [(s.pos(a), i, 0), (s.pos(b), i, 1)]
    ends.sort()
    n = lk.order
    window: Optional[int] = None
    for k in range(2 * n):
        ids = {ends[(k + r) % (2 * n)][1] for r in range(n)}
        if len(ids) == n:
            window = k
            break
    require_input(window is not None, "path ends do not split into two disjoint segments")
    xw = [ends[(window + r) % (2 * n)] for r in range(n)]
    yw = [ends[(window + n + r) % (2 * n)] for r in range(n)]
    x = (xw[0][0], xw[-1][0])
    y = (yw[0][0], yw[-1][0])
    xy = set(s.segment(x)) | set(s.segment(y))
    x_side = {i: side for _, i, side in xw}
    oriented = []
    for i, p in enumerate(lk):
        q = p if x_side[i] == 0 else p.reversed()
        require_input(not (set(q.inner) & xy), f"path {list(q)} meets its end segments internally")
        oriented.append(q)
    oriented.sort(key=lambda q: s.offset(x, q.vertices[0]))
    return Transaction(Linkage(oriented), x, y)


@dataclass(frozen=True)
class TransactionClass:
    monotone: bool
    planar: bool
    crosscap: bool
    boundary_paths: Tuple[Path, Path]


def _y_offsets(s: Society, t: Transaction) -> List[int]:
    return [s.offset(t.y, v) for v in t.y_ends()]


def classify_transaction(s: Society, t: Transaction) -> TransactionClass:
    """Monotone, planar (Y-ends reversed) or crosscap (Y-ends in order).

    A transaction of order 1 is monotone both ways, so it counts as planar
    and as crosscap.
    """
    ys = _y_offsets(s, t)
    dec = all(a > b for a, b in zip(ys, ys[1:]))
    inc = all(a < b for a, b in zip(ys, ys[1:]))
    return TransactionClass(dec or inc, dec, inc, (t.paths.paths[0], t.paths.paths[-1]))


def _longest_run(seq: Sequence[int]) -> List[int]:
    """Indices of a longest strictly increasing subsequence (patience sorting)."""
    tails: List[int] = []
    tail_idx: List[int] = []
    prev = [-1] * len(seq)
    for i, x in enumerate(seq):
        k = bisect.bisect_left(tails, x)
        if k == len(tails):
            tails.append(x)
            tail_idx.append(i)
        else:
            tails[k] = x
            tail_idx[k] = i
        prev[i] = tail_idx[k - 1] if k else -1
    out: List[int] = []
    i = tail_idx[-1] if tail_idx else -1
    while i != -1:
        out.append(i)
        i = prev[i]
    return out[::-1]


def monotone_subtransaction(s: Society, t: Transaction, p: int, q: int) -> Transaction:
    """A planar sub-transaction of order p or a crosscap one of order q."""
    require_input(p >= 1 and q >= 1, "p and q must be positive")
    need = (p - 1) * (q - 1) + 1
    require_input(t.order >= need, f"transaction of order {t.order} is below (p-1)(q-1)+1 = {need}")
    ys = _y_offsets(s, t)
    dec = _longest_run([-y for y in ys])
    if len(dec) >= p:
        pick = dec[:p]
        kind = "planar"
    else:
        inc = _longest_run(ys)
        if len(inc) < q:
            raise ContractError("Erdos-Szekeres bound violated")
        pick = inc[:q]
        kind = "crosscap"
    log.debug("monotone sub-transaction: %s of order %d", kind, len(pick))
    return make_transaction(s, [t.paths.paths[i] for i in pick])


# crosses

def _crossing_pairs(s: Society, att: Sequence[int]) -> List[Tuple[int, int, int, int]]:
    ps = sorted(s.pos(v) for v in att)
    out = []
    n = len(ps)
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                for d in range(c + 1, n):
                    out.append((ps[a], ps[b], ps[c], ps[d]))
    return out


def _two_paths(g: Graph, s1: int, t1: int, s2: int, t2: int, inner: Set[int]) -> Optional[Tuple[List[int], List[int]]]:
    """Exhaustive search for disjoint s1-t1 and s2-t2 paths with interiors in `inner`.

    Only chordless first paths are enumerated; a chord shortcut keeps a
    subset of the vertices, so nothing is lost.
    """

    def second(used: Set[int]) -> Optional[List[int]]:
        return shortest_path(g, [s2], [t2], (inner - used) | {s2, t2})

    if second({s1, t1}) is None:
        return None
    path = [s1]
    used = {s1}

    def dfs() -> Optional[Tuple[List[int], List[int]]]:
        v = path[-1]
        for w in g.neighbors(v):
            if w in used or (w != t1 and w not in inner):
                continue
            if any(x in used and x != v for x in g.neighbors(w)):
                continue
            if w == t1:
                p2 = second(used | {t1})
                if p2 is not None:
                    return [*path, t1], p2
                continue
            used.add(w)
            path.append(w)
            if second(used | {t1}) is not None:
                found = dfs()
                if found:
                    return found
            path.pop()
            used.discard(w)
        return None

    return dfs()


def detect_cross(s: Society, budget: Optional[int] = None) -> Optional[Tuple[Path, Path]]:
    """Two disjoint omega-paths with interleaved ends, or None if no cross exists.

    Exact and exponential; graphs above `budget` vertices raise CapacityError.
    """
    require_input(len(s) >= 4, "cross detection needs at least four omega vertices")
    budget = DEFAULT_CONSTANTS.budget_vertices if budget is None else budget
    g = s.graph
    if g.n > budget:
        raise CapacityError(f"graph with {g.n} vertices exceeds the cross-search budget {budget}", g.n)
    om = s.vset
    bridges = g.bridges_of(om)
    # two different omega-bridges meet only in omega, so distinct ends suffice
    pairs: List[Tuple[int, Tuple[int, int]]] = []
    for bi, (_, att) in enumerate(bridges):
        ps = sorted(s.pos(v) for v in att)
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                pairs.append((bi, (ps[a], ps[b])))
    for i, (b1, (a, c)) in enumerate(pairs):
        for b2, (b, d) in pairs[i + 1 :]:
            if b1 == b2 or len({a, b, c, d}) < 4:
                continue
            if _interleaved(a, c, b, d):
                p1 = _bridge_path(g, bridges[b1][0], om, s.omega[a], s.omega[c])
                p2 = _bridge_path(g, bridges[b2][0], om, s.omega[b], s.omega[d])
                log.debug("cross across two omega-bridges")
                return Path(p1), Path(p2)
    for vs, att in bridges:
        if len(att) < 4:
            continue
        inner = set(vs) - om
        for a, b, c, d in _crossing_pairs(s, att):
            found = _two_paths(g, s.omega[a], s.omega[c], s.omega[b], s.omega[d], inner)
            if found:
                log.debug("cross inside one omega-bridge")
                return Path(found[0]), Path(found[1])
    return None


def _interleaved(a: int, c: int, b: int, d: int) -> bool:
    """Whether chord a-c and chord b-d cross on the cycle (positions distinct)."""
    lo, hi = min(a, c), max(a, c)
    return (lo < b < hi) != (lo < d < hi)


def _bridge_path(g: Graph, bridge: Set[int], om: FrozenSet[int], u: int, v: int) -> List[int]:
    allowed = (set(bridge) - om) | {u, v}
    if g.has_edge(u, v) and len(bridge) == 2:
        return [u, v]
    p = shortest_path(g, [u], [v], allowed)
    if p is None:
        raise ContractError(f"omega-bridge does not connect {u} and {v}")
    return p


# depth and transactions

def find_transaction(s: Society, p: int) -> Optional[Transaction]:
    """A transaction of order p from the all-splits Menger sweep, or None."""
    require_input(p >= 1, "p must be positive")
    for xs, ys in s.segment_pairs():
        res = max_linkage_or_separation(s.graph, xs, ys, p)
        if isinstance(res, Linkage):
            return make_transaction(s, res)
    return None


def society_depth(s: Society) -> int:
    best = 0
    for xs, ys in s.segment_pairs():
        k = min(len(xs), len(ys))
        if k <= best:
            continue
        res = max_linkage_or_separation(s.graph, xs, ys, k + 1)
        got = res.order if isinstance(res, Linkage) else res.certificate.order
        best = max(best, got)
    return best


@dataclass(frozen=True)
class LinearDecomposition:
    """Bags in omega order; certificates[i] is the maximum linkage across the
    separation that created the boundary between bags i and i + 1."""

    labels: Tuple[int, ...]
    bags: Tuple[FrozenSet[int], ...]
    certificates: Tuple[Linkage, ...] = field(default=(), compare=False)

    @property
    def adhesion(self) -> int:
        return max((len(a & b) for a, b in zip(self.bags, self.bags[1:])), default=0)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0)


@dataclass
class _Part:
    seg: List[int]
    verts: Set[int]
    edges: Set[Tuple[int, int]]


def transaction_or_linear_decomposition(s: Society, p: int) -> Transaction | LinearDecomposition:
    """A transaction of order p, or a linear decomposition of adhesion < p.

    Divide and conquer over omega: a part is split at the middle of its
    segment by a Menger call inside the part, with the separators to its
    neighbours added to the respective sides.
    """
    require_input(p >= 1, "p must be positive")
    require_input(len(s) >= 1, "omega must not be empty")
    g, om = s.graph, s.omega
    parts = [_Part(list(range(len(om))), set(g.vertices()), set(g.edges))]
    certs: List[Linkage] = []
    while True:
        j = next((i for i, pt in enumerate(parts) if len(pt.seg) >= 2), None)
        if j is None:
            break
        pt = parts[j]
        half = len(pt.seg) // 2
        first, second = pt.seg[:half], pt.seg[half:]
        left = pt.verts & parts[j - 1].verts if j > 0 else set()
        right = pt.verts & parts[j + 1].verts if j + 1 < len(parts) else set()
        local = Graph(g.n, pt.edges)
        avoid = set(g.vertices()) - pt.verts
        res = max_linkage_or_separation(local, left | {om[i] for i in first}, right | {om[i] for i in second}, p, avoid)
        if isinstance(res, Linkage):
            cut = second[0]
            # the part-local linkage extends to one over the whole graph
            whole = max_linkage_or_separation(g, om[:cut], om[cut:], p)
            if not isinstance(whole, Linkage):
                raise ContractError("local linkage did not extend to a transaction")
            log.debug("transaction of order %d at split %d", p, cut)
            return make_transaction(s, whole)
        a = set(res.a) & pt.verts
        b = set(res.b) & pt.verts
        ea = {e for e in pt.edges if e[0] in a and e[1] in a}
        eb = pt.edges - ea
        if any(u not in b or v not in b for u, v in eb):
            raise ContractError("Menger separation has a crossing edge")
        parts[j : j + 1] = [_Part(first, a, ea), _Part(second, b, eb)]
        certs.insert(j, res.certificate)
    for c in certs:
        if c.order >= p or not check_linkage(g, c):
            raise ContractError("boundary certificate is not a linkage of order < p")
    d = LinearDecomposition(om, tuple(frozenset(pt.verts) for pt in parts), tuple(certs))
    log.debug("linear decomposition of adhesion %d < %d", d.adhesion, p)
    return d


@dataclass(frozen=True)
class DecompositionReport:
    valid: bool
    adhesion: int
    width: int
    violation: str = ""


def verify_linear_decomposition(s: Society, d: LinearDecomposition) -> DecompositionReport:
    def report(msg: str = "") -> DecompositionReport:
        return DecompositionReport(not msg, d.adhesion, d.width, msg)

    n = len(s)
    if sorted(d.labels) != sorted(s.omega) or len(d.labels) != n:
        return report("labels are not the vertices of omega")
    if n and not s.in_cyclic_order(d.labels):
        return report("labels do not follow omega")
    if len(d.bags) != n:
        return report(f"expected {n} bags, got {len(d.bags)}")
    for i, (v, bag) in enumerate(zip(d.labels, d.bags), 1):
        if v not in bag:
            return report(f"v_{i} = {v} missing from its bag")
    covered = set().union(*d.bags) if d.bags else set()
    missing = set(s.graph.vertices()) - covered
    if missing:
        return report(f"vertex {min(missing)} is in no bag")
    for u, v in s.graph.edge_list():
        if not any(u in bag and v in bag for bag in d.bags):
            return report(f"edge {u}-{v} is in no bag")
    for x in s.omega:
        idx = [i for i, bag in enumerate(d.bags) if x in bag]
        if idx != list(range(idx[0], idx[-1] + 1)):
            return report(f"bags of omega vertex {x} do not form an interval")
    if d.certificates:
        if len(d.certificates) != n - 1:
            return report(f"expected {n - 1} boundary certificates, got {len(d.certificates)}")
        for i, lk in enumerate(d.certificates, 1):
            chk = check_linkage(s.graph, lk)
            if not chk:
                return report(f"boundary certificate {i}: {chk.reason}")
    return report()


# strips

@dataclass(frozen=True)
class StripSociety:
    society: Society
    origin: Tuple[int, ...]
    flat: Optional[bool]
    isolated: bool
    separating: bool

    @property
    def vertices(self) -> FrozenSet[int]:
        return frozenset(self.origin)


def strip_society(s: Society, t: Transaction, budget: Optional[int] = None, check_flat: bool = True) -> StripSociety:
    """The strip society of a monotone transaction with its flat/isolated/separating flags.

    `flat` is None when `check_flat` is off; cross search may raise CapacityError.
    """
    cls = classify_transaction(s, t)
    require_input(cls.monotone, "strip societies need a monotone transaction")
    require_input(t.order >= 2, "strip societies need order at least 2")
    g = s.graph
    xs, ys = s.segment(t.x), s.segment(t.y)
    path_v = set(t.paths.vset)
    path_e = {norm_edge(u, v) for p in t.paths for u, v in zip(p.vertices, p.vertices[1:])}
    h_verts = path_v | s.vset
    h_prime = path_v | set(xs) | set(ys)
    outer = t.paths.paths[0].vset | t.paths.paths[-1].vset
    verts = set(h_prime)
    edges = set(path_e)
    for bv, att in g.bridges_of(h_verts, path_e):
        if not (att & (h_prime - outer)):
            continue
        body = bv - att
        if not body:
            if att <= h_prime:
                u, w = sorted(att)
                edges.add((u, w))
            continue
        kept_att = att & h_prime
        verts |= body | kept_att
        edges |= {norm_edge(u, w) for u in body for w in g.neighbors(u) if w in body or w in kept_att}
    sub, back = g.subgraph(verts, edges)
    idx = {v: i for i, v in enumerate(back)}
    y1, yn = t.y_ends()[0], t.y_ends()[-1]
    y_walk = ys if s.offset(t.y, yn) < s.offset(t.y, y1) else ys[::-1]
    omega1 = [idx[v] for v in xs] + [idx[v] for v in y_walk]
    strip = Society(sub, omega1)
    inside = verts - outer
    isolated = not any(w not in verts for u in inside for w in g.neighbors(u))
    separating = False
    if isolated:
        n = len(s)
        xp = [s.omega[i % n] for i in range(t.x[1] + 1, t.x[1] + 1 + (t.y[0] - t.x[1] - 1) % n)]
        yp = [s.omega[i % n] for i in range(t.y[1] + 1, t.y[1] + 1 + (t.x[0] - t.y[1] - 1) % n)]
        rest = set(g.vertices()) - verts
        reach = bfs_reach(g, [v for v in xp if v in rest], rest)
        separating = not (reach & set(yp))
    flat: Optional[bool] = None
    if check_flat:
        flat = True if len(strip) < 4 else detect_cross(strip, budget) is None
    log.debug("strip society: %d vertices, flat=%s isolated=%s separating=%s", len(back), flat, isolated, separating)
    return StripSociety(strip, tuple(back), flat, isolated, separating)
