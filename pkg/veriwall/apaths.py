from __future__ import annotations

import logging
import math
import sys
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

from veriwall.config import DEFAULT_CONSTANTS
from veriwall.errors import PASS, CapacityError, Check, ContractError, fail, require_input
from veriwall.graph import Graph, Linkage, Path, bfs_reach, check_linkage

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SetFamily:
    sets: Tuple[FrozenSet[int], ...]

    def __init__(self, sets: Iterable[Iterable[int]]) -> None:
        object.__setattr__(self, "sets", tuple(frozenset(x) for x in sets))

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def union(self) -> FrozenSet[int]:
        return frozenset().union(*self.sets) if self.sets else frozenset()

    @property
    def multiplicity(self) -> int:
        """The largest number of sets sharing one vertex."""
        count: Dict[int, int] = defaultdict(int)
        for x in self.sets:
            for v in x:
                count[v] += 1
        return max(count.values(), default=0)

    def membership(self) -> Dict[int, List[int]]:
        out: Dict[int, List[int]] = defaultdict(list)
        for i, x in enumerate(self.sets):
            for v in x:
                out[v].append(i)
        return out

    def share_a_set(self, u: int, v: int) -> bool:
        return any(u in x and v in x for x in self.sets)


def is_a_path(fam: SetFamily, p: Path) -> bool:
    a = fam.union
    u, v = p.ends
    if len(p) < 2 or u not in a or v not in a:
        return False
    if any(x in a for x in p.inner):
        return False
    return not fam.share_a_set(u, v)


def verify_a_linkage(g: Graph, fam: SetFamily, lk: Linkage) -> Check:
    c = check_linkage(g, lk)
    if not c:
        return c
    seen: Set[int] = set()
    for p in lk:
        if not is_a_path(fam, p):
            return fail(f"path {list(p)} is not an A-path")
        for end in p.ends:
            hit = {i for i, x in enumerate(fam.sets) if end in x}
            if hit & seen:
                return fail(f"a set holds endpoints of two paths (at {end})")
            seen |= hit
    return PASS


def _check_desk_scale(g: Graph, limit: Optional[int]) -> None:
    limit = DEFAULT_CONSTANTS.exhaustive_limit if limit is None else limit
    if g.n > limit:
        raise CapacityError(f"exhaustive search over {g.n} vertices exceeds the limit {limit}", g.n)


def exhaustive_a_paths(g: Graph, fam: SetFamily, avoid: Iterable[int] = (), limit: Optional[int] = None) -> Iterator[Path]:
    """Every A-path of G - avoid, each once, starting at its smaller end."""
    _check_desk_scale(g, limit)
    a = fam.union
    gone = set(avoid)
    for s in sorted(a - gone):
        path = [s]
        used = {s}

        def walk() -> Iterator[Path]:
            for w in g.neighbors(path[-1]):
                if w in used or w in gone:
                    continue
                if w in a:
                    if w > s and not fam.share_a_set(s, w):
                        yield Path([*path, w])
                    continue
                used.add(w)
                path.append(w)
                yield from walk()
                path.pop()
                used.discard(w)

        yield from walk()


def exhaustive_a_linkage_order(g: Graph, fam: SetFamily, limit: Optional[int] = None) -> int:
    """Largest A-linkage by exhaustive search."""
    paths = list(exhaustive_a_paths(g, fam, limit=limit))
    sets_of = fam.membership()
    best = 0

    def grow(start: int, used: Set[int], sets: Set[int], size: int) -> None:
        nonlocal best
        best = max(best, size)
        for i in range(start, len(paths)):
            p = paths[i]
            hit = set(sets_of[p.vertices[0]]) | set(sets_of[p.vertices[-1]])
            if used & p.vset or hit & sets:
                continue
            grow(i + 1, used | p.vset, sets | hit, size + 1)

    grow(0, set(), set(), 0)
    return best


def blocks_a_paths(g: Graph, fam: SetFamily, z: Iterable[int]) -> Check:
    """Whether every A-path of G - Z has an endpoint in a set meeting Z."""
    zs = set(z)
    a = fam.union
    hit = {i for i, x in enumerate(fam.sets) if x & zs}
    free = {v for v in a - zs if not any(v in fam.sets[i] for i in hit)}
    for u, v in g.edge_list():
        if u in free and v in free and not fam.share_a_set(u, v):
            return fail(f"A-path {u}-{v} avoids the blocker")
    rest = set(g.vertices()) - a - zs
    for comp in g.components(rest):
        touch = sorted({w for v in comp for w in g.neighbors(v) if w in free})
        for i, u in enumerate(touch):
            for v in touch[i + 1 :]:
                if not fam.share_a_set(u, v):
                    return fail(f"A-path between {u} and {v} avoids the blocker")
    return PASS


# subcubic trees

def _leaf_paths(adj: Dict[int, List[int]], root: int) -> List[List[int]]:
    """Disjoint leaf-to-leaf paths of a subcubic tree rooted at a leaf.

    Bottom-up: every subtree hands at most one open leaf path to its root;
    two open paths meeting at a vertex are closed through it.
    """
    parent = {root: -1}
    order = [root]
    for v in order:
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
    open_path: Dict[int, Optional[List[int]]] = {}
    done: List[List[int]] = []
    for v in reversed(order):
        kids = [w for w in adj[v] if parent.get(w) == v]
        if not kids:
            open_path[v] = [v]
            continue
        avail = [open_path[w] for w in sorted(kids) if open_path[w] is not None]
        if v == root:
            if avail:
                done.append([*avail[0], v])
            open_path[v] = None
        elif len(avail) >= 2:
            done.append([*avail[0], v, *reversed(avail[1])])
            open_path[v] = None
        elif avail:
            open_path[v] = [*avail[0], v]
        else:
            open_path[v] = None
    return done


def leaf_to_leaf_paths(t: Graph) -> Linkage:
    require_input(t.n >= 2 and len(t.edges) == t.n - 1 and t.is_connected_set(t.vertices()), "input is not a tree")
    require_input(t.max_degree() <= 3, "tree is not subcubic")
    leaves = [v for v in t.vertices() if t.degree(v) == 1]
    require_input(len(leaves) >= 2, "tree needs at least two leaves")
    adj = {v: list(t.neighbors(v)) for v in t.vertices()}
    paths = _leaf_paths(adj, leaves[0])
    if 2 * len(paths) < len(leaves) - 1:
        raise ContractError("leaf-to-leaf bound violated")
    return Linkage(paths)


# Gallai forest

@dataclass
class GallaiForest:
    """Subcubic forest whose leaves are its vertices in the union of the family."""

    adj: Dict[int, Set[int]] = field(default_factory=lambda: defaultdict(set))
    leaves: Set[int] = field(default_factory=set)

    def add_path(self, vs: Sequence[int]) -> None:
        for u, v in zip(vs, vs[1:]):
            self.adj[u].add(v)
            self.adj[v].add(u)

    @property
    def vertices(self) -> Set[int]:
        return {v for v, n in self.adj.items() if n}

    def degree(self, v: int) -> int:
        return len(self.adj.get(v, ()))

    @property
    def branch(self) -> Set[int]:
        return {v for v in self.vertices if self.degree(v) == 3}

    def components(self) -> List[Set[int]]:
        seen: Set[int] = set()
        out = []
        for s in sorted(self.vertices):
            if s in seen:
                continue
            comp = {s}
            stack = [s]
            while stack:
                v = stack.pop()
                for w in self.adj[v]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            seen |= comp
            out.append(comp)
        return out


@dataclass(frozen=True)
class Blocker:
    z: FrozenSet[int]
    forest: Optional[GallaiForest] = field(default=None, compare=False)


class _ForestBuilder:
    def __init__(self, g: Graph, fam: SetFamily) -> None:
        self.g = g
        self.fam = fam
        self.a = fam.union
        self.sets_of = fam.membership()
        self.f = GallaiForest()
        self.hit: Set[int] = set()

    def blocked(self, v: int) -> bool:
        return any(i in self.hit for i in self.sets_of.get(v, ()))

    def make_leaf(self, v: int) -> None:
        self.f.leaves.add(v)
        self.hit.update(self.sets_of[v])

    def dfs_phase(self) -> None:
        """Modified DFS from every unvisited, unblocked vertex of the union."""
        visited: Set[int] = set()
        for z0 in sorted(self.a):
            if z0 in visited or self.blocked(z0):
                continue
            visited.add(z0)
            self.hit.update(self.sets_of[z0])
            stack = [z0]
            extended = self._visit(z0, stack, visited, is_start=True)
            if extended:
                self.f.leaves.add(z0)
            else:
                self.hit.difference_update(self.sets_of[z0])
                self.hit.update(i for v in self.f.leaves for i in self.sets_of[v])

    def _visit(self, x: int, stack: List[int], visited: Set[int], is_start: bool) -> bool:
        # returns whether the forest was extended through x
        count = 0
        limit = 1 if is_start else 2
        for w in self.g.neighbors(x):
            if w in visited:
                continue
            visited.add(w)
            if w in self.a:
                if self.blocked(w):
                    continue
                path = [*stack, w]
                self.f.add_path(path)
                self.make_leaf(w)
                count += 1
            else:
                stack.append(w)
                grew = self._visit(w, stack, visited, is_start=False)
                stack.pop()
                if grew:
                    count += 1
            if count >= limit:
                break
        return count > 0

    def closure_phase(self) -> None:
        """Adds augmenting paths until the forest is inclusion-maximal."""
        while self._attach() or self._new_tree():
            pass

    def _free_inner(self) -> Set[int]:
        fv = self.f.vertices
        return {v for v in self.g.vertices() if v not in self.a and v not in fv}

    def _attach(self) -> bool:
        # unblocked A-vertex -> degree-2 forest vertex through fresh non-A vertices
        inner = self._free_inner()
        targets = {v for v in self.f.vertices if self.f.degree(v) == 2 and v not in self.a}
        if not targets:
            return False
        for s in sorted(self.a - self.f.vertices):
            if self.blocked(s):
                continue
            parent = {s: -1}
            queue = [s]
            for v in queue:
                for w in self.g.neighbors(v):
                    if w in parent:
                        continue
                    if w in targets:
                        path = [w, v]
                        while parent[path[-1]] != -1:
                            path.append(parent[path[-1]])
                        self.f.add_path(path)
                        self.make_leaf(s)
                        return True
                    if w in inner:
                        parent[w] = v
                        queue.append(w)
        return False

    def _new_tree(self) -> bool:
        inner = self._free_inner()
        cands = sorted(v for v in self.a - self.f.vertices if not self.blocked(v))
        for s in cands:
            parent = {s: -1}
            queue = [s]
            for v in queue:
                for w in self.g.neighbors(v):
                    if w in parent:
                        continue
                    if w in self.a:
                        if w in self.f.vertices or self.blocked(w) or self.fam.share_a_set(s, w):
                            continue
                        path = [w, v]
                        while parent[path[-1]] != -1:
                            path.append(parent[path[-1]])
                        self.f.add_path(path)
                        self.make_leaf(s)
                        self.make_leaf(w)
                        return True
                    if w in inner:
                        parent[w] = v
                        queue.append(w)
        return False


def gallai_forest(g: Graph, fam: SetFamily) -> GallaiForest:
    b = _ForestBuilder(g, fam)
    # the DFS recurses once per vertex on a path
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 2 * g.n + 1000))
    b.dfs_phase()
    b.closure_phase()
    return b.f


def gallai_pack_or_block(g: Graph, fam: SetFamily, q: int) -> Linkage | Blocker:
    """q disjoint A-paths forming an A-linkage, or a set Z with |Z| < 4q blocking all A-paths."""
    require_input(q >= 0, "q must be non-negative")
    for x in fam.sets:
        g.check_vertices(x)
    if q == 0:
        return Blocker(frozenset())
    f = gallai_forest(g, fam)
    paths: List[List[int]] = []
    comps = f.components()
    for comp in comps:
        leaves = sorted(v for v in comp if f.degree(v) == 1)
        adj = {v: sorted(f.adj[v]) for v in comp}
        paths += _leaf_paths(adj, leaves[0])
    if len(paths) >= q:
        lk = Linkage(paths[:q])
        verify_a_linkage(g, fam, lk).require()
        log.debug("gallai: A-linkage of order %d", q)
        return lk
    z = frozenset(f.leaves | f.branch)
    if len(z) > 2 * len(f.leaves) - 2 * len(comps) or len(z) >= 4 * q:
        raise ContractError(f"blocker of size {len(z)} breaks the forest bound")
    log.debug("gallai: blocker of size %d from %d trees", len(z), len(comps))
    return Blocker(z, f)


# jumps between a sequence of subgraphs

@dataclass(frozen=True)
class Jumps:
    members: Tuple[int, ...]
    paths: Linkage
    hosts: Tuple[Tuple[int, int], ...]


@dataclass(frozen=True)
class JumpBlocker:
    z: FrozenSet[int]
    y: FrozenSet[int]


def _check_sequence(g: Graph, seq: Sequence[Iterable[int]]) -> List[FrozenSet[int]]:
    out = [frozenset(s) for s in seq]
    seen: Set[int] = set()
    for i, s in enumerate(out):
        g.check_vertices(s)
        require_input(bool(s), f"member {i} is empty")
        require_input(not (seen & s), f"member {i} overlaps an earlier member")
        require_input(g.is_connected_set(s), f"member {i} is not connected")
        seen |= s
    return out


def _host(seq: Sequence[FrozenSet[int]]) -> Dict[int, int]:
    return {v: i for i, s in enumerate(seq) for v in s}


def g_jumps_or_block(g: Graph, seq: Sequence[Iterable[int]], q: int, avoid: Iterable[int] = ()) -> Jumps | JumpBlocker:
    """q disjoint jumps with pairwise independent hosts, or (Z, Y) with every jump touching Y.

    Vertices in `avoid` are treated as deleted.
    """
    require_input(q >= 1, "q must be positive")
    members = _check_sequence(g, seq)
    gone = frozenset(avoid)
    if len(members) <= 2:
        return JumpBlocker(frozenset(), frozenset())
    work = g.without_edges(e for e in g.edges if e[0] in gone or e[1] in gone) if gone else g
    fam = SetFamily(members[i] | members[i + 1] for i in range(len(members) - 1))
    res = gallai_pack_or_block(work, fam, q)
    host = _host(members)
    if isinstance(res, Linkage):
        ps, hs = [], []
        for p in res:
            a, b = host[p.vertices[0]], host[p.vertices[-1]]
            if a > b:
                p, a, b = p.reversed(), b, a
            ps.append(p)
            hs.append((a, b))
        return Jumps(tuple(range(len(members))), Linkage(ps), tuple(hs))
    y = {j for i, x in enumerate(fam.sets) if x & res.z for j in (i, i + 1)}
    if len(res.z) >= 4 * q or len(y) >= 12 * q:
        raise ContractError("jump blocker exceeds its bounds")
    return JumpBlocker(res.z, frozenset(y))


def pp_jumps(g: Graph, seq: Sequence[Iterable[int]], d: int, q: int) -> Jumps | JumpBlocker:
    """Jumps over a subsequence, or (Z, Y) such that every jump of G - Z has both ends in Y."""
    require_input(d >= 1 and q >= 1, "d and q must be positive")
    members = _check_sequence(g, seq)
    for i, s in enumerate(members):
        sub, _ = g.induced(s)
        require_input(sub.max_degree() <= d, f"member {i} has degree above {d}")
    first = g_jumps_or_block(g, members, q)
    if isinstance(first, Jumps):
        return first
    z1, y1 = first.z, first.y
    keep1 = [i for i in range(len(members)) if i not in y1]
    second = g_jumps_or_block(g, [members[i] for i in keep1], q, avoid=z1)
    if isinstance(second, Jumps):
        hosts = tuple((keep1[a], keep1[b]) for a, b in second.hosts)
        return Jumps(tuple(keep1), second.paths, hosts)
    z = z1 | second.z
    y2 = {keep1[i] for i in second.y}
    keep2 = [i for i in keep1 if i not in y2]
    in_g1 = set().union(*(members[i] for i in keep1)) if keep1 else set()
    host = _host(members)
    allowed = set(g.vertices()) - z - in_g1
    targets = set(keep2)
    y3: Set[int] = set()
    for i in sorted(y1):
        for comp in g.components(members[i] - z):
            reach = bfs_reach(g, comp, allowed | set(comp))
            for v in reach:
                for w in g.neighbors(v):
                    if w in in_g1 and w not in z and host[w] in targets:
                        y3.add(host[w])
    y = frozenset(set(y1) | y2 | y3)
    if len(z) >= 8 * q or len(y) >= 16 * (d + 2) * q:
        raise ContractError("two-sided jump blocker exceeds its bounds")
    log.debug("pp_jumps: |Z|=%d |Y|=%d", len(z), len(y))
    return JumpBlocker(z, y)


def is_jump(seq: Sequence[FrozenSet[int]], p: Path) -> bool:
    host = _host(seq)
    u, v = p.ends
    if len(p) < 2 or u not in host or v not in host:
        return False
    if any(x in host for x in p.inner):
        return False
    return abs(host[u] - host[v]) > 1


def verify_jump_blocker(g: Graph, seq: Sequence[Iterable[int]], blk: JumpBlocker, both: bool = False) -> Check:
    """Polynomial check that every jump of G - Z has one (or both) ends in the members Y."""
    members = [frozenset(s) for s in seq]
    host = _host(members)
    z = set(blk.z)

    def bad(a: int, b: int) -> bool:
        if abs(a - b) <= 1:
            return False
        if both:
            return a not in blk.y or b not in blk.y
        return a not in blk.y and b not in blk.y

    for u, v in g.edge_list():
        if u in host and v in host and u not in z and v not in z and bad(host[u], host[v]):
            return fail(f"jump {u}-{v} escapes the blocker")
    rest = set(g.vertices()) - set(host) - z
    for comp in g.components(rest):
        touched = sorted({host[w] for v in comp for w in g.neighbors(v) if w in host and w not in z})
        for i, a in enumerate(touched):
            for b in touched[i + 1 :]:
                if bad(a, b):
                    return fail(f"a jump between members {a} and {b} escapes the blocker")
    return PASS


def exhaustive_g_jumps(g: Graph, seq: Sequence[Iterable[int]], avoid: Iterable[int] = (), limit: Optional[int] = None) -> Iterator[Path]:
    members = [frozenset(s) for s in seq]
    host = _host(members)
    fam = SetFamily(members[i] | members[i + 1] for i in range(len(members) - 1)) if len(members) > 1 else SetFamily([members[0]] if members else [])
    for p in exhaustive_a_paths(g, fam, avoid, limit):
        if abs(host[p.vertices[0]] - host[p.vertices[-1]]) > 1:
            yield p


# intervals

Interval = Tuple[int, int]


@dataclass(frozen=True)
class IntervalSet:
    intervals: Tuple[Interval, ...]

    def __init__(self, intervals: Iterable[Sequence[int]]) -> None:
        ivs = tuple((int(a), int(b)) for a, b in intervals)
        for a, b in ivs:
            require_input(a <= b, f"interval [{a}, {b}] is reversed")
        object.__setattr__(self, "intervals", ivs)

    def __len__(self) -> int:
        return len(self.intervals)

    def is_independent(self, d: int) -> bool:
        return all(_pair_independent(p, q, d) for i, p in enumerate(self.intervals) for q in self.intervals[i + 1 :])

    def pairwise_disjoint(self) -> bool:
        ivs = sorted(self.intervals)
        return all(a[1] < b[0] for a, b in zip(ivs, ivs[1:]))


def _pair_independent(p: Interval, q: Interval, d: int) -> bool:
    return all(abs(x - y) >= d for x in p for y in q)


def select_disjoint_intervals(ivs: IntervalSet, k: int, ell: int) -> IntervalSet:
    """k pairwise disjoint intervals by repeatedly taking the smallest left endpoint."""
    require_input(k >= 1 and ell >= 4, "need k >= 1 and l >= 4")
    require_input(ivs.is_independent(2), "intervals are not 2-independent")
    require_input(all(2 <= b - a <= ell for a, b in ivs.intervals), f"interval lengths must lie in [2, {ell}]")
    need = math.ceil(ell * (k - 1) / 2 + 1)
    require_input(len(ivs) >= need, f"{len(ivs)} intervals are below the threshold {need}")
    pool = sorted(ivs.intervals)[:need]
    out: List[Interval] = []
    while len(out) < k:
        if not pool:
            raise ContractError("disjoint-interval selection ran dry")
        first = pool[0]
        out.append(first)
        pool = [iv for iv in pool[1:] if iv[0] > first[1] or iv[1] < first[0]]
    return IntervalSet(out)


def select_d_independent(ivs: IntervalSet, k: int, d: int) -> IntervalSet:
    require_input(k >= 1 and d >= 1, "need k >= 1 and d >= 1")
    require_input(ivs.is_independent(2), "intervals are not 2-independent")
    need = math.ceil((3 * d - 1) * (k - 1) / 2 + 1)
    require_input(len(ivs) >= need, f"{len(ivs)} intervals are below the threshold {need}")
    pool = sorted(ivs.intervals)[:need]
    out: List[Interval] = []
    while len(out) < k:
        if not pool:
            raise ContractError("d-independent selection ran dry")
        first = pool[0]
        out.append(first)
        pool = [iv for iv in pool[1:] if _pair_independent(first, iv, d)]
    return IntervalSet(out)
