import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veriwall.errors import InputError
from veriwall.graph import (
    Graph,
    Linkage,
    NoSeparator,
    Path,
    Separation,
    brute_force_min_separator,
    check_linkage,
    check_path,
    check_separation,
    check_xy_linkage,
    max_linkage_or_separation,
    shortest_path,
    subdivide,
)
from veriwall.mesh import make_grid


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def test_graph_rejects_loops_and_strays():
    with pytest.raises(InputError, match="loop"):
        Graph(2, [(1, 1)])
    with pytest.raises(InputError, match="out of range"):
        Graph(2, [(0, 2)])
    with pytest.raises(InputError):
        Graph(-1)


def test_edges_are_normalized():
    g = Graph(3, [(2, 1), (1, 2), (0, 1)])
    assert g.edge_list() == [(0, 1), (1, 2)]
    assert g.neighbors(1) == (0, 2)
    assert g.has_edge(2, 1)
    assert g.max_degree() == 2


def test_components_and_connected_sets():
    g = Graph(5, [(0, 1), (1, 2), (3, 4)])
    assert g.components() == [[0, 1, 2], [3, 4]]
    assert g.components([0, 2, 3]) == [[0], [2], [3]]
    assert g.is_connected_set({0, 1, 2})
    assert not g.is_connected_set({0, 2})
    assert not g.is_connected_set(set())


def test_bridges_of_a_path():
    g = Graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    bridges = g.bridges_of({0, 3}, [(0, 3)])
    assert bridges == [({0, 1, 2, 3}, {0, 3})]
    chord = g.bridges_of({0, 1, 2, 3}, [(0, 1), (1, 2), (2, 3)])
    assert chord == [({0, 3}, {0, 3})]


def test_subgraph_compacts_ids():
    g = cycle(6)
    sub, back = g.subgraph({2, 3, 4}, [(2, 3), (3, 4)])
    assert back == [2, 3, 4]
    assert sub.edge_list() == [(0, 1), (1, 2)]
    with pytest.raises(InputError, match="leaves the chosen vertex set"):
        g.subgraph({2, 3}, [(3, 4)])
    with pytest.raises(InputError, match="not an edge"):
        g.subgraph({0, 3}, [(0, 3)])


def test_networkx_roundtrip():
    g = cycle(7)
    assert Graph.from_networkx(g.to_networkx()) == g
    assert nx.is_isomorphic(g.to_networkx(), nx.cycle_graph(7))


def test_shortest_path_prefers_small_ids():
    g = cycle(6)
    assert shortest_path(g, [0], [3]) == [0, 1, 2, 3]
    assert shortest_path(g, [0], [3], allowed={0, 5, 4, 3}) == [0, 5, 4, 3]
    assert shortest_path(g, [0], [3], allowed={0, 3}) is None


def test_subdivide_triangle():
    g, inner = subdivide(cycle(3), 2)
    assert g.n == 3 + 3 * 2
    assert len(g.edges) == 9
    a, b = inner[(0, 1)]
    assert check_path(g, Path([0, a, b, 1]))
    with pytest.raises(InputError):
        subdivide(cycle(3), -1)


def test_path_views():
    p = Path([4, 2, 7, 1])
    assert p.ends == (4, 1)
    assert p.inner == (2, 7)
    assert p.sub(1, 2).vertices == (1, 7, 2)
    assert p.reversed().vertices == (1, 7, 2, 4)


def test_check_path_and_linkage():
    g = cycle(6)
    assert "repeats" in check_path(g, Path([0, 1, 0])).reason
    assert "not an edge" in check_path(g, Path([0, 2])).reason
    assert not check_path(g, Path([]))
    assert "share" in check_linkage(g, Linkage([[0, 1], [1, 2]])).reason
    assert check_linkage(g, Linkage([[0, 1], [3, 4]]))


def test_xy_linkage_must_not_touch_ends_internally():
    g = Graph(4, [(0, 1), (1, 2), (2, 3)])
    assert check_xy_linkage(g, Linkage([[1, 2]]), {1}, {2})
    assert "internally" in check_xy_linkage(g, Linkage([[0, 1, 2, 3]]), {0, 1}, {3}).reason


def test_menger_across_a_grid():
    m = make_grid(4, 5)
    left = [m.vid[(i, 1)] for i in range(1, 5)]
    right = [m.vid[(i, 5)] for i in range(1, 5)]
    lk = max_linkage_or_separation(m.graph, left, right, 4)
    assert isinstance(lk, Linkage) and lk.order == 4
    assert check_xy_linkage(m.graph, lk, set(left), set(right))
    sep = max_linkage_or_separation(m.graph, left, right, 5)
    assert isinstance(sep, Separation)
    assert sep.order == 4
    assert check_separation(m.graph, sep)
    assert sep.certificate.order == 4


def test_avoided_vertices_are_deleted():
    g = cycle(6)
    sep = max_linkage_or_separation(g, [0], [3], 1, avoid=[1, 5])
    assert isinstance(sep, Separation)
    assert sep.order == 0


def test_brute_force_separator_bound():
    g = cycle(6)
    assert brute_force_min_separator(g, {0, 1}, {3, 4}, 1) == NoSeparator(1)
    sep = brute_force_min_separator(g, {0, 1}, {3, 4}, 2)
    assert sep.order == 2
    assert check_separation(g, sep)
    with pytest.raises(InputError):
        brute_force_min_separator(g, {0}, {3}, 9)


@st.composite
def small_instances(draw):
    n = draw(st.integers(4, 8))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
    order = draw(st.permutations(range(n)))
    nx_ = draw(st.integers(1, n // 2))
    ny = draw(st.integers(1, n - nx_))
    return Graph(n, edges), set(order[:nx_]), set(order[nx_ : nx_ + ny])


@given(small_instances(), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_menger_matches_brute_force(inst, k):
    g, x, y = inst
    res = max_linkage_or_separation(g, x, y, k)
    best = brute_force_min_separator(g, x, y, 8)
    if isinstance(res, Linkage):
        assert res.order == k
        assert check_xy_linkage(g, res, x, y)
        assert best.order >= k
    else:
        assert check_separation(g, res)
        assert x <= res.a and y <= res.b
        assert res.order == best.order < k
        assert res.certificate.order == res.order
