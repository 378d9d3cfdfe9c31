import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veriwall.crooked import society_from_chords
from veriwall.errors import CapacityError, InputError
from veriwall.graph import Graph, Linkage, check_linkage
from veriwall.mesh import make_grid
from veriwall.society import (
    LinearDecomposition,
    Society,
    Transaction,
    classify_transaction,
    detect_cross,
    find_transaction,
    make_transaction,
    monotone_subtransaction,
    society_depth,
    society_from_mesh,
    strip_society,
    transaction_or_linear_decomposition,
    verify_linear_decomposition,
)


def cycle(n):
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def permuted(perm):
    n = len(perm)
    return society_from_chords(2 * n, [(i, n + perm[i]) for i in range(n)])


def interleaved(s, p, q):
    a, c = sorted(s.pos(v) for v in p.ends)
    return sum(a < s.pos(v) < c for v in q.ends) == 1


def test_omega_is_rotated_to_its_smallest_vertex():
    s = Society(cycle(6), [3, 4, 5, 0, 1, 2])
    assert s.omega == (0, 1, 2, 3, 4, 5)
    assert s.segment((4, 1)) == [4, 5, 0, 1]
    assert s.offset((4, 1), 0) == 2
    assert s == Society(cycle(6), range(6))


def test_society_rejects_repeats():
    with pytest.raises(InputError, match="repeats"):
        Society(cycle(4), [0, 1, 0])
    with pytest.raises(KeyError):
        Society(cycle(4), [0, 1]).pos(3)


def test_segment_pairs_split_omega():
    s = Society(cycle(4), range(4))
    pairs = list(s.segment_pairs())
    assert len(pairs) == 6
    assert pairs[0] == ([0], [1, 2, 3])
    assert ([1, 2], [3, 0]) in pairs
    assert all(sorted(x + y) == [0, 1, 2, 3] for x, y in pairs)


def test_cyclic_order():
    s = Society(cycle(6), range(6))
    assert s.in_cyclic_order([1, 3, 5])
    assert s.in_cyclic_order([5, 3, 1])
    assert s.in_cyclic_order([4, 5, 0, 1])
    assert not s.in_cyclic_order([0, 2, 1, 3])


def test_society_from_mesh_walks_the_perimeter():
    m = make_grid(3, 4)
    s = society_from_mesh(m)
    assert len(s) == 10
    om = list(s.omega)
    assert all(m.graph.has_edge(u, v) for u, v in zip(om, om[1:] + om[:1]))


def test_make_transaction_orients_and_sorts():
    s, t = permuted([2, 1, 0])
    assert t.x == (0, 2)
    assert t.y == (3, 5)
    assert t.x_ends() == [0, 1, 2]
    assert t.y_ends() == [5, 4, 3]
    back = make_transaction(s, [p.reversed() for p in reversed(t.paths.paths)])
    assert back == t


def test_make_transaction_rejects_bad_paths():
    s = Society(Graph(5, [(0, 4), (4, 2), (1, 2)]), range(4))
    with pytest.raises(InputError, match="at least one"):
        make_transaction(s, [])
    with pytest.raises(InputError, match="does not end on omega"):
        make_transaction(s, [[0, 4]])
    with pytest.raises(InputError, match="not a linkage"):
        make_transaction(s, [[0, 4, 2], [1, 2]])


def test_classify_transaction():
    s, t = permuted([2, 1, 0])
    c = classify_transaction(s, t)
    assert c.monotone and c.planar and not c.crosscap
    assert c.boundary_paths == (t.paths.paths[0], t.paths.paths[-1])
    s, t = permuted([0, 1, 2])
    c = classify_transaction(s, t)
    assert c.monotone and c.crosscap and not c.planar
    s, t = permuted([1, 0, 2])
    assert not classify_transaction(s, t).monotone


def test_single_path_is_planar_and_crosscap():
    s, t = permuted([0])
    c = classify_transaction(s, t)
    assert c.monotone and c.planar and c.crosscap
    assert c.boundary_paths == (t.paths.paths[0], t.paths.paths[0])


def test_monotone_subtransaction_sides():
    s, t = permuted([4, 3, 2, 1, 0])
    sub = monotone_subtransaction(s, t, 3, 3)
    assert sub.order == 3
    assert classify_transaction(s, sub).planar
    s, t = permuted([0, 1, 2, 3, 4])
    sub = monotone_subtransaction(s, t, 3, 3)
    assert sub.order == 3
    assert classify_transaction(s, sub).crosscap


def test_monotone_subtransaction_is_sharp():
    # the extremal permutation of order (p-1)(q-1) forces neither side
    s, t = permuted([1, 0, 3, 2])
    with pytest.raises(InputError, match="\\(p-1\\)\\(q-1\\)\\+1"):
        monotone_subtransaction(s, t, 3, 3)


def longest_decreasing(seq):
    best = [1] * len(seq)
    for i in range(len(seq)):
        for j in range(i):
            if seq[j] > seq[i]:
                best[i] = max(best[i], best[j] + 1)
    return max(best, default=0)


@given(st.permutations(range(7)), st.integers(1, 3), st.integers(1, 3))
@settings(max_examples=50, deadline=None)
def test_monotone_subtransaction_matches_the_decreasing_run(perm, p, q):
    s, t = permuted(perm)
    sub = monotone_subtransaction(s, t, p, q)
    c = classify_transaction(s, sub)
    assert c.monotone
    if longest_decreasing(perm) >= p:
        assert c.planar and sub.order == p
    else:
        assert c.crosscap and sub.order == q


def test_cycle_has_no_cross():
    assert detect_cross(Society(cycle(4), range(4))) is None


def test_k4_has_a_cross():
    k4 = Graph(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    s = Society(k4, range(4))
    p, q = detect_cross(s)
    assert not (p.vset & q.vset)
    assert interleaved(s, p, q)


def test_cross_through_a_hub():
    g = cycle(6).with_edges([(0, 6), (6, 3), (1, 4)], extra_vertices=1)
    s = Society(g, range(6))
    p, q = detect_cross(s)
    assert not (p.vset & q.vset)
    assert interleaved(s, p, q)
    assert not (set(p.inner) | set(q.inner)) & s.vset


def test_cross_search_budget():
    with pytest.raises(CapacityError) as info:
        detect_cross(Society(cycle(6), range(6)), budget=5)
    assert info.value.size == 6
    with pytest.raises(InputError):
        detect_cross(Society(cycle(3), range(3)))


def test_depth_of_small_societies():
    assert society_depth(Society(Graph(4), range(4))) == 0
    assert society_depth(Society(Graph(4, [(0, 2)]), range(4))) == 1
    assert society_depth(society_from_mesh(make_grid(3, 3))) >= 2


def test_find_transaction_at_the_depth():
    s = society_from_mesh(make_grid(3, 4))
    depth = society_depth(s)
    assert find_transaction(s, depth).order == depth
    assert find_transaction(s, depth + 1) is None


def test_edgeless_society_decomposes():
    s = Society(Graph(4), range(4))
    d = transaction_or_linear_decomposition(s, 1)
    assert isinstance(d, LinearDecomposition)
    report = verify_linear_decomposition(s, d)
    assert report.valid
    assert report.adhesion == 0


def test_grid_society_has_a_planted_transaction():
    s = society_from_mesh(make_grid(4, 4))
    res = transaction_or_linear_decomposition(s, 3)
    assert isinstance(res, Transaction)
    assert res.order == 3


def test_decomposition_checker_reports_violations():
    s = Society(Graph(3, [(0, 1), (1, 2)]), range(3))
    ok = LinearDecomposition((0, 1, 2), (frozenset({0, 1}), frozenset({1, 2}), frozenset({2})))
    report = verify_linear_decomposition(s, ok)
    assert report.valid and report.adhesion == 1 and report.width == 2
    lost_edge = LinearDecomposition((0, 1, 2), (frozenset({0}), frozenset({1, 2}), frozenset({2})))
    assert "edge 0-1" in verify_linear_decomposition(s, lost_edge).violation
    gap = LinearDecomposition((0, 1, 2), (frozenset({0, 1, 2}), frozenset({1}), frozenset({2})))
    assert "interval" in verify_linear_decomposition(s, gap).violation
    short = LinearDecomposition((0, 1, 2), (frozenset({0, 1, 2}),))
    assert not verify_linear_decomposition(s, short).valid


def test_decomposition_checker_reports_bad_certificates():
    s = Society(Graph(3, [(0, 1), (1, 2)]), range(3))
    bags = (frozenset({0, 1}), frozenset({1, 2}), frozenset({2}))
    good = LinearDecomposition((0, 1, 2), bags, (Linkage([[1]]), Linkage([[2]])))
    assert verify_linear_decomposition(s, good).valid
    one = LinearDecomposition((0, 1, 2), bags, (Linkage([[1]]),))
    assert "expected 2 boundary certificates" in verify_linear_decomposition(s, one).violation
    jump = LinearDecomposition((0, 1, 2), bags, (Linkage([[0, 2]]), Linkage([[2]])))
    assert "boundary certificate 1" in verify_linear_decomposition(s, jump).violation


@st.composite
def societies(draw):
    n = draw(st.integers(3, 8))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=12))
    k = draw(st.integers(1, n))
    return Society(Graph(n, edges), range(k))


@given(societies(), st.integers(1, 3))
@settings(max_examples=50, deadline=None)
def test_transaction_or_decomposition_duality(s, p):
    depth = society_depth(s)
    res = transaction_or_linear_decomposition(s, p)
    if isinstance(res, Transaction):
        assert res.order == p
        assert depth >= p
    else:
        report = verify_linear_decomposition(s, res)
        assert report.valid, report.violation
        assert report.adhesion < p
        assert depth <= 2 * report.adhesion
        assert len(res.certificates) == len(res.bags) - 1
        assert all(c.order < p and check_linkage(s.graph, c) for c in res.certificates)


@given(societies())
@settings(max_examples=30, deadline=None)
def test_depth_agrees_with_the_transaction_sweep(s):
    depth = society_depth(s)
    if depth:
        assert find_transaction(s, depth).order == depth
    assert find_transaction(s, depth + 1) is None


def grid_columns(n, m, cols):
    mesh = make_grid(n, m)
    s = society_from_mesh(mesh)
    return mesh, s, make_transaction(s, [mesh.vertical[c - 1] for c in cols])


def test_strip_of_all_columns_is_the_grid():
    mesh, s, t = grid_columns(3, 4, [1, 2, 3, 4])
    strip = strip_society(s, t)
    assert strip.vertices == frozenset(mesh.graph.vertices())
    assert strip.flat and strip.isolated and strip.separating


def test_strip_with_an_escaping_bridge_is_not_isolated():
    mesh, s, t = grid_columns(3, 5, [2, 3, 4])
    z = mesh.graph.n
    g = mesh.graph.with_edges([(z, mesh.vid[(2, 3)]), (z, mesh.vid[(2, 1)])], extra_vertices=1)
    s2 = Society(g, s.omega)
    strip = strip_society(s2, make_transaction(s2, t.paths))
    assert z in strip.vertices
    assert not strip.isolated


def test_strip_with_a_planted_cross_is_not_flat():
    mesh, s, t = grid_columns(3, 5, [2, 3, 4])
    g = mesh.graph.with_edges([(mesh.vid[(1, 3)], mesh.vid[(3, 2)])])
    s2 = Society(g, s.omega)
    strip = strip_society(s2, make_transaction(s2, t.paths))
    assert strip.flat is False
    assert strip_society(s2, make_transaction(s2, t.paths), check_flat=False).flat is None


def test_strip_needs_a_monotone_transaction():
    s, t = permuted([1, 0, 2])
    with pytest.raises(InputError, match="monotone"):
        strip_society(s, t)
