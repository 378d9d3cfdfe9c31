from dataclasses import replace

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from veriwall.crooked import (
    crooked_or_planar,
    is_crooked,
    is_peripheral,
    leap_or_doublecross,
    society_from_chords,
    verify_crooked_certificate,
)
from veriwall.errors import InputError
from veriwall.society import classify_transaction


def planar(m):
    return society_from_chords(2 * m, [(i, 2 * m - 1 - i) for i in range(m)])


def leap(m):
    return society_from_chords(2 * m, [(0, m)] + [(i, 2 * m - i) for i in range(1, m)])


def doublecross(k):
    chords = [(0, 2 * k + 6), (1, 2 * k + 7)]
    chords += [(1 + i, 2 * k + 6 - i) for i in range(1, k + 1)]
    chords += [(k + 2, k + 4), (k + 3, k + 5)]
    return society_from_chords(2 * k + 8, chords)


@st.composite
def permuted(draw, lo=4, hi=8):
    n = draw(st.integers(lo, hi))
    perm = draw(st.permutations(range(n)))
    return society_from_chords(2 * n, [(i, n + perm[i]) for i in range(n)])


def test_single_path_is_peripheral():
    s, t = society_from_chords(2, [(0, 1)])
    assert is_peripheral(s, t, 0)


def test_planar_boundary_path_is_peripheral():
    s, t = planar(4)
    assert is_peripheral(s, t, 0)
    assert not is_crooked(s, t)


def test_overpass_is_not_peripheral():
    s, t = leap(4)
    assert t.paths.paths[0].ends == (0, 4)
    assert not is_peripheral(s, t, 0)
    assert is_crooked(s, t)


def test_cross_and_doublecross_are_crooked():
    s, t = society_from_chords(4, [(0, 2), (1, 3)])
    assert is_crooked(s, t)
    s, t = doublecross(2)
    assert is_crooked(s, t)


def test_crooked_or_planar_on_planar_input():
    s, t = planar(4)
    out = crooked_or_planar(s, t, 3, 3)
    assert out.kind == "planar"
    assert out.transaction.order == 3
    assert classify_transaction(s, out.transaction).planar


def test_crooked_or_planar_on_leap():
    s, t = leap(5)
    out = crooked_or_planar(s, t, 3, 3)
    assert out.kind == "crooked"
    assert out.transaction.order == 3
    assert is_crooked(s, out.transaction)


def test_crooked_or_planar_threshold_is_exact():
    s, t = planar(3)
    with pytest.raises(InputError, match="p\\+q-2"):
        crooked_or_planar(s, t, 3, 3)
    assert crooked_or_planar(s, t, 2, 3).kind == "planar"


@settings(max_examples=150, deadline=None)
@given(permuted(), st.integers(1, 4), st.integers(3, 6))
def test_crooked_or_planar_outcomes_validate(inst, p, q):
    s, t = inst
    assume(t.order >= p + q - 2)
    out = crooked_or_planar(s, t, p, q)
    if out.kind == "planar":
        assert out.transaction.order == p
        assert classify_transaction(s, out.transaction).planar
    else:
        assert out.transaction.order >= q
        assert is_crooked(s, out.transaction)


def test_cross_is_a_leap():
    s, t = society_from_chords(4, [(0, 2), (1, 3)])
    cert = leap_or_doublecross(s, t, 2, 1)
    assert cert.kind == "leap"
    assert cert.order == 2
    assert verify_crooked_certificate(s, cert)


def test_planted_leap():
    s, t = leap(5)
    cert = leap_or_doublecross(s, t, 3, 1)
    assert cert.kind == "leap"
    assert cert.order >= 3
    assert cert.overpass.ends == (0, 5)
    assert len(cert.sweep) == 1


@pytest.mark.parametrize("k", [1, 2, 4])
def test_planted_doublecross(k):
    s, t = doublecross(k)
    cert = leap_or_doublecross(s, t, 3, 1)
    assert cert.kind == "doublecross"
    assert cert.order == k + 4
    assert len(cert.sweep) == 2
    assert verify_crooked_certificate(s, cert)
    first, second = cert.sweep
    assert {t.paths.paths[first.anchor].ends, t.paths.paths[first.partner].ends} == {(k + 2, k + 4), (k + 3, k + 5)}
    assert {t.paths.paths[second.anchor].ends, t.paths.paths[second.partner].ends} == {(0, 2 * k + 6), (1, 2 * k + 7)}


def test_leap_or_doublecross_rejects_planar():
    s, t = planar(6)
    with pytest.raises(InputError, match="not crooked"):
        leap_or_doublecross(s, t, 2, 1)


def test_leap_or_doublecross_threshold():
    s, t = leap(5)
    with pytest.raises(InputError, match="4\\(ell-2\\)\\+d"):
        leap_or_doublecross(s, t, 3, 2)


def test_tampered_leap_fails_validation():
    s, t = leap(5)
    cert = leap_or_doublecross(s, t, 3, 1)
    other = next(p for p in cert.support.paths if p.vset != cert.overpass.vset)
    assert not verify_crooked_certificate(s, replace(cert, overpass=other))


@settings(max_examples=100, deadline=None)
@given(permuted())
def test_every_crooked_transaction_has_a_leap_of_order_two(inst):
    s, t = inst
    assume(is_crooked(s, t))
    cert = leap_or_doublecross(s, t, 2, 1)
    assert cert.kind == "leap"
    assert verify_crooked_certificate(s, cert)
