from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Literal, Optional, Sequence, Tuple

from veriwall.errors import PASS, Check, ContractError, fail, require_input
from veriwall.graph import Graph, Path
from veriwall.society import Society, Transaction, _interleaved, make_transaction

log = logging.getLogger(__name__)


def society_from_chords(n: int, chords: Sequence[Tuple[int, int]]) -> Tuple[Society, Transaction]:
    """Omega = 0..n-1 in order; every chord becomes a path through one private vertex."""
    used = [v for c in chords for v in c]
    require_input(len(set(used)) == len(used), "chords share an end")
    require_input(all(0 <= v < n for v in used), f"chord ends must lie in [0, {n})")
    edges = []
    paths = []
    for k, (a, b) in enumerate(chords):
        m = n + k
        edges += [(a, m), (m, b)]
        paths.append(Path([a, m, b]))
    s = Society(Graph(n + len(chords), edges), range(n))
    return s, make_transaction(s, paths)


def _crosses(s: Society, p: Path, q: Path) -> bool:
    a, c = (s.pos(v) for v in p.ends)
    b, d = (s.pos(v) for v in q.ends)
    return _interleaved(a, c, b, d)


def _peripheral(s: Society, paths: Sequence[Path], i: int) -> bool:
    a, b = sorted(s.pos(v) for v in paths[i].ends)
    inside = [a < s.pos(v) < b for j, p in enumerate(paths) if j != i for v in p.ends]
    return all(inside) or not any(inside)


def _crooked(s: Society, paths: Sequence[Path]) -> bool:
    return not any(_peripheral(s, paths, i) for i in range(len(paths)))


def is_peripheral(s: Society, t: Transaction, i: int) -> bool:
    """Whether the ends of path i cut off an arc of omega holding no other path end."""
    require_input(0 <= i < t.order, f"path index {i} out of range")
    return _peripheral(s, t.paths.paths, i)


def is_crooked(s: Society, t: Transaction) -> bool:
    return _crooked(s, t.paths.paths)


@dataclass(frozen=True)
class CrookedSplit:
    kind: Literal["planar", "crooked"]
    transaction: Transaction


def _sub(s: Society, t: Transaction, idx: Sequence[int]) -> Transaction:
    return make_transaction(s, [t.paths.paths[i] for i in sorted(idx)])


def crooked_or_planar(s: Society, t: Transaction, p: int, q: int) -> CrookedSplit:
    """A planar sub-transaction of order p or a crooked one of order at least q.

    Peripheral paths are peeled off while more than q paths remain; peeled
    paths never cross anything peeled later, so they and any two survivors
    of a non-crooked remainder form a planar family. A crooked remainder is
    trimmed towards order q as long as it stays crooked.
    """
    require_input(p >= 1 and q >= 3, f"need p >= 1 and q >= 3, got p={p}, q={q}")
    require_input(t.order >= p + q - 2, f"transaction of order {t.order} is below p+q-2 = {p + q - 2}")
    every = t.paths.paths
    alive = list(range(t.order))
    peeled: List[int] = []
    while True:
        cur = [every[i] for i in alive]
        per = next((k for k in range(len(cur)) if _peripheral(s, cur, k)), None)
        if per is None:
            break
        if len(alive) <= q:
            other = alive[1] if per == 0 else alive[0]
            pick = (peeled + [alive[per], other])[:p]
            out = _sub(s, t, pick)
            log.debug("planar sub-transaction of order %d", out.order)
            return CrookedSplit("planar", out)
        peeled.append(alive.pop(per))
    if len(alive) < q:
        # only reachable for p == 1, where any single path will do
        return CrookedSplit("planar", _sub(s, t, alive[:p]))
    trimmed = True
    while trimmed and len(alive) > q:
        trimmed = False
        for i in list(alive):
            rest = [j for j in alive if j != i]
            if _crooked(s, [every[j] for j in rest]):
                alive = rest
                trimmed = True
                break
    out = _sub(s, t, alive)
    log.debug("crooked sub-transaction of order %d", out.order)
    return CrookedSplit("crooked", out)


# leaps and doublecrosses


@dataclass(frozen=True)
class SweepStep:
    """One pass of the leap/doublecross sweep, as indices into the input transaction."""

    anchor: int
    partner: Optional[int]
    p_x: Tuple[int, ...]
    p_y: Tuple[int, ...]


@dataclass(frozen=True)
class CrookedCertificate:
    kind: Literal["leap", "doublecross"]
    support: Transaction
    overpass: Optional[Path] = None
    crosses: Tuple[Tuple[Path, Path], ...] = ()
    sweep: Tuple[SweepStep, ...] = field(default=(), compare=False)

    @property
    def order(self) -> int:
        return self.support.order


def _offsets(s: Society, t: Transaction) -> Tuple[List[int], List[int]]:
    return [s.offset(t.x, v) for v in t.x_ends()], [s.offset(t.y, v) for v in t.y_ends()]


def _gap_side(xo: Dict[FrozenSet[int], int], yo: Dict[FrozenSet[int], int], rest: Sequence[FrozenSet[int]], p: FrozenSet[int]) -> Tuple[str, str]:
    """Which gap between the end segments of `rest` holds each end of p ("A" after X, "B" after Y)."""
    xs = [xo[r] for r in rest]
    ys = [yo[r] for r in rest]
    xside = "A" if xo[p] > max(xs) else "B" if xo[p] < min(xs) else "-"
    yside = "A" if yo[p] < min(ys) else "B" if yo[p] > max(ys) else "-"
    return xside, yside


def verify_crooked_certificate(s: Society, cert: CrookedCertificate) -> Check:
    t = cert.support
    keys = [p.vset for p in t.paths]
    xl, yl = _offsets(s, t)
    xo = dict(zip(keys, xl))
    yo = dict(zip(keys, yl))
    if cert.kind == "leap":
        if cert.overpass is None or cert.overpass.vset not in xo:
            return fail("leap without an overpass from its support")
        if t.order < 2:
            return fail("leap needs order at least 2")
        over = cert.overpass.vset
        sides = _gap_side(xo, yo, [k for k in keys if k != over], over)
        if set(sides) != {"A", "B"}:
            return fail("overpass does not run between the two gaps of the remaining transaction")
    else:
        if len(cert.crosses) != 2 or t.order < 5:
            return fail("doublecross needs two crosses and order at least 5")
        special = [p.vset for pair in cert.crosses for p in pair]
        if len(set(special)) != 4 or any(k not in xo for k in special):
            return fail("doublecross paths are not four distinct support paths")
        rest = [k for k in keys if k not in special]
        gaps = []
        for a, b in cert.crosses:
            if not _crosses(s, a, b):
                return fail("a doublecross pair is not a cross")
            sides = set(_gap_side(xo, yo, rest, a.vset)) | set(_gap_side(xo, yo, rest, b.vset))
            if len(sides) != 1 or "-" in sides:
                return fail("a doublecross pair does not sit in a single gap")
            gaps.append(sides.pop())
        if sorted(gaps) != ["A", "B"]:
            return fail("both crosses sit in the same gap")
    if not is_crooked(s, t):
        return fail("certificate support is not crooked")
    return PASS


def _sweep(ids: List[int], xo: List[int], yo: List[int], sgn: int) -> SweepStep:
    kx = lambda i: sgn * xo[i]  # noqa: E731
    ky = lambda i: sgn * yo[i]  # noqa: E731
    anchor = min(ids, key=ky)
    p_x = tuple(i for i in ids if i != anchor and kx(i) > kx(anchor))
    if not p_x:
        return SweepStep(anchor, None, (), ())
    partner = min(p_x, key=ky)
    p_y = tuple(i for i in ids if i != partner and ky(i) <= ky(partner))
    return SweepStep(anchor, partner, p_x, p_y)


def leap_or_doublecross(s: Society, t: Transaction, ell: int, d: int) -> CrookedCertificate:
    """A leap of order at least ell or a doublecross of order at least d+4 inside a crooked transaction.

    The sweep starts at the omega-smallest end of Y; the second pass runs
    from the opposite end of what is left.
    """
    require_input(ell >= 2 and d >= 1, f"need ell >= 2 and d >= 1, got ell={ell}, d={d}")
    need = 4 * (ell - 2) + d
    require_input(t.order >= need, f"transaction of order {t.order} is below 4(ell-2)+d = {need}")
    require_input(is_crooked(s, t), "transaction is not crooked")
    xo, yo = _offsets(s, t)
    paths = t.paths.paths
    sgn = 1 if min(t.y) == t.y[0] else -1
    ids = list(range(t.order))
    steps: List[SweepStep] = []
    crosses: List[Tuple[Path, Path]] = []
    for _ in range(2):
        step = _sweep(ids, xo, yo, sgn)
        while step.partner is None and crosses:
            ids.remove(step.anchor)
            if not ids:
                raise ContractError("second sweep ran out of paths")
            step = _sweep(ids, xo, yo, sgn)
        if step.partner is None:
            raise ContractError("crooked transaction with a peripheral extreme path")
        steps.append(step)
        for over, fam in ((step.anchor, step.p_x), (step.partner, step.p_y)):
            if len(fam) >= ell - 1:
                support = _sub(s, t, (over, *fam))
                cert = CrookedCertificate("leap", support, paths[over], (), tuple(steps))
                verify_crooked_certificate(s, cert).require()
                log.debug("leap of order %d", support.order)
                return cert
        crosses.append((paths[step.anchor], paths[step.partner]))
        gone = set(step.p_x) | set(step.p_y)
        ids = [i for i in ids if i not in gone]
        sgn = -sgn
    if len(ids) < d:
        raise ContractError(f"doublecross keeps only {len(ids)} middle paths, below {d}")
    special = [paths.index(p) for pair in crosses for p in pair]
    support = _sub(s, t, ids + special)
    cert = CrookedCertificate("doublecross", support, None, tuple(crosses), tuple(steps))
    verify_crooked_certificate(s, cert).require()
    log.debug("doublecross of order %d", support.order)
    return cert
