"""Pipelines behind `run` and the validators behind `verify`.

Every pipeline turns an instance and its parameters into a certificate
payload; its verifier re-checks a payload against the instance with the
polynomial validators of the owning module.
"""

from __future__ import annotations

import logging
from typing import Any, Callable, Dict, List, Optional, Tuple

from veriwall.apaths import (
    Blocker,
    JumpBlocker,
    SetFamily,
    blocks_a_paths,
    gallai_pack_or_block,
    is_jump,
    pp_jumps,
    verify_a_linkage,
    verify_jump_blocker,
)
from veriwall.config import Constants
from veriwall.errors import PASS, Check, InputError, fail, require_input
from veriwall.families import Instance
from veriwall.flatten import CandidateTranscript, FlatCertificate, flat_mesh_or_kt, verify_flat_certificate
from veriwall.graph import Linkage, Path
from veriwall.io import (
    OUTCOME_OF,
    ABlockerPayload,
    CandidateModel,
    CertificateModel,
    ConfigPayload,
    DecompositionPayload,
    FlatPayload,
    GraphModel,
    JumpBlockerPayload,
    JumpsPayload,
    LinkagePayload,
    MeshModel,
    ModelPayload,
    NestPayload,
    TransactionPayload,
)
from veriwall.mesh import LabeledMesh, mesh_from_surface_wall
from veriwall.minors import (
    MinorModel,
    complete_graph,
    kt_from_crossed_grid,
    kt_from_jumps,
    kt_in_extended_wall,
    make_crossed_grid,
    verify_controlled,
    verify_model,
)
from veriwall.rendition import (
    Nest,
    SurfaceConfiguration,
    dissolve_crosscap,
    is_cozy,
    make_nest_cozy,
    nest_from_rows,
    rendition_from_annulus_wall,
    verify_configuration,
    verify_nest,
    wall_to_config,
)
from veriwall.society import (
    LinearDecomposition,
    Society,
    make_transaction,
    society_depth,
    society_from_mesh,
    transaction_or_linear_decomposition,
    verify_linear_decomposition,
)

log = logging.getLogger(__name__)

Params = Dict[str, Any]


def _int(params: Params, key: str, default: Optional[int] = None) -> int:
    if key not in params:
        require_input(default is not None, f"missing parameter {key}")
        return default  # type: ignore[return-value]
    try:
        return int(params[key])
    except (TypeError, ValueError):
        raise InputError(f"parameter {key} must be an integer, got {params[key]!r}") from None


def _sets(params: Params, key: str) -> List[List[int]]:
    raw = params.get(key)
    require_input(isinstance(raw, list) and all(isinstance(x, list) for x in raw), f"parameter {key} must be a list of vertex lists")
    return raw


def _mesh(inst: Instance) -> LabeledMesh:
    require_input(inst.mesh is not None, f"{inst.family} instance carries no mesh")
    return inst.mesh  # type: ignore[return-value]


def _society(inst: Instance) -> Society:
    if "omega" in inst.extra:
        return Society(inst.graph, inst.extra["omega"])
    require_input(inst.mesh is not None, "instance has neither omega nor a mesh")
    return society_from_mesh(inst.mesh)  # type: ignore[arg-type]


def _paths(lk: Linkage) -> List[List[int]]:
    return [list(p) for p in lk]


def _model_payload(m: MinorModel) -> ModelPayload:
    return ModelPayload(
        h=GraphModel.from_graph(m.h),
        branch_sets={k: sorted(v) for k, v in sorted(m.branch_sets.items())},
        origin=m.origin,
    )


def _model(pl: ModelPayload) -> MinorModel:
    return MinorModel(pl.h.to_graph(), {k: frozenset(v) for k, v in pl.branch_sets.items()}, pl.origin)


def _check_kt(inst: Instance, pl: Any, t: int, meshes: List[LabeledMesh], order: Optional[int] = None) -> Check:
    if not isinstance(pl, ModelPayload):
        return fail(f"expected a minor model, got {pl.kind}")
    m = _model(pl)
    c = verify_model(inst.graph, complete_graph(t), m)
    if not c:
        return c
    for mesh in meshes:
        c = verify_controlled(inst.graph, mesh, m, order or t)
        if not c:
            return fail(f"not controlled: {c.reason}")
    return PASS


# gallai


def run_gallai(inst: Instance, p: Params, constants: Constants) -> Any:
    fam = SetFamily(_sets(p, "sets"))
    res = gallai_pack_or_block(inst.graph, fam, _int(p, "q"))
    if isinstance(res, Blocker):
        return ABlockerPayload(z=sorted(res.z))
    return LinkagePayload(paths=_paths(res))


def verify_gallai(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    fam = SetFamily(_sets(p, "sets"))
    q = _int(p, "q")
    if isinstance(pl, LinkagePayload):
        if len(pl.paths) != q:
            return fail(f"linkage has order {len(pl.paths)}, expected {q}")
        return verify_a_linkage(inst.graph, fam, pl.linkage())
    if isinstance(pl, ABlockerPayload):
        if len(pl.z) >= 4 * q:
            return fail(f"|Z|={len(pl.z)} breaks the bound 4q={4 * q}")
        return blocks_a_paths(inst.graph, fam, pl.z)
    return fail(f"unexpected payload {pl.kind}")


# jumps of a subgraph sequence


def run_ppjumps(inst: Instance, p: Params, constants: Constants) -> Any:
    res = pp_jumps(inst.graph, _sets(p, "seq"), _int(p, "d"), _int(p, "q"))
    if isinstance(res, JumpBlocker):
        return JumpBlockerPayload(z=sorted(res.z), y=sorted(res.y))
    return JumpsPayload(members=list(res.members), paths=_paths(res.paths), hosts=[list(h) for h in res.hosts])


def verify_ppjumps(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    seq = [frozenset(s) for s in _sets(p, "seq")]
    d, q = _int(p, "d"), _int(p, "q")
    if isinstance(pl, JumpBlockerPayload):
        if len(pl.z) >= 8 * q:
            return fail(f"|Z|={len(pl.z)} breaks the bound 8q={8 * q}")
        if len(pl.y) >= 16 * (d + 2) * q:
            return fail(f"|Y|={len(pl.y)} breaks the bound 16(d+2)q={16 * (d + 2) * q}")
        return verify_jump_blocker(inst.graph, seq, JumpBlocker(frozenset(pl.z), frozenset(pl.y)), both=True)
    if isinstance(pl, JumpsPayload):
        if any(not 0 <= i < len(seq) for i in pl.members) or pl.members != sorted(set(pl.members)):
            return fail("members are not a subsequence")
        sub = [seq[i] for i in pl.members]
        lk = Linkage(pl.paths)
        if lk.order != q:
            return fail(f"{lk.order} jumps, expected {q}")
        for path in lk:
            if not is_jump(sub, path):
                return fail(f"path {list(path)} is not a jump of the subsequence")
        return verify_a_linkage(inst.graph, SetFamily(sub[i] | sub[i + 1] for i in range(len(sub) - 1)), lk)
    return fail(f"unexpected payload {pl.kind}")


# flat mesh


def _flat_payload(cert: FlatCertificate) -> FlatPayload:
    cands = [
        CandidateModel(
            index=c.index,
            columns=c.columns,
            rows=c.rows,
            omega=c.omega,
            vertices=sorted(c.vertices),
            cross=(list(c.cross[0]), list(c.cross[1])) if c.cross is not None else None,
        )
        for c in cert.candidates
    ]
    return FlatPayload(z=sorted(cert.z), submesh=MeshModel.from_mesh(cert.submesh), candidates=cands, selected=cert.selected)


def _flat(inst: Instance, pl: FlatPayload, constants: Constants) -> FlatCertificate:
    cands = tuple(
        CandidateTranscript(
            c.index,
            c.columns,
            c.rows,
            c.omega,
            frozenset(c.vertices),
            (Path(c.cross[0]), Path(c.cross[1])) if c.cross is not None else None,
        )
        for c in pl.candidates
    )
    return FlatCertificate(frozenset(pl.z), pl.submesh.to_mesh(inst.graph), cands, pl.selected, constants.echo())


def run_flatmesh(inst: Instance, p: Params, constants: Constants) -> Any:
    res = flat_mesh_or_kt(inst.graph, _mesh(inst), _int(p, "t"), _int(p, "n_prime"), constants)
    return _model_payload(res) if isinstance(res, MinorModel) else _flat_payload(res)


def verify_flatmesh(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    t = _int(p, "t")
    if isinstance(pl, FlatPayload):
        return verify_flat_certificate(inst.graph, _flat(inst, pl, constants), t, constants)
    return _check_kt(inst, pl, t, [_mesh(inst)])


# K_t builders


def _jumps(inst: Instance) -> Linkage:
    require_input("jumps" in inst.extra, f"{inst.family} instance lists no jumps")
    return Linkage(inst.extra["jumps"])


def run_ktjumps(inst: Instance, p: Params, constants: Constants) -> Any:
    return _model_payload(kt_from_jumps(inst.graph, _mesh(inst), _jumps(inst), _int(p, "t")))


def verify_ktjumps(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    return _check_kt(inst, pl, _int(p, "t"), [_mesh(inst)])


def _crosses(inst: Instance) -> List[Tuple[Path, Path]]:
    return [(Path(a), Path(b)) for a, b in inst.extra["crosses"]]


def run_ktcrosses(inst: Instance, p: Params, constants: Constants) -> Any:
    t = _int(p, "t")
    if inst.family == "crossed-grid":
        cg, model = kt_from_crossed_grid(t)
        require_input(
            (cg.graph.n, cg.graph.edges) == (inst.graph.n, inst.graph.edges),
            f"instance is not the crossed grid with c={cg.c} and h={cg.h} that t={t} needs",
        )
        return _model_payload(model)
    require_input("crosses" in inst.extra, f"{inst.family} instance has neither a crossed grid nor planted crosses")
    return _model_payload(kt_in_extended_wall(inst.graph, _mesh(inst), _crosses(inst), t))


def verify_ktcrosses(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    t = _int(p, "t")
    if inst.family == "crossed-grid":
        cg = make_crossed_grid(_int(inst.params, "c"), _int(inst.params, "h"))
        grids = list(cg.underlying())
        # the t=5 grid has 4 columns, so control is checked at the grid order
        return _check_kt(inst, pl, t, grids, min(t, grids[0].w, grids[0].h))
    return _check_kt(inst, pl, t, [mesh_from_surface_wall(_mesh(inst))])


# surfaces


def _config_payload(cfg: SurfaceConfiguration) -> ConfigPayload:
    return ConfigPayload(
        omega=list(cfg.society.omega),
        nest=[list(c) for c in cfg.nest.cycles],
        radial=_paths(cfg.radial),
        transactions=[_paths(lk) for lk in cfg.transactions],
        kinds=list(cfg.kinds),
    )


def _config(inst: Instance, pl: ConfigPayload) -> SurfaceConfiguration:
    return SurfaceConfiguration(
        Society(inst.graph, pl.omega),
        Nest(tuple(tuple(c) for c in pl.nest)),
        Linkage(pl.radial),
        tuple(Linkage(lk) for lk in pl.transactions),
        tuple(pl.kinds),  # type: ignore[arg-type]
    )


def _wall_config(inst: Instance, p: Params) -> SurfaceConfiguration:
    return wall_to_config(_mesh(inst), _int(p, "k") if "k" in p else None)


def run_dissolve(inst: Instance, p: Params, constants: Constants) -> Any:
    cfg = _wall_config(inst, p)
    out = dissolve_crosscap(cfg, _int(p, "i"), _int(p, "a0"), _int(p, "b0"), _int(p, "c0"))
    return _config_payload(out)


def verify_dissolve(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    if not isinstance(pl, ConfigPayload):
        return fail(f"expected a configuration, got {pl.kind}")
    cfg = _config(inst, pl)
    c = verify_configuration(cfg)
    if not c:
        return c
    before = _wall_config(inst, p)
    if (cfg.handles, cfg.crosscaps) != (before.handles - 1, before.crosscaps + 2):
        return fail(f"expected {before.handles - 1} handles and {before.crosscaps + 2} crosscaps")
    used = 2 * _int(p, "a0") + 2 * _int(p, "b0") + _int(p, "c0")
    if cfg.nest.order != before.nest.order - used:
        return fail(f"nest of order {cfg.nest.order}, expected {before.nest.order - used}")
    return PASS


def _cozy_rows(inst: Instance, p: Params) -> List[int]:
    return list(p["rows"]) if "rows" in p else list(range(1, _mesh(inst).h))


def run_cozy(inst: Instance, p: Params, constants: Constants) -> Any:
    mesh = _mesh(inst)
    r = rendition_from_annulus_wall(mesh, inst.graph)
    cozy = make_nest_cozy(r, nest_from_rows(mesh, _cozy_rows(inst, p)))
    return NestPayload(cycles=[list(c) for c in cozy.cycles])


def verify_cozy(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    if not isinstance(pl, NestPayload):
        return fail(f"expected a nest, got {pl.kind}")
    r = rendition_from_annulus_wall(_mesh(inst), inst.graph)
    nest = Nest(tuple(tuple(c) for c in pl.cycles))
    if nest.order != len(_cozy_rows(inst, p)):
        return fail(f"nest of order {nest.order}, expected {len(_cozy_rows(inst, p))}")
    c = verify_nest(r, nest)
    return c if not c else is_cozy(r, nest)


# societies


def run_transaction_duality(inst: Instance, p: Params, constants: Constants) -> Any:
    s = _society(inst)
    res = transaction_or_linear_decomposition(s, _int(p, "p"))
    depth = society_depth(s)
    if isinstance(res, LinearDecomposition):
        return DecompositionPayload(labels=list(res.labels), bags=[sorted(b) for b in res.bags], depth=depth)
    return TransactionPayload(paths=_paths(res.paths), x=res.x, y=res.y, depth=depth)


def verify_transaction_duality(inst: Instance, p: Params, pl: Any, constants: Constants) -> Check:
    s = _society(inst)
    order = _int(p, "p")
    if isinstance(pl, TransactionPayload):
        tr = make_transaction(s, pl.paths)
        if tr.order != order:
            return fail(f"transaction of order {tr.order}, expected {order}")
        if (tr.x, tr.y) != (tuple(pl.x), tuple(pl.y)):
            return fail("end segments do not match the paths")
    elif isinstance(pl, DecompositionPayload):
        rep = verify_linear_decomposition(s, LinearDecomposition(tuple(pl.labels), tuple(frozenset(b) for b in pl.bags)))
        if not rep.valid:
            return fail(rep.violation)
        if rep.adhesion >= order:
            return fail(f"adhesion {rep.adhesion} is not below p={order}")
    else:
        return fail(f"unexpected payload {pl.kind}")
    depth = society_depth(s)
    return PASS if pl.depth == depth else fail(f"reported depth {pl.depth}, society has depth {depth}")


Runner = Callable[[Instance, Params, Constants], Any]
Verifier = Callable[[Instance, Params, Any, Constants], Check]

PIPELINES: Dict[str, Tuple[Runner, Verifier]] = {
    "gallai": (run_gallai, verify_gallai),
    "ppjumps": (run_ppjumps, verify_ppjumps),
    "flatmesh": (run_flatmesh, verify_flatmesh),
    "ktjumps": (run_ktjumps, verify_ktjumps),
    "ktcrosses": (run_ktcrosses, verify_ktcrosses),
    "dissolve": (run_dissolve, verify_dissolve),
    "cozy": (run_cozy, verify_cozy),
    "transaction-duality": (run_transaction_duality, verify_transaction_duality),
}


def run_pipeline(name: str, inst: Instance, params: Params, constants: Constants, instance_digest: str = "") -> CertificateModel:
    if name not in PIPELINES:
        raise InputError(f"unknown pipeline {name!r}; choose from {', '.join(PIPELINES)}")
    merged = {**inst.extra, **params}
    payload = PIPELINES[name][0](inst, merged, constants)
    log.info("%s on %s: %s", name, inst.family, payload.kind)
    return CertificateModel(
        outcome=OUTCOME_OF[payload.kind],
        pipeline=name,
        instance=instance_digest,
        params=params,
        constants=constants.echo(),
        payload=payload,
    )


def verify_certificate(inst: Instance, cert: CertificateModel, instance_digest: str = "") -> Check:
    """First violation of the certificate against the instance, or PASS.

    The constants echoed into the certificate are the ones it is checked
    against.
    """
    if cert.instance and instance_digest and cert.instance != instance_digest:
        return fail("certificate was issued for another instance")
    if cert.payload is None:
        return PASS if inst.graph.n == 0 else fail("certificate carries no payload")
    if OUTCOME_OF[cert.payload.kind] != cert.outcome:
        return fail(f"outcome {cert.outcome} does not match a {cert.payload.kind} payload")
    if cert.pipeline not in PIPELINES:
        return fail(f"unknown pipeline {cert.pipeline!r}")
    echoed = {k: v for k, v in cert.constants.items() if k in Constants.model_fields}
    try:
        constants = Constants(**echoed)
        return PIPELINES[cert.pipeline][1](inst, {**inst.extra, **cert.params}, cert.payload, constants)
    except (ValueError, KeyError) as exc:
        return fail(str(exc))
