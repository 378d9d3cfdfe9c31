"""JSON wire formats for instances, certificates and run manifests, plus DOT export."""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path as FsPath
from typing import Annotated, Any, Dict, Hashable, Iterable, List, Literal, Optional, Sequence, Tuple, Type, TypeVar, Union

import networkx as nx
from networkx.drawing.nx_pydot import to_pydot
from pydantic import BaseModel, Field, ValidationError

from veriwall.errors import InputError
from veriwall.graph import Graph, Linkage, Path, norm_edge
from veriwall.mesh import LabeledMesh

log = logging.getLogger(__name__)

OutcomeTag = Literal["model", "blocker", "flat", "transaction", "decomposition", "config"]


def _key(c: Hashable) -> List[Union[int, str]]:
    return list(c) if isinstance(c, tuple) else [c]


def _coord(raw: Sequence[Union[int, str]]) -> Hashable:
    return tuple(raw) if len(raw) != 1 else raw[0]


class GraphModel(BaseModel):
    n: int
    edges: List[Tuple[int, int]] = []
    labels: Dict[int, str] = {}

    @classmethod
    def from_graph(cls, g: Graph) -> "GraphModel":
        return cls(n=g.n, edges=g.edge_list(), labels=dict(sorted(g.labels.items())))

    def to_graph(self) -> Graph:
        return Graph(self.n, self.edges, self.labels)


class MeshModel(BaseModel):
    kind: str = "mesh"
    vertical: List[List[int]]
    horizontal: List[List[int]]
    coords: Dict[int, List[Union[int, str]]] = {}

    @classmethod
    def from_mesh(cls, m: LabeledMesh) -> "MeshModel":
        return cls(
            kind=m.kind,
            vertical=[list(p) for p in m.vertical],
            horizontal=[list(q) for q in m.horizontal],
            coords={v: _key(c) for v, c in sorted(m.coords.items())},
        )

    def to_mesh(self, g: Graph) -> LabeledMesh:
        return LabeledMesh(
            g,
            tuple(Path(p) for p in self.vertical),
            tuple(Path(q) for q in self.horizontal),
            self.kind,  # type: ignore[arg-type]
            {v: _coord(c) for v, c in self.coords.items()},
        )


class InstanceModel(BaseModel):
    """A generated (or hand-written) host graph.

    `family` and `params` are the generator recipe; loading regenerates the
    instance from them so that surface-wall bookkeeping survives the file.
    The family "graph" is taken verbatim.
    """

    family: str = "graph"
    params: Dict[str, Any] = {}
    graph: GraphModel
    mesh: Optional[MeshModel] = None
    extra: Dict[str, Any] = {}


# certificate payloads


class LinkagePayload(BaseModel):
    kind: Literal["linkage"] = "linkage"
    paths: List[List[int]]

    def linkage(self) -> Linkage:
        return Linkage(self.paths)


class ModelPayload(BaseModel):
    kind: Literal["model"] = "model"
    h: GraphModel
    branch_sets: Dict[int, List[int]]
    origin: str = ""


class JumpsPayload(BaseModel):
    kind: Literal["jumps"] = "jumps"
    members: List[int]
    paths: List[List[int]]
    hosts: List[Tuple[int, int]]


class ABlockerPayload(BaseModel):
    kind: Literal["a-blocker"] = "a-blocker"
    z: List[int]


class JumpBlockerPayload(BaseModel):
    kind: Literal["jump-blocker"] = "jump-blocker"
    z: List[int]
    y: List[int]


class CandidateModel(BaseModel):
    index: int
    columns: Tuple[int, int]
    rows: Tuple[int, int]
    omega: Tuple[int, int, int, int]
    vertices: List[int]
    cross: Optional[Tuple[List[int], List[int]]] = None


class FlatPayload(BaseModel):
    kind: Literal["flat"] = "flat"
    z: List[int]
    submesh: MeshModel
    candidates: List[CandidateModel]
    selected: int


class TransactionPayload(BaseModel):
    kind: Literal["transaction"] = "transaction"
    paths: List[List[int]]
    x: Tuple[int, int]
    y: Tuple[int, int]
    depth: int


class DecompositionPayload(BaseModel):
    kind: Literal["decomposition"] = "decomposition"
    labels: List[int]
    bags: List[List[int]]
    depth: int


class ConfigPayload(BaseModel):
    kind: Literal["config"] = "config"
    omega: List[int]
    nest: List[List[int]]
    radial: List[List[int]]
    transactions: List[List[List[int]]]
    kinds: List[str]


class NestPayload(BaseModel):
    kind: Literal["nest"] = "nest"
    cycles: List[List[int]]


Payload = Annotated[
    Union[
        LinkagePayload,
        ModelPayload,
        JumpsPayload,
        ABlockerPayload,
        JumpBlockerPayload,
        FlatPayload,
        TransactionPayload,
        DecompositionPayload,
        ConfigPayload,
        NestPayload,
    ],
    Field(discriminator="kind"),
]

OUTCOME_OF: Dict[str, OutcomeTag] = {
    "linkage": "model",
    "model": "model",
    "jumps": "model",
    "a-blocker": "blocker",
    "jump-blocker": "blocker",
    "flat": "flat",
    "transaction": "transaction",
    "decomposition": "decomposition",
    "config": "config",
    "nest": "config",
}


class CertificateModel(BaseModel):
    outcome: OutcomeTag
    pipeline: str
    instance: str = ""
    params: Dict[str, Any] = {}
    constants: Dict[str, Any] = {}
    payload: Optional[Payload] = None


class RunManifest(BaseModel):
    run_id: str
    command: str
    inputs: Dict[str, str]
    constants: Dict[str, Any]
    seed: int
    outcome: Optional[OutcomeTag] = None
    certificate: Optional[str] = None
    wall_clock: float = 0.0


# files

M = TypeVar("M", bound=BaseModel)


def dumps(model: BaseModel) -> str:
    """Canonical text of a model: sorted keys, two-space indent, trailing newline."""
    return json.dumps(model.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def digest(model: BaseModel) -> str:
    return hashlib.sha256(dumps(model).encode()).hexdigest()


def file_digest(path: str | FsPath) -> str:
    return hashlib.sha256(FsPath(path).read_bytes()).hexdigest()


def write_model(path: str | FsPath, model: BaseModel) -> FsPath:
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(model))
    log.debug("wrote %s", path)
    return path


def read_model(path: str | FsPath, cls: Type[M]) -> M:
    try:
        text = FsPath(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return cls.model_validate_json(text)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(x) for x in first["loc"])
        raise InputError(f"{path}: {where or 'document'}: {first['msg']}") from exc


def manifest_path(certificate: str | FsPath) -> FsPath:
    p = FsPath(certificate)
    return p.with_name(p.name.removesuffix(".json") + ".manifest.json")


# DOT


def positions(coords: Dict[int, Hashable]) -> Dict[int, Tuple[int, int]]:
    """Drawing positions (x, y) from coordinate keys.

    The last two integers of a key are (row, column); a third integer in
    front (the segment of a surface wall) shifts the column by whole
    segment widths.
    """
    ints = {v: [x for x in (c if isinstance(c, tuple) else (c,)) if isinstance(x, int)] for v, c in coords.items()}
    width = max((k[-1] for k in ints.values() if len(k) >= 2), default=0) + 1
    out = {}
    for v, k in ints.items():
        if len(k) < 2:
            continue
        row, col = k[-2], k[-1]
        if len(k) >= 3:
            col += k[-3] * width
        out[v] = (col, -row)
    return out


def to_dot(g: Graph, coords: Optional[Dict[int, Hashable]] = None, highlight: Iterable[Sequence[int]] = ()) -> str:
    """DOT text of g; coordinate keys become pinned positions, highlighted edges are drawn red."""
    nxg: nx.Graph = g.to_networkx()
    for v, (x, y) in positions(coords or {}).items():
        nxg.nodes[v]["pos"] = f"{x},{y}!"
    for v in nxg.nodes:
        nxg.nodes[v].setdefault("label", str(v))
    red = {norm_edge(*e) for e in highlight}
    for u, v in nxg.edges:
        if norm_edge(u, v) in red:
            nxg.edges[u, v]["color"] = "red"
            nxg.edges[u, v]["penwidth"] = "2"
    dot = to_pydot(nxg)
    dot.set_name("veriwall")
    return dot.to_string()
