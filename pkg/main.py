"""Command-line front end: gen, run, verify and export."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import uuid
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from veriwall.config import Constants, load_config, load_constants
from veriwall.errors import InputError, VerificationFailure, VeriwallError
from veriwall.families import GENERATORS, from_model, generate, positional_params, to_model
from veriwall.io import (
    CertificateModel,
    InstanceModel,
    RunManifest,
    digest,
    dumps,
    file_digest,
    manifest_path,
    read_model,
    to_dot,
    write_model,
)
from veriwall.pipelines import PIPELINES, run_pipeline, verify_certificate
from veriwall.storage import init_db, log_event, open_run

load_dotenv()

log = logging.getLogger("veriwall")

DEFAULTS = ("out", "jobs", "seed", "log_level", "budget_vertices")


def parse_param(raw: str) -> Tuple[str, Any]:
    """`key=value` with a JSON value; bare words stay strings."""
    key, sep, value = raw.partition("=")
    if not sep or not key:
        raise InputError(f"expected key=value, got {raw!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="veriwall", description="Constructive wall and minor certificates at desk scale.")
    parser.add_argument("--config", type=Path, default=None, help="settings document (default: config.json)")
    parser.add_argument("--constants", type=Path, default=None, help="key=value constants file")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=None, help="workers for independent instance files")
    parser.add_argument("--budget-vertices", type=int, default=None, help="vertex cap of the cross search")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance")
    gen.add_argument("family", choices=sorted(GENERATORS))
    gen.add_argument("values", nargs="*", help="positional size parameters of the family")
    gen.add_argument("--handles", type=int, default=None)
    gen.add_argument("--crosscaps", type=int, default=None)
    gen.add_argument("--vortices", type=int, default=None)
    gen.add_argument("--param", action="append", default=[], metavar="KEY=JSON")
    gen.add_argument("-o", "--output", type=Path, default=None)

    run = sub.add_parser("run", help="run a pipeline on instance files")
    run.add_argument("pipeline", choices=sorted(PIPELINES))
    run.add_argument("instances", nargs="+", type=Path)
    run.add_argument("--param", action="append", default=[], metavar="KEY=JSON")

    verify = sub.add_parser("verify", help="check a certificate against its instance")
    verify.add_argument("certificate", type=Path)
    verify.add_argument("instance", type=Path)

    export = sub.add_parser("export", help="convert an instance or certificate")
    export.add_argument("input", type=Path)
    export.add_argument("--format", choices=["dot", "json"], default="json")
    export.add_argument("-o", "--output", type=Path, default=None)
    return parser


def settings(args: argparse.Namespace) -> argparse.Namespace:
    cfg = load_config(args.config)
    args.budget_flag = args.budget_vertices is not None
    for key in DEFAULTS:
        if getattr(args, key, None) is None:
            setattr(args, key, cfg.get(key))
    args.out = Path(args.out or "out")
    args.jobs = max(1, int(args.jobs or 1))
    args.seed = int(args.seed or 0)
    return args


def constants_for(args: argparse.Namespace) -> Constants:
    """Constants file, then --budget-vertices; the config.json budget only applies without a file."""
    constants = load_constants(args.constants)
    from_config = args.constants is None and args.budget_vertices is not None
    if (args.budget_flag or from_config) and int(args.budget_vertices) != constants.budget_vertices:
        constants = constants.with_overrides(budget_vertices=args.budget_vertices)
    return constants


# gen


def cmd_gen(args: argparse.Namespace) -> int:
    params: Dict[str, Any] = positional_params(args.family, args.values)
    for flag in ("handles", "crosscaps", "vortices"):
        if getattr(args, flag) is not None:
            params[flag] = getattr(args, flag)
    params.update(parse_param(p) for p in args.param)
    if args.family == "random":
        params.setdefault("seed", args.seed)
    inst = generate(args.family, params)
    name = "-".join([args.family, *(str(v) for v in args.values)]) + ".json"
    path = write_model(args.output or args.out / name, to_model(inst))
    print(path)
    return 0


# run


def _run_file(job: Tuple[str, str, Dict[str, Any], Dict[str, Any], str, int, Optional[str]]) -> Dict[str, Any]:
    pipeline, instance, params, echo, out, seed, constants_file = job
    started = time.perf_counter()
    constants = Constants(**{k: v for k, v in echo.items() if k in Constants.model_fields})
    model = read_model(instance, InstanceModel)
    cert = run_pipeline(pipeline, from_model(model), params, constants, digest(model))
    target = Path(out) / f"{Path(instance).stem}.{pipeline}.json"
    write_model(target, cert)
    inputs = {instance: file_digest(instance)}
    if constants_file:
        inputs[constants_file] = file_digest(constants_file)
    manifest = RunManifest(
        run_id=uuid.uuid4().hex[:12],
        command=f"run {pipeline}",
        inputs=inputs,
        constants=cert.constants,
        seed=seed,
        outcome=cert.outcome,
        certificate=str(target),
        wall_clock=round(time.perf_counter() - started, 6),
    )
    write_model(manifest_path(target), manifest)
    return manifest.model_dump(mode="json")


def cmd_run(args: argparse.Namespace) -> int:
    constants = constants_for(args)
    params = dict(parse_param(p) for p in args.param)
    constants_file = str(args.constants) if args.constants else None
    log.info("run %s on %d instance file(s) with %d job(s)", args.pipeline, len(args.instances), args.jobs)
    jobs = [
        (args.pipeline, str(path), params, constants.echo(), str(args.out), args.seed, constants_file)
        for path in args.instances
    ]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            manifests: List[Dict[str, Any]] = list(pool.map(_run_file, jobs))
    else:
        manifests = [_run_file(job) for job in jobs]
    init_db()
    for m in manifests:
        open_run(m["run_id"], m["command"])
        log_event(m["run_id"], "start", {"inputs": m["inputs"], "seed": m["seed"]})
        log_event(m["run_id"], "outcome", {"outcome": m["outcome"], "certificate": m["certificate"]})
        log_event(m["run_id"], "manifest", m)
        print(f"{m['outcome']}\t{m['certificate']}")
    return 0


# verify


def cmd_verify(args: argparse.Namespace) -> int:
    cert = read_model(args.certificate, CertificateModel)
    model = read_model(args.instance, InstanceModel)
    c = verify_certificate(from_model(model), cert, digest(model))
    if not c:
        raise VerificationFailure(c.reason)
    print("ok")
    return 0


# export


def cmd_export(args: argparse.Namespace) -> int:
    try:
        raw = json.loads(args.input.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {args.input}: {exc}") from exc
    is_cert = isinstance(raw, dict) and "outcome" in raw
    if args.format == "json":
        text = dumps(read_model(args.input, CertificateModel if is_cert else InstanceModel))
    else:
        if is_cert:
            raise InputError("DOT export takes an instance file")
        inst = from_model(read_model(args.input, InstanceModel))
        text = to_dot(inst.graph, inst.coords, inst.highlight())
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(text)
        print(args.output)
    return 0


COMMANDS = {"gen": cmd_gen, "run": cmd_run, "verify": cmd_verify, "export": cmd_export}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args = settings(args)
        logging.basicConfig(level=args.log_level or "WARNING", format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except VeriwallError as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
