"""Command-line entry point.

Exit status: 0 on success, 1 on a domain error (validation, failed run, gate
exhausted, digest mismatch, ...), 2 on a usage error.  With ``--json`` the
result goes to stdout as one JSON document; diagnostics always go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .errors import AurakitError

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- helpers --------------------------------------------------------------------

def _emit(args, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    elif human:
        print(human)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def _pairs(items, what: str) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"{what} must look like key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v
    return out


def _registry(args):
    from .registry import Registry
    return Registry(getattr(args, "registry", None))


def _resolve(ref: str, args):
    """A skill directory path, or name[@range] from the registry or the builtins."""
    from .registry import make_resolver
    from .skill.model import load_artifact
    p = Path(ref)
    if p.is_dir():
        return load_artifact(p)
    return make_resolver(_registry(args))(ref)


def _limits(args):
    from .runtime import ExecutionLimits
    raw = _pairs(args.limits, "--limits")
    try:
        vals = {k: int(v) for k, v in raw.items()}
        return ExecutionLimits(**vals)
    except TypeError as exc:
        raise UsageError(f"unknown limit: {exc}") from None
    except ValueError as exc:
        raise UsageError(f"bad --limits: {exc}") from None


# -- subcommands ----------------------------------------------------------------

def cmd_run(args) -> int:
    from .runtime import run_skill, trace_digest
    from .sim import create_sim
    from .skill.model import bind_parameters

    art = _resolve(args.skill, args)
    m = art.manifest
    if m.skill_kind != "type1":
        raise UsageError(f"{m.ref} is a type2 skill; use 'analyze'")
    model = args.sim or m.environment
    if model != m.environment:
        raise AurakitError(f"{m.ref} targets {m.environment}, not {model}")
    bound = bind_parameters(art, _pairs(args.param, "--param"))
    sim = create_sim(model, args.seed)
    workdir = Path(args.workdir) if args.workdir else None
    from .registry import make_resolver
    trace, datasets = run_skill(bound, sim, _limits(args), workdir, make_resolver(_registry(args)))
    digest = trace_digest(trace)
    if workdir is not None:
        log = workdir / "traces" / f"{m.name}-{args.seed}.jsonl"
        log.parent.mkdir(parents=True, exist_ok=True)
        log.write_text(trace.to_jsonl(), "utf-8")
    payload = {"skill": m.name, "version": m.version, "model": model, "seed": args.seed,
               "arguments": dict(bound.values), "status": trace.status, "error": trace.error,
               "trace_digest": digest, "terminal_digest": trace.terminal_digest, "events": len(trace.events),
               "total_time_ms": trace.total_time, "exports": sorted(datasets)}
    lines = [f"{m.ref} on {model} seed {args.seed}: {trace.status}",
             f"trace digest {digest}", f"simulated time {trace.total_time} ms, {len(trace.events)} events"]
    lines += [f"exported {p}" for p in sorted(datasets)]
    if trace.error:
        lines.append(f"error at step {trace.error['step']}: {trace.error['cause']}: {trace.error['message']}")
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if trace.ok else EXIT_DOMAIN


def read_feed(path) -> list:
    """CSV rows ``clock_ms,action,widget,value``; a header row is optional."""
    from .sim.base import action_from_dict
    feed = []
    with open(path, newline="", encoding="utf-8") as fh:
        for n, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].strip().startswith("#"):
                continue
            if n == 1 and row[0].strip().lower() in ("clock_ms", "clock"):
                continue
            row = [c.strip() for c in row] + [""] * (4 - len(row))
            try:
                feed.append((int(row[0]), action_from_dict({"action": row[1], "widget": row[2], "value": row[3]})))
            except ValueError as exc:
                raise AurakitError(f"{path}:{n}: {exc}") from None
    return feed


def cmd_record(args) -> int:
    from .runtime import record_session
    from .sim import create_sim
    sim = create_sim(args.sim, args.seed)
    feed = read_feed(args.feed)
    try:
        trace = record_session(sim, feed)
    except AurakitError as exc:
        idx = getattr(exc, "feed_index", None)
        where = f" (feed entry {idx})" if idx is not None else ""
        raise AurakitError(f"{type(exc).__name__}{where}: {exc}") from None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(trace.to_jsonl(), "utf-8")
    payload = {"model": trace.model, "seed": trace.seed, "steps": len(trace.steps),
               "terminal_digest": trace.terminal_digest, "out": str(out)}
    _emit(args, payload, f"recorded {len(trace.steps)} actions to {out}\nterminal digest {trace.terminal_digest}")
    return EXIT_OK


def cmd_abstract(args) -> int:
    from .runtime import AbstractionOptions, DemonstrationTrace, abstract_traces
    from .skill.model import SkillArtifact, SkillManifest, save_artifact
    from .dsl import format_program
    traces = [DemonstrationTrace.from_jsonl(Path(p).read_text("utf-8")) for p in args.traces]
    opts = AbstractionOptions(wait_threshold=args.wait_threshold, min_coverage=args.min_coverage)
    result = abstract_traces(traces, opts)
    manifest = SkillManifest(args.name, args.skill_version, "type1",
                             description=args.description or f"abstracted from {len(traces)} demonstration(s)",
                             parameters=result.params, environment=traces[0].model)
    out = save_artifact(SkillArtifact(manifest, result.program), args.out)
    payload = {"out": str(out), "name": manifest.name, "version": manifest.version, "model": manifest.environment,
               "parameters": [p.to_dict() for p in result.params], "arguments": list(result.arguments),
               "coverage": list(result.coverage), "program": format_program(result.program)}
    human = [f"wrote {manifest.ref} to {out}"]
    human += [f"  param {p.name}: {p.value_type} default {p.default!r}" for p in result.params]
    _emit(args, payload, "\n".join(human))
    return EXIT_OK


def cmd_analyze(args, extra) -> int:
    from .analysis.ops import OPS, call_op, run_pipeline, to_plain
    from .skill.model import Type2Pipeline, bind_values
    from .tabular import read_input, write_output

    inputs_raw = args.inputs or []
    params = {k: _parse_value(v) for k, v in _pairs(args.param, "--param").items()}
    opts = {}
    it = iter(extra)
    for tok in it:
        if not tok.startswith("--"):
            raise UsageError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, val = key.split("=", 1)
        else:
            val = next(it, None)
            if val is None:
                raise UsageError(f"option {tok} needs a value")
        opts[key] = _parse_value(val)

    target = args.target
    if target in OPS:
        op = OPS[target]
        kwargs = {**params, **opts}
        first = next(iter(op.coerce), None)
        for item in inputs_raw:
            if "=" in item:
                k, v = item.split("=", 1)
                kwargs[k] = read_input(v)
            elif first is not None and first not in kwargs:
                kwargs[first] = read_input(item)
            else:
                raise UsageError(f"cannot place input {item!r}; use name=path")
        result = {"result": call_op(target, **kwargs)}
    else:
        ins = {}
        for item in inputs_raw:
            if "=" not in item:
                raise UsageError("pipeline inputs are given as name=path")
            k, v = item.split("=", 1)
            ins[k] = read_input(v)
        p = Path(target)
        if p.is_file():
            pipeline = Type2Pipeline.from_dict(json.loads(p.read_text("utf-8")))
            values = {**params, **opts}
        else:
            art = _resolve(target, args)
            if art.manifest.skill_kind != "type2":
                raise UsageError(f"{art.manifest.ref} is not a type2 skill")
            pipeline = art.body
            values = bind_values(art.manifest, {**params, **opts})
        result = run_pipeline(pipeline, ins, values)
    if args.out:
        if len(result) == 1:
            write_output(next(iter(result.values())), args.out)
        else:
            write_output(result, args.out)
    payload = to_plain(result, array_limit=None if args.json else 32)
    _emit(args, payload, json.dumps(to_plain(result, array_limit=32), indent=2, default=str)
          if not args.out else f"wrote {args.out}")
    return EXIT_OK


def cmd_registry(args) -> int:
    from .registry import pack
    reg = _registry(args)
    action = args.action
    if action == "list":
        entries = reg.list_skills(kind=args.kind, prefix=args.prefix)
        payload = [{k: v for k, v in e.to_dict().items()} for e in entries]
        human = "\n".join(f"{e.name}@{e.version}  {e.skill_kind}  {e.digest[:12]}" for e in entries)
        _emit(args, {"root": str(reg.root), "entries": payload}, human or "(empty registry)")
    elif action == "import":
        if not args.source:
            raise UsageError("registry import needs a source")
        e = reg.import_artifact(args.source)
        _emit(args, e.to_dict(), f"installed {e.name}@{e.version} ({e.digest[:12]})")
    elif action == "pack":
        if not args.source or not args.out:
            raise UsageError("registry pack needs a directory and --out")
        data = pack(args.source)
        Path(args.out).write_bytes(data)
        from .registry import read_archive
        _, digest = read_archive(data)
        _emit(args, {"out": args.out, "bytes": len(data), "digest": digest}, f"packed {args.out} ({digest[:12]})")
    elif action == "resolve":
        if not args.source:
            raise UsageError("registry resolve needs a name")
        e = reg.resolve(args.source, args.requirement or "*")
        _emit(args, e.to_dict(), f"{e.name}@{e.version}")
    elif action == "audit":
        issues = reg.audit()
        _emit(args, {"ok": not issues, "issues": [str(i) for i in issues]},
              "registry ok" if not issues else "\n".join(str(i) for i in issues))
        return EXIT_OK if not issues else EXIT_DOMAIN
    return EXIT_OK


def cmd_sim(args) -> int:
    from .sim import load_descriptor, model_ids
    if args.action == "list":
        ids = model_ids()
        _emit(args, {"models": ids}, "\n".join(ids))
    else:
        if not args.model:
            raise UsageError("sim describe needs a model id")
        d = load_descriptor(args.model)
        lines = [f"{d.model} {d.version}: {d.title}", f"screens: {', '.join(d.screens)}"]
        for w in d.widgets.values():
            extra = f" {w.value_type}" if w.value_type else ""
            extra += f" {list(w.range)}" if w.range else ""
            extra += f" {list(w.options)}" if w.options else ""
            lines.append(f"  {w.id:24s} {w.kind:14s} {w.screen:10s}{extra}")
        lines.append("datasets: " + ", ".join(f"{s.id} ({s.payload_kind})" for s in d.datasets.values()))
        _emit(args, d.to_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_workflow(args) -> int:
    from .orchestrator import GateExhausted, StageError, run_workflow
    try:
        report = run_workflow(args.spec, _registry(args), workdir=args.workdir)
    except (StageError, GateExhausted) as exc:
        _emit(args, {**exc.report.to_dict(), "digest": exc.report.digest}, "")
        print(f"workflow {exc.report.status}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    lines = [f"workflow {report.name}: {report.status}"]
    for s in report.stages:
        gates = [a.gate for a in s.attempts if a.gate]
        g = f", gate values {[round(x['value'], 3) for x in gates]}" if gates else ""
        lines.append(f"  {s.id}: {s.skill}@{s.version}, {len(s.attempts)} attempt(s), {s.retries} retries{g}")
    lines.append(f"report {Path(args.workdir) / 'report.json'}")
    _emit(args, {**report.to_dict(), "digest": report.digest}, "\n".join(lines))
    return EXIT_OK if report.status == "success" else EXIT_DOMAIN


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output on stdout")
    common.add_argument("--registry", default=argparse.SUPPRESS, metavar="ROOT",
                        help="registry root (default: $AURAKIT_REGISTRY or ~/.aurakit/registry)")

    p = argparse.ArgumentParser(prog="aurakit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--json", action="store_true", default=False, help="machine-readable output on stdout")
    p.add_argument("--registry", default=None, metavar="ROOT", help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    r = sub.add_parser("run", parents=[common], help="execute a type1 skill on a simulator")
    r.add_argument("skill", help="name[@range] or a skill directory")
    r.add_argument("--param", action="append", metavar="K=V")
    r.add_argument("--sim", help="simulator model (defaults to the skill's)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--workdir", help="write exports and the trace log here")
    r.add_argument("--limits", action="append", metavar="K=V", help="max_time_ms, max_steps or max_iter")

    rec = sub.add_parser("record", parents=[common], help="record a scripted demonstration")
    rec.add_argument("--sim", required=True)
    rec.add_argument("--seed", type=int, default=0)
    rec.add_argument("--feed", required=True, help="CSV of clock_ms,action,widget,value")
    rec.add_argument("--out", required=True)

    a = sub.add_parser("abstract", parents=[common], help="turn demonstrations into a skill")
    a.add_argument("traces", nargs="+")
    a.add_argument("--out", required=True, help="skill directory to write")
    a.add_argument("--name", default="abstracted-skill")
    a.add_argument("--skill-version", default="0.1.0")
    a.add_argument("--description", default="")
    a.add_argument("--wait-threshold", type=int, default=500, metavar="MS")
    a.add_argument("--min-coverage", type=float, default=0.9)

    an = sub.add_parser("analyze", parents=[common], help="run an analysis op, pipeline file or type2 skill")
    an.add_argument("target", help="op name, pipeline.json or type2 skill ref")
    an.add_argument("--in", dest="inputs", action="append", metavar="[NAME=]PATH")
    an.add_argument("--out")
    an.add_argument("--param", action="append", metavar="K=V")

    g = sub.add_parser("registry", parents=[common], help="manage the skill registry")
    g.add_argument("action", choices=["list", "import", "pack", "resolve", "audit"])
    g.add_argument("source", nargs="?", help="archive/directory/URL, directory to pack, or name to resolve")
    g.add_argument("requirement", nargs="?", help="version range for resolve")
    g.add_argument("--out")
    g.add_argument("--kind", choices=["type1", "type2"])
    g.add_argument("--prefix")

    s = sub.add_parser("sim", parents=[common], help="inspect simulators")
    s.add_argument("action", choices=["list", "describe"])
    s.add_argument("model", nargs="?")

    w = sub.add_parser("workflow", parents=[common], help="run a workflow")
    w.add_argument("action", choices=["run"])
    w.add_argument("spec")
    w.add_argument("--workdir", required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if extra and args.command != "analyze":
        parser.print_usage(sys.stderr)
        print(f"aurakit: error: unrecognized arguments: {' '.join(extra)}", file=sys.stderr)
        return EXIT_USAGE
    handlers = {"run": cmd_run, "record": cmd_record, "abstract": cmd_abstract, "registry": cmd_registry,
                "sim": cmd_sim, "workflow": cmd_workflow}
    try:
        if args.command == "analyze":
            return cmd_analyze(args, extra)
        return handlers[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"aurakit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AurakitError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"aurakit: {type(exc).__name__}: {msg}", file=sys.stderr)
        for d in getattr(exc, "diagnostics", ())[:20]:
            print(f"  {d}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
