"""Skill artifacts: manifests, parameter schemas, bodies and content digests."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Union

from .._canon import canonical_json, pretty_json, sha256_hex
from ..dsl import Program, format_program, parse_program
from ..dsl.ast import Call, Literal, Name, map_step_exprs, walk_steps
from ..errors import AurakitError
from ..semver import Requirement, SemverError, is_valid as semver_valid

NAME_RE = re.compile(r"^[a-z][a-z0-9_-]*$")
IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")
SKILL_KINDS = ("type1", "type2")
VALUE_TYPES = ("int", "real", "text", "bool", "choice")
PAYLOAD_KINDS = ("spectrum", "complex_spectrum", "image", "height_map", "sinogram", "tga_curve",
                 "orientation_map", "table", "scalar", "figure")
MAX_CALL_DEPTH = 8

MANIFEST_FILE = "skill.json"
PROGRAM_FILE = "program.sk"
PIPELINE_FILE = "pipeline.json"


# -- errors --------------------------------------------------------------------

class SkillError(AurakitError):
    pass


class InvalidArtifact(SkillError):
    def __init__(self, message: str, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class BindError(SkillError):
    pass


class MissingArgument(BindError):
    pass


class ConstraintViolation(BindError):
    pass


class TypeMismatch(BindError):
    pass


class UnknownArgument(BindError):
    pass


@dataclass(frozen=True)
class FieldDiagnostic:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


# -- schema types ----------------------------------------------------------------

def _check_type(value_type: str, value) -> bool:
    if value_type == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if value_type == "real":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if value_type in ("text", "choice"):
        return isinstance(value, str)
    if value_type == "bool":
        return isinstance(value, bool)
    return False


@dataclass(frozen=True)
class ParamSpec:
    name: str
    value_type: str
    unit: Optional[str] = None
    default: Any = None
    range: Optional[tuple] = None      # numeric closed range
    options: Optional[tuple] = None    # allowed set for choice
    description: str = ""

    def violation(self, value) -> str | None:
        """Why ``value`` does not satisfy the type and constraint, or None."""
        if not _check_type(self.value_type, value):
            return f"expected {self.value_type}, got {type(value).__name__}"
        if self.range is not None and self.value_type in ("int", "real"):
            lo, hi = self.range
            if not lo <= value <= hi:
                return f"{value!r} outside [{lo}, {hi}]"
        if self.options is not None and value not in self.options:
            return f"{value!r} not in {list(self.options)}"
        return None

    def coerce(self, value):
        """Normalize ``value`` (also accepting command-line text) or raise."""
        vt = self.value_type
        if isinstance(value, str) and vt in ("int", "real", "bool"):
            text = value.strip()
            try:
                if vt == "bool":
                    if text.lower() not in ("true", "false", "1", "0"):
                        raise ValueError(text)
                    value = text.lower() in ("true", "1")
                elif vt == "int":
                    value = int(text)
                else:
                    value = float(text)
            except ValueError:
                raise TypeMismatch(f"parameter {self.name!r}: cannot read {text!r} as {vt}") from None
        if vt == "real" and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if vt == "int" and isinstance(value, float) and value.is_integer():
            value = int(value)
        if not _check_type(vt, value):
            raise TypeMismatch(f"parameter {self.name!r}: expected {vt}, got {type(value).__name__}")
        why = self.violation(value)
        if why is not None:
            raise ConstraintViolation(f"parameter {self.name!r}: {why}")
        return value

    def to_dict(self) -> dict:
        d: dict = {"name": self.name, "value_type": self.value_type}
        if self.unit is not None:
            d["unit"] = self.unit
        if self.default is not None:
            d["default"] = self.default
        if self.range is not None:
            d["range"] = list(self.range)
        if self.options is not None:
            d["options"] = list(self.options)
        if self.description:
            d["description"] = self.description
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "ParamSpec":
        return cls(d["name"], d["value_type"], d.get("unit"), d.get("default"),
                   tuple(d["range"]) if d.get("range") is not None else None,
                   tuple(d["options"]) if d.get("options") is not None else None,
                   d.get("description", ""))


@dataclass(frozen=True)
class IOSpec:
    name: str
    payload_kind: str
    description: str = ""

    def to_dict(self) -> dict:
        d = {"name": self.name, "payload_kind": self.payload_kind}
        if self.description:
            d["description"] = self.description
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "IOSpec":
        return cls(d["name"], d["payload_kind"], d.get("description", ""))


@dataclass(frozen=True)
class Dependency:
    name: str
    requirement: str = "*"


@dataclass(frozen=True)
class SkillManifest:
    name: str
    version: str
    skill_kind: str
    description: str = ""
    parameters: tuple = ()
    inputs: tuple = ()
    outputs: tuple = ()
    dependencies: tuple = ()
    environment: Union[str, tuple, None] = None   # model id (type1) or op names (type2)

    def param(self, name: str) -> ParamSpec | None:
        for p in self.parameters:
            if p.name == name:
                return p
        return None

    @property
    def ref(self) -> str:
        return f"{self.name}@{self.version}"

    def to_dict(self) -> dict:
        env = list(self.environment) if isinstance(self.environment, tuple) else self.environment
        return {
            "name": self.name, "version": self.version, "skill_kind": self.skill_kind,
            "description": self.description,
            "parameters": [p.to_dict() for p in self.parameters],
            "inputs": [i.to_dict() for i in self.inputs],
            "outputs": [o.to_dict() for o in self.outputs],
            "dependencies": [{"name": d.name, "requirement": d.requirement} for d in self.dependencies],
            "environment": env,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "SkillManifest":
        env = d.get("environment")
        if isinstance(env, list):
            env = tuple(env)
        return cls(
            name=d["name"], version=d["version"], skill_kind=d["skill_kind"],
            description=d.get("description", ""),
            parameters=tuple(ParamSpec.from_dict(p) for p in d.get("parameters", ())),
            inputs=tuple(IOSpec.from_dict(i) for i in d.get("inputs", ())),
            outputs=tuple(IOSpec.from_dict(o) for o in d.get("outputs", ())),
            dependencies=tuple(Dependency(x["name"], x.get("requirement", "*")) for x in d.get("dependencies", ())),
            environment=env,
        )


@dataclass(frozen=True)
class PipelineNode:
    id: str
    op: str
    args: Mapping[str, Any] = field(default_factory=dict)

    def __hash__(self):
        return hash((self.id, self.op, canonical_json(self.args)))


@dataclass(frozen=True)
class Type2Pipeline:
    nodes: tuple = ()
    outputs: Mapping[str, Any] = field(default_factory=dict)
    unused_inputs: tuple = ()

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n.id, "op": n.op, "args": dict(n.args)} for n in self.nodes],
            "outputs": dict(self.outputs),
            "unused_inputs": list(self.unused_inputs),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Type2Pipeline":
        return cls(tuple(PipelineNode(n["id"], n["op"], dict(n.get("args", {}))) for n in d.get("nodes", ())),
                   dict(d.get("outputs", {})), tuple(d.get("unused_inputs", ())))

    def __eq__(self, other):
        return isinstance(other, Type2Pipeline) and canonical_json(self.to_dict()) == canonical_json(other.to_dict())

    def __hash__(self):
        return hash(canonical_json(self.to_dict()))


@dataclass(frozen=True)
class SkillArtifact:
    manifest: SkillManifest
    body: Union[Program, Type2Pipeline]
    aux: tuple = ()   # sorted (relative path, bytes) pairs shipped with the skill

    @property
    def digest(self) -> str:
        return artifact_digest(self)

    @property
    def name(self) -> str:
        return self.manifest.name

    @property
    def version(self) -> str:
        return self.manifest.version

    def body_text(self) -> str:
        if isinstance(self.body, Program):
            return format_program(self.body)
        return pretty_json(self.body.to_dict())

    def body_file(self) -> str:
        return PROGRAM_FILE if self.manifest.skill_kind == "type1" else PIPELINE_FILE

    def files(self) -> list[tuple[str, bytes]]:
        """Canonical file contents in archive order: manifest, body, aux."""
        out = [(MANIFEST_FILE, pretty_json(self.manifest.to_dict()).encode("utf-8")),
               (self.body_file(), self.body_text().encode("utf-8"))]
        out.extend(sorted(self.aux))
        return out


def artifact_digest(artifact: SkillArtifact) -> str:
    """sha256 over the canonical serialization of manifest, body and aux files."""
    body = artifact.body_text() if isinstance(artifact.body, Program) else artifact.body.to_dict()
    doc = {
        "manifest": artifact.manifest.to_dict(),
        "body": body,
        "aux": {path: sha256_hex(data) for path, data in sorted(artifact.aux)},
    }
    return sha256_hex(canonical_json(doc))


# -- validation ------------------------------------------------------------------

def validate_manifest(manifest: SkillManifest, known_models=None, known_ops=None) -> list[FieldDiagnostic]:
    """Field-path diagnostics for every violated manifest invariant."""
    out: list[FieldDiagnostic] = []
    add = lambda path, msg: out.append(FieldDiagnostic(path, msg))  # noqa: E731
    if not isinstance(manifest.name, str) or not NAME_RE.match(manifest.name):
        add("name", f"invalid skill name {manifest.name!r}")
    if not semver_valid(str(manifest.version)):
        add("version", f"invalid semantic version {manifest.version!r}")
    if manifest.skill_kind not in SKILL_KINDS:
        add("skill_kind", f"skill_kind must be one of {SKILL_KINDS}")
    seen: set = set()
    for i, p in enumerate(manifest.parameters):
        base = f"parameters[{i}]"
        if not IDENT_RE.match(p.name or ""):
            add(f"{base}.name", f"invalid parameter name {p.name!r}")
        if p.name in seen:
            add(f"{base}.name", f"duplicate parameter name {p.name!r}")
        seen.add(p.name)
        if p.value_type not in VALUE_TYPES:
            add(f"{base}.value_type", f"unknown value type {p.value_type!r}")
            continue
        if p.range is not None:
            if p.value_type not in ("int", "real") or len(p.range) != 2:
                add(f"{base}.range", "range applies to int/real parameters as [lo, hi]")
            elif not p.range[0] <= p.range[1]:
                add(f"{base}.range", f"lower bound {p.range[0]} exceeds upper bound {p.range[1]}")
        if p.value_type == "choice" and not p.options:
            add(f"{base}.options", "choice parameters need a non-empty option set")
        if p.default is not None and not any(d.path.startswith(base + ".range") for d in out):
            why = p.violation(p.default)
            if why is not None:
                add(f"{base}.default", f"default does not satisfy constraint: {why}")
    for section in ("inputs", "outputs"):
        names: set = set()
        for i, io in enumerate(getattr(manifest, section)):
            if io.name in names:
                add(f"{section}[{i}].name", f"duplicate {section[:-1]} name {io.name!r}")
            names.add(io.name)
            if io.payload_kind not in PAYLOAD_KINDS:
                add(f"{section}[{i}].payload_kind", f"unknown payload kind {io.payload_kind!r}")
    for i, dep in enumerate(manifest.dependencies):
        if not NAME_RE.match(dep.name or ""):
            add(f"dependencies[{i}].name", f"invalid dependency name {dep.name!r}")
        try:
            Requirement.parse(dep.requirement)
        except SemverError as exc:
            add(f"dependencies[{i}].requirement", f"unparseable requirement: {exc}")
    if manifest.skill_kind == "type1":
        if not isinstance(manifest.environment, str):
            add("environment", "type1 skills name a simulator model id")
        elif known_models is not None and manifest.environment not in known_models:
            add("environment", f"unknown model {manifest.environment!r}")
    elif manifest.skill_kind == "type2":
        env = manifest.environment
        if not isinstance(env, (tuple, list)):
            add("environment", "type2 skills list their required analysis ops")
        elif known_ops is not None:
            for i, op in enumerate(env):
                if op not in known_ops:
                    add(f"environment[{i}]", f"unknown analysis op {op!r}")
    return out


def validate_pipeline(manifest: SkillManifest, pipeline: Type2Pipeline, known_ops=None) -> list[FieldDiagnostic]:
    out: list[FieldDiagnostic] = []
    add = lambda path, msg: out.append(FieldDiagnostic(path, msg))  # noqa: E731
    inputs = {i.name for i in manifest.inputs}
    params = {p.name for p in manifest.parameters}
    consumed: set = set()
    defined: set = set()

    def refs(binding, path):
        if isinstance(binding, Mapping):
            if "input" in binding:
                if binding["input"] not in inputs:
                    add(path, f"unknown pipeline input {binding['input']!r}")
                consumed.add(binding["input"])
            elif "param" in binding:
                if binding["param"] not in params:
                    add(path, f"unknown parameter {binding['param']!r}")
            elif "node" in binding:
                if binding["node"] not in defined:
                    add(path, f"reference to {binding['node']!r} before it is defined")
            elif "list" in binding:
                for j, b in enumerate(binding["list"]):
                    refs(b, f"{path}[{j}]")
            elif "const" not in binding:
                add(path, "binding needs one of input/param/node/const/list")

    for i, node in enumerate(pipeline.nodes):
        base = f"body.nodes[{i}]"
        if node.id in defined:
            add(f"{base}.id", f"duplicate node id {node.id!r}")
        if known_ops is not None and node.op not in known_ops:
            add(f"{base}.op", f"unknown analysis op {node.op!r}")
        if isinstance(manifest.environment, (tuple, list)) and node.op not in manifest.environment:
            add(f"{base}.op", f"op {node.op!r} not declared in environment")
        for k, b in node.args.items():
            refs(b, f"{base}.args.{k}")
        defined.add(node.id)
    for name, b in pipeline.outputs.items():
        refs(b, f"body.outputs.{name}")
    declared = [o.name for o in manifest.outputs]
    for name in declared:
        if name not in pipeline.outputs:
            add("body.outputs", f"manifest output {name!r} is not bound")
    for name in pipeline.outputs:
        if name not in declared:
            add(f"body.outputs.{name}", "not a declared manifest output")
    for name in sorted(inputs - consumed - set(pipeline.unused_inputs)):
        add("body", f"input {name!r} is never consumed and not marked unused")
    return out


def validate_artifact(artifact: SkillArtifact, known_models=None, known_ops=None,
                      descriptor_for: Callable | None = None, resolver: Callable | None = None) -> list:
    """Manifest diagnostics plus body diagnostics (DSL check or pipeline check)."""
    m = artifact.manifest
    diags: list = list(validate_manifest(m, known_models, known_ops))
    if m.skill_kind == "type1":
        if not isinstance(artifact.body, Program):
            diags.append(FieldDiagnostic("body", "type1 skills carry a program"))
            return diags
        if descriptor_for is not None and isinstance(m.environment, str) and \
                (known_models is None or m.environment in known_models):
            from ..dsl import check_program
            for d in check_program(artifact.body, descriptor_for(m.environment), m.parameters, resolver):
                if d.severity == "error":
                    diags.append(FieldDiagnostic(f"body:{d.span.line}:{d.span.column}", f"[{d.code}] {d.message}"))
        if resolver is not None:
            diags.extend(check_calls(artifact, resolver))
    elif m.skill_kind == "type2":
        if not isinstance(artifact.body, Type2Pipeline):
            diags.append(FieldDiagnostic("body", "type2 skills carry a pipeline"))
            return diags
        diags.extend(validate_pipeline(m, artifact.body, known_ops))
    return diags


def called_skills(program: Program) -> list[str]:
    return [s.skill for s in walk_steps(program.steps) if isinstance(s, Call)]


def check_calls(artifact: SkillArtifact, resolver: Callable, max_depth: int = MAX_CALL_DEPTH) -> list[FieldDiagnostic]:
    """Reject call cycles and call chains deeper than ``max_depth``."""
    out: list[FieldDiagnostic] = []

    def visit(art, stack):
        if not isinstance(art.body, Program):
            return
        for name in called_skills(art.body):
            if name in stack:
                out.append(FieldDiagnostic("body", f"call cycle: {' -> '.join(stack + [name])}"))
                continue
            if len(stack) >= max_depth:
                out.append(FieldDiagnostic("body", f"call depth exceeds {max_depth} at {name!r}"))
                continue
            try:
                callee = resolver(name)
            except Exception as exc:
                out.append(FieldDiagnostic("body", f"cannot resolve called skill {name!r}: {exc}"))
                continue
            if callee.manifest.skill_kind != "type1":
                out.append(FieldDiagnostic("body", f"called skill {name!r} is {callee.manifest.skill_kind}, not type1"))
                continue
            visit(callee, stack + [name])

    visit(artifact, [artifact.manifest.name])
    return out


# -- binding -----------------------------------------------------------------------

@dataclass(frozen=True)
class BoundProgram:
    manifest: SkillManifest
    body: Union[Program, Type2Pipeline]
    values: Mapping[str, Any]
    digest: str

    @property
    def program(self) -> Program:
        return self.body


def bind_values(manifest: SkillManifest, args: Mapping[str, Any] | None) -> dict:
    args = dict(args or {})
    unknown = sorted(set(args) - {p.name for p in manifest.parameters})
    if unknown:
        raise UnknownArgument(f"{manifest.name}: unknown parameter(s) {', '.join(unknown)}")
    values = {}
    for p in manifest.parameters:
        if p.name in args:
            values[p.name] = p.coerce(args[p.name])
        elif p.default is not None:
            values[p.name] = p.coerce(p.default)
        else:
            raise MissingArgument(f"{manifest.name}: no value for parameter {p.name!r} and no default")
    return values


def substitute(program: Program, values: Mapping[str, Any]) -> Program:
    def fn(e):
        if isinstance(e, Name) and e.id in values:
            return Literal.of(values[e.id])
        return None

    return Program(tuple(map_step_exprs(s, fn) for s in program.steps))


def bind_parameters(artifact: SkillArtifact, args: Mapping[str, Any] | None = None) -> BoundProgram:
    """Check ``args`` against the manifest and close the program over them."""
    values = bind_values(artifact.manifest, args)
    body = substitute(artifact.body, values) if isinstance(artifact.body, Program) else artifact.body
    return BoundProgram(artifact.manifest, body, values, artifact.digest)


# -- files ---------------------------------------------------------------------------

def artifact_from_files(files: Mapping[str, bytes]) -> SkillArtifact:
    """Build an artifact from relative path -> bytes; raises InvalidArtifact."""
    if MANIFEST_FILE not in files:
        raise InvalidArtifact(f"missing {MANIFEST_FILE}", [FieldDiagnostic(MANIFEST_FILE, "missing")])
    try:
        manifest = SkillManifest.from_dict(json.loads(files[MANIFEST_FILE].decode("utf-8")))
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidArtifact(f"malformed {MANIFEST_FILE}: {exc}",
                              [FieldDiagnostic(MANIFEST_FILE, str(exc))]) from None
    if manifest.skill_kind == "type1":
        body_file = PROGRAM_FILE
    elif manifest.skill_kind == "type2":
        body_file = PIPELINE_FILE
    else:
        raise InvalidArtifact(f"unknown skill_kind {manifest.skill_kind!r}",
                              [FieldDiagnostic("skill_kind", "must be type1 or type2")])
    if body_file not in files:
        raise InvalidArtifact(f"{manifest.skill_kind} skill {manifest.name!r} is missing {body_file}",
                              [FieldDiagnostic(body_file, "missing")])
    text = files[body_file].decode("utf-8").replace("\r\n", "\n")
    if body_file == PROGRAM_FILE:
        from ..dsl import DslSyntaxError
        try:
            body = parse_program(text)
        except DslSyntaxError as exc:
            raise InvalidArtifact(f"{PROGRAM_FILE} does not parse",
                                  [FieldDiagnostic(f"{PROGRAM_FILE}:{d.span.line}:{d.span.column}", d.message)
                                   for d in exc.diagnostics]) from None
    else:
        try:
            body = Type2Pipeline.from_dict(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise InvalidArtifact(f"malformed {PIPELINE_FILE}: {exc}",
                                  [FieldDiagnostic(PIPELINE_FILE, str(exc))]) from None
    aux = tuple(sorted((p, bytes(b)) for p, b in files.items()
                       if p not in (MANIFEST_FILE, PROGRAM_FILE, PIPELINE_FILE)))
    return SkillArtifact(manifest, body, aux)


def load_artifact(directory) -> SkillArtifact:
    root = Path(directory)
    if not root.is_dir():
        raise InvalidArtifact(f"{root} is not a directory")
    files = {}
    for p in sorted(root.rglob("*")):
        if p.is_file() and not any(part.startswith(".") for part in p.relative_to(root).parts):
            files[p.relative_to(root).as_posix()] = p.read_bytes()
    return artifact_from_files(files)


def save_artifact(artifact: SkillArtifact, directory) -> Path:
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    for rel, data in artifact.files():
        target = root / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    return root
