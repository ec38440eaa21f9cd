"""Skill artifact data model."""
from .model import (MAX_CALL_DEPTH, BindError, BoundProgram, ConstraintViolation, Dependency, FieldDiagnostic,
                    InvalidArtifact, IOSpec, MissingArgument, ParamSpec, PipelineNode, SkillArtifact,
                    SkillError, SkillManifest, Type2Pipeline, TypeMismatch, UnknownArgument, artifact_digest,
                    artifact_from_files, bind_parameters, check_calls, load_artifact, save_artifact,
                    validate_artifact, validate_manifest, validate_pipeline)

__all__ = [
    "MAX_CALL_DEPTH", "BindError", "BoundProgram", "ConstraintViolation", "Dependency", "FieldDiagnostic",
    "InvalidArtifact", "IOSpec", "MissingArgument", "ParamSpec", "PipelineNode", "SkillArtifact", "SkillError",
    "SkillManifest", "Type2Pipeline", "TypeMismatch", "UnknownArgument", "artifact_digest",
    "artifact_from_files", "bind_parameters", "check_calls", "load_artifact", "save_artifact",
    "validate_artifact", "validate_manifest", "validate_pipeline",
]
