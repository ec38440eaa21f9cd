"""Minimal semantic versioning: parsing, ordering and range requirements.

Supported requirement syntax is a whitespace or comma separated conjunction
of clauses, each one of ``1.2.3``, ``=1.2.3``, ``^1.2.3``, ``~1.2.3``,
``>=1.2.3``, ``>1.2.3``, ``<=1.2.3``, ``<1.2.3``, or ``*``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering

_VERSION_RE = re.compile(
    r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)"
    r"(?:-([0-9A-Za-z-]+(?:\.[0-9A-Za-z-]+)*))?"
    r"(?:\+([0-9A-Za-z-]+(?:\.[0-9A-Za-z-]+)*))?$"
)
_CLAUSE_RE = re.compile(r"^(\^|~|>=|<=|>|<|=)?\s*(.+)$")


class SemverError(ValueError):
    pass


@total_ordering
@dataclass(frozen=True)
class Version:
    major: int
    minor: int
    patch: int
    prerelease: tuple = ()
    build: str = ""

    @classmethod
    def parse(cls, text: str) -> "Version":
        m = _VERSION_RE.match(text.strip())
        if not m:
            raise SemverError(f"invalid semantic version: {text!r}")
        pre = tuple(int(p) if p.isdigit() else p for p in m.group(4).split(".")) if m.group(4) else ()
        return cls(int(m.group(1)), int(m.group(2)), int(m.group(3)), pre, m.group(5) or "")

    def __str__(self) -> str:
        s = f"{self.major}.{self.minor}.{self.patch}"
        if self.prerelease:
            s += "-" + ".".join(str(p) for p in self.prerelease)
        if self.build:
            s += "+" + self.build
        return s

    def _key(self):
        # a release sorts after all of its prereleases; numeric ids sort before alphanumeric
        pre = tuple((0, p, "") if isinstance(p, int) else (1, 0, p) for p in self.prerelease)
        return (self.major, self.minor, self.patch, 1 if not self.prerelease else 0, pre)

    def __eq__(self, other):
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __lt__(self, other):
        if not isinstance(other, Version):
            return NotImplemented
        return self._key() < other._key()


def is_valid(text: str) -> bool:
    try:
        Version.parse(text)
    except SemverError:
        return False
    return True


@dataclass(frozen=True)
class Requirement:
    text: str
    clauses: tuple

    @classmethod
    def parse(cls, text: str) -> "Requirement":
        parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
        # allow ">= 1.0.0" style with a space after the operator
        merged: list[str] = []
        for p in parts:
            if merged and merged[-1] in ("^", "~", ">=", "<=", ">", "<", "="):
                merged[-1] += p
            else:
                merged.append(p)
        if not merged:
            raise SemverError("empty version requirement")
        clauses = []
        for p in merged:
            if p == "*":
                continue
            m = _CLAUSE_RE.match(p)
            op = m.group(1) or "="
            clauses.extend(_expand(op, Version.parse(m.group(2))))
        return cls(text.strip(), tuple(clauses))

    def matches(self, version: Version | str) -> bool:
        if isinstance(version, str):
            version = Version.parse(version)
        for op, bound in self.clauses:
            if op == "=" and not version == bound:
                return False
            if op == ">=" and not version >= bound:
                return False
            if op == ">" and not version > bound:
                return False
            if op == "<=" and not version <= bound:
                return False
            if op == "<" and not version < bound:
                return False
        return True

    def __str__(self) -> str:
        return self.text


def _expand(op: str, v: Version):
    if op == "^":
        if v.major > 0:
            upper = Version(v.major + 1, 0, 0)
        elif v.minor > 0:
            upper = Version(0, v.minor + 1, 0)
        else:
            upper = Version(0, 0, v.patch + 1)
        return [(">=", v), ("<", upper)]
    if op == "~":
        return [(">=", v), ("<", Version(v.major, v.minor + 1, 0))]
    return [(op, v)]


def best_match(versions, requirement: Requirement | str):
    """Highest version in ``versions`` satisfying ``requirement``, or None."""
    if isinstance(requirement, str):
        requirement = Requirement.parse(requirement)
    ok = [v if isinstance(v, Version) else Version.parse(v) for v in versions]
    ok = [v for v in ok if requirement.matches(v)]
    return max(ok) if ok else None
