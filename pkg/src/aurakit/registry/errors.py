from __future__ import annotations

from ..errors import AurakitError


class RegistryError(AurakitError):
    pass


class DigestMismatch(RegistryError):
    pass


class VersionConflict(RegistryError):
    pass


class FetchError(RegistryError):
    pass


class NotFound(RegistryError):
    pass
