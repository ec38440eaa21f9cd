"""Exception hierarchy."""


class AurakitError(Exception):
    """Base class for every domain error raised by the package."""


class ValidationError(AurakitError):
    def __init__(self, message, diagnostics=()):
        super().__init__(message)
        self.diagnostics = list(diagnostics)
