"""Exception types.

Every error carries a short machine-readable ``code`` (e.g. ``"grid-mismatch"``)
so that callers and the CLI can branch on it without parsing messages.
"""


class CapStokesError(ValueError):
    """Base error; ``code`` is a stable kebab-case identifier."""

    def __init__(self, code, message=None):
        self.code = code
        super().__init__(f"{code}: {message}" if message else code)


class GridError(CapStokesError):
    pass


class OperatorError(CapStokesError):
    pass


class FieldError(CapStokesError):
    pass


class StepError(CapStokesError):
    pass


class ConfigError(CapStokesError):
    pass
