"""Exception types shared across the package.

The CLI maps these onto distinct exit codes: validation-style failures
(bad data, bad configuration, unparseable files) exit 2, plain I/O
failures exit 3, and contract violations (misused APIs, incompatible
models) exit 4.
"""


class SymdetectError(Exception):
    """Base class for package-specific failures."""


class ValidationError(SymdetectError):
    """Invalid data or configuration supplied by the caller."""


class ParseError(ValidationError):
    """Malformed record in a text input file."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc += f"{path}:"
        if line is not None:
            loc += f"line {line}: "
        super().__init__(loc + message)
        self.path = path
        self.line = line


class ConfigError(ValidationError):
    """No usable input source or inconsistent configuration."""


class ContractError(SymdetectError):
    """An operation was called outside its stated contract."""


class TrainingError(SymdetectError):
    """Training data cannot produce a model (e.g. a single-class set)."""


class ModelFormatError(SymdetectError):
    """A model file is truncated, corrupt, or structurally invalid."""


class ModelVersionError(ModelFormatError):
    """A model file declares a version this build does not understand."""
