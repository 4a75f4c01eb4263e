"""Exception hierarchy shared across the package.

Every error carries a short machine-parsable ``category`` used by the CLI to
emit single-line diagnostics and pick an exit code.
"""


class StyletokError(Exception):
    """Base class for all package errors."""

    category = "internal"


class ConfigError(StyletokError):
    """Bad or unknown configuration content (schema violations, unknown keys)."""

    category = "config-error"


class PreconditionError(StyletokError):
    """An operation was called with inputs violating its contract."""

    category = "precondition"


class DegenerateBatchError(PreconditionError):
    """Contrastive batch in which no anchor has a positive."""

    category = "degenerate-batch"


class DataError(StyletokError):
    """Corpus/manifest content failed validation."""

    category = "data-error"


class MissingCheckpointError(StyletokError):
    """A required upstream checkpoint is absent.

    ``producer`` names the CLI subcommand that creates the missing artifact.
    """

    category = "missing-checkpoint"

    def __init__(self, message: str, producer: str | None = None):
        if producer:
            message = f"{message} (produce it with `styletok {producer}`)"
        super().__init__(message)
        self.producer = producer


class FreezeError(StyletokError):
    """Frozen-parameter contract violated (base weights would be trained)."""

    category = "freeze-violation"
