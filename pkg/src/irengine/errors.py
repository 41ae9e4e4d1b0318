"""Exception types shared across the engine."""


class IngestError(ValueError):
    """Raised when a source file cannot be parsed into a dataset.

    Messages always name the offending line (and column, when known) so
    upload errors can be surfaced verbatim to clients.
    """


class ValidationError(ValueError):
    """Raised when a request, config, or spec is inconsistent with a schema."""
