class ExportError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""


class UsageError(ExportError):
    """Bad source/backend/flag combination. Exit 2."""


class InputError(ExportError):
    """Unreadable or malformed names/descriptions input. Exit 3."""


class EncoderUnavailableError(ExportError):
    """Requested pretrained encoder cannot run here; message says how to fix. Exit 4."""
