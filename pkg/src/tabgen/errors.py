"""Exception hierarchy for tabgen.

Every error carries the process exit code the CLI reports for it:
0 success, 2 config/validation, 3 numeric failure, 4 data insufficiency, 5 I/O.
"""


class TabgenError(Exception):
    """Base class for all tabgen errors."""

    exit_code = 1


class ConfigError(TabgenError):
    """Invalid configuration or command-line value."""

    exit_code = 2


class ContractError(TabgenError):
    """A function was called outside its preconditions."""

    exit_code = 2


class ShapeError(ContractError):
    """Tensor operands have incompatible shapes."""


class SchemaError(TabgenError):
    """Schema is malformed or does not match the data."""

    exit_code = 2


class EncodingError(SchemaError):
    """A value or index falls outside its attribute's categories."""


class StratificationError(TabgenError):
    """A class is too small to stratify a split."""

    exit_code = 2


class NumericError(TabgenError):
    """A computation produced NaN or infinite values."""

    exit_code = 3


class InsufficientDataError(TabgenError):
    """Not enough records to perform the requested operation."""

    exit_code = 4


class BankError(InsufficientDataError):
    """A latent bank cannot be built or used for SMOTE sampling."""


class IoError(TabgenError):
    """A file could not be read or written."""

    exit_code = 5


class CheckpointError(IoError):
    """A checkpoint file is unreadable."""


class MagicError(CheckpointError):
    """Checkpoint does not start with the expected magic bytes."""


class VersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class SchemaMismatchError(CheckpointError):
    """Checkpoint was trained on a different schema."""


class TruncatedCheckpointError(CheckpointError):
    """Checkpoint ends before its manifest says it should."""
