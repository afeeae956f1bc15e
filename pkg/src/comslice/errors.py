"""Fatal configuration errors shared across the package."""


class ComsliceError(Exception):
    """Base class for fatal errors in corpus or encoding-file configuration."""


class ManifestError(ComsliceError):
    """The corpus manifest or one of its page files is unusable."""


class EncodingFileError(ComsliceError):
    """The encoding file is missing, malformed, or fails validation."""
