"""Exception types shared across the package."""


class VlinkError(Exception):
    """Base class for all package-specific errors."""


class ManifestError(VlinkError):
    """A corpus manifest file is malformed or violates a corpus invariant."""


class EmbeddingFileError(VlinkError):
    """An embedding file has a bad header, wrong size, or corrupt payload."""


class ModelFileError(VlinkError):
    """A PCA model file is corrupt, truncated, or fails validation on load."""


class ValidationFailure(VlinkError):
    """A corpus/matrix pair failed validation where a clean pair is required."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(issue.message for issue in report.issues)
        super().__init__(f"validation failed: {lines}")


class ConfigError(VlinkError):
    """A pipeline configuration file or flag set is invalid."""
