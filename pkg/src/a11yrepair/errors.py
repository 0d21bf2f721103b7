"""Exception hierarchy shared across the pipeline."""


class A11yRepairError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(A11yRepairError):
    """A domain value violates one of its invariants."""


class MergeError(A11yRepairError):
    """Reports from different sources cannot be merged."""


class LocatorError(A11yRepairError):
    """A node locator does not resolve (or resolves ambiguously)."""


class SelectorError(A11yRepairError):
    """A CSS selector string could not be parsed."""


class TemplateError(A11yRepairError):
    """A prompt template is missing a required context field."""


class ContextOverflowError(A11yRepairError):
    """Prompt context exceeds the token budget and cannot be trimmed."""


class GatewayError(A11yRepairError):
    """The completion endpoint failed after retries or timed out."""


class CassetteMissError(GatewayError):
    """Replay mode found no recorded response for a request digest."""

    def __init__(self, digest: str):
        super().__init__(f"cassette miss for request digest {digest}")
        self.digest = digest


class SegmentParseError(A11yRepairError):
    """A delimiter-structured response could not be parsed."""

    def __init__(self, message: str, found=(), expected=()):
        super().__init__(message)
        self.found = tuple(found)
        self.expected = tuple(expected)


class SegmentValidationError(A11yRepairError):
    """A parsed segment failed structural or syntax validation."""


class StaleLocatorError(LocatorError):
    """A planned patch no longer resolves to exactly one node."""


class PatchError(A11yRepairError):
    """A patch plan could not be applied."""


class DigestMismatchError(PatchError):
    """A file changed on disk between planning and apply time."""


class IntegrityError(A11yRepairError):
    """Backups are missing or a rollback could not restore the workspace."""


class WorkspaceError(A11yRepairError):
    """A directory is not an Angular workspace or its manifest is malformed."""


class SessionError(A11yRepairError):
    """A WebDriver session could not be opened or has died."""


class AuditError(A11yRepairError):
    """The injected audit script failed to run inside the page."""


class EnvironmentError_(A11yRepairError):
    """A required external tool (driver, build command) is unavailable."""


class UndefinedRateError(A11yRepairError):
    """Remediation rate is undefined because the baseline count is zero."""


class ConfigError(A11yRepairError):
    """The run configuration is invalid or a config file has unknown keys."""
