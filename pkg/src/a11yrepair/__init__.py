"""WCAG 2.2 violation detection and LLM-driven remediation for static web
pages and Angular-style SPA workspaces."""

from .model import (
    AuditReport,
    NodeLocator,
    Scanner,
    Severity,
    Violation,
    ViolationKind,
    WcagCriterion,
    classify_scope,
    merge_reports,
    violation_identity,
)
from .rules import scan_document

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "NodeLocator",
    "Scanner",
    "Severity",
    "Violation",
    "ViolationKind",
    "WcagCriterion",
    "classify_scope",
    "merge_reports",
    "violation_identity",
    "scan_document",
    "__version__",
]
