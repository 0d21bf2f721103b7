"""Shared vocabulary of the pipeline: violations, reports, scope rules, identity.

Everything here is immutable after construction and safe to share across
worker threads.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum, IntEnum

from .errors import MergeError, ValidationError

_CRITERION_ID_RE = re.compile(r"^\d+\.\d+\.\d+$")

SNIPPET_CAP = 4096


class Level(Enum):
    A = "A"
    AA = "AA"
    AAA = "AAA"


class Severity(IntEnum):
    MINOR = 1
    MODERATE = 2
    SERIOUS = 3
    CRITICAL = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "Severity":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValidationError(f"unknown severity {label!r}")


class ViolationKind(Enum):
    CONTRAST = "contrast"
    IMAGE_ALT = "image_alt"
    GENERAL = "general"
    STRUCTURAL = "structural"


class Scanner(Enum):
    NATIVE_RULES = "native_rules"
    INJECTED_AUDIT = "injected_audit"
    COMBINED = "combined"


class Scope(Enum):
    IN_SCOPE = "in_scope"
    OUT_OF_SCOPE = "out_of_scope"


@dataclass(frozen=True)
class WcagCriterion:
    id: str
    name: str
    level: Level

    def __post_init__(self):
        if not _CRITERION_ID_RE.match(self.id):
            raise ValidationError(f"malformed criterion id {self.id!r}")
        if not isinstance(self.level, Level):
            raise ValidationError(f"level must be a Level, got {self.level!r}")


# Criterion registry for everything the rule catalog and the injected audit
# can emit. Contrast (1.4.3) is carried at Level A: the scope filter admits
# only Level A plus the five named AA criteria, and contrast fixes are a
# first-class part of the pipeline.
CRITERIA: dict[str, WcagCriterion] = {
    c.id: c
    for c in (
        WcagCriterion("1.1.1", "Non-text Content", Level.A),
        WcagCriterion("1.3.1", "Info and Relationships", Level.A),
        WcagCriterion("1.4.3", "Contrast (Minimum)", Level.A),
        WcagCriterion("1.4.10", "Reflow", Level.AA),
        WcagCriterion("2.1.1", "Keyboard", Level.A),
        WcagCriterion("2.4.2", "Page Titled", Level.A),
        WcagCriterion("2.4.4", "Link Purpose (In Context)", Level.A),
        WcagCriterion("2.4.5", "Multiple Ways", Level.AA),
        WcagCriterion("3.1.1", "Language of Page", Level.A),
        WcagCriterion("3.1.2", "Language of Parts", Level.AA),
        WcagCriterion("3.2.3", "Consistent Navigation", Level.AA),
        WcagCriterion("3.3.2", "Labels or Instructions", Level.A),
        WcagCriterion("4.1.2", "Name, Role, Value", Level.A),
    )
}

# The five AA criteria the remediation scope admits (Reflow, Multiple Ways,
# Device Independence, Language of Parts, Consistent Navigation).
IN_SCOPE_AA_IDS = frozenset({"1.4.10", "2.4.5", "2.1.1", "3.1.2", "3.2.3"})


def classify_scope(criterion: WcagCriterion) -> Scope:
    """Scope gate: Level A always, Level AA only for the five named criteria."""
    if not isinstance(criterion, WcagCriterion):
        raise ValidationError("classify_scope expects a WcagCriterion")
    if criterion.level is Level.A:
        return Scope.IN_SCOPE
    if criterion.level is Level.AA and criterion.id in IN_SCOPE_AA_IDS:
        return Scope.IN_SCOPE
    return Scope.OUT_OF_SCOPE


@dataclass(frozen=True)
class NodeLocator:
    """Addresses one element: a unique CSS selector plus a positional path.

    ``dom_path`` is the ordered list of (tag, element-sibling-index) pairs
    from the document root; index is 1-based among element children. The
    snippet is the element's outer HTML capped at 4 KiB.
    """

    css_selector: str
    dom_path: tuple[tuple[str, int], ...]
    snippet: str

    def __post_init__(self):
        if not self.css_selector:
            raise ValidationError("css_selector must be non-empty")
        if len(self.snippet) > SNIPPET_CAP:
            object.__setattr__(self, "snippet", self.snippet[:SNIPPET_CAP])
        object.__setattr__(
            self, "dom_path", tuple((t, int(i)) for t, i in self.dom_path)
        )

    @property
    def position_key(self) -> tuple[int, ...]:
        """Document-order sort key (preorder via sibling indices)."""
        return tuple(i for _, i in self.dom_path)


@dataclass(frozen=True)
class Violation:
    rule_id: str
    criterion: WcagCriterion
    severity: Severity
    locator: NodeLocator
    help_text: str
    kind: ViolationKind

    def __post_init__(self):
        if not self.rule_id:
            raise ValidationError("rule_id must be non-empty")
        if (self.kind is ViolationKind.CONTRAST) != (self.criterion.id == "1.4.3"):
            raise ValidationError("kind=contrast iff criterion is 1.4.3")
        if self.kind is ViolationKind.IMAGE_ALT and self.criterion.id != "1.1.1":
            raise ValidationError("kind=image_alt requires criterion 1.1.1")

    def to_dict(self) -> dict:
        return {
            "rule_id": self.rule_id,
            "criterion": {
                "id": self.criterion.id,
                "name": self.criterion.name,
                "level": self.criterion.level.value,
            },
            "severity": self.severity.label,
            "kind": self.kind.value,
            "help_text": self.help_text,
            "locator": {
                "css_selector": self.locator.css_selector,
                "dom_path": [[t, i] for t, i in self.locator.dom_path],
                "snippet": self.locator.snippet,
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Violation":
        crit = d["criterion"]
        return cls(
            rule_id=d["rule_id"],
            criterion=WcagCriterion(crit["id"], crit["name"], Level(crit["level"])),
            severity=Severity.from_label(d["severity"]),
            locator=NodeLocator(
                d["locator"]["css_selector"],
                tuple((t, i) for t, i in d["locator"]["dom_path"]),
                d["locator"]["snippet"],
            ),
            help_text=d["help_text"],
            kind=ViolationKind(d["kind"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, raw: str) -> "Violation":
        return cls.from_dict(json.loads(raw))


def violation_identity(v: Violation) -> str:
    """Stable dedup key over (rule_id, css_selector); snippet text is ignored
    so cosmetic whitespace changes never create phantom violations."""
    h = hashlib.sha256()
    h.update(v.rule_id.encode("utf-8"))
    h.update(b"\x1f")
    h.update(v.locator.css_selector.encode("utf-8"))
    return h.hexdigest()


def _violation_sort_key(v: Violation) -> tuple:
    # Total order: document position, then rule, then selector, so merge
    # output ordering is independent of argument order.
    return (v.locator.position_key, v.rule_id, v.locator.css_selector)


@dataclass(frozen=True)
class AuditReport:
    source: str
    violations: tuple[Violation, ...]
    scanned_at: datetime
    scanner: Scanner

    def __post_init__(self):
        keys = [violation_identity(v) for v in self.violations]
        if len(keys) != len(set(keys)):
            raise ValidationError("duplicate violation identity in report")
        for v in self.violations:
            if classify_scope(v.criterion) is not Scope.IN_SCOPE:
                raise ValidationError(
                    f"out-of-scope criterion {v.criterion.id} in report"
                )

    @classmethod
    def build(
        cls,
        source: str,
        violations,
        scanner: Scanner,
        scanned_at: datetime | None = None,
    ) -> "AuditReport":
        """Dedup by identity, drop out-of-scope criteria, fix the ordering."""
        seen: dict[str, Violation] = {}
        for v in violations:
            if classify_scope(v.criterion) is not Scope.IN_SCOPE:
                continue
            seen.setdefault(violation_identity(v), v)
        ordered = tuple(sorted(seen.values(), key=_violation_sort_key))
        return cls(
            source=source,
            violations=ordered,
            scanned_at=scanned_at or datetime.now(timezone.utc),
            scanner=scanner,
        )

    def identity_keys(self) -> frozenset[str]:
        return frozenset(violation_identity(v) for v in self.violations)

    def by_identity(self) -> dict[str, Violation]:
        return {violation_identity(v): v for v in self.violations}

    def __len__(self) -> int:
        return len(self.violations)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "scanner": self.scanner.value,
            "scanned_at": self.scanned_at.isoformat(),
            "violations": [v.to_dict() for v in self.violations],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditReport":
        return cls(
            source=d["source"],
            violations=tuple(Violation.from_dict(v) for v in d["violations"]),
            scanned_at=datetime.fromisoformat(d["scanned_at"]),
            scanner=Scanner(d["scanner"]),
        )


def merge_reports(a: AuditReport, b: AuditReport) -> AuditReport:
    """Union of two scans of the same source, deduplicated by identity key."""
    if a.source != b.source:
        raise MergeError(f"cannot merge reports for {a.source!r} and {b.source!r}")
    merged: dict[str, Violation] = dict(a.by_identity())
    for key, v in b.by_identity().items():
        merged.setdefault(key, v)
    scanner = a.scanner if a.scanner is b.scanner else Scanner.COMBINED
    return AuditReport(
        source=a.source,
        violations=tuple(sorted(merged.values(), key=_violation_sort_key)),
        scanned_at=max(a.scanned_at, b.scanned_at),
        scanner=scanner,
    )
