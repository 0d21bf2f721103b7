"""Applies fixes to static pages: per-violation node replacement, alt-text
injection, a final responsive/accessibility merge, and artifact emission.

Every fix goes through the validation gate before it may touch the tree, and
the whole patch set is discarded if the re-scan shows a violation key that was
not present before (no-regressions rule)."""

from __future__ import annotations

import logging
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import dom, rules
from .errors import (
    GatewayError,
    SegmentParseError,
    SegmentValidationError,
    StaleLocatorError,
)
from .gateway import LlmGateway
from .model import (
    AuditReport,
    NodeLocator,
    Violation,
    ViolationKind,
    violation_identity,
)
from .prompts import PromptKind, build_prompt
from .segments import parse_segments, validate_html_segment
from .vision import AltDescription

log = logging.getLogger(__name__)


class PatchStatus:
    PLANNED = "planned"
    APPLIED = "applied"
    REJECTED = "rejected"


@dataclass
class DomPatch:
    locator: NodeLocator
    original_fragment: str
    fixed_fragment: str
    violation_key: str
    status: str = PatchStatus.PLANNED
    applied_selector: str | None = None
    reject_reason: str | None = None

    def reject(self, reason: str) -> "DomPatch":
        self.status = PatchStatus.REJECTED
        self.reject_reason = reason
        log.warning("patch rejected (%s): %s", self.violation_key[:12], reason)
        return self


def _fragment_from_response(response_text: str) -> str:
    segments = parse_segments(response_text, frozenset())
    validate_html_segment(segments.fragment)
    return segments.fragment


def plan_fix(
    violation: Violation,
    document,
    gateway: LlmGateway,
    alt_store: dict[str, AltDescription] | None = None,
) -> DomPatch:
    """Plan one node replacement. Image-alt fixes come straight from the
    vision store (no code-fix round trip); contrast and general fixes go
    through their prompt, then the structural gate."""
    doc = dom.parse_document(document) if isinstance(document, str) else document
    el = dom.resolve_locator(doc, violation.locator)
    if el is None:
        raise StaleLocatorError(
            f"locator {violation.locator.css_selector!r} does not resolve"
        )
    fragment = dom.outer_html(el)
    key = violation_identity(violation)
    patch = DomPatch(
        locator=violation.locator,
        original_fragment=fragment,
        fixed_fragment="",
        violation_key=key,
    )

    if violation.kind is ViolationKind.IMAGE_ALT:
        desc = (alt_store or {}).get(key)
        if desc is None:
            return patch.reject("no image description available")
        clone = dom.parse_fragment(fragment).element_children()[0]
        clone.attrs["alt"] = desc.text
        patch.fixed_fragment = dom.serialize(clone)
        return patch

    if violation.kind is ViolationKind.CONTRAST:
        bundle = build_prompt(
            PromptKind.CONTRAST,
            {"description": violation.help_text, "original_fragment": fragment},
        )
    else:
        bundle = build_prompt(
            PromptKind.GENERAL,
            {"help_text": violation.help_text, "fragment": fragment},
        )
    try:
        exchange = gateway.complete(bundle)
        patch.fixed_fragment = _fragment_from_response(exchange.response_text)
    except (GatewayError, SegmentParseError, SegmentValidationError) as exc:
        return patch.reject(str(exc))
    return patch


def apply_patch(document: str, patch: DomPatch) -> str:
    """Replace exactly one node; everything else stays byte-identical under
    canonical serialization."""
    doc = dom.parse_document(document)
    matches = dom.select(doc, patch.locator.css_selector)
    el = matches[0] if len(matches) == 1 else None
    if el is None:
        # One re-resolution via the positional path, then give up.
        el = dom.resolve_dom_path(doc, patch.locator.dom_path)
    if el is None:
        patch.reject("stale locator")
        raise StaleLocatorError(
            f"locator {patch.locator.css_selector!r} resolves to != 1 node"
        )
    replacement_doc = dom.parse_fragment(patch.fixed_fragment)
    nodes = [
        n
        for n in replacement_doc.children
        if not (isinstance(n, dom.Text) and not n.data.strip())
    ]
    if not nodes:
        patch.reject("fixed fragment is empty")
        raise StaleLocatorError("fixed fragment contains no nodes")
    dom.replace_node(el, nodes)
    patch.status = PatchStatus.APPLIED
    first_el = next((n for n in nodes if isinstance(n, dom.Element)), None)
    if first_el is not None:
        try:
            patch.applied_selector = dom.build_locator(first_el, doc).css_selector
        except Exception:
            patch.applied_selector = None
    return dom.serialize(doc)


@dataclass
class FixOutcome:
    document: str
    patches: list[DomPatch] = field(default_factory=list)
    discarded: bool = False


def _depth_order(violations) -> list[Violation]:
    # Deepest nodes first so outer replacements cannot invalidate inner
    # selectors; ties broken by reverse document order.
    return sorted(
        violations,
        key=lambda v: (len(v.locator.dom_path), v.locator.position_key),
        reverse=True,
    )


def fix_document(
    document: str,
    report: AuditReport,
    gateway: LlmGateway,
    alt_store: dict[str, AltDescription] | None = None,
    base_url: str | None = None,
    pages=None,
) -> FixOutcome:
    """Plan and apply every fix, then enforce the no-regressions rule: if the
    re-scan shows any new violation key, the whole patch set is discarded."""
    current = document
    patches: list[DomPatch] = []
    for violation in _depth_order(report.violations):
        try:
            patch = plan_fix(violation, current, gateway, alt_store)
        except StaleLocatorError as exc:
            patch = DomPatch(
                locator=violation.locator,
                original_fragment=violation.locator.snippet,
                fixed_fragment="",
                violation_key=violation_identity(violation),
            ).reject(str(exc))
            patches.append(patch)
            continue
        if patch.status == PatchStatus.REJECTED:
            patches.append(patch)
            continue
        try:
            current = apply_patch(current, patch)
        except StaleLocatorError:
            pass  # reject already recorded on the patch
        patches.append(patch)

    rescan = rules.scan_document(
        current, base_url=base_url, pages=pages, source=report.source
    )
    introduced = rescan.identity_keys() - report.identity_keys()
    if introduced:
        log.warning(
            "patch set discarded: %d new violation key(s) introduced", len(introduced)
        )
        for patch in patches:
            if patch.status == PatchStatus.APPLIED:
                patch.reject("patch set introduced new violations")
        return FixOutcome(document=document, patches=patches, discarded=True)
    return FixOutcome(document=current, patches=patches)


def accessibility_attributes(document: str) -> Counter:
    """Multiset of (attr, value) for aria-*, alt and lang across a document."""
    doc = dom.parse_document(document)
    counter: Counter = Counter()
    for el in dom.iter_elements(doc):
        for name, value in el.attrs.items():
            if name == "alt" or name == "lang" or name.startswith("aria-"):
                counter[(name, value or "")] += 1
    return counter


def responsive_merge(original: str, patched: str, gateway: LlmGateway) -> str:
    """Final smart-merge pass. The merged output must retain every
    accessibility attribute of the patched document or it is rejected and the
    patched document is kept unchanged."""
    if original == patched:
        return patched
    bundle = build_prompt(
        PromptKind.RESPONSIVE_MERGE,
        {"original_html": original, "current_html": patched},
    )
    try:
        exchange = gateway.complete(bundle)
        segments = parse_segments(exchange.response_text, frozenset())
        merged = segments.fragment
        validate_html_segment(merged)
    except (GatewayError, SegmentParseError, SegmentValidationError) as exc:
        log.warning("responsive merge skipped: %s", exc)
        return patched
    required = accessibility_attributes(patched)
    got = accessibility_attributes(merged)
    missing = required - got
    if missing:
        log.warning(
            "responsive merge rejected: %d accessibility attribute(s) dropped",
            sum(missing.values()),
        )
        return patched
    return merged


def emit_artifact(document: str, out_path: str | Path) -> Path:
    """Atomic UTF-8 write (temp + rename); parent directories are created."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(document)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return out_path
