"""Closes the loop: violation deltas, the remediation-rate arithmetic, the
structural-diff aid for semantic verification, and the machine-readable run
report."""

from __future__ import annotations

import json
import os
import tempfile
from collections import Counter
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from . import dom
from .errors import MergeError, UndefinedRateError
from .model import AuditReport

SCHEMA_VERSION = 1
TOOL_NAME = "a11yrepair"
TOOL_VERSION = "0.1.0"


class BuildIntegrity:
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"
    NA = "n/a"


@dataclass(frozen=True)
class ViolationDelta:
    fixed_keys: frozenset[str]
    remaining_keys: frozenset[str]
    introduced_keys: frozenset[str]


def compute_delta(before: AuditReport, after: AuditReport) -> ViolationDelta:
    if before.source != after.source:
        raise MergeError(
            f"delta over different sources: {before.source!r} vs {after.source!r}"
        )
    b, a = before.identity_keys(), after.identity_keys()
    return ViolationDelta(
        fixed_keys=frozenset(b - a),
        remaining_keys=frozenset(b & a),
        introduced_keys=frozenset(a - b),
    )


def remediation_rate(v_initial: int, v_final: int) -> float:
    """((V_initial - V_final) / V_initial) * 100, two decimals, half-up."""
    if v_initial == 0:
        raise UndefinedRateError("remediation rate undefined for a zero baseline")
    if v_initial < 0 or v_final < 0:
        raise UndefinedRateError("violation counts must be non-negative")
    rate = (Decimal(v_initial) - Decimal(v_final)) / Decimal(v_initial) * 100
    return float(rate.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass
class MetricsSummary:
    v_initial: int
    v_final: int
    rr_percent: float | None
    bi: str
    sfv_flags: tuple[str, ...] = ()
    runtime_ms: int = 0


# ---------------------------------------------------------------------------
# Structural diff (the automated SFV aid)

_INTERACTIVE_TAGS = ("a", "button", "input", "select", "textarea")
_FORM_CONTROL_TAGS = frozenset({"input", "select", "textarea"})
_TRACKED_ATTRS = ("href", "src", "type")


def _is_handler_attr(name: str) -> bool:
    return (name.startswith("on") and len(name) > 2) or (
        name.startswith("(") and name.endswith(")")
    )


@dataclass
class _Inventory:
    tag_counts: Counter
    handler_counts: Counter
    form_controls: int
    by_id: dict[str, dom.Element]
    by_path: dict[tuple, dom.Element]


def _inventory(document: str) -> _Inventory:
    doc = dom.parse_document(document)
    tag_counts: Counter = Counter()
    handler_counts: Counter = Counter()
    by_id: dict[str, dom.Element] = {}
    by_path: dict[tuple, dom.Element] = {}
    form_controls = 0
    for el in dom.iter_elements(doc):
        handlers = [n for n in el.attrs if _is_handler_attr(n)]
        for name in handlers:
            handler_counts[name] += 1
        interactive = el.tag in _INTERACTIVE_TAGS or bool(handlers)
        if not interactive:
            continue
        tag_counts[el.tag] += 1
        if el.tag in _FORM_CONTROL_TAGS:
            form_controls += 1
        el_id = el.get("id")
        if el_id:
            by_id.setdefault(el_id, el)
        by_path.setdefault(dom.dom_path_of(el), el)
    return _Inventory(tag_counts, handler_counts, form_controls, by_id, by_path)


def structural_diff(before: str, after: str) -> list[str]:
    """Flags destructive changes only: removed interactive elements, removed
    event handlers/bindings, changed href/src/type on surviving elements, and
    form-control count changes. Accessibility attribute additions (aria-*,
    alt, lang, role) are never flagged."""
    b = _inventory(before)
    a = _inventory(after)
    flags: list[str] = []

    for tag in sorted(b.tag_counts):
        if a.tag_counts.get(tag, 0) < b.tag_counts[tag]:
            flags.append(
                f"interactive element removed: <{tag}> "
                f"({b.tag_counts[tag]} -> {a.tag_counts.get(tag, 0)})"
            )
    for name in sorted(b.handler_counts):
        if a.handler_counts.get(name, 0) < b.handler_counts[name]:
            flags.append(f"event handler removed: {name}")
    if a.form_controls != b.form_controls:
        flags.append(
            f"form control count changed: {b.form_controls} -> {a.form_controls}"
        )

    def compare(el_before: dom.Element, el_after: dom.Element, label: str) -> None:
        if el_after.tag != el_before.tag:
            return
        for attr in _TRACKED_ATTRS:
            old = el_before.get(attr)
            if old is not None and el_after.get(attr) != old:
                flags.append(f"attribute changed on surviving element {label}: {attr}")

    seen = set()
    for el_id, el_before in sorted(b.by_id.items()):
        el_after = a.by_id.get(el_id)
        if el_after is not None:
            compare(el_before, el_after, f"#{el_id}")
            seen.add(id(el_before))
    for path, el_before in b.by_path.items():
        if id(el_before) in seen:
            continue
        el_after = a.by_path.get(path)
        if el_after is not None:
            compare(el_before, el_after, "/".join(f"{t}[{i}]" for t, i in path))

    return flags


# ---------------------------------------------------------------------------
# Run report document


def target_entry(
    source: str,
    kind: str,
    summary: MetricsSummary,
    delta: ViolationDelta | None = None,
    outcomes: list[dict] | None = None,
    artifact: str | None = None,
    build: dict | None = None,
    error: str | None = None,
) -> dict:
    return {
        "source": source,
        "kind": kind,
        "v_initial": summary.v_initial,
        "v_final": summary.v_final,
        "rr_percent": summary.rr_percent,
        "bi": summary.bi,
        "sfv_flags": list(summary.sfv_flags),
        "runtime_ms": summary.runtime_ms,
        "delta": (
            {
                "fixed": sorted(delta.fixed_keys),
                "remaining": sorted(delta.remaining_keys),
                "introduced": sorted(delta.introduced_keys),
            }
            if delta
            else None
        ),
        "violations": outcomes or [],
        "artifact": artifact,
        "build": build,
        "error": error,
    }


def target_verified(entry: dict) -> bool:
    if entry.get("error"):
        return False
    if entry["bi"] == BuildIntegrity.FAIL:
        return False
    delta = entry.get("delta") or {}
    if delta.get("introduced"):
        return False
    return entry["v_final"] == 0


def exit_code_for(entries: list[dict], mode: str) -> int:
    """0: all targets verified; 2: some; 3: none. Audit-only runs report 0."""
    if mode == "audit" or not entries:
        return 0
    verified = sum(1 for e in entries if target_verified(e))
    if verified == len(entries):
        return 0
    return 2 if verified > 0 else 3


def aggregate_rates(entries: list[dict]) -> dict:
    """Dataset-level remediation rate both ways: mean of per-target rates and
    the pooled ratio. The two conventions can disagree; both are reported."""
    rates = [e["rr_percent"] for e in entries if isinstance(e.get("rr_percent"), (int, float))]
    pooled_initial = sum(e["v_initial"] for e in entries if e.get("rr_percent") is not None)
    pooled_final = sum(e["v_final"] for e in entries if e.get("rr_percent") is not None)
    return {
        "rr_mean_of_targets": (
            float(
                (Decimal(str(sum(rates))) / len(rates)).quantize(
                    Decimal("0.01"), rounding=ROUND_HALF_UP
                )
            )
            if rates
            else None
        ),
        "rr_pooled": (
            remediation_rate(pooled_initial, pooled_final) if pooled_initial else None
        ),
    }


def emit_run_report(
    out_path: str | Path,
    mode: str,
    config: dict,
    entries: list[dict],
    started_at: str,
    runtime_ms: int,
) -> Path:
    """One JSON document per run with stable field ordering; volatile fields
    (timestamps, timings) are confined to known keys so diffs can normalize
    them."""
    out_path = Path(out_path)
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL_NAME,
        "tool_version": TOOL_VERSION,
        "mode": mode,
        "started_at": started_at,
        "runtime_ms": runtime_ms,
        "config": config,
        "targets": entries,
        "summary": {
            "targets_total": len(entries),
            "targets_verified": sum(1 for e in entries if target_verified(e)),
            "exit_code": exit_code_for(entries, mode),
            **aggregate_rates(entries),
        },
    }
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return out_path
