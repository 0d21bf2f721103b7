"""Development-level remediation for SPA workspaces: per-component prompts,
segment validation, differential write-back with backups, build verification,
and rollback on any failure.

The workspace ends in exactly one of two states after finalize_or_rollback:
every planned change present, or none of them."""

from __future__ import annotations

import hashlib
import logging
import os
import shlex
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import dom
from .angular import AngularWorkspace, ComponentTriad
from .errors import (
    ContextOverflowError,
    DigestMismatchError,
    EnvironmentError_,
    GatewayError,
    IntegrityError,
    SegmentParseError,
    SegmentValidationError,
)
from .gateway import LlmGateway
from .model import AuditReport
from .prompts import (
    DEFAULT_CONTEXT_BUDGET,
    PromptKind,
    build_prompt,
    render_violations_text,
)
from .segments import (
    STYLES_UNCHANGED_MARKER,
    parse_segments,
    validate_html_segment,
    validate_styles_segment,
    validate_typescript_segment,
)

log = logging.getLogger(__name__)

BACKUP_DIR_NAME = ".a11y-backup"

# Rules whose fixes can implicate component code or styles, not just markup.
_HOLISTIC_RULES = frozenset({"color-contrast", "keyboard-operability"})


class PlanStatus:
    PLANNED = "planned"
    APPLIED = "applied"
    VERIFIED = "verified"
    ROLLED_BACK = "rolled_back"
    FAILED = "failed"


@dataclass
class FileChange:
    path: Path
    old_digest: str
    new_content: str


@dataclass
class PatchPlan:
    component_name: str
    file_changes: list[FileChange]
    backup_dir: Path
    workspace_root: Path
    status: str = PlanStatus.PLANNED
    failures: list[str] = field(default_factory=list)
    prompt_kind: str | None = None


def file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def workspace_digests(root: str | Path, exclude=(BACKUP_DIR_NAME, "node_modules", ".git", "dist")) -> dict[str, str]:
    """Relative path -> sha256 for every file under root (oracle for the
    only-planned-files-changed and rollback-atomicity checks)."""
    root = Path(root)
    digests: dict[str, str] = {}
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(root)
        if any(part in exclude for part in rel.parts):
            continue
        digests[str(rel)] = file_digest(path)
    return digests


def _needs_holistic(report: AuditReport, triad: ComponentTriad) -> bool:
    if triad.inline_template:
        return True
    return any(v.rule_id in _HOLISTIC_RULES for v in report.violations)


def remediate_component(
    triad: ComponentTriad,
    report: AuditReport,
    gateway: LlmGateway,
    shots=(),
    backup_dir: str | Path = BACKUP_DIR_NAME,
    workspace_root: str | Path | None = None,
    context_budget: int = DEFAULT_CONTEXT_BUDGET,
) -> PatchPlan:
    """Prompt for the component, parse and validate segments, and plan one
    file change per validated segment. A fully rejected response yields an
    empty failed plan (the discard rule). Holistic prompts are never trimmed;
    when a triad exceeds the budget the component falls over to per-violation
    general prompts against the template."""
    workspace_root = Path(workspace_root or triad.typescript_path.parent)
    plan = PatchPlan(
        component_name=triad.component_name,
        file_changes=[],
        backup_dir=Path(backup_dir),
        workspace_root=workspace_root,
    )
    if not report.violations:
        plan.status = PlanStatus.FAILED
        plan.failures.append("nothing to remediate")
        return plan

    violations_text = render_violations_text(report.violations)
    holistic = _needs_holistic(report, triad)
    plan.prompt_kind = (
        PromptKind.ANGULAR_HOLISTIC.value if holistic else PromptKind.ANGULAR_TEMPLATE.value
    )
    if holistic:
        try:
            bundle = build_prompt(
                PromptKind.ANGULAR_HOLISTIC,
                {
                    "component_name": triad.component_name,
                    "violations_text": violations_text,
                    "template_content": triad.template_content,
                    "typescript_content": triad.typescript_content,
                    "styles_content": triad.styles_content or STYLES_UNCHANGED_MARKER,
                },
                images=tuple(shots),
                budget=context_budget,
            )
        except ContextOverflowError as exc:
            log.warning(
                "%s: holistic context over budget (%s); falling over to "
                "per-violation general prompts", triad.component_name, exc,
            )
            return _fallback_general_fixes(plan, triad, report, gateway)
    else:
        bundle = build_prompt(
            PromptKind.ANGULAR_TEMPLATE,
            {
                "total": str(len(report.violations)),
                "template_path": triad.template_display_path,
                "violations_text": violations_text,
                "template_content": triad.template_content,
            },
            trim_selectors=tuple(
                v.locator.css_selector for v in report.violations
            ),
            budget=context_budget,
        )

    try:
        exchange = gateway.complete(bundle)
        segments = parse_segments(exchange.response_text, bundle.expected_delimiters)
    except (GatewayError, SegmentParseError) as exc:
        plan.status = PlanStatus.FAILED
        plan.failures.append(str(exc))
        return plan

    def stage(path: Path, new_content: str) -> None:
        if path.read_text(encoding="utf-8") == new_content:
            return  # differential write-back: unchanged files are not touched
        plan.file_changes.append(
            FileChange(path=path, old_digest=file_digest(path), new_content=new_content)
        )

    if segments.template is not None:
        try:
            validate_html_segment(segments.template)
            if triad.inline_template:
                # The TYPESCRIPT segment carries the component file, inline
                # template included; a separate write target does not exist.
                plan.failures.append(
                    "template segment ignored: component uses an inline template"
                )
            else:
                stage(triad.template_path, segments.template)
        except SegmentValidationError as exc:
            plan.failures.append(f"template rejected: {exc}")
    if segments.typescript is not None:
        try:
            validate_typescript_segment(segments.typescript, triad.class_name())
            stage(triad.typescript_path, segments.typescript)
        except SegmentValidationError as exc:
            plan.failures.append(f"typescript rejected: {exc}")
    if segments.styles is not None:
        try:
            validate_styles_segment(segments.styles)
            if segments.styles.strip() != STYLES_UNCHANGED_MARKER:
                if triad.styles_path is None:
                    plan.failures.append(
                        "styles segment ignored: component has no stylesheet"
                    )
                else:
                    stage(triad.styles_path, segments.styles)
        except SegmentValidationError as exc:
            plan.failures.append(f"styles rejected: {exc}")

    if not plan.file_changes:
        plan.status = PlanStatus.FAILED
        if not plan.failures:
            plan.failures.append("response produced no effective change")
    return plan


def _fallback_general_fixes(
    plan: PatchPlan,
    triad: ComponentTriad,
    report: AuditReport,
    gateway: LlmGateway,
) -> PatchPlan:
    """Over-budget failover: one general prompt per violation, each fix
    spliced into the template fragment; validated fixes become one template
    file change."""
    plan.prompt_kind = "general_fallback"
    if triad.inline_template:
        plan.status = PlanStatus.FAILED
        plan.failures.append("over budget and inline template: no write target")
        return plan
    tree = dom.parse_fragment(triad.template_content)
    applied = 0
    ordered = sorted(
        report.violations,
        key=lambda v: (len(v.locator.dom_path), v.locator.position_key),
        reverse=True,
    )
    for violation in ordered:
        el = dom.resolve_locator(tree, violation.locator)
        if el is None:
            plan.failures.append(
                f"{violation.rule_id}: locator {violation.locator.css_selector!r} "
                "does not resolve in the template fragment"
            )
            continue
        bundle = build_prompt(
            PromptKind.GENERAL,
            {"help_text": violation.help_text, "fragment": dom.outer_html(el)},
        )
        try:
            exchange = gateway.complete(bundle)
            segments = parse_segments(exchange.response_text, frozenset())
            validate_html_segment(segments.fragment)
        except (GatewayError, SegmentParseError, SegmentValidationError) as exc:
            plan.failures.append(f"{violation.rule_id}: {exc}")
            continue
        replacement = [
            n
            for n in dom.parse_fragment(segments.fragment).children
            if not (isinstance(n, dom.Text) and not n.data.strip())
        ]
        if not replacement:
            plan.failures.append(f"{violation.rule_id}: empty fixed fragment")
            continue
        dom.replace_node(el, replacement)
        applied += 1
    if applied == 0:
        plan.status = PlanStatus.FAILED
        if not plan.failures:
            plan.failures.append("no fallback fix applied")
        return plan
    new_content = dom.serialize(tree)
    if new_content != triad.template_content:
        plan.file_changes.append(
            FileChange(
                path=triad.template_path,
                old_digest=file_digest(triad.template_path),
                new_content=new_content,
            )
        )
    if not plan.file_changes:
        plan.status = PlanStatus.FAILED
        plan.failures.append("fallback produced no effective change")
    return plan


def _atomic_write_text(path: Path, content: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def apply_with_backup(plan: PatchPlan) -> PatchPlan:
    """Copy originals into the backup dir (mirroring relative paths), then
    write atomically. A digest mismatch aborts before any write; a mid-apply
    failure rolls back immediately."""
    if plan.status != PlanStatus.PLANNED:
        raise DigestMismatchError(f"plan is {plan.status}, not planned")
    for change in plan.file_changes:
        if file_digest(change.path) != change.old_digest:
            raise DigestMismatchError(
                f"{change.path} changed on disk since planning"
            )
    backups: list[tuple[Path, Path]] = []
    for change in plan.file_changes:
        rel = change.path.relative_to(plan.workspace_root)
        backup_path = plan.backup_dir / rel
        backup_path.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(change.path, backup_path)
        backups.append((change.path, backup_path))
    written: list[tuple[Path, Path]] = []
    try:
        for (change, (orig, backup)) in zip(plan.file_changes, backups):
            _atomic_write_text(change.path, change.new_content)
            written.append((orig, backup))
    except BaseException:
        for orig, backup in written:
            shutil.copy2(backup, orig)
        raise
    plan.status = PlanStatus.APPLIED
    return plan


@dataclass
class BuildOutcome:
    command: str
    exit_code: int
    duration_ms: int
    log_excerpt: str
    passed: bool


LOG_EXCERPT_LINES = 200


def verify_build(
    workspace: AngularWorkspace,
    command_override: str | None = None,
    timeout_s: float = 1800.0,
) -> BuildOutcome:
    """Run the workspace build command and capture the outcome. A missing
    executable is an environment error, distinct from a failing build."""
    command = command_override or workspace.build_command
    if not command:
        raise EnvironmentError_("workspace declares no build target and no override given")
    argv = shlex.split(command)
    started = time.monotonic()
    try:
        proc = subprocess.run(
            argv,
            cwd=workspace.root,
            capture_output=True,
            text=True,
            timeout=timeout_s,
        )
    except FileNotFoundError:
        raise EnvironmentError_(f"build command not found: {argv[0]!r}")
    except subprocess.TimeoutExpired:
        return BuildOutcome(
            command=command,
            exit_code=-1,
            duration_ms=int((time.monotonic() - started) * 1000),
            log_excerpt="build timed out",
            passed=False,
        )
    duration_ms = int((time.monotonic() - started) * 1000)
    lines = ((proc.stdout or "") + (proc.stderr or "")).splitlines()
    return BuildOutcome(
        command=command,
        exit_code=proc.returncode,
        duration_ms=duration_ms,
        log_excerpt="\n".join(lines[-LOG_EXCERPT_LINES:]),
        passed=proc.returncode == 0,
    )


def finalize_or_rollback(plan: PatchPlan, build: BuildOutcome | None, delta) -> PatchPlan:
    """Verified iff the build passed (or was explicitly skipped) and the
    re-scan introduced nothing new; otherwise restore every file from backup,
    byte-identically."""
    if plan.status != PlanStatus.APPLIED:
        raise IntegrityError(f"plan is {plan.status}, not applied")
    build_ok = build.passed if build is not None else True
    rescan_ok = delta is None or not delta.introduced_keys
    if build_ok and rescan_ok:
        plan.status = PlanStatus.VERIFIED
        return plan
    for change in plan.file_changes:
        rel = change.path.relative_to(plan.workspace_root)
        backup_path = plan.backup_dir / rel
        if not backup_path.exists():
            raise IntegrityError(f"backup missing for {change.path}")
        shutil.copy2(backup_path, change.path)
        if file_digest(change.path) != change.old_digest:
            raise IntegrityError(f"rollback of {change.path} did not restore bytes")
    plan.status = PlanStatus.ROLLED_BACK
    if build is not None and not build.passed:
        plan.failures.append(f"build failed (exit {build.exit_code})")
    if delta is not None and delta.introduced_keys:
        plan.failures.append(
            f"re-scan introduced {len(delta.introduced_keys)} new violation key(s)"
        )
    return plan
