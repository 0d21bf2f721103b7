"""Command-line entry point: configuration, the audit / fix-web / fix-angular
/ report subcommands, and exit-code policy.

Exit codes: 0 all targets verified (or audit completed), 2 partial, 3 none,
64 usage/config error, 69 environment error (missing driver or build tool).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlsplit

from . import patch_angular, patch_static, report as report_mod, rules, vision
from .angular import discover_components, load_workspace, static_scan_component
from .errors import (
    A11yRepairError,
    ConfigError,
    EnvironmentError_,
    GatewayError,
    WorkspaceError,
)
from .gateway import DEFAULT_MODEL, GatewayMode, LlmGateway
from .model import Scanner, ViolationKind, merge_reports, violation_identity
from .report import BuildIntegrity, MetricsSummary

log = logging.getLogger(__name__)

ENV_PREFIX = "A11YR_"

EX_USAGE = 64
EX_UNAVAILABLE = 69


@dataclass
class RunConfig:
    mode: str = "audit"
    targets: tuple[str, ...] = ()
    webdriver_url: str | None = None
    offline: bool = False
    model_id: str = DEFAULT_MODEL
    gateway_mode: str = "live"
    cassette_path: str | None = None
    image_cache: str = vision.DEFAULT_CACHE_DIR
    out_dir: str = "out"
    report_path: str = "a11yrepair-report.json"
    build_cmd: str | None = None
    skip_build: bool = False
    viewports: str = "mobile,tablet,desktop"
    stabilize_budget_ms: int = 30_000
    http_timeout_s: float = 30.0
    llm_timeout_s: float = 120.0
    parallelism: int = 4

    def validate(self) -> None:
        if self.mode not in ("audit", "fix_web", "fix_angular", "report"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.gateway_mode not in ("live", "record", "replay"):
            raise ConfigError(f"unknown gateway mode {self.gateway_mode!r}")
        if self.gateway_mode == "replay" and not self.cassette_path:
            raise ConfigError("replay mode requires --cassette")
        if self.mode == "fix_web" and not self.offline and not self.webdriver_url:
            raise ConfigError("fix-web requires --webdriver-url unless --offline")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")

    def public_dict(self) -> dict:
        # Echoed into the report; never includes credentials (env-only).
        return {f.name: getattr(self, f.name) if f.name != "targets"
                else list(self.targets) for f in fields(RunConfig)}


_BOOL_FIELDS = {"offline", "skip_build"}
_INT_FIELDS = {"stabilize_budget_ms", "parallelism"}
_FLOAT_FIELDS = {"http_timeout_s", "llm_timeout_s"}


def _coerce(name: str, raw: str):
    if name in _BOOL_FIELDS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key {name!r} wants a boolean, got {raw!r}")
    if name in _INT_FIELDS:
        return int(raw)
    if name in _FLOAT_FIELDS:
        return float(raw)
    return raw


def parse_config_file(text: str) -> dict:
    """Flat `key = value` lines; '#' comments; unknown keys are errors."""
    known = {f.name for f in fields(RunConfig)} - {"mode", "targets"}
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value")
        name, _, raw = line.partition("=")
        name = name.strip()
        raw = raw.strip().strip("\"'")
        if name not in known:
            raise ConfigError(f"config line {lineno}: unknown key {name!r}")
        values[name] = _coerce(name, raw)
    return values


def load_config(ns: argparse.Namespace, env: dict | None = None) -> RunConfig:
    """Precedence: CLI flag > environment > config file > defaults."""
    env = os.environ if env is None else env
    config = RunConfig()

    if getattr(ns, "config", None):
        path = Path(ns.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        for name, value in parse_config_file(path.read_text(encoding="utf-8")).items():
            setattr(config, name, value)

    for f in fields(RunConfig):
        if f.name in ("mode", "targets"):
            continue
        raw = env.get(ENV_PREFIX + f.name.upper())
        if raw is not None:
            setattr(config, f.name, _coerce(f.name, raw))

    for f in fields(RunConfig):
        value = getattr(ns, f.name, None)
        if value is not None:
            setattr(config, f.name, value)

    config.mode = ns.mode.replace("-", "_")
    config.targets = tuple(getattr(ns, "targets", ()) or ())
    config.validate()
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="a11yrepair",
        description=(
            "Detect WCAG 2.2 violations in static pages and Angular workspaces, "
            "generate fixes through templated LLM prompts, apply them surgically, "
            "and validate every fix by re-scan and build verification."
        ),
    )
    sub = parser.add_subparsers(dest="mode", required=True)

    def common(p: argparse.ArgumentParser, angular: bool = False) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--webdriver-url", dest="webdriver_url",
                       help="W3C WebDriver endpoint (e.g. http://localhost:9515)")
        p.add_argument("--offline", action="store_const", const=True, default=None,
                       help="native rules only, no browser")
        p.add_argument("--model", dest="model_id", help="completion model id")
        p.add_argument("--gateway", dest="gateway_mode",
                       choices=["live", "record", "replay"])
        p.add_argument("--cassette", dest="cassette_path",
                       help="record/replay cassette (JSONL)")
        p.add_argument("--image-cache", dest="image_cache")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--report", dest="report_path")
        p.add_argument("--viewports", dest="viewports")
        p.add_argument("--stabilize-budget", dest="stabilize_budget_ms", type=int)
        p.add_argument("--http-timeout", dest="http_timeout_s", type=float)
        p.add_argument("--llm-timeout", dest="llm_timeout_s", type=float)
        p.add_argument("--parallelism", type=int)
        if angular:
            p.add_argument("--build-cmd", dest="build_cmd")
            p.add_argument("--skip-build", dest="skip_build",
                           action="store_const", const=True, default=None)

    p_audit = sub.add_parser("audit", help="scan targets, report violations, no fixes")
    p_audit.add_argument("targets", nargs="+")
    common(p_audit)

    p_web = sub.add_parser("fix-web", help="fix static pages and emit artifacts")
    p_web.add_argument("targets", nargs="+")
    common(p_web)

    p_ng = sub.add_parser("fix-angular", help="fix an Angular workspace in place")
    p_ng.add_argument("targets", nargs=1, metavar="workspace")
    common(p_ng, angular=True)

    p_rep = sub.add_parser("report", help="summarize an existing run report")
    p_rep.add_argument("targets", nargs=1, metavar="report.json")

    return parser


# ---------------------------------------------------------------------------
# Pipeline helpers


def _make_gateway(config: RunConfig) -> LlmGateway:
    return LlmGateway(
        mode=GatewayMode(config.gateway_mode),
        model_id=config.model_id,
        cassette_path=config.cassette_path,
        api_key=os.environ.get("A11YR_API_KEY") or os.environ.get("OPENAI_API_KEY"),
        timeout_s=config.llm_timeout_s,
    )


def _read_target(target: str) -> tuple[str, str | None]:
    """-> (html, base_url for relative resolution)."""
    if target.startswith("file://"):
        target = urlsplit(target).path
    path = Path(target)
    html = path.read_text(encoding="utf-8")
    base = str(path.parent) + "/"
    return html, base


def _artifact_path(out_dir: str, target: str) -> Path:
    parts = urlsplit(target)
    if parts.scheme in ("http", "https"):
        rel = (parts.path or "/index").strip("/") or "index"
        return Path(out_dir) / parts.netloc / f"{rel}.fixed.html"
    stem = Path(target).stem or "page"
    return Path(out_dir) / f"{stem}.fixed.html"


def _scan_offline(target: str, siblings: dict[str, str]):
    html, base = _read_target(target)
    pages = [v for k, v in siblings.items() if k != target] or None
    before = rules.scan_document(html, base_url=None, pages=pages, source=target)
    return html, base, pages, before


def _audit_one_browser(config: RunConfig, target: str):
    from .webdriver import BrowserAudit, reflow_violation

    audit = BrowserAudit(config.webdriver_url)
    session = audit.open_session()
    try:
        audit.navigate(session, target)
        audit.stabilize(session, budget_ms=config.stabilize_budget_ms)
        html = audit.get_dom(session)
        native = rules.scan_document(html, base_url=target, source=target)
        try:
            injected = audit.run_injected_audit(session)
            injected = type(injected).build(
                source=target,
                violations=injected.violations,
                scanner=Scanner.INJECTED_AUDIT,
            )
            before = merge_reports(native, injected)
        except A11yRepairError as exc:
            log.warning("injected audit failed (%s); native rules only", exc)
            before = native
        profiles = tuple(
            name.strip() for name in config.viewports.split(",") if name.strip()
        )
        capture = audit.capture_viewports(session, profiles=profiles)
        for shot in capture.shots:
            vision.cache_viewport_shot(
                target, shot.viewport_name, shot.image, config.image_cache
            )
        if capture.reflow_at_320:
            before = merge_reports(
                before,
                type(before).build(
                    source=target,
                    violations=[reflow_violation(target)],
                    scanner=before.scanner,
                ),
            )
        return html, before
    finally:
        audit.close_session(session)


def _violation_outcomes(before, delta, patches=None) -> list[dict]:
    rejected = {
        p.violation_key: p.reject_reason
        for p in (patches or [])
        if p.status == patch_static.PatchStatus.REJECTED
    }
    outcomes = []
    for v in before.violations:
        key = violation_identity(v)
        if key in delta.fixed_keys:
            status = "fixed"
        elif key in rejected:
            status = "rejected"
        else:
            status = "failed"
        entry = {"key": key, "rule_id": v.rule_id,
                 "selector": v.locator.css_selector, "status": status}
        if key in rejected and rejected[key]:
            entry["reason"] = rejected[key]
        outcomes.append(entry)
    return outcomes


def _run_pool(one, targets, parallelism: int, sink: list[dict]) -> None:
    """Run per-target work, appending each finished entry into the sink so an
    interrupted run still flushes a partial report; entry order is restored
    on normal completion."""
    if parallelism > 1 and len(targets) > 1:
        indexed: list[tuple[int, dict]] = []
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            futures = {pool.submit(one, t): i for i, t in enumerate(targets)}
            for future in as_completed(futures):
                entry = future.result()
                indexed.append((futures[future], entry))
                sink.append(entry)
        sink[:] = [entry for _, entry in sorted(indexed, key=lambda p: p[0])]
    else:
        for target in targets:
            sink.append(one(target))


def run_audit(config: RunConfig, sink: list[dict] | None = None) -> list[dict]:
    entries = [] if sink is None else sink
    siblings: dict[str, str] = {}
    if config.offline:
        for t in config.targets:
            try:
                siblings[t] = _read_target(t)[0]
            except OSError as exc:
                raise ConfigError(f"cannot read target {t}: {exc}")

    def one(target: str) -> dict:
        started = time.monotonic()
        if config.offline:
            _, _, _, before = _scan_offline(target, siblings)
        else:
            _, before = _audit_one_browser(config, target)
        summary = MetricsSummary(
            v_initial=len(before),
            v_final=len(before),
            rr_percent=None,
            bi=BuildIntegrity.NA,
            runtime_ms=int((time.monotonic() - started) * 1000),
        )
        outcomes = [
            {
                "key": violation_identity(v),
                "rule_id": v.rule_id,
                "selector": v.locator.css_selector,
                "status": "detected",
                "help_text": v.help_text,
            }
            for v in before.violations
        ]
        return report_mod.target_entry(
            source=target, kind="audit", summary=summary, outcomes=outcomes
        )

    _run_pool(one, config.targets, config.parallelism, entries)
    return entries


def run_fix_web(config: RunConfig, sink: list[dict] | None = None) -> list[dict]:
    entries = [] if sink is None else sink
    gateway = _make_gateway(config)
    resolver = vision.VisionResolver(
        gateway, cache_dir=config.image_cache, fetch_timeout_s=config.http_timeout_s
    )
    siblings: dict[str, str] = {}
    if config.offline:
        for t in config.targets:
            siblings[t] = _read_target(t)[0]

    def one(target: str) -> dict:
        started = time.monotonic()
        if config.offline:
            html, base, pages, before = _scan_offline(target, siblings)
        else:
            html, before = _audit_one_browser(config, target)
            base, pages = target, None

        tasks = vision.collect_image_tasks(before, html, base_url=base)
        described = resolver.resolve_all(tasks)
        key_by_selector = {t.locator.css_selector: t.cache_key for t in tasks}
        alt_store = {}
        for v in before.violations:
            if v.kind is ViolationKind.IMAGE_ALT:
                cache_key = key_by_selector.get(v.locator.css_selector)
                if cache_key in described:
                    alt_store[violation_identity(v)] = described[cache_key]

        outcome = patch_static.fix_document(
            html, before, gateway, alt_store, base_url=None, pages=pages
        )
        final = outcome.document
        if not outcome.discarded and final != html:
            final = patch_static.responsive_merge(html, final, gateway)

        artifact = patch_static.emit_artifact(final, _artifact_path(config.out_dir, target))
        after = rules.scan_document(final, base_url=None, pages=pages, source=target)
        delta = report_mod.compute_delta(before, after)
        rr = (
            report_mod.remediation_rate(len(before), len(after))
            if len(before) > 0
            else None
        )
        sfv = report_mod.structural_diff(html, final)
        summary = MetricsSummary(
            v_initial=len(before),
            v_final=len(after),
            rr_percent=rr,
            bi=BuildIntegrity.NA,
            sfv_flags=tuple(sfv),
            runtime_ms=int((time.monotonic() - started) * 1000),
        )
        return report_mod.target_entry(
            source=target,
            kind="static",
            summary=summary,
            delta=delta,
            outcomes=_violation_outcomes(before, delta, outcome.patches),
            artifact=str(artifact),
        )

    _run_pool(one, config.targets, config.parallelism, entries)
    return entries


def _reload_triad(triad):
    from .angular import ComponentTriad

    return ComponentTriad(
        component_name=triad.component_name,
        template_path=triad.template_path,
        typescript_path=triad.typescript_path,
        styles_path=triad.styles_path,
        template_content=(
            triad.template_path.read_text(encoding="utf-8")
            if not triad.inline_template
            else _inline_template_of(triad)
        ),
        typescript_content=triad.typescript_path.read_text(encoding="utf-8"),
        styles_content=(
            triad.styles_path.read_text(encoding="utf-8") if triad.styles_path else ""
        ),
        selector=triad.selector,
        inline_template=triad.inline_template,
    )


def _inline_template_of(triad) -> str:
    from .angular import parse_component_metadata

    meta = parse_component_metadata(
        triad.typescript_path.read_text(encoding="utf-8")
    )
    return (meta or {}).get("template") or triad.template_content


def run_fix_angular(config: RunConfig, sink: list[dict] | None = None) -> list[dict]:
    root = Path(config.targets[0])
    ws = load_workspace(root)
    discovery = discover_components(ws)
    gateway = _make_gateway(config)
    run_id = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
    backup_base = ws.root / patch_angular.BACKUP_DIR_NAME / run_id

    entries = [] if sink is None else sink
    for path, message in discovery.errors:
        log.warning("discovery: %s: %s", path, message)
    for triad in discovery.triads:
        started = time.monotonic()
        before = static_scan_component(triad)
        if not before.violations:
            continue
        plan = patch_angular.remediate_component(
            triad,
            before,
            gateway,
            backup_dir=backup_base / triad.component_name,
            workspace_root=ws.root,
        )
        bi = BuildIntegrity.SKIPPED if config.skip_build else BuildIntegrity.NA
        build_info = None
        if plan.status == patch_angular.PlanStatus.FAILED:
            summary = MetricsSummary(
                v_initial=len(before), v_final=len(before), rr_percent=0.0,
                bi=bi, runtime_ms=int((time.monotonic() - started) * 1000),
            )
            entries.append(
                report_mod.target_entry(
                    source=triad.template_display_path,
                    kind="angular_component",
                    summary=summary,
                    outcomes=[
                        {
                            "key": violation_identity(v),
                            "rule_id": v.rule_id,
                            "selector": v.locator.css_selector,
                            "status": "failed",
                        }
                        for v in before.violations
                    ],
                    error="; ".join(plan.failures) or "remediation failed",
                )
            )
            continue

        patch_angular.apply_with_backup(plan)
        build = None
        if not config.skip_build:
            build = patch_angular.verify_build(ws, config.build_cmd)
            bi = BuildIntegrity.PASS if build.passed else BuildIntegrity.FAIL
            build_info = {
                "command": build.command,
                "exit_code": build.exit_code,
                "duration_ms": build.duration_ms,
                "log_excerpt": build.log_excerpt,
            }
        after = static_scan_component(_reload_triad(triad))
        delta = report_mod.compute_delta(before, after)
        plan = patch_angular.finalize_or_rollback(plan, build, delta)

        if plan.status == patch_angular.PlanStatus.VERIFIED:
            v_final = len(after)
            outcomes = []
            for v in before.violations:
                key = violation_identity(v)
                outcomes.append(
                    {
                        "key": key,
                        "rule_id": v.rule_id,
                        "selector": v.locator.css_selector,
                        "status": "fixed" if key in delta.fixed_keys else "failed",
                    }
                )
            sfv = tuple(
                report_mod.structural_diff(
                    triad.template_content, _reload_triad(triad).template_content
                )
            ) if not triad.inline_template else ()
        else:
            v_final = len(before)
            delta = None
            outcomes = [
                {
                    "key": violation_identity(v),
                    "rule_id": v.rule_id,
                    "selector": v.locator.css_selector,
                    "status": "rolled_back",
                }
                for v in before.violations
            ]
            sfv = ()
        rr = report_mod.remediation_rate(len(before), v_final)
        summary = MetricsSummary(
            v_initial=len(before), v_final=v_final, rr_percent=rr, bi=bi,
            sfv_flags=sfv, runtime_ms=int((time.monotonic() - started) * 1000),
        )
        entries.append(
            report_mod.target_entry(
                source=triad.template_display_path,
                kind="angular_component",
                summary=summary,
                delta=delta,
                outcomes=outcomes,
                build=build_info,
            )
        )
    return entries


def run_report_summary(path: str) -> int:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    for entry in data.get("targets", []):
        rr = entry.get("rr_percent")
        rr_text = f"{rr:.2f}%" if isinstance(rr, (int, float)) else "n/a"
        print(
            f"{entry['source']}: {entry['v_initial']} -> {entry['v_final']} "
            f"violations, RR {rr_text}, BI {entry['bi']}, "
            f"SFV flags {len(entry.get('sfv_flags', []))}"
        )
    summary = data.get("summary", {})
    print(
        f"targets verified: {summary.get('targets_verified', 0)}"
        f"/{summary.get('targets_total', 0)}"
    )
    return int(summary.get("exit_code", 0))


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get(ENV_PREFIX + "LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.mode == "report":
        try:
            return run_report_summary(ns.targets[0])
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot summarize report: {exc}", file=sys.stderr)
            return EX_USAGE

    started_at = datetime.now(timezone.utc).isoformat()
    started = time.monotonic()
    try:
        config = load_config(ns)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE

    entries: list[dict] = []
    interrupted = False
    try:
        if config.mode == "audit":
            run_audit(config, entries)
        elif config.mode == "fix_web":
            run_fix_web(config, entries)
        else:
            run_fix_angular(config, entries)
    except KeyboardInterrupt:
        interrupted = True
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_USAGE
    except (EnvironmentError_, WorkspaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_UNAVAILABLE
    except GatewayError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    report_mod.emit_run_report(
        config.report_path,
        mode=config.mode,
        config=config.public_dict(),
        entries=entries,
        started_at=started_at,
        runtime_ms=int((time.monotonic() - started) * 1000),
    )
    if interrupted:
        print("interrupted: partial report written", file=sys.stderr)
        return 130
    return report_mod.exit_code_for(entries, config.mode)


if __name__ == "__main__":
    sys.exit(main())
