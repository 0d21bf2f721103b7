"""Drives a real browser over the W3C WebDriver wire protocol: navigation,
DOM stabilization via the injected probe, injected audits, multi-viewport
screenshots, and live-DOM serialization.

No vendor client library: commands are plain HTTP against the session
endpoints, which keeps the driver swappable and the tests able to script a
stub server."""

from __future__ import annotations

import base64
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from importlib import resources

from .errors import AuditError, SessionError
from .model import (
    CRITERIA,
    AuditReport,
    Level,
    NodeLocator,
    Scanner,
    Severity,
    Violation,
    ViolationKind,
    WcagCriterion,
)

log = logging.getLogger(__name__)

VIEWPORT_PROFILES: dict[str, tuple[int, int]] = {
    "mobile": (375, 812),
    "tablet": (768, 1024),
    "desktop": (1920, 1080),
}

DEFAULT_BUDGET_MS = 30_000
QUIESCENCE_MS = 1_500
POLL_INTERVAL_MS = 250
REFLOW_PROBE_WIDTH = 320
_MAX_FULLPAGE_HEIGHT = 10_000

AUDIT_TAGS = ("wcag2a", "wcag2aa", "wcag21a", "wcag21aa", "wcag22a", "wcag22aa")

# Injected-audit rule ids that correspond to catalog rules; identity keys are
# shared between scanners only when the ids agree.
AUDIT_RULE_MAP = {
    "image-alt": "image-alt",
    "input-image-alt": "image-alt",
    "html-has-lang": "html-has-lang",
    "html-lang-valid": "html-has-lang",
    "valid-lang": "lang-of-parts",
    "color-contrast": "color-contrast",
    "link-name": "link-name",
    "button-name": "button-name",
    "input-button-name": "button-name",
    "label": "form-label",
    "select-name": "form-label",
    "document-title": "document-title",
    "heading-order": "heading-order",
    "aria-valid-attr": "aria-attr-validity",
    "aria-valid-attr-value": "aria-attr-validity",
    "tabindex": "keyboard-operability",
}

_IMPACT_MAP = {
    "minor": Severity.MINOR,
    "moderate": Severity.MODERATE,
    "serious": Severity.SERIOUS,
    "critical": Severity.CRITICAL,
}


@dataclass
class BrowserSession:
    session_id: str
    endpoint: str
    current_url: str = ""
    viewport: tuple[int, int] = VIEWPORT_PROFILES["desktop"]


@dataclass
class StabilizationReport:
    ready_state_complete: bool
    quiescent_ms: int
    pending_requests: int
    timed_out: bool


@dataclass
class ViewportShot:
    viewport_name: str
    width_px: int
    height_px: int
    image: bytes
    captured_at: datetime


@dataclass
class CaptureOutcome:
    shots: list[ViewportShot] = field(default_factory=list)
    reflow_at_320: bool | None = None
    errors: list[tuple[str, str]] = field(default_factory=list)


def _asset(name: str) -> str:
    return (
        resources.files("a11yrepair.assets.js").joinpath(name).read_text(encoding="utf-8")
    )


def probe_script() -> str:
    """The in-page payload (probe installer + audit hook). Idempotent: safe
    to execute on every stabilization poll."""
    return _asset("inject.js")


def audit_payload() -> str:
    """Vendored audit bundle plus the in-page payload, one script string."""
    return _asset("axe.min.js") + "\n" + _asset("inject.js")


_READ_PROBE_SNIPPET = (
    "if (window.__a11yrepair) { return window.__a11yrepair.readProbe(); }"
    "return { installed: false };"
)


class BrowserAudit:
    """One client per WebDriver endpoint. Commands on one session are strictly
    serialized by construction (plain sequential HTTP)."""

    def __init__(self, endpoint: str, http=None, sleep=time.sleep, clock=time.monotonic):
        self.endpoint = endpoint.rstrip("/")
        if http is None:
            import requests

            http = requests.Session()
        self._http = http
        self._sleep = sleep
        self._clock = clock

    # -- wire helpers -------------------------------------------------------

    def _request(self, method: str, path: str, payload: dict | None = None):
        url = f"{self.endpoint}{path}"
        try:
            resp = self._http.request(
                method, url, json=payload if payload is not None else None, timeout=60.0
            )
        except Exception as exc:
            raise SessionError(f"webdriver endpoint {self.endpoint} unreachable: {exc}")
        try:
            body = resp.json()
        except ValueError:
            raise SessionError(f"non-JSON webdriver response from {url}")
        if resp.status_code >= 400:
            value = body.get("value") or {}
            raise SessionError(
                f"webdriver error on {method} {path}: "
                f"{value.get('error', resp.status_code)}: {value.get('message', '')}"
            )
        return body.get("value")

    # -- session ------------------------------------------------------------

    def open_session(self, viewport: str = "desktop", headless: bool = True) -> BrowserSession:
        if viewport not in VIEWPORT_PROFILES:
            raise SessionError(f"unknown viewport profile {viewport!r}")
        width, height = VIEWPORT_PROFILES[viewport]
        chrome_args = ["--disable-gpu", f"--window-size={width},{height}"]
        if headless:
            chrome_args.insert(0, "--headless=new")
        capabilities = {
            "capabilities": {
                "alwaysMatch": {},
                "firstMatch": [
                    {"goog:chromeOptions": {"args": chrome_args}},
                    {"moz:firefoxOptions": {"args": ["-headless"] if headless else []}},
                    {},
                ],
            }
        }
        value = self._request("POST", "/session", capabilities)
        session_id = (value or {}).get("sessionId")
        if not session_id:
            raise SessionError(f"no sessionId in new-session response from {self.endpoint}")
        session = BrowserSession(
            session_id=session_id, endpoint=self.endpoint, viewport=(width, height)
        )
        self.set_window_rect(session, width, height)
        return session

    def close_session(self, session: BrowserSession) -> None:
        self._request("DELETE", f"/session/{session.session_id}")

    def navigate(self, session: BrowserSession, url: str) -> None:
        self._request("POST", f"/session/{session.session_id}/url", {"url": url})
        session.current_url = url

    def set_window_rect(self, session: BrowserSession, width: int, height: int) -> None:
        self._request(
            "POST",
            f"/session/{session.session_id}/window/rect",
            {"width": width, "height": height, "x": 0, "y": 0},
        )
        session.viewport = (width, height)

    def get_window_rect(self, session: BrowserSession) -> dict:
        return self._request("GET", f"/session/{session.session_id}/window/rect")

    def execute(self, session: BrowserSession, script: str, args: list | None = None):
        return self._request(
            "POST",
            f"/session/{session.session_id}/execute/sync",
            {"script": script, "args": args or []},
        )

    def execute_async(self, session: BrowserSession, script: str, args: list | None = None):
        return self._request(
            "POST",
            f"/session/{session.session_id}/execute/async",
            {"script": script, "args": args or []},
        )

    def screenshot(self, session: BrowserSession) -> bytes:
        b64 = self._request("GET", f"/session/{session.session_id}/screenshot")
        return base64.b64decode(b64)

    # -- pipeline operations --------------------------------------------------

    def install_probe(self, session: BrowserSession) -> None:
        self.execute(session, probe_script() + "\nreturn true;")

    def stabilize(
        self,
        session: BrowserSession,
        budget_ms: int = DEFAULT_BUDGET_MS,
        quiescence_ms: int = QUIESCENCE_MS,
        poll_interval_ms: int = POLL_INTERVAL_MS,
    ) -> StabilizationReport:
        """Poll until readyState is complete, no instrumented request is in
        flight, and the DOM has been mutation-free for the quiescence window;
        give up (timed_out) when the budget elapses."""
        self.install_probe(session)
        started = self._clock()
        last = {"pending": 0, "quiet": 0, "complete": False}
        while True:
            state = self.execute(session, _READ_PROBE_SNIPPET) or {}
            if not state.get("installed"):
                self.install_probe(session)
                state = self.execute(session, _READ_PROBE_SNIPPET) or {}
            now_ms = state.get("nowEpochMs", 0)
            last_mutation = state.get("lastMutationEpochMs", now_ms)
            quiet = max(0, int(now_ms - last_mutation))
            pending = int(state.get("pendingRequests", 0))
            complete = state.get("readyState") == "complete"
            last = {"pending": pending, "quiet": quiet, "complete": complete}
            if complete and pending == 0 and quiet >= quiescence_ms:
                return StabilizationReport(
                    ready_state_complete=True,
                    quiescent_ms=quiet,
                    pending_requests=0,
                    timed_out=False,
                )
            if (self._clock() - started) * 1000 >= budget_ms:
                return StabilizationReport(
                    ready_state_complete=last["complete"],
                    quiescent_ms=last["quiet"],
                    pending_requests=last["pending"],
                    timed_out=True,
                )
            self._sleep(poll_interval_ms / 1000.0)

    def get_dom(self, session: BrowserSession) -> str:
        dom_text = self.execute(
            session, "return document.documentElement.outerHTML;"
        )
        if not isinstance(dom_text, str):
            raise SessionError("DOM serialization did not return a string")
        return dom_text

    def run_injected_audit(self, session: BrowserSession) -> AuditReport:
        """Inject the vendored bundle + shim and map results into violations;
        out-of-scope criteria are filtered by the report constructor."""
        script = (
            audit_payload()
            + "\n__a11yrepairAudit(arguments[0], arguments[arguments.length - 1]);"
        )
        try:
            raw = self.execute_async(session, script, [list(AUDIT_TAGS)])
        except SessionError as exc:
            raise AuditError(f"audit injection failed: {exc}")
        try:
            payload = json.loads(raw) if isinstance(raw, str) else raw
        except ValueError:
            raise AuditError(f"audit returned non-JSON payload: {str(raw)[:200]}")
        if isinstance(payload, dict):
            raise AuditError(f"audit error: {payload.get('error', 'unknown')}")
        if not isinstance(payload, list):
            raise AuditError("audit returned an unexpected payload shape")
        violations = [
            v
            for item in payload
            if (v := self._to_violation(item)) is not None
        ]
        return AuditReport.build(
            source=session.current_url or "browser",
            violations=violations,
            scanner=Scanner.INJECTED_AUDIT,
        )

    @staticmethod
    def _to_violation(item: dict) -> Violation | None:
        rule_id = AUDIT_RULE_MAP.get(item.get("rule_id", ""), item.get("rule_id", ""))
        if not rule_id:
            return None
        criterion_id = item.get("criterion_tag") or ""
        criterion = CRITERIA.get(criterion_id)
        if criterion is None:
            if not criterion_id:
                return None
            level_tags = item.get("level_tags", "")
            if level_tags.endswith("aaa"):
                level = Level.AAA
            elif "aa" in level_tags:
                level = Level.AA
            else:
                level = Level.A
            criterion = WcagCriterion(criterion_id, item.get("rule_id", rule_id), level)
        severity = _IMPACT_MAP.get(item.get("impact", ""), Severity.SERIOUS)
        selector = item.get("css_selector") or ""
        if not selector:
            return None
        if rule_id == "color-contrast" and criterion.id == "1.4.3":
            kind = ViolationKind.CONTRAST
        elif criterion.id == "1.1.1" and rule_id == "image-alt":
            kind = ViolationKind.IMAGE_ALT
        elif rule_id == "heading-order":
            kind = ViolationKind.STRUCTURAL
        else:
            kind = ViolationKind.GENERAL
        try:
            return Violation(
                rule_id=rule_id,
                criterion=criterion,
                severity=severity,
                locator=NodeLocator(
                    css_selector=selector,
                    dom_path=tuple(
                        (str(t), int(i)) for t, i in item.get("dom_path", [])
                    ),
                    snippet=item.get("snippet", ""),
                ),
                help_text=item.get("help_text", ""),
                kind=kind,
            )
        except Exception as exc:  # malformed wire entry: drop, keep the scan
            log.warning("dropping malformed audit entry: %s", exc)
            return None

    def detect_reflow(self, session: BrowserSession) -> bool:
        """Horizontal scrolling at 320 CSS px width feeds Reflow (1.4.10)."""
        original = session.viewport
        self.set_window_rect(session, REFLOW_PROBE_WIDTH, original[1])
        try:
            result = self.execute(
                session,
                "return document.documentElement.scrollWidth > "
                "document.documentElement.clientWidth;",
            )
        finally:
            self.set_window_rect(session, *original)
        return bool(result)

    def capture_viewports(
        self,
        session: BrowserSession,
        profiles=("mobile", "tablet", "desktop"),
        settle_budget_ms: int = 5_000,
    ) -> CaptureOutcome:
        """One full-page PNG per profile (window resized to the document
        height); per-profile failures never abort the others."""
        outcome = CaptureOutcome()
        original = session.viewport
        for name in profiles:
            if name not in VIEWPORT_PROFILES:
                outcome.errors.append((name, "unknown profile"))
                continue
            width, height = VIEWPORT_PROFILES[name]
            try:
                self.set_window_rect(session, width, height)
                self.stabilize(session, budget_ms=settle_budget_ms)
                doc_height = self.execute(
                    session, "return document.documentElement.scrollHeight;"
                )
                full_height = min(
                    max(int(doc_height or height), height), _MAX_FULLPAGE_HEIGHT
                )
                if full_height != height:
                    self.set_window_rect(session, width, full_height)
                image = self.screenshot(session)
                if not image:
                    raise SessionError("empty screenshot")
                outcome.shots.append(
                    ViewportShot(
                        viewport_name=name,
                        width_px=width,
                        height_px=height,
                        image=image,
                        captured_at=datetime.now(timezone.utc),
                    )
                )
            except (SessionError, AuditError) as exc:
                outcome.errors.append((name, str(exc)))
        try:
            outcome.reflow_at_320 = self.detect_reflow(session)
        except SessionError as exc:
            outcome.errors.append(("reflow-probe", str(exc)))
        self.set_window_rect(session, *original)
        return outcome


def reflow_violation(source: str) -> Violation:
    """The Reflow finding emitted when the 320 px probe sees overflow."""
    return Violation(
        rule_id="reflow",
        criterion=CRITERIA["1.4.10"],
        severity=Severity.MODERATE,
        locator=NodeLocator(
            css_selector="html", dom_path=(("html", 1),), snippet="<html>"
        ),
        help_text=(
            "Content must reflow without horizontal scrolling at 320 CSS px: "
            "document overflows the viewport"
        ),
        kind=ViolationKind.GENERAL,
    )
