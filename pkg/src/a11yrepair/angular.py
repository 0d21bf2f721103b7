"""SPA workspace discovery and static detection: manifest parsing, component
triad assembly, selector-usage dependency edges, and rule-engine scans over
framework-preprocessed templates.

Decorator metadata is extracted with a tolerant balanced-brace scan of
@Component({...}), not a TypeScript parser; discovery is read-only."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import dom, rules
from .errors import WorkspaceError
from .model import AuditReport, Scanner

log = logging.getLogger(__name__)

DEFAULT_BUILD_COMMAND = "ng build --configuration production"


@dataclass(frozen=True)
class AngularProject:
    name: str
    source_root: str
    build_command: str | None


@dataclass(frozen=True)
class AngularWorkspace:
    root: Path
    projects: tuple[AngularProject, ...]
    manifest_path: Path

    @property
    def build_command(self) -> str | None:
        for project in self.projects:
            if project.build_command:
                return project.build_command
        return None


@dataclass
class ComponentTriad:
    component_name: str
    template_path: Path
    typescript_path: Path
    styles_path: Path | None
    template_content: str
    typescript_content: str
    styles_content: str
    selector: str | None = None
    inline_template: bool = False

    @property
    def template_display_path(self) -> str:
        if self.inline_template:
            return f"{self.typescript_path}#inline"
        return str(self.template_path)

    def class_name(self) -> str | None:
        m = re.search(r"\bexport\s+class\s+(\w+)", self.typescript_content)
        if m:
            return m.group(1)
        m = re.search(r"\bclass\s+(\w+)", self.typescript_content)
        return m.group(1) if m else None


@dataclass(frozen=True)
class DependencyEdge:
    from_component: str
    to_component: str
    via: str  # "template_tag" | "route" | "import"


@dataclass
class DiscoveryResult:
    triads: list[ComponentTriad] = field(default_factory=list)
    edges: list[DependencyEdge] = field(default_factory=list)
    errors: list[tuple[str, str]] = field(default_factory=list)  # (path, message)


def load_workspace(root: str | Path) -> AngularWorkspace:
    root = Path(root)
    manifest_path = root / "angular.json"
    if not manifest_path.exists():
        raise WorkspaceError(f"{root} is not an Angular workspace: no angular.json")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise WorkspaceError(
            f"angular.json parse error at line {exc.lineno}, col {exc.colno}: {exc.msg}"
        )
    projects = []
    for name in sorted((manifest.get("projects") or {})):
        entry = manifest["projects"][name] or {}
        source_root = entry.get("sourceRoot", "src")
        targets = entry.get("architect") or entry.get("targets") or {}
        build_command = DEFAULT_BUILD_COMMAND if "build" in targets else None
        projects.append(AngularProject(name, source_root, build_command))
    return AngularWorkspace(
        root=root, projects=tuple(projects), manifest_path=manifest_path
    )


_COMPONENT_DECORATOR_RE = re.compile(r"@Component\s*\(")


def _balanced_span(text: str, start: int) -> str | None:
    """Text of the (...) argument starting at its opening paren, strings
    skipped so braces inside template literals do not confuse the scan."""
    depth = 0
    i = start
    quote = None
    while i < len(text):
        c = text[i]
        if quote:
            if c == "\\":
                i += 2
                continue
            if c == quote:
                quote = None
        elif c in ("'", '"', "`"):
            quote = c
        elif c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
        i += 1
    return None


def _string_field(meta: str, name: str) -> str | None:
    m = re.search(rf"\b{name}\s*:\s*(['\"])(.*?)\1", meta)
    return m.group(2) if m else None


def _template_literal_field(meta: str, name: str) -> str | None:
    m = re.search(rf"\b{name}\s*:\s*`", meta)
    if m:
        end = meta.find("`", m.end())
        while end != -1 and meta[end - 1] == "\\":
            end = meta.find("`", end + 1)
        if end != -1:
            return meta[m.end() : end]
    return _string_field(meta, name)


def _style_urls(meta: str) -> list[str]:
    single = _string_field(meta, "styleUrl")
    if single:
        return [single]
    m = re.search(r"\bstyleUrls\s*:\s*\[(.*?)\]", meta, flags=re.S)
    if not m:
        return []
    return re.findall(r"['\"]([^'\"]+)['\"]", m.group(1))


def parse_component_metadata(source: str) -> dict | None:
    m = _COMPONENT_DECORATOR_RE.search(source)
    if not m:
        return None
    span = _balanced_span(source, m.end() - 1)
    if span is None:
        return None
    return {
        "selector": _string_field(span, "selector"),
        "templateUrl": _string_field(span, "templateUrl"),
        "template": _template_literal_field(span, "template"),
        "styleUrls": _style_urls(span),
    }


def discover_components(ws: AngularWorkspace) -> DiscoveryResult:
    """Every *.component.ts under each project's source root yields a triad;
    per-component failures are recorded and never abort discovery."""
    result = DiscoveryResult()
    for project in ws.projects:
        source_root = ws.root / project.source_root
        if not source_root.exists():
            result.errors.append((str(source_root), "source root missing"))
            continue
        for ts_path in sorted(source_root.rglob("*.component.ts")):
            try:
                source = ts_path.read_text(encoding="utf-8")
            except OSError as exc:
                result.errors.append((str(ts_path), f"unreadable: {exc}"))
                continue
            meta = parse_component_metadata(source)
            if meta is None:
                result.errors.append(
                    (str(ts_path), "no parseable @Component decorator")
                )
                continue
            name = ts_path.stem.replace(".component", "")
            styles_path = None
            styles_content = ""
            if meta["styleUrls"]:
                candidate = (ts_path.parent / meta["styleUrls"][0]).resolve()
                if candidate.exists():
                    styles_path = candidate
                    styles_content = candidate.read_text(encoding="utf-8")
                else:
                    result.errors.append(
                        (str(ts_path), f"dangling styleUrls entry {meta['styleUrls'][0]!r}")
                    )
            if meta["template"] is not None:
                triad = ComponentTriad(
                    component_name=name,
                    template_path=ts_path,
                    typescript_path=ts_path,
                    styles_path=styles_path,
                    template_content=meta["template"],
                    typescript_content=source,
                    styles_content=styles_content,
                    selector=meta["selector"],
                    inline_template=True,
                )
            elif meta["templateUrl"]:
                template_path = (ts_path.parent / meta["templateUrl"]).resolve()
                if not template_path.exists():
                    result.errors.append(
                        (str(ts_path), f"dangling templateUrl {meta['templateUrl']!r}")
                    )
                    continue
                triad = ComponentTriad(
                    component_name=name,
                    template_path=template_path,
                    typescript_path=ts_path,
                    styles_path=styles_path,
                    template_content=template_path.read_text(encoding="utf-8"),
                    typescript_content=source,
                    styles_content=styles_content,
                    selector=meta["selector"],
                )
            else:
                result.errors.append((str(ts_path), "component has no template"))
                continue
            result.triads.append(triad)

    by_selector = {
        t.selector: t.component_name for t in result.triads if t.selector
    }
    for triad in result.triads:
        for selector, target in by_selector.items():
            if target == triad.component_name:
                continue
            if re.search(rf"<{re.escape(selector)}[\s>/]", triad.template_content):
                result.edges.append(
                    DependencyEdge(triad.component_name, target, "template_tag")
                )
    return result


# ---------------------------------------------------------------------------
# Template preprocessing

_BLOCK_HEADER_RE = re.compile(
    r"@(?:if|else\s+if|else|for|empty|switch|case|default|defer|placeholder|"
    r"loading|error)\b[^{]*\{"
)


def preprocess_template(template: str) -> str:
    """Neutralize control-flow block syntax (@if/@for/...) into plain content
    so the HTML parser sees every branch. Interpolations are protected while
    block braces are stripped; attribute directives (*ngIf, [x], (y)) need no
    rewriting — the parser tolerates them as attribute names."""
    protected = template.replace("{{", "\x00").replace("}}", "\x01")
    if _BLOCK_HEADER_RE.search(protected):
        protected = _BLOCK_HEADER_RE.sub("", protected)
        protected = protected.replace("}", "")
    return protected.replace("\x00", "{{").replace("\x01", "}}")


def static_scan_component(triad: ComponentTriad) -> AuditReport:
    """rule-engine scan over the (preprocessed) template. Document-level
    rules (page lang/title, site navigation) do not apply to templates."""
    doc = dom.parse_document(preprocess_template(triad.template_content))
    violations = rules.scan_tree(doc, document_level=False)
    return AuditReport.build(
        source=triad.template_display_path,
        violations=violations,
        scanner=Scanner.NATIVE_RULES,
    )
