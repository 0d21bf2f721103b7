"""Renders the six remediation prompt templates with injected context.

Templates live as versioned text assets (one file per prompt) so the fidelity
tests can diff rendered output against them. Rendering is a single pass:
placeholder tokens are replaced once and injected values are never re-scanned,
so braces inside HTML/TypeScript content cannot corrupt a prompt.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from . import dom
from .errors import ContextOverflowError, TemplateError
from .model import Violation

DEFAULT_CONTEXT_BUDGET = 500_000  # characters of user text


class PromptKind(Enum):
    VISION = "vision"
    CONTRAST = "contrast"
    GENERAL = "general"
    RESPONSIVE_MERGE = "responsive_merge"
    ANGULAR_TEMPLATE = "angular_template"
    ANGULAR_HOLISTIC = "angular_holistic"


TEMPLATE = "TEMPLATE"
TYPESCRIPT = "TYPESCRIPT"
STYLES = "STYLES"

# Empty set means fragment-only output (no delimiters expected).
EXPECTED_DELIMITERS: dict[PromptKind, frozenset[str]] = {
    PromptKind.VISION: frozenset(),
    PromptKind.CONTRAST: frozenset(),
    PromptKind.GENERAL: frozenset(),
    PromptKind.RESPONSIVE_MERGE: frozenset(),
    PromptKind.ANGULAR_TEMPLATE: frozenset({TEMPLATE}),
    PromptKind.ANGULAR_HOLISTIC: frozenset({TEMPLATE, TYPESCRIPT, STYLES}),
}

REQUIRED_FIELDS: dict[PromptKind, frozenset[str]] = {
    PromptKind.VISION: frozenset(),
    PromptKind.CONTRAST: frozenset({"description", "original_fragment"}),
    PromptKind.GENERAL: frozenset({"help_text", "fragment"}),
    PromptKind.RESPONSIVE_MERGE: frozenset({"original_html", "current_html"}),
    PromptKind.ANGULAR_TEMPLATE: frozenset(
        {"total", "template_path", "violations_text", "template_content"}
    ),
    PromptKind.ANGULAR_HOLISTIC: frozenset(
        {
            "component_name",
            "violations_text",
            "template_content",
            "typescript_content",
            "styles_content",
        }
    ),
}

# The vision prompt stands alone; every code-fix kind runs under the shared
# web-developer system instruction.
_SYSTEM_KINDS = frozenset(PromptKind) - {PromptKind.VISION}

_PLACEHOLDER_RE = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class PromptBundle:
    kind: PromptKind
    system_text: str
    user_text: str
    images: tuple[tuple[str, bytes], ...] = ()
    expected_delimiters: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.kind is PromptKind.VISION and len(self.images) != 1:
            raise TemplateError("vision bundles carry exactly one image")
        if self.kind not in (PromptKind.VISION, PromptKind.ANGULAR_HOLISTIC) and self.images:
            raise TemplateError(f"{self.kind.value} bundles do not carry images")


def load_template(kind: PromptKind) -> str:
    text = (
        resources.files("a11yrepair.assets.prompts")
        .joinpath(f"{kind.value}.txt")
        .read_text(encoding="utf-8")
    )
    return text.rstrip("\n")


def system_instruction() -> str:
    text = (
        resources.files("a11yrepair.assets.prompts")
        .joinpath("system.txt")
        .read_text(encoding="utf-8")
    )
    return text.rstrip("\n")


def _substitute(template: str, context: dict[str, str], kind: PromptKind) -> str:
    placeholders = set(_PLACEHOLDER_RE.findall(template))
    unknown = placeholders - REQUIRED_FIELDS[kind]
    if unknown:
        raise TemplateError(
            f"template for {kind.value} declares unknown placeholder(s): "
            + ", ".join(sorted(unknown))
        )
    missing = placeholders - set(context)
    if missing:
        raise TemplateError(
            f"missing context field(s) for {kind.value}: " + ", ".join(sorted(missing))
        )

    def repl(m: re.Match) -> str:
        return context[m.group(1)]

    return _PLACEHOLDER_RE.sub(repl, template)


def build_prompt(
    kind: PromptKind,
    context: dict[str, str] | None = None,
    images: tuple[tuple[str, bytes], ...] = (),
    budget: int = DEFAULT_CONTEXT_BUDGET,
    trim_selectors: tuple[str, ...] = (),
) -> PromptBundle:
    """Render one bundle. `trim_selectors` names the violating nodes so an
    over-budget angular template can be reduced to those nodes plus three
    ancestor levels; holistic prompts are never trimmed and overflow instead."""
    context = dict(context or {})
    template = load_template(kind)
    user_text = _substitute(template, context, kind)

    if len(user_text) > budget:
        if kind is PromptKind.ANGULAR_TEMPLATE and trim_selectors:
            context["template_content"] = trim_template(
                context["template_content"], trim_selectors
            )
            user_text = _substitute(template, context, kind)
        if len(user_text) > budget:
            raise ContextOverflowError(
                f"{kind.value} prompt is {len(user_text)} chars, budget {budget}"
            )

    system_text = system_instruction() if kind in _SYSTEM_KINDS else ""
    return PromptBundle(
        kind=kind,
        system_text=system_text,
        user_text=user_text,
        images=tuple(images),
        expected_delimiters=EXPECTED_DELIMITERS[kind],
    )


TRIM_ANCESTOR_LEVELS = 3


def trim_template(content: str, selectors: tuple[str, ...]) -> str:
    """Reduce a template to the violating nodes, each wrapped in up to three
    ancestor levels, with elision markers where siblings were dropped."""
    doc = dom.parse_fragment(content)
    snippets: list[str] = []
    for selector in selectors:
        try:
            matches = dom.select(doc, selector)
        except Exception:
            matches = []
        if not matches:
            continue
        node = matches[0]
        chain = [node]
        for ancestor in dom.ancestors(node):
            if len(chain) > TRIM_ANCESTOR_LEVELS:
                break
            chain.append(ancestor)
        rendered = dom.outer_html(chain[0])
        for ancestor in chain[1:]:
            open_tag = dom.outer_html(
                dom.Element(ancestor.tag, ancestor.attrs)
            ).split(">", 1)[0] + ">"
            rendered = f"{open_tag}[elided]{rendered}[elided]</{ancestor.tag}>"
        snippets.append(rendered)
    return "\n".join(snippets) if snippets else "[elided]"


_VIOLATION_LINE_CAP = 500


def render_violations_text(violations) -> str:
    """Deterministic numbered list: document position then rule id; long
    lines elided at 500 chars."""
    violations = list(violations)
    if not violations:
        raise TemplateError("cannot render an empty violation list")
    ordered = sorted(
        violations, key=lambda v: (v.locator.position_key, v.rule_id)
    )
    lines = []
    for n, v in enumerate(ordered, start=1):
        line = f"{n}. [{v.rule_id}] {v.help_text} @ {v.locator.css_selector}"
        if len(line) > _VIOLATION_LINE_CAP:
            line = line[: _VIOLATION_LINE_CAP - 1] + "…"
        lines.append(line)
    return "\n".join(lines)


def violation_fragment(v: Violation, doc: dom.Document) -> str:
    """The outer HTML a per-violation prompt should carry."""
    el = dom.resolve_locator(doc, v.locator)
    return dom.outer_html(el) if el is not None else v.locator.snippet
