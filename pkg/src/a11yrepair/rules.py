"""Native static detector: a closed catalog of WCAG 2.2 checks over the
HTML parse tree.

Runs both standalone on SPA templates and as the offline re-scan oracle for
validated fixes. Contrast is computed only from statically resolvable colors
(inline styles, simple style-block selectors, presentational attributes);
anything needing the full cascade or layout belongs to the browser path.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from urllib.parse import urljoin, urlsplit

from . import dom
from .color import (
    ColorPair,
    contrast_ratio,
    parse_css_color,
    relative_luminance,  # noqa: F401  (re-exported: part of this module's API)
    required_ratio,
)
from .model import (
    CRITERIA,
    AuditReport,
    Scanner,
    Severity,
    Violation,
    ViolationKind,
    WcagCriterion,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RuleDescriptor:
    rule_id: str
    criterion: WcagCriterion
    severity: Severity
    kind: ViolationKind
    description: str
    static: bool = True  # False: only detectable with a rendered page


CATALOG: dict[str, RuleDescriptor] = {
    d.rule_id: d
    for d in (
        RuleDescriptor(
            "image-alt", CRITERIA["1.1.1"], Severity.CRITICAL, ViolationKind.IMAGE_ALT,
            "Images must have alternative text",
        ),
        RuleDescriptor(
            "html-has-lang", CRITERIA["3.1.1"], Severity.SERIOUS, ViolationKind.GENERAL,
            "The html element must have a valid lang attribute",
        ),
        RuleDescriptor(
            "lang-of-parts", CRITERIA["3.1.2"], Severity.SERIOUS, ViolationKind.GENERAL,
            "lang attributes on page parts must be valid language tags",
        ),
        RuleDescriptor(
            "color-contrast", CRITERIA["1.4.3"], Severity.SERIOUS, ViolationKind.CONTRAST,
            "Text must have sufficient contrast against its background",
        ),
        RuleDescriptor(
            "link-name", CRITERIA["2.4.4"], Severity.SERIOUS, ViolationKind.GENERAL,
            "Links must have discernible text",
        ),
        RuleDescriptor(
            "button-name", CRITERIA["4.1.2"], Severity.CRITICAL, ViolationKind.GENERAL,
            "Buttons must have discernible text",
        ),
        RuleDescriptor(
            "form-label", CRITERIA["3.3.2"], Severity.CRITICAL, ViolationKind.GENERAL,
            "Form fields must have labels",
        ),
        RuleDescriptor(
            "document-title", CRITERIA["2.4.2"], Severity.SERIOUS, ViolationKind.GENERAL,
            "Documents must have a non-empty title",
        ),
        RuleDescriptor(
            "heading-order", CRITERIA["1.3.1"], Severity.MODERATE, ViolationKind.STRUCTURAL,
            "Heading levels must not skip more than one level",
        ),
        RuleDescriptor(
            "aria-attr-validity", CRITERIA["4.1.2"], Severity.CRITICAL, ViolationKind.GENERAL,
            "ARIA attributes must exist and carry valid values",
        ),
        RuleDescriptor(
            "keyboard-operability", CRITERIA["2.1.1"], Severity.SERIOUS, ViolationKind.GENERAL,
            "Interactive elements must be reachable and operable by keyboard",
        ),
        RuleDescriptor(
            "multiple-ways", CRITERIA["2.4.5"], Severity.MODERATE, ViolationKind.GENERAL,
            "Pages in a set must be reachable by more than one mechanism",
        ),
        RuleDescriptor(
            "consistent-navigation", CRITERIA["3.2.3"], Severity.MODERATE, ViolationKind.GENERAL,
            "Repeated navigation must keep the same relative order across pages",
        ),
        RuleDescriptor(
            "reflow", CRITERIA["1.4.10"], Severity.MODERATE, ViolationKind.GENERAL,
            "Content must reflow without horizontal scrolling at 320 CSS px",
            static=False,
        ),
    )
}

_LANG_TAG_RE = re.compile(r"^[a-zA-Z]{2,3}(-[a-zA-Z0-9]{1,8})*$")

_POINTER_HANDLERS = ("onclick", "onmousedown", "onmouseup", "ondblclick",
                     "(click)", "(mousedown)", "(mouseup)", "(dblclick)")
_KEY_HANDLERS = ("onkeydown", "onkeyup", "onkeypress",
                 "(keydown)", "(keyup)", "(keypress)", "(keydown.enter)")

_NATIVELY_FOCUSABLE = frozenset({"button", "input", "select", "textarea", "summary"})

# Heading UA defaults: (px, bold)
_HEADING_DEFAULTS = {
    "h1": (32.0, True), "h2": (24.0, True), "h3": (18.72, True),
    "h4": (16.0, True), "h5": (13.28, True), "h6": (10.72, True),
}

ARIA_ATTRIBUTES = frozenset(
    "aria-activedescendant aria-atomic aria-autocomplete aria-braillelabel "
    "aria-brailleroledescription aria-busy aria-checked aria-colcount "
    "aria-colindex aria-colindextext aria-colspan aria-controls aria-current "
    "aria-describedby aria-description aria-details aria-disabled "
    "aria-dropeffect aria-errormessage aria-expanded aria-flowto aria-grabbed "
    "aria-haspopup aria-hidden aria-invalid aria-keyshortcuts aria-label "
    "aria-labelledby aria-level aria-live aria-modal aria-multiline "
    "aria-multiselectable aria-orientation aria-owns aria-placeholder "
    "aria-posinset aria-pressed aria-readonly aria-relevant aria-required "
    "aria-roledescription aria-rowcount aria-rowindex aria-rowindextext "
    "aria-rowspan aria-selected aria-setsize aria-sort aria-valuemax "
    "aria-valuemin aria-valuenow aria-valuetext".split()
)

_ARIA_ENUM_VALUES = {
    "aria-atomic": {"true", "false"},
    "aria-busy": {"true", "false"},
    "aria-checked": {"true", "false", "mixed", "undefined"},
    "aria-current": {"page", "step", "location", "date", "time", "true", "false"},
    "aria-disabled": {"true", "false"},
    "aria-expanded": {"true", "false", "undefined"},
    "aria-grabbed": {"true", "false", "undefined"},
    "aria-haspopup": {"false", "true", "menu", "listbox", "tree", "grid", "dialog"},
    "aria-hidden": {"true", "false", "undefined"},
    "aria-invalid": {"grammar", "false", "spelling", "true"},
    "aria-live": {"off", "polite", "assertive"},
    "aria-modal": {"true", "false"},
    "aria-multiline": {"true", "false"},
    "aria-multiselectable": {"true", "false"},
    "aria-orientation": {"horizontal", "vertical", "undefined"},
    "aria-pressed": {"true", "false", "mixed", "undefined"},
    "aria-readonly": {"true", "false"},
    "aria-required": {"true", "false"},
    "aria-selected": {"true", "false", "undefined"},
    "aria-sort": {"ascending", "descending", "none", "other"},
    "aria-autocomplete": {"inline", "list", "both", "none"},
}


def _has_dynamic(el: dom.Element, name: str) -> bool:
    """A framework binding for `name` counts as present-but-dynamic."""
    return any(
        el.has(candidate)
        for candidate in (f"[{name}]", f"[attr.{name}]", f"bind-{name}")
    )


def _attr_or_dynamic(el: dom.Element, name: str) -> bool:
    return el.has(name) or _has_dynamic(el, name)


def _resolve_idrefs(doc: dom.Document, idrefs: str) -> str:
    parts = []
    for ref in idrefs.split():
        for el in dom.iter_elements(doc):
            if el.get("id") == ref:
                parts.append(dom.get_text(el))
                break
    return " ".join(parts)


def _descendant_img_alt(el: dom.Element) -> str:
    for child in dom.iter_elements(el):
        if child is el:
            continue
        if child.tag == "img" and (child.get("alt") or "").strip():
            return child.get("alt")
    return ""


def accessible_name(el: dom.Element, doc: dom.Document) -> str:
    """Reduced accessible-name computation: aria-label(ledby), subtree text
    plus descendant image alts, then title."""
    if _has_dynamic(el, "aria-label") or _has_dynamic(el, "title"):
        return "[dynamic]"
    label = (el.get("aria-label") or "").strip()
    if label:
        return label
    labelledby = el.get("aria-labelledby")
    if labelledby:
        resolved = _resolve_idrefs(doc, labelledby).strip()
        if resolved:
            return resolved
    text = (dom.get_text(el).strip() + " " + _descendant_img_alt(el)).strip()
    if text:
        return text
    return (el.get("title") or "").strip()


def _is_decorative_image(el: dom.Element) -> bool:
    return (
        el.get("role") in ("presentation", "none")
        or el.get("aria-hidden") == "true"
    )


# ---------------------------------------------------------------------------
# Individual checks: each yields (element, help_detail) pairs.


def _check_image_alt(doc: dom.Document):
    for el in dom.iter_elements(doc):
        if el.tag != "img":
            continue
        if _is_decorative_image(el):
            continue
        named = (
            el.has("alt")
            or _attr_or_dynamic(el, "aria-label")
            or el.has("aria-labelledby")
            or el.has("title")
            or _has_dynamic(el, "alt")
        )
        if not named:
            yield el, "element has no alt attribute or other text alternative"


def _check_html_lang(doc: dom.Document):
    html = doc.html
    if html is None:
        return
    if _has_dynamic(html, "lang"):
        return
    lang = html.get("lang")
    if lang is None or not lang.strip():
        yield html, "html element has no lang attribute"
    elif not _LANG_TAG_RE.match(lang.strip()):
        yield html, f"lang value {lang!r} is not a valid language tag"


def _check_lang_of_parts(doc: dom.Document):
    for el in dom.iter_elements(doc):
        if el.tag == "html" or not el.has("lang"):
            continue
        value = (el.get("lang") or "").strip()
        if not value or not _LANG_TAG_RE.match(value):
            yield el, f"lang value {value!r} on a page part is not a valid language tag"


def _check_document_title(doc: dom.Document):
    # Located on the html element whether the title is missing or empty:
    # the injected audit reports it there, and identity keys must agree.
    head = doc.head
    title = None
    if head is not None:
        for child in head.element_children():
            if child.tag == "title":
                title = child
                break
    if doc.html is None:
        return
    if title is None:
        yield doc.html, "document has no title element"
    elif not dom.get_text(title).strip():
        yield doc.html, "document title is empty"


def _check_link_name(doc: dom.Document):
    for el in dom.iter_elements(doc):
        if el.tag != "a":
            continue
        if not (el.has("href") or _has_dynamic(el, "href") or el.has("routerlink")
                or _has_dynamic(el, "routerlink")):
            continue
        if el.get("aria-hidden") == "true":
            continue
        if not accessible_name(el, doc):
            yield el, "link has no discernible text"


def _check_button_name(doc: dom.Document):
    for el in dom.iter_elements(doc):
        is_button = el.tag == "button" or el.get("role") == "button"
        is_input_button = el.tag == "input" and (el.get("type") or "").lower() == "button"
        if not (is_button or is_input_button):
            continue
        if el.get("aria-hidden") == "true":
            continue
        if is_input_button:
            if not ((el.get("value") or "").strip() or _attr_or_dynamic(el, "aria-label")
                    or el.has("aria-labelledby") or el.has("title") or _has_dynamic(el, "value")):
                yield el, "input button has no value or label"
        elif not accessible_name(el, doc):
            yield el, "button has no discernible text"


_UNLABELED_INPUT_TYPES_EXCLUDED = frozenset(
    {"hidden", "submit", "reset", "button", "image"}
)


def _check_form_label(doc: dom.Document):
    label_targets = set()
    for el in dom.iter_elements(doc):
        if el.tag == "label" and el.get("for"):
            label_targets.add(el.get("for"))
    for el in dom.iter_elements(doc):
        if el.tag not in ("input", "select", "textarea"):
            continue
        if el.tag == "input":
            input_type = (el.get("type") or "text").lower()
            if input_type in _UNLABELED_INPUT_TYPES_EXCLUDED:
                continue
        labelled = (
            (el.get("id") and el.get("id") in label_targets)
            or _attr_or_dynamic(el, "aria-label")
            or el.has("aria-labelledby")
            or el.has("title")
            or any(anc.tag == "label" for anc in dom.ancestors(el))
        )
        if not labelled:
            yield el, "form field has no label"


def _heading_level(el: dom.Element) -> int | None:
    if el.tag in ("h1", "h2", "h3", "h4", "h5", "h6"):
        return int(el.tag[1])
    if el.get("role") == "heading":
        try:
            return int(el.get("aria-level") or "2")
        except ValueError:
            return 2
    return None


def _check_heading_order(doc: dom.Document):
    previous = None
    for el in dom.iter_elements(doc):
        level = _heading_level(el)
        if level is None:
            continue
        if previous is not None and level > previous + 1:
            yield el, f"heading level jumps from h{previous} to h{level}"
        previous = level


def _check_aria_validity(doc: dom.Document):
    for el in dom.iter_elements(doc):
        problems = []
        for name, value in el.attrs.items():
            if not name.startswith("aria-"):
                continue
            if name not in ARIA_ATTRIBUTES:
                problems.append(f"unknown attribute {name}")
                continue
            allowed = _ARIA_ENUM_VALUES.get(name)
            if allowed is not None and (value or "").strip().lower() not in allowed:
                problems.append(f"invalid value {value!r} for {name}")
        if problems:
            yield el, "; ".join(problems)


def _is_natively_focusable(el: dom.Element) -> bool:
    if el.tag in _NATIVELY_FOCUSABLE:
        return True
    if el.tag == "a" and (el.has("href") or _has_dynamic(el, "href")):
        return True
    return el.has("contenteditable")


def _check_keyboard(doc: dom.Document):
    for el in dom.iter_elements(doc):
        tabindex = el.get("tabindex")
        if tabindex is not None:
            try:
                if int(tabindex) > 0:
                    yield el, f"positive tabindex {tabindex} disrupts keyboard order"
                    continue
            except ValueError:
                pass
        has_pointer = any(el.has(h) for h in _POINTER_HANDLERS)
        if not has_pointer:
            continue
        has_key = any(el.has(h) for h in _KEY_HANDLERS)
        if not has_key and not _is_natively_focusable(el) and tabindex is None:
            yield el, "pointer handler without keyboard handler or focusability"


def _internal_link_targets(doc: dom.Document, base_url: str | None) -> set[str]:
    base_host = urlsplit(base_url).netloc if base_url else None
    targets = set()
    for el in dom.iter_elements(doc):
        if el.tag != "a" or not el.get("href"):
            continue
        href = el.get("href").strip()
        if not href or href.startswith(("#", "mailto:", "javascript:", "tel:", "data:")):
            continue
        parts = urlsplit(href)
        if parts.scheme in ("http", "https") and base_host and parts.netloc != base_host:
            continue
        if parts.scheme in ("http", "https") and not base_host:
            continue
        targets.add(urljoin(base_url or "", href))
    return targets


def _has_search_form(doc: dom.Document) -> bool:
    for el in dom.iter_elements(doc):
        if el.tag == "form" and el.get("role") == "search":
            return True
        if el.get("role") == "search":
            return True
        if el.tag == "input" and (el.get("type") or "").lower() == "search":
            return True
    return False


def _has_sitemap_link(doc: dom.Document) -> bool:
    for el in dom.iter_elements(doc):
        if el.tag != "a" or not el.get("href"):
            continue
        blob = (el.get("href") + " " + dom.get_text(el)).lower()
        if "sitemap" in blob or "site map" in blob:
            return True
    return False


def _check_multiple_ways(doc: dom.Document, base_url: str | None):
    # Only pages that evidently sit inside a set (>= 2 distinct internal
    # targets) are held to 2.4.5; a standalone page has nothing to locate.
    if len(_internal_link_targets(doc, base_url)) < 2:
        return
    mechanisms = 0
    if any(
        el.tag == "nav" or el.get("role") == "navigation"
        for el in dom.iter_elements(doc)
    ):
        mechanisms += 1
    if _has_search_form(doc):
        mechanisms += 1
    if _has_sitemap_link(doc):
        mechanisms += 1
    if mechanisms < 2 and doc.body is not None:
        yield doc.body, (
            f"only {mechanisms} of navigation landmark / search form / "
            "sitemap link present"
        )


def _nav_sequence(doc: dom.Document) -> list[tuple[str, str]]:
    seq = []
    for el in dom.iter_elements(doc):
        if el.tag == "nav" or el.get("role") == "navigation":
            for link in dom.iter_elements(el):
                if link.tag == "a" and link.has("href"):
                    seq.append(
                        (" ".join(dom.get_text(link).split()), link.get("href") or "")
                    )
    return seq


def _prefix_compatible(a: list, b: list) -> bool:
    shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
    return longer[: len(shorter)] == shorter


def _check_consistent_navigation(doc: dom.Document, pages):
    if not pages:
        log.info("consistent-navigation skipped: no sibling pages supplied")
        return
    own = _nav_sequence(doc)
    for sibling_html in pages:
        sibling_seq = _nav_sequence(dom.parse_document(sibling_html))
        if not _prefix_compatible(own, sibling_seq):
            first_nav = next(
                (
                    el
                    for el in dom.iter_elements(doc)
                    if el.tag == "nav" or el.get("role") == "navigation"
                ),
                doc.body,
            )
            if first_nav is not None:
                yield first_nav, "navigation order differs from sibling pages"
            return


# ---------------------------------------------------------------------------
# Static contrast resolution

_DECL_RE = re.compile(r"([a-zA-Z-]+)\s*:\s*([^;]+)")
_FONT_PX_RE = re.compile(r"^([\d.]+)px$")
_FONT_PT_RE = re.compile(r"^([\d.]+)pt$")


def _parse_declarations(style_text: str) -> dict[str, str]:
    return {
        name.strip().lower(): value.strip()
        for name, value in _DECL_RE.findall(style_text or "")
    }


_SIMPLE_SELECTOR_RE = re.compile(r"^[a-zA-Z][\w-]*$|^\.[\w-]+$|^#[\w-]+$|^[a-zA-Z][\w-]*\.[\w-]+$")


def _collect_style_rules(doc: dom.Document) -> list[tuple[str, dict[str, str], int]]:
    """(selector, declarations, specificity) for simple selectors only."""
    rules = []
    for el in dom.iter_elements(doc):
        if el.tag != "style":
            continue
        css = "".join(
            child.data for child in el.children if isinstance(child, dom.Text)
        )
        css = re.sub(r"/\*.*?\*/", "", css, flags=re.S)
        for m in re.finditer(r"([^{}]+)\{([^{}]*)\}", css):
            selector_list, body = m.group(1), m.group(2)
            decls = _parse_declarations(body)
            if not decls:
                continue
            for selector in selector_list.split(","):
                selector = selector.strip()
                if not _SIMPLE_SELECTOR_RE.match(selector):
                    continue
                if selector.startswith("#"):
                    spec = 3
                elif "." in selector:
                    spec = 2
                else:
                    spec = 1
                rules.append((selector, decls, spec))
    return rules


class _StyleResolver:
    def __init__(self, doc: dom.Document):
        self.doc = doc
        self.rules = _collect_style_rules(doc)

    def declared(self, el: dom.Element, prop: str) -> str | None:
        """Winning declaration for prop on el: inline > #id > .class > tag,
        later rules win ties."""
        inline = _parse_declarations(el.get("style") or "")
        if prop in inline:
            return inline[prop]
        best: tuple[int, int] | None = None
        value = None
        for order, (selector, decls, spec) in enumerate(self.rules):
            if prop not in decls:
                continue
            try:
                if el not in dom.select(self.doc, selector):
                    continue
            except Exception:
                continue
            rank = (spec, order)
            if best is None or rank >= best:
                best = rank
                value = decls[prop]
        return value

    def effective_color(self, el: dom.Element) -> tuple | None:
        for node in (el, *dom.ancestors(el)):
            declared = self.declared(node, "color")
            if declared is not None:
                return parse_css_color(declared)  # None => unresolvable
            if node.tag == "font" and node.get("color"):
                return parse_css_color(node.get("color"))
            if node.tag == "body" and node.get("text"):
                return parse_css_color(node.get("text"))
        return (0, 0, 0)

    def effective_background(self, el: dom.Element) -> tuple | None:
        for node in (el, *dom.ancestors(el)):
            for prop in ("background-color", "background"):
                declared = self.declared(node, prop)
                if declared is not None:
                    # Shorthand with an image/gradient resolves to None:
                    # the real backdrop is not statically knowable.
                    return parse_css_color(declared)
            if node.get("bgcolor"):
                return parse_css_color(node.get("bgcolor"))
        return (255, 255, 255)

    def effective_font(self, el: dom.Element) -> tuple[float, bool]:
        size = None
        bold = None
        for node in (el, *dom.ancestors(el)):
            if size is None:
                declared = self.declared(node, "font-size")
                if declared:
                    m = _FONT_PX_RE.match(declared)
                    if m:
                        size = float(m.group(1))
                    else:
                        m = _FONT_PT_RE.match(declared)
                        if m:
                            size = float(m.group(1)) * 4.0 / 3.0
            if bold is None:
                declared = self.declared(node, "font-weight")
                if declared:
                    bold = declared in ("bold", "bolder") or (
                        declared.isdigit() and int(declared) >= 700
                    )
                elif node.tag in ("b", "strong"):
                    bold = True
            if size is None and node.tag in _HEADING_DEFAULTS:
                size, heading_bold = _HEADING_DEFAULTS[node.tag]
                if bold is None:
                    bold = heading_bold
        return (size if size is not None else 16.0, bool(bold))

    def is_hidden(self, el: dom.Element) -> bool:
        for node in (el, *dom.ancestors(el)):
            if node.has("hidden") or node.get("aria-hidden") == "true":
                return True
            display = self.declared(node, "display")
            if display is not None and display.strip() == "none":
                return True
        return False


def _check_color_contrast(doc: dom.Document):
    resolver = _StyleResolver(doc)
    body = doc.body
    if body is None:
        return
    for el in dom.iter_elements(body):
        if el.tag in ("script", "style"):
            continue
        has_direct_text = any(
            isinstance(c, dom.Text) and c.data.strip() for c in el.children
        )
        if not has_direct_text or resolver.is_hidden(el):
            continue
        fg = resolver.effective_color(el)
        bg = resolver.effective_background(el)
        if fg is None or bg is None:
            log.info("color-contrast skipped on <%s>: colors not statically resolvable", el.tag)
            continue
        size, bold = resolver.effective_font(el)
        pair = ColorPair(fg, bg, size, bold)
        ratio = contrast_ratio(pair)
        needed = required_ratio(pair)
        if ratio < needed:
            yield el, (
                f"contrast ratio {ratio:.2f} is below the required "
                f"{needed:.1f}:1 for {size:g}px{' bold' if bold else ''} text"
            )


# ---------------------------------------------------------------------------


def scan_tree(
    doc: dom.Document,
    base_url: str | None = None,
    pages=None,
    document_level: bool = True,
) -> list[Violation]:
    """All catalog checks over a parsed tree. `document_level=False` (used for
    component templates) skips the whole-page rules: page lang/title and the
    site-navigation heuristics."""
    findings: list[tuple[str, dom.Element, str]] = []

    def run(rule_id, generator):
        for el, detail in generator:
            findings.append((rule_id, el, detail))

    run("image-alt", _check_image_alt(doc))
    run("lang-of-parts", _check_lang_of_parts(doc))
    run("link-name", _check_link_name(doc))
    run("button-name", _check_button_name(doc))
    run("form-label", _check_form_label(doc))
    run("heading-order", _check_heading_order(doc))
    run("aria-attr-validity", _check_aria_validity(doc))
    run("keyboard-operability", _check_keyboard(doc))
    run("color-contrast", _check_color_contrast(doc))
    if document_level:
        run("html-has-lang", _check_html_lang(doc))
        run("document-title", _check_document_title(doc))
        run("multiple-ways", _check_multiple_ways(doc, base_url))
        run("consistent-navigation", _check_consistent_navigation(doc, pages))

    violations = []
    for rule_id, el, detail in findings:
        descriptor = CATALOG[rule_id]
        locator = dom.build_locator(el, doc)
        violations.append(
            Violation(
                rule_id=rule_id,
                criterion=descriptor.criterion,
                severity=descriptor.severity,
                locator=locator,
                help_text=f"{descriptor.description}: {detail}",
                kind=descriptor.kind,
            )
        )
    return violations


def scan_document(
    html: str,
    base_url: str | None = None,
    pages=None,
    source: str | None = None,
) -> AuditReport:
    """Scan one document with the full catalog. `pages` supplies sibling
    documents for the consistent-navigation check; without it that rule is
    skipped and logged."""
    doc = dom.parse_document(html)
    violations = scan_tree(doc, base_url=base_url, pages=pages)
    return AuditReport.build(
        source=source or base_url or "document",
        violations=violations,
        scanner=Scanner.NATIVE_RULES,
    )
