"""HTML parse tree with recovery tracking, canonical serialization and a
CSS selector subset.

The parser is built on the stdlib tokenizer and never rejects input: malformed
nesting is repaired and every repair is recorded as a RecoveryEvent so callers
can distinguish "parsed cleanly" from "parsed with surgery". Serialization is
canonical — parse(serialize(tree)) reproduces the tree — which is what lets
the patchers assert that untouched nodes stay byte-identical.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser

from .errors import LocatorError, SelectorError
from .model import SNIPPET_CAP, NodeLocator

VOID_ELEMENTS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

RAW_TEXT_ELEMENTS = frozenset({"script", "style"})

HEAD_ONLY_ELEMENTS = frozenset({"title", "base", "meta", "link", "style"})

# Elements whose end tag may legally be omitted; implicitly closing them is
# not a recovery.
OMITTABLE_END = frozenset(
    "html head body p li dt dd tr td th thead tbody tfoot option optgroup "
    "caption colgroup".split()
)

_P_CLOSERS = frozenset(
    "address article aside blockquote details div dl fieldset figcaption "
    "figure footer form h1 h2 h3 h4 h5 h6 header hr main menu nav ol p pre "
    "section table ul".split()
)

# tag currently open -> set of incoming start tags that imply its end tag
IMPLIED_END_BY = {
    "p": _P_CLOSERS,
    "li": frozenset({"li"}),
    "dt": frozenset({"dt", "dd"}),
    "dd": frozenset({"dt", "dd"}),
    "tr": frozenset({"tr"}),
    "td": frozenset({"td", "th", "tr"}),
    "th": frozenset({"td", "th", "tr"}),
    "thead": frozenset({"tbody", "tfoot"}),
    "tbody": frozenset({"tbody", "tfoot"}),
    "option": frozenset({"option", "optgroup"}),
    "optgroup": frozenset({"optgroup"}),
}


@dataclass
class RecoveryEvent:
    kind: str  # "unclosed_tag" | "mismatched_nesting" | "stray_end_tag"
    tag: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.kind} <{self.tag}> at line {self.line}, col {self.col}"


class Node:
    __slots__ = ("parent",)

    def __init__(self):
        self.parent: Element | Document | None = None


class Text(Node):
    __slots__ = ("data",)

    def __init__(self, data: str):
        super().__init__()
        self.data = data

    def __repr__(self):
        return f"Text({self.data!r})"


class Comment(Node):
    __slots__ = ("data",)

    def __init__(self, data: str):
        super().__init__()
        self.data = data

    def __repr__(self):
        return f"Comment({self.data!r})"


class Element(Node):
    __slots__ = ("tag", "attrs", "children")

    def __init__(self, tag: str, attrs: dict[str, str | None] | None = None):
        super().__init__()
        self.tag = tag
        self.attrs: dict[str, str | None] = dict(attrs or {})
        self.children: list[Node] = []

    def append(self, node: Node) -> None:
        node.parent = self
        self.children.append(node)

    def element_children(self) -> list["Element"]:
        return [c for c in self.children if isinstance(c, Element)]

    def get(self, name: str, default=None):
        return self.attrs.get(name, default)

    def has(self, name: str) -> bool:
        return name in self.attrs

    def classes(self) -> list[str]:
        return (self.attrs.get("class") or "").split()

    def __repr__(self):
        return f"Element(<{self.tag}>, {len(self.children)} children)"


class Document:
    """Root container. ``fragment`` documents skip html/head/body forcing."""

    def __init__(self, fragment: bool = False):
        self.doctype: str | None = None
        self.children: list[Node] = []
        self.recoveries: list[RecoveryEvent] = []
        self.fragment = fragment
        self.parent = None

    def append(self, node: Node) -> None:
        node.parent = self
        self.children.append(node)

    def element_children(self) -> list[Element]:
        return [c for c in self.children if isinstance(c, Element)]

    @property
    def html(self) -> Element | None:
        for c in self.children:
            if isinstance(c, Element) and c.tag == "html":
                return c
        return None

    @property
    def body(self) -> Element | None:
        html = self.html
        if html is None:
            return None
        for c in html.children:
            if isinstance(c, Element) and c.tag == "body":
                return c
        return None

    @property
    def head(self) -> Element | None:
        html = self.html
        if html is None:
            return None
        for c in html.children:
            if isinstance(c, Element) and c.tag == "head":
                return c
        return None


class _TreeBuilder(HTMLParser):
    """Recovering tree builder. In strict mode every implicit closure is a
    recovery event; in lenient mode HTML's omittable end tags stay silent."""

    def __init__(self, strict: bool = False):
        super().__init__(convert_charrefs=True)
        self.strict = strict
        self.top: list[Node] = []
        self.stack: list[Element] = []
        self.recoveries: list[RecoveryEvent] = []
        self.doctype: str | None = None

    def _parent(self) -> Element | None:
        return self.stack[-1] if self.stack else None

    def _attach(self, node: Node) -> None:
        parent = self._parent()
        if parent is not None:
            parent.append(node)
        else:
            self.top.append(node)

    def _record(self, kind: str, tag: str) -> None:
        line, col = self.getpos()
        self.recoveries.append(RecoveryEvent(kind, tag, line, col))

    def _imply_end_tags(self, incoming: str) -> None:
        while self.stack:
            closers = IMPLIED_END_BY.get(self.stack[-1].tag)
            if closers and incoming in closers:
                self.stack.pop()
            else:
                break

    def handle_decl(self, decl: str) -> None:
        if decl.lower().startswith("doctype"):
            self.doctype = decl

    def handle_starttag(self, tag: str, attrs) -> None:
        if not self.strict:
            self._imply_end_tags(tag)
        merged: dict[str, str | None] = {}
        for name, value in attrs:
            merged.setdefault(name, value)
        el = Element(tag, merged)
        self._attach(el)
        if tag not in VOID_ELEMENTS:
            self.stack.append(el)

    def handle_startendtag(self, tag: str, attrs) -> None:
        if not self.strict:
            self._imply_end_tags(tag)
        merged: dict[str, str | None] = {}
        for name, value in attrs:
            merged.setdefault(name, value)
        self._attach(Element(tag, merged))

    def handle_endtag(self, tag: str) -> None:
        if tag in VOID_ELEMENTS:
            return
        depth = None
        for i in range(len(self.stack) - 1, -1, -1):
            if self.stack[i].tag == tag:
                depth = i
                break
        if depth is None:
            self._record("stray_end_tag", tag)
            return
        while len(self.stack) - 1 > depth:
            popped = self.stack.pop()
            if self.strict or popped.tag not in OMITTABLE_END:
                self._record("mismatched_nesting", popped.tag)
        self.stack.pop()

    def handle_data(self, data: str) -> None:
        if not data:
            return
        parent = self._parent()
        last = parent.children[-1] if parent and parent.children else (
            self.top[-1] if not parent and self.top else None
        )
        if isinstance(last, Text):
            last.data += data
        else:
            self._attach(Text(data))

    def handle_comment(self, data: str) -> None:
        self._attach(Comment(data))

    def finish(self) -> None:
        self.close()
        while self.stack:
            popped = self.stack.pop()
            if self.strict or popped.tag not in OMITTABLE_END:
                self._record("unclosed_tag", popped.tag)


def _force_structure(builder: _TreeBuilder) -> Document:
    doc = Document(fragment=False)
    doc.doctype = builder.doctype
    doc.recoveries = builder.recoveries

    html = None
    doc_level: list[Node] = []
    strays: list[Node] = []
    for node in builder.top:
        if html is None and isinstance(node, Element) and node.tag == "html":
            html = node
        elif isinstance(node, Comment) and html is None:
            doc_level.append(node)
        elif isinstance(node, Text) and not node.data.strip():
            continue
        else:
            strays.append(node)
    if html is None:
        html = Element("html", {})

    head = None
    body = None
    rest: list[Node] = []
    for node in list(html.children) + strays:
        if isinstance(node, Element) and node.tag == "head" and head is None:
            head = node
        elif isinstance(node, Element) and node.tag == "body" and body is None:
            body = node
        elif isinstance(node, Text) and not node.data.strip():
            continue
        else:
            rest.append(node)
    if head is None:
        head = Element("head", {})
    if body is None:
        body = Element("body", {})
    for node in rest:
        if isinstance(node, Element) and node.tag in HEAD_ONLY_ELEMENTS:
            head.append(node)
        else:
            body.append(node)

    html.children = []
    html.append(head)
    html.append(body)
    for node in doc_level:
        doc.append(node)
    doc.append(html)
    return doc


def parse_document(text: str) -> Document:
    """Parse a full document; html/head/body are synthesized when missing."""
    builder = _TreeBuilder()
    builder.feed(text)
    builder.finish()
    return _force_structure(builder)


def parse_fragment(text: str, strict: bool = False) -> Document:
    """Parse a fragment verbatim: no skeleton forcing, recoveries recorded."""
    builder = _TreeBuilder(strict=strict)
    builder.feed(text)
    builder.finish()
    doc = Document(fragment=True)
    doc.doctype = builder.doctype
    doc.recoveries = builder.recoveries
    for node in builder.top:
        doc.append(node)
    return doc


# ---------------------------------------------------------------------------
# Canonical serialization


def _escape_text(data: str) -> str:
    return data.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(value: str) -> str:
    return value.replace("&", "&amp;").replace('"', "&quot;")


def _serialize_into(node: Node | Document, out: list[str], raw: bool) -> None:
    if isinstance(node, Document):
        if node.doctype:
            out.append(f"<!{node.doctype}>")
        for child in node.children:
            _serialize_into(child, out, raw)
        return
    if isinstance(node, Text):
        out.append(node.data if raw else _escape_text(node.data))
        return
    if isinstance(node, Comment):
        out.append(f"<!--{node.data}-->")
        return
    assert isinstance(node, Element)
    out.append(f"<{node.tag}")
    for name, value in node.attrs.items():
        if value is None:
            out.append(f" {name}")
        else:
            out.append(f' {name}="{_escape_attr(value)}"')
    out.append(">")
    if node.tag in VOID_ELEMENTS:
        return
    child_raw = node.tag in RAW_TEXT_ELEMENTS
    for child in node.children:
        _serialize_into(child, out, child_raw)
    out.append(f"</{node.tag}>")


def serialize(node: Node | Document) -> str:
    out: list[str] = []
    _serialize_into(node, out, raw=False)
    return "".join(out)


def outer_html(el: Element) -> str:
    return serialize(el)


# ---------------------------------------------------------------------------
# Tree walking


def iter_elements(root: Node | Document):
    """Preorder walk over Element nodes, document order."""
    stack: list[Node] = list(reversed(getattr(root, "children", [])))
    if isinstance(root, Element):
        yield root
        stack = list(reversed(root.children))
    while stack:
        node = stack.pop()
        if isinstance(node, Element):
            yield node
            stack.extend(reversed(node.children))


def element_index(el: Element) -> int:
    """1-based index among the parent's element children."""
    parent = el.parent
    if parent is None:
        return 1
    idx = 0
    for child in parent.children:
        if isinstance(child, Element):
            idx += 1
            if child is el:
                return idx
    raise LocatorError("element not found among its parent's children")


def dom_path_of(el: Element) -> tuple[tuple[str, int], ...]:
    path: list[tuple[str, int]] = []
    cur: Node | Document | None = el
    while isinstance(cur, Element):
        path.append((cur.tag, element_index(cur)))
        cur = cur.parent
    if cur is None:
        raise LocatorError("element is detached from any document")
    return tuple(reversed(path))


def resolve_dom_path(doc: Document, path) -> Element | None:
    scope: list[Element] = doc.element_children()
    node: Element | None = None
    for tag, idx in path:
        node = None
        count = 0
        for candidate in scope:
            count += 1
            if count == idx:
                node = candidate
                break
        if node is None or node.tag != tag:
            return None
        scope = node.element_children()
    return node


def get_text(el: Element, skip_hidden: bool = True) -> str:
    """Concatenated text descendants; hidden/aria-hidden subtrees and raw
    script/style content are skipped when skip_hidden is set."""
    parts: list[str] = []

    def visit(node: Node) -> None:
        if isinstance(node, Text):
            parts.append(node.data)
            return
        if not isinstance(node, Element):
            return
        if node.tag in RAW_TEXT_ELEMENTS:
            return
        if skip_hidden and (
            node.get("aria-hidden") == "true" or node.has("hidden")
        ):
            return
        for child in node.children:
            visit(child)

    for child in el.children:
        visit(child)
    return "".join(parts)


def ancestors(el: Element):
    cur = el.parent
    while isinstance(cur, Element):
        yield cur
        cur = cur.parent


def replace_node(el: Element, replacements: list[Node]) -> None:
    parent = el.parent
    if parent is None:
        raise LocatorError("cannot replace a detached node")
    idx = parent.children.index(el)
    for r in replacements:
        r.parent = parent
    parent.children[idx : idx + 1] = replacements
    el.parent = None


# ---------------------------------------------------------------------------
# CSS selector subset: #id, .class, tag, [attr], [attr="v"], :nth-child(n),
# :nth-of-type(n), :first-child, :last-child; combinators ">" and descendant.

_TOKEN_RE = re.compile(
    r"""
    (?P<tag>\*|[a-zA-Z][\w-]*)
  | \#(?P<id>[\w-]+)
  | \.(?P<cls>[\w-]+)
  | \[(?P<attr>[\w:()\[\]*-]+?)(?:=(?P<q>["']?)(?P<val>[^\]]*?)(?P=q))?\]
  | :(?P<pseudo>nth-child|nth-of-type)\((?P<n>\d+)\)
  | :(?P<simple>first-child|last-child)
    """,
    re.VERBOSE,
)


@dataclass
class _Compound:
    tag: str | None = None
    id: str | None = None
    classes: list[str] = field(default_factory=list)
    attrs: list[tuple[str, str | None]] = field(default_factory=list)
    nth_child: int | None = None
    nth_of_type: int | None = None
    first_child: bool = False
    last_child: bool = False


def _parse_compound(text: str) -> _Compound:
    comp = _Compound()
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SelectorError(f"cannot parse selector near {text[pos:]!r}")
        if m.group("tag"):
            comp.tag = None if m.group("tag") == "*" else m.group("tag").lower()
        elif m.group("id"):
            comp.id = m.group("id")
        elif m.group("cls"):
            comp.classes.append(m.group("cls"))
        elif m.group("attr"):
            comp.attrs.append((m.group("attr").lower(), m.group("val")))
        elif m.group("pseudo"):
            if m.group("pseudo") == "nth-child":
                comp.nth_child = int(m.group("n"))
            else:
                comp.nth_of_type = int(m.group("n"))
        elif m.group("simple"):
            if m.group("simple") == "first-child":
                comp.first_child = True
            else:
                comp.last_child = True
        pos = m.end()
    return comp


def _parse_selector(selector: str) -> list[tuple[str, _Compound]]:
    """Returns [(combinator, compound)] left-to-right; first combinator is ''."""
    selector = selector.strip()
    if not selector:
        raise SelectorError("empty selector")
    parts: list[tuple[str, _Compound]] = []
    tokens = re.split(r"\s*(>)\s*|\s+", selector)
    combinator = ""
    for token in tokens:
        if token is None or token == "":
            continue
        if token == ">":
            combinator = ">"
            continue
        parts.append((combinator, _parse_compound(token)))
        combinator = " "
    if not parts:
        raise SelectorError(f"unusable selector {selector!r}")
    return parts


def _matches_compound(el: Element, comp: _Compound) -> bool:
    if comp.tag is not None and el.tag != comp.tag:
        return False
    if comp.id is not None and el.get("id") != comp.id:
        return False
    for cls in comp.classes:
        if cls not in el.classes():
            return False
    for name, value in comp.attrs:
        if not el.has(name):
            return False
        if value is not None and (el.get(name) or "") != value:
            return False
    if comp.nth_child is not None and (
        not isinstance(el.parent, (Element, Document))
        or element_index(el) != comp.nth_child
    ):
        return False
    if comp.nth_of_type is not None:
        same_tag = [
            c
            for c in (el.parent.children if el.parent else [])
            if isinstance(c, Element) and c.tag == el.tag
        ]
        if el not in same_tag or same_tag.index(el) + 1 != comp.nth_of_type:
            return False
    if comp.first_child and element_index(el) != 1:
        return False
    if comp.last_child:
        siblings = (
            el.parent.element_children()
            if isinstance(el.parent, (Element, Document))
            else [el]
        )
        if not siblings or siblings[-1] is not el:
            return False
    return True


def _matches_chain(el: Element, parts, idx: int) -> bool:
    combinator, comp = parts[idx]
    if not _matches_compound(el, comp):
        return False
    if idx == 0:
        return True
    prev_comb = parts[idx][0]
    if prev_comb == ">":
        parent = el.parent
        return isinstance(parent, Element) and _matches_chain(
            parent, parts, idx - 1
        )
    for anc in ancestors(el):
        if _matches_chain(anc, parts, idx - 1):
            return True
    return False


def select(root: Node | Document, selector: str) -> list[Element]:
    parts = _parse_selector(selector)
    return [el for el in iter_elements(root) if _matches_chain(el, parts, len(parts) - 1)]


def select_one(root: Node | Document, selector: str) -> Element | None:
    matches = select(root, selector)
    return matches[0] if len(matches) == 1 else None


# ---------------------------------------------------------------------------
# Locators

_SAFE_IDENT_RE = re.compile(r"^[A-Za-z][\w-]*$")


def _owner_document(el: Element) -> Document:
    cur: Node | Document | None = el
    while cur is not None and not isinstance(cur, Document):
        cur = cur.parent
    if cur is None:
        raise LocatorError("element is detached from any document")
    return cur


def build_locator(el: Element, doc: Document | None = None) -> NodeLocator:
    """Unique selector for one element: #id, then a unique class chain, then
    a positional nth-child path."""
    if doc is None:
        doc = _owner_document(el)
    selector = _selector_for(el, doc)
    matches = select(doc, selector)
    if len(matches) != 1 or matches[0] is not el:
        raise LocatorError(f"selector {selector!r} does not isolate the node")
    return NodeLocator(
        css_selector=selector,
        dom_path=dom_path_of(el),
        snippet=outer_html(el)[:SNIPPET_CAP],
    )


def _selector_for(el: Element, doc: Document) -> str:
    el_id = el.get("id")
    if el_id and _SAFE_IDENT_RE.match(el_id):
        if len(select(doc, f"#{el_id}")) == 1:
            return f"#{el_id}"

    classes = [c for c in el.classes() if _SAFE_IDENT_RE.match(c)]
    if classes and len(classes) == len(el.classes()):
        chain = el.tag + "".join(f".{c}" for c in classes)
        if len(select(doc, chain)) == 1:
            return chain

    parts: list[str] = []
    cur: Element | None = el
    while isinstance(cur, Element) and cur.tag not in ("html", "body"):
        anchor_id = cur.get("id")
        if (
            cur is not el
            and anchor_id
            and _SAFE_IDENT_RE.match(anchor_id)
            and len(select(doc, f"#{anchor_id}")) == 1
        ):
            parts.insert(0, f"#{anchor_id}")
            break
        seg = cur.tag
        parent = cur.parent
        siblings = (
            parent.element_children()
            if isinstance(parent, (Element, Document))
            else [cur]
        )
        if len(siblings) > 1:
            seg += f":nth-child({element_index(cur)})"
        parts.insert(0, seg)
        cur = parent if isinstance(parent, Element) else None
    candidate = " > ".join(parts) if parts else el.tag
    if len(select(doc, candidate)) == 1:
        return candidate

    # Fully qualified fallback: nth-child on every step from the root.
    parts = []
    cur = el
    while isinstance(cur, Element):
        parts.insert(0, f"{cur.tag}:nth-child({element_index(cur)})")
        cur = cur.parent if isinstance(cur.parent, Element) else None
    return " > ".join(parts)


def resolve_locator(
    doc: Document, locator: NodeLocator, dom_path_fallback: bool = True
) -> Element | None:
    """Resolve a locator to exactly one element, or None. The dom_path
    fallback is the single re-resolution step patchers are allowed."""
    try:
        matches = select(doc, locator.css_selector)
    except SelectorError:
        matches = []
    if len(matches) == 1:
        return matches[0]
    if dom_path_fallback and locator.dom_path:
        return resolve_dom_path(doc, locator.dom_path)
    return None
