"""Parses and validates delimiter-structured LLM responses.

A response is either fragment-only (the whole body is one HTML fragment) or
split into <<<TEMPLATE>>> / <<<TYPESCRIPT>>> / <<<STYLES>>> segments.
Delimiters match at line starts only, so code that merely mentions the
literal marker cannot open a segment. Validation is deliberately heuristic:
structural HTML checks via the recovering parser, and a string/comment-aware
bracket balance for TypeScript — not a grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import dom
from .errors import SegmentParseError, SegmentValidationError

KNOWN_DELIMITERS = frozenset({"TEMPLATE", "TYPESCRIPT", "STYLES"})

# Accepted as an explicit "no style changes" body in holistic responses.
STYLES_UNCHANGED_MARKER = "/* unchanged */"

_DELIMITER_LINE_RE = re.compile(r"^<<<([A-Z]+)>>>[ \t]*(.*)$")
_FENCE_RE = re.compile(r"^```[\w-]*[ \t]*$")


@dataclass(frozen=True)
class RemediationSegments:
    template: str | None = None
    typescript: str | None = None
    styles: str | None = None
    fragment: str | None = None
    raw: str = ""

    def __post_init__(self):
        populated = [
            s for s in (self.template, self.typescript, self.styles, self.fragment)
            if s is not None
        ]
        if not populated:
            raise SegmentParseError("no segment populated")
        if any(not s.strip() for s in populated):
            raise SegmentParseError("populated segment is empty")
        if self.fragment is not None and (
            self.template or self.typescript or self.styles
        ):
            raise SegmentParseError("fragment is exclusive with delimited segments")


def _strip_fences(body: str) -> str:
    lines = body.split("\n")
    while lines and not lines[0].strip():
        lines.pop(0)
    while lines and not lines[-1].strip():
        lines.pop()
    if lines and _FENCE_RE.match(lines[0]):
        closers = [i for i, ln in enumerate(lines[1:], start=1) if ln.strip() == "```"]
        if closers:
            last = closers[-1]
            lines = lines[1:last] + lines[last + 1:]
        else:
            lines = lines[1:]
    return "\n".join(lines).strip()


def parse_segments(response: str, expected: frozenset[str]) -> RemediationSegments:
    """Split a response by its expected delimiters (empty set: fragment-only).
    Raises SegmentParseError — and only that — on any malformed input."""
    if not isinstance(response, str) or not response.strip():
        raise SegmentParseError("empty response")

    if not expected:
        fragment = _strip_fences(response)
        if not fragment:
            raise SegmentParseError("fragment-only response is empty after fences")
        return RemediationSegments(fragment=fragment, raw=response)

    bodies: dict[str, list[str]] = {}
    current: str | None = None
    for line in response.split("\n"):
        m = _DELIMITER_LINE_RE.match(line)
        if m:
            name, trailing = m.group(1), m.group(2)
            if name not in KNOWN_DELIMITERS:
                raise SegmentParseError(
                    f"unknown delimiter <<<{name}>>>",
                    found=sorted(bodies) + [name],
                    expected=sorted(expected),
                )
            if name in bodies:
                raise SegmentParseError(f"duplicate delimiter <<<{name}>>>")
            bodies[name] = []
            current = name
            if trailing.strip():
                bodies[name].append(trailing)
            continue
        if current is not None:
            bodies[current].append(line)
        # Preamble text before the first delimiter is tolerated and dropped.

    found = set(bodies)
    if found != set(expected):
        raise SegmentParseError(
            f"delimiters found {sorted(found)} do not match expected {sorted(expected)}",
            found=sorted(found),
            expected=sorted(expected),
        )
    cleaned = {name: _strip_fences("\n".join(lines)) for name, lines in bodies.items()}
    for name, body in cleaned.items():
        if not body:
            raise SegmentParseError(f"segment <<<{name}>>> has an empty body")
    return RemediationSegments(
        template=cleaned.get("TEMPLATE"),
        typescript=cleaned.get("TYPESCRIPT"),
        styles=cleaned.get("STYLES"),
        raw=response,
    )


def validate_html_segment(s: str) -> None:
    """Structural gate: no parse recoveries and a serialize fixed point.
    Framework binding syntax ([x], (y), {{z}}, *dir) passes as attributes."""
    if not s or not s.strip():
        raise SegmentValidationError("empty HTML segment")
    tree = dom.parse_fragment(s, strict=True)
    if tree.recoveries:
        raise SegmentValidationError(f"structural error: {tree.recoveries[0]}")
    once = dom.serialize(tree)
    again_tree = dom.parse_fragment(once, strict=True)
    if again_tree.recoveries:
        raise SegmentValidationError(
            f"structural error after reserialization: {again_tree.recoveries[0]}"
        )
    if dom.serialize(again_tree) != once:
        raise SegmentValidationError("serialization does not reach a fixed point")


_BRACKET_PAIRS = {")": "(", "]": "[", "}": "{"}


def scan_brackets(s: str) -> str | None:
    """Bracket balance outside strings/comments, template-literal aware.
    Returns an error description or None."""
    stack: list[str] = []
    mode_stack: list[str] = ["code"]
    i = 0
    n = len(s)
    while i < n:
        mode = mode_stack[-1]
        c = s[i]
        nxt = s[i + 1] if i + 1 < n else ""
        if mode == "code":
            if c == "/" and nxt == "/":
                mode_stack.append("line")
                i += 2
                continue
            if c == "/" and nxt == "*":
                mode_stack.append("block")
                i += 2
                continue
            if c in ("'", '"'):
                mode_stack.append(c)
                i += 1
                continue
            if c == "`":
                mode_stack.append("template")
                i += 1
                continue
            if c in "([{":
                stack.append(c)
            elif c in ")]}":
                if c == "}" and stack and stack[-1] == "$":
                    stack.pop()
                    mode_stack.pop()  # back into the template literal
                elif not stack or stack[-1] != _BRACKET_PAIRS[c]:
                    return f"unbalanced {c!r} at offset {i}"
                else:
                    stack.pop()
        elif mode == "line":
            if c == "\n":
                mode_stack.pop()
        elif mode == "block":
            if c == "*" and nxt == "/":
                mode_stack.pop()
                i += 2
                continue
        elif mode in ("'", '"'):
            if c == "\\":
                i += 2
                continue
            if c == mode:
                mode_stack.pop()
            elif c == "\n":
                return f"unterminated string at offset {i}"
        elif mode == "template":
            if c == "\\":
                i += 2
                continue
            if c == "`":
                mode_stack.pop()
            elif c == "$" and nxt == "{":
                stack.append("$")
                mode_stack.append("code")
                i += 2
                continue
        i += 1
    final = mode_stack[-1]
    if final in ("'", '"'):
        return "unterminated string at end of input"
    if final == "template":
        return "unterminated template literal at end of input"
    if final == "block":
        return "unterminated block comment at end of input"
    if stack:
        return f"unclosed {stack[-1]!r} at end of input"
    return None


_TRUNCATION_RE = re.compile(r"^\s*(\.\.\.|…)\s*;?\s*$", re.MULTILINE)


def validate_typescript_segment(s: str, expected_class: str | None = None) -> None:
    """Heuristic syntax gate per the regex-parser approach: bracket balance,
    string termination, class-name preservation, no truncation sentinel."""
    if not s or not s.strip():
        raise SegmentValidationError("empty TypeScript segment")
    problem = scan_brackets(s)
    if problem:
        raise SegmentValidationError(problem)
    if _TRUNCATION_RE.search(s):
        raise SegmentValidationError("truncation sentinel '...' found as a statement")
    if expected_class:
        if not re.search(rf"\bclass\s+{re.escape(expected_class)}\b", s):
            raise SegmentValidationError(
                f"original class {expected_class!r} missing from segment"
            )


def validate_styles_segment(s: str) -> None:
    if not s or not s.strip():
        raise SegmentValidationError("empty styles segment")
    if s.strip() == STYLES_UNCHANGED_MARKER:
        return
    problem = scan_brackets(s)
    if problem:
        raise SegmentValidationError(problem)
