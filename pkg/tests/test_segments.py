"""Segment parser: delimiter splitting, fence stripping, structural and
TypeScript validation, plus the randomized round-trip / brute-force suites."""

import re

import pytest
from hypothesis import given, settings, strategies as st

from a11yrepair.errors import SegmentParseError, SegmentValidationError
from a11yrepair.segments import (
    RemediationSegments,
    parse_segments,
    scan_brackets,
    validate_html_segment,
    validate_styles_segment,
    validate_typescript_segment,
)

TRIO = frozenset({"TEMPLATE", "TYPESCRIPT", "STYLES"})
TEMPLATE_ONLY = frozenset({"TEMPLATE"})
FRAGMENT_ONLY = frozenset()


class TestParseSegments:
    def test_single_template(self):
        got = parse_segments("<<<TEMPLATE>>>\n<div></div>", TEMPLATE_ONLY)
        assert got.template == "<div></div>"
        assert got.typescript is None and got.fragment is None

    def test_trio_single_line_bodies(self):
        got = parse_segments(
            "<<<TEMPLATE>>>A\n<<<TYPESCRIPT>>>B\n<<<STYLES>>>C", TRIO
        )
        assert (got.template, got.typescript, got.styles) == ("A", "B", "C")

    def test_fragment_fence_stripping(self):
        got = parse_segments("```html\n<p>x</p>\n```", FRAGMENT_ONLY)
        assert got.fragment == "<p>x</p>"

    def test_fence_stripping_inside_segment(self):
        got = parse_segments(
            "<<<TEMPLATE>>>\n```html\n<div></div>\n```", TEMPLATE_ONLY
        )
        assert got.template == "<div></div>"

    def test_preamble_tolerated(self):
        got = parse_segments(
            "Sure, here is the fix:\n<<<TEMPLATE>>>\n<div></div>", TEMPLATE_ONLY
        )
        assert got.template == "<div></div>"

    def test_missing_expected_delimiter(self):
        with pytest.raises(SegmentParseError) as err:
            parse_segments("<<<TEMPLATE>>>\nA", TRIO)
        assert "TEMPLATE" in str(err.value)
        assert set(err.value.expected) == TRIO

    def test_unknown_delimiter(self):
        with pytest.raises(SegmentParseError, match="unknown delimiter"):
            parse_segments("<<<SCRIPTS>>>\nA", TEMPLATE_ONLY)

    def test_empty_body(self):
        with pytest.raises(SegmentParseError, match="empty body"):
            parse_segments("<<<TEMPLATE>>>\n\n", TEMPLATE_ONLY)

    def test_empty_response(self):
        with pytest.raises(SegmentParseError):
            parse_segments("   ", FRAGMENT_ONLY)

    def test_delimiter_not_matched_mid_line(self):
        got = parse_segments(
            "<<<TEMPLATE>>>\nuse the literal <<<TYPESCRIPT>>> marker inline",
            TEMPLATE_ONLY,
        )
        assert "<<<TYPESCRIPT>>>" in got.template

    def test_duplicate_delimiter_rejected(self):
        with pytest.raises(SegmentParseError, match="duplicate"):
            parse_segments("<<<TEMPLATE>>>\nA\n<<<TEMPLATE>>>\nB", TEMPLATE_ONLY)

    def test_fragment_exclusive_with_trio(self):
        with pytest.raises(SegmentParseError):
            RemediationSegments(template="a", fragment="b", raw="")


_BODY_LINE = st.text(
    alphabet=st.characters(blacklist_categories=["Cs", "Cc"]),
    min_size=1,
    max_size=30,
).filter(lambda s: not s.startswith(("<<<", "```")) and s.strip())

_BODY = st.lists(_BODY_LINE, min_size=1, max_size=4).map("\n".join)


class TestRoundTripProperty:
    @settings(max_examples=400)
    @given(template=_BODY, typescript=_BODY, styles=_BODY)
    def test_reassembly_round_trips(self, template, typescript, styles):
        text = (
            f"<<<TEMPLATE>>>\n{template}\n"
            f"<<<TYPESCRIPT>>>\n{typescript}\n"
            f"<<<STYLES>>>\n{styles}"
        )
        got = parse_segments(text, TRIO)
        assert got.template == template.strip()
        assert got.typescript == typescript.strip()
        assert got.styles == styles.strip()

    @settings(max_examples=300)
    @given(st.text(max_size=200))
    def test_totality_only_typed_errors(self, text):
        for expected in (FRAGMENT_ONLY, TEMPLATE_ONLY, TRIO):
            try:
                got = parse_segments(text, expected)
                assert isinstance(got, RemediationSegments)
            except SegmentParseError:
                pass  # the one permitted failure mode


class TestValidateHtml:
    def test_balanced_ok(self):
        validate_html_segment("<div><p>a</p></div>")

    def test_mismatched_nesting_rejected(self):
        with pytest.raises(SegmentValidationError, match="structural"):
            validate_html_segment("<div><p>a</div>")

    def test_unclosed_rejected(self):
        with pytest.raises(SegmentValidationError):
            validate_html_segment("<div><span>a")

    def test_framework_bindings_tolerated(self):
        validate_html_segment('<button (click)="go()">Go</button>')
        validate_html_segment('<img [src]="u" [attr.alt]="d">')
        validate_html_segment("<p *ngIf=\"ok\">{{ msg }}</p>")

    def test_idempotent_on_ok_input(self):
        from a11yrepair import dom

        src = '<ul><li class="x">a</li><li>b</li></ul>'
        validate_html_segment(src)
        once = dom.serialize(dom.parse_fragment(src))
        validate_html_segment(once)

    def test_empty_rejected(self):
        with pytest.raises(SegmentValidationError):
            validate_html_segment("   ")


class TestValidateTypescript:
    def test_ok_class(self):
        validate_typescript_segment("export class Foo { go() {} }", "Foo")

    def test_unbalanced_brace(self):
        with pytest.raises(SegmentValidationError, match="unclosed"):
            validate_typescript_segment("export class Foo { go() {", "Foo")

    def test_class_preservation(self):
        with pytest.raises(SegmentValidationError, match="Foo"):
            validate_typescript_segment("export class Bar {}", "Foo")

    def test_braces_inside_strings_ignored(self):
        validate_typescript_segment("const s = '}}}'; class A { }", "A")
        validate_typescript_segment('const s = "{{{";\nclass A { }', "A")

    def test_braces_inside_comments_ignored(self):
        validate_typescript_segment("// }}}\n/* {{{ */\nclass A {}", "A")

    def test_template_literal_expressions(self):
        validate_typescript_segment(
            "class A { f() { return `a ${this.x + {k: 1}.k} b`; } }", "A"
        )

    def test_unterminated_string(self):
        with pytest.raises(SegmentValidationError, match="unterminated"):
            validate_typescript_segment("const s = 'oops\nclass A {}", "A")

    def test_unterminated_template_literal(self):
        with pytest.raises(SegmentValidationError, match="template"):
            validate_typescript_segment("const s = `oops; class A {}", "A")

    def test_truncation_sentinel(self):
        with pytest.raises(SegmentValidationError, match="truncation"):
            validate_typescript_segment("class A {\n  ...\n}", "A")

    def test_styles_unchanged_marker_ok(self):
        validate_styles_segment("/* unchanged */")

    def test_styles_unbalanced(self):
        with pytest.raises(SegmentValidationError):
            validate_styles_segment(".a { color: red;")


def brute_force_balance(text: str) -> str | None:
    """Independent oracle: single-pass counter with its own string/comment
    state machine. A template expression opener joins the nesting record as
    a "$" sentinel so its closer cannot be confused with an outer brace."""
    counts = {"(": 0, "[": 0, "{": 0}
    closing = {")": "(", "]": "[", "}": "{"}
    order = []  # nesting record; catches crossed pairs
    state = "code"
    i = 0
    while i < len(text):
        c = text[i]
        pair = text[i : i + 2]
        if state == "code":
            if pair == "//":
                state = "line"; i += 2; continue
            if pair == "/*":
                state = "block"; i += 2; continue
            if c == "'":
                state = "sq"
            elif c == '"':
                state = "dq"
            elif c == "`":
                state = "tpl"
            elif c in counts:
                counts[c] += 1
                order.append(c)
            elif c in closing:
                if c == "}" and order and order[-1] == "$":
                    order.pop()
                    state = "tpl"
                    i += 1
                    continue
                want = closing[c]
                if counts[want] == 0 or not order or order[-1] != want:
                    return "unbalanced"
                counts[want] -= 1
                order.pop()
        elif state == "line":
            if c == "\n":
                state = "code"
        elif state == "block":
            if pair == "*/":
                state = "code"; i += 2; continue
        elif state in ("sq", "dq"):
            if c == "\\":
                i += 2; continue
            if (state == "sq" and c == "'") or (state == "dq" and c == '"'):
                state = "code"
            elif c == "\n":
                return "unterminated"
        elif state == "tpl":
            if c == "\\":
                i += 2; continue
            if c == "`":
                state = "code"
            elif pair == "${":
                order.append("$")
                state = "code"
                i += 2
                continue
        i += 1
    if state in ("sq", "dq", "tpl", "block"):
        return "unterminated"
    if "$" in order:
        return "unterminated"
    if any(counts.values()) or order:
        return "unbalanced"
    return None


_SNIPPET_TOKENS = st.sampled_from(
    ["(", ")", "[", "]", "{", "}", "a", " ", "\n", "'x'", '"y"',
     "// c\n", "/* b */", "`t`", "'('", '"}"', "/* } */", "// (\n", "`${", "}`"]
)


class TestBruteForceAgreement:
    @settings(max_examples=1000, deadline=None)
    @given(st.lists(_SNIPPET_TOKENS, max_size=14).map("".join))
    def test_scanner_agrees_with_oracle(self, snippet):
        ours = scan_brackets(snippet)
        oracle = brute_force_balance(snippet)
        assert (ours is None) == (oracle is None), (snippet, ours, oracle)
