"""Metrics: Eq.-style remediation rate against the published tables, delta
algebra, structural diff, and the run-report document."""

import json

import pytest
from hypothesis import given, strategies as st

from a11yrepair.errors import MergeError, UndefinedRateError
from a11yrepair.model import Scanner
from a11yrepair.report import (
    BuildIntegrity,
    MetricsSummary,
    compute_delta,
    emit_run_report,
    exit_code_for,
    remediation_rate,
    structural_diff,
    target_entry,
    target_verified,
)
from test_model import make_report, make_violation

# (initial, fixed, published RR) rows for the 12 static sites. Row 12 is
# internally inconsistent as published: counts 10/4 give 40.00, not 45.71.
STATIC_ROWS = [
    (26, 26, 100.00),
    (27, 27, 100.00),
    (28, 28, 100.00),
    (58, 58, 100.00),
    (54, 54, 100.00),
    (50, 50, 100.00),
    (68, 32, 47.06),
    (21, 10, 47.62),
    (16, 16, 100.00),
    (42, 42, 100.00),
    (21, 5, 23.81),
    (10, 4, 40.00),  # published as 45.71; see acceptance notes
]

SPA_ROWS = [
    (14, 14, 100.00),
    (32, 29, 90.63),
    (66, 46, 69.70),
    (7, 7, 100.00),
    (3, 3, 100.00),
    (48, 47, 97.92),
]


class TestRemediationRate:
    @pytest.mark.parametrize("initial,fixed,expected", STATIC_ROWS + SPA_ROWS)
    def test_table_rows(self, initial, fixed, expected):
        assert remediation_rate(initial, initial - fixed) == pytest.approx(
            expected, abs=0.01
        )

    def test_nothing_fixed(self):
        assert remediation_rate(17, 17) == 0.0

    def test_all_fixed(self):
        assert remediation_rate(17, 0) == 100.0

    def test_zero_baseline_undefined(self):
        with pytest.raises(UndefinedRateError):
            remediation_rate(0, 0)

    def test_half_up_rounding(self):
        # 1/3 -> 33.333... -> 33.33; 2/3 -> 66.666... -> 66.67
        assert remediation_rate(3, 2) == 33.33
        assert remediation_rate(3, 1) == 66.67
        # exact .xx5 tie rounds up (banker's rounding would give 40.62)
        assert remediation_rate(32, 19) == 40.63


class TestDelta:
    def test_set_algebra(self):
        before = make_report([make_violation(selector=s) for s in ("#a", "#b", "#c")])
        after = make_report([make_violation(selector="#c")])
        delta = compute_delta(before, after)
        keys = before.by_identity()
        assert delta.fixed_keys == frozenset(
            k for k, v in keys.items() if v.locator.css_selector in ("#a", "#b")
        )
        assert delta.remaining_keys == frozenset(
            k for k, v in keys.items() if v.locator.css_selector == "#c"
        )
        assert delta.introduced_keys == frozenset()

    def test_identical_reports(self):
        r = make_report([make_violation()])
        delta = compute_delta(r, r)
        assert delta.fixed_keys == frozenset()
        assert delta.remaining_keys == r.identity_keys()

    def test_introduced_key(self):
        before = make_report([make_violation(selector="#a")])
        after = make_report([make_violation(selector="#a"), make_violation(selector="#d")])
        delta = compute_delta(before, after)
        assert len(delta.introduced_keys) == 1

    def test_source_mismatch(self):
        with pytest.raises(MergeError):
            compute_delta(
                make_report([], source="x"), make_report([], source="y")
            )

    @given(
        st.sets(st.sampled_from("abcdefgh"), max_size=8),
        st.sets(st.sampled_from("abcdefgh"), max_size=8),
    )
    def test_partition_property(self, before_ids, after_ids):
        before = make_report([make_violation(selector=f"#{s}") for s in before_ids])
        after = make_report([make_violation(selector=f"#{s}") for s in after_ids])
        delta = compute_delta(before, after)
        assert len(before) == len(delta.fixed_keys) + len(delta.remaining_keys)
        assert len(after) == len(delta.remaining_keys) + len(delta.introduced_keys)
        assert delta.fixed_keys.isdisjoint(delta.remaining_keys)
        assert delta.fixed_keys.isdisjoint(delta.introduced_keys)
        assert delta.remaining_keys.isdisjoint(delta.introduced_keys)


BASE_DOC = (
    '<html lang="en"><head><title>T</title></head><body>'
    '<nav><a id="l1" href="a.html">A</a><a id="l2" href="b.html">B</a></nav>'
    '<button id="go" (click)="go()">Go</button>'
    '<form><label for="q">Q</label><input id="q" type="text"></form>'
    "</body></html>"
)


class TestStructuralDiff:
    def test_self_diff_empty(self):
        assert structural_diff(BASE_DOC, BASE_DOC) == []

    def test_aria_addition_not_flagged(self):
        after = BASE_DOC.replace('<button id="go"', '<button id="go" aria-label="Go"')
        assert structural_diff(BASE_DOC, after) == []

    def test_alt_lang_role_additions_not_flagged(self):
        after = BASE_DOC.replace(
            '<a id="l1" href="a.html">A</a>',
            '<a id="l1" href="a.html" lang="en" role="link">A</a>',
        )
        assert structural_diff(BASE_DOC, after) == []

    def test_dropped_handler_flagged(self):
        after = BASE_DOC.replace(' (click)="go()"', "")
        flags = structural_diff(BASE_DOC, after)
        assert any("(click)" in f and "removed" in f for f in flags)

    def test_removed_nav_link_flagged(self):
        after = BASE_DOC.replace('<a id="l2" href="b.html">B</a>', "")
        flags = structural_diff(BASE_DOC, after)
        assert any("interactive element removed: <a>" in f for f in flags)

    def test_changed_href_flagged(self):
        after = BASE_DOC.replace('href="b.html"', 'href="elsewhere.html"')
        flags = structural_diff(BASE_DOC, after)
        assert any("href" in f and "#l2" in f for f in flags)

    def test_form_control_count_change_flagged(self):
        after = BASE_DOC.replace("</form>", '<input type="text" name="extra"></form>')
        flags = structural_diff(BASE_DOC, after)
        assert any("form control count" in f for f in flags)


class TestRunReport:
    def _entry(self, v_final=0, bi=BuildIntegrity.NA, error=None):
        summary = MetricsSummary(
            v_initial=7, v_final=v_final,
            rr_percent=remediation_rate(7, v_final), bi=bi, runtime_ms=5,
        )
        before = make_report([make_violation(selector=f"#{i}") for i in range(7)])
        after = make_report(
            [make_violation(selector=f"#{i}") for i in range(v_final)]
        )
        return target_entry(
            source="page", kind="static", summary=summary,
            delta=compute_delta(before, after), error=error,
        )

    def test_exit_codes(self):
        good, bad = self._entry(0), self._entry(3)
        assert exit_code_for([good, good], "fix_web") == 0
        assert exit_code_for([good, bad], "fix_web") == 2
        assert exit_code_for([bad, bad], "fix_web") == 3
        assert exit_code_for([bad], "audit") == 0

    def test_verified_requires_clean_final(self):
        assert target_verified(self._entry(0))
        assert not target_verified(self._entry(2))
        assert not target_verified(self._entry(0, error="boom"))
        assert not target_verified(self._entry(0, bi=BuildIntegrity.FAIL))

    def test_report_file_schema(self, tmp_path):
        path = emit_run_report(
            tmp_path / "r.json", mode="fix_web", config={"x": 1},
            entries=[self._entry(0)], started_at="2026-01-01T00:00:00+00:00",
            runtime_ms=12,
        )
        data = json.loads(path.read_text())
        assert data["schema_version"] == 1
        assert data["summary"]["targets_verified"] == 1
        assert data["summary"]["exit_code"] == 0
        assert data["targets"][0]["rr_percent"] == 100.0
        assert data["targets"][0]["bi"] == "n/a"

    def test_rolled_back_outcome_schema(self, tmp_path):
        summary = MetricsSummary(3, 3, 0.0, BuildIntegrity.FAIL, runtime_ms=1)
        entry = target_entry(
            source="c", kind="angular_component", summary=summary,
            outcomes=[{"key": "k", "rule_id": "image-alt", "status": "rolled_back"}],
            build={"command": "ng build", "exit_code": 1, "log_excerpt": "err"},
        )
        path = emit_run_report(
            tmp_path / "r.json", "fix_angular", {}, [entry], "t", 1
        )
        data = json.loads(path.read_text())
        target = data["targets"][0]
        assert target["violations"][0]["status"] == "rolled_back"
        assert target["build"]["log_excerpt"] == "err"
        assert data["summary"]["exit_code"] == 3


class TestAggregateRates:
    def test_mean_and_pooled_reported_both_ways(self):
        from a11yrepair.report import aggregate_rates

        entries = []
        for initial, fixed, _pub in SPA_ROWS:
            entries.append({
                "v_initial": initial,
                "v_final": initial - fixed,
                "rr_percent": remediation_rate(initial, initial - fixed),
            })
        agg = aggregate_rates(entries)
        assert agg["rr_mean_of_targets"] == pytest.approx(93.04, abs=0.01)
        assert agg["rr_pooled"] == pytest.approx(85.88, abs=0.01)

    def test_audit_entries_have_no_rates(self):
        from a11yrepair.report import aggregate_rates

        agg = aggregate_rates([{ "v_initial": 3, "v_final": 3, "rr_percent": None }])
        assert agg == {"rr_mean_of_targets": None, "rr_pooled": None}
