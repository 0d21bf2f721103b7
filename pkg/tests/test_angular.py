"""Workspace discovery, triad assembly, template preprocessing, static scans."""

import json
from collections import Counter

import pytest

from a11yrepair.angular import (
    discover_components,
    load_workspace,
    parse_component_metadata,
    preprocess_template,
    static_scan_component,
)
from a11yrepair.errors import WorkspaceError

from conftest import NG_APP


class TestLoadWorkspace:
    def test_fixture_workspace(self):
        ws = load_workspace(NG_APP)
        assert [p.name for p in ws.projects] == ["demo"]
        assert ws.projects[0].source_root == "src"
        assert ws.projects[0].build_command == "ng build --configuration production"

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(WorkspaceError, match="no angular.json"):
            load_workspace(tmp_path)

    def test_malformed_manifest_reports_position(self, tmp_path):
        (tmp_path / "angular.json").write_text('{"projects": {')
        with pytest.raises(WorkspaceError, match="line 1"):
            load_workspace(tmp_path)

    def test_two_projects_stable_order(self, tmp_path):
        (tmp_path / "angular.json").write_text(
            json.dumps(
                {
                    "projects": {
                        "zeta": {"sourceRoot": "z"},
                        "alpha": {"sourceRoot": "a", "architect": {"build": {}}},
                    }
                }
            )
        )
        ws = load_workspace(tmp_path)
        assert [p.name for p in ws.projects] == ["alpha", "zeta"]
        assert ws.projects[0].build_command is not None
        assert ws.projects[1].build_command is None


class TestDiscovery:
    def test_fixture_triads_and_edges(self):
        ws = load_workspace(NG_APP)
        result = discover_components(ws)
        names = sorted(t.component_name for t in result.triads)
        assert names == ["banner", "footer", "hero"]
        assert [(e.from_component, e.to_component, e.via) for e in result.edges] == [
            ("hero", "banner", "template_tag")
        ]
        assert result.errors == []

    def test_inline_template_marker(self):
        ws = load_workspace(NG_APP)
        result = discover_components(ws)
        footer = next(t for t in result.triads if t.component_name == "footer")
        assert footer.inline_template
        assert footer.template_display_path.endswith("footer.component.ts#inline")
        assert "<footer>" in footer.template_content

    def test_dangling_template_url_isolated(self, tmp_path):
        (tmp_path / "angular.json").write_text(
            json.dumps({"projects": {"p": {"sourceRoot": "src"}}})
        )
        app = tmp_path / "src" / "app"
        app.mkdir(parents=True)
        (app / "broken.component.ts").write_text(
            "import { Component } from '@angular/core';\n"
            "@Component({ selector: 'app-broken', templateUrl: './gone.html' })\n"
            "export class BrokenComponent {}\n"
        )
        (app / "ok.component.ts").write_text(
            "import { Component } from '@angular/core';\n"
            "@Component({ selector: 'app-ok', template: `<p>fine</p>` })\n"
            "export class OkComponent {}\n"
        )
        result = discover_components(load_workspace(tmp_path))
        assert [t.component_name for t in result.triads] == ["ok"]
        assert len(result.errors) == 1
        assert "gone.html" in result.errors[0][1]

    def test_discovery_is_read_only(self, ng_workspace):
        from a11yrepair.patch_angular import workspace_digests

        before = workspace_digests(ng_workspace)
        discover_components(load_workspace(ng_workspace))
        assert workspace_digests(ng_workspace) == before

    def test_triad_count_matches_component_files(self):
        ws = load_workspace(NG_APP)
        result = discover_components(ws)
        files = list((NG_APP / "src").rglob("*.component.ts"))
        assert len(result.triads) + len(result.errors) == len(files)


class TestMetadataExtraction:
    def test_decorator_fields(self):
        meta = parse_component_metadata(
            "@Component({ selector: 'x-y', templateUrl: './a.html',"
            " styleUrls: ['./a.css', './b.css'] })\nclass C {}"
        )
        assert meta["selector"] == "x-y"
        assert meta["templateUrl"] == "./a.html"
        assert meta["styleUrls"] == ["./a.css", "./b.css"]

    def test_inline_template_backticks_with_braces(self):
        meta = parse_component_metadata(
            "@Component({ selector: 'x', template: `<p>{{ a }}</p>` })\nclass C {}"
        )
        assert meta["template"] == "<p>{{ a }}</p>"

    def test_style_url_singular(self):
        meta = parse_component_metadata(
            "@Component({ selector: 'x', template: `<p></p>`, styleUrl: './one.css' })"
        )
        assert meta["styleUrls"] == ["./one.css"]

    def test_no_decorator(self):
        assert parse_component_metadata("export class NotAComponent {}") is None


class TestPreprocessing:
    def test_control_flow_blocks_neutralized(self):
        template = (
            "@if (user) {\n  <p>Hello {{ user.name }}</p>\n} @else {\n"
            "  <a href=\"/login\">Log in</a>\n}"
        )
        out = preprocess_template(template)
        assert "@if" not in out and "@else" not in out
        assert "{{ user.name }}" in out
        assert "<a href=\"/login\">" in out

    def test_for_block(self):
        template = "@for (item of items; track item.id) {\n<li>{{ item }}</li>\n} @empty {\n<li>none</li>\n}"
        out = preprocess_template(template)
        assert "<li>{{ item }}</li>" in out and "@for" not in out

    def test_plain_templates_untouched(self):
        template = '<div *ngIf="ok"><img [src]="u" [alt]="d"></div>'
        assert preprocess_template(template) == template


class TestStaticScan:
    def test_bound_src_without_alt_flagged(self):
        from a11yrepair.angular import ComponentTriad
        from pathlib import Path

        triad = ComponentTriad(
            component_name="x",
            template_path=Path("x.html"),
            typescript_path=Path("x.ts"),
            styles_path=None,
            template_content='<img [src]="u">',
            typescript_content="class X {}",
            styles_content="",
        )
        report = static_scan_component(triad)
        assert [v.rule_id for v in report.violations] == ["image-alt"]

    def test_bound_alt_suppresses(self):
        from a11yrepair.angular import ComponentTriad
        from pathlib import Path

        triad = ComponentTriad(
            component_name="x",
            template_path=Path("x.html"),
            typescript_path=Path("x.ts"),
            styles_path=None,
            template_content='<img [src]="u" [alt]="d">',
            typescript_content="class X {}",
            styles_content="",
        )
        assert len(static_scan_component(triad)) == 0

    def test_ngfor_buttons_flagged_once_per_static_node(self):
        from a11yrepair.angular import ComponentTriad
        from pathlib import Path

        triad = ComponentTriad(
            component_name="x",
            template_path=Path("x.html"),
            typescript_path=Path("x.ts"),
            styles_path=None,
            template_content='<ul><li *ngFor="let i of items"><button (click)="go(i)"></button></li></ul>',
            typescript_content="class X {}",
            styles_content="",
        )
        report = static_scan_component(triad)
        assert Counter(v.rule_id for v in report.violations) == {"button-name": 1}

    def test_document_level_rules_suppressed_for_templates(self):
        ws = load_workspace(NG_APP)
        result = discover_components(ws)
        hero = next(t for t in result.triads if t.component_name == "hero")
        report = static_scan_component(hero)
        assert Counter(v.rule_id for v in report.violations) == {
            "image-alt": 1,
            "button-name": 1,
            "form-label": 1,
        }

    def test_fixture_banner_keyboard_violation(self):
        ws = load_workspace(NG_APP)
        result = discover_components(ws)
        banner = next(t for t in result.triads if t.component_name == "banner")
        report = static_scan_component(banner)
        assert [v.rule_id for v in report.violations] == ["keyboard-operability"]
