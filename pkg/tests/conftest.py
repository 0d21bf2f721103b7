"""Shared fixtures: corpus paths, deterministic cassette authoring for the
golden runs, and a transport that fails the test on any network use."""

from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from a11yrepair import dom
from a11yrepair.angular import discover_components, load_workspace, static_scan_component
from a11yrepair.gateway import GatewayMode, LlmGateway, write_cassette
from a11yrepair.model import ViolationKind
from a11yrepair.prompts import (
    PromptKind,
    build_prompt,
    render_violations_text,
)
from a11yrepair.rules import scan_document
from a11yrepair.segments import STYLES_UNCHANGED_MARKER

TESTS_DIR = Path(__file__).parent
CORPUS_CLEAN = TESTS_DIR / "corpus" / "clean"
CORPUS_SEEDED = TESTS_DIR / "corpus" / "seeded"
GOLDEN_STATIC = TESTS_DIR / "fixtures" / "golden_static"
NG_APP = TESTS_DIR / "fixtures" / "ng_app"

VISION_RESPONSE = "A red bicycle leaning against a brick wall."

# Authored fixes for the golden page, keyed by rule id.
GOLDEN_FIXES = {
    "color-contrast": (
        '<p id="tagline" style="color:#595959;background-color:#ffffff">'
        "Ride further for less.</p>"
    ),
    "heading-order": '<h2 id="deals">Deals of the week</h2>',
    "aria-attr-validity": '<div id="banner">Season sale on all frames!</div>',
    "link-name": (
        '<a id="more" href="detail.html" aria-label="Read more about weekly deals"></a>'
    ),
    "button-name": '<button id="subscribe">Subscribe</button>',
    "form-label": (
        '<input id="email" type="email" name="email" aria-label="Email address">'
    ),
}


class PanicSession:
    """Injected where network use would break hermeticity."""

    def request(self, *args, **kwargs):
        raise AssertionError("network call attempted in replay mode")

    post = get = request


@pytest.fixture
def panic_session():
    return PanicSession()


@pytest.fixture
def golden_page(tmp_path) -> Path:
    """Golden static fixture copied into tmp so artifacts stay out of the repo."""
    target = tmp_path / "site"
    target.mkdir()
    shutil.copy2(GOLDEN_STATIC / "page.html", target / "page.html")
    shutil.copy2(GOLDEN_STATIC / "bike.png", target / "bike.png")
    return target / "page.html"


def build_golden_cassette(
    page_path: Path,
    cassette_path: Path,
    merge_drops_attribute: bool = False,
) -> Path:
    """Author the replay cassette for the golden static run by constructing
    the exact bundles the pipeline will build."""
    html = page_path.read_text(encoding="utf-8")
    report = scan_document(html, source=str(page_path))
    doc = dom.parse_document(html)
    image_bytes = (page_path.parent / "bike.png").read_bytes()

    entries = []
    for violation in report.violations:
        el = dom.resolve_locator(doc, violation.locator)
        fragment = dom.outer_html(el)
        if violation.kind is ViolationKind.IMAGE_ALT:
            bundle = build_prompt(PromptKind.VISION, images=(("image", image_bytes),))
            entries.append((bundle, VISION_RESPONSE))
        elif violation.kind is ViolationKind.CONTRAST:
            bundle = build_prompt(
                PromptKind.CONTRAST,
                {"description": violation.help_text, "original_fragment": fragment},
            )
            entries.append((bundle, GOLDEN_FIXES["color-contrast"]))
        else:
            bundle = build_prompt(
                PromptKind.GENERAL,
                {"help_text": violation.help_text, "fragment": fragment},
            )
            entries.append((bundle, GOLDEN_FIXES[violation.rule_id]))
    write_cassette(cassette_path, entries)

    # Replay what the pipeline will produce, then record the merge exchange.
    from a11yrepair.model import violation_identity
    from a11yrepair.patch_static import fix_document
    from a11yrepair.vision import AltDescription

    gateway = LlmGateway(GatewayMode.REPLAY, cassette_path=cassette_path)
    alt_store = {
        violation_identity(v): AltDescription(VISION_RESPONSE, "gpt-4o")
        for v in report.violations
        if v.kind is ViolationKind.IMAGE_ALT
    }
    patched = fix_document(html, report, gateway, alt_store).document
    merged_response = patched
    if merge_drops_attribute:
        merged_response = patched.replace(
            ' aria-label="Read more about weekly deals"', "", 1
        )
    merge_bundle = build_prompt(
        PromptKind.RESPONSIVE_MERGE,
        {"original_html": html, "current_html": patched},
    )
    write_cassette(cassette_path, [(merge_bundle, merged_response)])
    return cassette_path


@pytest.fixture
def golden_cassette(golden_page, tmp_path) -> Path:
    return build_golden_cassette(golden_page, tmp_path / "golden.jsonl")


# ---------------------------------------------------------------------------
# Angular fixture plumbing

HERO_FIXED_TEMPLATE = """<section class="hero">
  <img [src]="logoUrl" alt="Cycle shop logo">
  <h2>{{ title }}</h2>
  <button (click)="refresh()">Refresh deals</button>
  <form><label for="coupon">Coupon</label><input type="text" id="coupon" name="coupon" [(ngModel)]="coupon"></form>
  <app-banner></app-banner>
</section>"""

HERO_REGRESSION_TEMPLATE = HERO_FIXED_TEMPLATE.replace(
    "</section>", '  <input type="text" name="extra">\n</section>'
)

BANNER_FIXED_TEMPLATE = """<aside class="banner">
  <button type="button" class="banner-toggle" (click)="toggle()" [attr.aria-expanded]="open">Toggle details</button>
  <p *ngIf="open">Free shipping this week.</p>
</aside>"""

BANNER_FIXED_TYPESCRIPT = """import { Component } from '@angular/core';

@Component({
  selector: 'app-banner',
  templateUrl: './banner.component.html',
  styleUrls: ['./banner.component.css'],
})
export class BannerComponent {
  open = false;
  readonly toggleLabel = 'Toggle details';

  toggle(): void {
    this.open = !this.open;
  }
}"""

BANNER_FIXED_STYLES = """.banner { border: 1px solid #ccc; padding: 8px; }
.banner-toggle:focus { outline: 2px solid #1a5fb4; }"""


@pytest.fixture
def ng_workspace(tmp_path) -> Path:
    target = tmp_path / "ws"
    shutil.copytree(NG_APP, target)
    return target


def build_angular_cassette(
    ws_root: Path, cassette_path: Path, hero_variant: str = "good"
) -> Path:
    """Cassette for the SPA golden run. hero_variant 'regression' returns a
    template that fixes the seeded violations but smuggles in a new one."""
    ws = load_workspace(ws_root)
    discovery = discover_components(ws)
    triads = {t.component_name: t for t in discovery.triads}
    entries = []

    hero = triads["hero"]
    hero_report = static_scan_component(hero)
    hero_bundle = build_prompt(
        PromptKind.ANGULAR_TEMPLATE,
        {
            "total": str(len(hero_report.violations)),
            "template_path": hero.template_display_path,
            "violations_text": render_violations_text(hero_report.violations),
            "template_content": hero.template_content,
        },
    )
    hero_response = (
        HERO_FIXED_TEMPLATE if hero_variant == "good" else HERO_REGRESSION_TEMPLATE
    )
    entries.append((hero_bundle, f"<<<TEMPLATE>>>\n{hero_response}"))

    banner = triads["banner"]
    banner_report = static_scan_component(banner)
    banner_bundle = build_prompt(
        PromptKind.ANGULAR_HOLISTIC,
        {
            "component_name": banner.component_name,
            "violations_text": render_violations_text(banner_report.violations),
            "template_content": banner.template_content,
            "typescript_content": banner.typescript_content,
            "styles_content": banner.styles_content or STYLES_UNCHANGED_MARKER,
        },
    )
    banner_response = (
        f"<<<TEMPLATE>>>\n{BANNER_FIXED_TEMPLATE}\n"
        f"<<<TYPESCRIPT>>>\n{BANNER_FIXED_TYPESCRIPT}\n"
        f"<<<STYLES>>>\n{BANNER_FIXED_STYLES}"
    )
    entries.append((banner_bundle, banner_response))
    write_cassette(cassette_path, entries)
    return cassette_path
