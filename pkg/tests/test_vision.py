"""Vision pipeline: task collection, content-addressed cache, description
normalization and memoization."""

import hashlib

import pytest

from a11yrepair.errors import ValidationError
from a11yrepair.gateway import GatewayMode, LlmGateway, write_cassette
from a11yrepair.model import violation_identity
from a11yrepair.prompts import PromptKind, build_prompt
from a11yrepair.rules import scan_document
from a11yrepair.vision import (
    AltDescription,
    ImageTask,
    TaskStatus,
    VisionResolver,
    collect_image_tasks,
    fetch_to_cache,
    normalize_description,
)

PAGE = (
    '<html lang="en"><head><title>T</title></head><body>'
    '<img id="a" src="img/a.png"><img id="b" src="img/b.png">'
    '<img id="деко" src="d.png" alt="">'
    "</body></html>"
)


class TestCollect:
    def test_one_task_per_image_violation_decorative_excluded(self):
        report = scan_document(PAGE, source="p")
        tasks = collect_image_tasks(report, PAGE, base_url="https://x.test/")
        assert len(tasks) == 2

    def test_relative_url_resolution(self):
        report = scan_document(PAGE, source="p")
        tasks = collect_image_tasks(report, PAGE, base_url="https://x.test/")
        assert {t.source_url for t in tasks} == {
            "https://x.test/img/a.png",
            "https://x.test/img/b.png",
        }

    def test_data_uri_keeps_uri_as_source(self):
        html = ('<html lang="en"><head><title>T</title></head><body>'
                '<img src="data:image/gif;base64,R0lGODlhAQABAAAAACw=">'
                "</body></html>")
        report = scan_document(html, source="p")
        tasks = collect_image_tasks(report, html)
        assert len(tasks) == 1
        assert tasks[0].source_url.startswith("data:")

    def test_cache_key_is_sha256_of_url(self):
        task = ImageTask("https://x.test/a.png", locator=_locator())
        assert task.cache_key == hashlib.sha256(b"https://x.test/a.png").hexdigest()


def _locator():
    from a11yrepair.model import NodeLocator

    return NodeLocator("#a", (("html", 1),), "<img>")


class TestFetch:
    def test_local_file_fetch(self, tmp_path):
        src = tmp_path / "pic.png"
        src.write_bytes(b"\x89PNG\r\n\x1a\nrest")
        task = ImageTask(str(src), locator=_locator())
        fetch_to_cache(task, tmp_path / "cache")
        assert task.status == TaskStatus.CACHED
        assert task.mime == "image/png"
        assert (tmp_path / "cache" / task.cache_key).read_bytes() == src.read_bytes()

    def test_idempotent_no_refetch(self, tmp_path):
        calls = []

        class FakeHttp:
            def get(self, url, timeout):
                calls.append(url)

                class R:
                    status_code = 200
                    content = b"GIF89a123"
                    headers = {"Content-Type": "image/gif"}

                return R()

        task = ImageTask("http://x.test/a.gif", locator=_locator())
        fetch_to_cache(task, tmp_path, http=FakeHttp())
        task2 = ImageTask("http://x.test/a.gif", locator=_locator())
        fetch_to_cache(task2, tmp_path, http=FakeHttp())
        assert calls == ["http://x.test/a.gif"]
        assert task2.status == TaskStatus.CACHED

    def test_http_404_fails_without_raising(self, tmp_path):
        class FakeHttp:
            def get(self, url, timeout):
                class R:
                    status_code = 404
                    content = b""
                    headers = {}

                return R()

        task = ImageTask("http://x.test/missing.png", locator=_locator())
        fetch_to_cache(task, tmp_path, http=FakeHttp())
        assert task.status == TaskStatus.FAILED
        assert "404" in task.failure_reason

    def test_data_uri_decoded_without_network(self, tmp_path, panic_session):
        task = ImageTask(
            "data:image/gif;base64,R0lGODlhAQABAAAAACw=", locator=_locator()
        )
        fetch_to_cache(task, tmp_path, http=panic_session)
        assert task.status == TaskStatus.CACHED
        assert (tmp_path / task.cache_key).read_bytes().startswith(b"GIF89a")

    def test_status_never_moves_backwards(self):
        task = ImageTask("x", locator=_locator())
        task.advance(TaskStatus.FAILED, "boom")
        with pytest.raises(ValidationError):
            task.advance(TaskStatus.CACHED)


class TestNormalization:
    def test_quotes_and_whitespace_stripped(self):
        assert normalize_description('  "Logo"  ') == "Logo"

    def test_sentence_boundary_truncation(self):
        text = ("A bike. " * 40) + "Tail without period"
        out = normalize_description(text)
        assert len(out) <= 250
        assert out.endswith(".")

    def test_word_boundary_fallback(self):
        out = normalize_description("x" * 100 + " " + "y" * 300)
        assert len(out) <= 250

    def test_invariants_enforced(self):
        with pytest.raises(ValidationError):
            AltDescription("", "m")
        with pytest.raises(ValidationError):
            AltDescription("image of a bike", "m")
        with pytest.raises(ValidationError):
            AltDescription("Picture of a cat", "m")
        with pytest.raises(ValidationError):
            AltDescription("x" * 251, "m")


class TestDescribe:
    def _cached_task(self, tmp_path, data=b"\x89PNG\r\n\x1a\nimg"):
        src = tmp_path / "img.png"
        src.write_bytes(data)
        task = ImageTask(str(src), locator=_locator())
        fetch_to_cache(task, tmp_path / "cache")
        return task

    def _gateway_for(self, tmp_path, task, response):
        bundle = build_prompt(
            PromptKind.VISION, images=(("image", task.path.read_bytes()),)
        )
        cassette = tmp_path / "v.jsonl"
        write_cassette(cassette, [(bundle, response)])
        return LlmGateway(GatewayMode.REPLAY, cassette_path=cassette)

    def test_replayed_description(self, tmp_path):
        task = self._cached_task(tmp_path)
        gw = self._gateway_for(
            tmp_path, task, "A red bicycle leaning against a brick wall."
        )
        resolver = VisionResolver(gw, cache_dir=tmp_path / "cache")
        desc = resolver.describe_image(task)
        assert desc.text == "A red bicycle leaning against a brick wall."
        assert task.status == TaskStatus.DESCRIBED

    def test_memoized_single_call(self, tmp_path):
        task = self._cached_task(tmp_path)
        gw = self._gateway_for(tmp_path, task, "A bike.")
        calls = []
        original = gw.complete

        def counting(bundle):
            calls.append(1)
            return original(bundle)

        gw.complete = counting
        resolver = VisionResolver(gw, cache_dir=tmp_path / "cache")
        twin = ImageTask(task.source_url, locator=_locator())
        fetch_to_cache(twin, tmp_path / "cache")
        assert resolver.describe_image(task).text == "A bike."
        assert resolver.describe_image(twin).text == "A bike."
        assert len(calls) == 1

    def test_disk_cache_survives_new_resolver(self, tmp_path):
        task = self._cached_task(tmp_path)
        gw = self._gateway_for(tmp_path, task, "A bike.")
        VisionResolver(gw, cache_dir=tmp_path / "cache").describe_image(task)
        # Fresh resolver with a panicking gateway: description must come from
        # the on-disk text cache.
        hermetic = LlmGateway(
            GatewayMode.REPLAY, cassette_path=tmp_path / "empty.jsonl"
        )
        resolver = VisionResolver(hermetic, cache_dir=tmp_path / "cache")
        twin = ImageTask(task.source_url, locator=_locator())
        fetch_to_cache(twin, tmp_path / "cache")
        assert resolver.describe_image(twin).text == "A bike."

    def test_invalid_description_fails_task(self, tmp_path):
        task = self._cached_task(tmp_path)
        gw = self._gateway_for(tmp_path, task, "image of something")
        resolver = VisionResolver(gw, cache_dir=tmp_path / "cache")
        assert resolver.describe_image(task) is None
        assert task.status == TaskStatus.FAILED

    def test_alt_store_wiring(self, tmp_path):
        page_dir = tmp_path / "site"
        page_dir.mkdir()
        (page_dir / "a.png").write_bytes(b"\x89PNG\r\n\x1a\nAAA")
        html = ('<html lang="en"><head><title>T</title></head><body>'
                '<img id="only" src="a.png"></body></html>')
        report = scan_document(html, source="p")
        tasks = collect_image_tasks(report, html, base_url=str(page_dir) + "/")
        gw = self._gateway_for_bytes(
            tmp_path, (page_dir / "a.png").read_bytes(), "A tiny test image."
        )
        resolver = VisionResolver(gw, cache_dir=tmp_path / "cache")
        described = resolver.resolve_all(tasks)
        assert [t.status for t in tasks] == [TaskStatus.DESCRIBED]
        key = violation_identity(report.violations[0])
        by_selector = {t.locator.css_selector: t.cache_key for t in tasks}
        assert described[by_selector["#only"]].text == "A tiny test image."
        assert key  # identity stays computable for the patcher hand-off

    def _gateway_for_bytes(self, tmp_path, data, response):
        bundle = build_prompt(PromptKind.VISION, images=(("image", data),))
        cassette = tmp_path / "vb.jsonl"
        write_cassette(cassette, [(bundle, response)])
        return LlmGateway(GatewayMode.REPLAY, cassette_path=cassette)


class TestViewportShotCache:
    def test_shot_cached_per_url_and_viewport(self, tmp_path):
        from a11yrepair.vision import cache_viewport_shot, shot_cache_key

        a = cache_viewport_shot("http://x.test/p", "mobile", b"PNG-A", tmp_path)
        b = cache_viewport_shot("http://x.test/p", "desktop", b"PNG-B", tmp_path)
        assert a != b
        assert a.read_bytes() == b"PNG-A"
        assert shot_cache_key("http://x.test/p", "mobile") in a.name
        # Re-capture overwrites in place: same key, same file.
        again = cache_viewport_shot("http://x.test/p", "mobile", b"PNG-A2", tmp_path)
        assert again == a and a.read_bytes() == b"PNG-A2"
