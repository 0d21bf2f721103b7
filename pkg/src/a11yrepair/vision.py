"""Resolves missing image descriptions: content-addressed download cache plus
multimodal description requests, memoized so each distinct image is described
at most once per run (and, via the on-disk text cache, once ever)."""

from __future__ import annotations

import base64
import hashlib
import logging
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import unquote, urljoin, urlsplit

from . import dom
from .errors import ValidationError
from .gateway import LlmGateway
from .model import AuditReport, NodeLocator, Violation, ViolationKind
from .prompts import PromptKind, build_prompt

log = logging.getLogger(__name__)

DESCRIPTION_MAX_CHARS = 250
_BANNED_PREFIXES = ("image of", "picture of")
DEFAULT_CACHE_DIR = ".a11y-cache/images"
FETCH_TIMEOUT_S = 30.0

_MAGIC = (
    (b"\x89PNG\r\n\x1a\n", "image/png"),
    (b"\xff\xd8\xff", "image/jpeg"),
    (b"GIF87a", "image/gif"),
    (b"GIF89a", "image/gif"),
    (b"RIFF", "image/webp"),
    (b"<svg", "image/svg+xml"),
    (b"<?xml", "image/svg+xml"),
)


class TaskStatus:
    PENDING = "pending"
    CACHED = "cached"
    DESCRIBED = "described"
    FAILED = "failed"

    _ORDER = {PENDING: 0, CACHED: 1, DESCRIBED: 2, FAILED: 3}


@dataclass
class ImageTask:
    source_url: str
    locator: NodeLocator
    cache_key: str = ""
    status: str = TaskStatus.PENDING
    failure_reason: str | None = None
    mime: str | None = None
    path: Path | None = None

    def __post_init__(self):
        if not self.cache_key:
            self.cache_key = hashlib.sha256(
                self.source_url.encode("utf-8")
            ).hexdigest()

    def advance(self, status: str, reason: str | None = None) -> None:
        # Status only moves forward; a failed task never resurrects.
        if TaskStatus._ORDER[status] < TaskStatus._ORDER[self.status]:
            raise ValidationError(
                f"status may not move backwards ({self.status} -> {status})"
            )
        self.status = status
        if reason:
            self.failure_reason = reason


@dataclass(frozen=True)
class AltDescription:
    text: str
    model_id: str
    created_at: datetime = field(
        default_factory=lambda: datetime.now(timezone.utc)
    )

    def __post_init__(self):
        if not self.text:
            raise ValidationError("description text must be non-empty")
        if len(self.text) > DESCRIPTION_MAX_CHARS:
            raise ValidationError(
                f"description exceeds {DESCRIPTION_MAX_CHARS} characters"
            )
        lowered = self.text.lower()
        if any(lowered.startswith(p) for p in _BANNED_PREFIXES):
            raise ValidationError("description starts with a banned prefix")


def normalize_description(text: str) -> str:
    """Trim, strip one layer of matching quotes, truncate at a sentence
    boundary within the 250-char cap."""
    text = text.strip()
    for quote in ('"', "'"):
        if len(text) >= 2 and text.startswith(quote) and text.endswith(quote):
            text = text[1:-1].strip()
            break
    if len(text) > DESCRIPTION_MAX_CHARS:
        cut = text[:DESCRIPTION_MAX_CHARS]
        boundary = max(cut.rfind("."), cut.rfind("!"), cut.rfind("?"))
        if boundary > 0:
            cut = cut[: boundary + 1]
        else:
            space = cut.rfind(" ")
            if space > 0:
                cut = cut[:space]
        text = cut.strip()
    return text


def collect_image_tasks(
    report: AuditReport,
    document,
    base_url: str | None = None,
) -> list[ImageTask]:
    """One task per 1.1.1 image violation; decorative images are excluded and
    relative sources resolved against the base."""
    doc = dom.parse_document(document) if isinstance(document, str) else document
    tasks: list[ImageTask] = []
    for v in report.violations:
        if v.kind is not ViolationKind.IMAGE_ALT:
            continue
        el = dom.resolve_locator(doc, v.locator)
        if el is None:
            log.warning("image task skipped: locator %s no longer resolves",
                        v.locator.css_selector)
            continue
        if el.get("role") in ("presentation", "none") or el.get("alt") == "":
            continue
        src = (el.get("src") or "").strip()
        if not src:
            log.info("image task skipped: <img> at %s has no static src",
                     v.locator.css_selector)
            continue
        if src.startswith("data:"):
            source_url = src
        else:
            source_url = urljoin(base_url or "", src) if base_url else src
        tasks.append(ImageTask(source_url=source_url, locator=v.locator))
    return tasks


def _sniff_mime(data: bytes, fallback: str | None = None) -> str:
    head = data[:64].lstrip()
    for magic, mime in _MAGIC:
        if data.startswith(magic) or head.startswith(magic):
            return mime
    return fallback or "application/octet-stream"


def _read_data_uri(uri: str) -> tuple[bytes, str | None]:
    header, _, payload = uri.partition(",")
    mime = header[5:].split(";")[0] or None
    if ";base64" in header:
        return base64.b64decode(payload), mime
    return unquote(payload).encode("utf-8"), mime


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fetch_to_cache(
    task: ImageTask,
    cache_dir: str | Path,
    http=None,
    timeout_s: float = FETCH_TIMEOUT_S,
) -> ImageTask:
    """Store the image bytes at cache_dir/<cache_key>. Idempotent: an existing
    file short-circuits without touching the network."""
    cache_dir = Path(cache_dir)
    target = cache_dir / task.cache_key
    task.path = target
    if target.exists():
        task.mime = _sniff_mime(target.read_bytes())
        task.advance(TaskStatus.CACHED)
        return task
    try:
        data: bytes
        header_mime = None
        if task.source_url.startswith("data:"):
            data, header_mime = _read_data_uri(task.source_url)
        elif task.source_url.startswith("file://"):
            data = Path(unquote(urlsplit(task.source_url).path)).read_bytes()
        elif task.source_url.startswith(("http://", "https://")):
            if http is None:
                import requests

                http = requests
            resp = http.get(task.source_url, timeout=timeout_s)
            if resp.status_code != 200:
                task.advance(TaskStatus.FAILED, f"http {resp.status_code}")
                return task
            data = resp.content
            header_mime = resp.headers.get("Content-Type", "").split(";")[0] or None
        else:
            data = Path(task.source_url).read_bytes()
    except Exception as exc:  # noqa: BLE001 — a failed fetch never aborts the run
        task.advance(TaskStatus.FAILED, f"fetch error: {exc}")
        return task
    _atomic_write(target, data)
    task.mime = _sniff_mime(data, header_mime)
    task.advance(TaskStatus.CACHED)
    return task


def shot_cache_key(page_url: str, viewport_name: str) -> str:
    return hashlib.sha256(
        f"{page_url}\x1f{viewport_name}".encode("utf-8")
    ).hexdigest()


def cache_viewport_shot(
    page_url: str, viewport_name: str, png: bytes, cache_dir: str | Path
) -> Path:
    """Screenshots share the content-addressed scheme, keyed per
    (page URL, viewport); re-captures overwrite in place."""
    target = Path(cache_dir) / f"{shot_cache_key(page_url, viewport_name)}.png"
    _atomic_write(target, png)
    return target


class VisionResolver:
    """Per-run describe pipeline: memoizes by cache_key in memory and persists
    descriptions next to the image bytes as <cache_key>.txt."""

    def __init__(
        self,
        gateway: LlmGateway,
        cache_dir: str | Path = DEFAULT_CACHE_DIR,
        fetch_timeout_s: float = FETCH_TIMEOUT_S,
    ):
        self.gateway = gateway
        self.cache_dir = Path(cache_dir)
        self.fetch_timeout_s = fetch_timeout_s
        self._memo: dict[str, AltDescription] = {}

    def describe_image(self, task: ImageTask) -> AltDescription | None:
        if task.cache_key in self._memo:
            task.advance(TaskStatus.DESCRIBED)
            return self._memo[task.cache_key]
        text_path = self.cache_dir / f"{task.cache_key}.txt"
        if text_path.exists():
            cached = text_path.read_text(encoding="utf-8").strip()
            if cached:
                desc = AltDescription(text=cached, model_id=self.gateway.model_id)
                self._memo[task.cache_key] = desc
                task.advance(TaskStatus.DESCRIBED)
                return desc
        if task.status != TaskStatus.CACHED or task.path is None:
            task.advance(TaskStatus.FAILED, "image not cached before describe")
            return None

        image_bytes = task.path.read_bytes()
        bundle = build_prompt(
            PromptKind.VISION, images=(("image", image_bytes),)
        )
        desc = None
        for attempt in range(2):
            try:
                exchange = self.gateway.complete(bundle)
            except Exception as exc:  # GatewayError / CassetteMissError
                task.advance(TaskStatus.FAILED, f"gateway: {exc}")
                return None
            try:
                desc = AltDescription(
                    text=normalize_description(exchange.response_text),
                    model_id=exchange.model_id,
                )
                break
            except ValidationError as exc:
                log.warning("description rejected (attempt %d): %s", attempt + 1, exc)
                desc = None
        if desc is None:
            task.advance(TaskStatus.FAILED, "description failed validation twice")
            return None
        _atomic_write(text_path, desc.text.encode("utf-8"))
        self._memo[task.cache_key] = desc
        task.advance(TaskStatus.DESCRIBED)
        return desc

    def resolve_all(self, tasks, http=None) -> dict[str, AltDescription]:
        """Fetch + describe every task; returns cache_key -> description."""
        done: dict[str, AltDescription] = {}
        for task in tasks:
            if task.status == TaskStatus.PENDING:
                fetch_to_cache(
                    task, self.cache_dir, http=http, timeout_s=self.fetch_timeout_s
                )
            if task.status != TaskStatus.CACHED and task.cache_key not in self._memo:
                continue
            desc = self.describe_image(task)
            if desc is not None:
                done[task.cache_key] = desc
        return done
