"""Provider-agnostic completion client with retries, rate limiting and a
record/replay cassette store.

Replay mode performs zero network operations: the HTTP session is created
lazily and only on the live path, so tests can also inject a session that
raises on any use. Cassettes are line-delimited JSON keyed by a digest over
(kind, system text, user text, ordered image digests).
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import CassetteMissError, ConfigError, GatewayError
from .prompts import PromptBundle, PromptKind

DEFAULT_MODEL = "gpt-4o"
DEFAULT_TIMEOUT_S = 120.0
RETRY_DELAYS_S = (1.0, 4.0, 16.0)
_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class GatewayMode(Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


@dataclass(frozen=True)
class LlmExchange:
    request_digest: str
    kind: PromptKind
    response_text: str
    model_id: str
    latency_ms: int
    mode: str  # "live" | "replay"


def cassette_key(bundle: PromptBundle) -> str:
    """Stable across processes and platforms; every byte of the prompt and
    every image byte is significant."""
    h = hashlib.sha256()
    h.update(bundle.kind.value.encode("utf-8"))
    h.update(b"\x1f")
    h.update(bundle.system_text.encode("utf-8"))
    h.update(b"\x1f")
    h.update(bundle.user_text.encode("utf-8"))
    for _label, data in bundle.images:
        h.update(b"\x1f")
        h.update(hashlib.sha256(data).hexdigest().encode("ascii"))
    return h.hexdigest()


class Cassette:
    """Append-only JSONL store: one {request_digest, response_text, ...}
    object per line. Last entry for a digest wins on load."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()

    def load(self) -> dict[str, dict]:
        entries: dict[str, dict] = {}
        if not self.path.exists():
            return entries
        with self.path.open("r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                entries[entry["request_digest"]] = entry
        return entries

    def append(self, entry: dict) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")


def write_cassette(path: str | Path, entries) -> None:
    """Authoring helper: entries are (bundle, response_text[, model_id])."""
    cassette = Cassette(path)
    for item in entries:
        bundle, response_text = item[0], item[1]
        model_id = item[2] if len(item) > 2 else DEFAULT_MODEL
        cassette.append(
            {
                "request_digest": cassette_key(bundle),
                "kind": bundle.kind.value,
                "model_id": model_id,
                "temperature": 0,
                "response_text": response_text,
            }
        )


class TokenBucket:
    """Classic token bucket: `rate` tokens per second up to `capacity`;
    take() blocks (via the injected sleep) until a token is available."""

    def __init__(self, rate: float, capacity: float, sleep=time.sleep, clock=time.monotonic):
        self.rate = rate
        self.capacity = capacity
        self._tokens = capacity
        self._updated = clock()
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()

    def take(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(
                    self.capacity, self._tokens + (now - self._updated) * self.rate
                )
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


class LlmGateway:
    def __init__(
        self,
        mode: GatewayMode | str = GatewayMode.REPLAY,
        endpoint: str = "https://api.openai.com/v1",
        model_id: str = DEFAULT_MODEL,
        cassette_path: str | Path | None = None,
        api_key: str | None = None,
        session=None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        max_inflight: int = 4,
        requests_per_second: float = 0.0,
        sleep=time.sleep,
    ):
        self.mode = GatewayMode(mode) if isinstance(mode, str) else mode
        self.endpoint = endpoint.rstrip("/")
        self.model_id = model_id
        self.timeout_s = timeout_s
        self._api_key = api_key
        self._session = session
        self._sleep = sleep
        self._inflight = threading.Semaphore(max_inflight)
        self._bucket = (
            TokenBucket(requests_per_second, max(1.0, requests_per_second), sleep=sleep)
            if requests_per_second > 0
            else None
        )
        if self.mode in (GatewayMode.REPLAY, GatewayMode.RECORD):
            if cassette_path is None:
                raise ConfigError(f"{self.mode.value} mode requires a cassette path")
        self.cassette = Cassette(cassette_path) if cassette_path else None
        self._replay_entries: dict[str, dict] | None = None

    # -- replay ------------------------------------------------------------

    def _lookup(self, digest: str) -> dict:
        if self._replay_entries is None:
            self._replay_entries = self.cassette.load()
        entry = self._replay_entries.get(digest)
        if entry is None:
            raise CassetteMissError(digest)
        return entry

    # -- live --------------------------------------------------------------

    def _http(self):
        if self._session is None:
            import requests

            self._session = requests.Session()
        return self._session

    def _payload(self, bundle: PromptBundle) -> dict:
        messages = []
        if bundle.system_text:
            messages.append({"role": "system", "content": bundle.system_text})
        if bundle.images:
            content: list[dict] = [{"type": "text", "text": bundle.user_text}]
            for _label, data in bundle.images:
                b64 = base64.b64encode(data).decode("ascii")
                content.append(
                    {
                        "type": "image_url",
                        "image_url": {"url": f"data:image/png;base64,{b64}"},
                    }
                )
            messages.append({"role": "user", "content": content})
        else:
            messages.append({"role": "user", "content": bundle.user_text})
        return {"model": self.model_id, "temperature": 0, "messages": messages}

    def _pace(self) -> None:
        if self._bucket is not None:
            self._bucket.take()

    def _post_with_retries(self, payload: dict) -> str:
        import requests

        url = f"{self.endpoint}/chat/completions"
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        last_error = None
        for attempt in range(len(RETRY_DELAYS_S) + 1):
            if attempt > 0:
                self._sleep(RETRY_DELAYS_S[attempt - 1])
            try:
                self._pace()
                resp = self._http().post(
                    url, json=payload, headers=headers, timeout=self.timeout_s
                )
            except requests.exceptions.RequestException as exc:
                last_error = f"transport error: {exc}"
                continue
            if resp.status_code in _RETRYABLE_STATUS:
                last_error = f"http {resp.status_code}"
                continue
            if resp.status_code != 200:
                raise GatewayError(f"http {resp.status_code}: {resp.text[:500]}")
            try:
                body = resp.json()
                text = body["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise GatewayError(f"malformed completion response: {exc}")
            if not text:
                raise GatewayError("empty completion response")
            return text
        raise GatewayError(f"gave up after retries: {last_error}")

    # -- public ------------------------------------------------------------

    def complete(self, bundle: PromptBundle) -> LlmExchange:
        digest = cassette_key(bundle)
        if self.mode is GatewayMode.REPLAY:
            entry = self._lookup(digest)
            return LlmExchange(
                request_digest=digest,
                kind=bundle.kind,
                response_text=entry["response_text"],
                model_id=entry.get("model_id", self.model_id),
                latency_ms=0,
                mode="replay",
            )
        with self._inflight:
            started = time.monotonic()
            text = self._post_with_retries(self._payload(bundle))
            latency_ms = int((time.monotonic() - started) * 1000)
        if self.mode is GatewayMode.RECORD:
            self.cassette.append(
                {
                    "request_digest": digest,
                    "kind": bundle.kind.value,
                    "model_id": self.model_id,
                    "temperature": 0,
                    "response_text": text,
                }
            )
        return LlmExchange(
            request_digest=digest,
            kind=bundle.kind,
            response_text=text,
            model_id=self.model_id,
            latency_ms=latency_ms,
            mode="live",
        )
