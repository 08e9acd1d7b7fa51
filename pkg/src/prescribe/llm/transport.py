"""Chat-completion transports: live HTTP, recording, replay, and a
rule-engine-backed mock.

Everything above the transport sees one interface: ``complete(payload)
-> response text``. The recording transport captures (fingerprint,
response) pairs into an append-only JSON-lines file; the replay
transport serves them back so batches rerun offline and byte-stable.
The mock answers from this package's own rule engine, which makes
end-to-end tests meaningful without any network, and deliberately
mis-states the aggression level on a deterministic subset of units so
the local level-mapping authority is observable.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from pathlib import Path
from typing import Callable, Protocol

from prescribe.aggression import analyze
from prescribe.core import verdict
from prescribe.intent import classify_di
from prescribe.lexicon import Lexicon
from prescribe.llm.templates import fingerprint
from prescribe.text import TextUnit


class TransportError(Exception):
    """Request failed; retryable at the batch driver's discretion."""


class Transport(Protocol):  # pragma: no cover - structural type
    name: str

    def complete(self, payload: dict) -> str: ...


API_KEY_ENV = "PRESCRIBE_LLM_API_KEY"


class LiveTransport:
    """HTTPS chat-completion endpoint speaking the usual JSON chat shape."""

    name = "live"

    def __init__(self, base_url: str, api_key: str | None = None, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self.timeout = timeout
        if not self.api_key:
            raise TransportError(
                f"no API key: set {API_KEY_ENV} or pass api_key explicitly"
            )

    def complete(self, payload: dict) -> str:
        import httpx

        body = {k: v for k, v in payload.items() if k != "metadata"}
        try:
            response = httpx.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            response.raise_for_status()
            data = response.json()
            return data["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise TransportError(f"chat endpoint failure: {exc}") from exc
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"malformed chat response: {exc}") from exc


class RecordingTransport:
    """Wraps another transport and appends (fingerprint, response) pairs."""

    name = "record"

    def __init__(self, inner: Transport, recording_path: str | Path):
        self.inner = inner
        self.path = Path(recording_path)
        self._lock = threading.Lock()

    def complete(self, payload: dict) -> str:
        response = self.inner.complete(payload)
        line = json.dumps(
            {"fingerprint": fingerprint(payload), "response": response},
            sort_keys=True,
            ensure_ascii=False,
        )
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        return response


class ReplayTransport:
    """Serves previously recorded responses; unknown requests fail."""

    name = "replay"

    def __init__(self, recording_path: str | Path):
        self.path = Path(recording_path)
        if not self.path.exists():
            raise TransportError(f"recording file not found: {self.path}")
        self._responses: dict[str, str] = {}
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    entry = json.loads(line)
                    self._responses[entry["fingerprint"]] = entry["response"]

    def complete(self, payload: dict) -> str:
        key = fingerprint(payload)
        try:
            return self._responses[key]
        except KeyError:
            raise TransportError(f"no recorded response for fingerprint {key[:16]}") from None


_TARGET_RE = re.compile(r"<<<(.*)>>>", re.DOTALL)


class MockTransport:
    """Deterministic offline transport backed by the rule engine.

    Extracts the target text from the final user message, answers the
    question the prompt kind asks, and on roughly one unit in
    ``wrong_level_every`` claims an incorrect aggression level while
    still reporting the true score. Counts calls for resumption tests.
    """

    name = "mock"

    def __init__(self, lexicon: Lexicon, wrong_level_every: int = 5):
        self.lexicon = lexicon
        self.wrong_level_every = max(1, wrong_level_every)
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, payload: dict) -> str:
        with self._lock:
            self.calls += 1
        last_user = next(
            m["content"] for m in reversed(payload["messages"]) if m["role"] == "user"
        )
        target = _TARGET_RE.search(last_user)
        if target is None:
            raise TransportError("mock transport found no <<<text>>> slot")
        text = target.group(1)
        unit = TextUnit.from_raw("mock", text)
        kind = payload.get("metadata", {}).get("kind", "")
        result = analyze(unit, self.lexicon)
        if kind == "descriptive":
            di = classify_di(unit, result.findings)
            toxic = verdict(di.primary, result.level)
            return f"label: {1 if toxic else 0}"
        if kind == "prescriptive_di":
            di = classify_di(unit, result.findings)
            alts = ", ".join(str(int(a)) for a in sorted(di.alternates))
            return f"DI: {int(di.primary)}\nalternates: [{alts}]"
        if kind == "prescriptive_ag_usage":
            names = sorted({f.category.value for f in result.findings})
            return f"items: [{', '.join(names)}]"
        if kind == "prescriptive_ag_scoring":
            level = int(result.level)
            if self._lies_about(text):
                level = (level + 1) % 3
            return f"score: {result.score}\nlevel: {level}"
        raise TransportError(f"mock transport cannot answer prompt kind {kind!r}")

    def _lies_about(self, text: str) -> bool:
        digest = hashlib.sha256(text.encode("utf-8")).digest()
        return digest[0] % self.wrong_level_every == 0


class RateLimiter:
    """Per-minute request cap via even pacing, with injectable time source.

    Each acquire reserves the next slot on a 60/per_minute-second grid,
    so n requests take about (n-1) * 60/per_minute seconds and no minute
    ever sees more than the cap.
    """

    def __init__(
        self,
        per_minute: int,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if per_minute <= 0:
            raise ValueError("rate limit must be positive")
        self.per_minute = per_minute
        self.interval = 60.0 / per_minute
        self.clock = clock
        self.sleep = sleep
        self._next_slot: float | None = None
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = self.clock()
            slot = now if self._next_slot is None else max(now, self._next_slot)
            self._next_slot = slot + self.interval
            wait = slot - now
        if wait > 0:
            self.sleep(wait)
