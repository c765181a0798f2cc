"""Provider-agnostic chat-completion client with retry, rate limiting, and a
record/replay transport.

Fixtures live at ``fixture_dir/<request_key>.json`` and hold both the request
metadata and the stored response, so replay mode needs zero network access.
API keys come from ``EA_API_KEY_<PROVIDER>`` environment variables.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests


class GatewayError(Exception):
    """Base class for transport failures."""


class FixtureMissError(GatewayError):
    def __init__(self, key: str):
        super().__init__(f"fixture miss: {key}")
        self.key = key


class RetriesExhaustedError(GatewayError):
    pass


def request_key(model: str, prompt: str, temperature: float) -> str:
    payload = json.dumps(
        {"model": model, "prompt": prompt, "temperature": temperature},
        sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatRequest:
    model: str
    prompt: str
    temperature: float = 0.0
    max_output_tokens: int = 4096

    @property
    def request_key(self) -> str:
        return request_key(self.model, self.prompt, self.temperature)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str = "stop"               # stop | length | error
    usage: dict = field(default_factory=dict)


class TokenBucket:
    """Process-global requests-per-minute limiter."""

    def __init__(self, rpm: int):
        self.interval = 60.0 / rpm
        self._lock = threading.Lock()
        self._next_at = 0.0

    def acquire(self):
        with self._lock:
            now = time.monotonic()
            wait = self._next_at - now
            self._next_at = max(now, self._next_at) + self.interval
        if wait > 0:
            time.sleep(wait)


@dataclass
class Transport:
    mode: str = "replay"                      # live | record | replay
    endpoint: str = ""
    fixture_dir: Path | None = None
    provider: str = "openai"
    max_retries: int = 3
    backoff_base: float = 0.5
    rpm: int | None = None
    timeout: float = 120.0
    _limiter: TokenBucket | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.mode not in ("live", "record", "replay"):
            raise GatewayError(f"unknown transport mode {self.mode!r}")
        if self.mode in ("record", "replay") and self.fixture_dir is None:
            raise GatewayError(f"{self.mode} mode requires fixture_dir")
        if self.fixture_dir is not None:
            self.fixture_dir = Path(self.fixture_dir)
        if self.rpm:
            self._limiter = TokenBucket(self.rpm)

    def _fixture_path(self, key: str) -> Path:
        return self.fixture_dir / f"{key}.json"

    def api_key(self) -> str | None:
        return os.environ.get(f"EA_API_KEY_{self.provider.upper()}")


def _http_complete(req: ChatRequest, transport: Transport) -> ChatResponse:
    """Single chat-completion wire schema: a messages list with one user turn."""
    body = {
        "model": req.model,
        "messages": [{"role": "user", "content": req.prompt}],
        "temperature": req.temperature,
        "max_tokens": req.max_output_tokens,
    }
    headers = {"Content-Type": "application/json"}
    key = transport.api_key()
    if key:
        headers["Authorization"] = f"Bearer {key}"

    last_err = None
    for attempt in range(transport.max_retries + 1):
        if transport._limiter:
            transport._limiter.acquire()
        try:
            resp = requests.post(transport.endpoint, json=body,
                                 headers=headers, timeout=transport.timeout)
        except requests.RequestException as e:
            last_err = str(e)
        else:
            if resp.status_code == 200:
                data = resp.json()
                choice = data["choices"][0]
                resp_obj = ChatResponse(
                    text=choice["message"]["content"],
                    finish_reason=choice.get("finish_reason", "stop"),
                    usage=data.get("usage", {}),
                )
                resp_obj.usage["retries"] = attempt
                return resp_obj
            if resp.status_code in (401, 403):
                raise GatewayError(f"auth error {resp.status_code}: {resp.text}")
            if resp.status_code == 429 or resp.status_code >= 500:
                last_err = f"HTTP {resp.status_code}: {resp.text[:200]}"
            else:
                raise GatewayError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if attempt < transport.max_retries:
            time.sleep(transport.backoff_base * (2 ** attempt))
    raise RetriesExhaustedError(
        f"retries exhausted after {transport.max_retries + 1} attempts: {last_err}")


def complete(req: ChatRequest, transport: Transport) -> ChatResponse:
    key = req.request_key

    if transport.mode == "replay":
        path = transport._fixture_path(key)
        if not path.is_file():
            raise FixtureMissError(key)
        stored = json.loads(path.read_text(encoding="utf-8"))["response"]
        return ChatResponse(text=stored["text"],
                            finish_reason=stored.get("finish_reason", "stop"),
                            usage=stored.get("usage", {}))

    response = _http_complete(req, transport)

    if transport.mode == "record":
        transport.fixture_dir.mkdir(parents=True, exist_ok=True)
        record = {
            "request": {"model": req.model, "prompt": req.prompt,
                        "temperature": req.temperature,
                        "max_output_tokens": req.max_output_tokens,
                        "request_key": key},
            "response": {"text": response.text,
                         "finish_reason": response.finish_reason,
                         "usage": response.usage},
        }
        write_fixture(transport.fixture_dir, record)
    return response


def write_fixture(fixture_dir: Path, record: dict) -> Path:
    """Persist a request/response pair under its request_key (atomic write)."""
    fixture_dir = Path(fixture_dir)
    fixture_dir.mkdir(parents=True, exist_ok=True)
    path = fixture_dir / f"{record['request']['request_key']}.json"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(record, indent=2, ensure_ascii=False), encoding="utf-8")
    tmp.replace(path)
    return path
