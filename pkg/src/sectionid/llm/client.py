"""Chat-completion transport: live HTTP, plus record/replay for offline runs.

The wire format is the common chat shape: POST a JSON body with ``model``,
``messages``, sampling penalties, and ``max_tokens``; the assistant text is
read from ``choices[0].message.content``. Auth is a bearer token taken from
the environment variable named in the config, never from config files.

Every interaction can be recorded to a replay store, one JSON file per
request keyed by a hash of the payload (prompt plus sampling config), so
whole pipelines re-run byte-identically with no endpoint.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

import requests

from ..errors import AuthError, ReplayMiss, TransportError, TruncationWarning
from .prompts import split_prompt

log = logging.getLogger(__name__)

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


@dataclass
class LLMConfig:
    endpoint_url: str = ""
    model_name: str = "gpt-4"
    temperature: float = 0.0
    frequency_penalty: float = 0.0
    presence_penalty: float = 0.0
    max_tokens: int = 1000
    timeout: float = 60.0
    max_retries: int = 3
    max_in_flight: int = 4
    backoff_base: float = 0.5
    api_key_env: str = "SECTIONID_API_TOKEN"
    max_context_chars: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


@dataclass
class ChatResult:
    status: int
    body: dict


class ChatClient(Protocol):
    def send(self, payload: dict) -> ChatResult: ...


def prompt_hash(payload: dict) -> str:
    """Stable key for one interaction: hash of the canonical request body."""
    canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def build_payload(config: LLMConfig, prompt: str) -> dict:
    system, user = split_prompt(prompt)
    messages = []
    if system:
        messages.append({"role": "system", "content": system})
    messages.append({"role": "user", "content": user})
    return {
        "model": config.model_name,
        "messages": messages,
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
        "frequency_penalty": config.frequency_penalty,
        "presence_penalty": config.presence_penalty,
    }


class HTTPChatClient:
    """Live transport over ``requests``; one POST per send, no retries here."""

    def __init__(self, config: LLMConfig):
        self.config = config

    def send(self, payload: dict) -> ChatResult:
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.config.api_key_env, "")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        try:
            response = requests.post(
                self.config.endpoint_url,
                json=payload,
                headers=headers,
                timeout=self.config.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        try:
            body = response.json()
        except ValueError:
            body = {"raw": response.text}
        return ChatResult(status=response.status_code, body=body)


class ReplayClient:
    """Serve recorded responses from a directory of ``<hash>.json`` files."""

    def __init__(self, store_dir: str | Path):
        self.store_dir = Path(store_dir)

    def send(self, payload: dict) -> ChatResult:
        key = prompt_hash(payload)
        path = self.store_dir / f"{key}.json"
        if not path.exists():
            raise ReplayMiss(f"no recorded interaction {key} in {self.store_dir}")
        with open(path, encoding="utf-8") as fh:
            record = json.load(fh)
        return ChatResult(
            status=200,
            body={
                "choices": [
                    {
                        "message": {"content": record["response_content"]},
                        "finish_reason": "stop",
                    }
                ]
            },
        )


class RecordingClient:
    """Wrap another client and persist each successful interaction."""

    def __init__(self, inner: ChatClient, store_dir: str | Path):
        self.inner = inner
        self.store_dir = Path(store_dir)
        self.store_dir.mkdir(parents=True, exist_ok=True)

    def send(self, payload: dict) -> ChatResult:
        result = self.inner.send(payload)
        if result.status == 200:
            content = _content_of(result.body)
            if content is not None:
                key = prompt_hash(payload)
                record = {
                    "prompt_hash": key,
                    "request": payload,
                    "response_content": content,
                }
                with open(self.store_dir / f"{key}.json", "w", encoding="utf-8") as fh:
                    json.dump(record, fh, indent=2, sort_keys=True, ensure_ascii=False)
                    fh.write("\n")
        return result


def _content_of(body: dict) -> str | None:
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError):
        return None
    return content if isinstance(content, str) else None


def _finish_reason(body: dict) -> str | None:
    try:
        reason = body["choices"][0].get("finish_reason")
    except (KeyError, IndexError, TypeError, AttributeError):
        return None
    return reason


def complete(config: LLMConfig, prompt: str, client: ChatClient) -> str:
    """One chat round trip with exponential backoff on transient failures.

    Retries transport errors, 429, and 5xx up to ``max_retries`` extra
    attempts; 401/403 raise AuthError immediately. A response that stopped
    at the token limit triggers a TruncationWarning but is still returned.
    """
    payload = build_payload(config, prompt)
    last_error: str = "no attempt made"
    for attempt in range(config.max_retries + 1):
        if attempt > 0:
            delay = config.backoff_base * (2 ** (attempt - 1))
            if delay > 0:
                time.sleep(delay)
        try:
            result = client.send(payload)
        except TransportError as exc:
            last_error = str(exc)
            log.warning("attempt %d transport failure: %s", attempt + 1, exc)
            continue
        if result.status in (401, 403):
            raise AuthError(f"endpoint rejected credentials (HTTP {result.status})")
        if result.status in RETRYABLE_STATUS:
            last_error = f"HTTP {result.status}"
            log.warning("attempt %d got retryable HTTP %d", attempt + 1, result.status)
            continue
        if result.status != 200:
            raise TransportError(f"HTTP {result.status}: {str(result.body)[:200]}")
        content = _content_of(result.body)
        if content is None:
            raise TransportError("response body has no choices[0].message.content")
        if _finish_reason(result.body) == "length":
            warnings.warn(
                TruncationWarning(f"response hit the {config.max_tokens}-token limit")
            )
        return content
    raise TransportError(f"gave up after {config.max_retries + 1} attempts: {last_error}")
