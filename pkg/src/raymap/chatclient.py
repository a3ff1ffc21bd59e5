"""Minimal chat-completion HTTP client.

Speaks the common chat API wire shape: POST {base_url}/chat/completions with
messages and optional tool declarations, returning either assistant text or
a tool call. Credentials come from an environment variable so they never
land in config files or run metadata. Transient transport failures retry
with exponential backoff.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from typing import Optional

import httpx


class ChatBackendError(RuntimeError):
    """Endpoint unreachable, auth rejected, or response malformed."""


@dataclass(frozen=True)
class ChatEndpointConfig:
    base_url: str
    model: str = "gpt-4o-mini"
    api_key_env: str = "CHAT_API_KEY"
    timeout: float = 30.0
    max_retries: int = 3

    @classmethod
    def from_env(cls, base_url: Optional[str] = None,
                 model: Optional[str] = None) -> "ChatEndpointConfig":
        url = base_url or os.environ.get("CHAT_BASE_URL")
        if not url:
            raise ChatBackendError(
                "no chat endpoint configured: pass a base URL or set CHAT_BASE_URL")
        return cls(base_url=url, model=model or os.environ.get(
            "CHAT_MODEL", "gpt-4o-mini"))


@dataclass
class ChatResponse:
    kind: str  # "text" | "tool_call"
    text: Optional[str] = None
    tool_name: Optional[str] = None
    tool_args: Optional[dict] = None
    tool_args_raw: Optional[str] = None
    parse_error: Optional[str] = None


class ChatClient:
    def __init__(self, config: ChatEndpointConfig):
        self.config = config
        self._client = httpx.Client(timeout=config.timeout)

    def close(self):
        self._client.close()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.config.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, body: dict) -> dict:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries):
            try:
                resp = self._client.post(url, json=body, headers=self._headers())
                if resp.status_code >= 500:
                    # server-side hiccup: retry
                    last_error = ChatBackendError(
                        f"server error {resp.status_code}: {resp.text[:200]}")
                elif resp.status_code >= 400:
                    raise ChatBackendError(
                        f"request rejected ({resp.status_code}): {resp.text[:200]}")
                else:
                    return resp.json()
            except ChatBackendError:
                raise
            except (httpx.TransportError, json.JSONDecodeError) as exc:
                last_error = exc
            if attempt < self.config.max_retries - 1:
                time.sleep(2 ** attempt)
        raise ChatBackendError(f"chat endpoint unreachable: {last_error}")

    def complete(self, messages: list[dict],
                 tools: Optional[list[dict]] = None) -> ChatResponse:
        """One chat-completion round trip; parses text or the first tool call."""
        body: dict = {"model": self.config.model, "messages": messages}
        if tools:
            body["tools"] = tools
        doc = self._post(body)
        try:
            message = doc["choices"][0]["message"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ChatBackendError(f"malformed completion response: {exc}") from exc

        calls = message.get("tool_calls")
        if calls:
            fn = calls[0].get("function", {})
            name = fn.get("name", "")
            raw = fn.get("arguments", "")
            content = message.get("content")
            text = str(content) if content else None
            try:
                args = json.loads(raw) if isinstance(raw, str) else dict(raw)
                if not isinstance(args, dict):
                    raise TypeError(f"arguments must be an object, got {type(args)}")
                return ChatResponse(kind="tool_call", text=text, tool_name=name,
                                    tool_args=args, tool_args_raw=str(raw))
            except (json.JSONDecodeError, TypeError) as exc:
                return ChatResponse(kind="tool_call", text=text, tool_name=name,
                                    tool_args=None, tool_args_raw=str(raw),
                                    parse_error=str(exc))
        content = message.get("content")
        if content is None:
            raise ChatBackendError("completion carried neither content nor tool calls")
        return ChatResponse(kind="text", text=str(content))

    def complete_text(self, messages: list[dict]) -> str:
        """Text-only convenience wrapper (no tool declarations)."""
        resp = self.complete(messages)
        if resp.kind != "text":
            raise ChatBackendError("expected a text completion, got a tool call")
        return resp.text
