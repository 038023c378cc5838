"""LLM provider ports: a scripted mock and an OpenAI-style HTTP client."""

from __future__ import annotations

import json
import logging
import os
import threading
from pathlib import Path
from typing import Sequence

import httpx

logger = logging.getLogger(__name__)

Message = tuple[str, str]


class TransportError(RuntimeError):
    """The provider could not produce a completion."""


class LlmPort:
    """Chat-completion port.

    Subclasses implement :meth:`complete`.  :meth:`reset` is called at the
    start of each independent simulation run; stateless providers ignore it.
    """

    def complete(self, model_id: str, messages: Sequence[Message], temperature: float = 0.0) -> str:
        raise NotImplementedError

    def reset(self) -> None:
        pass


class ScriptedLlm(LlmPort):
    """Returns canned completions in order, ignoring the prompt.

    Every call is recorded in :attr:`calls` so tests can assert on the
    prompts the agent produced.
    """

    def __init__(self, completions: Sequence[str]):
        self.completions = list(completions)
        self.calls: list[list[Message]] = []
        self._cursor = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedLlm:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(data, dict):
            data = data.get("completions")
        if not isinstance(data, list) or not all(isinstance(c, str) for c in data):
            raise ValueError(f"{path}: scripted fixture must be a JSON list of strings")
        return cls(data)

    def complete(self, model_id: str, messages: Sequence[Message], temperature: float = 0.0) -> str:
        with self._lock:
            self.calls.append([tuple(m) for m in messages])
            if self._cursor >= len(self.completions):
                raise TransportError(f"scripted provider exhausted after {len(self.completions)} completions")
            out = self.completions[self._cursor]
            self._cursor += 1
            return out

    def reset(self) -> None:
        with self._lock:
            self._cursor = 0
            self.calls.clear()

    @property
    def remaining(self) -> int:
        return len(self.completions) - self._cursor


class HttpLlm(LlmPort):
    """Client for an OpenAI-compatible ``/chat/completions`` endpoint."""

    def __init__(
        self,
        endpoint: str,
        model: str | None = None,
        auth_env: str | None = None,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.auth_env = auth_env
        self._client = client or httpx.Client(timeout=timeout)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_env:
            key = os.environ.get(self.auth_env)
            if not key:
                raise TransportError(f"environment variable {self.auth_env} is not set")
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, model_id: str, messages: Sequence[Message], temperature: float = 0.0) -> str:
        body = {
            "model": self.model or model_id,
            "messages": [{"role": role, "content": text} for role, text in messages],
            "temperature": temperature,
        }
        try:
            resp = self._client.post(self.endpoint, json=body, headers=self._headers())
            resp.raise_for_status()
            data = resp.json()
            return data["choices"][0]["message"]["content"]
        except httpx.HTTPError as exc:
            raise TransportError(f"request to {self.endpoint} failed: {exc}") from exc
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed completion response from {self.endpoint}: {exc}") from exc
