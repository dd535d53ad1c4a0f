"""Embedding and chat providers.

The remote providers speak a JSON-over-HTTP API (OpenAI-compatible paths)
with credentials from the environment. The local embedding provider and the
scripted chat provider are the test defaults: fully deterministic, no
network.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
import time
from collections import deque

import numpy as np
import requests

from .errors import EmptyText, LlmUnavailable, ProviderUnavailable, UnmatchedPrompt
from .prompts import render_messages

EMBED_KEY_ENV = "QA_EMBED_API_KEY"
CHAT_KEY_ENV = "QA_CHAT_API_KEY"

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


class EmbeddingProvider:
    """Contract: ``name``, ``dimension``, and batch embedding."""

    name: str
    dimension: int

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        raise NotImplementedError

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]


class LocalEmbeddingProvider(EmbeddingProvider):
    """Deterministic hashed bag-of-words embedding.

    Tokens are hashed (blake2b, stable across processes) to a slot and a
    sign, counts accumulate, and the vector is L2-normalized. Crude, but
    token overlap maps to cosine similarity, which is all the tests and
    offline runs need.
    """

    def __init__(self, dimension: int = 256):
        self.dimension = int(dimension)
        self.name = f"local-hash-{self.dimension}"

    def _slot(self, token: str) -> tuple[int, float]:
        h = int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little")
        return h % self.dimension, 1.0 if (h >> 63) & 1 == 0 else -1.0

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise EmptyText("cannot embed empty text")
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in _TOKEN_RE.findall(text.lower()):
            slot, sign = self._slot(token)
            vec[slot] += sign
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec.astype(np.float32)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


class RemoteEmbeddingProvider(EmbeddingProvider):
    """JSON-over-HTTP embedding endpoint; key from ``QA_EMBED_API_KEY``."""

    def __init__(self, endpoint: str, model: str, dimension: int,
                 api_key: str | None = None, timeout: float = 30.0,
                 retries: int = 3, backoff: float = 0.5):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.dimension = int(dimension)
        self.name = f"remote:{model}"
        self.api_key = api_key if api_key is not None else os.environ.get(EMBED_KEY_ENV, "")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        if any(not t for t in texts):
            raise EmptyText("cannot embed empty text")
        payload = {"model": self.model, "input": texts}
        data = _post_with_retries(
            f"{self.endpoint}/embeddings", payload, self.api_key,
            self.timeout, self.retries, self.backoff, ProviderUnavailable,
        )
        vectors = [np.asarray(item["embedding"], dtype=np.float32) for item in data["data"]]
        for vec in vectors:
            if vec.shape[0] != self.dimension:
                raise ProviderUnavailable(
                    f"provider returned dimension {vec.shape[0]}, expected {self.dimension}"
                )
        return vectors


class ChatProvider:
    """Contract: ``complete(messages) -> text``."""

    name = "chat"

    def complete(self, messages: list[dict]) -> str:
        raise NotImplementedError


class RemoteChatProvider(ChatProvider):
    """JSON-over-HTTP chat endpoint; key from ``QA_CHAT_API_KEY``."""

    name = "remote-chat"

    def __init__(self, endpoint: str, model: str, api_key: str | None = None,
                 temperature: float = 0.0, timeout: float = 60.0,
                 retries: int = 3, backoff: float = 0.5):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(CHAT_KEY_ENV, "")
        self.temperature = temperature
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def complete(self, messages: list[dict]) -> str:
        payload = {"model": self.model, "messages": messages, "temperature": self.temperature}
        data = _post_with_retries(
            f"{self.endpoint}/chat/completions", payload, self.api_key,
            self.timeout, self.retries, self.backoff, LlmUnavailable,
        )
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise LlmUnavailable(f"malformed chat response: {exc}")


class ScriptedChatProvider(ChatProvider):
    """Ordered response queue keyed by prompt matchers, for tests.

    Each ``complete`` call consumes the head of the queue; the call fails
    with ``UnmatchedPrompt`` if the rendered prompt does not satisfy the
    head's matcher, which keeps test scripts honest about call order.
    A queued Exception instance is raised instead of returned.
    """

    name = "scripted"

    def __init__(self):
        self._queue: deque = deque()
        self._lock = threading.Lock()

    def queue(self, matcher, response) -> "ScriptedChatProvider":
        """``matcher`` is a substring, compiled regex, or predicate over the
        rendered prompt."""
        self._queue.append((matcher, response))
        return self

    @property
    def remaining(self) -> int:
        return len(self._queue)

    @staticmethod
    def _matches(matcher, rendered: str) -> bool:
        if isinstance(matcher, str):
            return matcher in rendered
        if hasattr(matcher, "search"):
            return matcher.search(rendered) is not None
        return bool(matcher(rendered))

    def complete(self, messages: list[dict]) -> str:
        rendered = render_messages(messages)
        with self._lock:
            if not self._queue:
                raise UnmatchedPrompt(f"unmatched prompt (queue empty): {rendered[:200]!r}")
            matcher, response = self._queue.popleft()
        if not self._matches(matcher, rendered):
            raise UnmatchedPrompt(f"unmatched prompt: expected {matcher!r}, got {rendered[:200]!r}")
        if isinstance(response, Exception):
            raise response
        return response


def _post_with_retries(url, payload, api_key, timeout, retries, backoff, error_cls):
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    last: Exception | None = None
    for attempt in range(retries):
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=timeout)
        except requests.RequestException as exc:
            last = error_cls(f"transport failure calling {url}: {exc}")
        else:
            if resp.status_code < 400:
                return resp.json()
            err = error_cls(f"{url} returned {resp.status_code}", status=resp.status_code)
            if resp.status_code < 500:
                raise err  # client errors (bad key, bad request) don't retry
            last = err
        if attempt < retries - 1:
            time.sleep(backoff * (2 ** attempt))
    raise last
