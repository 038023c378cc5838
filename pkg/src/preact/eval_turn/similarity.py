"""Text normalization, token F1 and answer-similarity scorers."""

from __future__ import annotations

import math
import os
import re
import string
from collections import Counter
from typing import Protocol, Sequence

import httpx

_PUNCT = re.compile(f"[{re.escape(string.punctuation)}]")


def normalize_tokens(text: str) -> list[str]:
    """Lowercase, drop ASCII punctuation, split on whitespace."""
    return _PUNCT.sub("", text.lower()).split()


def token_f1(prediction: str, reference: str) -> float:
    pred = normalize_tokens(prediction)
    ref = normalize_tokens(reference)
    if not pred or not ref:
        return float(pred == ref)
    common = sum((Counter(pred) & Counter(ref)).values())
    if common == 0:
        return 0.0
    precision = common / len(pred)
    recall = common / len(ref)
    return 2 * precision * recall / (precision + recall)


class SimilarityPort(Protocol):
    def __call__(self, a: str, b: str) -> float: ...


def tf_cosine(a: str, b: str) -> float:
    """Cosine similarity between term-frequency vectors of the normalized tokens."""
    ta, tb = Counter(normalize_tokens(a)), Counter(normalize_tokens(b))
    if ta == tb:
        return 1.0
    if not ta or not tb:
        return 0.0
    dot = sum(ta[t] * tb[t] for t in ta.keys() & tb.keys())
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(v * v for v in ta.values())) * math.sqrt(sum(v * v for v in tb.values()))
    return min(1.0, dot / norm)


def _cosine(u: Sequence[float], v: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(u, v))
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(y * y for y in v))
    if nu == 0 or nv == 0:
        return 0.0
    return dot / (nu * nv)


class EmbeddingSimilarity:
    """Cosine similarity of embeddings from an OpenAI-style ``/embeddings`` endpoint.

    Negative cosines are clipped to 0 so scores stay in [0, 1].
    """

    def __init__(self, endpoint: str, model: str, auth_env: str | None = None, client: httpx.Client | None = None):
        self.endpoint = endpoint
        self.model = model
        self.auth_env = auth_env
        self._client = client or httpx.Client(timeout=60.0)

    def _embed(self, texts: list[str]) -> list[list[float]]:
        headers = {}
        if self.auth_env:
            headers["Authorization"] = f"Bearer {os.environ[self.auth_env]}"
        resp = self._client.post(self.endpoint, json={"model": self.model, "input": texts}, headers=headers)
        resp.raise_for_status()
        items = sorted(resp.json()["data"], key=lambda d: d["index"])
        return [item["embedding"] for item in items]

    def __call__(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        ea, eb = self._embed([a, b])
        return max(0.0, min(1.0, _cosine(ea, eb)))
