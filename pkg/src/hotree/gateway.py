"""Uniform client for LLM, VLM, and embedding providers.

All model access in the system goes through a :class:`Gateway`; nothing else
performs network calls.  Two implementations ship: an OpenAI-compatible HTTP
client and a deterministic scripted mock that makes every downstream module
testable offline.  Mock lookups are keyed by a request *tag* (template id
plus salient arguments) rather than full prompt text, so prompt-wording
tweaks do not break scripts.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence
from urllib.parse import urlparse

import httpx

from .errors import (
    AuthFailure,
    DimensionMismatch,
    MalformedResponse,
    MissingScriptEntry,
    Timeout,
    ZeroVector,
)

PROVIDER_KINDS = ("llm", "vlm", "embedding")
DEFAULT_CONCURRENT_REQUESTS = 4


@dataclass(frozen=True)
class ProviderConfig:
    kind: str
    endpoint: str
    model_name: str
    auth_env_var: str
    timeout_ms: int = 30_000

    def __post_init__(self) -> None:
        if self.kind not in PROVIDER_KINDS:
            raise ValueError(f"unknown provider kind {self.kind!r}")
        parsed = urlparse(self.endpoint)
        if not (parsed.scheme and parsed.netloc):
            raise ValueError(f"endpoint must be an absolute URL: {self.endpoint!r}")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "endpoint": self.endpoint,
            "model_name": self.model_name,
            "auth_env_var": self.auth_env_var,
            "timeout_ms": self.timeout_ms,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ProviderConfig":
        return cls(
            kind=d["kind"],
            endpoint=d["endpoint"],
            model_name=d["model_name"],
            auth_env_var=d.get("auth_env_var", ""),
            timeout_ms=int(d.get("timeout_ms", 30_000)),
        )


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    image: Optional[str] = None
    temperature: float = 0.0
    tag: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.prompt:
            raise ValueError("prompt must be non-empty")


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(not math.isfinite(v) for v in self.values):
            raise ValueError("embedding contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.values)

    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values))


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """dot(a,b) / (|a||b|), clamped into [-1, 1] against float drift."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    na, nb = a.norm(), b.norm()
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("cosine similarity undefined for zero vectors")
    dot = math.fsum(x * y for x, y in zip(a.values, b.values))
    return max(-1.0, min(1.0, dot / (na * nb)))


class Gateway(ABC):
    """Interface every pipeline component uses to reach models."""

    @abstractmethod
    def complete(self, req: ChatRequest, kind: str = "llm") -> str:
        """Chat completion against the llm or vlm provider."""

    @abstractmethod
    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        """One vector per input text, order preserved, uniform dimension."""


class HttpGateway(Gateway):
    """OpenAI-compatible chat/embeddings client.

    ``endpoint`` is the provider base URL; ``/chat/completions`` and
    ``/embeddings`` are appended.  Keys come from the environment variable
    each config names; they are never persisted.
    """

    def __init__(self, configs: Mapping[str, ProviderConfig],
                 max_concurrent: int = DEFAULT_CONCURRENT_REQUESTS):
        self.configs = dict(configs)
        self._limits = {
            kind: threading.Semaphore(max_concurrent) for kind in self.configs
        }

    def _config(self, kind: str) -> ProviderConfig:
        cfg = self.configs.get(kind)
        if cfg is None:
            raise AuthFailure(f"no provider configured for kind {kind!r}")
        return cfg

    def _auth_header(self, cfg: ProviderConfig) -> dict[str, str]:
        key = os.environ.get(cfg.auth_env_var, "")
        if not key:
            raise AuthFailure(
                f"environment variable {cfg.auth_env_var!r} is not set"
            )
        return {"Authorization": f"Bearer {key}"}

    def _post(self, cfg: ProviderConfig, path: str, body: dict) -> dict:
        url = cfg.endpoint.rstrip("/") + path
        try:
            with self._limits[cfg.kind]:
                resp = httpx.post(
                    url,
                    json=body,
                    headers=self._auth_header(cfg),
                    timeout=cfg.timeout_ms / 1000.0,
                )
        except httpx.TimeoutException as exc:
            raise Timeout(f"{cfg.kind} request timed out: {exc}") from exc
        except httpx.HTTPError as exc:
            raise MalformedResponse(f"{cfg.kind} transport failure: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthFailure(f"provider rejected credentials ({resp.status_code})")
        if resp.status_code >= 400:
            raise MalformedResponse(
                f"provider returned HTTP {resp.status_code}: {resp.text[:200]}"
            )
        try:
            return resp.json()
        except json.JSONDecodeError as exc:
            raise MalformedResponse("provider response is not JSON") from exc

    def complete(self, req: ChatRequest, kind: str = "llm") -> str:
        if kind not in ("llm", "vlm"):
            raise ValueError("complete() requires an llm or vlm provider")
        if req.image is not None and kind != "vlm":
            raise ValueError("image content requires the vlm provider")
        cfg = self._config(kind)
        content: object = req.prompt
        if req.image is not None:
            content = [
                {"type": "text", "text": req.prompt},
                {"type": "image_url", "image_url": {"url": req.image}},
            ]
        body = {
            "model": cfg.model_name,
            "messages": [{"role": "user", "content": content}],
            "temperature": req.temperature,
        }
        data = self._post(cfg, "/chat/completions", body)
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponse("missing choices[0].message.content") from exc

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("embed() requires at least one text")
        cfg = self._config("embedding")
        body = {"model": cfg.model_name, "input": list(texts)}
        data = self._post(cfg, "/embeddings", body)
        try:
            items = sorted(data["data"], key=lambda item: item["index"])
            vectors = [
                EmbeddingVector(tuple(float(v) for v in item["embedding"]))
                for item in items
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse("bad embeddings payload") from exc
        if len(vectors) != len(texts):
            raise MalformedResponse(
                f"expected {len(texts)} embeddings, got {len(vectors)}"
            )
        dims = {v.dim for v in vectors}
        if len(dims) > 1:
            raise DimensionMismatch(f"provider returned ragged vectors: {dims}")
        return vectors


@dataclass
class MockScript:
    """Canned responses for offline tests.

    ``completions`` maps request tags to reply text.  ``embeddings`` maps
    exact input texts to vectors; unscripted texts fall back to a
    deterministic unit vector derived from the text hash, so identical
    strings always embed identically and distinct strings land nearly
    orthogonal.
    """

    completions: dict[str, str] = field(default_factory=dict)
    embeddings: dict[str, Sequence[float]] = field(default_factory=dict)
    dim: int = 64


class MockGateway(Gateway):
    def __init__(self, script: Optional[MockScript] = None):
        self.script = script or MockScript()
        self.calls: list[tuple[str, str]] = []

    def complete(self, req: ChatRequest, kind: str = "llm") -> str:
        tag = req.tag or ""
        self.calls.append(("complete", tag))
        if tag not in self.script.completions:
            raise MissingScriptEntry(f"no scripted completion for tag {tag!r}")
        return self.script.completions[tag]

    def _hash_vector(self, text: str) -> EmbeddingVector:
        seed = int.from_bytes(
            hashlib.sha256(text.encode("utf-8")).digest()[:8], "big"
        )
        rng = random.Random(seed)
        raw = [rng.gauss(0.0, 1.0) for _ in range(self.script.dim)]
        norm = math.sqrt(math.fsum(v * v for v in raw)) or 1.0
        return EmbeddingVector(tuple(v / norm for v in raw))

    def embed(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if not texts:
            raise ValueError("embed() requires at least one text")
        self.calls.append(("embed", "|".join(texts)))
        out = []
        for text in texts:
            scripted = self.script.embeddings.get(text)
            if scripted is not None:
                out.append(EmbeddingVector(tuple(float(v) for v in scripted)))
            else:
                out.append(self._hash_vector(text))
        dims = {v.dim for v in out}
        if len(dims) > 1:
            raise DimensionMismatch(f"scripted vectors are ragged: {dims}")
        return out


def load_model_config(path: str | Path) -> dict[str, ProviderConfig]:
    """Read the three-provider JSON config keyed llm/vlm/embedding."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    out = {}
    for kind, entry in raw.items():
        if kind not in PROVIDER_KINDS:
            raise ValueError(f"unknown provider key {kind!r} in config")
        entry = dict(entry)
        entry.setdefault("kind", kind)
        out[kind] = ProviderConfig.from_dict(entry)
    return out


def save_model_config(path: str | Path, configs: Mapping[str, ProviderConfig]) -> None:
    doc = {kind: cfg.to_dict() for kind, cfg in configs.items()}
    Path(path).write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
