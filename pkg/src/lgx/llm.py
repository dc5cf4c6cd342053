"""Decision backends: scripted co-occurrence oracle, uniform random, and a
remote chat-completion client, plus an append-only reply cache."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import httpx
import numpy as np

from .catalog import UNRELATED_AFFINITY, default_affinity

log = logging.getLogger(__name__)

API_KEY_ENV = "LGX_API_KEY"


class BackendError(RuntimeError):
    """Transport failure or timeout talking to a remote model."""


class Backend(Protocol):
    id: str

    def decide(self, prompt: str, valid_set: Sequence[str], seed: int, *,
               target: str | None = None, hints: Mapping[str, Sequence[str]] | None = None) -> str: ...


@dataclass
class CoOccurrenceOracle:
    """Deterministic test double for the language model's commonsense prior.

    The target arrives out-of-band; the prompt is ignored.  ``hints`` maps a
    candidate to the object labels it stands for (a direction stands for
    whatever its caption mentions) and the candidate scores the best of them.
    """

    affinity: dict[tuple[str, str], float] = field(default_factory=default_affinity)
    default_score: float = UNRELATED_AFFINITY
    id: str = "oracle"

    def __post_init__(self):
        for k, v in self.affinity.items():
            if not (np.isfinite(v) and v >= 0):
                raise ValueError(f"affinity{k}={v} must be finite and >= 0")
        if not (np.isfinite(self.default_score) and self.default_score >= 0):
            raise ValueError("default_score must be finite and >= 0")

    def score(self, target: str, candidate: str) -> float:
        return self.affinity.get((target, candidate), self.default_score)

    def decide(self, prompt, valid_set, seed, *, target=None, hints=None) -> str:
        if not valid_set:
            raise ValueError("oracle needs a non-empty valid_set")
        if target is None:
            raise ValueError("oracle needs the target label")

        def value(c: str) -> float:
            labels = hints.get(c) if hints else None
            if labels is None:
                return self.score(target, c)
            return max((self.score(target, l) for l in labels), default=0.0)

        return min(valid_set, key=lambda c: (-value(c), c))


@dataclass
class RandomBackend:
    id: str = "random"

    def decide(self, prompt, valid_set, seed, *, target=None, hints=None) -> str:
        rng = np.random.default_rng(seed)
        return list(valid_set)[int(rng.integers(len(valid_set)))]


@dataclass
class RemoteBackendConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-3.5-turbo"
    temperature: float = 0.0
    timeout: float = 30.0
    max_retries: int = 2

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")


class RemoteBackend:
    """Chat-completion HTTP client; returns the reply text verbatim."""

    def __init__(self, config: RemoteBackendConfig | None = None, api_key: str | None = None,
                 transport: httpx.BaseTransport | None = None):
        self.config = config or RemoteBackendConfig()
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.id = f"remote:{self.config.model}:{self.config.temperature}"
        self._client = httpx.Client(timeout=self.config.timeout, transport=transport)
        self.calls = 0

    def decide(self, prompt, valid_set, seed, *, target=None, hints=None) -> str:
        body = {
            "model": self.config.model,
            "temperature": self.config.temperature,
            "seed": seed,
            "messages": [{"role": "user", "content": prompt}],
        }
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        last: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            self.calls += 1
            try:
                resp = self._client.post(self.config.endpoint, json=body, headers=headers)
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last = exc
                log.warning("remote backend attempt %d failed: %s", attempt + 1, exc)
                if attempt < self.config.max_retries:
                    time.sleep(min(0.5 * 2**attempt, 4.0))
        raise BackendError(f"remote backend failed after {self.config.max_retries + 1} attempts: {last}")


def decide(backend: Backend, prompt: str, valid_set: Sequence[str], seed: int, **kw) -> str:
    return backend.decide(prompt, valid_set, seed, **kw)


def cache_key(backend_id: str, prompt: str, valid_set: Sequence[str], seed: int) -> str:
    raw = json.dumps([backend_id, prompt, sorted(valid_set), int(seed)], ensure_ascii=False)
    return hashlib.sha256(raw.encode()).hexdigest()


class ResponseCache:
    """Reply cache, optionally backed by an append-only JSON-lines file.

    Reads are lock-free dict lookups; writes take a lock so one writer at a
    time appends to the file.
    """

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self._data: dict[str, str] = {}
        self._lock = threading.Lock()
        self.misses = 0
        if self.path and self.path.exists():
            with self.path.open() as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._data[rec["key"]] = rec["reply"]

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def get(self, key: str) -> str | None:
        return self._data.get(key)

    def put(self, key: str, reply: str) -> None:
        with self._lock:
            if key in self._data:
                return
            self._data[key] = reply
            if self.path:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a") as fh:
                    fh.write(json.dumps({"key": key, "reply": reply}, ensure_ascii=False) + "\n")


class ReplayBackend:
    """Serves replies from a cache only; any miss is an error."""

    def __init__(self, backend_id: str):
        self.id = backend_id

    def decide(self, prompt, valid_set, seed, *, target=None, hints=None) -> str:
        raise BackendError("replay cache miss")


def cached_decide(cache: ResponseCache | None, backend: Backend, prompt: str,
                  valid_set: Sequence[str], seed: int, **kw) -> str:
    if cache is None:
        return backend.decide(prompt, valid_set, seed, **kw)
    key = cache_key(backend.id, prompt, valid_set, seed)
    hit = cache.get(key)
    if hit is not None:
        return hit
    cache.misses += 1
    reply = backend.decide(prompt, valid_set, seed, **kw)
    cache.put(key, reply)
    return reply
