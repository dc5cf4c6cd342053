import json

import httpx
import pytest
from hypothesis import given, strategies as st

from lgx import llm
from lgx.catalog import HALLWAY_LABEL, TWO_PHASE_ROOMS
from lgx.llm import (
    BackendError, CoOccurrenceOracle, RandomBackend, RemoteBackend, RemoteBackendConfig, ReplayBackend,
    ResponseCache, cache_key, cached_decide, decide,
)


class Counting:
    id = "counting"

    def __init__(self):
        self.calls = 0

    def decide(self, prompt, valid_set, seed, **kw):
        self.calls += 1
        return valid_set[seed % len(valid_set)]


def test_oracle_commonsense_pick():
    assert decide(CoOccurrenceOracle(), "p", ["fridge", "desk", "couch"], 0, target="remote control") == "couch"


def test_oracle_tie_break_is_lexicographic():
    oracle = CoOccurrenceOracle(affinity={})
    assert decide(oracle, "p", ["tv", "bed", "sink"], 0, target="anything") == "bed"


def test_oracle_hints_score_directions_by_caption():
    hints = {"Front": ("bed",), "Right": ("sink", "fridge"), "Behind": (), "Left": ("desk",)}
    pick = decide(CoOccurrenceOracle(), "p", ["Front", "Right", "Behind", "Left"], 0,
                  target="Red Bull can", hints=hints)
    assert pick == "Right"


def test_oracle_needs_target_and_candidates():
    with pytest.raises(ValueError):
        CoOccurrenceOracle().decide("p", ["a"], 0)
    with pytest.raises(ValueError):
        CoOccurrenceOracle().decide("p", [], 0, target="x")
    with pytest.raises(ValueError):
        CoOccurrenceOracle(affinity={("a", "b"): -1.0})


def test_default_affinity_pairs():
    oracle = CoOccurrenceOracle()
    for _, targets, commons in TWO_PHASE_ROOMS:
        for t in targets:
            for c in commons:
                assert oracle.score(t, c) > oracle.score(t, HALLWAY_LABEL) > oracle.score(t, "toilet")


@given(valid=st.lists(st.text(min_size=1), min_size=1, unique=True), target=st.text(), seed=st.integers(0, 99))
def test_oracle_and_random_always_reply_in_set(valid, target, seed):
    assert CoOccurrenceOracle().decide("p", valid, seed, target=target) in valid
    assert RandomBackend().decide("p", valid, seed) in valid


def test_random_backend_deterministic():
    b = RandomBackend()
    valid = [f"o{i}" for i in range(20)]
    assert b.decide("p", valid, 5) == b.decide("p", valid, 5)
    assert len({b.decide("p", valid, s) for s in range(100)}) > 5


def test_cache_hits_and_seed_sensitivity():
    cache, backend = ResponseCache(), Counting()
    a = cached_decide(cache, backend, "p", ["x", "y"], 1)
    b = cached_decide(cache, backend, "p", ["x", "y"], 1)
    assert a == b and backend.calls == 1
    cached_decide(cache, backend, "p", ["x", "y"], 2)
    assert backend.calls == 2 and cache.misses == 2


def test_cache_key_ignores_valid_set_order():
    assert cache_key("b", "p", ["x", "y"], 1) == cache_key("b", "p", ["y", "x"], 1)
    assert cache_key("b", "p", ["x"], 1) != cache_key("c", "p", ["x"], 1)


def test_cache_persists_and_replays(tmp_path):
    path = tmp_path / "c.jsonl"
    backend = Counting()
    replies = [cached_decide(ResponseCache(path), backend, f"p{i}", ["x", "y", "z"], i) for i in range(6)]
    reloaded = ResponseCache(path)
    assert len(reloaded) == 6
    replay = ReplayBackend(backend.id)
    assert [cached_decide(reloaded, replay, f"p{i}", ["x", "y", "z"], i) for i in range(6)] == replies
    with pytest.raises(BackendError):
        cached_decide(reloaded, replay, "unseen", ["x"], 0)


def chat(reply):
    return {"choices": [{"message": {"role": "assistant", "content": reply}}]}


def test_remote_backend_request_and_reply(monkeypatch):
    seen = []

    def handler(request):
        seen.append(request)
        return httpx.Response(200, json=chat("The sink."))

    monkeypatch.setenv(llm.API_KEY_ENV, "sk-test")
    b = RemoteBackend(RemoteBackendConfig(model="m1"), transport=httpx.MockTransport(handler))
    assert b.decide("prompt text", ["sink"], 9) == "The sink."
    body = json.loads(seen[0].content)
    assert body["model"] == "m1" and body["temperature"] == 0.0 and body["seed"] == 9
    assert body["messages"] == [{"role": "user", "content": "prompt text"}]
    assert seen[0].headers["Authorization"] == "Bearer sk-test"


def test_remote_backend_retries_then_fails(monkeypatch):
    monkeypatch.setattr(llm.time, "sleep", lambda s: None)
    attempts = []

    def flaky(request):
        attempts.append(1)
        return httpx.Response(500) if len(attempts) < 3 else httpx.Response(200, json=chat("tv"))

    b = RemoteBackend(RemoteBackendConfig(max_retries=2), api_key="k", transport=httpx.MockTransport(flaky))
    assert b.decide("p", ["tv"], 0) == "tv" and b.calls == 3

    down = RemoteBackend(RemoteBackendConfig(max_retries=1), api_key="k",
                         transport=httpx.MockTransport(lambda r: httpx.Response(503)))
    with pytest.raises(BackendError):
        down.decide("p", ["tv"], 0)
    assert down.calls == 2


def test_populated_cache_means_zero_remote_calls(tmp_path):
    transport = httpx.MockTransport(lambda r: httpx.Response(200, json=chat("sink")))
    remote = RemoteBackend(api_key="k", transport=transport)
    cache = ResponseCache(tmp_path / "c.jsonl")
    for i in range(4):
        cached_decide(cache, remote, f"p{i}", ["sink"], 0)
    assert remote.calls == 4
    again = RemoteBackend(api_key="k", transport=transport)
    cache2 = ResponseCache(tmp_path / "c.jsonl")
    for i in range(4):
        assert cached_decide(cache2, again, f"p{i}", ["sink"], 0) == "sink"
    assert again.calls == 0
