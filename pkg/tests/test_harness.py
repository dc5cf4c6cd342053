import json

import pytest

from lgx import cli
from lgx.catalog import ROOM_TEMPLATES
from lgx.grounding import GroundingModel
from lgx.harness import (
    SweepAxis, SweepSpec, TwoPhase, classify_two_phase, load_results, load_scenarios, run_suite, sweep,
    write_scenarios,
)
from lgx.houses import generate_house, generate_houses, two_phase_house
from lgx.llm import BackendError, CoOccurrenceOracle, ReplayBackend, ResponseCache
from lgx.metrics import summarize
from lgx.policy import Backends, EpisodeConfig, EpisodeResult, Policy, StopCause
from lgx.prompt import PromptVariant, PsrCounter
from lgx.world import HALLWAY, WorldMap, load_scenario

SMALL = generate_houses(2, 1, n_episodes=3)
TWO_PHASE = two_phase_house()


def test_generation_is_byte_deterministic(tmp_path):
    a = write_scenarios(generate_houses(3, 42), tmp_path / "a")
    b = write_scenarios(generate_houses(3, 42), tmp_path / "b")
    assert [p.read_bytes() for p in a] == [p.read_bytes() for p in b]
    assert [p.name for p in a] == ["house-42-00.json", "house-42-01.json", "house-42-02.json"]


def test_generated_houses_validate_and_place_targets_by_room(tmp_path):
    scen = generate_houses(12, 7)
    for path, (world, eps) in zip(write_scenarios(scen, tmp_path), scen):
        assert load_scenario(path) == (world, eps)
        assert world.hallway
        for t in (o for o in world.objects if o.is_target):
            assert t.label in ROOM_TEMPLATES[world.room(t.room_id).label]["targets"]
        for o in world.objects:
            if not o.is_target and o.label != HALLWAY:
                assert o.label in ROOM_TEMPLATES[world.room(o.room_id).label]["common"]


def test_generation_errors():
    with pytest.raises(ValueError):
        generate_houses(0, 1)
    with pytest.raises(ValueError):
        generate_house(1, min_room=5)


def test_parallelism_does_not_change_outputs(tmp_path):
    cfg = EpisodeConfig()
    s1, _ = run_suite(SMALL, cfg, seeds=[0, 1], parallelism=1, out_dir=tmp_path / "p1")
    s8, _ = run_suite(SMALL, cfg, seeds=[0, 1], parallelism=8, out_dir=tmp_path / "p8")
    for name in ("results.jsonl", "traces.jsonl", "summary.json", "summary.csv"):
        assert (tmp_path / "p1" / name).read_bytes() == (tmp_path / "p8" / name).read_bytes()
    assert s1 == s8


def test_results_file_is_self_contained(tmp_path):
    summary, _ = run_suite(SMALL, EpisodeConfig(), out_dir=tmp_path)
    again = summarize(load_results(tmp_path))
    assert again.to_dict() == summary.to_dict()
    assert json.loads((tmp_path / "summary.json").read_text())["summary"] == summary.to_dict()


def test_cached_run_replays_identically(tmp_path):
    cache = ResponseCache(tmp_path / "cache.jsonl")
    oracle = CoOccurrenceOracle()
    s1, _ = run_suite(SMALL, EpisodeConfig(), Backends(llm=oracle, cache=cache), out_dir=tmp_path / "a")
    assert cache.misses > 0
    replay_cache = ResponseCache(tmp_path / "cache.jsonl")
    s2, r2 = run_suite(SMALL, EpisodeConfig(), Backends(llm=ReplayBackend(oracle.id), cache=replay_cache),
                       out_dir=tmp_path / "b")
    assert replay_cache.misses == 0 and sum(r.backend_errors for r in r2) == 0
    assert (tmp_path / "a/results.jsonl").read_bytes() == (tmp_path / "b/results.jsonl").read_bytes()
    assert s1 == s2


def test_backend_failures_never_abort_suite():
    class Broken:
        id = "broken"

        def decide(self, *a, **kw):
            raise BackendError("down")

    summary, results = run_suite(SMALL, EpisodeConfig(), Backends(llm=Broken()))
    assert summary.n_episodes == 6 and all(r.backend_errors == r.psr.p_total for r in results)
    assert summary.psr == 0.0


def fake(success, regions):
    return EpisodeResult("e", "bust", "lgx-objects", success, 1.0, 1.0, 5, PsrCounter(),
                         StopCause.GROUNDING if success else StopCause.TURN_BUDGET, regions_visited=regions)


def test_classify_examples():
    world, _ = TWO_PHASE
    assert classify_two_phase(fake(True, ["r0", HALLWAY, "r2"]), world) is TwoPhase.SUCCESS
    assert classify_two_phase(fake(False, ["r1"]), world) is TwoPhase.PHASE1
    assert classify_two_phase(fake(False, ["r1", HALLWAY, "r3"]), world) is TwoPhase.PHASE2
    with pytest.raises(ValueError):
        classify_two_phase(fake(False, []), WorldMap(4, 4, 0.25, [[False] * 4] * 4))


def test_classification_matches_recorded_phase():
    _, results = run_suite([TWO_PHASE], EpisodeConfig(), seeds=[0])
    for r in results:
        c = classify_two_phase(r, TWO_PHASE[0])
        assert (c is TwoPhase.SUCCESS) == r.success
        assert r.phase_failure == (None if r.success else c.value)


def test_sweep_spec():
    with pytest.raises(ValueError):
        SweepSpec("gth", [])
    with pytest.raises(ValueError):
        SweepSpec("gth", [0.5], seeds=[])
    spec = SweepSpec("prompt", ["Blip", "I"])
    assert spec.config_for("Blip").policy is Policy.LGX_CAPTIONS
    assert spec.config_for("I").prompt is PromptVariant.I and spec.config_for("I").scan.n_views == 12
    assert SweepSpec("detect-prob", [0.3]).config_for(0.3).scan.detect_prob == 0.3
    assert SweepSpec("policy", ["fbe"]).config_for("fbe").policy is Policy.FBE


def test_sweep_writes_table(tmp_path):
    rows = sweep(SweepSpec(SweepAxis.GTH, [0.7, 0.9], seeds=[0]), SMALL[:1], out_dir=tmp_path)
    assert [v for v, _ in rows] == [0.7, 0.9]
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "gth,sr,spl,psr,n" and len(lines) == 3
    assert (tmp_path / "gth=0.7" / "results.jsonl").exists()


def test_cli_round_trip(tmp_path, capsys):
    sc, out = tmp_path / "sc", tmp_path / "run"
    assert cli.main(["generate", "--count", "1", "--seed", "3", "--episodes", "3", "--out", str(sc)]) == 0
    assert cli.main(["run", str(sc), "--seed", "0", "1", "--parallelism", "2", "--out", str(out)]) == 0
    assert (out / "run.json").exists() and (out / "cache.jsonl").exists()
    assert cli.main(["replay", str(out), "--out", str(tmp_path / "replay")]) == 0
    assert "results identical" in capsys.readouterr().out
    assert cli.main(["report", str(out), "--csv", str(tmp_path / "r.csv")]) == 0
    assert (tmp_path / "r.csv").read_text().startswith("label,sr,spl,n")
    assert cli.main(["sweep", str(sc), "--axis", "gth", "--values", "0.6", "0.9", "--out", str(tmp_path / "sw")]) == 0
    assert "0.9" in capsys.readouterr().out


def test_cli_two_phase_report(tmp_path, capsys):
    tp = tmp_path / "tp"
    cli.main(["generate", "--two-phase", "--out", str(tp)])
    cli.main(["run", str(tp), "--policy", "fbe", "--grounding", "perfect", "--n-r", "2", "--out", str(tmp_path / "r")])
    cli.main(["report", str(tmp_path / "r"), "--two-phase", str(tp)])
    out = capsys.readouterr().out
    assert "Success" in out and "Phase1" in out and "Phase2" in out


def test_cli_config_flags():
    args = cli.make_parser().parse_args(
        ["run", "x", "--n-r", "3", "--g-th", "0.7", "--e-d", "4", "--resolution", "45", "--prompt", "GetClosest"])
    cfg = cli.build_config(args)
    assert (cfg.n_r, cfg.g_th, cfg.e_d, cfg.scan.n_views) == (3, 0.7, 4.0, 8)
    assert cfg.prompt is PromptVariant.GET_CLOSEST and cfg.policy is Policy.LGX_OBJECTS
    blip = cli.build_config(cli.make_parser().parse_args(["run", "x", "--prompt", "Blip"]))
    assert blip.policy is Policy.LGX_CAPTIONS and blip.scan.n_views == 4


def test_cli_replay_needs_cache(tmp_path):
    args = cli.make_parser().parse_args(["run", "x", "--backend", "replay", "--backend-id", "oracle",
                                         "--cache", str(tmp_path / "none.jsonl")])
    with pytest.raises(SystemExit):
        cli.build_backends(args)


def test_load_scenarios_from_directory(tmp_path):
    write_scenarios(SMALL, tmp_path)
    assert [w.name for w, _ in load_scenarios([tmp_path])] == [w.name for w, _ in SMALL]
