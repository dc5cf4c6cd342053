import pytest
from hypothesis import given, strategies as st

from oracles import spl_reference
from lgx.metrics import pooled_psr, spl, success_rate, summarize
from lgx.policy import EpisodeResult, StopCause
from lgx.prompt import PsrCounter


def result(success=True, p=1.0, l=1.0, label="mug", psr=(0, 0), eid="e"):
    return EpisodeResult(eid, label, "lgx-objects", success, p, l, 1, PsrCounter(*psr),
                         StopCause.GROUNDING if success else StopCause.TURN_BUDGET)


results_st = st.lists(
    st.builds(result, st.booleans(), st.floats(0, 50), st.floats(0.01, 50), st.sampled_from(["a", "b", "c"]),
              st.tuples(st.integers(0, 5), st.integers(0, 5)).map(lambda t: (min(t), max(t)))),
    min_size=1, max_size=60)


def test_success_rate_examples():
    assert success_rate([result(i < 35) for i in range(100)]) == 35.0
    assert success_rate([result(False)] * 4) == 0.0
    assert success_rate([result(True)] * 4) == 100.0


def test_spl_examples():
    assert spl([result(True, 3.0, 3.0)]) == 100.0
    assert spl([result(True, 6.0, 3.0)]) == 50.0
    assert spl([result(False, 3.0, 3.0)]) == 0.0
    assert spl([result(True, 0.0, 0.0)]) == 100.0


@pytest.mark.parametrize("fn", [success_rate, spl, summarize])
def test_empty_input_rejected(fn):
    with pytest.raises(ValueError):
        fn([])


@given(results_st)
def test_spl_matches_reference_and_is_bounded(rs):
    ref = spl_reference([(r.success, r.path_length, r.optimal_length) for r in rs])
    assert spl(rs) == pytest.approx(ref, rel=1e-9, abs=1e-12)
    assert 0 <= spl(rs) <= success_rate(rs) <= 100


@given(results_st, st.randoms())
def test_permutation_invariance(rs, rnd):
    shuffled = list(rs)
    rnd.shuffle(shuffled)
    assert success_rate(shuffled) == pytest.approx(success_rate(rs))
    assert spl(shuffled) == pytest.approx(spl(rs))


@given(results_st)
def test_per_label_recombines_to_totals(rs):
    s = summarize(rs)
    assert sum(n for _, _, n in s.per_label.values()) == s.n_episodes == len(rs)
    assert sum(sr * n for sr, _, n in s.per_label.values()) / len(rs) == pytest.approx(s.sr)
    assert sum(v * n for _, v, n in s.per_label.values()) / len(rs) == pytest.approx(s.spl)


@given(results_st)
def test_pooled_psr_between_episode_extremes(rs):
    per = [100 * r.psr.p_suc / r.psr.p_total for r in rs if r.psr.p_total]
    pooled = pooled_psr(rs)
    if not per:
        assert pooled is None
    else:
        assert min(per) - 1e-9 <= pooled <= max(per) + 1e-9


def test_pooling_rule():
    rs = [result(psr=(1, 2)), result(psr=(2, 2)), result(psr=(0, 0))]
    assert summarize(rs).psr == 75.0


def test_two_label_breakdown_and_reports():
    rs = [result(True, 2, 1, "a"), result(False, label="a"), result(True, 1, 1, "b")]
    s = summarize(rs)
    assert s.per_label == {"a": (50.0, 25.0, 2), "b": (100.0, 100.0, 1)}
    assert s.sr == pytest.approx(200 / 3)
    csv = s.to_csv().splitlines()
    assert csv[0] == "label,sr,spl,n" and csv[1].startswith("ALL,66.666667,50.000000,3")
    assert "PSR -" in s.table()
    assert s.to_dict()["per_label"]["a"] == [50.0, 25.0, 2]
