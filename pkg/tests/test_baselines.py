import csv
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reactrisk.baselines import (LongitudinalPair, RssParams, baseline_series, nearest_lead, rss_required_gap,
                                 rss_violated, thw, ttc, write_baselines_csv)
from reactrisk.core import AgentState
from reactrisk.errors import InputError
from reactrisk.scenarios import CONFLICT_ID, build_scenario, run
from reactrisk.trace import Frame, Trace


def test_ttc_closing():
    assert ttc(LongitudinalPair(20.0, 20.0, 10.0)) == 2.0


def test_ttc_not_closing_is_inf():
    assert ttc(LongitudinalPair(20.0, 10.0, 10.0)) == math.inf
    assert ttc(LongitudinalPair(20.0, 10.0, 12.0)) == math.inf


def test_ttc_contact():
    assert ttc(LongitudinalPair(0.0, 10.0, 5.0)) == 0.0


def test_thw_cf_parameters():
    assert thw(LongitudinalPair(15.0, 5.278, 5.0)) == pytest.approx(2.842, abs=5e-4)


def test_thw_stationary_and_contact():
    assert thw(LongitudinalPair(15.0, 0.0, 5.0)) == math.inf
    assert thw(LongitudinalPair(0.0, 5.0, 5.0)) == 0.0


def test_rss_required_gap():
    assert rss_required_gap(20.0, RssParams(0.5, 5.0)) == 50.0
    assert rss_required_gap(0.0) == 0.0
    assert rss_violated(LongitudinalPair(49.9, 20.0, 20.0))
    assert not rss_violated(LongitudinalPair(50.0, 20.0, 20.0))
    assert not rss_violated(LongitudinalPair(0.0, 0.0, 3.0))


def test_pair_validation():
    with pytest.raises(ValueError):
        LongitudinalPair(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        RssParams(0.0, 5.0)


pos = st.floats(0.0, 200.0)
spd = st.floats(0.0, 50.0)


@given(pos, spd, spd)
def test_ttc_thw_non_negative_and_inf_iff_not_closing(g, ve, vl):
    p = LongitudinalPair(g, ve, vl)
    assert ttc(p) >= 0 and thw(p) >= 0
    assert (ttc(p) == math.inf) == (ve <= vl)


@given(st.floats(0.1, 50), st.floats(0.1, 50), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(1, 10),
       st.floats(1, 10))
def test_rss_monotonicity(v1, v2, t1, t2, b1, b2):
    if v1 != v2:
        lo, hi = sorted((v1, v2))
        assert rss_required_gap(lo) < rss_required_gap(hi)
    if t1 != t2:
        lo, hi = sorted((t1, t2))
        assert rss_required_gap(10.0, RssParams(lo, 5.0)) < rss_required_gap(10.0, RssParams(hi, 5.0))
    if b1 != b2:
        lo, hi = sorted((b1, b2))
        assert rss_required_gap(10.0, RssParams(0.5, lo)) > rss_required_gap(10.0, RssParams(0.5, hi))


@given(pos, pos, spd, spd)
def test_rss_violation_monotone_in_gap(g1, g2, ve, vl):
    small, large = sorted((g1, g2))
    if rss_violated(LongitudinalPair(large, ve, vl)):
        assert rss_violated(LongitudinalPair(small, ve, vl))


def test_nearest_lead_selects_same_lane_ahead():
    ego = AgentState(1, (0.0, 0.0), (10.0, 0.0))
    others = [AgentState(2, (30.0, 0.5), (8.0, 0.0)), AgentState(3, (20.0, 3.5), (8.0, 0.0)),
              AgentState(4, (-10.0, 0.0), (12.0, 0.0)), AgentState(5, (50.0, 0.0), (5.0, 0.0))]
    lead, pair = nearest_lead(ego, others)
    assert lead.id == 2 and pair.gap == pytest.approx(25.5)
    assert nearest_lead(ego, [others[1], others[2]]) is None


def test_cf_pre_braking_baselines():
    tr = run(build_scenario("CF"))
    rec = baseline_series(tr)[0]
    assert rec.lead_id == CONFLICT_ID
    assert rec.thw == pytest.approx(15.0 / (19 / 3.6))
    assert rec.ttc > 50.0


def test_no_lead_frame_is_infinite():
    tr = Trace([Frame(0.0, [AgentState(1, (0, 0), (5.0, 0.0))])], ego_id=1)
    rec = baseline_series(tr)[0]
    assert rec.ttc == math.inf and rec.thw == math.inf and rec.rss_violated is None


def test_constant_closing_ttc_decreases_by_dt():
    dt = 0.04
    frames = [Frame(k * dt, [AgentState(1, (10.0 * k * dt, 0.0), (10.0, 0.0)),
                             AgentState(2, (44.5 + 5.0 * k * dt, 0.0), (5.0, 0.0))]) for k in range(50)]
    recs = baseline_series(Trace(frames, 1))
    for a, b in zip(recs, recs[1:]):
        assert a.ttc - b.ttc == pytest.approx(dt, abs=1e-9)


def test_missing_ego_raises():
    tr = Trace([Frame(0.0, [AgentState(2, (0, 0), (5.0, 0.0))])], ego_id=1)
    with pytest.raises(InputError):
        baseline_series(tr)


def test_baselines_csv(tmp_path):
    tr = run(build_scenario("CF"))
    recs = baseline_series(tr)
    path = tmp_path / "baselines.csv"
    write_baselines_csv(path, recs, react_levels=[0] * len(recs), react_risk=[0.1] * len(recs))
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == len(recs)
    assert list(rows[0]) == ["frame", "t", "ttc", "thw", "rss_violated", "level_ttc", "level_thw", "level_rss",
                             "global_risk_react", "level_react"]
    assert float(rows[0]["thw"]) == recs[0].thw
