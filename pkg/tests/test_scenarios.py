import math

import pytest

from reactrisk.advisory import EgoControlState, Level, assess_frame
from reactrisk.config import EngineConfig
from reactrisk.errors import ConfigurationError
from reactrisk.harness import run_scenario
from reactrisk.riskmap import canonical_scene
from reactrisk.scenarios import (CONFLICT_ID, EGO_ID, KMH, VEHICLE_LENGTH, DriverMode, ScenarioKind,
                                 advance_speed, brake_onset, build_scenario, ego_driver_model, min_gap, run)


def speed_of(trace, agent_id, t):
    k = round(t / (trace.frames[1].t - trace.frames[0].t))
    return trace.frames[k].get(agent_id).speed


# --- build_scenario ------------------------------------------------------------

def test_cf_defaults():
    s = build_scenario("CF")
    lead = s.program(CONFLICT_ID)
    assert lead.speed == pytest.approx(5.0)
    assert s.t_f == 5.0
    assert s.program(EGO_ID).speed == pytest.approx(19 * KMH)


def test_ic_defaults_equidistant():
    s = build_scenario("IC")
    ego, other = s.program(EGO_ID), s.program(CONFLICT_ID)
    assert math.hypot(*ego.position) == 40.0 and math.hypot(*other.position) == 40.0
    assert ego.heading[0] * other.heading[0] + ego.heading[1] * other.heading[1] == 0.0
    assert not s.lane.enabled


def test_cf_gap_override():
    s = build_scenario("CF", {"gap": 30.0})
    assert s.program(CONFLICT_ID).position[0] - s.program(EGO_ID).position[0] == 30.0 + VEHICLE_LENGTH


def test_unknown_kind_and_override():
    with pytest.raises(ConfigurationError):
        build_scenario("XX")
    with pytest.raises(ConfigurationError):
        build_scenario("CF", {"warp": 9})


@pytest.mark.parametrize("kind", list(ScenarioKind))
def test_script_invariants(kind):
    s = build_scenario(kind)
    assert 0 <= s.t_f <= s.duration
    lo, hi = s.hazard_window
    assert 0 <= lo <= hi <= s.duration
    assert s.dt > 0


# --- run ------------------------------------------------------------------------

def test_cf_lead_speed_after_braking():
    tr = run(build_scenario("CF"))
    assert speed_of(tr, CONFLICT_ID, 6.0) == pytest.approx(2.0, abs=1e-12)
    assert speed_of(tr, CONFLICT_ID, 4.95) == pytest.approx(5.0, abs=1e-12)


def test_constant_velocity_is_linear():
    tr = run(build_scenario("CF"))
    x0 = tr.frames[0].get(EGO_ID).position[0]
    v = 19 * KMH
    for k in (1, 10, 100, 200):
        assert tr.frames[k].get(EGO_ID).position[0] == pytest.approx(x0 + v * k * 0.05, rel=1e-13)


def test_rv_gap_shrinks_after_t_f():
    tr = run(build_scenario("RV"))
    gaps = [f.get(EGO_ID).position[0] - f.get(CONFLICT_ID).position[0] for f in tr.frames if f.t >= 5.0]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("kind", list(ScenarioKind))
def test_run_deterministic_and_speeds_non_negative(kind):
    a, b = run(build_scenario(kind)), run(build_scenario(kind))
    for fa, fb in zip(a.frames, b.frames):
        assert fa.t == fb.t
        for x, y in zip(fa.agents, fb.agents):
            assert x.position == y.position and x.velocity == y.velocity
            assert x.speed >= 0


@pytest.mark.parametrize("kind", [ScenarioKind.CF, ScenarioKind.CI, ScenarioKind.RV])
def test_t_f_is_first_program_change(kind):
    tr = run(build_scenario(kind))
    dt = 0.05
    vx = [f.get(CONFLICT_ID).velocity[0] for f in tr.frames]
    accel = [(b - a) / dt for a, b in zip(vx, vx[1:])]
    k_f = round(build_scenario(kind).t_f / dt)
    assert next(k for k, a in enumerate(accel) if a != 0.0) == k_f


def test_trace_times_strictly_increasing():
    tr = run(build_scenario("CI"))
    ts = tr.times
    assert all(b > a for a, b in zip(ts, ts[1:]))
    assert all(f.get(EGO_ID) is not None for f in tr.frames)


def test_advance_speed_clamps():
    assert advance_speed(1.0, -3.0, 0.5, 0.0) == (0.0, pytest.approx(1.0 / 6.0))
    v, d = advance_speed(5.0, 2.0, 1.0, 6.0)
    # reaches 6 m/s after 0.5 s, then cruises
    assert v == 6.0 and d == pytest.approx(2.75 + 3.0)


def test_nominal_holds_velocity():
    tr = run(build_scenario("CF", nominal=True))
    assert all(f.get(CONFLICT_ID).speed == pytest.approx(5.0) for f in tr.frames)
    ic = run(build_scenario("IC", nominal=True))
    assert all(f.get(CONFLICT_ID).speed == 0.0 for f in ic.frames)


# --- driver model ------------------------------------------------------------------

def test_no_advisory_leaves_ego_unchanged():
    tr = run(build_scenario("CF"))
    out = ego_driver_model(tr, [0] * len(tr), DriverMode.WITH_WARNING)
    for a, b in zip(tr.frames, out.frames):
        assert a.get(EGO_ID) == b.get(EGO_ID) and b.brake_state == 0.0


def test_brake_onset_after_delay():
    tr = run(build_scenario("CF"))
    levels = [1 if f.t >= 7.3 - 1e-9 else 0 for f in tr.frames]
    assert brake_onset(tr, levels, DriverMode.WITH_WARNING) == pytest.approx(7.6)
    out = ego_driver_model(tr, levels, DriverMode.WITH_WARNING)
    k = round(7.6 / 0.05)
    assert out.frames[k].get(EGO_ID).speed == pytest.approx(19 * KMH)
    assert out.frames[k + 1].get(EGO_ID).speed == pytest.approx(19 * KMH - 2.5 * 0.05)
    assert out.frames[k + round(0.2 / 0.05)].brake_state == pytest.approx(1.0)


def test_nowarning_onset_uses_surrogate():
    tr = run(build_scenario("CF"))
    assert brake_onset(tr, None, DriverMode.NO_WARNING, kind=ScenarioKind.CF) == pytest.approx(7.7)


def test_full_brake_forces_safe_level():
    ego, others = canonical_scene()
    cfg = EngineConfig()
    a = assess_frame(ego, others, ctrl=EgoControlState(1.0), norm=cfg.normalization())
    assert a.advisory.level is Level.SAFE


def test_cf_warning_keeps_larger_gap():
    cfg = EngineConfig()
    warned = run_scenario("CF", cfg, DriverMode.WITH_WARNING)
    unwarned = run_scenario("CF", cfg, DriverMode.NO_WARNING)
    assert min_gap(warned.trace, CONFLICT_ID) > min_gap(unwarned.trace, CONFLICT_ID)
