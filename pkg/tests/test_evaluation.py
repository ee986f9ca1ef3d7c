"""Harness-level checks: scoring definitions, baselines, aggregation.

The headline comparisons (budget ratios, error orderings on the full
suite) live in the acceptance tests.  Here the counting rules are pinned
on traces small enough to verify every flag by hand.
"""

import math
from dataclasses import replace

import pytest

from rearguard.evaluation import (
    SAMPLER_KINDS,
    ComparisonReport,
    ConfigError,
    PipelineConfig,
    compare,
    comparison_to_dict,
    config_digest,
    format_comparison,
    ground_truth_danger,
    make_sampler,
    observable_danger,
    report_to_dict,
    run_pipeline,
    standard_suite,
)
from rearguard.scenario import (
    CameraConfig,
    DetectorConfig,
    Frame,
    GroundTruthObject,
    GroundTruthTick,
    HeadMotionConfig,
    ScenarioConfig,
    UserConfig,
    VehicleConfig,
    generate,
)
from rearguard.geometry import ImuPose

REAR = ImuPose(pitch=0.0, yaw=math.pi)
NO_WARMUP = PipelineConfig(warmup_s=0.0)
STILL_HEAD = HeadMotionConfig(0.0, 4.0, 0.0, 3.5, 0.0)


def car(x, z, vx=0.0, vz=0.0, oid=1):
    return GroundTruthObject(id=oid, cls="car", x=x, z=z, vx=vx, vz=vz, height=1.5)


def hand_trace(objects_by_tick):
    """Aligned (frames, truth) with no detections, one entry per tick."""
    frames, truth = [], []
    for i, objs in enumerate(objects_by_tick):
        t = round(i * 0.1, 3)
        frames.append(Frame(t=t, pose=REAR, detections=()))
        truth.append(GroundTruthTick(t=t, pose=REAR, objects=tuple(objs)))
    return frames, truth


def quick_scenario(seed=7, duration=15.0, vehicles=(), **kw):
    return ScenarioConfig(
        seed=seed,
        duration=duration,
        user=UserConfig(mode="standing"),
        head_motion=STILL_HEAD,
        vehicles=tuple(vehicles),
        **kw,
    )


# ------------------------------------------------------- danger labeling

def tick_at(objs, t=0.0):
    return GroundTruthTick(t=t, pose=REAR, objects=tuple(objs))


def test_head_on_short_ttc_is_dangerous():
    # closing at 2 m/s from 2 m: ttc = 1.0 s, well inside the budget
    assert ground_truth_danger(tick_at([car(0.0, -2.0, vz=2.0)]))


def test_no_objects_is_safe():
    assert not ground_truth_danger(tick_at([]))


def test_receding_object_is_safe():
    assert not ground_truth_danger(tick_at([car(0.0, -8.0, vz=-2.0)]))


def test_danger_needs_ttc_inside_budget():
    # same geometry, ttc 4.0 s vs 3.0 s; the boundary sits at
    # t_r * (1 - threshold) = 3.267 s
    assert not ground_truth_danger(tick_at([car(0.0, -8.0, vz=2.0)]))
    assert ground_truth_danger(tick_at([car(0.0, -6.0, vz=2.0)]))


def test_observable_danger_drops_objects_below_the_frame():
    # 1.2 m behind the user the ground contact is below the image edge;
    # the raw label fires, the observable one must not
    close = tick_at([car(0.0, -1.2, vz=2.0)])
    assert ground_truth_danger(close)
    assert not observable_danger(close, CameraConfig())


# ------------------------------------------------- hand-counted scoring

def test_rates_match_exhaustive_hand_count():
    # 12 ticks, never any detections, so no alerts can ever fire:
    #   ticks 0-3   empty road            -> safe, correct
    #   ticks 4-7   car at 6 m, ttc 3 s   -> observable danger, missed (fn)
    #   ticks 8-9   car at 1.2 m          -> danger the sensor cannot see,
    #                                        excluded from scoring
    #   ticks 10-11 receding car at 9 m   -> safe, correct
    per_tick = (
        [[]] * 4
        + [[car(0.0, -6.0, vz=2.0)]] * 4
        + [[car(0.0, -1.2, vz=2.0)]] * 2
        + [[car(0.0, -9.0, vz=-3.0)]] * 2
    )
    frames, truth = hand_trace(per_tick)
    report = run_pipeline(frames, truth, "everyframe", NO_WARMUP, keep_ticks=True)

    assert report.n_ticks == 12
    assert report.n_excluded == 2
    assert report.n_assessments == 10
    assert report.n_fp == 0
    assert report.n_fn == 4
    assert report.fpr == 0.0
    assert report.fnr == pytest.approx(0.4)
    assert report.blink_count == 12
    assert report.blink_fraction == 1.0
    assert report.n_danger_episodes == 1
    assert report.n_missed_episodes == 1
    assert report.n_false_alert_episodes == 0

    # recount from the tick records with the definitions spelled out
    scored = [r for r in report.ticks if r.measured and not r.excluded]
    assert len(scored) == report.n_assessments
    assert sum(r.alert and not r.danger for r in scored) == report.n_fp
    assert sum(r.danger and not r.alert for r in scored) == report.n_fn
    flags = [(r.danger, r.excluded, r.alert) for r in report.ticks]
    assert flags == (
        [(False, False, False)] * 4
        + [(True, False, False)] * 4
        + [(False, True, False)] * 2
        + [(False, False, False)] * 2
    )


def test_fp_fn_bounded_by_assessments():
    per_tick = [[car(0.0, -5.0, vz=2.0)]] * 8
    frames, truth = hand_trace(per_tick)
    report = run_pipeline(frames, truth, "everyframe", NO_WARMUP)
    assert report.n_fp + report.n_fn <= report.n_assessments


def test_misaligned_truth_is_rejected():
    frames, truth = hand_trace([[]] * 5)
    with pytest.raises(ValueError, match="aligned"):
        run_pipeline(frames, truth[:-1], "everyframe", NO_WARMUP)


# --------------------------------------------------------- the baselines

def test_unknown_sampler_kind_is_a_config_error():
    frames, truth = hand_trace([[]] * 3)
    with pytest.raises(ConfigError, match="lidar"):
        run_pipeline(frames, truth, "lidar", NO_WARMUP)


def test_sampler_kind_listing_matches_factory():
    import numpy as np

    rng = np.random.default_rng(0)
    for kind in SAMPLER_KINDS:
        assert make_sampler(kind, NO_WARMUP, rng) is not None


def test_interval_with_period_of_whole_trace_blinks_once():
    frames, truth = hand_trace([[]] * 30)
    cfg = replace(NO_WARMUP, interval_period=30.0)
    report = run_pipeline(frames, truth, "interval", cfg)
    assert report.blink_count == 1


def test_interval_period_below_one_tick_is_rejected():
    frames, truth = hand_trace([[]] * 3)
    with pytest.raises(ConfigError, match="period"):
        run_pipeline(frames, truth, "interval", replace(NO_WARMUP, interval_period=0.5))


def test_random_with_p_zero_never_blinks_after_warmup():
    frames, truth = hand_trace([[]] * 40)
    report = run_pipeline(frames, truth, "random", replace(NO_WARMUP, random_p=0.0))
    assert report.blink_count == 0
    assert report.blink_fraction == 0.0


def test_random_p_out_of_range_is_rejected():
    frames, truth = hand_trace([[]] * 3)
    with pytest.raises(ConfigError, match="probability"):
        run_pipeline(frames, truth, "random", replace(NO_WARMUP, random_p=1.5))


def test_interval_fraction_stays_under_its_rate():
    scen = quick_scenario(duration=30.0)
    frames, truth = generate(scen)
    cfg = replace(NO_WARMUP, interval_period=7.0)
    report = run_pipeline(frames, truth, "interval", cfg)
    assert report.blink_fraction <= 1.0 / 7.0 + 1.0 / report.n_ticks


def test_everyframe_fraction_is_exactly_one():
    scen = quick_scenario(duration=10.0)
    frames, truth = generate(scen)
    report = run_pipeline(frames, truth, "everyframe", NO_WARMUP)
    assert report.blink_fraction == 1.0


# -------------------------------------------------- end-to-end behaviour

def test_everyframe_noise_free_misses_nothing():
    # constant 2 m/s closer with an exact detector: the tracker's
    # constant-velocity model matches the world, so after the danger
    # onset the estimated picture cannot drift off the true one
    scen = quick_scenario(
        seed=11,
        duration=15.0,
        vehicles=[VehicleConfig(cls="car", spawn_time=1.0, x0=0.9, z0=-20.0, speed=2.0)],
        detector=DetectorConfig(box_noise_px=0.0),
    )
    frames, truth = generate(scen)
    report = run_pipeline(frames, truth, "everyframe", NO_WARMUP,
                          camera=scen.camera, fov=scen.detector.fov)
    assert report.n_danger_episodes >= 1
    assert report.fnr == 0.0
    assert report.n_missed_episodes == 0


def test_alert_events_carry_track_ids_and_ordered_times():
    scen = quick_scenario(
        seed=11,
        duration=15.0,
        vehicles=[VehicleConfig(cls="car", spawn_time=1.0, x0=0.9, z0=-20.0, speed=2.0)],
        detector=DetectorConfig(box_noise_px=0.0),
    )
    frames, truth = generate(scen)
    report = run_pipeline(frames, truth, "everyframe", NO_WARMUP,
                          camera=scen.camera, fov=scen.detector.fov)
    assert report.alert_events
    for ev in report.alert_events:
        assert ev.t_start <= ev.t_end
        assert ev.track_ids
        assert 0.0 < ev.peak_gamma <= 1.0


def test_same_seed_same_report():
    scen = quick_scenario(
        seed=3,
        duration=20.0,
        vehicles=[VehicleConfig(cls="car", spawn_time=2.0, x0=-0.8, z0=-30.0, speed=2.2)],
    )
    frames, truth = generate(scen)
    kw = dict(config=NO_WARMUP, seed=42, camera=scen.camera, fov=scen.detector.fov)
    a = run_pipeline(frames, truth, "sarsa", **kw)
    b = run_pipeline(frames, truth, "sarsa", **kw)
    assert a == b


# ------------------------------------------------------------ comparison

def two_quick_scenarios():
    return [
        ("alpha", quick_scenario(
            seed=21, duration=30.0,
            vehicles=[VehicleConfig(cls="car", spawn_time=2.0, x0=0.9, z0=-40.0, speed=2.4)],
        )),
        ("bravo", quick_scenario(
            seed=22, duration=30.0,
            vehicles=[VehicleConfig(cls="cycle", spawn_time=4.0, x0=-0.7, z0=-20.0, speed=1.3)],
        )),
    ]


def test_empty_suite_is_a_config_error():
    with pytest.raises(ConfigError, match="scenario"):
        compare([], ["everyframe"], NO_WARMUP)


def test_empty_sampler_list_is_a_config_error():
    with pytest.raises(ConfigError, match="sampler"):
        compare(two_quick_scenarios(), [], NO_WARMUP)


def test_unknown_sampler_in_compare_is_a_config_error():
    with pytest.raises(ConfigError, match="radar"):
        compare(two_quick_scenarios(), ["everyframe", "radar"], NO_WARMUP)


def test_single_scenario_single_sampler_yields_one_row():
    rep = compare(two_quick_scenarios()[:1], ["interval"], NO_WARMUP)
    assert len(rep.runs) == 1
    assert rep.aggregates["interval"]["runs"] == 1
    assert "interval" in format_comparison(rep)


def test_aggregation_is_invariant_to_scenario_order():
    suite = two_quick_scenarios()
    kinds = ["everyframe", "interval"]
    fwd = compare(suite, kinds, NO_WARMUP)
    rev = compare(list(reversed(suite)), kinds, NO_WARMUP)
    assert fwd.aggregates == rev.aggregates
    assert fwd.breakdowns == rev.breakdowns
    assert fwd.runs == rev.runs


def test_budget_matching_tracks_the_adaptive_budget():
    suite = standard_suite()[:3]
    rep = compare(suite, ["sarsa", "interval", "random"], PipelineConfig())
    assert rep.budget_matched
    by_scen = {}
    for r in rep.runs:
        by_scen.setdefault(r.scenario, {})[r.sampler_kind] = r.blink_fraction
    for scen, fr in by_scen.items():
        anchor = fr["sarsa"]
        assert fr["interval"] == pytest.approx(anchor, rel=0.10, abs=0.01)
        # the random baseline only matches in expectation; give it room
        # for binomial noise on top of the ten percent band
        assert fr["random"] == pytest.approx(anchor, rel=0.10, abs=0.035)


def test_breakdowns_cover_the_declared_axes():
    rep = compare(two_quick_scenarios(), ["everyframe"], NO_WARMUP)
    assert set(rep.breakdowns) == {"mode", "road", "light", "classes", "vehicle_count"}
    assert set(rep.breakdowns["classes"]) == {"car", "cycle"}


# ------------------------------------------------------- report plumbing

def test_report_dict_drops_ticks_and_keeps_events():
    frames, truth = hand_trace([[car(0.0, -6.0, vz=2.0)]] * 6)
    report = run_pipeline(frames, truth, "everyframe", NO_WARMUP, keep_ticks=True)
    d = report_to_dict(report)
    assert "ticks" not in d
    assert isinstance(d["alert_events"], list)
    assert d["n_assessments"] == report.n_assessments


def test_comparison_dict_is_json_ready():
    import json

    rep = compare(two_quick_scenarios()[:1], ["interval"], NO_WARMUP)
    payload = comparison_to_dict(rep)
    text = json.dumps(payload)
    assert "aggregates" in payload and "runs" in payload
    assert json.loads(text)["budget_matched"] is True


def test_config_digest_is_order_insensitive_and_value_sensitive():
    a = config_digest({"alpha": 1, "beta": [2, 3]})
    b = config_digest({"beta": [2, 3], "alpha": 1})
    c = config_digest({"alpha": 1, "beta": [2, 4]})
    assert a == b
    assert a != c
    assert len(a) == 64


def test_standard_suite_shape():
    suite = standard_suite()
    assert len(suite) == 20
    names = [name for name, _ in suite]
    assert len(set(names)) == 20
    seeds = {scen.seed for _, scen in suite}
    assert len(seeds) == 20
    modes = {scen.user.mode for _, scen in suite}
    lights = {scen.light for _, scen in suite}
    roads = {scen.road for _, scen in suite}
    assert modes == {"standing", "walking", "jogging"}
    assert lights == {"day", "night"}
    assert roads == {"along", "intersection"}
