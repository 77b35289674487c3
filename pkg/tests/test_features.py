import pytest
from hypothesis import given, strategies as st

from conxsense.context import CoiProfile, CoiStats, DeviceProfile, DeviceStats
from conxsense.errors import NoFeedback
from conxsense.features import (CSV_HEADER, FEATURE_NAMES, FeatureVector, LabeledFeatureVector, build_dataset,
                                compute_features, dataset_from_csv, dataset_to_csv)
from conxsense.trace import FeedbackObservation, ObservationSequence

EMPTY_C = CoiProfile({})
EMPTY_D = DeviceProfile({}, frozenset())


def test_empty_contexts_all_zero():
    assert compute_features(0.0, EMPTY_C, EMPTY_D, set(), set()).f == (0.0,) * 8


def test_gps_lookup():
    cp = CoiProfile({"g": CoiStats("gps", 10, 7_200_000)})
    f = compute_features(0.0, cp, EMPTY_D, {"g"}, set()).f
    assert f[0] == 7200.0 and f[1] == 10.0 and f[2] == 0.0


def test_device_averages():
    dp = DeviceProfile({"d1": DeviceStats(6, 3_600_000), "d2": DeviceStats(12, 1_800_000),
                        "d3": DeviceStats(1, 60_000)}, frozenset({"d1", "d2"}))
    f = compute_features(0.0, EMPTY_C, dp, set(), {"d1", "d2", "d3"}).f
    assert f[4:] == (3.0, 2.0, 2700.0, 9.0)


def test_argmax_tie_smallest_id():
    cp = CoiProfile({"b": CoiStats("wifi", 3, 1000), "a": CoiStats("wifi", 7, 1000)})
    f = compute_features(0.0, cp, EMPTY_D, {"a", "b"}, set()).f
    assert f[2:4] == (1.0, 7.0)


def test_kinds_kept_apart():
    cp = CoiProfile({"g": CoiStats("gps", 2, 5000), "w": CoiStats("wifi", 4, 9000)})
    f = compute_features(0.0, cp, EMPTY_D, {"g", "w"}, set()).f
    assert f[:4] == (5.0, 2.0, 9.0, 4.0)


def test_header_fixed():
    assert CSV_HEADER == ("t", "gps_max_dur", "gps_max_dur_visits", "wifi_max_dur", "wifi_max_dur_visits",
                          "bt_num", "bt_fam", "bt_fam_avg_time", "bt_fam_avg_freq", "task", "label")
    assert len(FEATURE_NAMES) == 8


def _const(t):
    return FeatureVector(t, (float(t),) * 8)


def test_build_dataset_mapping():
    seq = ObservationSequence((FeedbackObservation(1.0, "safe", "work"), FeedbackObservation(2.0, "unsafe", None),
                               FeedbackObservation(3.0, None, "public"), FeedbackObservation(4.0, None, "home")))
    mis = build_dataset(seq, _const, "misuse")
    assert [(d.t, d.label) for d in mis] == [(1.0, "low_risk"), (2.0, "high_risk")]
    exp = build_dataset(seq, _const, "exposure")
    assert [(d.t, d.label) for d in exp] == [(1.0, "high_exposure"), (3.0, "low_exposure"), (4.0, "high_exposure")]


def test_build_dataset_without_feedback():
    with pytest.raises(NoFeedback):
        build_dataset(ObservationSequence((FeedbackObservation(1.0, "safe", None),)), _const, "exposure")
    with pytest.raises(ValueError):
        build_dataset(ObservationSequence(()), _const, "mood")


def test_csv_round_trip():
    data = [LabeledFeatureVector(FeatureVector(1.5, (0.1, 2.0, 1e-17, 3.0, 1.0, 0.0, 2700.0, 9.0)),
                                 "misuse", "low_risk")]
    text = dataset_to_csv(data)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert dataset_from_csv(text) == data


profiles = st.dictionaries(st.text("abcdef", min_size=1, max_size=3),
                           st.tuples(st.sampled_from(["gps", "wifi"]), st.integers(0, 50), st.integers(0, 10 ** 9)),
                           max_size=8)


@given(profiles, st.data())
def test_features_pure_and_context_local(prof, data):
    cp = CoiProfile({k: CoiStats(*v) for k, v in prof.items()})
    ctx = data.draw(st.sets(st.sampled_from(sorted(prof)) if prof else st.nothing()))
    a = compute_features(5.0, cp, EMPTY_D, ctx, set())
    assert a == compute_features(5.0, cp, EMPTY_D, set(ctx), set())
    extra = dict(cp.stats)
    extra["zzz-new"] = CoiStats("gps", 99, 10 ** 12)
    assert compute_features(5.0, CoiProfile(extra), EMPTY_D, ctx, set()).f[:4] == a.f[:4]


@given(profiles, st.integers(1, 1000))
def test_visit_features_scale_invariant(prof, c):
    cp = CoiProfile({k: CoiStats(*v) for k, v in prof.items()})
    scaled = CoiProfile({k: CoiStats(kind, n, dur * c) for k, (kind, n, dur) in prof.items()})
    a = compute_features(0.0, cp, EMPTY_D, set(prof), set()).f
    b = compute_features(0.0, scaled, EMPTY_D, set(prof), set()).f
    assert (a[1], a[3]) == (b[1], b[3])


def test_commuter_companions_familiar(commuter_profile):
    fam = commuter_profile.extractor.device_profile.familiar
    assert {"colleague-a", "colleague-b"} <= fam
    assert not any(d.startswith("stranger") for d in fam)


def test_causal_profiles_grow(commuter, commuter_profile):
    ex = commuter_profile.extractor
    t_mid = commuter.trace.records[len(commuter.trace) // 2].t
    cp, dp = ex.profiles_before(t_mid)
    assert sum(s.dur_ms for s in cp.stats.values()) < sum(s.dur_ms for s in ex.coi_profile.stats.values())
    assert dp.familiar <= ex.device_profile.familiar
