import pytest

from conxsense import synth
from conxsense.errors import InvalidSchedule
from conxsense.geo import equirect_m
from conxsense.staypoints import extract_gps_staypoints
from conxsense.trace import serialize_trace


def test_same_seed_same_bytes():
    a = synth.generate_synthetic_trace(synth.commuter(days=3, seed=5))
    b = synth.generate_synthetic_trace(synth.commuter(days=3, seed=5))
    assert serialize_trace(a) == serialize_trace(b)
    c = synth.generate_synthetic_trace(synth.commuter(days=3, seed=6))
    assert serialize_trace(a) != serialize_trace(c)


def test_store_visited_ten_times_fifteen_minutes(commuter):
    store = [s for s in commuter.segments if s.place == "store"]
    assert len(store) == 10
    assert {s.t_end - s.t_start for s in store} == {900.0}


def test_feedback_rate(commuter):
    per_day = {}
    for fb in commuter.trace.feedback:
        day = int((fb.t - synth.EPOCH_2024) // synth.DAY)
        per_day[day] = per_day.get(day, 0) + 1
    assert len(per_day) == 14
    assert set(per_day.values()) <= {2, 3}


def test_feedback_matches_truth(commuter):
    for fb in commuter.trace.feedback:
        seg = commuter.truth.at(fb.t)
        assert seg is not None and seg.place != "transit"
        place = commuter.config.place(seg.place)
        assert (fb.misuse, fb.exposure) == (place.misuse, place.exposure)


def test_no_noise_dwells_exact():
    cfg = synth.commuter(days=2, seed=1, gps_sigma_m=0.0, wifi_miss=0.0, bt_miss=0.0)
    sc = synth.generate_scenario(cfg, with_events=False)
    gps = sc.trace.gps
    wifi_by_t = {}
    for w in sc.trace.wifi:
        wifi_by_t.setdefault(w.t, set()).add(w.ap)
    for seg in sc.segments:
        if seg.transit:
            continue
        place = cfg.place(seg.place)
        ticks = [t for t in (g.t for g in gps) if seg.t_start <= t < seg.t_end]
        expected = int((seg.t_end - seg.t_start) // 60) + (1 if (seg.t_end - seg.t_start) % 60 else 0)
        assert len(ticks) == expected
        for g in gps:
            if seg.t_start <= g.t < seg.t_end:
                assert (g.lat, g.lon) == (round(place.lat, 7), round(place.lon, 7))
        for t in ticks:
            assert wifi_by_t[t] == set(place.aps)


def test_invalid_schedule():
    cfg = synth.commuter(days=2)
    with pytest.raises(InvalidSchedule):
        synth.ScenarioConfig(places=cfg.places, home="nowhere", dwells=())
    with pytest.raises(InvalidSchedule):
        synth.ScenarioConfig(places=cfg.places, home="home", dwells=(synth.Dwell("moon", 0, 60),))
    with pytest.raises(InvalidSchedule):
        synth.ScenarioConfig(places=cfg.places, home="home", dwells=(), wifi_miss=1.5)
    # back-to-back dwells too close to travel between
    bad = (synth.Dwell("work", 8 * 3600, 3600), synth.Dwell("gym", 9 * 3600, 3600))
    with pytest.raises(InvalidSchedule):
        synth.generate_scenario(synth.ScenarioConfig(places=cfg.places, home="home", dwells=bad, days=1))


def test_grocery_fixture_spread():
    fixes = synth.grocery_store()
    sps = extract_gps_staypoints(fixes)
    assert len(sps) == 10
    cs = [s.centroid for s in sps]
    assert max(equirect_m(*a, *b) for a in cs for b in cs) <= 30.0 * 2 ** 0.5 + 6.0


def test_events_round_trip(commuter):
    text = synth.events_to_jsonl(commuter.events, commuter.truth)
    events, truth = synth.events_from_jsonl(text.splitlines())
    assert events == commuter.events
    assert [s.__dict__ for s in truth.segments] == [s.__dict__ for s in commuter.truth.segments]
    kinds = {e.kind for e in events}
    assert kinds == {"wake", "reboot", "access"}
