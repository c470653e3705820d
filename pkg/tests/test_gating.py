import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coincsim.errors import ConfigError
from coincsim.events import Channel, EventStream, SeedSpec, merge_streams
from coincsim.gating import (
    CountSummary,
    GateList,
    GatePolicy,
    count_gates,
    make_gates_from_trigger,
    make_gates_periodic,
    time_difference_histogram,
)

from stat_helpers import stream_of

NS = 1000


def estream(times, channel=Channel.D1, duration_ps=10**6):
    t = np.asarray(times, dtype=np.int64)
    return EventStream(
        duration_ps=duration_ps,
        times=t,
        channels=np.full(len(t), int(channel), dtype=np.uint8),
    )


class TestGatesFromTrigger:
    def test_no_triggers_no_gates(self):
        g = make_gates_from_trigger(estream([], Channel.TRIGGER), window_ps=7 * NS)
        assert len(g.opens) == 0

    def test_two_well_separated_triggers(self):
        g = make_gates_from_trigger(
            estream([0, 100 * NS], Channel.TRIGGER), window_ps=7 * NS
        )
        assert g.opens.tolist() == [0, 100 * NS]
        assert g.closes.tolist() == [7 * NS, 107 * NS]

    def test_overlapping_triggers_drop_policy(self):
        g = make_gates_from_trigger(
            estream([0, 3 * NS], Channel.TRIGGER),
            window_ps=7 * NS,
            policy=GatePolicy.DROP_OVERLAPPING,
        )
        assert g.opens.tolist() == [0]

    def test_overlapping_triggers_allow_policy(self):
        g = make_gates_from_trigger(
            estream([0, 3 * NS], Channel.TRIGGER),
            window_ps=7 * NS,
            policy=GatePolicy.ALLOW_OVERLAP,
        )
        assert g.opens.tolist() == [0, 3 * NS]

    def test_caller_selects_gate_channel(self):
        # channel selection happens before gate building
        s = stream_of(10**6, ("D1", 50), ("T", 100), ("D2", 150), ("G", 200))
        g = make_gates_from_trigger(s.select_channel(Channel.TRIGGER), window_ps=7 * NS)
        assert g.opens.tolist() == [100]
        g2 = make_gates_from_trigger(s.select_channel(Channel.GATE_GEN), window_ps=7 * NS)
        assert g2.opens.tolist() == [200]

    def test_bad_window_rejected(self):
        with pytest.raises(ConfigError):
            make_gates_from_trigger(estream([0], Channel.TRIGGER), window_ps=0)


class TestGatesPeriodic:
    def test_65khz_one_second(self):
        g = make_gates_periodic(rate_hz=65_000, duration_ps=10**12, window_ps=7 * NS)
        assert len(g.opens) == 65_000
        assert g.opens[0] == 0
        # k-th edge is the nearest-ps rounding of k/rate
        assert g.opens[1] == round(10**12 / 65_000)

    def test_duration_shorter_than_period(self):
        g = make_gates_periodic(rate_hz=1_000, duration_ps=10**6, window_ps=100)
        assert g.opens.tolist() == [0]

    def test_window_must_fit_period(self):
        with pytest.raises(ConfigError):
            make_gates_periodic(rate_hz=10**9, duration_ps=10**6, window_ps=1000)

    def test_gate_count_scales_with_duration(self):
        g = make_gates_periodic(rate_hz=65_000, duration_ps=2 * 10**12, window_ps=7 * NS)
        assert len(g.opens) == 130_000

    def test_all_gates_inside_duration(self):
        g = make_gates_periodic(rate_hz=333, duration_ps=10**10, window_ps=500)
        assert g.opens[-1] < 10**10
        assert np.all(np.diff(g.opens) > 0)


class TestCountGates:
    def count_one_gate(self, d1_times, d2_times, window_ps=7 * NS):
        g = GateList(window_ps=window_ps, opens=np.array([0], dtype=np.int64))
        return count_gates(g, estream(d1_times, Channel.D1), estream(d2_times, Channel.D2))

    def test_single_gate_one_hit_each(self):
        c = self.count_one_gate([3 * NS], [5 * NS])
        assert c == CountSummary(n_gates=1, n1=1, n2=1, nc=1)

    def test_event_at_close_excluded(self):
        assert self.count_one_gate([7 * NS], []).n1 == 0

    def test_event_at_open_included(self):
        assert self.count_one_gate([0], []).n1 == 1

    def test_binary_counting_two_photons_one_gate(self):
        c = self.count_one_gate([1 * NS, 2 * NS], [])
        assert c == CountSummary(n_gates=1, n1=1, n2=0, nc=0)

    def test_coincidence_requires_both(self):
        assert self.count_one_gate([3 * NS], []).nc == 0

    def test_events_outside_gates_ignored(self):
        c = self.count_one_gate([50 * NS], [60 * NS])
        assert c == CountSummary(n_gates=1, n1=0, n2=0, nc=0)

    def test_multiple_gates_sum(self):
        g = GateList(
            window_ps=7 * NS,
            opens=np.array([0, 100 * NS, 200 * NS], dtype=np.int64),
        )
        c = count_gates(
            g,
            estream([1 * NS, 101 * NS], Channel.D1),
            estream([2 * NS, 205 * NS], Channel.D2),
        )
        assert c == CountSummary(n_gates=3, n1=2, n2=2, nc=1)

    def test_summary_addition(self):
        a = CountSummary(n_gates=10, n1=3, n2=4, nc=1)
        b = CountSummary(n_gates=5, n1=2, n2=0, nc=0)
        assert a + b == CountSummary(n_gates=15, n1=5, n2=4, nc=1)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            CountSummary(n_gates=1, n1=-1, n2=0, nc=0)


@st.composite
def gated_experiment(draw):
    n_gates = draw(st.integers(1, 30))
    window = draw(st.integers(1, 50))
    period = window + draw(st.integers(0, 50))
    opens = np.arange(n_gates, dtype=np.int64) * period
    duration = int(opens[-1]) + window + 100
    streams = []
    for channel in (Channel.D1, Channel.D2):
        n = draw(st.integers(0, 60))
        times = np.sort(
            np.asarray(
                draw(st.lists(st.integers(0, duration - 1), min_size=n, max_size=n)),
                dtype=np.int64,
            )
        )
        streams.append(
            EventStream(
                duration_ps=duration,
                times=times,
                channels=np.full(n, int(channel), dtype=np.uint8),
            )
        )
    return streams[0], streams[1], GateList(window_ps=window, opens=opens)


class TestCountInvariants:
    @given(gated_experiment())
    @settings(max_examples=60)
    def test_bounds(self, case):
        d1, d2, gates = case
        c = count_gates(gates, d1, d2)
        assert c.n_gates == len(gates.opens)
        assert 0 <= c.nc <= min(c.n1, c.n2)
        assert max(c.n1, c.n2) <= c.n_gates

    @given(gated_experiment(), st.integers(0, 2**32))
    @settings(max_examples=40)
    def test_split_merge_invariance(self, case, seed):
        # splitting a channel stream in two and re-merging cannot change counts
        d1, d2, gates = case
        if len(d1) == 0:
            return
        rng = SeedSpec(seed).rng_for(0, "split")
        mask = rng.random(len(d1)) < 0.5
        parts = [
            EventStream(
                duration_ps=d1.duration_ps,
                times=d1.times[m],
                channels=d1.channels[m],
            )
            for m in (mask, ~mask)
        ]
        remerged = merge_streams(*parts)
        assert count_gates(gates, remerged, d2) == count_gates(gates, d1, d2)

    def test_expected_coincidence_product(self):
        # independent per-gate Bernoulli detections: E[Nc]/N = p1 p2
        n, p1, p2 = 100_000, 0.23, 0.4
        rng = SeedSpec(77).rng_for(0, "bernoulli")
        h1 = rng.random(n) < p1
        h2 = rng.random(n) < p2
        period, window = 100, 50
        opens = np.arange(n, dtype=np.int64) * period
        base = np.arange(n, dtype=np.int64) * period
        d1 = estream(base[h1] + 5, Channel.D1, duration_ps=n * period)
        d2 = estream(base[h2] + 6, Channel.D2, duration_ps=n * period)
        c = count_gates(GateList(window_ps=window, opens=opens), d1, d2)
        assert c.n1 == h1.sum() and c.n2 == h2.sum()
        sigma = np.sqrt(p1 * p2 * (1 - p1 * p2) / n)
        assert abs(c.nc / n - p1 * p2) < 3 * sigma


class TestTimeDifferenceHistogram:
    def test_no_stops_all_zero(self):
        h = time_difference_histogram(
            estream([0, 100]), estream([]), lo_ps=0, hi_ps=1000, bin_width_ps=100
        )
        assert h.counts.sum() == 0
        assert len(h.counts) == 10

    def test_fixed_delay_single_bin(self):
        starts = np.arange(0, 10**6, 1000, dtype=np.int64)
        h = time_difference_histogram(
            estream(starts), estream(starts + 357), lo_ps=0, hi_ps=1000, bin_width_ps=100
        )
        assert h.counts[3] == len(starts)
        assert h.counts.sum() == len(starts)

    def test_first_stop_semantics(self):
        # only the first stop at/after start+lo is recorded
        h = time_difference_histogram(
            estream([0]), estream([10, 20, 30]), lo_ps=0, hi_ps=100, bin_width_ps=10
        )
        assert h.counts.tolist()[1] == 1
        assert h.counts.sum() == 1

    def test_lo_offset_skips_early_stops(self):
        h = time_difference_histogram(
            estream([0]), estream([10, 250]), lo_ps=200, hi_ps=400, bin_width_ps=100
        )
        assert h.counts.tolist() == [1, 0]

    def test_edges_cover_requested_range(self):
        h = time_difference_histogram(
            estream([]), estream([]), lo_ps=-500, hi_ps=500, bin_width_ps=250
        )
        assert h.edges_ps.tolist() == [-500, -250, 0, 250, 500]

    def test_pdc_peak_rises_above_accidental_floor(self):
        from coincsim.detectors import DetectorConfig, detect
        from coincsim.sources import Arm, PdcSourceConfig, gen_pdc_pairs, project_idler_path

        duration = 10**11  # 100 ms
        trig, idl = gen_pdc_pairs(PdcSourceConfig(pair_rate_hz=5e5), duration, seed=10)
        idl = project_idler_path(idl, seed=11)
        start_det = detect(
            trig, DetectorConfig(channel=Channel.TRIGGER, efficiency=0.9), seed=12
        )
        stop_det = detect(
            idl.select_arm(Arm.IDLER_PATH1),
            DetectorConfig(channel=Channel.D1, efficiency=0.9, dark_rate_hz=2e5),
            seed=13,
        )
        bin_w = 100
        h = time_difference_histogram(
            start_det, stop_det, lo_ps=-5000, hi_ps=5000, bin_width_ps=bin_w
        )
        peak_bin = int(np.argmax(h.counts))
        # true pairs sit at zero delay
        assert h.edges_ps[peak_bin] <= 0 <= h.edges_ps[peak_bin + 1]
        off_peak = np.r_[h.counts[: peak_bin - 1], h.counts[peak_bin + 2 :]]
        assert h.counts[peak_bin] > 10 * max(off_peak.mean(), 1)
        # accidental floor: stop rate x bin width x number of starts
        stop_rate = len(stop_det) / duration
        floor = stop_rate * bin_w * len(start_det)
        assert 0.4 * floor < off_peak.mean() < 1.2 * floor
