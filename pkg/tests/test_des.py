import math

import numpy as np
import pytest

from phasefit import (
    Branch,
    EventCalendar,
    MomentSummary,
    SamplerState,
    exponential_model,
    fit_two_moments,
    new_model,
    pk_mean_wait,
    run_mph1,
    sample,
    summarize,
)
from phasefit.errors import UnstableSystem, UnstableSystemWarning


class TestEventCalendar:
    def test_instantaneous_model_fires_now(self):
        cal = EventCalendar(SamplerState(0))
        t = cal.schedule(new_model([Branch(1.0, ())]), "a")
        assert t == cal.clock == 0.0

    def test_fifo_on_equal_times(self):
        cal = EventCalendar(SamplerState(0))
        cal.schedule_at(1.0, "first")
        cal.schedule_at(1.0, "second")
        cal.schedule_at(0.5, "early")
        assert [cal.pop()[1] for _ in range(3)] == ["early", "first", "second"]

    def test_clock_monotone(self):
        cal = EventCalendar(SamplerState(1))
        m = exponential_model(1.0)
        for i in range(50):
            cal.schedule(m, i)
        prev = 0.0
        while len(cal):
            t, _ = cal.pop()
            assert t >= prev
            prev = t

    def test_schedule_reproduces_sampler_sequence(self):
        m = exponential_model(2.0)
        cal = EventCalendar(SamplerState(42))
        times = [cal.schedule(m, i) for i in range(10)]
        ref_state = SamplerState(42)
        expected = [sample(m, ref_state) for _ in range(10)]
        assert times == pytest.approx(expected)


class TestPkMeanWait:
    def test_mm1_value(self):
        s = MomentSummary.from_mean_var(0.5, 0.25)
        assert pk_mean_wait(1.0, s) == pytest.approx(0.5)

    def test_hyper_value(self):
        s = MomentSummary.from_mean_var(0.5, 1.0)
        assert pk_mean_wait(1.0, s) == pytest.approx(1.25)

    def test_zero_arrival_rate(self):
        s = MomentSummary.from_mean_var(0.5, 0.25)
        assert pk_mean_wait(0.0, s) == 0.0

    def test_unstable_rejected(self):
        s = MomentSummary.from_mean_var(1.0, 1.0)
        with pytest.raises(UnstableSystem):
            pk_mean_wait(1.0, s)


class TestRunMph1:
    def test_no_arrivals(self):
        stats = run_mph1(0.0, exponential_model(1.0), n_customers=100, seed=0)
        assert stats.n_served == 0
        assert stats.mean_wait == 0.0

    def test_mm1_matches_pk(self):
        service = exponential_model(2.0)  # mean 0.5
        stats = run_mph1(1.0, service, n_customers=200_000, seed=1)
        expected = pk_mean_wait(1.0, summarize(service))
        assert abs(stats.mean_wait - expected) <= 3 * stats.se_wait
        assert 0.4 < stats.utilization < 0.6
        assert stats.stable

    def test_hyper_service_matches_pk(self):
        service = fit_two_moments(0.5, 1.0).model
        stats = run_mph1(1.0, service, n_customers=200_000, seed=2)
        expected = pk_mean_wait(1.0, summarize(service))  # 1.25
        assert expected == pytest.approx(1.25, rel=1e-12)
        assert abs(stats.mean_wait - expected) <= 3 * stats.se_wait

    def test_system_time_exceeds_wait(self):
        service = exponential_model(2.0)
        stats = run_mph1(0.6, service, n_customers=50_000, seed=3)
        assert stats.mean_system_time > stats.mean_wait

    def test_unstable_warns_but_returns(self):
        with pytest.warns(UnstableSystemWarning):
            stats = run_mph1(3.0, exponential_model(2.0), n_customers=5_000, seed=4)
        assert not stats.stable
        assert stats.n_served == 5_000

    def test_deterministic_given_seed(self):
        service = fit_two_moments(0.5, 0.1).model
        a = run_mph1(0.6, service, n_customers=10_000, seed=5)
        b = run_mph1(0.6, service, n_customers=10_000, seed=5)
        assert a == b
