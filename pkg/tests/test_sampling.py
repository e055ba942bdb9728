import math

import numpy as np
import pytest
from scipy import stats

from phasefit import (
    Branch,
    SamplerState,
    cdf,
    empirical_check,
    exponential_model,
    fit_two_moments,
    new_model,
    sample,
    sample_exponential,
    sample_n,
    split_seeds,
)
from phasefit.errors import InsufficientData, NonPositiveRate


class TestSamplerState:
    def test_identical_seed_identical_stream(self):
        a, b = SamplerState(123), SamplerState(123)
        assert a.uniforms(1000).tolist() == b.uniforms(1000).tolist()

    def test_uniforms_never_zero(self):
        s = SamplerState(0)
        us = s.uniforms(1_000_000)
        assert np.all(us > 0.0) and np.all(us <= 1.0)

    def test_counter_tracks_draws(self):
        s = SamplerState(0)
        s.uniform()
        s.uniforms(10)
        assert s.counter == 11

    def test_split_seeds_distinct(self):
        states = split_seeds(7, 4)
        streams = [tuple(s.uniforms(50)) for s in states]
        assert len(set(streams)) == 4


class TestSampleExponential:
    def test_inverse_transform_value(self):
        # U = e^{-1} at rate 2 gives exactly 0.5
        class Fixed(SamplerState):
            def uniform(self):
                return math.exp(-1)

        assert sample_exponential(Fixed(0), 2.0) == pytest.approx(0.5)

    def test_u_one_gives_zero(self):
        class Fixed(SamplerState):
            def uniform(self):
                return 1.0

        assert sample_exponential(Fixed(0), 2.0) == 0.0

    def test_clt_mean(self):
        s = SamplerState(11)
        xs = np.array([sample_exponential(s, 3.0) for _ in range(100_000)])
        assert abs(xs.mean() - 1 / 3) <= 4 * (1 / 3) / math.sqrt(100_000)

    def test_nonpositive_rate(self):
        with pytest.raises(NonPositiveRate):
            sample_exponential(SamplerState(0), 0.0)


class TestSample:
    def test_instantaneous_model_always_zero(self):
        m = new_model([Branch(1.0, ())])
        s = SamplerState(1)
        assert all(sample(m, s) == 0.0 for _ in range(100))

    def test_all_draws_nonnegative_and_zero_iff_instantaneous(self):
        m = new_model([Branch(0.4, (0.4,)), Branch(0.6, ())])
        s = SamplerState(2)
        xs = [sample(m, s) for _ in range(10_000)]
        assert all(x >= 0.0 for x in xs)
        zeros = sum(1 for x in xs if x == 0.0)
        assert 0 < zeros < len(xs)

    def test_erlang2_empirical_moments(self):
        m = new_model([Branch(1.0, (2.0, 2.0))])
        xs = sample_n(m, SamplerState(3), 200_000)
        assert xs.mean() == pytest.approx(1.0, abs=4 * math.sqrt(0.5 / 200_000))
        assert xs.var() == pytest.approx(0.5, abs=0.02)

    def test_determinism(self):
        m = fit_two_moments(1.0, 4.0).model
        xs = sample_n(m, SamplerState(4), 1000)
        ys = sample_n(m, SamplerState(4), 1000)
        assert xs.tolist() == ys.tolist()

    def test_branch_frequencies(self):
        from phasefit.sampling import _pick_branch

        probs = [0.2, 0.5, 0.3]
        m = new_model([Branch(p, (1.0,)) for p in probs])
        n = 1_000_000
        s = SamplerState(5)
        us = s.uniforms(n)
        picks = np.array([_pick_branch(m, u) for u in us])
        for j, p in enumerate(probs):
            freq = float(np.mean(picks == j))
            se = math.sqrt(p * (1 - p) / n)
            assert abs(freq - p) <= 4 * se

    def test_atom_selection_frequency(self):
        n = 1_000_000
        m = new_model([Branch(0.25, ()), Branch(0.75, (1.0,))])
        xs = sample_n(m, SamplerState(6), n)
        freq = float(np.mean(xs == 0.0))
        se = math.sqrt(0.25 * 0.75 / n)
        assert abs(freq - 0.25) <= 4 * se


class TestEmpiricalCheck:
    def test_fitted_hypo_passes(self):
        m = fit_two_moments(1.0, 0.4).model
        rep = empirical_check(m, 1_000_000, seed=10)
        assert rep.passed
        assert 0.9975 <= rep.sample_mean <= 1.0025

    def test_zero_fraction_matches_atom(self):
        m = fit_two_moments(1.0, 4.0).model
        rep = empirical_check(m, 1_000_000, seed=11)
        assert rep.passed
        assert abs(rep.zero_fraction - 0.6) <= 0.002

    def test_corrupted_model_fails(self):
        good = fit_two_moments(1.0, 0.4).model
        bad = new_model([Branch(1.0, tuple(r / 2 for r in good.branches[0].rates))])
        rep = empirical_check(bad, 100_000, seed=12)
        analytic_of_good = 1.0
        assert abs(rep.sample_mean - analytic_of_good) > 4 * rep.se_mean

    def test_small_n_rejected(self):
        with pytest.raises(InsufficientData):
            empirical_check(exponential_model(1.0), 1, seed=0)


def test_ks_continuous_part():
    m = fit_two_moments(1.0, 4.0).model
    xs = sample_n(m, SamplerState(13), 100_000)
    positive = xs[xs > 0.0]
    atom = m.atom_weight
    cond_cdf = lambda t: (cdf(m, np.asarray(t, dtype=float)) - atom) / (1 - atom)
    res = stats.kstest(positive, cond_cdf)
    assert res.pvalue > 0.001
