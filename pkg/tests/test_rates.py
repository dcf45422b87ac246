import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfrl.categorical import CategoricalDistribution, DomainError, TimePoint, substream
from gfrl.rates import (
    Provenance,
    analytical_rate,
    conditional_rate,
    conditional_rate_rows,
    precompute_stats,
    rate_row,
    rate_rows,
    transition_row,
    transition_rows,
)


def dist(*w):
    w = np.asarray(w, dtype=float)
    return CategoricalDistribution(w / w.sum())


def random_simplex(rng, s):
    w = rng.random(s) + 0.05
    return CategoricalDistribution(w / w.sum())


class TestConditionalRate:
    def test_toward_clean_label_uniform(self):
        # numerator 1, denominator 2 * 0.5 * 0.5
        r = conditional_rate(0, 1, 1, 0.5, dist(0.5, 0.5))
        assert r == pytest.approx(2.0, abs=1e-12)

    def test_rectifier_kills_flow_out_of_clean_state(self):
        r = conditional_rate(0, 1, 0, 0.5, dist(0.5, 0.3, 0.2))
        assert r == 0.0

    def test_prior_correction_case(self):
        # clean label elsewhere: ReLU(p0[cur] - p0[target]) / (S (1-t) p0[cur])
        r = conditional_rate(0, 1, 2, 0.5, dist(0.5, 0.3, 0.2))
        assert r == pytest.approx(0.2 / 0.75, abs=1e-12)

    def test_rejects_t_at_one(self):
        with pytest.raises(DomainError):
            conditional_rate(0, 1, 1, 1.0, dist(0.5, 0.5))

    def test_rejects_diagonal(self):
        with pytest.raises(DomainError):
            conditional_rate(1, 1, 0, 0.5, dist(0.5, 0.5))

    def test_vectorized_rows_match_scalar(self):
        rng = substream(11)
        prior = random_simplex(rng, 4)
        cur = rng.integers(0, 4, size=32)
        z1 = rng.integers(0, 4, size=32)
        rows = conditional_rate_rows(z1, cur, 0.37, prior)
        for r in range(32):
            for y in range(4):
                if y == cur[r]:
                    assert rows[r, y] == 0.0
                else:
                    assert rows[r, y] == pytest.approx(
                        conditional_rate(int(cur[r]), y, int(z1[r]), 0.37, prior), abs=1e-12
                    )


class TestPrecomputeStats:
    def test_uniform_prior(self):
        stats = precompute_stats(CategoricalDistribution.uniform(4), 0.5)
        off = ~np.eye(4, dtype=bool)
        # S * p0 = 1, so the direct coefficient reduces to 1/(1-t)
        assert np.allclose(stats.direct[off], 2.0, atol=1e-12)
        assert np.allclose(stats.residual, 0.0, atol=1e-15)

    def test_nonuniform_entries(self):
        stats = precompute_stats(dist(0.5, 0.3, 0.2), 0.5)
        assert stats.direct[0, 1] == pytest.approx(1.6, abs=1e-12)
        assert stats.residual[0, 1] == pytest.approx(0.2 / 0.75, abs=1e-9)

    def test_residual_diagonal_is_zero(self):
        stats = precompute_stats(dist(0.4, 0.35, 0.25), 0.3)
        assert np.all(np.diag(stats.residual) == 0.0)


class TestAnalyticalRate:
    def test_worked_example(self):
        prior = dist(0.5, 0.3, 0.2)
        ptheta = dist(0.2, 0.5, 0.3)
        r = analytical_rate(0, 1, ptheta, 0.5, prior)
        assert r == pytest.approx(0.88, abs=1e-12)

    def test_uniform_prior_direct_term_only(self):
        r = analytical_rate(0, 1, dist(0.3, 0.7), 0.5, CategoricalDistribution.uniform(2))
        assert r == pytest.approx(1.4, abs=1e-12)

    def test_confident_self_prediction_freezes(self):
        prior = dist(0.5, 0.3, 0.2)
        r = analytical_rate(0, 1, CategoricalDistribution.onehot(3, 0), 0.5, prior)
        assert r == pytest.approx(0.0, abs=1e-15)

    @settings(max_examples=100, deadline=None)
    @given(
        s=st.integers(2, 6),
        t=st.floats(0.05, 0.95),
        seed=st.integers(0, 10_000),
    )
    def test_equals_expectation_over_clean_labels(self, s, t, seed):
        rng = substream(seed)
        prior = random_simplex(rng, s)
        ptheta = random_simplex(rng, s)
        stats = precompute_stats(prior, t)
        for zt in range(s):
            for zv in range(s):
                if zv == zt:
                    continue
                expect = sum(
                    ptheta[z1] * conditional_rate(zt, zv, z1, t, prior) for z1 in range(s)
                )
                have = analytical_rate(zt, zv, ptheta, t, prior, stats)
                assert have == pytest.approx(expect, abs=1e-9)


class TestTransitionRow:
    def test_worked_example(self):
        prior = dist(0.5, 0.3, 0.2)
        ptheta = dist(0.2, 0.5, 0.3)
        row = transition_row(0, ptheta, TimePoint(0.5, 0.1), prior)
        assert np.allclose(row.probs.probs, [0.84, 0.088, 0.072], atol=1e-12)
        assert row.provenance is Provenance.ANALYTICAL
        assert not row.saturated

    def test_vanishing_step_is_identity(self):
        prior = dist(0.5, 0.3, 0.2)
        ptheta = dist(0.2, 0.5, 0.3)
        row = transition_row(0, ptheta, TimePoint(0.5, 1e-12), prior)
        assert row.probs[0] == pytest.approx(1.0, abs=1e-9)

    def test_conditional_mc_with_point_mass_prediction(self):
        prior = dist(0.5, 0.3, 0.2)
        tp = TimePoint(0.5, 0.1)
        row = transition_row(
            0,
            CategoricalDistribution.onehot(3, 2),
            tp,
            prior,
            mode=Provenance.CONDITIONAL_MC,
            rng=substream(0),
        )
        expected = np.zeros(3)
        for y in (1, 2):
            expected[y] = conditional_rate(0, y, 2, 0.5, prior) * 0.1
        expected[0] = 1 - expected.sum()
        assert np.allclose(row.probs.probs, expected, atol=1e-12)
        assert row.provenance is Provenance.CONDITIONAL_MC

    def test_saturation_renormalizes_onto_jumps(self):
        prior = dist(0.5, 0.3, 0.2)
        ptheta = dist(0.2, 0.5, 0.3)
        row = transition_row(0, ptheta, TimePoint(0.5, 0.5), prior)
        # naive off-diagonal mass would be (0.88 + 0.72) * 0.5 = 0.8 -> no
        # saturation; push t closer to 1 where rates blow up
        assert not row.saturated
        row2 = transition_row(0, ptheta, TimePoint(0.98, 0.02), prior)
        assert row2.probs[0] == 0.0 if row2.saturated else row2.probs[0] >= 0.0
        assert abs(row2.probs.probs.sum() - 1.0) < 1e-9

    @settings(max_examples=80, deadline=None)
    @given(
        s=st.integers(2, 6),
        tk=st.integers(0, 49),
        seed=st.integers(0, 10_000),
    )
    def test_rows_are_stochastic(self, s, tk, seed):
        rng = substream(seed)
        prior = random_simplex(rng, s)
        ptheta = random_simplex(rng, s)
        tp = TimePoint(tk / 50, 1 / 50)
        for zt in range(s):
            row = transition_row(zt, ptheta, tp, prior)
            p = row.probs.probs
            assert np.all(p >= 0) and np.all(p <= 1 + 1e-12)
            assert abs(p.sum() - 1.0) < 1e-9

    def test_mc_rows_converge_to_analytical(self):
        # empirical mean over pseudo-label draws approaches the closed form
        rng = substream(2024)
        prior = dist(0.4, 0.35, 0.25)
        ptheta = dist(0.2, 0.5, 0.3)
        tp = TimePoint(0.5, 0.02)
        target = transition_row(0, ptheta, tp, prior).probs.probs
        n = 100_000
        counts = rng.multinomial(n, ptheta.probs)
        acc = np.zeros(3)
        for z1, c in enumerate(counts):
            if c == 0:
                continue
            rates = conditional_rate_rows(np.array([z1]), np.array([0]), tp.t, prior)
            probs, _ = transition_rows(rates, np.array([0]), tp.dt)
            acc += c * probs[0]
        acc /= n
        assert np.max(np.abs(acc - target)) < 0.01


class TestKolmogorovConsistency:
    def test_one_euler_step_preserves_the_marginal(self):
        # evolving the exact marginal one step under the exact conditional
        # rates reproduces the next marginal (the path is linear in t, so the
        # error is bounded by C * dt^2 and in fact sits at float precision)
        rng = substream(5)
        for s, z1 in [(3, 0), (4, 2), (6, 5)]:
            prior = random_simplex(rng, s)
            for dt in (0.1, 0.05, 0.025):
                for t in (0.0, 0.3, 0.7):
                    p_t = (1 - t) * prior.probs.copy()
                    p_t[z1] += t
                    rates = conditional_rate_rows(
                        np.full(s, z1), np.arange(s), t, prior
                    )
                    np.fill_diagonal(rates, 0.0)
                    gen = rates - np.diag(rates.sum(axis=1))
                    stepped = p_t + dt * (gen.T @ p_t)
                    p_next = (1 - t - dt) * prior.probs.copy()
                    p_next[z1] += t + dt
                    err = 0.5 * np.abs(stepped - p_next).sum()
                    assert err <= 1.0 * dt**2


class TestDifferentiability:
    def test_transition_probs_linear_in_prediction(self):
        # off-diagonal entries are affine in the prediction row with
        # coefficients read straight from the stats tables
        rng = substream(9)
        prior = random_simplex(rng, 4)
        stats = precompute_stats(prior, 0.4)
        p = random_simplex(rng, 4).probs
        dp = rng.normal(size=4) * 1e-6
        dp -= dp.mean()  # stay on the simplex tangent
        base = rate_rows(p[None, :], np.array([1]), stats)[0]
        moved = rate_rows((p + dp)[None, :], np.array([1]), stats)[0]
        for y in range(4):
            if y == 1:
                continue
            predicted = (
                dp[y] * (stats.direct[1, y] - stats.residual[1, y])
                - dp[1] * stats.residual[1, y]
            )
            assert moved[y] - base[y] == pytest.approx(predicted, rel=1e-6, abs=1e-15)
