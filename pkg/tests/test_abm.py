import dataclasses
import math

import numpy as np
import pytest

from critmarkets import abm, sdt
from critmarkets.games import SDTParams


def config(**overrides):
    base = dict(n_agents=100, horizon=500, j=1.0, xi=1.5, z=0.1, beta=0.05, seed=7)
    base.update(overrides)
    return abm.ABMConfig(**base)


class TestConfig:
    @pytest.mark.parametrize(
        "field, value",
        [
            ("n_agents", 1),
            ("horizon", 0),
            ("xi", -0.5),
            ("z", -0.1),
            ("x0", 1.5),
            ("price_rule", "momentum"),
        ],
    )
    def test_invalid_values_name_the_field(self, field, value):
        with pytest.raises(ValueError, match=field):
            config(**{field: value})

    def test_replaced_returns_modified_copy(self):
        base = config()
        other = abm.replaced(base, seed=99)
        assert other.seed == 99 and base.seed == 7
        assert dataclasses.replace(base, seed=99) == other


class TestInitialState:
    def test_x0_rounded_to_nearest_representable(self):
        state = abm.initial_state(config(n_agents=8, x0=0.25))
        assert state.x == 0.25
        state = abm.initial_state(config(n_agents=10, x0=0.0))
        assert state.x == 0.0

    def test_choices_are_signs(self):
        state = abm.initial_state(config(n_agents=10, x0=0.2))
        assert set(np.unique(state.choices)) <= {-1, 1}
        assert state.choices.dtype == np.int8


class TestRun:
    def test_aggregation_identity_exact(self):
        history = abm.run(config(n_agents=97, horizon=300, x0=-0.3))
        assert np.array_equal(history.choices.mean(axis=1), history.x[1:])

    def test_deterministic_per_seed(self):
        a = abm.run(config())
        b = abm.run(config())
        assert np.array_equal(a.p, b.p)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.choices, b.choices)

    def test_different_seeds_differ(self):
        a = abm.run(config())
        b = abm.run(config(seed=8))
        assert not np.array_equal(a.x, b.x)

    def test_lengths(self):
        history = abm.run(config(horizon=250))
        assert history.p.shape == history.x.shape == (251,)
        assert history.choices.shape == (250, 100)

    def test_store_choices_off(self):
        history = abm.run(config(store_choices=False))
        assert history.choices is None
        assert "mean_abs_x" in history.summary()

    def test_price_accumulates_beta_times_demand(self):
        history = abm.run(config(z=0.0, beta=0.3))
        increments = np.diff(history.p)
        assert np.abs(increments - 0.3 * history.x[1:]).max() < 1e-12

    def test_asynchronous_mode_keeps_identity(self):
        history = abm.run(config(synchronous=False, n_agents=40, horizon=100))
        assert np.array_equal(history.choices.mean(axis=1), history.x[1:])

    def test_async_and_sync_modes_differ(self):
        sync = abm.run(config(xi=2.0, j=1.0, z=0.0, beta=0.0, x0=0.0))
        async_ = abm.run(config(xi=2.0, j=1.0, z=0.0, beta=0.0, x0=0.0, synchronous=False))
        assert not np.array_equal(sync.x, async_.x)


class TestPriceRules:
    def test_static_rule_ignores_price_history(self):
        # with J = 0 and static expectations the field is identically zero
        history = abm.run(config(j=0.0, xi=5.0, beta=0.4, z=0.0, horizon=2000))
        assert abs(history.x[1:].mean()) < 0.05

    def test_trend_rule_feeds_back(self):
        static = abm.run(config(price_rule="static", beta=0.5, z=0.0, horizon=400))
        trend = abm.run(config(price_rule="trend", beta=0.5, z=0.0, horizon=400))
        assert not np.array_equal(static.x, trend.x)

    def test_trend_rule_amplifies_drift(self):
        # strong trend following with beta > 0 locks onto one sign
        history = abm.run(
            config(price_rule="trend", j=0.5, xi=3.0, beta=0.8, z=0.0, x0=0.1, horizon=2000)
        )
        assert abs(history.x[-500:].mean()) > 0.9


class TestMeanFieldAgreement:
    def test_supercritical_centers_on_sdt_equilibrium(self):
        cfg = config(n_agents=1000, horizon=4000, j=1.0, xi=2.0, z=0.0, beta=0.0, x0=0.2,
                     store_choices=False)
        history = abm.run(cfg)
        target = sdt.equilibria(SDTParams(0, 0, 0, 1.0, 2.0)).stable_points()[:, 0].max()
        tail = history.x[1000:]
        blocks = tail[: len(tail) // 100 * 100].reshape(-1, 100).mean(axis=1)
        se = blocks.std(ddof=1) / math.sqrt(len(blocks))
        assert abs(tail.mean() - target) < 3 * se + 1e-4

    def test_subcritical_hovers_near_zero(self):
        cfg = config(n_agents=1000, horizon=4000, j=1.0, xi=0.5, z=0.0, beta=0.0, x0=0.0,
                     store_choices=False)
        history = abm.run(cfg)
        assert abs(history.x.mean()) < 0.02

    def test_mean_field_map_matches_expected_update(self):
        cfg = config(j=0.8, xi=1.4)
        m = abm.mean_field_map(cfg)
        assert m(0.3) == pytest.approx(np.tanh(1.4 * 0.8 * 0.3), abs=1e-14)


class TestMartingale:
    def test_price_increments_iid_normal_when_decoupled(self):
        cfg = config(n_agents=100, horizon=8000, j=0.0, xi=0.0, z=0.02, beta=0.0,
                     store_choices=False)
        history = abm.run(cfg)
        increments = np.diff(history.p)
        from scipy.stats import normaltest

        _, p_value = normaltest(increments)
        assert p_value > 0.005
        lag1 = np.corrcoef(increments[:-1], increments[1:])[0, 1]
        assert abs(lag1) < 3.0 / math.sqrt(len(increments))
        assert increments.std() == pytest.approx(cfg.z, rel=0.05)


class TestSummary:
    def test_dwell_fractions_cover_supercritical_run(self):
        cfg = config(n_agents=500, horizon=2000, j=1.0, xi=2.0, z=0.0, beta=0.0, x0=0.2)
        summary = abm.run(cfg).summary()
        assert set(summary) == {"mean_abs_x", "price_volatility", "dwell_fractions"}
        fractions = summary["dwell_fractions"]
        assert len(fractions) == 2
        assert max(fractions.values()) > 0.95
        assert sum(fractions.values()) <= 1.0
