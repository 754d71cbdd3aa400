import numpy as np
import pytest

from critmarkets import qre, twin
from critmarkets.games import TSPoint, ts_game


@pytest.fixture
def coupled(chicken):
    return twin.CoupledMarkets(chicken, xi1=4.0, xi2=3.0)


def descending_sweep(coupled, step=0.01):
    eqs = twin.joint_equilibria(coupled)
    dying = eqs.points[np.argmax(eqs.points[:, 0])]
    grid = np.arange(4.0, -1e-9, -step)
    return twin.one_sided_sweep(coupled, grid, player=1, start_state=dying)


class TestCoupledMarkets:
    def test_joint_equilibria_reference_point(self, coupled):
        eqs = twin.joint_equilibria(coupled)
        expected = np.array(
            [
                [-0.96276763, 0.99415538],
                [0.2147719, 0.26061044],
                [0.99881194, -0.90466403],
            ]
        )
        assert eqs.count == 3
        assert np.abs(eqs.points - expected).max() < 1e-6
        assert eqs.stability == ("stable", "unstable", "stable")

    def test_with_xi_replaces_one_market(self, coupled):
        moved = coupled.with_xi(1, 2.0)
        assert (moved.xi1, moved.xi2) == (2.0, 3.0)
        assert coupled.xi1 == 4.0

    def test_validation(self, chicken):
        with pytest.raises(ValueError):
            twin.CoupledMarkets(chicken, xi1=-0.1, xi2=1.0)


class TestJacobian:
    def test_matches_finite_differences(self, chicken, rng):
        checked = 0
        while checked < 30:
            markets = twin.CoupledMarkets(chicken, *rng.uniform(0.1, 4.0, 2))
            for point in twin.joint_equilibria(markets).points:
                sens = twin.jacobian(markets, point)
                if sens.near_singular or abs(sens.fold_gap) < 1e-2:
                    continue
                fd = twin.fd_jacobian(markets, point)
                scale = max(1.0, float(np.abs(fd).max()))
                assert np.abs(sens.matrix - fd).max() / scale < 1e-5
                checked += 1

    def test_uncoupled_limit_is_diagonal(self, chicken):
        markets = twin.CoupledMarkets(chicken, xi1=0.0, xi2=0.0)
        sens = twin.jacobian(markets, np.zeros(2))
        assert np.abs(sens.matrix - 0.25 * np.eye(2)).max() < 1e-12
        assert not sens.near_singular

    def test_fold_state_flagged_near_singular(self, chicken):
        cs = qre.critical_set(chicken, xi2_values=[3.0])
        markets = twin.CoupledMarkets(chicken, xi1=float(cs.params[0, 0]), xi2=3.0)
        sens = twin.jacobian(markets, cs.states[0])
        assert sens.near_singular

    def test_rejects_non_equilibrium_state(self, coupled):
        with pytest.raises(ValueError, match="equilibrium"):
            twin.jacobian(coupled, np.array([0.5, 0.5]))


class TestSweeps:
    def test_descending_jump_is_simultaneous(self, coupled):
        result = descending_sweep(coupled)
        assert result.direction == "descending"
        assert result.parameter == "xi1"
        assert len(result.jumps) == 1
        event = result.jumps[0]
        assert abs(event.post_state[0] - event.pre_state[0]) > 0.25
        assert abs(event.post_state[1] - event.pre_state[1]) > 0.25

    def test_jump_location_matches_critical_set(self, chicken, coupled):
        crossing = float(qre.critical_set(chicken, xi2_values=[3.0]).params[0, 0])
        result = descending_sweep(coupled)
        assert result.jumps[0].location == pytest.approx(crossing, abs=5e-4)

    def test_ascending_sweep_stays_on_survivor(self, chicken):
        markets = twin.CoupledMarkets(chicken, xi1=0.0, xi2=3.0)
        grid = np.arange(0.0, 4.0 + 1e-9, 0.01)
        result = twin.one_sided_sweep(markets, grid, player=1)
        assert result.direction == "ascending"
        assert result.jumps == ()

    def test_path_dependence_has_positive_width(self, chicken, coupled):
        down = descending_sweep(coupled)
        markets = twin.CoupledMarkets(chicken, xi1=0.0, xi2=3.0)
        grid = np.arange(0.0, 4.0 + 1e-9, 0.01)
        up = twin.one_sided_sweep(markets, grid, player=1)
        divergence = np.abs(up.states - down.states[::-1]).max(axis=1)
        split = grid[divergence > 0.25]
        assert split.size > 0
        assert split.max() - split.min() > 0.5

    def test_uncoupled_second_market_stays_flat(self, chicken):
        markets = twin.CoupledMarkets(chicken, xi1=0.0, xi2=0.0)
        grid = np.arange(0.0, 4.0 + 1e-9, 0.05)
        result = twin.one_sided_sweep(markets, grid, player=1)
        assert result.jumps == ()
        assert np.abs(result.states[:, 1]).max() == 0.0

    def test_sweeping_market_two(self, chicken):
        markets = twin.CoupledMarkets(chicken, xi1=3.0, xi2=0.0)
        grid = np.arange(0.0, 2.0 + 1e-9, 0.02)
        result = twin.one_sided_sweep(markets, grid, player=2)
        assert result.parameter == "xi2"
        assert result.states.shape == (len(grid), 2)

    def test_start_state_required_when_ambiguous(self, coupled):
        grid = np.arange(4.0, 2.0, -0.05)
        with pytest.raises(ValueError, match="start_state"):
            twin.one_sided_sweep(coupled, grid, player=1)

    def test_grid_validation(self, coupled):
        with pytest.raises(ValueError, match="grid"):
            twin.one_sided_sweep(coupled, np.array([1.0]), player=1)
        with pytest.raises(ValueError, match="player"):
            twin.one_sided_sweep(coupled, np.linspace(0, 1, 5), player=3)

    def test_jump_locations_accessor(self, coupled):
        result = descending_sweep(coupled)
        assert np.array_equal(result.jump_locations, [result.jumps[0].location])


class TestNoMultiplicityGames:
    def test_harmony_coupling_never_jumps(self):
        game = ts_game(TSPoint(0.5, 0.5))
        markets = twin.CoupledMarkets(game, xi1=0.0, xi2=3.0)
        grid = np.arange(0.0, 4.0 + 1e-9, 0.05)
        result = twin.one_sided_sweep(markets, grid, player=1)
        assert result.jumps == ()
