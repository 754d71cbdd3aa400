import math

import numpy as np
import pytest

from critmarkets import cusp
from oracles import real_cubic_roots, simpson_mass


class TestRoots:
    def test_matches_companion_matrix_oracle(self, rng):
        for _ in range(2000):
            control = cusp.CuspControl(float(rng.uniform(-3, 4)), float(rng.uniform(-3, 3)))
            if cusp.classify_region(control) is cusp.Region.CRITICAL:
                continue
            mine = cusp.stationary_points(control).values
            oracle = real_cubic_roots(control.u1, control.u2)
            assert len(mine) == len(oracle)
            assert np.abs(np.sort(mine) - oracle).max() < 1e-7

    def test_three_two_example(self):
        points = cusp.stationary_points(cusp.CuspControl(3.0, 2.0))
        # the double root at -1 is reported once, flagged critical
        assert np.abs(np.sort(points.values) - [-1.0, 2.0]).max() < 1e-9
        by_value = dict(zip(np.round(points.values, 6), points.stability))
        assert by_value[-1.0] == "critical"
        assert by_value[2.0] == "stable"

    def test_pitchfork_triple(self):
        points = cusp.stationary_points(cusp.CuspControl(1.0, 0.0))
        assert np.abs(np.sort(points.values) - [-1.0, 0.0, 1.0]).max() < 1e-12
        assert points.stability == ("stable", "unstable", "stable")

    def test_origin_single_root(self):
        points = cusp.stationary_points(cusp.CuspControl(0.0, 0.0))
        assert points.count == 1 and points.values[0] == 0.0

    def test_drift_is_negative_potential_gradient(self, rng):
        control = cusp.CuspControl(1.3, -0.4)
        step = 1e-6
        for x in rng.uniform(-2, 2, 20):
            fd = (cusp.potential(control, x + step) - cusp.potential(control, x - step)) / (2 * step)
            assert cusp.drift(control, x) == pytest.approx(-fd, abs=1e-7)


class TestRegions:
    def test_discriminant_sign_matches_count(self, rng):
        for _ in range(10_000):
            control = cusp.CuspControl(float(rng.uniform(-3, 4)), float(rng.uniform(-3, 3)))
            region = cusp.classify_region(control)
            count = cusp.stationary_points(control).count
            if region is cusp.Region.A:
                assert count == 1
            elif region is cusp.Region.B:
                assert count == 3

    def test_boundary_identity(self):
        line = cusp.critical_boundary(3.0, 401)
        rel = np.abs(4 * line[:, 0] ** 3 - 27 * line[:, 1] ** 2)
        rel /= np.maximum(1.0, 27 * line[:, 1] ** 2)
        assert rel.max() < 1e-10

    def test_boundary_points_classify_critical(self):
        for u1 in (0.5, 1.0, 2.0):
            u2 = math.sqrt(4 * u1**3 / 27)
            assert cusp.classify_region(cusp.CuspControl(u1, u2)) is cusp.Region.CRITICAL

    def test_fold_pair_at_unit_u1(self):
        u2_star = math.sqrt(4.0 / 27.0)
        assert cusp.classify_region(cusp.CuspControl(1.0, u2_star - 1e-4)) is cusp.Region.B
        assert cusp.classify_region(cusp.CuspControl(1.0, u2_star + 1e-4)) is cusp.Region.A
        assert u2_star == pytest.approx(0.3849001794597505, abs=1e-15)

    def test_negative_u1_always_single(self, rng):
        for _ in range(100):
            control = cusp.CuspControl(float(-rng.uniform(0.01, 3)), float(rng.uniform(-2, 2)))
            assert cusp.classify_region(control) is cusp.Region.A

    def test_boundary_polyline_is_ordered(self):
        line = cusp.critical_boundary(2.0, 201)
        gaps = np.abs(np.diff(line, axis=0)).max(axis=1)
        assert gaps.max() < 0.1


class TestStationaryDensity:
    def test_normalization_against_simpson(self):
        density = cusp.StationaryDensity(cusp.CuspControl(1.0, 0.05), xi=6.0)
        mass = simpson_mass(density.pdf, -density.half_width, density.half_width, n=40_001)
        assert mass == pytest.approx(1.0, abs=1e-6)
        assert density.normalization_check() == pytest.approx(1.0, abs=1e-8)

    def test_modes_sit_on_stable_roots(self):
        control = cusp.CuspControl(3.0, 0.4)
        density = cusp.StationaryDensity(control, xi=5.0)
        points = cusp.stationary_points(control)
        stable = np.sort(points.stable_points()[:, 0])
        assert np.abs(np.sort(density.modes()) - stable).max() < 1e-3

    def test_equal_heights_when_symmetric(self):
        density = cusp.StationaryDensity(cusp.CuspControl(3.0, 0.0), xi=4.0)
        modes = np.sort(density.modes())
        assert modes[0] == pytest.approx(-modes[1], abs=1e-9)
        heights = density.pdf(modes)
        assert heights[0] == pytest.approx(heights[1], rel=1e-9)

    def test_density_minimum_at_unstable_root(self):
        control = cusp.CuspControl(2.0, 0.3)
        density = cusp.StationaryDensity(control, xi=6.0)
        points = cusp.stationary_points(control)
        unstable = [v for v, s in zip(points.values, points.stability) if s == "unstable"]
        xs = np.linspace(min(points.values), max(points.values), 2001)
        trough = xs[np.argmin(density.pdf(xs))]
        assert trough == pytest.approx(unstable[0], abs=5e-3)

    def test_pdf_zero_outside_support(self):
        density = cusp.StationaryDensity(cusp.CuspControl(-1.0, 0.0), xi=8.0)
        assert density.pdf(density.half_width + 1.0) == 0.0

    def test_bin_mass_accumulates_to_one(self):
        density = cusp.StationaryDensity(cusp.CuspControl(1.0, 0.0), xi=4.0)
        edges = np.linspace(-density.half_width, density.half_width, 21)
        total = sum(density.bin_mass(a, b) for a, b in zip(edges[:-1], edges[1:]))
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_sharper_noise_concentrates_mass(self):
        control = cusp.CuspControl(-1.0, 0.0)
        wide = cusp.StationaryDensity(control, xi=2.0)
        narrow = cusp.StationaryDensity(control, xi=20.0)
        assert narrow.bin_mass(-0.3, 0.3) > wide.bin_mass(-0.3, 0.3)

    def test_invalid_xi_rejected(self):
        with pytest.raises(ValueError):
            cusp.StationaryDensity(cusp.CuspControl(1.0, 0.0), xi=0.0)


class TestSDE:
    def test_deterministic_per_seed(self):
        control = cusp.CuspControl(-1.0, 0.0)
        a = cusp.simulate_sde(control, sigma=0.5, dt=0.01, steps=5_000, seed=3)
        b = cusp.simulate_sde(control, sigma=0.5, dt=0.01, steps=5_000, seed=3)
        assert np.array_equal(a, b)
        assert a.shape == (5_001,)

    def test_histogram_tracks_analytic_density(self):
        control = cusp.CuspControl(-1.0, 0.0)
        sigma = 0.5
        density = cusp.StationaryDensity(control, xi=2.0 / sigma**2)
        path = cusp.simulate_sde(control, sigma=sigma, dt=0.02, steps=200_000, seed=11)
        assert cusp.trajectory_density_tv(path, density) < 0.05

    def test_oversized_step_warns(self):
        control = cusp.CuspControl(1.0, 0.0)
        with pytest.warns(RuntimeWarning):
            cusp.simulate_sde(control, sigma=0.1, dt=2.0, steps=10, seed=0, x0=3.0)

    def test_noise_matches_effective_temperature(self):
        # the stationary law depends on sigma only through xi = 2/sigma^2
        control = cusp.CuspControl(-0.5, 0.0)
        path = cusp.simulate_sde(control, sigma=0.7, dt=0.01, steps=200_000, seed=21)
        density = cusp.StationaryDensity(control, xi=2.0 / 0.7**2)
        assert cusp.trajectory_density_tv(path, density) < 0.05


class TestGradientMap:
    def test_fixed_points_are_stationary(self):
        control = cusp.CuspControl(1.5, 0.1)
        problem = cusp.gradient_map_problem(control)
        from critmarkets.fixedpoint import find_all

        found = find_all(problem)
        roots = np.sort(cusp.stationary_points(control).values)
        assert np.abs(np.sort(found.points[:, 0]) - roots).max() < 1e-8
