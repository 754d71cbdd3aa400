"""Invariant suites behind the `verify` subcommand.

Each check re-states one contract of the library (round trips, oracle
agreements, limit behavior, conservation identities) and prints a
per-check pass/fail line.  Checks are grouped into suites named after the
modules they exercise; run_suites returns the list of failures so the CLI
can exit nonzero when anything breaks.
"""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from contextlib import redirect_stdout
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.stats import normaltest

from . import abm, cusp, games, logit, qre, sdt, twin
from .fixedpoint import FixedPointProblem, find_all, follow, sweep

Check = tuple[str, str, Callable[[], tuple[bool, str]]]
_CHECKS: list[Check] = []


def _register(suite: str, name: str):
    def wrap(fn):
        _CHECKS.append((suite, name, fn))
        return fn

    return wrap


SUITES = (
    "games",
    "logit",
    "fixedpoint",
    "sdt",
    "qre",
    "cusp",
    "twin",
    "abm",
    "cli",
)


def _random_game(rng: np.random.Generator) -> games.Game2x2:
    v = rng.uniform(-5, 5, 8)
    return games.Game2x2(*v)


# ------------------------------------------------------------------- games


@_register("games", "transform_round_trip")
def _games_round_trip():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        g = _random_game(rng)
        for player in (1, 2):
            z = games.gparams_to_sdt(games.to_gparams(g, player), xi=1.0)
            back = games.sdt_to_payoffs(z, player=player)
            worst = max(worst, float(np.abs(np.asarray(back) - np.asarray(g.payoffs(player))).max()))
    return worst <= 1e-12, f"max payoff error {worst:.2e} over 1000 games"


@_register("games", "expected_utility_bilinear")
def _games_bilinear():
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(500):
        g = _random_game(rng)
        m1, m2 = rng.uniform(-1, 1, 2)
        for player in (1, 2):
            own, other = (m1, m2) if player == 1 else (m2, m1)
            bilinear = games.expected_utility(g, player, own, other)
            p_row = ((1 - m1) / 2, (1 + m1) / 2)
            p_col = ((1 - m2) / 2, (1 + m2) / 2)
            direct = sum(
                p_row[r - 1] * p_col[c - 1] * g.payoff(player, r, c)
                for r in (1, 2)
                for c in (1, 2)
            )
            worst = max(worst, abs(bilinear - direct))
    return worst <= 1e-12, f"max |bilinear - direct| = {worst:.2e}"


@_register("games", "pure_nash_brute_force")
def _games_nash():
    rng = np.random.default_rng(13)
    for _ in range(1000):
        g = _random_game(rng)
        expected = set()
        for r in (1, 2):
            for c in (1, 2):
                ok1 = g.payoff(1, r, c) >= g.payoff(1, 3 - r, c)
                ok2 = g.payoff(2, r, c) >= g.payoff(2, r, 3 - c)
                if ok1 and ok2:
                    expected.add((r, c))
        if games.pure_nash(g) != frozenset(expected):
            return False, f"mismatch on {g}"
    return True, "matches exhaustive deviation check on 1000 games"


@_register("games", "ts_quadrants_and_crossings")
def _games_ts():
    cases = {
        (0.5, 0.5): ("Harmony", {"CC"}),
        (0.5, -0.5): ("StagHunt", {"CC", "DD"}),
        (1.5, 0.5): ("Chicken", {"CD", "DC"}),
        (1.5, -0.5): ("PrisonersDilemma", {"DD"}),
    }
    for (t, s), (name, ne) in cases.items():
        k = games.classify_ts(games.TSPoint(t, s))
        if k.name.value != name or set(k.pure_ne) != ne:
            return False, f"({t},{s}) gave {k.name.value} {set(k.pure_ne)}"
    before = games.classify_ts(games.TSPoint(0.9, 0.5)).pure_ne
    after = games.classify_ts(games.TSPoint(1.1, 0.5)).pure_ne
    if not (before == frozenset({"CC"}) and after == frozenset({"CD", "DC"})):
        return False, "crossing T=1 at S>0 did not swap CC for CD/DC"
    low = games.classify_ts(games.TSPoint(0.5, 0.1)).pure_ne
    high = games.classify_ts(games.TSPoint(0.5, -0.1)).pure_ne
    if not (low == frozenset({"CC"}) and high == frozenset({"CC", "DD"})):
        return False, "crossing S=0 at T<1 did not add DD"
    return True, "four quadrants and both boundary crossings as expected"


@_register("games", "ordinal_consistency")
def _games_ordinal():
    rng = np.random.default_rng(14)
    for _ in range(200):
        g = _random_game(rng)
        m = rng.uniform(-1, 1)
        for player in (1, 2):
            u_minus = games.conditional_payoff(g, player, -1, m)
            u_plus = games.conditional_payoff(g, player, +1, m)
            prefers_plus = u_plus >= u_minus
            if prefers_plus != (u_plus - u_minus >= 0):
                return False, "utility comparison inconsistent with preference"
    return True, "utility order and preference relation agree"


@_register("games", "reference_game_parameters")
def _games_reference():
    g = games.chicken_paper()
    for player in (1, 2):
        gp = games.to_gparams(g, player)
        if (gp.g0, gp.g_self, gp.g_other, gp.g12) != (3.75, 0.25, 2.75, -0.75):
            return False, f"player {player} got {gp}"
    x1, x2 = 0.37, -0.81
    v = games.expected_utility(g, 1, x1, x2)
    ref = 0.25 * (15 + x1 + 11 * x2 - 3 * x1 * x2)
    if abs(v - ref) > 1e-12:
        return False, f"bilinear form off by {abs(v - ref):.2e}"
    z = games.gparams_to_sdt(games.to_gparams(g, 1), xi=1.0)
    back = games.sdt_to_payoffs(z, player=1)
    if tuple(back) != (0.0, 2.0, 7.0, 6.0):
        return False, f"inverse transform gave {back}"
    return True, "coefficients (3.75, 0.25, 2.75, -0.75) and payoffs (0,2,7,6) reproduced"


# ------------------------------------------------------------------- logit


@_register("logit", "monte_carlo_oracle")
def _logit_mc():
    rng = np.random.default_rng(21)
    worst = 0.0
    for _ in range(50):
        n_choices = int(rng.integers(2, 7))
        problem = logit.ChoiceProblem(
            utilities=tuple(rng.uniform(-2, 2, n_choices)),
            xi=float(rng.uniform(0.2, 3.0)),
        )
        analytic = logit.logit_probs(problem)
        empirical = logit.sample_gumbel_argmax(problem, n=1_000_000, seed=int(rng.integers(2**31)))
        worst = max(worst, logit.tv_distance(analytic, empirical))
    return worst < 0.01, f"max TV over 50 problems (n=1e6) = {worst:.4f}"


@_register("logit", "translation_invariance")
def _logit_translation():
    rng = np.random.default_rng(22)
    worst = 0.0
    for _ in range(200):
        v = rng.uniform(-3, 3, int(rng.integers(2, 6)))
        xi = float(rng.uniform(0, 4))
        c = float(rng.uniform(-50, 50))
        p0 = logit.logit_probs(logit.ChoiceProblem(tuple(v), xi))
        p1 = logit.logit_probs(logit.ChoiceProblem(tuple(v + c), xi))
        worst = max(worst, float(np.abs(p0 - p1).max()))
    return worst <= 1e-12, f"max shift effect {worst:.2e}"


@_register("logit", "monotonicity")
def _logit_monotonicity():
    v = [0.3, -0.2, 1.1]
    base = logit.logit_probs(logit.ChoiceProblem(tuple(v), 1.5))
    v[1] += 0.25
    bumped = logit.logit_probs(logit.ChoiceProblem(tuple(v), 1.5))
    return bool(bumped[1] > base[1]), f"p1 {base[1]:.4f} -> {bumped[1]:.4f} after raising V1"


@_register("logit", "limit_cases")
def _logit_limits():
    p_zero = logit.logit_probs(logit.ChoiceProblem((3.0, -1.0, 0.5), 0.0))
    if not np.array_equal(p_zero, np.full(3, 1 / 3)):
        return False, f"xi=0 not exactly uniform: {p_zero}"
    p_sharp = logit.logit_probs(logit.ChoiceProblem((1.0, 0.0), 1000.0))
    if not p_sharp[0] > 1 - 1e-6:
        return False, f"xi=1e3 argmax mass {p_sharp[0]}"
    return True, "xi=0 exactly uniform; xi=1e3 argmax mass > 1-1e-6"


@_register("logit", "closed_forms")
def _logit_closed_forms():
    p = logit.logit_probs(logit.ChoiceProblem((1.0, 0.0), 1.0))
    sigma = 1.0 / (1.0 + math.exp(-1.0))
    if abs(p[0] - sigma) > 1e-12 or abs(p.sum() - 1.0) > 1e-12:
        return False, f"two-choice probs {p}"
    gp = logit.GumbelParams(mu=0.4, gamma=0.7)
    if abs(logit.gumbel_cdf(0.4, gp) - math.exp(-1)) > 1e-12:
        return False, "cdf at the location is not 1/e"
    mass, _ = quad(lambda t: logit.gumbel_pdf(t, gp), -20, 60)
    if abs(mass - 1.0) > 1e-8:
        return False, f"pdf mass {mass}"
    if abs(gp.std - 0.7 * math.pi / math.sqrt(6)) > 1e-12:
        return False, "std is not gamma*pi/sqrt(6)"
    return True, "sigmoid identity, cdf(mu)=1/e, unit pdf mass, scale-std link"


# -------------------------------------------------------------- fixedpoint


def _scan_oracle_1d(fn, n=10_000):
    xs = np.linspace(-1, 1, n)
    f = fn(xs) - xs
    roots = [float(xs[i]) for i in np.flatnonzero(f == 0.0)]
    for i in np.flatnonzero(f[:-1] * f[1:] < 0):
        a, b = xs[i], xs[i + 1]
        fa = f[i]
        for _ in range(80):
            m = 0.5 * (a + b)
            fm = fn(m) - m
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    return np.array(sorted(roots))


def _tanh_problem(c: float) -> FixedPointProblem:
    return FixedPointProblem(
        map=lambda x: np.tanh(c * x),
        jacobian=lambda x: (c * (1 - np.tanh(c * x) ** 2))[..., None],
        dim=1,
    )


@_register("fixedpoint", "oracle_equivalence_1d")
def _fixedpoint_1d():
    found = find_all(_tanh_problem(2.0))
    oracle = _scan_oracle_1d(lambda x: np.tanh(2 * x))
    if found.count != len(oracle):
        return False, f"{found.count} points vs oracle {len(oracle)}"
    err = float(np.abs(found.points[:, 0] - oracle).max())
    ref = np.abs(found.points[:, 0] - np.array([-0.957504, 0.0, 0.957504])).max()
    labels = found.stability
    ok = err < 1e-6 and ref < 1e-5 and labels == ("stable", "unstable", "stable")
    return ok, f"tanh(2x): 3 roots, oracle gap {err:.1e}, middle unstable"


@_register("fixedpoint", "oracle_equivalence_2d")
def _fixedpoint_2d():
    model = qre.QREModel(games.chicken_paper(), 2.5, 2.5)
    problem = qre.fixedpoint_problem(model)
    found = find_all(problem)
    xs = np.linspace(-1, 1, 300)
    grid = np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1)
    res = np.abs(grid - problem.map(grid)).max(axis=-1)
    mins = []
    interior = res[1:-1, 1:-1]
    neighborhood = np.minimum.reduce(
        [res[:-2, 1:-1], res[2:, 1:-1], res[1:-1, :-2], res[1:-1, 2:]]
    )
    for i, j in zip(*np.nonzero((interior <= neighborhood) & (interior < 0.02))):
        x = grid[i + 1, j + 1].copy()
        for _ in range(60):
            jac = np.eye(2) - problem.jacobian(x)
            x = x - np.linalg.solve(jac, x - problem.map(x))
        mins.append(x)
    dedup: list[np.ndarray] = []
    for candidate in mins:
        if not any(np.abs(candidate - d).max() < 1e-6 for d in dedup):
            dedup.append(candidate)
    oracle = np.array(sorted(map(tuple, dedup)))
    if found.count != len(oracle):
        return False, f"solver {found.count} vs scan {len(oracle)}"
    gap = float(np.abs(found.points - oracle).max())
    return gap < 1e-6, f"{found.count} joint points, 300x300 scan gap {gap:.1e}"


@_register("fixedpoint", "stability_dynamics")
def _fixedpoint_stability():
    problem = _tanh_problem(2.0)
    found = find_all(problem)
    for point, label in zip(found.points[:, 0], found.stability):
        x = point + 1e-3
        for _ in range(400):
            x = float(problem.map(np.array([x]))[0])
        if label == "stable" and abs(x - point) > 1e-8:
            return False, f"stable point {point} did not reattract"
        if label == "unstable" and abs(x - point) < 1e-2:
            return False, f"unstable point {point} did not repel"
    return True, "stable points reattract, unstable repel under iteration"


@_register("fixedpoint", "fold_refinement_consistency")
def _fixedpoint_folds():
    family = _tanh_problem
    coarse = sweep(family, np.linspace(0.5, 2.0, 16))
    fine = sweep(family, np.linspace(0.5, 2.0, 151))
    ok = len(fine.folds) >= len(coarse.folds) == 1
    loc = coarse.folds[0].location
    return ok and abs(loc - 1.0) < 1e-5, f"fold at {loc:.6f} (slope condition 1.0), fine grid keeps it"


# --------------------------------------------------------------------- sdt


@_register("sdt", "count_vs_coupling")
def _sdt_counts():
    rng = np.random.default_rng(31)
    for _ in range(100):
        xi = float(rng.uniform(0.1, 3.0))
        j = float(rng.uniform(0.1, 3.0))
        found = sdt.equilibria(games.SDTParams(k=0, h=0, f=0, J=j, xi=xi))
        oracle = _scan_oracle_1d(lambda x, c=xi * j: np.tanh(c * x))
        want = 1 if xi * j <= 1 else (3 if xi * j > 1 + 1e-6 else found.count)
        if found.count != want or abs(found.count - len(oracle)) > 0:
            return False, f"xi*J={xi*j:.3f}: count {found.count}, oracle {len(oracle)}"
    return True, "count is 1 for xi*J<=1 and 3 beyond, matching the scan oracle"


@_register("sdt", "odd_symmetry")
def _sdt_symmetry():
    rng = np.random.default_rng(32)
    worst = 0.0
    for _ in range(50):
        xi, j = rng.uniform(0.2, 3.0, 2)
        values = sdt.equilibria(games.SDTParams(0, 0, 0, float(j), float(xi))).points[:, 0]
        mirrored = np.sort(-values)
        worst = max(worst, float(np.abs(np.sort(values) - mirrored).max()))
    return worst <= 1e-10, f"max asymmetry {worst:.1e}"


@_register("sdt", "field_hysteresis")
def _sdt_hysteresis():
    params = games.SDTParams(k=0, h=0, f=0, J=1.0, xi=2.0)

    def family(h: float) -> FixedPointProblem:
        return sdt.fixedpoint_problem(games.SDTParams(0, h, 0, params.J, params.xi))

    grid_up = np.linspace(-0.6, 0.6, 241)
    up_states, up_jumps = follow(family, grid_up, np.array([-0.98]))
    down_states, down_jumps = follow(family, grid_up[::-1], np.array([0.98]))
    if len(up_jumps) != 1 or len(down_jumps) != 1:
        return False, f"{len(up_jumps)} ascending and {len(down_jumps)} descending jumps"
    h_up, h_down = up_jumps[0].location, down_jumps[0].location
    gap = float(np.abs(up_states - down_states[::-1]).max())
    ok = h_up > 0 > h_down and abs(h_up + h_down) < 1e-3 and gap > 1.0
    return ok, f"folds at h={h_down:.4f} and h={h_up:.4f}, branch gap {gap:.2f}"


@_register("sdt", "choice_prob_vs_logit")
def _sdt_choice_prob():
    rng = np.random.default_rng(33)
    worst = 0.0
    for _ in range(200):
        p = games.SDTParams(*rng.uniform(-2, 2, 4), xi=float(rng.uniform(0, 3)))
        m = float(rng.uniform(-1, 1))
        for value in (-1, 1):
            direct = sdt.choice_prob(p, value, m)
            problem = logit.ChoiceProblem(
                utilities=(sdt.utility(p, -1, m), sdt.utility(p, +1, m)), xi=p.xi
            )
            via_logit = logit.logit_probs(problem)[(value + 1) // 2]
            worst = max(worst, abs(direct - via_logit))
    return worst <= 1e-12, f"max |choice_prob - logit| = {worst:.2e}"


@_register("sdt", "utility_partials")
def _sdt_partials():
    rng = np.random.default_rng(34)
    worst = 0.0
    step = 1e-6
    for _ in range(100):
        p = games.SDTParams(*rng.uniform(-2, 2, 4), xi=1.0)
        own, other = rng.uniform(-0.9, 0.9, 2)
        d_own = (sdt.utility(p, own + step, other) - sdt.utility(p, own - step, other)) / (2 * step)
        d_other = (sdt.utility(p, own, other + step) - sdt.utility(p, own, other - step)) / (2 * step)
        worst = max(worst, abs(d_own - (p.h + p.J * other)), abs(d_other - (p.f + p.J * own)))
    return worst <= 1e-6, f"max partial error {worst:.1e}"


@_register("sdt", "pitchfork_location")
def _sdt_pitchfork():
    worst = 0.0
    for j in (0.5, 1.0, 2.0):
        worst = max(worst, abs(sdt.pitchfork_critical_xi(j) - 1.0 / j))
    return worst <= 1e-6, f"max |xi* - 1/J| = {worst:.1e}"


# --------------------------------------------------------------------- qre


@_register("qre", "critical_set_residuals")
def _qre_critical_residuals():
    game = games.chicken_paper()
    cs = qre.critical_set(game, n_rows=31)
    worst = max(
        abs(qre.fold_residual(game, p[0], p[1], s)) for p, s in zip(cs.params, cs.states)
    )
    return worst < 1e-8 and cs.count > 0, f"{cs.count} points, max residual {worst:.1e}"


@_register("qre", "count_partition")
def _qre_partition():
    rng = np.random.default_rng(41)
    game = games.chicken_paper()
    counts = set()
    for _ in range(400):
        xi1, xi2 = rng.uniform(0, 4, 2)
        n_full = qre.qre_equilibria(qre.QREModel(game, xi1, xi2)).count
        n_scan = int(qre.count_equilibria(game, xi1, xi2))
        if n_full != n_scan:
            return False, f"solver {n_full} vs scan {n_scan} at ({xi1:.3f},{xi2:.3f})"
        counts.add(n_full)
    return counts <= {1, 3}, f"counts seen: {sorted(counts)} over 400 samples"


@_register("qre", "ne_limit_at_xi_50")
def _qre_ne_limit_50():
    game = games.chicken_paper()
    eqs = qre.qre_equilibria(qre.QREModel(game, 50.0, 50.0))
    pts = eqs.points
    corner_err = min(np.abs(pts - np.array([1.0, -1.0])).max(axis=1).min(),
                     np.abs(pts - np.array([-1.0, 1.0])).max(axis=1).min())
    interior = pts[np.abs(pts).max(axis=1).argmin()]
    interior_err = float(np.abs(interior - 1.0 / 3.0).max())
    ok = corner_err < 1e-3 and interior_err < 1e-3
    return ok, (
        f"corner error {corner_err:.1e}, interior error {interior_err:.2e} "
        "(interior decays like artanh(1/3)/(0.75*xi); 1e-3 needs xi around 463)"
    )


@_register("qre", "ne_limit_convergence_law")
def _qre_ne_limit_law():
    game = games.chicken_paper()
    errs = {}
    for xi in (50.0, 150.0, 500.0):
        rows = qre.solve_grid(game, [xi], [xi])
        interior = np.stack([rows["x1"], rows["x2"]], axis=-1)
        interior = interior[np.abs(interior).max(axis=1).argmin()]
        errs[xi] = float(np.abs(interior - 1.0 / 3.0).max())
    predicted = {xi: math.atanh(1.0 / 3.0) / (0.75 * xi) for xi in errs}
    law_ok = all(abs(errs[xi] - predicted[xi]) < 0.15 * predicted[xi] for xi in errs)
    corner = np.abs(
        qre.qre_equilibria(qre.QREModel(game, 50.0, 50.0)).points[[0, -1]]
    )
    corners_ok = float(np.abs(corner - 1.0).max()) < 1e-12
    ok = law_ok and corners_ok and errs[500.0] < 1e-3
    return ok, f"interior error {errs[500.0]:.2e} at xi=500; 1/xi law holds, corners exact"


@_register("qre", "response_consistency")
def _qre_response():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(200):
        model = qre.QREModel(_random_game(rng), *rng.uniform(0, 5, 2))
        player = int(rng.integers(1, 3))
        m = float(rng.uniform(-1, 1))
        worst = max(
            worst,
            abs(float(qre.qre_response(model, player, m)) - qre.response_via_logit(model, player, m)),
        )
    return worst <= 1e-12, f"max |tanh - logit chain| = {worst:.2e}"


@_register("qre", "diagonal_cusp_section")
def _qre_diagonal():
    game = games.chicken_paper()
    ts = np.linspace(0.1, 4.0, 80)
    counts = qre.count_equilibria(game, ts, ts)
    changes = np.flatnonzero(np.diff(counts) != 0)
    ok = len(changes) == 1 and counts[0] == 1 and counts[-1] == 3
    where = ts[changes[0]] if len(changes) else float("nan")
    return ok, f"single 1->3 transition on the diagonal near xi={where:.3f}"


@_register("qre", "critical_set_symmetry_and_emptiness")
def _qre_symmetry():
    game = games.chicken_paper()
    cs = qre.critical_set(game, n_rows=21)
    worst = max(
        abs(qre.fold_residual(game, p[1], p[0], s[::-1]))
        for p, s in zip(cs.params, cs.states)
    )
    harmony = qre.critical_set(games.ts_game(games.TSPoint(0.5, 0.5)))
    ok = worst < 1e-8 and harmony.count == 0 and not harmony.multiplicity_possible
    return ok, f"swap residual {worst:.1e}; harmony set empty with multiplicity impossible"


# -------------------------------------------------------------------- cusp


@_register("cusp", "discriminant_vs_root_count")
def _cusp_discriminant():
    rng = np.random.default_rng(51)
    for _ in range(10_000):
        control = cusp.CuspControl(float(rng.uniform(-3, 4)), float(rng.uniform(-3, 3)))
        region = cusp.classify_region(control)
        n = cusp.stationary_points(control).count
        if region is cusp.Region.A and n != 1:
            return False, f"{control}: region A with {n} roots"
        if region is cusp.Region.B and n != 3:
            return False, f"{control}: region B with {n} roots"
    return True, "region label consistent with root count on 1e4 random points"


@_register("cusp", "critical_boundary_identity")
def _cusp_boundary():
    line = cusp.critical_boundary(3.0, 401)
    rel = np.abs(4 * line[:, 0] ** 3 - 27 * line[:, 1] ** 2) / np.maximum(1.0, 27 * line[:, 1] ** 2)
    on_curve = cusp.CuspControl(3.0, 2.0)
    ok = float(rel.max()) < 1e-10 and cusp.classify_region(on_curve) is cusp.Region.CRITICAL
    return ok, f"max relative identity violation {float(rel.max()):.1e}"


@_register("cusp", "density_normalization_and_modes")
def _cusp_density():
    worst_norm = 0.0
    worst_mode = 0.0
    for (u1, u2, xi) in ((3.0, 0.0, 4.0), (1.0, 0.05, 6.0), (-1.0, 0.0, 8.0)):
        control = cusp.CuspControl(u1, u2)
        density = cusp.StationaryDensity(control, xi)
        worst_norm = max(worst_norm, abs(density.normalization_check() - 1.0))
        points = cusp.stationary_points(control)
        stable = sorted(p for p, s in zip(points.points[:, 0], points.stability) if s == "stable")
        modes = density.modes()
        if len(modes) != len(stable):
            return False, f"({u1},{u2}): {len(modes)} modes vs {len(stable)} stable roots"
        worst_mode = max(worst_mode, float(np.abs(modes - np.array(stable)).max()))
    return (
        worst_norm < 1e-8 and worst_mode < 1e-3,
        f"norm error {worst_norm:.1e}, mode-root gap {worst_mode:.1e}",
    )


@_register("cusp", "deterministic_stochastic_coincidence")
def _cusp_coincidence():
    control = cusp.CuspControl(3.0, 0.4)
    density = cusp.StationaryDensity(control, 5.0)
    points = cusp.stationary_points(control)
    unstable = [p for p, s in zip(points.points[:, 0], points.stability) if s == "unstable"]
    modes = density.modes()
    trough = minimize_scalar(
        lambda x: density.pdf(x), bounds=(modes[0], modes[1]), method="bounded",
        options={"xatol": 1e-10},
    ).x
    gap = abs(float(trough) - unstable[0])
    return gap < 1e-3, f"density minimum vs unstable root gap {gap:.1e}"


@_register("cusp", "sde_histogram_tv")
def _cusp_sde():
    control = cusp.CuspControl(-1.0, 0.0)
    sigma = 0.5
    density = cusp.StationaryDensity(control, xi=2.0 / sigma**2)
    path = cusp.simulate_sde(control, sigma=sigma, dt=0.02, steps=1_000_000, seed=1234)
    tv = cusp.trajectory_density_tv(path, density)
    return tv < 0.03, f"TV(histogram, analytic) = {tv:.4f} on 1e6 steps"


# -------------------------------------------------------------------- twin


def _reference_sweep():
    game = games.chicken_paper()
    markets = twin.CoupledMarkets(game, xi1=4.0, xi2=3.0)
    eqs = twin.joint_equilibria(markets)
    dying = eqs.points[np.argmax(eqs.points[:, 0])]
    grid = np.arange(4.0, -1e-9, -0.01)
    return twin.one_sided_sweep(markets, grid, player=1, start_state=dying)


@_register("twin", "co_collapse_synchrony")
def _twin_synchrony():
    result = _reference_sweep()
    if len(result.jumps) != 1:
        return False, f"{len(result.jumps)} jumps"
    event = result.jumps[0]
    d1 = abs(event.post_state[0] - event.pre_state[0])
    d2 = abs(event.post_state[1] - event.pre_state[1])
    ok = d1 > 0.25 and d2 > 0.25
    return ok, f"single joint event moves x1 by {d1:.2f} and x2 by {d2:.2f} in the same cell"


@_register("twin", "jacobian_vs_finite_difference")
def _twin_jacobian():
    rng = np.random.default_rng(61)
    game = games.chicken_paper()
    worst = 0.0
    tested = 0
    while tested < 100:
        markets = twin.CoupledMarkets(game, *rng.uniform(0.1, 4.0, 2))
        eqs = twin.joint_equilibria(markets)
        for point in eqs.points:
            sens = twin.jacobian(markets, point)
            if sens.near_singular or abs(sens.fold_gap) < 1e-2:
                continue
            fd = twin.fd_jacobian(markets, point)
            scale = max(1e-8, float(np.abs(fd).max()))
            worst = max(worst, float(np.abs(sens.matrix - fd).max()) / scale)
            tested += 1
            if tested >= 100:
                break
    return worst < 1e-5, f"max relative gap {worst:.1e} over {tested} equilibria"


@_register("twin", "jump_endpoints_on_stable_branches")
def _twin_endpoints():
    game = games.chicken_paper()
    markets = twin.CoupledMarkets(game, xi1=4.0, xi2=3.0)
    eqs0 = twin.joint_equilibria(markets)
    dying = eqs0.points[np.argmax(eqs0.points[:, 0])]
    grid = np.arange(4.0, -1e-9, -0.01)
    result = twin.one_sided_sweep(markets, grid, player=1, start_state=dying, refine_tol=None)
    if len(result.jumps) != 1:
        return False, f"{len(result.jumps)} jumps"
    event = result.jumps[0]
    worst = 0.0
    for value, state in ((event.param_hi, event.pre_state), (event.param_lo, event.post_state)):
        eqs = qre.qre_equilibria(qre.QREModel(game, value, 3.0))
        gaps = np.abs(eqs.points - state).max(axis=1)
        idx = int(gaps.argmin())
        worst = max(worst, float(gaps[idx]))
        if eqs.stability[idx] != "stable":
            return False, f"endpoint at xi1={value} landed on an unstable point"
    separation = float(np.abs(event.post_state - event.pre_state).max())
    ok = worst < 1e-8 and separation > 0.25
    return ok, f"endpoints match stable equilibria to {worst:.1e}, separation {separation:.2f}"


@_register("twin", "path_dependence_vs_critical_set")
def _twin_hysteresis():
    game = games.chicken_paper()
    cs = qre.critical_set(game, xi1_max=4.0, xi2_values=[3.0])
    crossing = float(cs.params[0, 0])
    down = _reference_sweep()
    jump_at = down.jumps[0].location
    markets = twin.CoupledMarkets(game, xi1=0.0, xi2=3.0)
    grid_up = np.arange(0.0, 4.0 + 1e-9, 0.01)
    up = twin.one_sided_sweep(markets, grid_up, player=1)
    div = np.abs(up.states - down.states[::-1]).max(axis=1)
    width = grid_up[div > 0.25]
    ok = (
        abs(jump_at - crossing) < 0.005
        and len(up.jumps) == 0
        and len(width) > 0
        and (width.max() - width.min()) > 0.5
    )
    return ok, (
        f"the line xi2=3 crosses the critical set once, at xi1={crossing:.4f}; descending jump at "
        f"{jump_at:.4f} matches it; ascending sweep never jumps and the branches differ over a "
        f"{width.max() - width.min():.2f}-wide interval"
    )


@_register("twin", "uncoupled_market_never_jumps")
def _twin_xi2_zero():
    game = games.chicken_paper()
    markets = twin.CoupledMarkets(game, xi1=0.0, xi2=0.0)
    grid = np.arange(0.0, 4.0 + 1e-9, 0.02)
    result = twin.one_sided_sweep(markets, grid, player=1)
    flat = float(np.abs(result.states[:, 1]).max())
    return len(result.jumps) == 0 and flat < 1e-12, (
        f"xi2=0: zero jumps, market 2 pinned at 0 (max |x2| = {flat:.1e})"
    )


# --------------------------------------------------------------------- abm


@_register("abm", "mean_field_consistency")
def _abm_mean_field():
    config = abm.ABMConfig(
        n_agents=1000, horizon=10_000, j=1.0, xi=2.0, z=0.0, beta=0.0, seed=7, x0=0.2,
        store_choices=False,
    )
    history = abm.run(config)
    target = sdt.equilibria(games.SDTParams(0, 0, 0, 1.0, 2.0)).stable_points()[:, 0].max()
    tail = history.x[2000:]
    blocks = tail[: len(tail) // 200 * 200].reshape(-1, 200).mean(axis=1)
    se = blocks.std(ddof=1) / math.sqrt(len(blocks))
    gap = abs(tail.mean() - target)
    return gap < 3 * se + 1e-4, f"|mean - {target:.5f}| = {gap:.2e} vs 3*SE = {3*se:.2e}"


@_register("abm", "aggregation_identity")
def _abm_aggregation():
    config = abm.ABMConfig(
        n_agents=97, horizon=300, j=0.8, xi=1.3, z=0.2, beta=0.1, seed=9, x0=-0.3
    )
    history = abm.run(config)
    recomputed = history.choices.mean(axis=1)
    exact = np.array_equal(recomputed, history.x[1:])
    return exact, "x_t equals the per-agent mean exactly at every step"


@_register("abm", "seed_determinism")
def _abm_determinism():
    config = abm.ABMConfig(n_agents=50, horizon=500, j=1.0, xi=1.5, z=0.1, beta=0.05, seed=123)
    a, b = abm.run(config), abm.run(config)
    same = (
        np.array_equal(a.p, b.p)
        and np.array_equal(a.x, b.x)
        and np.array_equal(a.choices, b.choices)
    )
    return same, "two runs with the same config are bit-identical"


@_register("abm", "price_martingale")
def _abm_martingale():
    config = abm.ABMConfig(
        n_agents=100, horizon=10_000, j=0.0, xi=0.0, z=0.02, beta=0.0, seed=77,
        store_choices=False,
    )
    history = abm.run(config)
    increments = np.diff(history.p)
    _, p_normal = normaltest(increments)
    lag1 = float(np.corrcoef(increments[:-1], increments[1:])[0, 1])
    std_ok = abs(increments.std() - config.z) < 0.05 * config.z
    ok = p_normal > 0.01 and abs(lag1) < 3.0 / math.sqrt(len(increments)) and std_ok
    return ok, f"normality p={p_normal:.3f}, lag-1 autocorr {lag1:.4f}, std {increments.std():.5f}"


# --------------------------------------------------------------------- cli


@_register("cli", "csv_headers_and_manifest_roundtrip")
def _cli_outputs():
    from . import cli

    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "boundary.csv")
        code = cli.main(["cusp-critical", "--u1-max", "2.0", "--n", "41", "--out", out])
        if code != 0:
            return False, f"cusp-critical exited {code}"
        first = open(out).readline().strip()
        if first != "u1,u2":
            return False, f"header row missing, got {first!r}"
        manifest = json.load(open(out + ".manifest.json"))
        for key in ("subcommand", "config", "version", "outputs"):
            if key not in manifest:
                return False, f"manifest missing {key}"
        before = open(out).read()
        argv = ["cusp-critical", "--u1-max", str(manifest["config"]["u1_max"]),
                "--n", str(manifest["config"]["n"]), "--out", out]
        cli.main(argv)
        if open(out).read() != before:
            return False, "re-run from manifest changed the output bytes"
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        code = cli.main(["classify-ts", "--T", "0.5", "--S", "-0.5"])
    text = buffer.getvalue().strip()
    return code == 0 and text == "StagHunt, NE: CC, DD", f"classify-ts printed {text!r}"


# ----------------------------------------------------------------- runner


def run_suites(which: str = "all") -> list[str]:
    """Run one suite or all of them; print a line per check and return the
    names of failing checks."""
    if which != "all" and which not in SUITES:
        raise ValueError(f"unknown suite {which!r}; choose from {SUITES} or 'all'")
    failures = []
    for suite, name, fn in _CHECKS:
        if which != "all" and suite != which:
            continue
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        tag = "PASS" if ok else "FAIL"
        print(f"[{tag}] {suite}.{name}: {detail}")
        if not ok:
            failures.append(f"{suite}.{name}")
    if failures:
        print(f"{len(failures)} check(s) failed: {', '.join(failures)}")
    else:
        print("all checks passed")
    return failures
