"""Quantal response equilibria of 2x2 games on the mean-strategy square.

Each player's noisy best response to the opponent's mean is the tanh of
their precision times the conditional-utility gap; a quantal response
equilibrium is a joint fixed point of the two responses.  Depending on
the precisions (xi1, xi2) the coupled map has one equilibrium or three,
and the boundary between those regions -- where a stable/unstable pair is
born in a fold -- is traced by critical_set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import games
from .fixedpoint import EquilibriumSet, FixedPointProblem, find_all
from .games import Game2x2, GParams
from .logit import ChoiceProblem, logit_probs

__all__ = [
    "QREModel",
    "CriticalSet",
    "conditional_utility",
    "qre_response",
    "fixedpoint_problem",
    "qre_equilibria",
    "count_equilibria",
    "solve_grid",
    "region_label",
    "critical_set",
]


@dataclass(frozen=True)
class QREModel:
    """A 2x2 game with per-player precisions."""

    game: Game2x2
    xi1: float
    xi2: float

    def __post_init__(self) -> None:
        for name, xi in (("xi1", self.xi1), ("xi2", self.xi2)):
            if not math.isfinite(xi) or xi < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {xi!r}")

    @cached_property
    def gp1(self) -> GParams:
        return games.to_gparams(self.game, 1)

    @cached_property
    def gp2(self) -> GParams:
        return games.to_gparams(self.game, 2)

    def gparams(self, player: int) -> GParams:
        return self.gp1 if player == 1 else self.gp2

    def xi(self, player: int) -> float:
        return self.xi1 if player == 1 else self.xi2


def conditional_utility(model: QREModel, player: int, own_value: int, opp_mean: float) -> float:
    """Expected payoff of committing to one choice against a mixing opponent."""
    if own_value not in (-1, 1):
        raise ValueError(f"own_value must be -1 or +1, got {own_value!r}")
    g = model.gparams(player)
    return g.g0 + own_value * g.g_self + opp_mean * g.g_other + own_value * opp_mean * g.g12


def qre_response(model: QREModel, player: int, opp_mean) -> np.ndarray:
    """Mean noisy best response tanh(xi*(g_self + g12*opp_mean)).

    Identical to pushing the two conditional utilities through the logit
    choice rule and taking the mean of the induced +/-1 choice.
    """
    g = model.gparams(player)
    m = np.asarray(opp_mean, dtype=float)
    return np.tanh(model.xi(player) * (g.g_self + g.g12 * m))


def response_via_logit(model: QREModel, player: int, opp_mean: float) -> float:
    """Mean strategy computed the long way round, through choice
    probabilities; agrees with qre_response to rounding error."""
    v = (
        conditional_utility(model, player, -1, opp_mean),
        conditional_utility(model, player, +1, opp_mean),
    )
    p = logit_probs(ChoiceProblem(utilities=v, xi=model.xi(player)))
    return 1.0 - 2.0 * float(p[0])


def fixedpoint_problem(model: QREModel) -> FixedPointProblem:
    """The coupled response map on [-1, 1]^2."""
    gs1, gc1, xi1 = model.gp1.g_self, model.gp1.g12, model.xi1
    gs2, gc2, xi2 = model.gp2.g_self, model.gp2.g12, model.xi2

    def the_map(x: np.ndarray) -> np.ndarray:
        out = np.empty_like(x)
        out[..., 0] = np.tanh(xi1 * (gs1 + gc1 * x[..., 1]))
        out[..., 1] = np.tanh(xi2 * (gs2 + gc2 * x[..., 0]))
        return out

    def the_jac(x: np.ndarray) -> np.ndarray:
        t1 = np.tanh(xi1 * (gs1 + gc1 * x[..., 1]))
        t2 = np.tanh(xi2 * (gs2 + gc2 * x[..., 0]))
        jac = np.zeros(x.shape[:-1] + (2, 2))
        jac[..., 0, 1] = xi1 * gc1 * (1.0 - t1**2)
        jac[..., 1, 0] = xi2 * gc2 * (1.0 - t2**2)
        return jac

    return FixedPointProblem(map=the_map, jacobian=the_jac, dim=2)


def qre_equilibria(model: QREModel, **find_kwargs) -> EquilibriumSet:
    """All joint fixed points of the coupled response map."""
    return find_all(fixedpoint_problem(model), **find_kwargs)


def count_equilibria(game: Game2x2, xi1, xi2, n_scan: int = 4097) -> np.ndarray:
    """Equilibrium count per (xi1, xi2) pair by scalar reduction.

    Substituting player 2's response into player 1's collapses the joint
    fixed-point system to one unknown: x1 = r1(r2(x1)).  The count is the
    number of sign changes of the scalar residual on a dense grid, which
    is exact whenever no pair of roots falls inside one grid cell (root
    pairs merge like sqrt(distance-to-fold), so only points essentially on
    the critical curve are affected).  Broadcasts over xi arrays; the
    full solver is the slow cross-check.
    """
    gp1 = games.to_gparams(game, 1)
    gp2 = games.to_gparams(game, 2)
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    shape = np.broadcast_shapes(xi1.shape, xi2.shape)
    x = np.linspace(-1.0, 1.0, n_scan)
    a1 = np.broadcast_to(xi1, shape).reshape(-1)
    a2 = np.broadcast_to(xi2, shape).reshape(-1)
    counts = np.empty(a1.shape, dtype=np.int64)
    cells_per_chunk = max(1, 8_000_000 // n_scan)
    for start in range(0, len(a1), cells_per_chunk):
        s = slice(start, start + cells_per_chunk)
        inner = np.tanh(a2[s, None] * (gp2.g_self + gp2.g12 * x[None, :]))
        f = np.tanh(a1[s, None] * (gp1.g_self + gp1.g12 * inner)) - x[None, :]
        counts[s] = np.count_nonzero(f[:, :-1] * f[:, 1:] < 0, axis=1)
        counts[s] += np.count_nonzero(f == 0.0, axis=1)
    return counts.reshape(shape) if shape else counts[0]


def solve_grid(
    game: Game2x2,
    xi1_values: np.ndarray,
    xi2_values: np.ndarray,
    n_scan: int = 2049,
) -> dict[str, np.ndarray]:
    """All equilibria over a (xi1, xi2) product grid, vectorized.

    Uses the same scalar reduction as count_equilibria, bisecting every
    sign-change bracket across all cells simultaneously.  Returns flat
    parallel arrays: cell indices i (into xi1_values) and j (into
    xi2_values), the equilibrium (x1, x2), the iteration-map spectral
    radius rho, and the per-cell equilibrium count; rows are ordered by
    cell and then by x1.
    """
    gp1 = games.to_gparams(game, 1)
    gp2 = games.to_gparams(game, 2)
    gs1, gc1 = gp1.g_self, gp1.g12
    gs2, gc2 = gp2.g_self, gp2.g12
    xi1_values = np.asarray(xi1_values, dtype=float)
    xi2_values = np.asarray(xi2_values, dtype=float)
    n1, n2 = len(xi1_values), len(xi2_values)
    a1 = np.repeat(xi1_values, n2)
    a2 = np.tile(xi2_values, n1)
    x = np.linspace(-1.0, 1.0, n_scan)

    out_cell: list[np.ndarray] = []
    out_x1: list[np.ndarray] = []
    cells_per_chunk = max(1, 8_000_000 // n_scan)
    for start in range(0, len(a1), cells_per_chunk):
        s = slice(start, min(start + cells_per_chunk, len(a1)))
        p1, p2 = a1[s, None], a2[s, None]
        f = np.tanh(p1 * (gs1 + gc1 * np.tanh(p2 * (gs2 + gc2 * x[None, :])))) - x[None, :]
        zi, zj = np.nonzero(f == 0.0)
        out_cell.append(zi + start)
        out_x1.append(x[zj])
        bi, bj = np.nonzero(f[:, :-1] * f[:, 1:] < 0)
        if bi.size:
            za, zb, fa = x[bj].copy(), x[bj + 1].copy(), f[bi, bj].copy()
            q1, q2 = a1[s][bi], a2[s][bi]
            for _ in range(60):
                mid = 0.5 * (za + zb)
                fm = np.tanh(q1 * (gs1 + gc1 * np.tanh(q2 * (gs2 + gc2 * mid)))) - mid
                left = fa * fm <= 0
                zb = np.where(left, mid, zb)
                za = np.where(left, za, mid)
                fa = np.where(left, fa, fm)
            out_cell.append(bi + start)
            out_x1.append(0.5 * (za + zb))

    cell = np.concatenate(out_cell)
    x1 = np.concatenate(out_x1)
    order = np.lexsort((x1, cell))
    cell, x1 = cell[order], x1[order]
    xi1, xi2 = a1[cell], a2[cell]
    x2 = np.tanh(xi2 * (gs2 + gc2 * x1))
    rho = np.sqrt(np.abs(xi1 * gc1 * (1.0 - x1**2) * xi2 * gc2 * (1.0 - x2**2)))
    counts = np.bincount(cell, minlength=n1 * n2).reshape(n1, n2)
    return {
        "i": cell // n2,
        "j": cell % n2,
        "xi1": xi1,
        "xi2": xi2,
        "x1": x1,
        "x2": x2,
        "rho": rho,
        "counts": counts,
    }


def region_label(equilibrium_count: int) -> str:
    """Name the multiplicity regime: A for a unique equilibrium, B for
    three, 'critical' for the degenerate in-between count."""
    if equilibrium_count == 1:
        return "A"
    if equilibrium_count == 3:
        return "B"
    return "critical"


@dataclass(frozen=True)
class CriticalSet:
    """Sampled fold curve in the (xi1, xi2) plane.

    params rows are (xi1, xi2) on the curve, states the merging fixed
    point (x1, x2); rows are ordered along the curve.  When either player
    fails the |g_self| < |g12| condition no fold exists anywhere and the
    set is empty with multiplicity_possible False -- a definite answer,
    not a search failure.
    """

    params: np.ndarray
    states: np.ndarray
    multiplicity_possible: bool

    @property
    def count(self) -> int:
        return self.params.shape[0]


def _fold_system(model_game: Game2x2, xi2: float):
    """Closure evaluating the fold conditions and their Jacobian in the
    unknowns (x1, x2, xi1) at fixed xi2."""
    gp1 = games.to_gparams(model_game, 1)
    gp2 = games.to_gparams(model_game, 2)
    gs1, gc1 = gp1.g_self, gp1.g12
    gs2, gc2 = gp2.g_self, gp2.g12

    def residual_and_jac(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x1, x2, xi1 = u
        z1 = xi1 * (gs1 + gc1 * x2)
        z2 = xi2 * (gs2 + gc2 * x1)
        t1, t2 = np.tanh(z1), np.tanh(z2)
        s1, s2 = 1.0 - t1**2, 1.0 - t2**2
        f11 = xi1 * gc1 * s1  # d response1 / d x2
        f12 = xi2 * gc2 * s2  # d response2 / d x1
        res = np.array([x1 - t1, x2 - t2, f11 * f12 - 1.0])
        df11_dx2 = -2.0 * (xi1 * gc1) ** 2 * s1 * t1
        df11_dxi1 = gc1 * s1 * (1.0 - 2.0 * z1 * t1)
        df12_dx1 = -2.0 * (xi2 * gc2) ** 2 * s2 * t2
        jac = np.array(
            [
                [1.0, -f11, -(gs1 + gc1 * x2) * s1],
                [-f12, 1.0, 0.0],
                [f11 * df12_dx1, f12 * df11_dx2, f12 * df11_dxi1],
            ]
        )
        return res, jac

    return residual_and_jac


def fold_residual(game: Game2x2, xi1: float, xi2: float, state: np.ndarray) -> float:
    """Max violation of the three fold conditions at a candidate point."""
    system = _fold_system(game, xi2)
    res, _ = system(np.array([state[0], state[1], xi1]))
    return float(np.abs(res).max())


def _polish_fold(game: Game2x2, xi2: float, seed: np.ndarray) -> np.ndarray | None:
    system = _fold_system(game, xi2)
    u = seed.astype(float).copy()
    for _ in range(60):
        res, jac = system(u)
        if np.abs(res).max() < 1e-12:
            break
        try:
            step = np.linalg.solve(jac, res)
        except np.linalg.LinAlgError:
            return None
        step_cap = 0.2
        norm = np.abs(step).max()
        if norm > step_cap:
            step *= step_cap / norm
        u = u - step
    res, _ = system(u)
    if np.abs(res).max() > 1e-10 or u[2] < 0:
        return None
    return u


def _row_crossings(game: Game2x2, xi2: float, xi1_max: float, n_coarse: int, **find_kwargs) -> list[np.ndarray]:
    """Fold points (x1, x2, xi1) along one horizontal line of fixed xi2."""
    xs = np.linspace(0.0, xi1_max, n_coarse)
    counts = count_equilibria(game, xs, xi2)
    out = []
    for k in range(len(xs) - 1):
        if counts[k] == counts[k + 1]:
            continue
        a, b, c_a = xs[k], xs[k + 1], counts[k]
        while b - a > 1e-7:
            mid = 0.5 * (a + b)
            if count_equilibria(game, mid, xi2) == c_a:
                a = mid
            else:
                b = mid
        # the merging pair is the closest pair on the three-count side
        side = b if counts[k + 1] > counts[k] else a
        eqs = qre_equilibria(QREModel(game, side, xi2), **find_kwargs).points
        if len(eqs) < 2:
            continue
        pairs = [
            (np.abs(eqs[i] - eqs[j]).max(), i, j)
            for i in range(len(eqs))
            for j in range(i + 1, len(eqs))
        ]
        _, i, j = min(pairs)
        seed = np.array([*(0.5 * (eqs[i] + eqs[j])), 0.5 * (a + b)])
        polished = _polish_fold(game, xi2, seed)
        if polished is not None:
            out.append(polished)
    return out


def _chain_order(points: np.ndarray) -> np.ndarray:
    """Greedy nearest-neighbor ordering, starting from the max-xi2 end."""
    n = len(points)
    if n <= 2:
        return np.arange(n)
    remaining = set(range(n))
    current = int(np.argmax(points[:, 1]))
    order = [current]
    remaining.discard(current)
    while remaining:
        rem = np.array(sorted(remaining))
        d = np.linalg.norm(points[rem] - points[current], axis=1)
        current = int(rem[np.argmin(d)])
        order.append(current)
        remaining.discard(current)
    return np.asarray(order)


def critical_set(
    game: Game2x2,
    xi1_max: float = 4.0,
    xi2_max: float = 4.0,
    n_rows: int = 61,
    n_coarse: int = 41,
    xi2_values=None,
    **find_kwargs,
) -> CriticalSet:
    """Trace the fold curve separating the one- and three-equilibrium
    regions over [0, xi1_max] x [0, xi2_max].

    Scans horizontal lines of fixed xi2, brackets equilibrium-count
    changes in xi1, and polishes each with Newton on the full fold system
    (both fixed-point conditions plus the tangency f1*f2 = 1).  Rows with
    no crossing contribute nothing.
    """
    for player in (1, 2):
        if not games.three_equilibrium_condition(games.to_gparams(game, player)):
            return CriticalSet(
                params=np.empty((0, 2)), states=np.empty((0, 2)), multiplicity_possible=False
            )
    rows = np.linspace(xi2_max / n_rows, xi2_max, n_rows) if xi2_values is None else np.asarray(xi2_values, dtype=float)
    params, states = [], []
    for xi2 in rows:
        for u in _row_crossings(game, float(xi2), xi1_max, n_coarse, **find_kwargs):
            params.append((u[2], float(xi2)))
            states.append((u[0], u[1]))
    params_arr = np.asarray(params) if params else np.empty((0, 2))
    states_arr = np.asarray(states) if states else np.empty((0, 2))
    if len(params_arr) > 1:
        order = _chain_order(params_arr)
        params_arr, states_arr = params_arr[order], states_arr[order]
    return CriticalSet(params=params_arr, states=states_arr, multiplicity_possible=True)
