"""Two coupled markets with logit responders: joint equilibria, parameter
sensitivity, and one-sided uncertainty sweeps.

Each market i holds mean position x_i and responds to the other through
x_i = tanh(xi_i * (g_self_i + g12_i * x_other)).  Varying one market's
inverse noise xi while the other's stays fixed moves the joint
equilibrium; when the occupied branch folds, both coordinates jump in the
same sweep step (co-collapse), and ascending versus descending sweeps can
land on different branches (hysteresis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .fixedpoint import EquilibriumSet, FixedPointProblem, JumpEvent, find_all, follow
from .games import Game2x2
from .qre import QREModel, fixedpoint_problem, qre_equilibria

__all__ = [
    "CoupledMarkets",
    "Sensitivity",
    "SweepResult",
    "joint_equilibria",
    "fold_gap",
    "jacobian",
    "fd_jacobian",
    "one_sided_sweep",
]

NEAR_SINGULAR_GAP = 1e-6
_EQUILIBRIUM_TOL = 1e-10


@dataclass(frozen=True)
class CoupledMarkets:
    """Two markets trading the same 2x2 stage game, with separate inverse
    noise scales.  Market 1 plays rows, market 2 columns."""

    game: Game2x2
    xi1: float
    xi2: float

    def __post_init__(self) -> None:
        if self.xi1 < 0 or self.xi2 < 0:
            raise ValueError("inverse noise must be nonnegative for both markets")

    @cached_property
    def model(self) -> QREModel:
        return QREModel(game=self.game, xi1=self.xi1, xi2=self.xi2)

    def with_xi(self, player: int, value: float) -> "CoupledMarkets":
        if player == 1:
            return CoupledMarkets(self.game, value, self.xi2)
        if player == 2:
            return CoupledMarkets(self.game, self.xi1, value)
        raise ValueError(f"player must be 1 or 2, got {player!r}")


@dataclass(frozen=True)
class Sensitivity:
    """Derivative of the joint equilibrium with respect to (xi1, xi2).

    matrix[i, j] = d x_{i+1} / d xi_{j+1}.  fold_gap is f1_1*f1_2 - 1; the
    matrix diverges as the gap closes, and near_singular flags gaps inside
    the +-1e-6 band (the matrix is still returned).
    """

    matrix: np.ndarray
    fold_gap: float
    near_singular: bool


@dataclass(frozen=True)
class SweepResult:
    """Branch-followed states along a one-parameter sweep.

    direction is inferred from grid order; jumps carry the refined fold
    location and the joint pre/post states, so a jump in one market is by
    construction simultaneous with the other's.
    """

    parameter: str
    grid: np.ndarray
    states: np.ndarray
    jumps: tuple[JumpEvent, ...]
    direction: str

    @property
    def jump_locations(self) -> np.ndarray:
        return np.asarray([j.location for j in self.jumps])


def joint_equilibria(c: CoupledMarkets, **kwargs) -> EquilibriumSet:
    """All joint fixed points (x1, x2); identical to the two-player
    quantal-response solve, reinterpreted as coupled markets."""
    return qre_equilibria(c.model, **kwargs)


def _partials(model: QREModel, state: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(f1, f2) per market: derivative of the tanh response in the other
    market's position, and in the own inverse noise."""
    f1 = np.empty(2)
    f2 = np.empty(2)
    for i, other in ((0, 1), (1, 0)):
        gp = model.gparams(i + 1)
        xi = model.xi(i + 1)
        arg = gp.g_self + gp.g12 * state[other]
        sech2 = 1.0 / math.cosh(xi * arg) ** 2
        f1[i] = xi * gp.g12 * sech2
        f2[i] = arg * sech2
    return f1, f2


def fold_gap(c: CoupledMarkets, state: np.ndarray) -> float:
    """f1_1 * f1_2 - 1 at a joint state; zero exactly on a fold."""
    f1, _ = _partials(c.model, np.asarray(state, dtype=float))
    return float(f1[0] * f1[1] - 1.0)


def _check_equilibrium(c: CoupledMarkets, state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=float)
    problem = fixedpoint_problem(c.model)
    residual = float(np.abs(state - problem.map(state)).max())
    if residual > _EQUILIBRIUM_TOL:
        raise ValueError(
            f"state is not an equilibrium: residual {residual:.3e} > {_EQUILIBRIUM_TOL:.0e}"
        )
    return state


def jacobian(c: CoupledMarkets, state: np.ndarray) -> Sensitivity:
    """Sensitivity of the equilibrium to the two inverse noise scales.

    By the implicit function theorem on x1 = f1(x2, xi1), x2 = f2(x1, xi2):

        dx1/dxi1 = f2_1 / D        dx1/dxi2 = f1_1 * f2_2 / D
        dx2/dxi1 = f1_2 * f2_1 / D dx2/dxi2 = f2_2 / D

    with D = 1 - f1_1*f1_2 (subscript 1 = strategy partial, 2 = noise
    partial).  D -> 0 on the critical set, where the entries diverge.
    """
    state = _check_equilibrium(c, state)
    f1, f2 = _partials(c.model, state)
    gap = float(f1[0] * f1[1] - 1.0)
    d = -gap
    matrix = np.array(
        [
            [f2[0], f1[0] * f2[1]],
            [f1[1] * f2[0], f2[1]],
        ]
    ) / d
    return Sensitivity(matrix=matrix, fold_gap=gap, near_singular=abs(gap) < NEAR_SINGULAR_GAP)


def _newton_solve(model: QREModel, start: np.ndarray, max_iter: int = 60) -> np.ndarray:
    """Polish a nearby joint equilibrium with damped-free Newton; works at
    unstable points too, unlike forward iteration."""
    problem = fixedpoint_problem(model)
    x = np.asarray(start, dtype=float).copy()
    for _ in range(max_iter):
        fx = problem.map(x)
        res = x - fx
        if np.abs(res).max() < 1e-13:
            return x
        jac = np.eye(2) - problem.jacobian(x)
        step = np.linalg.solve(jac, res)
        x = np.clip(x - step, -1.0, 1.0)
    if np.abs(x - problem.map(x)).max() > _EQUILIBRIUM_TOL:
        raise RuntimeError("Newton polish did not converge from the given state")
    return x


def fd_jacobian(c: CoupledMarkets, state: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference sensitivity: re-solves the equilibrium branch at
    xi +- h and differences the states.  Oracle for `jacobian`."""
    state = _check_equilibrium(c, state)
    cols = []
    for player in (1, 2):
        base = c.xi1 if player == 1 else c.xi2
        hi = _newton_solve(c.with_xi(player, base + h).model, state)
        lo = _newton_solve(c.with_xi(player, base - h).model, state)
        cols.append((hi - lo) / (2.0 * h))
    return np.stack(cols, axis=-1)


def one_sided_sweep(
    c: CoupledMarkets,
    grid: np.ndarray,
    player: int = 1,
    start_state: np.ndarray | None = None,
    jump_threshold: float = 0.25,
    refine_tol: float = 1e-6,
    **find_kwargs,
) -> SweepResult:
    """Sweep one market's inverse noise over `grid` (ascending or
    descending order) with the other market's value fixed from `c`,
    following the occupied branch by warm starts.

    The starting branch matters whenever the first grid point admits more
    than one equilibrium, so it is an explicit input: with start_state
    None the sweep requires a unique equilibrium at grid[0] and raises
    otherwise rather than guessing.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-D array with at least two points")
    if player not in (1, 2):
        raise ValueError(f"player must be 1 or 2, got {player!r}")

    def family(value: float) -> FixedPointProblem:
        return fixedpoint_problem(c.with_xi(player, value).model)

    if start_state is None:
        first = find_all(family(grid[0]), **find_kwargs)
        if first.count != 1:
            raise ValueError(
                f"{first.count} equilibria at the first grid point; "
                "pass start_state to select the starting branch"
            )
        start_state = first.points[0]
    states, jumps = follow(
        family,
        grid,
        np.asarray(start_state, dtype=float),
        jump_threshold=jump_threshold,
        refine_tol=refine_tol,
    )
    direction = "ascending" if grid[-1] >= grid[0] else "descending"
    return SweepResult(
        parameter=f"xi{player}",
        grid=grid,
        states=states,
        jumps=tuple(jumps),
        direction=direction,
    )
