"""Finding and continuing fixed points of smooth self-maps on a box.

The central routine, find_all, combines damped multi-start iteration
(which settles onto attracting fixed points) with Newton's method on the
residual x - map(x) seeded from the same grid (which also recovers
repelling points), then deduplicates and labels stability by the spectral
radius of the map's Jacobian.  sweep re-runs find_all along a parameter
grid and brackets fold events where the fixed-point count changes; follow
tracks a single occupied branch with warm starts and records jumps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "STABLE",
    "UNSTABLE",
    "CRITICAL",
    "FixedPointProblem",
    "EquilibriumSet",
    "FoldEvent",
    "Branch",
    "JumpEvent",
    "FixedPointError",
    "find_all",
    "count_fixed_points",
    "sweep",
    "converge_from",
    "follow",
]

STABLE = "stable"
UNSTABLE = "unstable"
CRITICAL = "critical"

_STEP_TOL = 1e-13  # damped-iteration stall tolerance, near float resolution


class FixedPointError(RuntimeError):
    """No start converged to a fixed point."""


@dataclass(frozen=True)
class FixedPointProblem:
    """A self-map of a box with an analytic Jacobian.

    map takes points of shape (..., dim) to the same shape; jacobian
    returns (..., dim, dim).  Both must be vectorized.  The box defaults
    to [-1, 1]^dim.
    """

    map: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    dim: int
    lower: Optional[tuple[float, ...]] = None
    upper: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim!r}")
        lo = (-1.0,) * self.dim if self.lower is None else tuple(float(v) for v in self.lower)
        hi = (1.0,) * self.dim if self.upper is None else tuple(float(v) for v in self.upper)
        if len(lo) != self.dim or len(hi) != self.dim:
            raise ValueError("bounds must have length dim")
        if any(l >= u for l, u in zip(lo, hi)):
            raise ValueError("lower bounds must be strictly below upper bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower), np.asarray(self.upper)


@dataclass(frozen=True)
class EquilibriumSet:
    """Deduplicated fixed points with stability labels and residuals.

    points has shape (count, dim), sorted lexicographically; residuals are
    infinity norms of x - map(x); n_unconverged counts starts that were
    discarded for failing to converge.
    """

    points: np.ndarray
    stability: tuple[str, ...]
    residuals: np.ndarray
    n_unconverged: int = 0

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def values(self) -> np.ndarray:
        """Points flattened to shape (count,); only valid for dim = 1."""
        if self.points.shape[1] != 1:
            raise ValueError("values is only defined for 1-D problems")
        return self.points[:, 0]

    def stable_points(self) -> np.ndarray:
        mask = [s == STABLE for s in self.stability]
        return self.points[np.asarray(mask, dtype=bool)]


@dataclass(frozen=True)
class FoldEvent:
    """A change in fixed-point count between adjacent sweep parameters."""

    param_lo: float
    param_hi: float
    location: float  # refined estimate inside [param_lo, param_hi]
    count_lo: int
    count_hi: int


@dataclass(frozen=True)
class Branch:
    """Result of a parameter sweep: one EquilibriumSet per grid value."""

    params: np.ndarray
    sets: list[EquilibriumSet]
    folds: list[FoldEvent]

    def counts(self) -> np.ndarray:
        return np.array([s.count for s in self.sets])


@dataclass(frozen=True)
class JumpEvent:
    """A discontinuous branch change during warm-started following."""

    param_lo: float
    param_hi: float
    location: float
    pre_state: np.ndarray
    post_state: np.ndarray


def _grid_starts(problem: FixedPointProblem, n_starts: int) -> np.ndarray:
    lo, hi = problem.bounds
    axes = [np.linspace(lo[k], hi[k], n_starts) for k in range(problem.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _residual(problem: FixedPointProblem, x: np.ndarray) -> np.ndarray:
    return np.abs(x - problem.map(x)).max(axis=-1)


def _damped_stage(
    problem: FixedPointProblem,
    starts: np.ndarray,
    damping: float,
    max_iter: int,
) -> np.ndarray:
    """Iterate x <- (1-a)x + a*map(x) until every start stalls or the cap
    is hit; returns the endpoints.

    Near folds the iteration slows critically, so callers that follow up
    with Newton should pass a modest cap rather than waiting out the
    stragglers here.
    """
    x = starts.copy()
    for k in range(max_iter):
        xn = (1.0 - damping) * x + damping * problem.map(x)
        if k % 16 == 15 and np.abs(xn - x).max() <= _STEP_TOL:
            return xn
        x = xn
    return x


def _newton_stage(
    problem: FixedPointProblem,
    seeds: np.ndarray,
    max_iter: int,
    residual_tol: float,
) -> tuple[np.ndarray, int]:
    """Newton on F(x) = x - map(x) from every seed.

    Returns the converged in-box points and the number of seeds that
    failed (left the box or stalled above the residual threshold)."""
    lo, hi = problem.bounds
    span = hi - lo
    slack_lo, slack_hi = lo - 0.05 * span, hi + 0.05 * span
    max_step = 0.25 * span.max()
    eye = np.eye(problem.dim)

    x = seeds.copy()
    active = np.ones(len(x), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        xa = x[active]
        f = xa - problem.map(xa)
        jf = eye[None, :, :] - problem.jacobian(xa)
        det = np.linalg.det(jf)
        ok = np.abs(det) > 1e-14
        step = np.zeros_like(xa)
        if ok.any():
            step[ok] = np.linalg.solve(jf[ok], f[ok, :, None])[..., 0]
        # trust-region clip keeps steep residuals from throwing iterates away
        norms = np.abs(step).max(axis=-1)
        big = norms > max_step
        if big.any():
            step[big] *= (max_step / norms[big])[:, None]
        xn = np.clip(xa - step, slack_lo, slack_hi)
        x[active] = xn
        idx = np.flatnonzero(active)
        done = (np.abs(xn - xa).max(axis=-1) < _STEP_TOL) | ~ok
        active[idx[done]] = False

    res = _residual(problem, x)
    keep = (res <= residual_tol) & ((x >= lo - 1e-9 * span) & (x <= hi + 1e-9 * span)).all(axis=-1)
    return x[keep], int((~keep).sum())


def _scan_stage_1d(
    problem: FixedPointProblem,
    n_scan: int = 4097,
) -> np.ndarray:
    """Bracket sign changes of x - map(x) on a dense 1-D grid and bisect."""
    lo, hi = problem.bounds
    xs = np.linspace(lo[0], hi[0], n_scan)
    f = (xs[:, None] - problem.map(xs[:, None]))[:, 0]
    roots = [xs[i] for i in np.flatnonzero(f == 0.0)]
    cross = np.flatnonzero(f[:-1] * f[1:] < 0)
    if cross.size:
        a, b = xs[cross].copy(), xs[cross + 1].copy()
        fa = f[cross].copy()
        for _ in range(60):
            mid = 0.5 * (a + b)
            fm = (mid[:, None] - problem.map(mid[:, None]))[:, 0]
            left = fa * fm <= 0
            b[left] = mid[left]
            a[~left] = mid[~left]
            fa[~left] = fm[~left]
        roots.extend(0.5 * (a + b))
    if not roots:
        return np.empty((0, 1))
    return np.asarray(roots)[:, None]


def _ring_seeds(centers: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Small rings around candidate points; helps split near-fold pairs."""
    if centers.size == 0 or centers.shape[1] != 2:
        return np.empty((0, centers.shape[1] if centers.size else 2))
    theta = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    circle = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    out = []
    for radius in (0.02, 0.1):
        offs = circle * (radius * span[None, :])
        out.append((centers[:, None, :] + offs[None, :, :]).reshape(-1, 2))
    return np.concatenate(out, axis=0)


def _dedupe(points: np.ndarray, residuals: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-linkage clustering at infinity-norm tol; keep best residual.

    A lattice pre-collapse (cell width tol/4, min-residual representative
    per cell) shrinks the pool before the quadratic linkage pass; pairs
    split across cell boundaries are re-merged by the linkage.
    """
    if len(points) > 8:
        cells = np.round(points / (0.25 * tol)).astype(np.int64)
        _, inverse = np.unique(cells, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        order = np.lexsort((residuals, inverse))
        firsts = order[np.searchsorted(inverse[order], np.arange(inverse.max() + 1))]
        points, residuals = points[firsts], residuals[firsts]
    m = len(points)
    if m == 0:
        return points, residuals
    dist = np.abs(points[:, None, :] - points[None, :, :]).max(axis=-1)
    adj = dist <= tol
    labels = np.full(m, -1, dtype=int)
    n_lab = 0
    for i in range(m):
        if labels[i] >= 0:
            continue
        stack = [i]
        labels[i] = n_lab
        while stack:
            j = stack.pop()
            nbrs = np.flatnonzero(adj[j] & (labels < 0))
            labels[nbrs] = n_lab
            stack.extend(nbrs.tolist())
        n_lab += 1
    reps, reps_res = [], []
    for lab in range(n_lab):
        members = np.flatnonzero(labels == lab)
        best = members[np.argmin(residuals[members])]
        reps.append(points[best])
        reps_res.append(residuals[best])
    return np.asarray(reps), np.asarray(reps_res)


def _spectral_radius(problem: FixedPointProblem, points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return np.empty(0)
    jac = problem.jacobian(points)
    if problem.dim == 1:
        return np.abs(jac[:, 0, 0])
    return np.abs(np.linalg.eigvals(jac)).max(axis=-1)


def find_all(
    problem: FixedPointProblem,
    n_starts: int = 21,
    starts: Optional[np.ndarray] = None,
    damping: float = 0.5,
    max_iter: int = 10_000,
    newton_max_iter: int = 80,
    residual_keep: float = 1e-10,
    dedupe_tol: float = 1e-6,
    critical_band: float = 1e-6,
) -> EquilibriumSet:
    """All fixed points found from a multi-start search.

    Damped iteration from a uniform grid captures attracting points; Newton
    on the residual, seeded from the same grid plus the iteration
    endpoints (and, in one dimension, a dense sign-change scan), recovers
    repelling ones and polishes stragglers that the damped burn-in left
    near a fold.  Candidates are kept only if their residual is below
    residual_keep, then merged within dedupe_tol.  Raises FixedPointError
    if nothing converges.
    """
    grid = _grid_starts(problem, n_starts) if starts is None else np.atleast_2d(np.asarray(starts, dtype=float))
    endpoints = _damped_stage(problem, grid, damping, min(max_iter, 384))

    candidates = [endpoints[_residual(problem, endpoints) <= residual_keep]]
    limits, _ = _dedupe(candidates[0], _residual(problem, candidates[0]), dedupe_tol) if len(candidates[0]) else (np.empty((0, problem.dim)), np.empty(0))

    seeds = [grid, endpoints]
    if problem.dim == 1:
        candidates.append(_scan_stage_1d(problem))
    elif problem.dim == 2:
        lo, hi = problem.bounds
        seeds.append(_ring_seeds(limits, hi - lo))
        if len(limits) >= 2:
            pairs = [(limits[i] + limits[j]) / 2.0 for i in range(len(limits)) for j in range(i + 1, len(limits))]
            seeds.append(np.asarray(pairs))
    seed_arr = np.concatenate([s for s in seeds if len(s)], axis=0)
    polished, n_unconverged = _newton_stage(problem, seed_arr, newton_max_iter, residual_keep)
    candidates.append(polished)

    pool = np.concatenate([c for c in candidates if len(c)], axis=0) if any(len(c) for c in candidates) else np.empty((0, problem.dim))
    if len(pool) == 0:
        raise FixedPointError(
            f"no start converged ({len(seed_arr)} seeds, {n_unconverged} rejected in Newton polish)"
        )

    res = _residual(problem, pool)
    points, residuals = _dedupe(pool, res, dedupe_tol)
    order = np.lexsort(points.T[::-1])
    points, residuals = points[order], residuals[order]

    rho = _spectral_radius(problem, points)
    labels = tuple(
        CRITICAL if abs(r - 1.0) <= critical_band else (STABLE if r < 1.0 else UNSTABLE)
        for r in rho
    )
    return EquilibriumSet(points=points, stability=labels, residuals=residuals, n_unconverged=n_unconverged)


def count_fixed_points(problem: FixedPointProblem, **kwargs) -> int:
    return find_all(problem, **kwargs).count


def sweep(
    family: Callable[[float], FixedPointProblem],
    grid: Sequence[float],
    refine_tol: Optional[float] = 1e-6,
    **find_kwargs,
) -> Branch:
    """find_all along a parameter grid, bracketing count changes.

    Every change in the fixed-point count between adjacent grid values
    yields a FoldEvent; when refine_tol is set the event location is
    bisected down to that width, otherwise the bracket midpoint is
    reported.
    """
    params = np.asarray(list(grid), dtype=float)
    if params.size < 2:
        raise ValueError("sweep needs at least two grid values")
    sets = [find_all(family(p), **find_kwargs) for p in params]
    folds: list[FoldEvent] = []
    for k in range(len(params) - 1):
        c_lo, c_hi = sets[k].count, sets[k + 1].count
        if c_lo == c_hi:
            continue
        lo, hi = float(params[k]), float(params[k + 1])
        if refine_tol is not None:
            # bisect on a sorted bracket so descending grids work too
            a, b = min(lo, hi), max(lo, hi)
            count_a = c_lo if lo < hi else c_hi
            while b - a > refine_tol:
                mid = 0.5 * (a + b)
                if count_fixed_points(family(mid), **find_kwargs) == count_a:
                    a = mid
                else:
                    b = mid
            location = 0.5 * (a + b)
        else:
            location = 0.5 * (lo + hi)
        folds.append(FoldEvent(param_lo=lo, param_hi=hi, location=location, count_lo=c_lo, count_hi=c_hi))
    return Branch(params=params, sets=sets, folds=folds)


def converge_from(
    problem: FixedPointProblem,
    start: np.ndarray,
    damping: float = 0.5,
    max_iter: int = 10_000,
    residual_keep: float = 1e-10,
) -> np.ndarray:
    """Damped iteration from one start, Newton-polished; raises if it stalls
    above the residual threshold."""
    x = np.atleast_2d(np.asarray(start, dtype=float))
    x = _damped_stage(problem, x, damping, max_iter)
    polished, _ = _newton_stage(problem, x, 40, residual_keep)
    if len(polished):
        return polished[0]
    if _residual(problem, x)[0] <= residual_keep:
        return x[0]
    raise FixedPointError(f"warm start failed to converge (residual {_residual(problem, x)[0]:.3e})")


def follow(
    family: Callable[[float], FixedPointProblem],
    grid: Sequence[float],
    start: np.ndarray,
    jump_threshold: float = 0.25,
    refine_tol: Optional[float] = 1e-6,
    damping: float = 0.5,
    max_iter: int = 10_000,
) -> tuple[np.ndarray, list[JumpEvent]]:
    """Warm-started continuation of the branch occupied at grid[0].

    At each grid value the previous state seeds a damped iteration, so the
    tracked state stays on its stable branch until the branch disappears;
    a displacement larger than jump_threshold is recorded as a jump and
    optionally localized by bisection between the last on-branch and first
    off-branch parameters.
    """
    params = np.asarray(list(grid), dtype=float)
    state = converge_from(family(params[0]), start, damping=damping, max_iter=max_iter)
    states = [state]
    jumps: list[JumpEvent] = []
    for k in range(1, len(params)):
        nxt = converge_from(family(params[k]), state, damping=damping, max_iter=max_iter)
        if np.abs(nxt - state).max() > jump_threshold:
            on_p, off_p = float(params[k - 1]), float(params[k])
            pre = state.copy()
            if refine_tol is not None:
                anchor = state.copy()
                while abs(off_p - on_p) > refine_tol:
                    mid = 0.5 * (on_p + off_p)
                    try:
                        trial = converge_from(family(mid), anchor, damping=damping, max_iter=max_iter)
                    except FixedPointError:
                        # iteration stuck in the slow channel at the fold:
                        # the branch is already gone at mid
                        off_p = mid
                        continue
                    if np.abs(trial - anchor).max() <= jump_threshold:
                        on_p, anchor = mid, trial
                    else:
                        off_p = mid
                pre = anchor
            location = 0.5 * (on_p + off_p)
            jumps.append(
                JumpEvent(
                    param_lo=min(float(params[k - 1]), float(params[k])),
                    param_hi=max(float(params[k - 1]), float(params[k])),
                    location=location,
                    pre_state=pre,
                    post_state=nxt.copy(),
                )
            )
        state = nxt
        states.append(state)
    return np.asarray(states), jumps
