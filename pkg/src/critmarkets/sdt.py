"""Binary social decisions with a mean-field interaction.

Each agent chooses x in {-1, +1} under logit noise; the choice-relevant
part of utility is x*(h + J*m) where m is the neighborhood mean.  The
self-consistent population mean solves x = tanh(xi*(h + J*x)), which is
handed to the generic fixed-point machinery.  For h = 0 the model has a
symmetric pitchfork at xi*J = 1, located here by bisecting on the
fixed-point count rather than by that formula so the bifurcation search
can be validated against it.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .fixedpoint import Branch, EquilibriumSet, FixedPointProblem, find_all, sweep
from .games import SDTParams

__all__ = [
    "choice_prob",
    "mean_response",
    "utility",
    "fixedpoint_problem",
    "equilibria",
    "xi_sweep",
    "pitchfork_critical_xi",
]


def choice_prob(params: SDTParams, value: int, neighbor_mean: float) -> float:
    """P(x = value) given the neighborhood mean; value is -1 or +1.

    Equals the two-alternative logit: p(+1) is the logistic function of
    2*xi*(h + J*m) because only the own-choice terms differ between the
    alternatives.
    """
    if value not in (-1, 1):
        raise ValueError(f"value must be -1 or +1, got {value!r}")
    field = params.h + params.J * neighbor_mean
    return float(expit(2.0 * params.xi * value * field))


def mean_response(params: SDTParams, neighbor_mean) -> np.ndarray:
    """Expected choice tanh(xi*(h + J*m)) against a fixed neighborhood."""
    m = np.asarray(neighbor_mean, dtype=float)
    return np.tanh(params.xi * (params.h + params.J * m))


def utility(params: SDTParams, own_mean: float, neighbor_mean: float) -> float:
    """Deterministic utility k + h*own + f*neigh + J*own*neigh."""
    return (
        params.k
        + params.h * own_mean
        + params.f * neighbor_mean
        + params.J * own_mean * neighbor_mean
    )


def fixedpoint_problem(params: SDTParams) -> FixedPointProblem:
    """Self-consistency map x -> tanh(xi*(h + J*x)) on [-1, 1]."""
    xi, h, j = params.xi, params.h, params.J

    def the_map(x: np.ndarray) -> np.ndarray:
        return np.tanh(xi * (h + j * x))

    def the_jac(x: np.ndarray) -> np.ndarray:
        z = xi * (h + j * x)
        return (xi * j * (1.0 - np.tanh(z) ** 2))[..., None]

    return FixedPointProblem(map=the_map, jacobian=the_jac, dim=1)


def equilibria(params: SDTParams, **find_kwargs) -> EquilibriumSet:
    """All self-consistent means, with stability labels."""
    return find_all(fixedpoint_problem(params), **find_kwargs)


def xi_sweep(params: SDTParams, xi_grid, refine_tol=1e-6, **find_kwargs) -> Branch:
    """Sweep the inverse noise scale, holding the utility coefficients."""
    def family(xi: float) -> FixedPointProblem:
        return fixedpoint_problem(SDTParams(params.k, params.h, params.f, params.J, xi))

    return sweep(family, xi_grid, refine_tol=refine_tol, **find_kwargs)


def pitchfork_critical_xi(
    J: float,
    xi_lo: float | None = None,
    xi_hi: float | None = None,
    tol: float = 1e-6,
    n_coarse: int = 9,
) -> float:
    """Onset of multiple equilibria for the symmetric model (h = 0).

    The critical xi is found by sweeping the equilibrium count and
    bisecting the single fold event down to tol; it should land on 1/J,
    which makes this a direct check of the sweep machinery.
    """
    if J <= 0:
        raise ValueError(f"the symmetric model bifurcates only for J > 0, got J={J!r}")
    if xi_lo is None:
        xi_lo = 0.2 / J
    if xi_hi is None:
        xi_hi = 5.0 / J
    params = SDTParams(k=0.0, h=0.0, f=0.0, J=J, xi=xi_lo)
    branch = xi_sweep(params, np.linspace(xi_lo, xi_hi, n_coarse), refine_tol=tol)
    folds = [f for f in branch.folds if f.count_lo < f.count_hi]
    if not folds:
        raise ValueError(
            f"no equilibrium-count change in [{xi_lo}, {xi_hi}]; widen the bracket"
        )
    return folds[0].location
