"""Equilibria, bifurcations, and simulation for binary-choice market models.

Subpackage map:

- games: 2x2 payoff containers, interaction-parameter transforms, Nash
  enumeration, and the temptation/safety taxonomy.
- logit: extreme-value choice probabilities and Monte Carlo checks.
- fixedpoint: generic solve/sweep/continuation machinery for small maps.
- sdt: single population with a social field, pitchfork analysis.
- qre: two-player logit responses, region A/B classification, fold curve.
- cusp: quartic potential, fold boundary, stationary density, SDE paths.
- twin: coupled markets, sensitivity to noise scales, hysteresis sweeps.
- abm: explicit N-agent market simulation tied to the mean-field map.
- cli: command-line front end; `verify` runs the invariant suites.
"""

from .abm import ABMConfig, MarketHistory
from .cusp import CuspControl, Region, StationaryDensity
from .fixedpoint import (
    CRITICAL,
    STABLE,
    UNSTABLE,
    Branch,
    EquilibriumSet,
    FixedPointError,
    FixedPointProblem,
    FoldEvent,
    JumpEvent,
    find_all,
    follow,
    sweep,
)
from .games import (
    Game2x2,
    GameClass,
    GameClassName,
    GParams,
    SDTParams,
    TSPoint,
    classify_ts,
    chicken_paper,
    gparams_to_sdt,
    pure_nash,
    sdt_to_payoffs,
    to_gparams,
    ts_game,
)
from .logit import ChoiceProblem, GumbelParams, logit_probs, sample_gumbel_argmax
from .qre import CriticalSet, QREModel, critical_set, qre_equilibria, qre_response
from .sdt import equilibria, pitchfork_critical_xi, xi_sweep
from .twin import CoupledMarkets, SweepResult, joint_equilibria, one_sided_sweep

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ABMConfig",
    "MarketHistory",
    "CuspControl",
    "Region",
    "StationaryDensity",
    "CRITICAL",
    "STABLE",
    "UNSTABLE",
    "Branch",
    "EquilibriumSet",
    "FixedPointError",
    "FixedPointProblem",
    "FoldEvent",
    "JumpEvent",
    "find_all",
    "follow",
    "sweep",
    "Game2x2",
    "GameClass",
    "GameClassName",
    "GParams",
    "SDTParams",
    "TSPoint",
    "classify_ts",
    "chicken_paper",
    "gparams_to_sdt",
    "pure_nash",
    "sdt_to_payoffs",
    "to_gparams",
    "ts_game",
    "ChoiceProblem",
    "GumbelParams",
    "logit_probs",
    "sample_gumbel_argmax",
    "CriticalSet",
    "QREModel",
    "critical_set",
    "qre_equilibria",
    "qre_response",
    "equilibria",
    "pitchfork_critical_xi",
    "xi_sweep",
    "CoupledMarkets",
    "SweepResult",
    "joint_equilibria",
    "one_sided_sweep",
]
