"""Agent-based binary-choice market: N logit agents, social coupling, and
a log-price updated by excess demand.

Each step, agent i picks x_i in {-1, +1} with logit probabilities driven
by the utility difference 2*((pbar_t - p_{t-1}) + J*x_{t-1}), where pbar
is the expected log price under the configured rule and x_{t-1} is the
previous excess demand.  The price then moves by beta*x_t plus a Gaussian
shock of scale z.  With beta = z = 0 and the static price rule the
population mean follows the mean-field map x -> tanh(xi*J*x), which ties
the microsimulation to the single-population equilibrium module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import expit

from .sdt import SDTParams, equilibria

__all__ = ["ABMConfig", "MarketState", "MarketHistory", "step", "run", "mean_field_map"]

PRICE_RULES = ("static", "trend")


@dataclass(frozen=True)
class ABMConfig:
    """Simulation parameters.

    price_rule "static" sets the expected log price to the last price, so
    the public term vanishes and only the social term J*x drives choices;
    "trend" extrapolates the last price change.
    """

    n_agents: int
    horizon: int
    j: float
    xi: float
    z: float
    beta: float
    seed: int
    price_rule: str = "static"
    x0: float = 0.0
    p0: float = 0.0
    synchronous: bool = True
    store_choices: bool = True

    def __post_init__(self) -> None:
        if self.n_agents < 2:
            raise ValueError(f"n_agents must be >= 2, got {self.n_agents}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.xi < 0:
            raise ValueError(f"xi must be >= 0, got {self.xi}")
        if self.z < 0:
            raise ValueError(f"z must be >= 0, got {self.z}")
        if self.price_rule not in PRICE_RULES:
            raise ValueError(f"price_rule must be one of {PRICE_RULES}, got {self.price_rule!r}")
        if not -1.0 <= self.x0 <= 1.0:
            raise ValueError(f"x0 must lie in [-1, 1], got {self.x0}")


@dataclass(frozen=True)
class MarketState:
    """One time slice: current step index, the last two log prices, the
    excess demand, and the per-agent choices behind it."""

    t: int
    p: float
    p_prev: float
    x: float
    choices: np.ndarray


def _initial_choices(config: ABMConfig) -> np.ndarray:
    """Deterministic +-1 assignment whose mean is as close to x0 as the
    agent count allows."""
    n_up = round(config.n_agents * (1.0 + config.x0) / 2.0)
    choices = np.full(config.n_agents, -1, dtype=np.int8)
    choices[:n_up] = 1
    return choices


def initial_state(config: ABMConfig) -> MarketState:
    return MarketState(
        t=0, p=config.p0, p_prev=config.p0, x=config.x0, choices=_initial_choices(config)
    )


def _price_expectation_term(state: MarketState, config: ABMConfig) -> float:
    """pbar_t - p_{t-1} under the configured expectation rule."""
    if config.price_rule == "static":
        return 0.0
    return state.p - state.p_prev


def step(state: MarketState, config: ABMConfig, rng: np.random.Generator) -> MarketState:
    """Advance one step: draw all agent choices, aggregate excess demand,
    then update the log price.

    Synchronous mode gives every agent the same field from x_{t-1};
    asynchronous mode updates agents one at a time in random order, each
    seeing the running population mean.
    """
    public = _price_expectation_term(state, config)
    if config.synchronous:
        field_term = public + config.j * state.x
        p_up = expit(2.0 * config.xi * field_term)
        choices = np.where(rng.random(config.n_agents) < p_up, 1, -1).astype(np.int8)
    else:
        choices = state.choices.copy()
        total = int(choices.sum())
        order = rng.permutation(config.n_agents)
        draws = rng.random(config.n_agents)
        for pos, i in enumerate(order):
            mean_now = total / config.n_agents
            p_up = expit(2.0 * config.xi * (public + config.j * mean_now))
            new = 1 if draws[pos] < p_up else -1
            total += new - int(choices[i])
            choices[i] = new
    x = float(choices.sum()) / config.n_agents
    shock = config.z * rng.standard_normal() if config.z > 0 else 0.0
    p = state.p + config.beta * x + shock
    return MarketState(t=state.t + 1, p=p, p_prev=state.p, x=x, choices=choices)


@dataclass(frozen=True)
class MarketHistory:
    """Full simulation output.

    p and x have length horizon+1 (index 0 is the initial condition);
    choices has one row per simulated step, or None when not stored.
    """

    config: ABMConfig
    p: np.ndarray
    x: np.ndarray
    choices: np.ndarray | None = field(default=None)

    def summary(self, dwell_band: float = 0.1) -> dict:
        """Time-averaged diagnostics: mean |x|, standard deviation of price
        increments, and the fraction of steps spent within dwell_band of
        each stable mean-field equilibrium."""
        x_path = self.x[1:]
        stats = {
            "mean_abs_x": float(np.abs(x_path).mean()),
            "price_volatility": float(np.diff(self.p).std()),
        }
        eq = equilibria(SDTParams(k=0.0, h=0.0, f=0.0, J=self.config.j, xi=self.config.xi))
        dwell = {}
        for m_star in eq.stable_points()[:, 0]:
            frac = float((np.abs(x_path - m_star) < dwell_band).mean())
            dwell[round(float(m_star), 6)] = frac
        stats["dwell_fractions"] = dwell
        return stats


def run(config: ABMConfig) -> MarketHistory:
    """Simulate the full horizon; deterministic for a given config+seed."""
    rng = np.random.default_rng(config.seed)
    state = initial_state(config)
    p = np.empty(config.horizon + 1)
    x = np.empty(config.horizon + 1)
    p[0], x[0] = state.p, state.x
    choices = (
        np.empty((config.horizon, config.n_agents), dtype=np.int8)
        if config.store_choices
        else None
    )
    for t in range(1, config.horizon + 1):
        state = step(state, config, rng)
        p[t], x[t] = state.p, state.x
        if choices is not None:
            choices[t - 1] = state.choices
    return MarketHistory(config=config, p=p, x=x, choices=choices)


def mean_field_map(config: ABMConfig):
    """Deterministic large-N limit of the synchronous update with static
    price expectations: x -> tanh(xi*J*x).  E[x_t | x_{t-1}] equals this
    exactly because each agent's mean choice is 2*p_up - 1."""

    def the_map(x):
        return np.tanh(config.xi * config.j * np.asarray(x, dtype=float))

    return the_map


def replaced(config: ABMConfig, **changes) -> ABMConfig:
    """Functional update helper mirroring dataclasses.replace."""
    return replace(config, **changes)
