"""Discrete choice under extreme-value noise.

A decision maker picks the alternative maximizing V_j + eps_j where the
eps_j are i.i.d. Gumbel.  The resulting choice probabilities are the logit
form p_j = exp(xi*V_j) / sum_k exp(xi*V_k), with inverse noise scale xi
equal to the reciprocal of the Gumbel scale.  The module provides the
analytic probabilities, a Monte Carlo argmax sampler usable as an
independent check, and the noise distribution itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChoiceProblem",
    "GumbelParams",
    "logit_probs",
    "sample_gumbel_argmax",
    "gumbel_cdf",
    "gumbel_pdf",
    "tv_distance",
]


@dataclass(frozen=True)
class ChoiceProblem:
    """A finite menu of alternatives with deterministic utilities."""

    utilities: tuple[float, ...]
    xi: float

    def __post_init__(self) -> None:
        if len(self.utilities) < 2:
            raise ValueError("a choice problem needs at least 2 alternatives")
        if any(not math.isfinite(v) for v in self.utilities):
            raise ValueError("utilities must be finite")
        if not math.isfinite(self.xi) or self.xi < 0:
            raise ValueError(f"xi must be finite and >= 0, got {self.xi!r}")


@dataclass(frozen=True)
class GumbelParams:
    """Location/scale of a Gumbel (type-I extreme value) distribution."""

    mu: float = 0.0
    gamma: float = 1.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.mu) or not math.isfinite(self.gamma):
            raise ValueError("mu and gamma must be finite")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")

    @property
    def std(self) -> float:
        return self.gamma * math.pi / math.sqrt(6.0)


def logit_probs(problem: ChoiceProblem) -> np.ndarray:
    """Choice probabilities exp(xi*V_j) / sum exp(xi*V_k).

    The shared maximum of xi*V is subtracted before exponentiating, so the
    computation never overflows and exact utility ties at the top split
    mass equally as xi grows.  xi = 0 gives the uniform distribution.
    """
    v = np.asarray(problem.utilities, dtype=float)
    z = problem.xi * v
    z -= z.max()
    w = np.exp(z)
    return w / w.sum()


def sample_gumbel_argmax(
    problem: ChoiceProblem,
    n: int,
    seed: int,
    chunk: int = 200_000,
) -> np.ndarray:
    """Empirical argmax frequencies of V_j + eps_j over n Gumbel draws.

    The noise scale is 1/xi, so xi = 0 is rejected rather than sampled.
    Draws are chunked to bound memory; results are deterministic for a
    given seed.  Ties (measure zero) resolve to the lowest index.
    """
    if problem.xi == 0:
        raise ValueError("xi = 0 has no Gumbel representation (infinite noise scale)")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    v = np.asarray(problem.utilities, dtype=float)
    gamma = 1.0 / problem.xi
    rng = np.random.default_rng(seed)
    counts = np.zeros(v.size, dtype=np.int64)
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        eps = rng.gumbel(loc=0.0, scale=gamma, size=(m, v.size))
        idx = np.argmax(v[None, :] + eps, axis=1)
        counts += np.bincount(idx, minlength=v.size)
        remaining -= m
    return counts / float(n)


def gumbel_cdf(x, params: GumbelParams = GumbelParams()) -> np.ndarray:
    """F(x) = exp(-exp(-(x - mu)/gamma)), vectorized over x."""
    z = (np.asarray(x, dtype=float) - params.mu) / params.gamma
    return np.exp(-np.exp(-z))


def gumbel_pdf(x, params: GumbelParams = GumbelParams()) -> np.ndarray:
    """f(x) = exp(-z - exp(-z))/gamma with z = (x - mu)/gamma."""
    z = (np.asarray(x, dtype=float) - params.mu) / params.gamma
    return np.exp(-z - np.exp(-z)) / params.gamma


def tv_distance(p, q) -> float:
    """Total variation distance between two discrete distributions."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError("distributions must have the same shape")
    return 0.5 * float(np.abs(p - q).sum())
