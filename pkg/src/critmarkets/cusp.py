"""Cusp catastrophe: quartic potential, fold set, and stochastic steady state.

The potential W(x) = x^4/4 - u1*x^2/2 - u2*x has stationary points at the
real roots of x^3 - u1*x - u2 = 0.  The discriminant 4*u1^3 - 27*u2^2
splits the control plane into a one-root region (A), a three-root region
(B), and the fold boundary where roots merge.  Gradient-descent dynamics
with additive noise of scale sigma has stationary density proportional to
exp(-xi*W) with xi = 2/sigma^2, so density modes sit exactly on the
stable stationary points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .fixedpoint import CRITICAL, STABLE, UNSTABLE, EquilibriumSet, FixedPointProblem

__all__ = [
    "CuspControl",
    "Region",
    "potential",
    "drift",
    "discriminant",
    "classify_region",
    "stationary_points",
    "critical_boundary",
    "gradient_map_problem",
    "StationaryDensity",
    "simulate_sde",
    "trajectory_density_tv",
]


@dataclass(frozen=True)
class CuspControl:
    """Control-plane coordinates: u1 tilts the quadratic term (splitting),
    u2 the linear term (asymmetry)."""

    u1: float
    u2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u1) and math.isfinite(self.u2)):
            raise ValueError("u1 and u2 must be finite")


class Region(str, Enum):
    A = "A"  # single stationary point
    B = "B"  # two stable states separated by a barrier
    CRITICAL = "critical"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


def potential(c: CuspControl, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 0.25 * x**4 - 0.5 * c.u1 * x**2 - c.u2 * x


def drift(c: CuspControl, x) -> np.ndarray:
    """Negative potential gradient -x^3 + u1*x + u2."""
    x = np.asarray(x, dtype=float)
    return -(x**3) + c.u1 * x + c.u2


def discriminant(c: CuspControl) -> float:
    return 4.0 * c.u1**3 - 27.0 * c.u2**2


def classify_region(c: CuspControl, band: float = 1e-12) -> Region:
    """Sign of the discriminant with a relative dead band around zero."""
    delta = discriminant(c)
    scale = max(1.0, 4.0 * abs(c.u1) ** 3, 27.0 * c.u2**2)
    if abs(delta) <= band * scale:
        return Region.CRITICAL
    return Region.B if delta > 0 else Region.A


def _cubic_roots(u1: float, u2: float) -> list[float]:
    """Real roots of x^3 - u1*x - u2 = 0 in closed form."""
    delta = 4.0 * u1**3 - 27.0 * u2**2
    if u1 == 0.0 and u2 == 0.0:
        return [0.0]
    if delta == 0.0:
        # exact fold: double root r and simple root -2r
        r = math.copysign(abs(-u2 / 2.0) ** (1.0 / 3.0), -u2) if u2 != 0 else 0.0
        return sorted({r, -2.0 * r})
    if delta > 0:
        # three real roots, trigonometric form (u1 > 0 here)
        m = 2.0 * math.sqrt(u1 / 3.0)
        arg = 3.0 * math.sqrt(3.0) * u2 / (2.0 * u1 ** 1.5)
        theta = math.acos(min(1.0, max(-1.0, arg)))
        return sorted(m * math.cos((theta - 2.0 * math.pi * k) / 3.0) for k in range(3))
    # one real root, Cardano with sign-aware cube roots
    s = math.sqrt(-delta / 108.0)
    return [float(np.cbrt(u2 / 2.0 + s) + np.cbrt(u2 / 2.0 - s))]


def stationary_points(c: CuspControl) -> EquilibriumSet:
    """Stationary points of the potential, sorted ascending.

    Stability is by potential curvature: 3x^2 > u1 marks a local minimum
    (stable under gradient descent), with a curvature dead band labelling
    fold and cusp points critical.
    """
    roots = _cubic_roots(c.u1, c.u2)
    scale = max(1.0, abs(c.u1), abs(c.u2))
    polished = []
    for r in roots:
        x = r
        for _ in range(3):
            g = x**3 - c.u1 * x - c.u2
            dg = 3.0 * x**2 - c.u1
            if abs(dg) < 1e-9 * scale:
                break
            x -= g / dg
        polished.append(x)
    points = np.asarray(sorted(polished))[:, None]
    curvature = 3.0 * points[:, 0] ** 2 - c.u1
    labels = tuple(
        CRITICAL if abs(w) <= 1e-9 * scale else (STABLE if w > 0 else UNSTABLE)
        for w in curvature
    )
    residuals = np.abs(drift(c, points[:, 0]))
    return EquilibriumSet(points=points, stability=labels, residuals=residuals)


def critical_boundary(u1_max: float = 3.0, n: int = 201) -> np.ndarray:
    """Fold curve 4*u1^3 = 27*u2^2 as an ordered polyline through the cusp.

    Rows are (u1, u2), running up one fold arm from u1_max, through the
    cusp point at the origin, and back out the other arm.
    """
    if u1_max <= 0:
        raise ValueError("the fold curve lives at u1 > 0")
    u1_half = np.linspace(u1_max, 0.0, (n + 1) // 2)
    u2_half = np.sqrt(4.0 * u1_half**3 / 27.0)
    down = np.stack([u1_half, -u2_half], axis=-1)
    up = np.stack([u1_half[::-1], u2_half[::-1]], axis=-1)
    return np.concatenate([down, up[1:]], axis=0)


def gradient_map_problem(c: CuspControl, step: float = 0.2, bound: float = 3.0) -> FixedPointProblem:
    """Damped gradient-descent map x -> x + step*drift(x); its fixed points
    are the stationary points, so the generic sweep machinery applies."""

    def the_map(x: np.ndarray) -> np.ndarray:
        return x + step * (-(x**3) + c.u1 * x + c.u2)

    def the_jac(x: np.ndarray) -> np.ndarray:
        return (1.0 + step * (c.u1 - 3.0 * x**2))[..., None]

    return FixedPointProblem(map=the_map, jacobian=the_jac, dim=1, lower=(-bound,), upper=(bound,))


class StationaryDensity:
    """Normalized stationary density p(x) proportional to exp(-xi*W(x)).

    The support is truncated to [-L, L] with L grown from
    max(3, |outermost root| + 5/sqrt(xi)) by doubling until the relative
    tail weight at the edges drops below 1e-16 of the peak.
    """

    def __init__(self, c: CuspControl, xi: float):
        if not math.isfinite(xi) or xi <= 0:
            raise ValueError(f"xi must be finite and > 0, got {xi!r}")
        self.control = c
        self.xi = xi
        pts = stationary_points(c)
        self._w_min = float(potential(c, pts.points[:, 0]).min())
        L = max(3.0, float(np.abs(pts.points).max()) + 5.0 / math.sqrt(xi))
        for _ in range(60):
            if self._log_weight(np.array([-L, L])).max() <= math.log(1e-16):
                break
            L *= 2.0
        self.half_width = L
        inner = [float(v) for v in pts.points[:, 0] if -L < v < L]
        z, _ = quad(self._weight, -L, L, points=inner, limit=200)
        self._z = z

    def _log_weight(self, x) -> np.ndarray:
        return -self.xi * (potential(self.control, x) - self._w_min)

    def _weight(self, x) -> np.ndarray:
        return np.exp(self._log_weight(x))

    def pdf(self, x) -> np.ndarray:
        """Density, zero outside [-L, L]."""
        x = np.asarray(x, dtype=float)
        inside = (x >= -self.half_width) & (x <= self.half_width)
        return np.where(inside, self._weight(x) / self._z, 0.0)

    def bin_mass(self, lo: float, hi: float) -> float:
        mass, _ = quad(self._weight, lo, hi, limit=200)
        return mass / self._z

    def normalization_check(self) -> float:
        """Integral of pdf over the support; should be 1 to quadrature
        accuracy."""
        inner = [float(v) for v in stationary_points(self.control).points[:, 0]]
        total, _ = quad(self.pdf, -self.half_width, self.half_width, points=inner, limit=200)
        return float(total)

    def modes(self, n_scan: int = 2001) -> np.ndarray:
        """Local maxima of the density, found by scanning and polishing the
        density itself (not by reusing the root solver)."""
        xs = np.linspace(-self.half_width, self.half_width, n_scan)
        logw = self._log_weight(xs)
        out = []
        for i in range(1, n_scan - 1):
            if logw[i] >= logw[i - 1] and logw[i] > logw[i + 1]:
                res = minimize_scalar(
                    lambda x: -self._log_weight(x),
                    bounds=(xs[i - 1], xs[i + 1]),
                    method="bounded",
                    options={"xatol": 1e-12},
                )
                out.append(float(res.x))
        return np.asarray(sorted(out))


def simulate_sde(
    c: CuspControl,
    sigma: float,
    dt: float,
    steps: int,
    seed: int,
    x0: float = 0.0,
) -> np.ndarray:
    """Euler-Maruyama path of dx = drift(x) dt + sigma dW.

    Deterministic for a given seed.  A warning is raised if the drift step
    ever exceeds the unit domain scale, which signals dt too large for the
    cubic drift.
    """
    if sigma < 0 or dt <= 0 or steps < 1:
        raise ValueError("need sigma >= 0, dt > 0, steps >= 1")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(steps) * (sigma * math.sqrt(dt))
    path = np.empty(steps + 1)
    path[0] = x = float(x0)
    max_drift_step = 0.0
    u1, u2 = c.u1, c.u2
    for t in range(steps):
        d = (-(x**3) + u1 * x + u2) * dt
        a = abs(d)
        if a > max_drift_step:
            max_drift_step = a
        x = x + d + noise[t]
        path[t + 1] = x
    if max_drift_step > 1.0:
        warnings.warn(
            f"drift step reached {max_drift_step:.3g} > 1; decrease dt for a faithful path",
            RuntimeWarning,
            stacklevel=2,
        )
    return path


def trajectory_density_tv(
    path: np.ndarray,
    density: StationaryDensity,
    n_bins: int = 31,
    burn_in: int = 1000,
) -> float:
    """Total variation between a path's occupation histogram and the
    analytic stationary density, on bins covering the visited range."""
    samples = np.asarray(path)[burn_in:]
    lo, hi = float(samples.min()), float(samples.max())
    edges = np.linspace(lo, hi, n_bins + 1)
    counts, _ = np.histogram(samples, bins=edges)
    emp = counts / counts.sum()
    ana = np.array([density.bin_mass(edges[i], edges[i + 1]) for i in range(n_bins)])
    # mass the analytic density puts outside the visited range counts as error
    return 0.5 * (np.abs(emp - ana).sum() + (1.0 - ana.sum()))
