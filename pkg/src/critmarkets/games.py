"""2x2 games: payoff containers, the g-parameter form, and the linear map
between game coefficients and binary social-decision coefficients.

Choices are encoded on {-1, +1}: a player's first choice maps to -1 and the
second to +1, so the mean strategy is <x> = 1 - 2*p(first choice).  In that
encoding the expected payoff of player i is the bilinear form

    V = g0 + g_self*<x>_own + g_other*<x>_opp + g12*<x>_own*<x>_opp

and the quadruple (g0, g_self, g_other, g12) is an invertible linear
reparameterization of the four payoffs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

__all__ = [
    "Game2x2",
    "GParams",
    "SDTParams",
    "TSPoint",
    "GameClass",
    "GameClassName",
    "to_gparams",
    "gparams_to_sdt",
    "sdt_to_payoffs",
    "expected_utility",
    "pure_nash",
    "profile_label",
    "classify_ts",
    "ts_game",
    "chicken_paper",
    "spillover",
    "complementarity",
    "three_equilibrium_condition",
    "game_to_json",
    "game_from_json",
]


def _require_finite(name: str, values: Iterable[float]) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Game2x2:
    """Two-player bimatrix game with payoffs stored per player.

    For each player the quadruple (a, b, c, d) is indexed by the joint
    choice: a at (1,1), c at (1,2), b at (2,1), d at (2,2), where the pair
    is (row choice, column choice) and player 1 picks the row.
    """

    a1: float
    b1: float
    c1: float
    d1: float
    a2: float
    b2: float
    c2: float
    d2: float

    def __post_init__(self) -> None:
        _require_finite("payoff", self.payoffs(1) + self.payoffs(2))

    def payoffs(self, player: int) -> tuple[float, float, float, float]:
        """Payoff quadruple (a, b, c, d) for one player."""
        if player == 1:
            return (self.a1, self.b1, self.c1, self.d1)
        if player == 2:
            return (self.a2, self.b2, self.c2, self.d2)
        raise ValueError(f"player must be 1 or 2, got {player!r}")

    def payoff(self, player: int, row: int, col: int) -> float:
        """Payoff at the pure profile (row, col), choices indexed 1/2."""
        a, b, c, d = self.payoffs(player)
        table = {(1, 1): a, (1, 2): c, (2, 1): b, (2, 2): d}
        try:
            return table[(row, col)]
        except KeyError:
            raise ValueError(f"choice indices must be 1 or 2, got {(row, col)!r}")

    @classmethod
    def from_matrices(cls, p1: "list[list[float]]", p2: "list[list[float]]") -> "Game2x2":
        """Build from row-major matrices [[a, c], [b, d]] per player."""
        (a1, c1), (b1, d1) = p1
        (a2, c2), (b2, d2) = p2
        return cls(a1, b1, c1, d1, a2, b2, c2, d2)

    def matrices(self) -> tuple[list[list[float]], list[list[float]]]:
        return (
            [[self.a1, self.c1], [self.b1, self.d1]],
            [[self.a2, self.c2], [self.b2, self.d2]],
        )


@dataclass(frozen=True)
class GParams:
    """Player-relative g-coefficients of a 2x2 game.

    g_self multiplies the player's own mean strategy, g_other the
    opponent's, and g12 the product term (strategic complementarity).
    """

    g0: float
    g_self: float
    g_other: float
    g12: float
    player: int = 1

    def __post_init__(self) -> None:
        _require_finite("g-parameter", (self.g0, self.g_self, self.g_other, self.g12))
        if self.player not in (1, 2):
            raise ValueError(f"player must be 1 or 2, got {self.player!r}")


@dataclass(frozen=True)
class SDTParams:
    """Coefficients of a binary social-decision utility.

    k is choice-independent, h weights the own choice, f the neighbor
    mean, J the own-choice/neighbor-mean product; xi >= 0 is the inverse
    noise scale.
    """

    k: float
    h: float
    f: float
    J: float
    xi: float

    def __post_init__(self) -> None:
        _require_finite("coefficient", (self.k, self.h, self.f, self.J, self.xi))
        if self.xi < 0:
            raise ValueError(f"xi must be >= 0, got {self.xi!r}")


@dataclass(frozen=True)
class TSPoint:
    """Symmetric-game coordinates: temptation T and sucker payoff S with
    mutual-cooperation payoff fixed at 1 and mutual-defection at 0."""

    t: float
    s: float

    def __post_init__(self) -> None:
        _require_finite("T/S coordinate", (self.t, self.s))


class GameClassName(str, Enum):
    HARMONY = "Harmony"
    STAG_HUNT = "StagHunt"
    PRISONERS_DILEMMA = "PrisonersDilemma"
    CHICKEN = "Chicken"
    BOUNDARY = "Boundary"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class GameClass:
    """Taxonomy result: region name plus the pure Nash profiles (as CC/CD/
    DC/DD labels, C being each player's first choice)."""

    name: GameClassName
    pure_ne: frozenset[str]


# Row-player g-coefficients from payoffs: quarter sums/differences over the
# four outcomes, grouped by own choice (rows), opponent choice (columns),
# and the diagonal.
def _gquad_from_payoffs(a: float, b: float, c: float, d: float) -> tuple[float, float, float, float]:
    g0 = (a + b + c + d) / 4.0
    g_rows = ((b + d) - (a + c)) / 4.0
    g_cols = ((c + d) - (a + b)) / 4.0
    g_diag = ((a + d) - (b + c)) / 4.0
    return g0, g_rows, g_cols, g_diag


def to_gparams(game: Game2x2, player: int) -> GParams:
    """g-parameterization of one player's payoffs.

    For player 1 the own choice indexes rows, for player 2 columns, so the
    row/column coefficients swap roles between the players.
    """
    a, b, c, d = game.payoffs(player)
    g0, g_rows, g_cols, g_diag = _gquad_from_payoffs(a, b, c, d)
    if player == 1:
        return GParams(g0, g_rows, g_cols, g_diag, player=1)
    return GParams(g0, g_cols, g_rows, g_diag, player=2)


def gparams_to_sdt(g: GParams, xi: float) -> SDTParams:
    """Identify game coefficients with social-decision coefficients.

    The correspondence is the identity (k, h, f, J) = (g0, g_self,
    g_other, g12); xi is carried along unchanged.
    """
    return SDTParams(k=g.g0, h=g.g_self, f=g.g_other, J=g.g12, xi=xi)


# Inverse of the quarter-sum map, as an exact integer matrix acting on
# (k, h, f, J) in row-oriented order; rows give (a, b, c, d).
_SDT_TO_PAYOFF = np.array(
    [
        [1, -1, -1, 1],
        [1, 1, -1, -1],
        [1, -1, 1, -1],
        [1, 1, 1, 1],
    ],
    dtype=float,
)


def sdt_to_payoffs(z: SDTParams, player: int = 1) -> tuple[float, float, float, float]:
    """Recover the payoff quadruple (a, b, c, d) from decision coefficients.

    The integer matrix is exact, so composing with the forward maps round
    trips in floating point.  For player 2 the own/other coefficients are
    swapped back into row/column order before inverting.
    """
    if player == 1:
        vec = np.array([z.k, z.h, z.f, z.J])
    elif player == 2:
        vec = np.array([z.k, z.f, z.h, z.J])
    else:
        raise ValueError(f"player must be 1 or 2, got {player!r}")
    a, b, c, d = _SDT_TO_PAYOFF @ vec
    return (float(a), float(b), float(c), float(d))


def expected_utility(game: Game2x2, player: int, mean_own: float, mean_other: float) -> float:
    """Expected payoff under independent mixed strategies given as means."""
    g = to_gparams(game, player)
    return g.g0 + g.g_self * mean_own + g.g_other * mean_other + g.g12 * mean_own * mean_other


def conditional_payoff(game: Game2x2, player: int, own_value: int, mean_other: float) -> float:
    """Expected payoff of playing one choice (own_value in {-1, +1}) against
    an opponent mixing with the given mean."""
    if own_value not in (-1, 1):
        raise ValueError(f"own_value must be -1 or +1, got {own_value!r}")
    return expected_utility(game, player, float(own_value), mean_other)


def pure_nash(game: Game2x2) -> frozenset[tuple[int, int]]:
    """All pure Nash profiles (row choice, column choice), weak inequalities."""
    out = set()
    for i in (1, 2):
        for j in (1, 2):
            u1 = game.payoff(1, i, j)
            u2 = game.payoff(2, i, j)
            if u1 >= game.payoff(1, 3 - i, j) and u2 >= game.payoff(2, i, 3 - j):
                out.add((i, j))
    return frozenset(out)


_PROFILE_LABELS = {(1, 1): "CC", (1, 2): "CD", (2, 1): "DC", (2, 2): "DD"}


def profile_label(profile: tuple[int, int]) -> str:
    """Label a pure profile with C for each player's first choice."""
    try:
        return _PROFILE_LABELS[profile]
    except KeyError:
        raise ValueError(f"profile must use choice indices 1/2, got {profile!r}")


def ts_game(point: TSPoint) -> Game2x2:
    """Symmetric game at a (T, S) point: both players get 1 for mutual
    cooperation, 0 for mutual defection, T for unilateral defection and S
    for unilateral cooperation."""
    t, s = point.t, point.s
    return Game2x2(
        a1=1.0, b1=t, c1=s, d1=0.0,
        a2=1.0, b2=s, c2=t, d2=0.0,
    )


def classify_ts(point: TSPoint) -> GameClass:
    """Classify a (T, S) point into the four-quadrant taxonomy.

    Interior quadrants split at T = 1 and S = 0; points on either line are
    classified Boundary.  The reported pure Nash set always comes from
    exhaustive deviation checks on the induced game, so it stays truthful
    on the boundaries where ties create extra weak equilibria.
    """
    ne = frozenset(profile_label(p) for p in pure_nash(ts_game(point)))
    if point.t == 1.0 or point.s == 0.0:
        name = GameClassName.BOUNDARY
    elif point.t < 1.0 and point.s > 0.0:
        name = GameClassName.HARMONY
    elif point.t < 1.0 and point.s < 0.0:
        name = GameClassName.STAG_HUNT
    elif point.t > 1.0 and point.s > 0.0:
        name = GameClassName.CHICKEN
    else:
        name = GameClassName.PRISONERS_DILEMMA
    return GameClass(name=name, pure_ne=ne)


def chicken_paper() -> Game2x2:
    """The asymmetric-payoff anti-coordination example used throughout the
    test suite: two pure equilibria on the off-diagonal and a mixed one at
    mean strategies (1/3, 1/3)."""
    return Game2x2(
        a1=0.0, b1=2.0, c1=7.0, d1=6.0,
        a2=0.0, b2=7.0, c2=2.0, d2=6.0,
    )


def spillover(g: GParams) -> float:
    """Marginal effect of the opponent's mean on expected utility at
    g12 = 0 (the externality the opponent exerts regardless of own play)."""
    return g.g_other


def complementarity(g: GParams) -> float:
    """Coefficient of the own*opponent product term."""
    return g.g12


def three_equilibrium_condition(g: GParams) -> bool:
    """Whether the product term dominates the own-choice bias, |g_self| <
    |g12|.  Both players must satisfy it for the coupled best-response map
    to admit multiple equilibria at high precision."""
    return abs(g.g_self) < abs(g.g12)


def game_to_json(game: Game2x2) -> str:
    """Serialize as {"p1": [[a, c], [b, d]], "p2": [[a, c], [b, d]]}."""
    p1, p2 = game.matrices()
    return json.dumps({"p1": p1, "p2": p2})


def game_from_json(text: str) -> Game2x2:
    """Parse the matrix JSON format produced by game_to_json."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid game JSON: {exc}") from exc
    if not isinstance(obj, dict) or set(obj) != {"p1", "p2"}:
        raise ValueError("game JSON must be an object with keys 'p1' and 'p2'")
    for key in ("p1", "p2"):
        m = obj[key]
        if (
            not isinstance(m, list)
            or len(m) != 2
            or any(not isinstance(row, list) or len(row) != 2 for row in m)
        ):
            raise ValueError(f"'{key}' must be a 2x2 matrix [[a, c], [b, d]]")
    return Game2x2.from_matrices(obj["p1"], obj["p2"])
