"""Break-even prices, rejection thresholds and truncation curves.

A criterion *resolves* a game when some finite ticket price makes it
recommend rejection.  :func:`resolves_matrix` computes that price for every
(criterion, game) pair and verifies it against :func:`eval_criterion`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .criteria import (
    DEFAULT_CONFIG,
    CriterionId,
    EvalConfig,
    Recommendation,
    Tag,
    eval_criterion,
    gain_term,
)
from .errors import DiagnosticError, DomainError
from .model import Game, Price, below_wealth, check_wealth, log_headroom, ruin_threshold

DEFAULT_CURVE_POINTS = 512
DEFAULT_CURVE_MAX_RATIO = 0.999
_INTEGER_GRACE = 1e-12


@dataclass(frozen=True)
class ResolutionReport:
    criterion: CriterionId
    game: Game
    resolves: bool
    rejecting_price: float | None = None
    breakeven_price: float | None = None

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion.value,
            "game": self.game.value,
            "resolves": self.resolves,
            "rejecting_price": self.rejecting_price,
            "breakeven_price": self.breakeven_price,
        }


@dataclass(frozen=True)
class NmaxCurvePoint:
    p0_over_w: float
    nmax_real: float
    nmax_int: int


def _value(criterion: CriterionId, game: Game, W: float, P: float, config: EvalConfig) -> float:
    v = eval_criterion(criterion, game, W, P, config)
    if v.tag is Tag.UNDEFINED:
        return -math.inf
    if not v.is_finite:
        raise DiagnosticError(f"criterion {criterion.value} for game {game.value} is {v.tag.value} at P={P!r}")
    return v.value


def _growth_root(W: float, config: EvalConfig) -> float:
    """Zero crossing of criterion II for game A on ``(0, W + 1)``."""

    def f(P):
        return _value(CriterionId.II, Game.A, W, P, config)

    upper = ruin_threshold(Game.A, W)
    if not f(0.0) > 0:
        raise DiagnosticError("criterion II for game A is not positive at a free ticket")
    # back off from the ruin singularity until the value is finite and negative
    b = None
    for k in range(1, 200):
        trial = upper - math.ldexp(upper, -k)
        if trial >= upper:
            break
        fb = f(trial)
        if math.isfinite(fb) and fb < 0:
            b = trial
            break
    if b is None:
        raise DiagnosticError("could not bracket the criterion II root for game A")
    return optimize.bisect(f, 0.0, b, xtol=config.root_tolerance, maxiter=500)


def breakeven_price(
    criterion: CriterionId,
    game: Game,
    W: float,
    config: EvalConfig = DEFAULT_CONFIG,
) -> float:
    """Price at which criterion II or III stops recommending play.

    For game A this is the zero crossing of the finite criterion value.  For
    B and C no finite crossing exists; the onset of the undefined region is
    returned instead (``W`` for III, ``W + D(1)`` for II).
    """
    check_wealth(W)
    if criterion is CriterionId.III:
        if game is Game.A:
            S = gain_term(game, W, config).value
            return -W * math.expm1(-S)
        return W
    if criterion is CriterionId.II:
        if game is Game.A:
            return _growth_root(W, config)
        return ruin_threshold(game, W)
    raise DomainError(f"break-even price is defined for criteria ii and iii only, got {criterion.value}")


def rejecting_price(
    criterion: CriterionId,
    game: Game,
    W: float,
    config: EvalConfig = DEFAULT_CONFIG,
) -> float | None:
    """Least price at which the criterion recommends rejection, if any."""
    check_wealth(W)
    if criterion in (CriterionId.II, CriterionId.III):
        return breakeven_price(criterion, game, W, config)
    # I and IV: the value at a free ticket is the most favourable one and
    # IV never changes with P; I diverges at every finite P.
    v = eval_criterion(criterion, game, W, 0.0, config)
    if v.recommendation(config) is Recommendation.REJECT:
        return 0.0
    return None


def _verify_rejection(criterion: CriterionId, game: Game, W: float, price: float, config: EvalConfig) -> None:
    slack = max(10 * config.root_tolerance, 1e-6 * max(price, 1.0))
    above = eval_criterion(criterion, game, W, price + slack, config).recommendation(config)
    below = eval_criterion(criterion, game, W, max(price - slack, 0.0), config).recommendation(config)
    if above is not Recommendation.REJECT or (price > slack and below is Recommendation.REJECT):
        raise DiagnosticError(
            f"rejecting price {price!r} for ({criterion.value}, {game.value}) fails verification: "
            f"below -> {below.value}, above -> {above.value}"
        )


def resolves_matrix(W: float, config: EvalConfig = DEFAULT_CONFIG) -> list[list[ResolutionReport]]:
    """4x3 table (criteria I..IV by games A..C) of :class:`ResolutionReport`."""
    check_wealth(W)
    rows = []
    for criterion in CriterionId:
        row = []
        for game in Game:
            price = rejecting_price(criterion, game, W, config)
            breakeven = None
            if price is not None:
                _verify_rejection(criterion, game, W, price, config)
                if game is Game.A and criterion in (CriterionId.II, CriterionId.III):
                    breakeven = price
            row.append(ResolutionReport(criterion, game, price is not None, price, breakeven))
        rows.append(row)
    return rows


def nmax_required(P0: float, W: float) -> float:
    """Number of tosses ``ln(W/(W - P0))`` that balances a price ``P0`` in game B."""
    check_wealth(W)
    if not (P0 >= 0 and below_wealth(W, P0)):
        raise DomainError(f"P0 must satisfy 0 <= P0 < W, got P0={P0!r}, W={W!r}")
    if isinstance(P0, Price):
        return math.log(W) - log_headroom(W, P0)
    return -math.log1p(-P0 / W)


def p0_of_nmax(n_max: float, W: float) -> Price:
    """Price ``W (1 - exp(-n_max))`` balanced by ``n_max`` tosses; always below ``W``.

    The result is a :class:`~petersburg.model.Price` that keeps
    ``ln(W - P0) = ln W - n_max`` exactly, which the double alone cannot
    once ``exp(-n_max)`` nears machine epsilon.
    """
    check_wealth(W)
    if not (n_max >= 0):
        raise DomainError(f"n_max must be nonnegative, got {n_max!r}")
    return Price(-W * math.expm1(-n_max), W, math.log(W) - n_max)


def _ceil_with_grace(x: float) -> int:
    nearest = round(x)
    if abs(x - nearest) <= _INTEGER_GRACE:
        return int(nearest)
    return math.ceil(x)


def nmax_curve(W: float, grid) -> list[NmaxCurvePoint]:
    """Real and integer toss counts for each ``P0/W`` ratio in ``grid`` (order kept)."""
    check_wealth(W)
    points = []
    for ratio in grid:
        ratio = float(ratio)
        if not (0 <= ratio < 1):
            raise DomainError(f"P0/W ratios must lie in [0, 1), got {ratio!r}")
        real = -math.log1p(-ratio)
        points.append(NmaxCurvePoint(ratio, real, _ceil_with_grace(real)))
    return points


def default_grid(points: int = DEFAULT_CURVE_POINTS, max_ratio: float = DEFAULT_CURVE_MAX_RATIO) -> list[float]:
    if points < 2:
        raise DomainError(f"need at least 2 grid points, got {points!r}")
    return np.linspace(0.0, max_ratio, points).tolist()
