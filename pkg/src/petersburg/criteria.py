"""Decision criteria i-iv for the St. Petersburg-type games.

* I   -- expected net change of wealth, ``<D> - P``
* II  -- time-average growth rate, ``sum 2**-n ln((W - P + D(n))/W)``
* III -- expected log-utility gain minus the log-utility lost at purchase
* IV  -- expected log-utility gain alone (ignores the price)

Every evaluator returns a :class:`CriterionValue`.  Divergence is decided
analytically per game and cross-checked numerically; finite values carry a
certified bound on the neglected series tail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

from .errors import DiagnosticError, DomainError, NegativeAmountError
from .logamount import LogAmount
from .model import (
    LN2,
    N_CAP,
    Game,
    Price,
    below_wealth,
    check_price,
    check_wealth,
    is_ruinous,
    log_gain_ratio,
    log_headroom,
    log_net_ratio,
    payout_log,
    waiting_prob,
)


class CriterionId(enum.Enum):
    I = "i"
    II = "ii"
    III = "iii"
    IV = "iv"


class Tag(enum.Enum):
    FINITE = "finite"
    POS_DIVERGENT = "pos_divergent"
    NEG_DIVERGENT = "neg_divergent"
    UNDEFINED = "undefined"


class Recommendation(enum.Enum):
    PLAY = "play"
    INDIFFERENT = "indifferent"
    REJECT = "reject"


class TruncationPolicy(enum.Enum):
    REFUND_TICKET = "refund"
    FORFEIT_TICKET = "forfeit"


class Convergence(enum.Enum):
    CONVERGENT = "convergent"
    DIVERGENT = "divergent"


class ToleranceError(DomainError):
    """The certified tail bound cannot meet the requested tolerance."""


@dataclass(frozen=True)
class EvalConfig:
    tail_tolerance: float = 1e-12
    n_cap: int = N_CAP
    divergence_probe_terms: int = 40
    root_tolerance: float = 1e-12

    def __post_init__(self):
        for name in ("tail_tolerance", "root_tolerance"):
            value = getattr(self, name)
            if not (value > 0):
                raise DomainError(f"{name} must be positive, got {value!r}")
        if not (1 <= self.n_cap <= N_CAP):
            raise DomainError(f"n_cap must lie in 1..{N_CAP}, got {self.n_cap!r}")
        if not (1 <= self.divergence_probe_terms <= N_CAP):
            raise DomainError(
                f"divergence_probe_terms must lie in 1..{N_CAP}, got {self.divergence_probe_terms!r}"
            )

    @property
    def indifference_band(self) -> float:
        return 10 * self.tail_tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "tail_tolerance": self.tail_tolerance,
            "n_cap": self.n_cap,
            "divergence_probe_terms": self.divergence_probe_terms,
            "root_tolerance": self.root_tolerance,
        }


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class CriterionValue:
    """Tagged criterion result.

    ``value`` and ``error_bound`` are set only for ``Tag.FINITE``; the true
    series value lies within ``error_bound`` of ``value``.
    """

    tag: Tag
    value: float | None = None
    error_bound: float | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def finite(cls, value: float, error_bound: float = 0.0, **diagnostics) -> CriterionValue:
        return cls(Tag.FINITE, value, error_bound, diagnostics)

    @classmethod
    def of(cls, tag: Tag, **diagnostics) -> CriterionValue:
        return cls(tag, None, None, diagnostics)

    @property
    def is_finite(self) -> bool:
        return self.tag is Tag.FINITE

    def recommendation(self, config: EvalConfig = DEFAULT_CONFIG) -> Recommendation:
        if self.tag is Tag.POS_DIVERGENT:
            return Recommendation.PLAY
        if self.tag in (Tag.NEG_DIVERGENT, Tag.UNDEFINED):
            return Recommendation.REJECT
        if abs(self.value) <= config.indifference_band:
            return Recommendation.INDIFFERENT
        return Recommendation.PLAY if self.value > 0 else Recommendation.REJECT

    def __sub__(self, other: CriterionValue) -> CriterionValue:
        if Tag.UNDEFINED in (self.tag, other.tag):
            return CriterionValue.of(Tag.UNDEFINED)
        if self.is_finite and other.is_finite:
            return CriterionValue.finite(self.value - other.value, self.error_bound + other.error_bound)
        # at least one side diverges
        lhs = _sign(self)
        rhs = _sign(other)
        if lhs is not None and rhs is not None and lhs == rhs:
            # infinity minus the same infinity: no ordering without more structure
            return CriterionValue.of(Tag.UNDEFINED)
        if self.tag is Tag.POS_DIVERGENT or other.tag is Tag.NEG_DIVERGENT:
            return CriterionValue.of(Tag.POS_DIVERGENT)
        return CriterionValue.of(Tag.NEG_DIVERGENT)

    def to_dict(self) -> dict[str, Any]:
        return {
            "tag": self.tag.value,
            "value": self.value,
            "error_bound": self.error_bound,
            "diagnostics": dict(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> CriterionValue:
        return cls(Tag(data["tag"]), data.get("value"), data.get("error_bound"), dict(data.get("diagnostics", {})))


def _sign(v: CriterionValue) -> int | None:
    return {Tag.POS_DIVERGENT: 1, Tag.NEG_DIVERGENT: -1}.get(v.tag)


# -- series machinery -------------------------------------------------------

def _growth_tail_upper(W: float, N: int) -> float:
    """Upper bound on ``sum_{n>N} 2**-n ln((W + 2**(n-1))/W)``.

    Uses ``ln(1 + a) <= ln 2 + max(0, ln a)`` with ``a = 2**(n-1)/W`` and
    ``sum_{n>N} n 2**-n = (N + 2) 2**-N``.
    """
    c = max(0.0, -math.log(W))
    return math.ldexp((N + 2) * LN2 + c, -N)


def _finite_series(terms: list[float], tail_lower: float, tail_upper: float, config: EvalConfig) -> CriterionValue:
    partial = math.fsum(waiting_prob(n) * t for n, t in enumerate(terms, start=1))
    bound = max(abs(tail_lower), abs(tail_upper))
    if bound > config.tail_tolerance:
        raise ToleranceError(
            f"tail bound {bound:.3g} after {len(terms)} terms exceeds tail_tolerance {config.tail_tolerance:.3g}"
        )
    return CriterionValue.finite(
        partial,
        bound,
        terms_summed=len(terms),
        tail_lower=tail_lower,
        tail_upper=tail_upper,
    )


_ANALYTIC = {Game.A: Convergence.CONVERGENT, Game.B: Convergence.DIVERGENT, Game.C: Convergence.DIVERGENT}


def classify_divergence(game: Game, W: float, config: EvalConfig = DEFAULT_CONFIG) -> Convergence:
    """Whether ``sum 2**-n ln((W + D(n))/W)`` converges.

    The analytic answer (A converges geometrically; the terms of B and C
    tend to 1) is cross-checked by probing the first
    ``config.divergence_probe_terms`` terms.
    """
    check_wealth(W)
    tag = _ANALYTIC[game]
    k = config.divergence_probe_terms
    terms = [waiting_prob(n) * log_gain_ratio(game, n, W) for n in range(1, k + 1)]
    tail = terms[-min(5, k):]
    if min(tail) > 0.5:
        probe = Convergence.DIVERGENT
    elif max(tail) < 1e-6 and all(t <= waiting_prob(n) * (n * LN2 + max(0.0, -math.log(W))) * (1 + 1e-12)
                                    for n, t in enumerate(terms, start=1)):
        probe = Convergence.CONVERGENT
    else:
        probe = None
    if probe is not tag:
        raise DiagnosticError(
            f"game {game.value}: analytic tag {tag.value} disagrees with numeric probe "
            f"{probe.value if probe else 'inconclusive'} over {k} terms (last terms {tail})"
        )
    return tag


def gain_term(game: Game, W: float, config: EvalConfig = DEFAULT_CONFIG) -> CriterionValue:
    """Expected log-utility gain ``sum 2**-n ln((W + D(n))/W)`` (ticket free)."""
    check_wealth(W)
    if classify_divergence(game, W, config) is Convergence.DIVERGENT:
        diag: dict[str, Any] = {"term_limit": 1.0, "terms_summed": config.n_cap}
        if game is Game.B:
            diag["partial_sum"] = float(config.n_cap)
        return CriterionValue.of(Tag.POS_DIVERGENT, **diag)
    N = config.n_cap
    terms = [log_gain_ratio(game, n, W) for n in range(1, N + 1)]
    return _finite_series(terms, 0.0, _growth_tail_upper(W, N), config)


def cost_term(W: float, P: float) -> CriterionValue:
    """Log-utility lost at purchase, ``ln(W/(W - P))``; undefined for ``P >= W``."""
    check_wealth(W)
    check_price(P)
    if not below_wealth(W, P):
        return CriterionValue.of(Tag.UNDEFINED, reason="price at or above wealth")
    if isinstance(P, Price):
        return CriterionValue.finite(math.log(W) - log_headroom(W, P))
    return CriterionValue.finite(-math.log1p(-P / W))


def _growth_rate(game: Game, W: float, P: float, config: EvalConfig) -> CriterionValue:
    if is_ruinous(game, W, P):
        return CriterionValue.of(Tag.UNDEFINED, reason="worst case is ruin")
    N = config.n_cap
    try:
        terms = [log_net_ratio(game, n, W, P) for n in range(1, N + 1)]
    except NegativeAmountError:
        return CriterionValue.of(Tag.UNDEFINED, reason="worst case is ruin")
    if math.isinf(terms[0]):
        return CriterionValue.of(Tag.UNDEFINED, reason="worst case is ruin")
    if classify_divergence(game, W, config) is Convergence.DIVERGENT:
        return CriterionValue.of(Tag.POS_DIVERGENT, term_limit=1.0, terms_summed=N)
    # terms increase with n, and never exceed the P = 0 growth terms
    tail_lower = math.ldexp(min(terms[-1], 0.0), -N)
    return _finite_series(terms, tail_lower, _growth_tail_upper(W, N), config)


def _expected_net_change(game: Game, W: float, P: float, config: EvalConfig) -> CriterionValue:
    N = config.n_cap
    log_mean = LogAmount.zero()
    for n in range(1, N + 1):
        log_mean = log_mean + LogAmount(payout_log(game, n, W).log_value - n * LN2)
    diag: dict[str, Any] = {"n_max": N, "log_truncated_mean_payout": log_mean.log_value}
    if game is Game.A:
        # each toss adds exactly 1/2 to the truncated expectation
        diag["truncated_value"] = N / 2 - P
        diag["growth_per_toss"] = 0.5
    return CriterionValue.of(Tag.POS_DIVERGENT, **diag)


def eval_criterion(
    criterion: CriterionId,
    game: Game,
    W: float,
    P: float,
    config: EvalConfig = DEFAULT_CONFIG,
) -> CriterionValue:
    """Evaluate one criterion for one game at wealth ``W`` and price ``P``."""
    check_wealth(W)
    check_price(P)
    if criterion is CriterionId.I:
        return _expected_net_change(game, W, P, config)
    if criterion is CriterionId.II:
        return _growth_rate(game, W, P, config)
    if criterion is CriterionId.III:
        return gain_term(game, W, config) - cost_term(W, P)
    return gain_term(game, W, config)


def expected_net_log_utility(game: Game, W: float, P: float, config: EvalConfig = DEFAULT_CONFIG) -> float:
    """``<ln(W - P + D(n))> - ln W`` summed outcome by outcome up to ``n_cap``.

    Works with absolute log-wealth rather than growth ratios, so it shares
    no arithmetic with the criterion II evaluator.  Only meaningful where
    the sum converges (game A); raises for ruinous prices.
    """
    check_wealth(W)
    check_price(P)
    if is_ruinous(game, W, P):
        raise DomainError(f"P={P!r} >= W + D(1): log utility of the worst case is undefined")
    ln_w = math.log(W)
    parts = []
    for n in range(1, config.n_cap + 1):
        final = (LogAmount.from_amount(W) + payout_log(game, n, W)).add_real(-P)
        parts.append(math.ldexp(final.log_value - ln_w, -n))
    return math.fsum(parts)


def truncated_criterion_iii(
    game: Game,
    W: float,
    P: float,
    n_max: int,
    policy: TruncationPolicy = TruncationPolicy.REFUND_TICKET,
    config: EvalConfig = DEFAULT_CONFIG,
) -> CriterionValue:
    """Criterion III for the lottery stopped after ``n_max`` tails.

    The gain sum runs over ``n <= n_max`` only.  Under either policy the
    no-heads outcome adds nothing to that sum (refunded tickets are voided,
    forfeited ones pay nothing), so for game B the result is exactly
    ``n_max - ln(W/(W - P))``.  The policy is recorded in the diagnostics.
    """
    check_wealth(W)
    check_price(P)
    if isinstance(n_max, bool) or int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    cost = cost_term(W, P)
    if not cost.is_finite:
        return CriterionValue.of(Tag.UNDEFINED, reason="price at or above wealth", policy=policy.value)
    n_max = int(n_max)
    gain = math.fsum(math.ldexp(log_gain_ratio(game, n, W), -n) for n in range(1, n_max + 1))
    return CriterionValue.finite(
        gain - cost.value,
        0.0,
        policy=policy.value,
        n_max=n_max,
        unresolved_mass=math.ldexp(1.0, -n_max),
    )
