"""Game definitions and elementary probability/payout functions.

Three lotteries share one mechanism: a fair coin is tossed until the first
heads, on toss ``n`` (probability ``2**-n``), and the game pays ``D(n)``:

* game A: ``D(n) = 2**(n-1)``
* game B: ``D(n) = W*exp(2**n) - W`` (the only payout that depends on wealth)
* game C: ``D(n) = exp(2**n)``

B and C payouts overflow a double for ``n >= 10``, so payouts are returned
as :class:`~petersburg.logamount.LogAmount`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .logamount import LogAmount

N_CAP = 60
E2 = math.exp(2.0)
LN2 = math.log(2.0)


class Game(enum.Enum):
    A = "A"
    B = "B"
    C = "C"

    @property
    def wealth_coupled(self) -> bool:
        return self is Game.B

    def payout_log(self, n: int, W: float) -> LogAmount:
        return payout_log(self, n, W)

    def log_table(self, W: float, n_cap: int = N_CAP) -> np.ndarray:
        """``log D(n)`` for ``n = 1..n_cap`` as a float array."""
        return np.array([payout_log(self, n, W).log_value for n in range(1, n_cap + 1)])

    def net_log_ratio_table(self, W: float, P: float, n_cap: int = N_CAP) -> np.ndarray:
        """``ln((W - P + D(n)) / W)`` for ``n = 1..n_cap``; -inf marks ruin."""
        return np.array([log_net_ratio(self, n, W, P) for n in range(1, n_cap + 1)])


@dataclass(frozen=True)
class PlayerState:
    wealth: float
    price: float = 0.0

    def __post_init__(self):
        check_wealth(self.wealth)
        check_price(self.price)


class Price(float):
    """A ticket price that also knows ``ln(W - P)`` for one wealth ``W``.

    Prices just below ``W`` lose their distance to ``W`` when rounded to a
    double; the criteria use ``log_headroom`` instead when the wealth
    matches.  Arithmetic on a :class:`Price` yields plain floats.
    """

    def __new__(cls, value: float, wealth: float, log_headroom: float):
        obj = super().__new__(cls, value)
        obj.wealth = float(wealth)
        obj.log_headroom = float(log_headroom)
        return obj

    def __repr__(self):
        return f"Price({float(self)!r}, wealth={self.wealth!r}, log_headroom={self.log_headroom!r})"


def log_headroom(W: float, P: float) -> float:
    """``ln(W - P)``, exact for :class:`Price` values issued for this ``W``."""
    if isinstance(P, Price) and P.wealth == W:
        return P.log_headroom
    if P >= W:
        return -math.inf if P == W else math.nan
    return math.log(W) + math.log1p(-P / W)


def below_wealth(W: float, P: float) -> bool:
    """``P < W``, decided by the exact headroom when ``P`` carries one."""
    if isinstance(P, Price) and P.wealth == W:
        return P.log_headroom > -math.inf
    return P < W


def check_wealth(W: float) -> None:
    if not (W > 0) or math.isinf(W):
        raise DomainError(f"wealth W must be a positive finite real, got {W!r}")


def check_price(P: float) -> None:
    if not (P >= 0) or math.isinf(P):
        raise DomainError(f"ticket price P must be a nonnegative finite real, got {P!r}")


def check_waiting_time(n: int) -> None:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"waiting time n must be an integer >= 1, got {n!r}")


def waiting_prob(n: int) -> float:
    """Probability ``2**-n`` that the first heads arrives on toss ``n`` (exact)."""
    check_waiting_time(n)
    return math.ldexp(1.0, -int(n))


def payout_log(game: Game, n: int, W: float) -> LogAmount:
    """Natural log of the payout ``D(n)``.

    ``W`` only enters for game B; it is still validated for A and C so that
    callers cannot pass nonsense silently.
    """
    check_waiting_time(n)
    check_wealth(W)
    n = int(n)
    if game is Game.A:
        return LogAmount((n - 1) * LN2)
    x = math.ldexp(1.0, n)
    if game is Game.B:
        # W*(exp(x) - 1) = W*exp(x)*(1 - exp(-x))
        return LogAmount(math.log(W) + x + math.log1p(-math.exp(-x)))
    return LogAmount(x)


def log_net_ratio(game: Game, n: int, W: float, P: float) -> float:
    """``ln((W - P + D(n)) / W)``, the log growth factor of one round.

    Returns ``-inf`` when the final wealth is exactly zero and raises
    :class:`~petersburg.errors.NegativeAmountError` when it is negative.
    Each game groups the terms so the dominant one is exact in log space.
    """
    check_waiting_time(n)
    check_wealth(W)
    check_price(P)
    n = int(n)
    x = math.ldexp(1.0, n)
    if game is Game.A:
        ratio = LogAmount(math.log(math.ldexp(1.0, n - 1) / W))
        return ratio.add_real(1.0 - P / W).log_value
    if game is Game.B:
        # (W - P + W*exp(x) - W) / W = exp(x) - P/W
        return LogAmount(x).add_real(-P / W).log_value
    return LogAmount(x - math.log(W)).add_real(1.0 - P / W).log_value


def log_gain_ratio(game: Game, n: int, W: float) -> float:
    """``ln((W + D(n)) / W)``; exactly ``2**n`` for game B."""
    return log_net_ratio(game, n, W, 0.0)


def first_payout(game: Game, W: float) -> float:
    """``D(1)``, the payout in the worst case (heads on the first toss)."""
    check_wealth(W)
    if game is Game.A:
        return 1.0
    if game is Game.B:
        return W * math.expm1(2.0)
    return E2


def ruin_threshold(game: Game, W: float) -> float:
    """Least price ``W + D(1)`` at which the worst case leaves nothing."""
    check_wealth(W)
    if game is Game.A:
        return W + 1.0
    if game is Game.B:
        return W * E2
    return W + E2


def is_ruinous(game: Game, W: float, P: float) -> bool:
    """True when some positive-probability outcome ends at wealth <= 0."""
    return P >= ruin_threshold(game, W)


def worst_case_net(game: Game, W: float, P: float) -> float:
    """Final wealth ``W - P + D(1)`` after the worst outcome (may be negative)."""
    check_wealth(W)
    check_price(P)
    if game is Game.B:
        return W * E2 - P
    return W - P + first_payout(game, W)


def log_limit(x: float, q: float) -> float:
    """``q * (x**(1/q) - 1)``, which tends to ``ln x`` as ``q`` grows.

    Evaluated as ``q * expm1(ln(x)/q)`` to avoid cancellation at large ``q``.
    """
    if not (x > 0):
        raise DomainError(f"x must be positive, got {x!r}")
    if not (q > 0):
        raise DomainError(f"q must be positive, got {q!r}")
    return q * math.expm1(math.log(x) / q)
