"""Nonnegative amounts stored as natural logarithms.

Payouts such as ``exp(2**60)`` cannot be held in a double, but their
logarithms can.  :class:`LogAmount` carries the log of an amount and
implements addition and subtraction with ``logaddexp``/``log1p`` so that
log values up to ``2**60`` never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NegativeAmountError

# Beyond this gap in log space the smaller operand of a subtraction is
# dropped; the relative error that introduces is exp(-gap) <= exp(-50).
DROP_GAP = 50.0

_MAX_LOG_FLOAT = math.log(1.7976931348623157e308)


@dataclass(frozen=True, order=True)
class LogAmount:
    """A nonnegative amount ``exp(log_value)``.

    Zero is represented by ``log_value == -inf``.  ``rel_error`` records a
    bound on the relative error introduced by dropping a negligible term
    during subtraction; it does not take part in comparisons.
    """

    log_value: float
    rel_error: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if math.isnan(self.log_value) or self.log_value == math.inf:
            raise ValueError(f"invalid log value {self.log_value!r}")

    @classmethod
    def zero(cls) -> LogAmount:
        return cls(-math.inf)

    @classmethod
    def from_amount(cls, amount: float) -> LogAmount:
        if amount < 0 or math.isnan(amount):
            raise NegativeAmountError(f"amount must be nonnegative, got {amount!r}")
        if amount == 0:
            return cls.zero()
        return cls(math.log(amount))

    @property
    def is_zero(self) -> bool:
        return self.log_value == -math.inf

    @property
    def representable(self) -> bool:
        return self.log_value <= _MAX_LOG_FLOAT

    def to_float(self) -> float:
        """Return the amount as a float; raises OverflowError when it does not fit."""
        if self.is_zero:
            return 0.0
        if not self.representable:
            raise OverflowError(f"exp({self.log_value!r}) exceeds double precision")
        return math.exp(self.log_value)

    def __add__(self, other: LogAmount) -> LogAmount:
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        return LogAmount(
            _logaddexp(self.log_value, other.log_value),
            rel_error=max(self.rel_error, other.rel_error),
        )

    def __sub__(self, other: LogAmount) -> LogAmount:
        if other.is_zero:
            return self
        if other.log_value > self.log_value:
            raise NegativeAmountError(
                f"exp({self.log_value!r}) - exp({other.log_value!r}) is negative"
            )
        if other.log_value == self.log_value:
            return LogAmount.zero()
        gap = self.log_value - other.log_value
        if gap > DROP_GAP:
            return LogAmount(self.log_value, rel_error=max(self.rel_error, math.exp(-gap)))
        return LogAmount(self.log_value + math.log1p(-math.exp(-gap)), rel_error=self.rel_error)

    def __mul__(self, other: LogAmount) -> LogAmount:
        if self.is_zero or other.is_zero:
            return LogAmount.zero()
        return LogAmount(self.log_value + other.log_value, max(self.rel_error, other.rel_error))

    def __truediv__(self, other: LogAmount) -> LogAmount:
        if other.is_zero:
            raise ZeroDivisionError("division by a zero LogAmount")
        if self.is_zero:
            return self
        return LogAmount(self.log_value - other.log_value, max(self.rel_error, other.rel_error))

    def add_real(self, x: float) -> LogAmount:
        """Add a signed plain real; the result must stay nonnegative."""
        if x >= 0:
            return self + LogAmount.from_amount(x)
        return self - LogAmount.from_amount(-x)


def _logaddexp(a: float, b: float) -> float:
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))
