"""Sign/log-magnitude scalars for quantities that leave double range.

Critical-orbit values grow doubly exponentially and tent-map correlations
shrink doubly exponentially, so both are carried as ``sign * exp(lnmag)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "SignedLog",
    "ScaledComplex",
    "slog_mul",
    "slog_add",
    "slog_pow",
    "slog_sum",
    "logsumexp_signed",
]


@dataclass(frozen=True)
class SignedLog:
    """Real number ``sign * exp(lnmag)``; ``sign == 0`` is exact zero.

    ``exact`` keeps the original float when the value came from one, since
    ``exp(log(x))`` drifts by ``|log x|`` ulps; arithmetic drops it.
    """

    sign: int
    lnmag: float = 0.0
    exact: float | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "lnmag", -math.inf)

    @classmethod
    def from_real(cls, x: float) -> "SignedLog":
        if x == 0:
            return cls(0)
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r}")
        return cls(1 if x > 0 else -1, math.log(abs(x)), float(x))

    @classmethod
    def zero(cls) -> "SignedLog":
        return cls(0)

    @classmethod
    def one(cls) -> "SignedLog":
        return cls(1, 0.0)

    def to_real(self) -> float:
        """Convert back to a float; overflows to +-inf, underflows to 0."""
        if self.sign == 0:
            return 0.0
        if self.exact is not None:
            return self.exact
        if self.lnmag > 709.78:
            return self.sign * math.inf
        return self.sign * math.exp(self.lnmag)

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        return slog_mul(self, other)

    def __add__(self, other: "SignedLog") -> "SignedLog":
        return slog_add(self, other)

    def __neg__(self) -> "SignedLog":
        return SignedLog(-self.sign, self.lnmag) if self.sign else self

    def __sub__(self, other: "SignedLog") -> "SignedLog":
        return slog_add(self, -other)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if other.sign == 0:
            raise ZeroDivisionError("division by SignedLog zero")
        if self.sign == 0:
            return self
        return SignedLog(self.sign * other.sign, self.lnmag - other.lnmag)

    def __pow__(self, n: int) -> "SignedLog":
        return slog_pow(self, n)

    def __abs__(self) -> "SignedLog":
        return SignedLog(abs(self.sign), self.lnmag) if self.sign else self

    def __float__(self) -> float:
        return self.to_real()


def slog_mul(a: SignedLog, b: SignedLog) -> SignedLog:
    if a.sign == 0 or b.sign == 0:
        return SignedLog(0)
    return SignedLog(a.sign * b.sign, a.lnmag + b.lnmag)


def slog_add(a: SignedLog, b: SignedLog) -> SignedLog:
    """Sum anchored at the larger magnitude (log-sum-exp)."""
    if a.sign == 0:
        return b
    if b.sign == 0:
        return a
    if a.lnmag < b.lnmag:
        a, b = b, a
    d = b.lnmag - a.lnmag  # <= 0
    if a.sign == b.sign:
        return SignedLog(a.sign, a.lnmag + math.log1p(math.exp(d)))
    if d == 0.0:
        return SignedLog(0)
    return SignedLog(a.sign, a.lnmag + math.log1p(-math.exp(d)))


def slog_pow(a: SignedLog, n: int) -> SignedLog:
    n = int(n)
    if a.sign == 0:
        if n <= 0:
            raise ValueError("0**n is undefined for n <= 0")
        return a
    if n == 0:
        return SignedLog.one()
    sign = a.sign if n % 2 else 1
    return SignedLog(sign, a.lnmag * n)


def slog_sum(values: Iterable[SignedLog]) -> SignedLog:
    total = SignedLog(0)
    for v in values:
        total = slog_add(total, v)
    return total


def logsumexp_signed(signs, lnmags):
    """Vectorized signed log-sum-exp.

    Returns ``(sign, lnmag)`` of ``sum(signs * exp(lnmags))``. Entries with
    ``sign == 0`` are ignored.
    """
    signs = np.asarray(signs, dtype=float)
    lnmags = np.asarray(lnmags, dtype=float)
    live = signs != 0
    if not live.any():
        return 0, -math.inf
    m = lnmags[live].max()
    s = float(np.sum(signs[live] * np.exp(lnmags[live] - m)))
    if s == 0.0:
        return 0, -math.inf
    return (1 if s > 0 else -1), m + math.log(abs(s))


@dataclass(frozen=True)
class ScaledComplex:
    """Complex value ``mantissa * exp(lnscale)``."""

    mantissa: complex
    lnscale: float = 0.0

    @property
    def log_abs(self) -> float:
        if self.mantissa == 0:
            return -math.inf
        return math.log(abs(self.mantissa)) + self.lnscale

    @property
    def value(self) -> complex:
        if self.mantissa == 0:
            return 0j
        la = self.log_abs
        if la > 709.78:
            return complex(math.inf, math.inf)
        unit = self.mantissa / abs(self.mantissa)
        return unit * math.exp(la)
