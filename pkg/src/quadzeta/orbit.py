"""Critical orbit r_n(c) = f_c^n(0) of z -> z^2 + c and its cutoff index."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numcore import SignedLog

__all__ = [
    "Parameter",
    "CriticalOrbit",
    "compute_orbit",
    "compute_k",
    "orbit_with_k",
    "lemma1_report",
    "Lemma1Report",
    "RATIO_THRESHOLD",
    "UPPER_CONSTANT",
]

RATIO_THRESHOLD = 36.0
UPPER_CONSTANT = 30.0
# above this the orbit is stored in log form only
_FLOAT_LIMIT = 1e150


@dataclass(frozen=True)
class Parameter:
    """Real parameter ``c = -2 - t``.

    Build it with :meth:`from_t` when ``t`` is tiny; subtracting ``-2 - c``
    loses the low bits of ``t``.
    """

    c: float
    t: float

    @classmethod
    def from_c(cls, c: float) -> "Parameter":
        return cls(float(c), float(-2.0 - c))

    @classmethod
    def from_t(cls, t: float) -> "Parameter":
        return cls(float(-2.0 - t), float(t))

    @classmethod
    def coerce(cls, c) -> "Parameter":
        return c if isinstance(c, Parameter) else cls.from_c(c)

    def check_closed(self):
        if self.t < 0:
            raise ValueError(f"c must be <= -2, got c={self.c!r}")
        return self

    def check_open(self):
        if not self.t > 0:
            raise ValueError(f"c must be < -2, got c={self.c!r}")
        return self


@dataclass
class CriticalOrbit:
    """Orbit entries ``r_1..r_N`` as SignedLog plus float shadows.

    ``values`` holds the floats (``inf`` once past 1e150) and ``dev`` the
    deviations ``r_n - 2`` computed without cancellation near ``c = -2``.
    """

    param: Parameter
    entries: list
    values: np.ndarray
    dev: np.ndarray
    k: int | None = None
    ratios: list = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.entries)

    @property
    def lnmag(self) -> np.ndarray:
        return np.array([e.lnmag for e in self.entries])

    @property
    def signs(self) -> np.ndarray:
        return np.array([e.sign for e in self.entries], dtype=int)

    def r(self, n: int) -> SignedLog:
        """1-based access to r_n."""
        return self.entries[n - 1]

    def extend(self, N: int) -> "CriticalOrbit":
        if N <= self.N:
            return self
        fresh = compute_orbit(self.param, N)
        fresh.k, fresh.ratios = self.k, self.ratios
        return fresh


def compute_orbit(c, N: int) -> CriticalOrbit:
    """Iterate ``r_{n+1} = r_n^2 + c`` from ``r_1 = c``.

    The float phase tracks ``s_n = r_n - 2`` via ``s_{n+1} = 4 s_n + s_n^2 - t``
    so that ``t`` as small as 4**-12 survives; once ``|r_n|`` exceeds 1e150
    the recurrence continues on log-magnitudes.
    """
    p = Parameter.coerce(c).check_closed()
    if N < 1:
        raise ValueError("N must be >= 1")
    t = p.t
    entries, values, dev = [], [], []
    s = -4.0 - t
    r = p.c
    lnr = None
    for n in range(1, N + 1):
        if lnr is None:
            entries.append(SignedLog.from_real(r))
            values.append(r)
            dev.append(s)
            if abs(r) <= _FLOAT_LIMIT:
                # s_2 = 3t + t^2 exactly; the generic step cancels there
                s = t * (3.0 + t) if n == 1 else 4.0 * s + s * s - t
                r = 2.0 + s
                continue
            lnr = math.log(abs(r))
        else:
            entries.append(SignedLog(1, lnr))
            values.append(math.inf)
            dev.append(math.inf)
        # r_n > 0 here and c/r_n^2 < 1e-300
        lnr = 2.0 * lnr + math.log1p(p.c * math.exp(-2.0 * lnr))
    return CriticalOrbit(p, entries, np.array(values), np.array(dev))


def compute_k(c):
    """Smallest ``k`` with ``r_{k+1} / r_k >= 36``.

    Returns ``(k, ratios)`` where ``ratios[j-1] = r_{j+1}/r_j`` for
    ``j = 1..k``. Ratios are signed; the first one is negative.
    """
    p = Parameter.coerce(c)
    if not p.t > 0:
        raise ValueError("k(c) is undefined for c >= -2 (orbit ratios tend to 1)")
    ratios = []
    N = 8
    while True:
        orb = compute_orbit(p, N)
        vals = orb.values
        for j in range(len(ratios), N - 1):
            q = float(vals[j + 1] / vals[j])
            ratios.append(q)
            if q >= RATIO_THRESHOLD:
                return j + 1, ratios
        N *= 2
        if N > 4096:
            raise RuntimeError(f"no cutoff found for c={p.c!r}")


def orbit_with_k(c, N: int | None = None) -> CriticalOrbit:
    """Orbit long enough to cover ``k(c) + 1`` with ``k`` and ratios filled."""
    p = Parameter.coerce(c)
    k, ratios = compute_k(p)
    orb = compute_orbit(p, max(k + 1, N or 0))
    orb.k, orb.ratios = k, ratios
    return orb


@dataclass
class Lemma1Report:
    c: float
    t: float
    k: int
    r_k: float
    bounds_ok: bool
    k_ratio: float
    mean_log: float
    mean_log_gap: float
    majorant: float
    lower_ok: bool
    upper_ok: bool
    quoted_lower_ok: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def lower_envelope(t: float, n) -> np.ndarray:
    """Sharp induction bound ``|r_n| >= 2 + (2 * 4^(n-1) + 1) t / 3``.

    Follows from ``s_{n+1} >= 4 s_n - t`` with ``s_2 = 3t``; equality holds to
    first order in ``t``.
    """
    n = np.asarray(n, dtype=float)
    return 2.0 + (2.0 * 4.0 ** (n - 1) + 1.0) * t / 3.0


def quoted_lower_envelope(t: float, n) -> np.ndarray:
    """The weaker-looking form ``2 + (4^(n-1) - 1) t``.

    It already fails at n = 3 for small t (``r_3 = 2 + 11t + O(t^2)``), so it
    is only reported, never enforced.
    """
    n = np.asarray(n, dtype=float)
    return 2.0 + (4.0 ** (n - 1) - 1.0) * t


def upper_envelope(t: float, n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    return 2.0 + 4.0 ** (n - 1) * UPPER_CONSTANT * t


def lemma1_report(orbit: CriticalOrbit) -> Lemma1Report:
    """Check the three parts of the cutoff lemma on a computed orbit.

    Part (i) is the window 36 <= |r_k| <= 1521, part (ii) the ratio
    ``k log 4 / log(1/t)`` and part (iii) the distance of the mean of
    ``log|r_n|`` (n <= k) from log 2 next to its majorant
    ``(1/k) sum log(1 + 30 * 4^(n-1) t)``.
    """
    if orbit.k is None:
        k, ratios = compute_k(orbit.param)
        orbit = orbit.extend(k + 1)
        orbit.k, orbit.ratios = k, ratios
    k = orbit.k
    t = orbit.param.t
    n = np.arange(1, orbit.N + 1)
    finite = np.isfinite(orbit.values)
    absr = np.abs(orbit.values)
    # float rounding can sit exactly on the n = 1 envelope
    lower_ok = bool(np.all(absr[finite] >= lower_envelope(t, n[finite]) * (1 - 1e-14)))
    if not lower_ok:
        raise ArithmeticError("orbit violates the lower envelope; arithmetic fault")
    quoted_lower_ok = bool(
        np.all(absr[finite] >= quoted_lower_envelope(t, n[finite]) * (1 - 1e-15))
    )
    upper_ok = bool(np.all(orbit.values[:k] <= upper_envelope(t, n[:k]) * (1 + 1e-15)))
    r_k = float(abs(orbit.values[k - 1]))
    logs = np.log(absr[:k])
    mean_log = float(logs.mean())
    majorant = float(np.mean(np.log1p(4.0 ** (n[:k] - 1) * UPPER_CONSTANT * t)))
    return Lemma1Report(
        c=orbit.param.c,
        t=t,
        k=k,
        r_k=r_k,
        bounds_ok=36.0 <= r_k <= 1521.0,
        k_ratio=k * math.log(4.0) / math.log(1.0 / t) if t < 1 else math.nan,
        mean_log=mean_log,
        mean_log_gap=abs(mean_log - math.log(2.0)),
        majorant=majorant,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        quoted_lower_ok=quoted_lower_ok,
    )
