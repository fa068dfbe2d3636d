"""Truncated power series for the determinant D_c and Hardy's H_a.

D_c(lam) = 1 + sum_n lam^n / (2^n r_1 ... r_n)  with r_n the critical orbit,
H_a(z)   = sum_n z^n / a^(2^n - 1).

Coefficients are kept as sign/log-magnitude pairs. Every series carries the
data needed to bound the dropped tail at any radius: the log-magnitude of the
first omitted coefficient and the log of the next coefficient ratio. Both
families have non-increasing ratios |a_{n+1}/a_n| past the first term, so the
tail past ``N`` at radius ``rho`` is majorized by a geometric series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numcore import ScaledComplex
from .orbit import CriticalOrbit, Parameter, compute_k, compute_orbit

__all__ = [
    "DetSeries",
    "PotentialValue",
    "build_series",
    "build_hardy",
    "evaluate",
    "evaluate_many",
    "potential_u",
    "potential_l1_grid",
    "limit_deviation",
    "limit_closed_form",
]

# c = -2 has radius of convergence 4; R >= 4 is cut back to this
FLAGGED_RADIUS = 3.5
_MAX_TERMS = 20000


@dataclass
class DetSeries:
    """Real power series ``sum_{n<=N} sign_n exp(lnmag_n) x^n``.

    ``ln_next`` is ``ln|a_{N+1}|`` and ``ln_next_ratio`` is
    ``ln|a_{N+2}/a_{N+1}|``; the latter bounds every later ratio.
    A plain polynomial has ``ln_next = -inf``.
    """

    signs: np.ndarray
    lnmag: np.ndarray
    R: float
    kind: str
    ln_next: float = -math.inf
    ln_next_ratio: float = -math.inf
    flagged: bool = False
    param: Parameter | None = None
    hardy_a: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.lnmag) - 1

    @property
    def coeffs(self) -> np.ndarray:
        """Coefficients as floats (may underflow to 0)."""
        with np.errstate(under="ignore"):
            return self.signs * np.exp(self.lnmag)

    def ln_terms(self, rho: float) -> np.ndarray:
        """``ln|a_n| + n ln(rho)`` for each kept coefficient."""
        n = np.arange(self.N + 1)
        if rho == 0:
            out = np.full(self.N + 1, -math.inf)
            out[0] = self.lnmag[0]
            return out
        return self.lnmag + n * math.log(rho)

    def ln_max_term(self, rho: float) -> float:
        lt = self.ln_terms(rho)
        return float(lt[self.signs != 0].max())

    def ln_tail(self, rho: float) -> float:
        """Log of a majorant of ``sum_{n>N} |a_n| rho^n``; ``inf`` if it diverges."""
        if self.ln_next == -math.inf or rho == 0:
            return -math.inf
        lr = math.log(rho)
        lq = self.ln_next_ratio + lr
        if lq >= 0:
            return math.inf
        return self.ln_next + (self.N + 1) * lr - math.log1p(-math.exp(lq))

    @property
    def tail_bound(self) -> float:
        """Sup of the dropped tail over ``|lam| <= R`` (absolute)."""
        lt = self.ln_tail(self.R)
        return math.exp(lt) if lt < 709 else math.inf

    @property
    def rel_tail_bound(self) -> float:
        """Tail bound relative to the largest kept term on ``|lam| = R``."""
        return math.exp(self.ln_tail(self.R) - self.ln_max_term(self.R))

    def describe(self) -> str:
        if self.kind == "determinant":
            return f"determinant(c={self.param.c!r}, N={self.N}, R={self.R!r})"
        if self.kind == "hardy":
            return f"hardy(a={self.hardy_a!r}, N={self.N}, R={self.R!r})"
        return f"polynomial(N={self.N})"

    @classmethod
    def from_coefficients(cls, coeffs, R: float = math.inf) -> "DetSeries":
        """Exact polynomial in ascending order; its tail is identically zero."""
        a = np.asarray(coeffs, dtype=float)
        nz = np.nonzero(a)[0]
        if nz.size == 0:
            raise ValueError("zero polynomial")
        a = a[: nz[-1] + 1]
        signs = np.sign(a).astype(int)
        with np.errstate(divide="ignore"):
            lnmag = np.where(a != 0, np.log(np.abs(a)), -math.inf)
        return cls(signs=signs, lnmag=lnmag, R=R, kind="polynomial")

    def rows(self):
        """``(n, sign, lnmag)`` triples for the coefficient dump."""
        return [(n, int(s), float(l)) for n, (s, l) in enumerate(zip(self.signs, self.lnmag))]


def _truncate(ln_abs, ratio_ln, R: float, eps: float, n_min: int = 1) -> int:
    """Smallest ``N >= n_min`` whose geometric tail at ``R`` is below ``eps``
    relative to the largest kept term.

    ``ln_abs[n]`` is ``ln|a_n|`` and ``ratio_ln(n)`` returns
    ``ln|a_{n+1}/a_n|``; ``ln_abs`` must extend at least to ``N + 2``.
    """
    lr = math.log(R)
    running_max = -math.inf
    for N in range(len(ln_abs) - 2):
        running_max = max(running_max, ln_abs[N] + N * lr)
        if N < n_min:
            continue
        lq = ratio_ln(N + 1) + lr
        if lq >= 0:
            continue
        ln_tail = ln_abs[N + 1] + (N + 1) * lr - math.log1p(-math.exp(lq))
        if ln_tail <= math.log(eps) + running_max:
            return N
    raise _NeedMore


class _NeedMore(Exception):
    pass


def _det_log_coeffs(orbit: CriticalOrbit):
    """``ln|a_n|`` for n = 0..orbit.N, ``a_n = 1/(2^n r_1...r_n)``."""
    ln_r = orbit.lnmag
    ln_abs = np.concatenate([[0.0], -np.cumsum(ln_r + math.log(2.0))])
    return ln_abs


def build_series(c, R: float, eps: float = 1e-14, n_terms: int | None = None) -> DetSeries:
    """Truncated determinant series valid on ``|lam| <= R``.

    The truncation index is the smallest ``N`` whose tail majorant on
    ``|lam| = R`` is at most ``eps`` times the largest kept term, unless
    ``n_terms`` forces a fixed ``N``. For ``c = -2`` and ``R >= 4`` the series
    diverges on the circle; the result is then flagged and its radius cut
    back to ``FLAGGED_RADIUS``.
    """
    p = Parameter.coerce(c).check_closed()
    if not R > 0 or not eps > 0:
        raise ValueError("R and eps must be positive")
    flagged = False
    if p.t == 0 and R >= 4:
        flagged = True
        R = FLAGGED_RADIUS

    L = 16 if n_terms is None else n_terms + 2
    while True:
        orbit = compute_orbit(p, L)
        ln_abs = _det_log_coeffs(orbit)
        ln_r = orbit.lnmag

        def ratio_ln(n, ln_r=ln_r):
            # |a_{n+1}/a_n| = 1/(2 r_{n+1})
            return -math.log(2.0) - ln_r[n]

        if n_terms is not None:
            N = n_terms
            break
        try:
            N = _truncate(ln_abs, ratio_ln, R, eps)
            if N + 2 <= L:
                break
        except _NeedMore:
            pass
        if L >= _MAX_TERMS:
            raise RuntimeError(f"series for c={p.c!r} needs more than {_MAX_TERMS} terms at R={R}")
        L *= 2

    # exactly one negative factor (r_1 = c) in every product r_1..r_n
    signs = np.ones(N + 1, dtype=int)
    signs[1:] = -1
    return DetSeries(
        signs=signs,
        lnmag=ln_abs[: N + 1].copy(),
        R=float(R),
        kind="determinant",
        ln_next=float(ln_abs[N + 1]),
        ln_next_ratio=float(ratio_ln(N + 1)),
        flagged=flagged,
        param=p,
        meta={"eps": eps, "orbit_N": orbit.N},
    )


def build_hardy(a: float, R: float, eps: float = 1e-14, n_terms: int | None = None) -> DetSeries:
    """Hardy's ``H_a(z) = sum z^n / a^(2^n - 1)`` truncated on ``|z| <= R``."""
    if not a > 1:
        raise ValueError(f"Hardy parameter must exceed 1, got {a!r}")
    if not R > 0 or not eps > 0:
        raise ValueError("R and eps must be positive")
    la = math.log(a)

    def ratio_ln(n):
        # |c_{n+1}/c_n| = a^(-2^n)
        return -(2.0**n) * la

    if n_terms is None:
        L = 16
        while True:
            ln_abs = -(2.0 ** np.arange(L) - 1.0) * la
            try:
                N = _truncate(ln_abs, ratio_ln, R, eps)
                break
            except _NeedMore:
                L *= 2
                if L > 1024:
                    raise RuntimeError("Hardy series truncation did not terminate")
    else:
        N = n_terms
    ln_abs = -(2.0 ** np.arange(N + 2) - 1.0) * la
    return DetSeries(
        signs=np.ones(N + 1, dtype=int),
        lnmag=ln_abs[: N + 1].copy(),
        R=float(R),
        kind="hardy",
        ln_next=float(ln_abs[N + 1]),
        ln_next_ratio=float(ratio_ln(N + 1)),
        hardy_a=float(a),
        meta={"eps": eps},
    )


def _scaled_sums(series: DetSeries, lam: np.ndarray, derivative: bool = False):
    """Horner sums rescaled by the largest term at each ``|lam|``.

    Returns ``(P, m)`` or ``(P, Q, m)`` where ``P = e^{-m} p(lam)``,
    ``Q = e^{-m} lam p'(lam)`` and ``m`` is the log of the largest term.
    """
    lam = np.asarray(lam, dtype=complex)
    rho = np.abs(lam)
    n = np.arange(series.N + 1)
    live = series.signs != 0
    with np.errstate(divide="ignore"):
        lr = np.log(np.where(rho == 0, 1.0, rho))
    lt = series.lnmag[None, :] + n[None, :] * lr[:, None]
    lt[:, ~live] = -np.inf
    at0 = rho == 0
    if at0.any():
        lt[at0, :] = -np.inf
        lt[at0, 0] = series.lnmag[0] if live[0] else -np.inf
    m = lt.max(axis=1)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(under="ignore"):
        b = series.signs[None, :] * np.exp(lt - m[:, None])
    u = np.where(at0, 1.0, lam / np.where(at0, 1.0, rho))
    P = np.zeros(lam.shape, dtype=complex)
    Q = np.zeros(lam.shape, dtype=complex)
    for j in range(series.N, -1, -1):
        P = P * u + b[:, j]
        if derivative:
            Q = Q * u + j * b[:, j]
    if derivative:
        return P, Q, m
    return P, m


def evaluate_many(series: DetSeries, lam, check_radius: bool = True):
    """Vectorized evaluation; returns ``(mantissa, lnscale)`` arrays."""
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    if check_radius and np.any(np.abs(lam) > series.R * (1 + 1e-12)):
        raise ValueError(f"|lambda| exceeds the validity radius R={series.R}")
    P, m = _scaled_sums(series, lam)
    return P, m


def evaluate(series: DetSeries, lam: complex) -> ScaledComplex:
    """Value of the truncated series at ``lam`` as a scaled complex."""
    P, m = evaluate_many(series, [lam])
    return ScaledComplex(complex(P[0]), float(m[0]))


def limit_closed_form(lam):
    """``D_{-2}(lam) = (4 - 2 lam) / (4 - lam)``."""
    lam = np.asarray(lam, dtype=complex)
    return (4.0 - 2.0 * lam) / (4.0 - lam)


def limit_deviation(c, radius: float = 3.5, n_theta: int = 512) -> float:
    """Max of ``|D_c - D_{-2}|`` over the disk ``|lam| <= radius``.

    The difference is analytic inside ``|lam| < 4``, so the maximum sits on
    the boundary circle.
    """
    if radius >= 4:
        raise ValueError("closed form only valid for |lam| < 4")
    s = build_series(c, radius)
    lam = radius * np.exp(2j * np.pi * np.arange(n_theta) / n_theta)
    P, m = evaluate_many(s, lam)
    return float(np.max(np.abs(P * np.exp(m) - limit_closed_form(lam))))


@dataclass
class PotentialValue:
    u: float
    u_monomial: float
    at_zero: bool = False


def potential_u(c, z: complex, k: int | None = None, orbit: CriticalOrbit | None = None,
                series: DetSeries | None = None) -> PotentialValue:
    """``u_c(z) = log|F_c(z)| / k`` with ``F_c(z) = D_c(2z)``.

    Also returns ``log|M_c(z)| / k`` for the monomial
    ``M_c(z) = z^k / (r_1 ... r_k)``.
    """
    p = Parameter.coerce(c)
    if k is None:
        k, _ = compute_k(p)
    if orbit is None or orbit.N < k:
        orbit = compute_orbit(p, k + 1)
    lam = 2.0 * complex(z)
    if series is None or abs(lam) > series.R:
        series = build_series(p, max(2.0 * abs(lam), 8.0))
    val = evaluate(series, lam)
    la = val.log_abs
    ln_prod = float(np.sum(orbit.lnmag[:k]))
    lm = k * math.log(abs(z)) - ln_prod if z != 0 else -math.inf
    return PotentialValue(u=la / k, u_monomial=lm / k, at_zero=la == -math.inf)


def potential_l1_grid(c, radius: float = 10.0, n: int = 200, series: DetSeries | None = None) -> float:
    """Mean of ``|u_c(z) - log+|z/2||`` over a square grid clipped to ``|z| <= radius``.

    A midpoint grid keeps nodes off the real axis, where the zeros of
    ``F_c`` that lie near the critical orbit sit; keep ``n`` even so the
    origin is not a node either.
    """
    p = Parameter.coerce(c)
    k, _ = compute_k(p)
    h = 2.0 * radius / n
    xs = -radius + h * (np.arange(n) + 0.5)
    X, Y = np.meshgrid(xs, xs)
    Z = (X + 1j * Y).ravel()
    Z = Z[np.abs(Z) <= radius]
    if series is None:
        series = build_series(p, 2.0 * radius)
    P, m = evaluate_many(series, 2.0 * Z)
    with np.errstate(divide="ignore"):
        u = (np.log(np.abs(P)) + m) / k
    target = np.maximum(np.log(np.abs(Z) / 2.0), 0.0)
    return float(np.mean(np.abs(u - target)))
