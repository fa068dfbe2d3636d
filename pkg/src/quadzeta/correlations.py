"""Correlation decay for the tent map and spectral rates for c < -2.

Tent observables are pulled back from ``[-2, 2]`` through ``u = 2 cos(pi t)``.
For ``B = 1/(z - u)`` the averaging operator acts in closed form,

    G^m B = W_m / (w_m - u),   w_m = P^m(z),  W_m = w_0 w_1 ... w_{m-1},

with ``P(x) = x^2 - 2``. Correlations then reach 1e-200 by m = 8, so they
are returned in sign/log form.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np
from scipy import integrate

from .detseries import build_series
from .numcore import SignedLog
from .orbit import Parameter
from .rootfind import find_roots, gap_partner, principal_eigenvalue
from .transferop import tent_eigenpolynomials

__all__ = [
    "CorrelationSeries",
    "tent_corr_resolvent",
    "tent_mean_resolvent",
    "tent_corr_quadrature",
    "fit_double_exponential",
    "tent_corr_polynomial",
    "spectral_gap_rate",
    "chain_correlations",
    "M_MAX",
]

M_MAX = 12
_K_MAX = 20000
_REL_TOL = 1e-17


@dataclass
class CorrelationSeries:
    values: list
    observable_desc: str
    system: str
    exact: list | None = None
    meta: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.values) - 1

    @property
    def ln_abs(self) -> np.ndarray:
        return np.array([v.lnmag for v in self.values])

    @property
    def signs(self) -> np.ndarray:
        return np.array([v.sign for v in self.values], dtype=int)

    def rows(self):
        """``(m, sign, ln_abs_rho, rho)``; ``rho`` is None outside double range."""
        out = []
        for m, v in enumerate(self.values):
            rho = v.to_real()
            if v.sign and (rho == 0 or not math.isfinite(rho)):
                rho = None
            out.append((m, v.sign, v.lnmag, rho))
        return out


def _arcsine_moment(k: int) -> int:
    """``int_0^1 (2 cos pi t)^k dt``."""
    return comb(k, k // 2) if k % 2 == 0 else 0


def _check_z(z: float) -> float:
    z = float(z)
    if not z > 2:
        raise ValueError(f"resolvent parameter must satisfy z > 2, got {z!r}")
    return z


def _orbit_logs(z: float, M: int):
    """``ln w_m`` and ``ln W_m`` for m = 0..M."""
    ln_w = [math.log(z)]
    ln_W = [0.0]
    for _ in range(M):
        lw = ln_w[-1]
        ln_W.append(ln_W[-1] + lw)
        ln_w.append(2.0 * lw + math.log1p(-2.0 * math.exp(-2.0 * lw)))
    return ln_w, ln_W


def _scaled_b(z: float):
    """``bt_k = b_k / 2^k`` for k = 0..K and a bound on ``|bt_k|``.

    ``I_k = z I_(k-1) - m_(k-1)`` loses a factor ``z/2`` of accuracy per
    step when run forward, so it is run backward from ``K`` where the
    starting guess ``b_K = 0`` has decayed by ``(2/z)^(K-k)`` below 1e-17.
    """
    # room for the crude tail bound (1/(z-2) and 1/(1-q) factors) as z nears 2
    n_need = math.ceil(60.0 / math.log(z / 2.0))
    K = 2 * n_need + 20
    if K > _K_MAX:
        raise ValueError(f"z={z!r} too close to 2 for the moment expansion")
    mt = np.zeros(K + 1)  # m_k / 2^k
    mt[0] = 1.0
    for k in range(2, K + 1, 2):
        mt[k] = mt[k - 2] * (k - 1) / k
    I0 = 1.0 / math.sqrt(z * z - 4.0)
    It = np.empty(K + 1)  # I_k / 2^k
    It[K] = I0 * mt[K]
    for k in range(K, 0, -1):
        It[k - 1] = (2.0 * It[k] + mt[k - 1]) / z
    It[0] = I0
    bt = It - I0 * mt
    return bt[: n_need + 21], 1.0 / (z - 2.0) + I0


def tent_corr_resolvent(z: float, M: int) -> CorrelationSeries:
    """``rho(m)`` for ``A = B = 1/(z - 2 cos pi t)``, m = 0..M.

    Uses ``rho(m) = W_m sum_{k>=1} b_k w_m^-(k+1)`` with
    ``b_k = I_k - I_0 m_k``, where ``I_k = int u^k / (z - u)`` and ``m_k``
    are the arcsine moments. Every term has the size of the result, so
    there is no cancellation.
    """
    z = _check_z(z)
    if not 0 <= M <= M_MAX:
        raise ValueError(f"M must be in 0..{M_MAX}")
    ln_w, ln_W = _orbit_logs(z, M)
    bt, bound = _scaled_b(z)
    values, used = [], []
    for m in range(M + 1):
        q = 2.0 * math.exp(-ln_w[m])  # 2/w_m; 0 once w_m leaves double range
        # sum_k b_k w^-(k+1) = (2 / w^2) sum_k bt_k q^(k-1)
        T, qp = 0.0, 1.0
        for k in range(1, bt.size):
            T += bt[k] * qp
            qp *= q
            if bound * qp <= _REL_TOL * abs(T) * (1 - q):
                break
        else:
            raise ArithmeticError(f"moment expansion did not converge at m={m}")
        used.append(k)
        if T == 0:
            values.append(SignedLog.zero())
        else:
            ln_abs = ln_W[m] - 2.0 * ln_w[m] + math.log(2.0 * abs(T))
            values.append(SignedLog(1 if T > 0 else -1, ln_abs))
    return CorrelationSeries(values, f"resolvent z={z!r}", "tent",
                             meta={"z": z, "ln_w": ln_w, "ln_W": ln_W, "k_terms": used})


def tent_mean_resolvent(z: float, m: int) -> float:
    """``l_1(G^m B) = W_m / sqrt(w_m^2 - 4)``; equal to ``1/sqrt(z^2 - 4)`` for every m."""
    z = _check_z(z)
    ln_w, ln_W = _orbit_logs(z, m)
    lw = ln_w[m]
    return math.exp(ln_W[m] - lw - 0.5 * math.log1p(-4.0 * math.exp(-2.0 * lw)))


def tent_corr_quadrature(z: float, m: int, epsabs: float = 1e-15) -> float:
    """``rho(m)`` by adaptive quadrature, applying ``G`` by its definition.

    Costs ``2^m`` evaluations per node; meant as a check for small ``m``.
    """
    z = _check_z(z)

    def B(t):
        return 1.0 / (z - 2.0 * math.cos(math.pi * t))

    def GmB(t, j=m):
        if j == 0:
            return B(t)
        return 0.5 * (GmB(0.5 * t, j - 1) + GmB(1.0 - 0.5 * t, j - 1))

    opts = dict(epsabs=epsabs, epsrel=1e-14, limit=200)
    with warnings.catch_warnings():
        # the requested accuracy sits at rounding level; quad says so
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        cross, _ = integrate.quad(lambda t: B(t) * GmB(t), 0.0, 1.0, **opts)
        mean_a, _ = integrate.quad(B, 0.0, 1.0, **opts)
        mean_b, _ = integrate.quad(GmB, 0.0, 1.0, **opts)
    return cross - mean_a * mean_b


def fit_double_exponential(series: CorrelationSeries, m_lo: int, m_hi: int):
    """Fit ``-ln|rho(m)| = ln a * 2^m + const`` over ``m_lo..m_hi``.

    Returns ``(ln_a, ratio_check)`` where ``ratio_check[i]`` is
    ``ln|rho(m+1)| / ln|rho(m)|`` for ``m = m_lo + i``.
    """
    if series.system != "tent":
        raise ValueError("double-exponential fit applies to tent series")
    if m_hi > series.M:
        raise ValueError(f"m_hi={m_hi} beyond computed M={series.M}")
    ms = np.arange(m_lo, m_hi + 1)
    ln_abs = series.ln_abs[ms]
    keep = np.isfinite(ln_abs)
    if keep.sum() < 3:
        raise ValueError("need at least 3 nonzero correlations to fit")
    slope, _ = np.polyfit(2.0 ** ms[keep], -ln_abs[keep], 1)
    ratios = [float(ln_abs[i + 1] / ln_abs[i]) for i in range(len(ms) - 1)]
    return float(slope), ratios


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _poly_int01(p) -> Fraction:
    return sum((a / (i + 1) for i, a in enumerate(p)), Fraction(0))


def _slog_fraction(q: Fraction) -> SignedLog:
    if q == 0:
        return SignedLog.zero()
    return SignedLog(1 if q > 0 else -1, math.log(abs(q.numerator)) - math.log(q.denominator))


def tent_corr_polynomial(A_coeffs, B_coeffs, M: int) -> CorrelationSeries:
    """Exact ``rho(m)`` for ``A = sum a_j p_j`` and ``B = sum b_j p_j``.

    ``p_j`` are the eigenpolynomials of ``G`` (eigenvalue ``4^-j``), each
    with zero mean for j >= 1, so

        rho(m) = sum_{j>=1} 4^(-j m) b_j int A p_j.

    ``meta["k"]`` is the smallest j with a nonzero coefficient (None if
    rho vanishes identically).
    """
    a = [Fraction(v) for v in A_coeffs]
    b = [Fraction(v) for v in B_coeffs]
    if not any(a) or not any(b):
        raise ValueError("observables must be nonzero")
    top = max(len(a), len(b)) - 1
    basis = [p for _, p in tent_eigenpolynomials(max(2 * top, 2))]
    A_poly = [Fraction(0)] * (2 * len(a) - 1)
    for j, aj in enumerate(a):
        for i, v in enumerate(basis[j]):
            A_poly[i] += aj * v
    weights = {}
    for j in range(1, len(b)):
        if b[j]:
            w = b[j] * _poly_int01(_poly_mul(A_poly, basis[j]))
            if w:
                weights[j] = w
    k = min(weights) if weights else None
    exact = [sum((w / Fraction(4) ** (j * m) for j, w in weights.items()), Fraction(0))
             for m in range(M + 1)]
    return CorrelationSeries([_slog_fraction(q) for q in exact],
                             f"A={[str(v) for v in a]} B={[str(v) for v in b]}",
                             "tent", exact=exact, meta={"k": k, "weights": weights})


def spectral_gap_rate(c, radius: float = 1000.0) -> float:
    """``r(c) = lam0 / |next zero|``, the exponential rate of correlation decay."""
    p = Parameter.coerce(c).check_open()
    lam0, _ = principal_eigenvalue(p)
    zs = find_roots(build_series(p, radius), radius)
    return lam0 / gap_partner(zs, lam0)


def chain_correlations(points, A, B, m_max: int = 5) -> np.ndarray:
    """Monte-Carlo ``rho(m)``, m = 0..m_max, from a backward Gibbs chain.

    Along the chain ``f(x_{i+1}) = x_i``, so ``A(f^m x)`` at position
    ``i + m`` is ``A(x_i)``. Noise dominates beyond small ``m``.
    """
    x = np.asarray(points, dtype=float)
    if x.size <= m_max:
        raise ValueError("chain shorter than m_max")
    a, bb = A(x), B(x)
    ma, mb = a.mean(), bb.mean()
    return np.array([np.mean(a[: x.size - m] * bb[m:]) - ma * mb for m in range(m_max + 1)])
