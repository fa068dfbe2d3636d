"""Leading eigenfunction, eigenmeasure Cauchy transform and Gibbs-state sampling.

The positive eigenfunction is carried as ``h~ = -h_c`` where

    h_c(x) = sum_n lam0^n / (2^n r_1 ... r_n (r_{n+1} - x)),

every term of which is negative on ``[-beta, beta]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .orbit import Parameter, compute_orbit
from .rootfind import principal_eigenvalue
from .transferop import adjoint_g, fixed_point_beta

__all__ = [
    "EigenData",
    "GibbsSample",
    "GibbsError",
    "eigen_data",
    "eigenfunction_h",
    "cauchy_H",
    "semicircle_cauchy",
    "sample_gibbs",
    "transition_probabilities",
    "batch_means_se",
    "moment_summary",
    "exact_moments",
    "arcsine_histogram",
    "ARCSINE_SECOND_MOMENT",
]

ARCSINE_SECOND_MOMENT = 2.0
_TERM_TOL = 1e-17
_PROB_SUM_TOL = 1e-3


class GibbsError(ArithmeticError):
    pass


@dataclass
class EigenData:
    """``lam0`` and the truncated ``h~`` series at one parameter.

    ``coef[n] = lam0^n / (2^n r_1 ... r_n)`` and ``poles[n] = r_{n+1}``;
    ``h~(x) = -sum coef[n] / (poles[n] - x)``.
    """

    c: Parameter
    lambda0: float
    h_terms: int
    positivity_sign: int
    coef: np.ndarray
    poles: np.ndarray
    beta: float

    def __call__(self, x):
        return eigenfunction_h(self, x)


def eigen_data(c, max_terms: int = 4000) -> EigenData:
    """Compute ``lam0`` and enough ``h~`` terms for double precision on ``[-beta, beta]``.

    At ``c = -2`` the closed-form limit ``4 / (4 - x^2)`` is stored instead.
    All terms share a sign, so ``|h~(x)| >= 1/(beta - c)`` and a term below
    ``1e-17`` of that bound is negligible everywhere on the interval.
    """
    p = Parameter.coerce(c).check_closed()
    lam0, _ = principal_eigenvalue(p)
    beta = fixed_point_beta(p)
    if p.t == 0:
        # the series does not converge at c = -2; use its limit 1/(2+x) + 1/(2-x)
        return EigenData(p, lam0, 2, 1, np.array([1.0, -1.0]), np.array([-2.0, 2.0]), beta)
    floor = _TERM_TOL / (beta - p.c)
    N = 64
    while True:
        orb = compute_orbit(p, N + 1)
        r = orb.values
        ln_coef = np.zeros(N)
        sign = np.ones(N)
        acc, sg = 0.0, 1.0
        for n in range(1, N):
            acc += math.log(lam0 / 2.0) - orb.entries[n - 1].lnmag
            sg *= orb.entries[n - 1].sign
            ln_coef[n], sign[n] = acc, sg
        # |r_{n+1} - x| >= r_{n+1} - beta for n >= 1
        gap = r[:N] - beta
        gap[0] = np.inf  # the n = 0 term never decides truncation
        with np.errstate(divide="ignore"):
            ln_bound = ln_coef - np.log(gap)
        small = np.nonzero(ln_bound[1:] < math.log(floor))[0]
        if small.size:
            n_terms = int(small[0]) + 1
            break
        if N >= max_terms:
            raise GibbsError(f"h series not converged in {max_terms} terms at c={p.c!r}")
        N *= 2
    coef = sign[:n_terms] * np.exp(ln_coef[:n_terms])
    poles = r[:n_terms].copy()
    return EigenData(p, lam0, n_terms, 1, coef, poles, beta)


@numba.njit(cache=True)
def _h_tilde(coef, poles, x):
    s = 0.0
    for n in range(coef.size):
        s += coef[n] / (poles[n] - x)
    return -s


def eigenfunction_h(data: EigenData, x):
    """``h~(x) = -h_c(x) > 0`` for ``x`` in ``[-beta, beta]``."""
    x = np.asarray(x, dtype=float)
    lim = data.beta * (1 + 1e-12)
    if np.any(np.abs(x) > lim):
        raise ValueError(f"x outside [-beta, beta] with beta={data.beta!r}")
    if data.c.t == 0 and np.any(np.abs(x) >= 2.0):
        raise ValueError("h~ has poles at +-2 when c = -2")
    vals = -np.sum(data.coef[:, None] / (data.poles[:, None] - x.ravel()[None, :]), axis=0)
    return vals.reshape(x.shape) if x.ndim else float(vals[0])


def cauchy_H(c, z: complex, lambda0: float | None = None) -> complex:
    """``H_c(z) = sum_n lam0^n / (2^n z f_c(z) ... f_c^n(z))`` off ``[-beta, beta]``."""
    p = Parameter.coerce(c).check_closed()
    z = complex(z)
    if z.imag == 0 and abs(z.real) <= fixed_point_beta(p):
        raise ValueError(f"z={z!r} lies on [-beta, beta]")
    lam0 = principal_eigenvalue(p)[0] if lambda0 is None else lambda0
    return adjoint_g(p, lam0, z)


def semicircle_cauchy(z: complex, n: int = 200) -> complex:
    """``int_{-2}^{2} sqrt(4 - x^2) / (x - z) dx`` by n-point Gauss-Chebyshev (second kind)."""
    i = np.arange(1, n + 1)
    theta = i * np.pi / (n + 1)
    u = np.cos(theta)
    w = np.pi / (n + 1) * np.sin(theta) ** 2
    # x = 2u: sqrt(4 - x^2) dx = 4 sqrt(1 - u^2) du
    return complex(4.0 * np.sum(w / (2.0 * u - complex(z))))


def transition_probabilities(data: EigenData, x: float):
    """``(y+, p+, y-, p-, raw_sum)`` for one backward step from ``x``."""
    y = math.sqrt(x - data.c.c)
    hx = _h_tilde(data.coef, data.poles, x)
    lam = data.lambda0
    pp = lam * _h_tilde(data.coef, data.poles, y) / (4 * y * y * hx)
    pm = lam * _h_tilde(data.coef, data.poles, -y) / (4 * y * y * hx)
    s = pp + pm
    return y, pp / s, -y, pm / s, s


@dataclass
class GibbsSample:
    points: np.ndarray
    seed: int
    burn_in: int
    c: Parameter
    max_sum_error: float = 0.0

    def __len__(self):
        return int(self.points.size)


@numba.njit(cache=True)
def _chain(coef, poles, lam, c, x0, u, tol):
    n = u.size
    out = np.empty(n)
    x = x0
    hx = _h_tilde(coef, poles, x)
    worst = 0.0
    for m in range(n):
        y = math.sqrt(x - c)
        hp = _h_tilde(coef, poles, y)
        hm = _h_tilde(coef, poles, -y)
        scale = lam / (4.0 * y * y * hx)
        pp = scale * hp
        s = pp + scale * hm
        err = abs(s - 1.0)
        if err > worst:
            worst = err
        if err > tol:
            return out[:m], worst, m
        if u[m] * s < pp:
            x, hx = y, hp
        else:
            x, hx = -y, hm
        out[m] = x
    return out, worst, -1


def sample_gibbs(c, n: int, seed: int, burn_in: int = 1000,
                 data: EigenData | None = None) -> GibbsSample:
    """Backward Markov chain whose stationary law is the Gibbs state.

    From ``x`` the chain moves to a preimage ``y = +-sqrt(x - c)`` with
    probability ``lam0 h~(y) / ((2y)^2 h~(x))``. Uniforms come from a
    Philox stream keyed by ``seed``, so runs are reproducible bit for bit.
    """
    p = Parameter.coerce(c)
    if not p.t > 0:
        raise ValueError(f"sampler needs c < -2, got c={p.c!r}")
    if n < 1 or burn_in < 0:
        raise ValueError("need n >= 1 and burn_in >= 0")
    if data is None:
        data = eigen_data(p)
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random(n + burn_in)
    out, worst, fail = _chain(data.coef, data.poles, data.lambda0, p.c, data.beta, u, _PROB_SUM_TOL)
    if fail >= 0:
        raise GibbsError(
            f"transition probabilities sum to 1 +- {worst:.3g} at step {fail}; "
            "lambda0 or h~ inaccurate"
        )
    return GibbsSample(out[burn_in:].copy(), int(seed), int(burn_in), p, float(worst))


def batch_means_se(values, n_batches: int = 100) -> float:
    """Standard error of the mean from non-overlapping batch means."""
    v = np.asarray(values, dtype=float)
    b = v.size // n_batches
    if b < 2:
        raise ValueError("too few values for batch means")
    means = v[: b * n_batches].reshape(n_batches, b).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def moment_summary(sample: GibbsSample, n_batches: int = 100) -> dict:
    """First two moments with batch-means errors, plus the invariance defect for ``x^2``."""
    x = sample.points
    x2 = x * x
    fx = x2 + sample.c.c
    d = fx * fx - x2
    return {
        "c": sample.c.c,
        "n": int(x.size),
        "mean": float(x.mean()),
        "mean_se": batch_means_se(x, n_batches),
        "second": float(x2.mean()),
        "second_se": batch_means_se(x2, n_batches),
        "invariance": float(d.mean()),
        "invariance_se": batch_means_se(d, n_batches),
    }


def exact_moments(c, data: EigenData | None = None):
    """``(E x, E x^2)`` under the Gibbs state, with no sampling.

    Pairs ``h_c = sum a_n / (r_{n+1} - x)`` with the eigenmeasure through its
    Cauchy transform evaluated on the critical orbit. The expansion of
    ``H_c`` at infinity fixes the first moments of the eigenmeasure as
    ``-1, 0``.
    """
    p = Parameter.coerce(c).check_open()
    if data is None:
        data = eigen_data(p)
    s0 = s1 = s2 = 0.0
    for a, r in zip(data.coef, data.poles):
        if not np.isfinite(r):
            break
        H = cauchy_H(p, r, data.lambda0).real
        # int x^j / (x - r) dnu for j = 0, 1, 2
        s0 -= a * H
        s1 -= a * (-1.0 + r * H)
        s2 -= a * (-r + r * r * H)
    return s1 / s0, s2 / s0


def arcsine_histogram(points, bins: int = 20):
    """Bin frequencies on ``[-2, 2]`` next to the arcsine law's bin masses.

    Points beyond +-2 are counted in the end bins. Returns
    ``(edges, empirical, arcsine, total_variation)``.
    """
    edges = np.linspace(-2.0, 2.0, bins + 1)
    x = np.clip(np.asarray(points, dtype=float), -2.0, 2.0)
    counts, _ = np.histogram(x, edges)
    emp = counts / counts.sum()
    cdf = 0.5 + np.arcsin(edges / 2.0) / np.pi
    ref = np.diff(cdf)
    return edges, emp, ref, float(0.5 * np.abs(emp - ref).sum())
