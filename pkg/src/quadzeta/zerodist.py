"""Empirical zero measure and its distance from the uniform law on |lam| = 4."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detseries import build_series
from .orbit import CriticalOrbit, Parameter, orbit_with_k
from .rootfind import ZeroSet, find_roots

__all__ = [
    "EmpiricalZeroMeasure",
    "Annulus",
    "empirical_measure",
    "radial_stats",
    "angular_stats",
    "kuiper_statistic",
    "annulus_of",
    "weak_limit_proxies",
    "zero_statistics",
    "MODULUS_CUTOFF",
    "LIMIT_RADIUS",
]

MODULUS_CUTOFF = 1000.0
LIMIT_RADIUS = 4.0
# default search radius: beyond the cutoff so the tail gate is slack at 1000
SEARCH_RADIUS = 2000.0


@dataclass
class EmpiricalZeroMeasure:
    points: np.ndarray
    weights: np.ndarray
    param: Parameter | None = None

    @property
    def n_atoms(self) -> int:
        return int(self.points.size)

    def integrate(self, g) -> float:
        return float(np.sum(self.weights * g(self.points)))


@dataclass(frozen=True)
class Annulus:
    """``inner < |z| < outer`` in the z = lam/2 variable."""

    inner: float
    outer: float

    def contains(self, z) -> np.ndarray:
        r = np.abs(z)
        return (r > self.inner) & (r < self.outer)

    @property
    def lam_bounds(self):
        return 2.0 * self.inner, 2.0 * self.outer


def empirical_measure(zeroset: ZeroSet, param: Parameter | None = None) -> EmpiricalZeroMeasure:
    """Equal mass on every zero with ``|lam| < 1000``.

    A merged cluster is expanded into as many atoms as its multiplicity.
    """
    if zeroset.R < MODULUS_CUTOFF:
        raise ValueError(f"zero set searched only to {zeroset.R}; need >= {MODULUS_CUTOFF}")
    pts = []
    for z in zeroset.zeros:
        if abs(z.lam) < MODULUS_CUTOFF:
            pts.extend([z.lam] * z.multiplicity)
    if not pts:
        raise ValueError("no zeros below the modulus cutoff")
    pts = np.array(pts, dtype=complex)
    return EmpiricalZeroMeasure(pts, np.full(pts.size, 1.0 / pts.size), param)


def radial_stats(mu: EmpiricalZeroMeasure, delta: float = 0.1):
    """``(mean of log(|lam|/4), fraction with |log(|lam|/4)| < delta)``."""
    if mu.n_atoms == 0:
        raise ValueError("empty measure")
    lr = np.log(np.abs(mu.points) / LIMIT_RADIUS)
    return float(np.sum(mu.weights * lr)), float(np.sum(mu.weights * (np.abs(lr) < delta)))


def kuiper_statistic(u) -> float:
    """Kuiper's ``V = D+ + D-`` for samples on [0, 1) against the uniform law.

    Invariant under rotations of the circle, unlike plain KS.
    """
    u = np.sort(np.mod(np.asarray(u, dtype=float), 1.0))
    n = u.size
    if n == 0:
        raise ValueError("no samples")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - u)
    d_minus = np.max(u - (i - 1) / n)
    return float(d_plus + d_minus)


def angular_stats(mu: EmpiricalZeroMeasure):
    """Kuiper distance of ``arg lam`` from uniform, plus a small-sample flag."""
    if mu.n_atoms == 0:
        raise ValueError("empty measure")
    u = np.angle(mu.points) / (2 * np.pi)
    return kuiper_statistic(u), mu.n_atoms < 5


def annulus_of(c, orbit: CriticalOrbit | None = None) -> Annulus:
    p = Parameter.coerce(c)
    if not p.t > 0:
        raise ValueError("annulus undefined at c = -2 (k(c) undefined)")
    if orbit is None or orbit.k is None:
        orbit = orbit_with_k(p)
    r_k = float(abs(orbit.values[orbit.k - 1]))
    return Annulus(4.0 * r_k, 9.0 * r_k)


def weak_limit_proxies(mu: EmpiricalZeroMeasure) -> dict:
    """Integrals of a few bounded test functions against ``mu``.

    Limits under the uniform law on ``|lam| = 4``: ``one`` and ``abs2`` -> 1,
    the rest -> 0.
    """
    z = mu.points
    w = mu.weights
    arg = np.angle(z)
    return {
        "one": float(np.sum(w)),
        "re": float(np.sum(w * z.real / 4)),
        "im": float(np.sum(w * z.imag / 4)),
        "abs2": float(np.sum(w * (np.abs(z) / 4) ** 2)),
        "cos_arg": float(np.sum(w * np.cos(arg))),
        "sin_arg": float(np.sum(w * np.sin(arg))),
    }


def zero_statistics(c, radius: float = SEARCH_RADIUS, delta: float = 0.1) -> dict:
    """Run the zero pipeline at one parameter.

    Returns ``(stats, zeroset, measure)``; ``stats`` has exactly the
    ``stats.json`` keys.
    """
    p = Parameter.coerce(c)
    orbit = orbit_with_k(p)
    zs = find_roots(build_series(p, radius), radius)
    mu = empirical_measure(zs, p)
    mean_lr, frac = radial_stats(mu, delta)
    ks, _ = angular_stats(mu)
    ann = annulus_of(p, orbit)
    stats = {
        "c": p.c,
        "t": p.t,
        "k": orbit.k,
        "n_zeros": mu.n_atoms,
        "mean_log_ratio": mean_lr,
        "ks_angle": ks,
        "frac_band_01": frac,
        "annulus": [ann.inner, ann.outer],
    }
    return stats, zs, mu
