"""Zeros of truncated determinant/Hardy series by Aberth-Ehrlich iteration.

A zero of the truncation is accepted as a zero of the entire function only
when both its residual and the dropped tail at that modulus are small
relative to the largest series term there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detseries import DetSeries, _scaled_sums, build_series, evaluate_many
from .orbit import Parameter

__all__ = [
    "Zero",
    "ZeroSet",
    "RootFindError",
    "find_roots",
    "newton_polygon_guesses",
    "principal_eigenvalue",
    "gap_partner",
    "RESIDUAL_TOL",
    "TAIL_TOL",
]

RESIDUAL_TOL = 1e-10
TAIL_TOL = 1e-8
CLUSTER_TOL = 1e-6
MATCH_TOL = 1e-8
_REAL_TOL = 1e-8
_EPS = np.finfo(float).eps


class RootFindError(RuntimeError):
    def __init__(self, msg, unconverged=()):
        super().__init__(msg)
        self.unconverged = list(unconverged)


@dataclass
class Zero:
    lam: complex
    residual: float
    newton_step: float
    multiplicity: int = 1

    @property
    def is_real(self) -> bool:
        return self.lam.imag == 0.0


@dataclass
class ZeroSet:
    zeros: list
    R: float
    series_ref: str
    n_rejected: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def values(self) -> np.ndarray:
        return np.array([z.lam for z in self.zeros], dtype=complex)

    @property
    def weights(self) -> np.ndarray:
        return np.array([z.multiplicity for z in self.zeros], dtype=float)

    def __len__(self):
        return len(self.zeros)

    def count(self, radius: float) -> int:
        """Zeros (with cluster multiplicity) strictly inside ``|lam| < radius``."""
        return int(sum(z.multiplicity for z in self.zeros if abs(z.lam) < radius))

    def rows(self):
        return [
            (z.lam.real, z.lam.imag, abs(z.lam), math.atan2(z.lam.imag, z.lam.real), z.residual)
            for z in self.zeros
        ]


def newton_polygon_guesses(series: DetSeries, offset: float = 0.7) -> np.ndarray:
    """Starting points from the upper convex hull of ``(n, ln|a_n|)``.

    Each hull edge from ``i`` to ``j`` contributes ``j - i`` points spread
    on the circle of radius ``exp((ln|a_i| - ln|a_j|) / (j - i))``.
    """
    live = np.nonzero(series.signs)[0]
    pts = [(int(n), float(series.lnmag[n])) for n in live]
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly above the chord
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    guesses = []
    for edge, ((i, yi), (j, yj)) in enumerate(zip(hull[:-1], hull[1:])):
        m = j - i
        ln_rad = (yi - yj) / m
        if ln_rad > 700:
            raise RootFindError(f"root modulus exp({ln_rad:.1f}) outside double range")
        rad = math.exp(ln_rad)
        # off-axis, edge-dependent phase keeps starts away from real zeros
        ang = 2 * np.pi * np.arange(m) / m + offset + 0.37 * edge
        guesses.append(rad * np.exp(1j * ang))
    return np.concatenate(guesses) if guesses else np.zeros(0, dtype=complex)


def _aberth(series: DetSeries, z: np.ndarray, max_sweeps: int):
    z = z.copy()
    n = z.size
    active = np.ones(n, dtype=bool)
    last_step = np.full(n, np.inf)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        P, Q, _ = _scaled_sums(series, z[idx], derivative=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = z[idx] * P / Q
            diff = z[idx, None] - z[None, :]
            diff[np.arange(idx.size), idx] = np.inf
            s = np.sum(1.0 / diff, axis=1)
            delta = w / (1.0 - w * s)
        bad = ~np.isfinite(delta)
        delta[bad] = 0.0
        z[idx] -= delta
        step = np.abs(delta)
        tiny = step <= 4 * _EPS * np.abs(z[idx])
        # stagnation: the correction stopped shrinking at rounding level
        stalled = (step >= 0.5 * last_step[idx]) & (step <= 1e-10 * np.abs(z[idx]))
        last_step[idx] = step
        done = tiny | stalled | (P == 0)
        active[idx[done]] = False
    return z, active, sweeps


def _polish_real(series: DetSeries, x: float, steps: int = 4) -> float:
    for _ in range(steps):
        P, Q, _ = _scaled_sums(series, np.array([x + 0j]), derivative=True)
        if Q[0] == 0:
            break
        dx = (x * P[0] / Q[0]).real
        x -= dx
        if abs(dx) <= 2 * _EPS * abs(x):
            break
    return x


def find_roots(series: DetSeries, R: float | None = None, max_sweeps: int = 200,
               tail_tol: float = TAIL_TOL, residual_tol: float = RESIDUAL_TOL) -> ZeroSet:
    """All validated zeros of ``series`` in ``|lam| <= R``.

    Roots of the degree-N truncation are computed simultaneously, then kept
    only if the scaled residual is at most ``residual_tol`` and the tail
    majorant at that modulus is at most ``tail_tol``, both relative to the
    largest series term at ``|lam|``. Accepted roots closer than 1e-6 are
    merged into one entry carrying their count.
    """
    if R is None:
        R = series.R
    if series.flagged and R >= 4:
        raise ValueError("flagged series (c = -2) has no zeros certifiable on |lambda| >= 4")
    if R > series.R * (1 + 1e-12):
        raise ValueError(f"search radius {R} exceeds series radius {series.R}")

    live = np.nonzero(series.signs)[0]
    n_zero_roots = int(live[0])
    trimmed = series
    if n_zero_roots:
        trimmed = DetSeries(
            signs=series.signs[n_zero_roots:], lnmag=series.lnmag[n_zero_roots:],
            R=series.R, kind=series.kind,
        )

    z0 = newton_polygon_guesses(trimmed)
    if z0.size:
        z, active, sweeps = _aberth(trimmed, z0, max_sweeps)
        if active.any():
            raise RootFindError(
                f"Aberth iteration did not converge in {max_sweeps} sweeps",
                unconverged=np.nonzero(active)[0].tolist(),
            )
    else:
        z, sweeps = np.zeros(0, dtype=complex), 0

    cands = []
    for lam in z:
        if abs(lam.imag) <= _REAL_TOL * abs(lam):
            x = _polish_real(trimmed, lam.real)
            Px, _ = _scaled_sums(trimmed, np.array([x + 0j]))
            Pz, _ = _scaled_sums(trimmed, np.array([lam]))
            if abs(Px[0]) <= max(abs(Pz[0]), 8 * _EPS):
                lam = complex(x, 0.0)
        cands.append(lam)
    cands.extend([0j] * n_zero_roots)

    accepted, rejected = [], 0
    for lam in cands:
        rho = abs(lam)
        if rho > R:
            continue
        P, Q, m = _scaled_sums(series, np.array([lam]), derivative=True)
        res = float(abs(P[0]))
        step = float(abs(lam * P[0] / Q[0])) if Q[0] != 0 else math.inf
        ln_tail_rel = series.ln_tail(rho) - float(m[0])
        if res <= residual_tol and ln_tail_rel <= math.log(tail_tol):
            accepted.append(Zero(complex(lam), res, step))
        else:
            rejected += 1

    accepted.sort(key=lambda q: (abs(q.lam), q.lam.imag))
    merged = []
    for q in accepted:
        for other in merged:
            if abs(other.lam - q.lam) <= CLUSTER_TOL * max(1.0, abs(q.lam)):
                other.multiplicity += 1
                break
        else:
            merged.append(q)
    return ZeroSet(
        zeros=merged,
        R=float(R),
        series_ref=series.describe(),
        n_rejected=rejected,
        meta={"sweeps": sweeps, "degree": series.N, "cluster_tol": CLUSTER_TOL,
              "multiplicity_rule": "clusters charged by count"},
    )


def principal_eigenvalue(c):
    """``(lambda0, escape_rate)``: the positive zero of ``D_c`` and its log.

    All coefficients after the first are negative, so ``D_c`` decreases on
    the positive axis and has exactly one positive zero.
    """
    p = Parameter.coerce(c).check_closed()
    if p.t == 0:
        return 2.0, math.log(2.0)
    R = 4.0 * abs(p.c) + 8.0
    series = build_series(p, R)

    def D(x):
        P, Q, m = _scaled_sums(series, np.array([complex(x)]), derivative=True)
        return P[0].real, Q[0].real

    x = 2.0
    ok = False
    for _ in range(100):
        P, Q = D(x)
        if Q == 0 or not np.isfinite(P / Q):
            break
        dx = x * P / Q
        x_new = x - dx
        if not (0 < x_new <= R):
            break
        x = x_new
        if abs(dx) <= 4 * _EPS * x:
            ok = True
            break
    if not ok:
        x = _bisect_positive_zero(series, R)
    return float(x), math.log(x)


def _bisect_positive_zero(series: DetSeries, R: float) -> float:
    grid = np.linspace(0.0, R, 4097)[1:]
    P, m = evaluate_many(series, grid)
    sgn = np.sign(P.real)
    hit = np.nonzero(sgn <= 0)[0]
    if hit.size == 0:
        raise RootFindError(f"no positive zero of the determinant in (0, {R}]")
    hi = grid[hit[0]]
    lo = grid[hit[0] - 1] if hit[0] > 0 else 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        Pm, _ = evaluate_many(series, [mid])
        if Pm[0].real > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gap_partner(zeroset: ZeroSet, lambda0: float) -> float:
    """Smallest modulus among zeros other than ``lambda0``."""
    others = [abs(z.lam) for z in zeroset.zeros
              if abs(z.lam - lambda0) > MATCH_TOL * max(1.0, abs(lambda0))]
    if not others:
        raise RootFindError("no second zero in radius")
    return float(min(others))
