"""Discretized transfer operators.

* Collocation of the Ruelle operator
  ``(L_c g)(x) = sum_{y^2 + c = x} g(y) / (2y)^2`` on Chebyshev points of
  ``[-beta, beta]``, ``beta`` the positive fixed point of ``f_c``.
* The tent averaging operator ``G g(t) = (g(t/2) + g(1 - t/2)) / 2`` on
  monomials, in exact rational arithmetic.
* The adjoint functional equation behind the eigenvalue/zero reciprocity.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np
import scipy.linalg

from .detseries import build_series, evaluate
from .orbit import Parameter

__all__ = [
    "CollocationMatrix",
    "SpectrumEstimate",
    "fixed_point_beta",
    "chebyshev_nodes",
    "lagrange_matrix",
    "build_collocation",
    "spectrum",
    "spectrum_extended",
    "apply_ruelle",
    "tent_matrix",
    "tent_eigenpolynomials",
    "adjoint_g",
    "adjoint_equation_residual",
    "COLLOCATION_C_MAX",
]

# near c = -2 preimages approach 0 and the weight 1/(2y)^2 blows up
COLLOCATION_C_MAX = -2.01
_MIN_PREIMAGE = 1e-4


def fixed_point_beta(c) -> float:
    """Positive fixed point ``beta = (1 + sqrt(1 - 4c)) / 2``."""
    p = Parameter.coerce(c)
    return 0.5 * (1.0 + math.sqrt(1.0 - 4.0 * p.c))


def chebyshev_nodes(degree: int, half_width: float = 1.0) -> np.ndarray:
    """Chebyshev extreme points ``half_width * cos(j pi / degree)``, j = 0..degree."""
    j = np.arange(degree + 1)
    return half_width * np.cos(np.pi * j / degree)


def _bary_weights(n: int) -> np.ndarray:
    w = (-1.0) ** np.arange(n + 1)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def lagrange_matrix(nodes: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Values ``l_j(y_i)`` of the Lagrange cardinals at Chebyshev extreme points.

    Uses the second barycentric form; a ``y`` that hits a node returns the
    corresponding unit row.
    """
    n = nodes.size - 1
    w = _bary_weights(n)
    y = np.asarray(y, dtype=float)
    diff = y[:, None] - nodes[None, :]
    hit = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        q = w[None, :] / diff
        out = q / q.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    if rows.any():
        out[rows] = hit[rows].astype(float)
    return out


@dataclass
class CollocationMatrix:
    param: Parameter
    degree: int
    beta: float
    nodes: np.ndarray
    entries: np.ndarray


@dataclass
class SpectrumEstimate:
    eigenvalues: np.ndarray
    degree: int
    condition_flag: float
    eigenvectors: np.ndarray | None = None

    @property
    def leading(self) -> complex:
        return complex(self.eigenvalues[0])


def _check_collocation(c, degree: int) -> Parameter:
    p = Parameter.coerce(c)
    if not p.t > 0:
        raise ValueError(f"collocation needs c < -2, got {p.c!r}")
    if p.c > COLLOCATION_C_MAX:
        raise ValueError(
            f"c={p.c!r} is too close to -2 for collocation (need c <= {COLLOCATION_C_MAX}); "
            "use determinant zeros instead"
        )
    if degree < 8:
        raise ValueError("degree must be >= 8")
    return p


def build_collocation(c, degree: int) -> CollocationMatrix:
    """Matrix of ``L_c`` in the Lagrange basis on ``degree + 1`` Chebyshev points.

    Entry ``(i, j)`` is ``sum_{y = +-sqrt(x_i - c)} l_j(y) / (2y)^2``. The
    preimages of ``[-beta, beta]`` stay inside it, so the interpolant is
    never extrapolated.
    """
    p = _check_collocation(c, degree)
    beta = fixed_point_beta(p)
    x = chebyshev_nodes(degree, beta)
    y = np.sqrt(x - p.c)
    if y.min() < _MIN_PREIMAGE:
        raise ValueError(f"preimage modulus {y.min():.2e} too small; matrix ill-conditioned")
    weight = 1.0 / (4.0 * y * y)
    Lp = lagrange_matrix(x, y)
    Lm = lagrange_matrix(x, -y)
    entries = weight[:, None] * (Lp + Lm)
    return CollocationMatrix(p, degree, beta, x, entries)


def spectrum(matrix: CollocationMatrix, vectors: bool = False) -> SpectrumEstimate:
    """Dense eigen-decomposition, eigenvalues sorted by decreasing modulus.

    ``condition_flag`` is the reciprocal of ``|<left, right>|`` for the
    leading eigenpair with unit-norm vectors (1 for a normal matrix).
    """
    A = matrix.entries
    if not np.all(np.isfinite(A)):
        raise np.linalg.LinAlgError("non-finite collocation entries")
    vals, left, right = scipy.linalg.eig(A, left=True, right=True)
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    left, right = left[:, order], right[:, order]
    l0, r0 = left[:, 0], right[:, 0]
    denom = abs(np.vdot(l0, r0)) / (np.linalg.norm(l0) * np.linalg.norm(r0))
    cond = 1.0 / denom if denom > 0 else math.inf
    return SpectrumEstimate(vals, matrix.degree, cond, right if vectors else None)


def _collocation_arb(c: float, degree: int):
    """Collocation matrix with ball-arithmetic entries (current ``flint.ctx.prec``)."""
    from flint import acb_mat, arb

    c = arb(c)
    beta = (1 + (1 - 4 * c).sqrt()) / 2
    n = degree
    x = [beta * (arb(j) / n).cos_pi() for j in range(n + 1)]
    w = [arb((-1) ** j) / (2 if j in (0, n) else 1) for j in range(n + 1)]
    rows = []
    for xi in x:
        y = (xi - c).sqrt()
        row = [arb(0)] * (n + 1)
        for s in (y, -y):
            d = [s - xj for xj in x]
            hit = [j for j in range(n + 1) if d[j].contains(0)]
            if hit:
                row[hit[0]] += 1
                continue
            q = [wj / dj for wj, dj in zip(w, d)]
            tot = sum(q, arb(0))
            row = [r + qj / tot for r, qj in zip(row, q)]
        wt = 1 / (4 * y * y)
        rows.append([wt * v for v in row])
    return acb_mat(rows)


def spectrum_extended(c, degree: int, prec_bits: int = 200) -> SpectrumEstimate:
    """Collocation spectrum computed in ``prec_bits``-bit arithmetic.

    The collocation matrix is strongly non-normal: in double precision every
    eigenvalue below roughly 1e-4 times the leading one drowns in rounding
    noise. Building the entries and solving the eigenproblem at 200 bits
    resolves eigenvalues down to about 1e-12 at degree 96.
    """
    import flint

    p = _check_collocation(c, degree)
    old = flint.ctx.prec
    flint.ctx.prec = prec_bits
    try:
        A = _collocation_arb(p.c, degree)
        E = A.eig(algorithm="approx")
        vals = np.array([complex(e) for e in E])
    finally:
        flint.ctx.prec = old
    vals = vals[np.argsort(-np.abs(vals), kind="stable")]
    return SpectrumEstimate(vals, degree, math.nan)


def apply_ruelle(g, c, x):
    """``(L_c g)(x)`` by direct preimage summation."""
    p = Parameter.coerce(c)
    x = np.asarray(x, dtype=float)
    y = np.sqrt(x - p.c)
    return (g(y) + g(-y)) / (4.0 * y * y)


def tent_matrix(degree: int, exact: bool = False):
    """Matrix of ``G`` on ``1, t, ..., t^degree``; column d is ``G(t^d)``.

    ``G(t^d) = ((t/2)^d + (1 - t/2)^d) / 2``, upper triangular with diagonal
    ``2^(-d-1) (1 + (-1)^d)``. With ``exact=True`` entries are Fractions.
    """
    if degree < 2:
        raise ValueError("degree must be >= 2")
    half = Fraction(1, 2)
    M = [[Fraction(0)] * (degree + 1) for _ in range(degree + 1)]
    for d in range(degree + 1):
        # (1 - t/2)^d = sum_i C(d, i) (-1/2)^i t^i
        for i in range(d + 1):
            M[i][d] += half * comb(d, i) * (-half) ** i
        M[d][d] += half * half**d
    if exact:
        return np.array(M, dtype=object)
    return np.array([[float(v) for v in row] for row in M])


def tent_eigenpolynomials(degree: int):
    """Monic eigenpolynomials ``p_m`` of ``G`` with eigenvalue ``4^(-m)``, 2m <= degree.

    Returns ``[(eigenvalue, coeffs)]`` with ascending Fraction coefficients
    of length ``2m + 1``. Solved by back substitution in exact arithmetic.
    """
    G = tent_matrix(max(degree, 2), exact=True)
    out = []
    for m in range(degree // 2 + 1):
        mu = Fraction(1, 4**m)
        top = 2 * m
        p = [Fraction(0)] * (top + 1)
        p[top] = Fraction(1)
        for i in range(top - 1, -1, -1):
            s = sum((G[i][j] * p[j] for j in range(i + 1, top + 1)), Fraction(0))
            p[i] = s / (mu - G[i][i])
        out.append((mu, p))
    return out


def _escape_series(c: float, lam: complex, z: complex, tol: float = 1e-17, max_terms: int = 5000):
    """``sum_{n>=0} lam^n / (2^n z f(z) ... f^n(z))`` for ``z`` off the Julia set."""
    w = complex(z)
    if w == 0:
        raise ValueError("orbit hits 0")
    term = 1.0 / w
    total = term
    for _ in range(max_terms):
        w = w * w + c
        if w == 0:
            raise ValueError("orbit hits 0")
        if abs(w) > 1e150:
            return total
        term = term * lam / (2.0 * w)
        total += term
        if abs(term) <= tol * abs(total) and abs(lam / (2.0 * (w * w + c))) < 0.5:
            return total
    raise RuntimeError(f"series at z={z!r} did not converge in {max_terms} terms")


def adjoint_g(c, lam: complex, z: complex) -> complex:
    """``g(z) = 1/z + sum_{n>=1} lam^n / (2^n z f_c(z) ... f_c^n(z))``."""
    p = Parameter.coerce(c)
    return _escape_series(p.c, complex(lam), complex(z))


def adjoint_equation_residual(c, lam: complex, zsamples):
    """Max residual of ``g(z) = lam g(f_c(z)) / (2z) + 1/z`` over samples.

    The identity holds for every ``lam``; what singles out eigenvalues is
    that ``g`` has no pole at 0, i.e. ``D_c(lam) = 0``, so ``|D_c(lam)|`` is
    returned alongside. Returns ``(residual, abs_det)``.
    """
    p = Parameter.coerce(c)
    beta = fixed_point_beta(p) if p.t >= 0 else None
    lam = complex(lam)
    worst = 0.0
    for z in np.atleast_1d(np.asarray(zsamples, dtype=complex)):
        z = complex(z)
        if z.imag == 0 and abs(z.real) <= beta:
            raise ValueError(f"sample {z!r} lies in [-beta, beta]")
        g = adjoint_g(p, lam, z)
        gf = adjoint_g(p, lam, z * z + p.c)
        r = abs(g - lam * gf / (2.0 * z) - 1.0 / z)
        worst = max(worst, r)
    R = max(2.0 * abs(lam), 8.0)
    det = evaluate(build_series(p, R), lam)
    return worst, abs(det.value)
