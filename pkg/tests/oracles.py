"""High-precision reference computations, independent of the package.

Everything here uses mpmath only. ``python tests/oracles.py`` regenerates
``tests/frozen.json``; the tests compare against the frozen numbers and
re-run a few oracles live.
"""
from __future__ import annotations

import json
import pathlib

import mpmath as mp

FROZEN_PATH = pathlib.Path(__file__).with_name("frozen.json")


def orbit(c, N, dps=60):
    with mp.workdps(dps):
        c = mp.mpf(c)
        r = [c]
        while len(r) < N:
            r.append(r[-1] ** 2 + c)
        return r


def cutoff_k(c, dps=80):
    """Smallest k with r_{k+1}/r_k >= 36, in high precision."""
    with mp.workdps(dps):
        r = orbit(c, 200, dps)
        for k in range(1, len(r)):
            if r[k] / r[k - 1] >= 36:
                return k
    raise RuntimeError("no cutoff")


def det_coeffs(c, N, dps=60):
    with mp.workdps(dps):
        r = orbit(c, N, dps)
        a = [mp.mpf(1)]
        for n in range(1, N + 1):
            a.append(a[-1] / (2 * r[n - 1]))
        return a


def det_eval(c, lam, N=60, dps=60):
    with mp.workdps(dps):
        a = det_coeffs(c, N, dps)
        return mp.polyval(a[::-1], mp.mpc(lam))


def det_zeros(c, radius, N=40, dps=60):
    """Zeros of D_c with modulus below ``radius``.

    Muller iterations on the (effectively untruncated) series, started on
    each coefficient-ratio circle at several angles; duplicates merged.
    Companion eigenvalues and Durand-Kerner both fail on the doubly
    exponential spread of root moduli.
    """
    with mp.workdps(dps):
        a = det_coeffs(c, N, dps)
        f = lambda x: mp.polyval(a[::-1], x)  # noqa: E731
        found = []
        for n in range(1, N + 1):
            rad = abs(a[n - 1] / a[n])
            if rad > 10 * radius:
                break
            for th in [0.05 + 2 * mp.pi * q / 16 for q in range(16)]:
                z0 = rad * mp.expjpi(th / mp.pi)
                try:
                    z = mp.findroot(f, (z0, z0 * 1.01, z0 * 0.99), solver="muller", tol=mp.mpf(10) ** (-dps + 10), maxsteps=200)
                except (ValueError, ZeroDivisionError):
                    continue
                if abs(z) < radius and not any(abs(z - w) < mp.mpf(10) ** (-25) * abs(z) for w in found):
                    if abs(mp.im(z)) < mp.mpf(10) ** (-30) * abs(z):
                        z = mp.mpc(mp.re(z), 0)
                    found.append(z)
        return sorted(found, key=lambda z: (abs(z), mp.im(z)))


def hardy_coeffs(a, N, dps=40):
    with mp.workdps(dps):
        a = mp.mpf(a)
        return [a ** (-(2 ** n - 1)) for n in range(N + 1)]


def tent_rho(z, m, dps=None):
    """rho(m) for A = B = 1/(z - 2cos pi t) by the partial-fraction closed form.

    rho = W [ (I(z) - I(w)) / (w - z) - I(z) I(w) ],  I(x) = 1/sqrt(x^2 - 4).
    The bracket cancels to about a^(-2^(m+1)); the working precision is
    raised to cover that.
    """
    dps = dps or int(2 ** (m + 1) * 0.5) + 60
    with mp.workdps(dps):
        z = mp.mpf(z)
        if m == 0:
            return z / (z * z - 4) ** mp.mpf(1.5) - 1 / (z * z - 4)
        w, W = z, mp.mpf(1)
        for _ in range(m):
            W *= w
            w = w * w - 2
        I = lambda x: 1 / mp.sqrt(x * x - 4)  # noqa: E731
        return W * ((I(z) - I(w)) / (w - z) - I(z) * I(w))


def collocation(c, n, dps=40):
    """Lagrange-basis collocation matrix of the transfer operator in mpmath."""
    with mp.workdps(dps):
        c = mp.mpf(c)
        beta = (1 + mp.sqrt(1 - 4 * c)) / 2
        x = [beta * mp.cos(mp.pi * j / n) for j in range(n + 1)]
        w = [(-1) ** j * (mp.mpf(1) / 2 if j in (0, n) else 1) for j in range(n + 1)]
        A = mp.matrix(n + 1, n + 1)
        for i in range(n + 1):
            y = mp.sqrt(x[i] - c)
            for s in (y, -y):
                d = [s - xj for xj in x]
                hit = [j for j in range(n + 1) if abs(d[j]) < mp.mpf(10) ** (-dps + 5)]
                if hit:
                    A[i, hit[0]] += 1 / (4 * y * y)
                    continue
                q = [wj / dj for wj, dj in zip(w, d)]
                tot = mp.fsum(q)
                for j in range(n + 1):
                    A[i, j] += q[j] / tot / (4 * y * y)
        return A


def principal_zero(c, dps=50):
    with mp.workdps(dps):
        f = lambda x: det_eval(c, x, N=60, dps=dps).real  # noqa: E731
        lo, hi = mp.mpf(1), mp.mpf(4) * abs(mp.mpf(c)) + 8
        return mp.findroot(f, (lo, mp.mpf(2) if c == -2 else hi), solver="anderson")


def freeze():
    out = {}
    out["orbit_c-3"] = [float(v) for v in orbit(-3, 5)]
    out["orbit_c-2.5"] = [float(v) for v in orbit(-2.5, 4)]
    out["k"] = {str(j): cutoff_k(-2 - mp.mpf(4) ** (-j)) for j in range(4, 15)}
    out["D_c-3_at_1"] = float(det_eval(-3, 1).real)
    out["zeros_c-3"] = [[float(z.real), float(z.imag)] for z in det_zeros(-3, 1e7)]
    out["zeros_c-2.5"] = [[float(z.real), float(z.imag)] for z in det_zeros(-2.5, 1e7)]
    out["zeros_c-2.1"] = [[float(z.real), float(z.imag)] for z in det_zeros(-2.1, 1e3)]
    out["zeros_t4^-8"] = [[float(z.real), float(z.imag)] for z in det_zeros(-2 - mp.mpf(4) ** -8, 1e3)]
    with mp.workdps(40):
        out["lambda0"] = {str(c): float(principal_zero(c)) for c in (-3, -2.5, -2.1)}
    out["tent_rho_z3"] = [mp.nstr(tent_rho(3, m), 20) for m in range(0, 11)]
    out["tent_rho_z2.5"] = [mp.nstr(tent_rho(2.5, m), 20) for m in range(0, 11)]
    out["tent_rho_z4"] = [mp.nstr(tent_rho(4, m), 20) for m in range(0, 11)]
    FROZEN_PATH.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    return out


def load_frozen():
    return json.loads(FROZEN_PATH.read_text())


if __name__ == "__main__":
    print(json.dumps(freeze(), indent=1)[:2000])
