import numpy as np
import pytest

from quadzeta.orbit import Parameter
from quadzeta.rootfind import Zero, ZeroSet
from quadzeta.zerodist import (
    EmpiricalZeroMeasure,
    angular_stats,
    annulus_of,
    empirical_measure,
    kuiper_statistic,
    radial_stats,
    weak_limit_proxies,
    zero_statistics,
)


def _zs(points, R=2000.0):
    return ZeroSet([Zero(complex(p), 0.0, 0.0) for p in points], R=R, series_ref="synthetic")


def test_four_atoms():
    mu = empirical_measure(_zs([4, 4j, -4, -4j]))
    assert mu.n_atoms == 4
    np.testing.assert_array_equal(mu.weights, 0.25)
    mean, frac = radial_stats(mu, 0.01)
    assert mean == 0.0 and frac == 1.0


def test_far_zero_excluded():
    mu = empirical_measure(_zs([4, -1200.0, 1200j]))
    assert mu.n_atoms == 1


def test_empty_and_short_radius_rejected():
    with pytest.raises(ValueError):
        empirical_measure(_zs([1500.0]))
    with pytest.raises(ValueError):
        empirical_measure(_zs([4.0], R=500.0))


def test_multiplicity_expanded():
    zs = ZeroSet([Zero(4 + 0j, 0.0, 0.0, multiplicity=3), Zero(-4 + 0j, 0.0, 0.0)], 2000.0, "synthetic")
    assert empirical_measure(zs).n_atoms == 4


@pytest.mark.parametrize("n", [8, 64, 512])
def test_equispaced_angles(n):
    pts = 4 * np.exp(2j * np.pi * np.arange(n) / n + 0.3j)
    ks, small = angular_stats(EmpiricalZeroMeasure(pts, np.full(n, 1 / n)))
    assert ks <= 1.0 / n + 1e-12 and not small


def test_single_atom_flagged():
    ks, small = angular_stats(EmpiricalZeroMeasure(np.array([4.0 + 0j]), np.array([1.0])))
    assert small and ks <= 1.0


def test_kuiper_rotation_invariant():
    rng = np.random.default_rng(3)
    u = rng.random(50)
    assert kuiper_statistic(u) == pytest.approx(kuiper_statistic(u + 0.37), abs=1e-12)
    assert kuiper_statistic(np.zeros(10)) == pytest.approx(1.0)


def test_annulus_examples():
    a = annulus_of(-3)
    assert (a.inner, a.outer) == (4344.0, 9774.0)
    assert a.lam_bounds == (8688.0, 19548.0)
    a = annulus_of(-2.5)
    assert a.inner == pytest.approx(524.77, abs=0.01)
    assert a.outer == pytest.approx(1180.7, abs=0.05)
    with pytest.raises(ValueError):
        annulus_of(-2.0)


def test_annulus_inside_universal_bounds():
    for c in np.random.default_rng(5).uniform(-3, -2, 200):
        if c == -2.0:
            continue
        a = annulus_of(c)
        assert 144 <= a.inner and a.outer <= 13689


def test_pipeline_count():
    stats, zs, mu = zero_statistics(Parameter.from_t(4.0**-8))
    assert abs(stats["n_zeros"] - stats["k"]) <= 2
    assert set(stats) == {"c", "t", "k", "n_zeros", "mean_log_ratio", "ks_angle", "frac_band_01", "annulus"}


@pytest.mark.xfail(strict=True, reason="measured 0.334 at j = 9; see decisions ledger")
def test_radial_mean_at_j9():
    stats, _, _ = zero_statistics(Parameter.from_t(4.0**-9))
    assert abs(stats["mean_log_ratio"]) <= 0.2


def test_radial_trend():
    vals = [abs(zero_statistics(Parameter.from_t(4.0**-j))[0]["mean_log_ratio"]) for j in range(5, 10)]
    assert all(b <= a + 0.05 for a, b in zip(vals, vals[1:]))


def test_pooled_angles():
    pts = []
    for j in (7, 8, 9):
        pts.append(zero_statistics(Parameter.from_t(4.0**-j))[2].points)
    pts = np.concatenate(pts)
    ks, _ = angular_stats(EmpiricalZeroMeasure(pts, np.full(pts.size, 1 / pts.size)))
    assert ks <= 0.25


def test_weak_limit_proxies_synthetic():
    n = 16
    pts = 4 * np.exp(2j * np.pi * np.arange(n) / n)
    d = weak_limit_proxies(EmpiricalZeroMeasure(pts, np.full(n, 1 / n)))
    assert d["one"] == pytest.approx(1.0) and d["abs2"] == pytest.approx(1.0)
    for key in ("re", "im", "cos_arg", "sin_arg"):
        assert abs(d[key]) < 1e-14


def test_count_ratio_trend():
    ratios = []
    for j in (5, 9, 12):
        s = zero_statistics(Parameter.from_t(4.0**-j))[0]
        ratios.append(abs(s["n_zeros"] / s["k"] - 1))
    assert ratios[-1] <= ratios[0]
