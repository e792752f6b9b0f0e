"""Estimator drivers."""

import numpy as np
import pytest

from hoqmc import cbc, lattice, quadrature
from hoqmc.weights import WeightSpec


def points_for(s, m, alpha=2):
    res = cbc.cbc_construct(s, m, WeightSpec("spod", 0.2, 2.0, alpha))
    return lattice.generate_points(res.vector)


def test_constant_integrand_exact():
    pts = points_for(2, 6)
    assert quadrature.qmc_integrate(pts, lambda t: 1.0) == 1.0


def test_first_coordinate_mean_exact():
    # a non-interlaced coordinate stream is a permutation of {i/N}; the
    # interlaced coordinate has mean (1/N) sum of its exact values
    m = 5
    pts = points_for(1, m)
    vals = pts.coords[:, 0].astype(np.float64) * 2.0**-pts.precision
    want = float(np.mean(vals))
    got = quadrature.qmc_integrate(pts, lambda t: t[0])
    assert got == pytest.approx(want, abs=1e-15)


def test_qmc_invariant_under_batching():
    pts = points_for(2, 7)
    g = lambda T: np.cos(T[:, 0]) * T[:, 1]
    whole = quadrature.qmc_integrate(pts, g, vectorized=True)
    scalar = quadrature.qmc_integrate(pts, lambda t: float(np.cos(t[0]) * t[1]))
    assert whole == pytest.approx(scalar, abs=5e-16)


def test_mc_constant_has_zero_error():
    est, l2 = quadrature.mc_estimate(64, 3, 10, 0, lambda t: 2.5, reference=2.5)
    assert est == 2.5
    assert l2 == 0.0


def test_mc_clt_scaling():
    # slope of the L2 error of the mean of t_1 should be near -1/2
    errs, ns = [], []
    for m in range(6, 14):
        n = 1 << m
        _, l2 = quadrature.mc_estimate(
            n, 1, 10, 42, lambda T: T[:, 0], reference=0.5, vectorized=True
        )
        errs.append(l2)
        ns.append(n)
    slope = quadrature.fit_rate(ns, errs, last=8)
    assert -0.8 < slope < -0.25


def test_mc_requires_repetitions():
    with pytest.raises(ValueError):
        quadrature.mc_estimate(8, 1, 1, 0, lambda t: 1.0, reference=1.0)


def test_fit_rate_recovers_synthetic_slope():
    ns = [2**m for m in range(3, 13)]
    errs = [n**-2.0 for n in ns]
    assert quadrature.fit_rate(ns, errs) == pytest.approx(-2.0, abs=1e-12)
    errs3 = [5.0 * n**-3.0 for n in ns]
    assert quadrature.fit_rate(ns, errs3) == pytest.approx(-3.0, abs=1e-12)


def test_fit_rate_skips_zero_errors():
    ns = [8, 16, 32, 64]
    errs = [1e-2, 1e-3, 0.0, 1e-5]
    slope = quadrature.fit_rate(ns, errs, last=4)
    assert np.isfinite(slope)


def test_record_rows_increasing():
    rec = quadrature.ConvergenceRecord(metadata={"kind": "demo"})
    rec.add_row(3, 8, 1.0, 1.5, 0.5, 0.01)
    rec.add_row(4, 16, 1.2, 1.5, 0.3, 0.01)
    with pytest.raises(ValueError):
        rec.add_row(4, 16, 1.2, 1.5, 0.3, 0.01)
