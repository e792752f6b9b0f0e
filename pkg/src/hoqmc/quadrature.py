"""Deterministic QMC estimation and a Monte Carlo baseline.

Integrands are functions on the unit cube [0,1]^s. Accumulations use
numpy's pairwise summation in a fixed order, so estimates are
reproducible and independent of how point evaluations are batched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from hoqmc import lattice


@dataclass
class ConvergenceRecord:
    """Rows of (m, N, estimate, reference, abs_error, seconds).

    The first column is the sweep key (m for sample sweeps, where
    N = 2^m then increases strictly; mesh level or truncation dimension
    for the other studies). Keys must increase strictly and N may never
    decrease.
    """

    metadata: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    def add_row(self, m, n, estimate, reference, abs_error, seconds):
        if self.rows and (m <= self.rows[-1][0] or n < self.rows[-1][1]):
            raise ValueError("row keys must increase strictly")
        self.rows.append(
            (int(m), int(n), float(estimate), float(reference), float(abs_error), float(seconds))
        )


def _evaluate(integrand, pts: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        return np.asarray(integrand(pts), dtype=np.float64)
    return np.array([integrand(p) for p in pts], dtype=np.float64)


def qmc_integrate(
    points: lattice.InterlacedPointSet, integrand, vectorized: bool = False
) -> float:
    """Equal-weight average of the integrand over the point set."""
    vals = _evaluate(integrand, points.as_floats(), vectorized)
    return float(np.sum(vals) / points.n_points)


def mc_estimate(
    n: int,
    s: int,
    repetitions: int,
    seed: int,
    integrand,
    reference: float,
    vectorized: bool = False,
) -> tuple[float, float]:
    """Repeated uniform sampling with an L2 error estimate.

    Returns (mean of the repetition means, root mean square deviation
    of the repetition means from the reference value).
    """
    if repetitions < 2:
        raise ValueError("need at least two repetitions")
    rng = np.random.default_rng(seed)
    means = np.empty(repetitions)
    for r in range(repetitions):
        pts = rng.random((n, s))
        means[r] = np.sum(_evaluate(integrand, pts, vectorized)) / n
    l2 = float(np.sqrt(np.sum((means - reference) ** 2) / repetitions))
    return float(np.sum(means) / repetitions), l2


def fit_rate(ns, errors, last: int = 5) -> float:
    """Least-squares slope of log(error) against log(N).

    Only the trailing `last` entries enter the fit; nonpositive errors
    are excluded (they carry no rate information on a log scale).
    """
    ns = np.asarray(ns, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    keep = errors > 0
    ns, errors = ns[keep], errors[keep]
    if len(ns) > last:
        ns, errors = ns[-last:], errors[-last:]
    if len(ns) < 2:
        raise ValueError("need at least two positive errors to fit a rate")
    return float(np.polyfit(np.log(ns), np.log(errors), 1)[0])
