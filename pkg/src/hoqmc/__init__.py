"""Higher-order QMC quadrature for forward and Bayesian inverse UQ.

The package builds interlaced polynomial lattice rules by fast
component-by-component search, solves a parametric 1D diffusion problem
with finite elements, and estimates prior and posterior expectations of
a point quantity of interest.
"""

from hoqmc import bayes, cbc, fem, forward, gf2, lattice, quadrature, weights
from hoqmc.bayes import ObservationSetup, RatioEstimate, ratio_estimate, synthesize_data
from hoqmc.cbc import CBCResult, cbc_construct, criterion, kernel_omega
from hoqmc.fem import DiffusionCoefficient, FEMSolution, Mesh1D
from hoqmc.forward import ForwardOperator, UncertaintyModel
from hoqmc.lattice import GeneratingVector, InterlacedPointSet, generate_points
from hoqmc.quadrature import fit_rate, mc_estimate, qmc_integrate
from hoqmc.weights import WeightSpec, gamma_weight, walsh_constant_default

__all__ = [
    "CBCResult",
    "DiffusionCoefficient",
    "FEMSolution",
    "ForwardOperator",
    "GeneratingVector",
    "InterlacedPointSet",
    "Mesh1D",
    "ObservationSetup",
    "RatioEstimate",
    "UncertaintyModel",
    "WeightSpec",
    "bayes",
    "cbc",
    "cbc_construct",
    "criterion",
    "fem",
    "fit_rate",
    "forward",
    "gamma_weight",
    "generate_points",
    "gf2",
    "kernel_omega",
    "lattice",
    "mc_estimate",
    "qmc_integrate",
    "quadrature",
    "ratio_estimate",
    "synthesize_data",
    "walsh_constant_default",
    "weights",
]

__version__ = "0.1.0"
