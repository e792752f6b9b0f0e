"""Weight structures driving the CBC search criterion.

Three families over subsets u of dimensions, all built from the decay
sequence beta_j = theta * j^(-zeta) and the smoothness order alpha:

  product:  gamma_u = prod_{j in u} sum_nu nu! 2^d(nu) beta_j^nu
  spod:     gamma_u = sum over order vectors nu_u in {1..alpha}^|u| of
            |nu_u|! prod_j 2^d(nu_j) beta_j^(nu_j)
  hybrid:   product-style factorials for dimensions j <= J, SPOD-style
            order factorial for the rest

where d(nu) is 1 if nu = alpha and 0 otherwise. The Walsh constant C
scales every per-dimension kernel factor inside the criterion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as iter_product

KINDS = ("product", "spod", "hybrid")


@dataclass(frozen=True)
class WeightSpec:
    kind: str
    theta: float
    zeta: float
    alpha: int
    walsh_constant: float = 0.1
    hybrid_cutoff: int = 0  # J: product structure for j <= J (hybrid only)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.alpha < 2:
            raise ValueError("order must be >= 2")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.zeta <= 1:
            raise ValueError("zeta must exceed 1")
        if self.walsh_constant <= 0:
            raise ValueError("Walsh constant must be positive")
        if self.hybrid_cutoff < 0:
            raise ValueError("hybrid cutoff must be nonnegative")

    def beta(self, j: int) -> float:
        """Decay sequence, 1-based dimension index."""
        return self.theta * float(j) ** (-self.zeta)

    def is_product_dim(self, j: int) -> bool:
        """True when dimension j carries product-style factorials."""
        if self.kind == "product":
            return True
        if self.kind == "spod":
            return False
        return j <= self.hybrid_cutoff

    def product_gamma(self, j: int) -> float:
        """Per-dimension factor sum_nu nu! 2^d(nu,alpha) beta_j^nu."""
        b = self.beta(j)
        return sum(
            math.factorial(nu) * (2.0 if nu == self.alpha else 1.0) * b**nu
            for nu in range(1, self.alpha + 1)
        )

    def fingerprint(self) -> str:
        parts = [
            f"kind={self.kind}",
            f"theta={self.theta:g}",
            f"zeta={self.zeta:g}",
            f"alpha={self.alpha}",
            f"C={self.walsh_constant:g}",
            f"J={self.hybrid_cutoff}",
        ]
        return ",".join(parts)


def _two_delta(nu: int, alpha: int) -> float:
    return 2.0 if nu == alpha else 1.0


def gamma_weight(u, w: WeightSpec, nu=None) -> float:
    """Weight of the dimension subset u (1-based indices).

    With nu given (one order per element of u, each in 1..alpha) the
    single corresponding term is returned instead of the full sum over
    order vectors. gamma of the empty set is 1 by convention.
    """
    u = sorted(u)
    if nu is not None and len(nu) != len(u):
        raise ValueError("order vector must match u")
    if not u:
        return 1.0

    def term(orders):
        spod_total = 0
        fac = 1.0
        for j, nu_j in zip(u, orders):
            if not 1 <= nu_j <= w.alpha:
                raise ValueError("orders must lie in 1..alpha")
            fac *= _two_delta(nu_j, w.alpha) * w.beta(j) ** nu_j
            if w.is_product_dim(j):
                fac *= math.factorial(nu_j)
            else:
                spod_total += nu_j
        return fac * math.factorial(spod_total)

    if nu is not None:
        return term(tuple(nu))
    return sum(term(orders) for orders in iter_product(range(1, w.alpha + 1), repeat=len(u)))


def walsh_constant_default(alpha: int, b: int = 2, variant: str = "default") -> float:
    """Constant C used inside the CBC criterion.

    "default" is the empirically preferred 0.1, "yoshiki" the proven
    value 1 for base 2, and "theoretical" evaluates the generic bound
    and applies the 2^alpha factor from mapping [0,1] to [-1,1].
    """
    if b != 2:
        raise ValueError("only base 2 is supported")
    if variant == "default":
        return 0.1
    if variant == "yoshiki":
        return 1.0
    if variant == "theoretical":
        sin_term = 2.0 * math.sin(math.pi / b)
        lead = max(
            2.0 / sin_term**alpha,
            max(1.0 / sin_term**z for z in range(1, alpha)),
        )
        mid = (1.0 + 1.0 / b + 1.0 / (b * (b + 1))) ** (alpha - 2)
        tail = 3.0 + 2.0 / b + (2.0 * b + 1.0) / (b - 1.0)
        return lead * mid * tail * 2.0**alpha
    raise ValueError(f"unknown variant {variant!r}")
