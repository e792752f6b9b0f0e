"""Parametric diffusion coefficient, forward solves and truncation.

The coefficient is affine in the parameters, u(x, y) = nominal +
sum_j y_j psi_j(x) with y in [-1, 1]^s. Two basis families:

  kl:        psi_{2j}(x) = (2j)^-zeta sin(j pi x),
             psi_{2j-1}(x) = (2j-1)^-zeta cos(j pi x)
  indicator: psi_j = theta j^-zeta on the cell D_j of the graded
             partition x_j = (j/s)^a, zero elsewhere

Both are ordered with nonincreasing sup norms, and a positive uniform
ellipticity margin over the whole parameter box is certified when the
model is built (indicator supports are disjoint, so only the largest
amplitude counts there).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hoqmc import fem

OBS_POINTS_DEFAULT = (0.2, 0.5, 0.7)
QOI_POINT_DEFAULT = 0.25


@dataclass(frozen=True)
class UncertaintyModel:
    nominal: float
    basis: str  # "kl" or "indicator"
    s: int
    zeta: float = 2.0
    theta: float = 0.25  # indicator amplitude scale
    grading: float = 0.2  # indicator partition exponent

    def __post_init__(self):
        if self.basis not in ("kl", "indicator"):
            raise ValueError(f"unknown basis {self.basis!r}")
        if self.s < 1:
            raise ValueError("dimension must be positive")
        if self.nominal <= 0:
            raise ValueError("nominal coefficient must be positive")
        if self.ellipticity_margin() <= 0:
            raise ValueError("ellipticity margin violated")

    def sup_norms(self) -> np.ndarray:
        j = np.arange(1, self.s + 1, dtype=np.float64)
        if self.basis == "kl":
            return j**-self.zeta
        return self.theta * j**-self.zeta

    def ellipticity_margin(self) -> float:
        """Lower bound of u over the parameter box, minus zero."""
        if self.basis == "kl":
            return self.nominal - float(np.sum(self.sup_norms()))
        # indicator supports are disjoint: only one term acts per point
        return self.nominal - self.theta

    def kl_basis_matrix(self, x: np.ndarray) -> np.ndarray:
        """psi_i(x) for i = 1..s, shape x.shape + (s,)."""
        if self.basis != "kl":
            raise ValueError("basis matrix only defined for the kl family")
        x = np.asarray(x, dtype=np.float64)
        i = np.arange(1, self.s + 1)
        freq = (i + 1) // 2
        amp = i.astype(np.float64) ** -self.zeta
        angle = np.pi * freq * x[..., None]
        return amp * np.where(i % 2 == 1, np.cos(angle), np.sin(angle))

    def indicator_mesh(self) -> fem.Mesh1D:
        return fem.Mesh1D.graded(self.s, self.grading)

    def indicator_amplitudes(self) -> np.ndarray:
        return self.sup_norms()


def check_parameters(y: np.ndarray, s: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != s:
        raise ValueError("parameter vector has wrong dimension")
    if np.max(np.abs(y)) > 1.0 + 1e-12:
        raise ValueError("parameter out of range")
    return y


def truncate(y: np.ndarray, s_prime: int) -> np.ndarray:
    """Zero all entries beyond s_prime (the s_prime-term expansion)."""
    y = np.asarray(y, dtype=np.float64)
    if not 0 <= s_prime <= y.shape[-1]:
        raise ValueError("truncation dimension out of range")
    out = y.copy()
    out[..., s_prime:] = 0.0
    return out


def coefficient_field(model: UncertaintyModel, y) -> fem.DiffusionCoefficient:
    """Diffusion coefficient for one parameter vector."""
    y = check_parameters(y, model.s)
    if model.basis == "indicator":
        values = model.nominal + y * model.indicator_amplitudes()
        umin = float(values.min())
        if umin <= 0:
            raise ValueError("ellipticity margin violated")
        return fem.DiffusionCoefficient(u_min=umin, element_values=values)
    umin = model.nominal - float(np.abs(y) @ model.sup_norms())
    if umin <= 0:
        raise ValueError("ellipticity margin violated")

    def u_fn(x):
        return model.nominal + model.kl_basis_matrix(x) @ y

    return fem.DiffusionCoefficient(u_min=umin, fn=u_fn)


def default_source(model: UncertaintyModel):
    """Experiment forcing: 100x for the kl family, constant 100 else."""
    if model.basis == "kl":
        return lambda x: 100.0 * x
    return 100.0


class ForwardOperator:
    """Precomputed assembly data for repeated solves of one model.

    For the kl family on a fixed mesh the element coefficient integrals
    are affine in y, so a whole batch reduces to one matrix product and
    a vectorized tridiagonal sweep. Evaluation returns the quantity of
    interest together with the observation vector from a single solve.
    """

    def __init__(
        self,
        model: UncertaintyModel,
        level: int = 10,
        degree: int = 1,
        obs_points=OBS_POINTS_DEFAULT,
        qoi_point: float = QOI_POINT_DEFAULT,
        source=None,
        batch_size: int = 2048,
    ):
        self.model = model
        self.degree = degree
        self.obs_points = tuple(float(x) for x in obs_points)
        self.qoi_point = float(qoi_point)
        self.source = default_source(model) if source is None else source
        self.batch_size = batch_size
        if model.basis == "indicator":
            self.mesh = model.indicator_mesh()
        else:
            self.mesh = fem.Mesh1D.uniform(level)
        self._eval_points = np.array([self.qoi_point, *self.obs_points])
        if degree == 1:
            self._load = fem.p1_load_vector(self.mesh, self.source)
        if model.basis == "kl":
            # element integrals of each basis function (5-node GL)
            xq = fem._element_quad_points(self.mesh)
            psi = model.kl_basis_matrix(xq)  # (n_elem, 5, s)
            self._agg = np.tensordot(fem._GL_W, psi, axes=(0, 1)) * self.mesh.widths[:, None]

    def solve_batch(self, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(qoi, observations) for every row of Y, shape (B,), (B, K)."""
        Y = check_parameters(np.atleast_2d(Y), self.model.s)
        B = Y.shape[0]
        qoi = np.empty(B)
        obs = np.empty((B, len(self.obs_points)))
        for lo in range(0, B, self.batch_size):
            hi = min(lo + self.batch_size, B)
            q, o = self._solve_chunk(Y[lo:hi])
            qoi[lo:hi] = q
            obs[lo:hi] = o
        return qoi, obs

    def _solve_chunk(self, Y):
        model = self.model
        if self.degree == 1:
            if model.basis == "kl":
                elem = model.nominal * self.mesh.widths + Y @ self._agg.T
            else:
                values = model.nominal + Y * model.indicator_amplitudes()
                elem = values * self.mesh.widths
            nodal = fem.p1_solve_batch(self.mesh, elem, self._load)
            at = fem.evaluate_batch(self.mesh, nodal, self._eval_points)
            return at[:, 0], at[:, 1:]
        # degree 2 goes through the scalar solver row by row
        qoi = np.empty(Y.shape[0])
        obs = np.empty((Y.shape[0], len(self.obs_points)))
        for b in range(Y.shape[0]):
            sol = fem.solve(
                coefficient_field(model, Y[b]), self.source, self.mesh, 2
            )
            qoi[b] = sol.evaluate(self.qoi_point)
            obs[b] = [sol.evaluate(x) for x in self.obs_points]
        return qoi, obs

    def solve_one(self, y) -> tuple[float, np.ndarray]:
        qoi, obs = self.solve_batch(np.atleast_2d(np.asarray(y, dtype=np.float64)))
        return float(qoi[0]), obs[0]


def forward_outputs(
    model: UncertaintyModel,
    y,
    level: int = 10,
    degree: int = 1,
    obs_points=OBS_POINTS_DEFAULT,
    qoi_point: float = QOI_POINT_DEFAULT,
    source=None,
) -> tuple[float, np.ndarray]:
    """One-off forward solve returning (qoi, observation vector)."""
    op = ForwardOperator(
        model,
        level=level,
        degree=degree,
        obs_points=obs_points,
        qoi_point=qoi_point,
        source=source,
    )
    return op.solve_one(y)
