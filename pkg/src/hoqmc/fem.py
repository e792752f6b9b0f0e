"""Galerkin finite elements for -(u q')' = f on (0,1), q(0) = q(1) = 0.

P1 (piecewise linear) and P2 (piecewise quadratic with midpoint nodes)
elements on arbitrary strictly increasing meshes. All element integrals
use 5-node Gauss-Legendre, which is exact for the coefficient models
used here (element-constant and smooth-analytic with polynomial source
terms of low degree). Systems are symmetric positive definite and are
solved directly: tridiagonal elimination for P1, banded Cholesky for
P2. A batched P1 path solves many coefficient realizations at once,
which is what the QMC drivers use.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.linalg import solveh_banded

# 5-node Gauss-Legendre on [0, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W

SourceTerm = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class Mesh1D:
    """Strictly increasing nodes with exact endpoints 0 and 1."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=np.float64)
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValueError("mesh must span [0, 1] exactly")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def uniform(cls, level: int) -> "Mesh1D":
        """Dyadic mesh with spacing 2^-level."""
        if level < 0:
            raise ValueError("level must be nonnegative")
        return cls(np.linspace(0.0, 1.0, (1 << level) + 1))

    @classmethod
    def graded(cls, n: int, exponent: float) -> "Mesh1D":
        """n elements with x_j = (j/n)^exponent; exponent 1 is equispaced."""
        if n < 1:
            raise ValueError("need at least one element")
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        j = np.arange(n + 1, dtype=np.float64)
        nodes = (j / n) ** exponent
        nodes[0], nodes[-1] = 0.0, 1.0
        return cls(nodes)

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)


@dataclass(frozen=True)
class DiffusionCoefficient:
    """Coefficient either constant per element or a smooth callable.

    element_values must align with the mesh the solve is called on.
    u_min records the certified positive lower bound.
    """

    u_min: float
    element_values: np.ndarray | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if (self.element_values is None) == (self.fn is None):
            raise ValueError("give exactly one of element_values or fn")
        if self.u_min <= 0:
            raise ValueError("ellipticity violated")

    @classmethod
    def constant(cls, value: float) -> "DiffusionCoefficient":
        if value <= 0:
            raise ValueError("ellipticity violated")
        return cls(u_min=value, fn=lambda x: np.full_like(x, value, dtype=float))


@dataclass(frozen=True)
class FEMSolution:
    """Nodal values including the zero boundary entries.

    For degree 1 the values sit at the mesh nodes; for degree 2 they
    alternate node, midpoint, node, ... along the mesh.
    """

    mesh: Mesh1D
    degree: int
    values: np.ndarray

    def evaluate(self, x: float) -> float:
        return evaluate(self, x)


def _source_at(f: SourceTerm, x: np.ndarray) -> np.ndarray:
    if callable(f):
        return np.asarray(f(x), dtype=np.float64)
    return np.full_like(x, float(f))


def _element_quad_points(mesh: Mesh1D) -> np.ndarray:
    """Quadrature abscissae, shape (n_elements, 5)."""
    left = mesh.nodes[:-1, None]
    return left + mesh.widths[:, None] * _GL_X[None, :]


def element_coefficient_integrals(
    coeff: DiffusionCoefficient, mesh: Mesh1D
) -> np.ndarray:
    """Integral of the coefficient over each element (5-node GL)."""
    if coeff.element_values is not None:
        vals = np.asarray(coeff.element_values, dtype=np.float64)
        if len(vals) != mesh.n_elements:
            raise ValueError("element_values do not align with the mesh")
        if np.min(vals) <= 0:
            raise ValueError("ellipticity violated")
        return vals * mesh.widths
    xq = _element_quad_points(mesh)
    uq = coeff.fn(xq)
    if np.min(uq) <= 0:
        raise ValueError("ellipticity violated")
    return mesh.widths * (uq @ _GL_W)


def p1_load_vector(mesh: Mesh1D, f: SourceTerm) -> np.ndarray:
    """Interior load entries int f phi_i for the hat basis."""
    xq = _element_quad_points(mesh)
    fq = _source_at(f, xq)
    h = mesh.widths
    # local shape functions on each element: 1-t and t
    left = h * (fq @ (_GL_W * (1.0 - _GL_X)))
    right = h * (fq @ (_GL_W * _GL_X))
    n = mesh.n_elements
    b = np.zeros(n + 1)
    np.add.at(b, np.arange(n), left)
    np.add.at(b, np.arange(1, n + 1), right)
    return b[1:-1]


def p1_solve_batch(
    mesh: Mesh1D, elem_integrals: np.ndarray, load: np.ndarray
) -> np.ndarray:
    """Solve one P1 system per row of elem_integrals.

    elem_integrals[b, e] is int_e u for realization b. Returns the full
    nodal table (B, n_nodes) with zero boundary columns. Elimination is
    the Thomas algorithm vectorized across the batch; the reduction
    order is fixed, so results do not depend on batch splitting.
    """
    elem_integrals = np.atleast_2d(np.asarray(elem_integrals, dtype=np.float64))
    if np.min(elem_integrals) <= 0:
        raise ValueError("ellipticity violated")
    h = mesh.widths
    k = elem_integrals / h[None, :] ** 2  # per-element stiffness scale
    B, n = k.shape
    ndof = n - 1
    diag = k[:, :-1] + k[:, 1:]
    upper = -k[:, 1:-1]
    rhs = np.broadcast_to(load, (B, ndof)).copy()
    # in-place symmetric Thomas elimination
    cp = np.empty((B, max(ndof - 1, 0)))
    dg = diag.copy()
    for i in range(1, ndof):
        w = upper[:, i - 1] / dg[:, i - 1]
        cp[:, i - 1] = w
        dg[:, i] = dg[:, i] - w * upper[:, i - 1]
        rhs[:, i] = rhs[:, i] - w * rhs[:, i - 1]
    sol = np.empty((B, ndof))
    sol[:, -1] = rhs[:, -1] / dg[:, -1]
    for i in range(ndof - 2, -1, -1):
        sol[:, i] = (rhs[:, i] - upper[:, i] * sol[:, i + 1]) / dg[:, i]
    out = np.zeros((B, n + 1))
    out[:, 1:-1] = sol
    return out


def _p2_assemble(coeff: DiffusionCoefficient, f: SourceTerm, mesh: Mesh1D):
    """Banded SPD matrix (upper form) and load for the P2 basis."""
    n = mesh.n_elements
    h = mesh.widths
    xq = _element_quad_points(mesh)
    if coeff.element_values is not None:
        vals = np.asarray(coeff.element_values, dtype=np.float64)
        if len(vals) != n:
            raise ValueError("element_values do not align with the mesh")
        uq = np.repeat(vals[:, None], 5, axis=1)
    else:
        uq = coeff.fn(xq)
    if np.min(uq) <= 0:
        raise ValueError("ellipticity violated")
    fq = _source_at(f, xq)
    t = _GL_X
    # local quadratic shape derivatives in reference coordinates
    dphi = np.stack([4.0 * t - 3.0, 4.0 - 8.0 * t, 4.0 * t - 1.0])
    phi = np.stack(
        [(1.0 - t) * (1.0 - 2.0 * t), 4.0 * t * (1.0 - t), t * (2.0 * t - 1.0)]
    )
    ntot = 2 * n + 1  # nodes and midpoints
    ab = np.zeros((3, ntot))  # upper banded storage, bandwidth 2
    b = np.zeros(ntot)
    for a in range(3):
        for c in range(3):
            kec = (uq * (dphi[a] * dphi[c])[None, :]) @ _GL_W / h
            if c >= a:
                rows = 2 * np.arange(n) + a
                ab[2 - (c - a), rows + (c - a)] += kec
        b[2 * np.arange(n) + a] += h * (fq @ (_GL_W * phi[a]))
    # homogeneous Dirichlet: drop first and last rows/columns
    ab_i = ab[:, 1:-1].copy()
    ab_i[0, 0] = 0.0  # stale couplings to the removed boundary dofs
    ab_i[1, 0] = 0.0
    ab_i[0, 1] = 0.0
    return ab_i, b[1:-1]


def solve(
    coeff: DiffusionCoefficient, f: SourceTerm, mesh: Mesh1D, degree: int
) -> FEMSolution:
    """Galerkin solution with homogeneous Dirichlet boundary values."""
    if degree == 1:
        elem = element_coefficient_integrals(coeff, mesh)
        load = p1_load_vector(mesh, f)
        values = p1_solve_batch(mesh, elem[None, :], load)[0]
        return FEMSolution(mesh=mesh, degree=1, values=values)
    if degree == 2:
        ab, b = _p2_assemble(coeff, f, mesh)
        interior = solveh_banded(ab, b)
        values = np.zeros(2 * mesh.n_elements + 1)
        values[1:-1] = interior
        return FEMSolution(mesh=mesh, degree=2, values=values)
    raise ValueError("degree must be 1 or 2")


def evaluate(sol: FEMSolution, x: float) -> float:
    """Point value of the piecewise polynomial solution."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("evaluation point outside [0, 1]")
    nodes = sol.mesh.nodes
    e = int(np.searchsorted(nodes, x, side="right") - 1)
    e = min(max(e, 0), sol.mesh.n_elements - 1)
    t = (x - nodes[e]) / (nodes[e + 1] - nodes[e])
    if sol.degree == 1:
        return float((1.0 - t) * sol.values[e] + t * sol.values[e + 1])
    vl, vm, vr = sol.values[2 * e : 2 * e + 3]
    return float(
        vl * (1.0 - t) * (1.0 - 2.0 * t)
        + vm * 4.0 * t * (1.0 - t)
        + vr * t * (2.0 * t - 1.0)
    )


def evaluate_batch(
    mesh: Mesh1D, nodal_values: np.ndarray, xs: np.ndarray
) -> np.ndarray:
    """P1 point evaluation for a batch of nodal tables, shape (B, len(xs))."""
    nodes = mesh.nodes
    xs = np.asarray(xs, dtype=np.float64)
    e = np.clip(np.searchsorted(nodes, xs, side="right") - 1, 0, mesh.n_elements - 1)
    t = (xs - nodes[e]) / (nodes[e + 1] - nodes[e])
    return nodal_values[:, e] * (1.0 - t) + nodal_values[:, e + 1] * t


def galerkin_residual(
    coeff: DiffusionCoefficient, f: SourceTerm, sol: FEMSolution
) -> np.ndarray:
    """Residual of the discrete system, one entry per interior dof."""
    mesh = sol.mesh
    if sol.degree == 1:
        elem = element_coefficient_integrals(coeff, mesh)
        k = elem / mesh.widths**2
        u = sol.values
        flux = k * (u[1:] - u[:-1])
        return p1_load_vector(mesh, f) - (flux[:-1] - flux[1:])
    ab, b = _p2_assemble(coeff, f, mesh)
    x = sol.values[1:-1]
    n = len(x)
    ax = ab[2] * x
    for off in (1, 2):
        band = ab[2 - off, off:]
        ax[: n - off] += band * x[off:]
        ax[off:] += band * x[: n - off]
    return b - ax
