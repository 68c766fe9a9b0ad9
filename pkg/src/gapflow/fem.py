"""Galerkin truncation of H^1_0((0,1), R^n) with piecewise-linear elements.

The inner product is the pure stiffness form integral(<u', v'>), so the
Gram matrix of the discrete space is the stiffness matrix and the
Poincare inequality guarantees positive definiteness.  The module
assembles Hessian forms for functionals of the shape

    J(u) = 1/2 integral(<A(x) u', u'>) + integral(G(x, u(x))),

builds evaluation maps u -> u(t), their kernels (point-constrained
subspaces), cutoff-based projections onto those kernels, and the
operator path L_t = P_t T P_t + (I - P_t) driven by the Riesz
representation T of the Hessian.

Constraint points between nodes are handled by an exact interpolatory
constraint row coupling the two bracketing nodes; the mesh never moves
with the constraint, which keeps the subspace family gap-continuous on
a fixed mesh.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import BadCutoff, GapFlowError, OutOfInterval
from .grassmann import (
    InnerProductSpace,
    Projection,
    Subspace,
    orthogonalize_projection,
)
from .specflow import OperatorPath, SymmetricOperator
from .tolerances import DEFAULT_TOL, ToleranceProfile

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(3)
_NODE_SNAP = 1e-12


@dataclass(eq=False)
class Mesh:
    """Strictly increasing nodes from 0 to 1."""

    nodes: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise ValueError("mesh needs at least two nodes")
        if abs(self.nodes[0]) > _NODE_SNAP or abs(self.nodes[-1] - 1.0) > _NODE_SNAP:
            raise ValueError("mesh must span [0, 1]")
        self.nodes[0], self.nodes[-1] = 0.0, 1.0
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("mesh nodes must be strictly increasing")

    @classmethod
    def uniform(cls, n_elements: int) -> "Mesh":
        if n_elements < 1:
            raise ValueError("need at least one element")
        return cls(np.linspace(0.0, 1.0, n_elements + 1))

    def with_node(self, t: float) -> "Mesh":
        """Mesh refined by one node at t (unchanged if t already is a node)."""
        if not 0.0 < t < 1.0:
            raise ValueError("inserted node must be interior")
        if np.abs(self.nodes - t).min() <= _NODE_SNAP:
            return Mesh(self.nodes.copy())
        return Mesh(np.sort(np.append(self.nodes, t)))

    @property
    def n_elements(self) -> int:
        return self.nodes.size - 1

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.nodes)

    def locate(self, x: float) -> int:
        """Element index k with nodes[k] <= x <= nodes[k+1]."""
        k = int(np.searchsorted(self.nodes, x, side="right") - 1)
        return min(max(k, 0), self.n_elements - 1)


class DiscreteSpace:
    """Mesh, system dimension, and the stiffness Gram matrix.

    Degrees of freedom are the interior nodal values, node-major with
    blocks of size n.  Construct through assemble_gram.
    """

    def __init__(self, mesh: Mesh, n: int, ambient: InnerProductSpace):
        self.mesh = mesh
        self.n = n
        self.ambient = ambient
        self._quad = None

    @property
    def dof(self) -> int:
        return (self.mesh.n_elements - 1) * self.n

    @property
    def gram(self) -> np.ndarray:
        return self.ambient.gram

    def quadrature(self):
        """Per-element Gauss points and weights, cached."""
        if self._quad is None:
            nodes = self.mesh.nodes
            mid = 0.5 * (nodes[:-1] + nodes[1:])
            half = 0.5 * np.diff(nodes)
            points = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
            weights = half[:, None] * _GAUSS_W[None, :]
            self._quad = (points, weights)
        return self._quad

    def block(self, node: int) -> slice:
        """Coordinate slice of an interior node (1-based node index)."""
        if not 1 <= node <= self.mesh.n_elements - 1:
            raise IndexError(f"node {node} is not interior")
        return slice((node - 1) * self.n, node * self.n)


def assemble_gram(mesh: Mesh, n: int = 1) -> DiscreteSpace:
    """Discrete space with the exactly integrated stiffness Gram matrix."""
    if n < 1:
        raise ValueError("system dimension must be positive")
    n_el = mesh.n_elements
    dof = (n_el - 1) * n
    if dof == 0:
        raise ValueError("mesh has no interior nodes")
    h = mesh.spacings
    gram = np.zeros((dof, dof))
    eye = np.eye(n)
    for k in range(n_el):
        local = np.array([[1.0, -1.0], [-1.0, 1.0]]) / h[k]
        for a, node_a in enumerate((k, k + 1)):
            if not 1 <= node_a <= n_el - 1:
                continue
            ra = slice((node_a - 1) * n, node_a * n)
            for b, node_b in enumerate((k, k + 1)):
                if not 1 <= node_b <= n_el - 1:
                    continue
                rb = slice((node_b - 1) * n, node_b * n)
                gram[ra, rb] += local[a, b] * eye
    return DiscreteSpace(mesh, n, InnerProductSpace(dof, gram))


@dataclass(eq=False)
class DiscreteFunction:
    """Coefficient vector of a piecewise-linear function vanishing at 0 and 1."""

    space: DiscreteSpace
    coords: np.ndarray

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=float)
        if self.coords.shape != (self.space.dof,):
            raise ValueError(f"coords must have length {self.space.dof}")

    @classmethod
    def zero(cls, space: DiscreteSpace) -> "DiscreteFunction":
        return cls(space, np.zeros(space.dof))

    @classmethod
    def interpolate(cls, space: DiscreteSpace, f: Callable[[float], np.ndarray]) -> "DiscreteFunction":
        vals = [np.ravel(np.asarray(f(x), dtype=float)) for x in space.mesh.nodes[1:-1]]
        return cls(space, np.concatenate(vals) if vals else np.zeros(0))

    def nodal_values(self) -> np.ndarray:
        """(N+1, n) array of nodal values including the boundary zeros."""
        n = self.space.n
        vals = np.zeros((self.space.mesh.n_elements + 1, n))
        vals[1:-1] = self.coords.reshape(-1, n)
        return vals

    def element_slopes(self) -> np.ndarray:
        vals = self.nodal_values()
        return np.diff(vals, axis=0) / self.space.mesh.spacings[:, None]

    def value_at(self, x: float) -> np.ndarray:
        k = self.space.mesh.locate(x)
        nodes = self.space.mesh.nodes
        vals = self.nodal_values()
        w = (x - nodes[k]) / (nodes[k + 1] - nodes[k])
        return (1.0 - w) * vals[k] + w * vals[k + 1]

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.coords).max()) if self.coords.size else 0.0

    def h1_norm(self) -> float:
        return float(np.sqrt(max(self.coords @ self.space.gram @ self.coords, 0.0)))


# ---------------------------------------------------------------------------
# problem data and presets
# ---------------------------------------------------------------------------

def _matrix_at(f: Callable, x: float, n: int) -> np.ndarray:
    m = np.asarray(f(x), dtype=float)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.shape != (n, n):
        raise ValueError(f"coefficient at x={x} has shape {m.shape}, expected ({n}, {n})")
    return m


def _vector_at(f: Callable, x: float, xi: np.ndarray, n: int) -> np.ndarray:
    v = np.ravel(np.asarray(f(x, xi if n > 1 else float(xi[0])), dtype=float))
    if v.shape != (n,):
        raise ValueError(f"nonlinearity at x={x} has shape {v.shape}, expected ({n},)")
    return v


@dataclass(eq=False)
class ProblemData:
    """Coefficients of the functional and its linearization at zero.

    A: x -> symmetric invertible n x n leading coefficient.
    S: x -> symmetric n x n, the xi-derivative of g at xi = 0.
    g: (x, xi) -> R^n with g(x, 0) = 0.
    G_pot: (x, xi) -> R with gradient g in xi.
    dg: optional (x, xi) -> n x n Jacobian of g in xi; finite differences
        are used when absent.
    symbolic: True for closed-form coefficient classes (constant or
        polynomial presets), False for tabulated data.
    """

    n: int
    A: Callable
    S: Callable
    g: Callable
    G_pot: Callable
    dg: Callable | None = None
    symbolic: bool = True
    label: str = ""

    def __post_init__(self):
        self._validate()

    def jacobian_g(self, x: float, xi: np.ndarray) -> np.ndarray:
        if self.dg is not None:
            return _matrix_at(lambda y: self.dg(y, xi if self.n > 1 else float(xi[0])), x, self.n)
        eps = 1e-7
        cols = []
        for j in range(self.n):
            step = np.zeros(self.n)
            step[j] = eps * (1.0 + abs(float(xi[j])))
            gp = _vector_at(self.g, x, xi + step, self.n)
            gm = _vector_at(self.g, x, xi - step, self.n)
            cols.append((gp - gm) / (2.0 * step[j]))
        return np.column_stack(cols)

    def _validate(self):
        xs = np.linspace(0.0, 1.0, 9)
        for x in xs:
            a = _matrix_at(self.A, x, self.n)
            if np.linalg.norm(a - a.T) > 1e-10 * (1.0 + np.linalg.norm(a)):
                raise ValueError(f"A({x}) is not symmetric")
            if abs(np.linalg.det(a)) <= 1e-12 * max(1.0, np.linalg.norm(a) ** self.n):
                raise ValueError(f"A({x}) is numerically singular")
            s = _matrix_at(self.S, x, self.n)
            if np.linalg.norm(s - s.T) > 1e-10 * (1.0 + np.linalg.norm(s)):
                raise ValueError(f"S({x}) is not symmetric")
            zero = _vector_at(self.g, x, np.zeros(self.n), self.n)
            if np.linalg.norm(zero) > 1e-12:
                raise ValueError(f"g({x}, 0) must vanish")
        # g is the xi-gradient of G_pot, S is the xi-Jacobian of g at zero
        probes = [0.37 * np.ones(self.n), -0.61 * np.ones(self.n)]
        if self.n > 1:
            probes.append(np.linspace(-0.4, 0.5, self.n))
        for x in (0.21, 0.68):
            for xi in probes:
                g_val = _vector_at(self.g, x, xi, self.n)
                fd = np.zeros(self.n)
                for j in range(self.n):
                    step = np.zeros(self.n)
                    step[j] = 1e-6
                    up = float(self.G_pot(x, (xi + step) if self.n > 1 else float(xi[0] + 1e-6)))
                    dn = float(self.G_pot(x, (xi - step) if self.n > 1 else float(xi[0] - 1e-6)))
                    fd[j] = (up - dn) / 2e-6
                scale = max(1.0, np.linalg.norm(g_val))
                if np.linalg.norm(fd - g_val) > 1e-6 * scale * 10:
                    raise ValueError("G_pot gradient does not match g")
            s = _matrix_at(self.S, x, self.n)
            fd_s = np.zeros((self.n, self.n))
            for j in range(self.n):
                step = np.zeros(self.n)
                step[j] = 1e-6
                gp = _vector_at(self.g, x, step, self.n)
                gm = _vector_at(self.g, x, -step, self.n)
                fd_s[:, j] = (gp - gm) / 2e-6
            if np.linalg.norm(fd_s - s) > 1e-6 * max(1.0, np.linalg.norm(s)) * 10:
                raise ValueError("S does not match the linearization of g at zero")


def constant_problem(a0, s0, label: str = "constant") -> ProblemData:
    """Linear problem with constant coefficient matrices, g(x, xi) = S0 xi."""
    a0 = np.atleast_2d(np.asarray(a0, dtype=float))
    s0 = np.atleast_2d(np.asarray(s0, dtype=float))
    n = a0.shape[0]

    def g(x, xi):
        return s0 @ np.atleast_1d(xi) if n > 1 else s0[0, 0] * xi

    def g_pot(x, xi):
        v = np.atleast_1d(xi)
        return 0.5 * float(v @ s0 @ v)

    return ProblemData(
        n=n,
        A=lambda x: a0,
        S=lambda x: s0,
        g=g,
        G_pot=g_pot,
        dg=lambda x, xi: s0,
        symbolic=True,
        label=label,
    )


def cubic_problem(c: float, kappa: float = 1.0, label: str = "cubic") -> ProblemData:
    """Scalar problem with g(x, xi) = -c xi + kappa xi^3 and A = 1."""

    return ProblemData(
        n=1,
        A=lambda x: 1.0,
        S=lambda x: -c,
        g=lambda x, xi: -c * xi + kappa * xi**3,
        G_pot=lambda x, xi: -0.5 * c * xi**2 + 0.25 * kappa * xi**4,
        dg=lambda x, xi: -c + 3.0 * kappa * xi**2,
        symbolic=True,
        label=label,
    )


def polynomial_problem(a_coeffs: Sequence[float], s_coeffs: Sequence[float],
                       label: str = "polynomial") -> ProblemData:
    """Scalar problem with polynomial coefficients A(x), S(x) and linear g."""
    a_coeffs = np.asarray(a_coeffs, dtype=float)
    s_coeffs = np.asarray(s_coeffs, dtype=float)

    def a(x):
        return np.polynomial.polynomial.polyval(x, a_coeffs)

    def s(x):
        return np.polynomial.polynomial.polyval(x, s_coeffs)

    return ProblemData(
        n=1,
        A=a,
        S=s,
        g=lambda x, xi: s(x) * xi,
        G_pot=lambda x, xi: 0.5 * s(x) * xi**2,
        dg=lambda x, xi: s(x),
        symbolic=True,
        label=label,
    )


def tabulated_problem(xs: Sequence[float], a_vals: Sequence[float],
                      s_vals: Sequence[float], label: str = "tabulated") -> ProblemData:
    """Scalar problem with linearly interpolated samples of A and S."""
    xs = np.asarray(xs, dtype=float)
    a_vals = np.asarray(a_vals, dtype=float)
    s_vals = np.asarray(s_vals, dtype=float)

    def a(x):
        return np.interp(x, xs, a_vals)

    def s(x):
        return np.interp(x, xs, s_vals)

    return ProblemData(
        n=1,
        A=a,
        S=s,
        g=lambda x, xi: s(x) * xi,
        G_pot=lambda x, xi: 0.5 * s(x) * xi**2,
        dg=lambda x, xi: s(x),
        symbolic=False,
        label=label,
    )


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def assemble_form(space: DiscreteSpace, a_coeff: Callable | None,
                  s_coeff: Callable | None) -> np.ndarray:
    """Bilinear form integral(<A u', v'>) + integral(<S u, v>) by quadrature.

    Either coefficient may be None to drop its term.  Per-element
    3-point Gauss quadrature, symmetrized afterwards to remove
    quadrature round-off.
    """
    n = space.n
    n_el = space.mesh.n_elements
    dof = space.dof
    points, weights = space.quadrature()
    h = space.mesh.spacings
    phi = np.array([0.5 * (1.0 - _GAUSS_X), 0.5 * (1.0 + _GAUSS_X)])  # (2, 3)
    out = np.zeros((dof, dof))
    for k in range(n_el):
        block = np.zeros((2, 2, n, n))
        for q in range(3):
            w = weights[k, q]
            x = points[k, q]
            if a_coeff is not None:
                aq = _matrix_at(a_coeff, x, n)
                dphi = np.array([-1.0, 1.0]) / h[k]
                for ia in range(2):
                    for ib in range(2):
                        block[ia, ib] += w * dphi[ia] * dphi[ib] * aq
            if s_coeff is not None:
                sq = _matrix_at(s_coeff, x, n)
                for ia in range(2):
                    for ib in range(2):
                        block[ia, ib] += w * phi[ia, q] * phi[ib, q] * sq
        for ia, node_a in enumerate((k, k + 1)):
            if not 1 <= node_a <= n_el - 1:
                continue
            ra = space.block(node_a)
            for ib, node_b in enumerate((k, k + 1)):
                if not 1 <= node_b <= n_el - 1:
                    continue
                out[ra, space.block(node_b)] += block[ia, ib]
    if not np.all(np.isfinite(out)):
        raise GapFlowError("coefficient produced non-finite values during assembly")
    return 0.5 * (out + out.T)


def assemble_hessian(space: DiscreteSpace, problem: ProblemData) -> np.ndarray:
    """Form matrix of the second derivative of the functional at zero."""
    if problem.n != space.n:
        raise ValueError("problem and space have different system dimensions")
    return assemble_form(space, problem.A, problem.S)


def assemble_mass(space: DiscreteSpace) -> np.ndarray:
    """Mass matrix integral(<u, v>) with the same quadrature as the forms."""
    return assemble_form(space, None, lambda x: np.eye(space.n))


def riesz_operator(space: DiscreteSpace, form: np.ndarray) -> SymmetricOperator:
    """Operator T with <T u, v> equal to the given bilinear form."""
    return SymmetricOperator.from_form(space.ambient, form)


# ---------------------------------------------------------------------------
# the explicit integral representation of T
# ---------------------------------------------------------------------------

def explicit_T_apply(space: DiscreteSpace, problem: ProblemData,
                     u: DiscreteFunction) -> DiscreteFunction:
    """Apply the closed-form integral representation of T to u.

    T u(x) = int_0^x A u' - x int_0^1 A u'
             - int_0^x int_0^t S u + x int_0^1 int_0^t S u,

    evaluated with per-element Gauss quadrature and carried back to the
    discrete space by nodal interpolation.
    """
    n = space.n
    mesh = space.mesh
    nodes = mesh.nodes
    n_el = mesh.n_elements
    points, weights = space.quadrature()
    nodal = u.nodal_values()
    slopes = u.element_slopes()

    first = np.zeros((n_el, n))
    inner = np.zeros((n_el, n))
    for k in range(n_el):
        for q in range(3):
            x = points[k, q]
            w = weights[k, q]
            first[k] += w * (_matrix_at(problem.A, x, n) @ slopes[k])
            u_x = nodal[k] + slopes[k] * (x - nodes[k])
            inner[k] += w * (_matrix_at(problem.S, x, n) @ u_x)
    cum_first = np.vstack([np.zeros(n), np.cumsum(first, axis=0)])
    cum_inner = np.vstack([np.zeros(n), np.cumsum(inner, axis=0)])

    # outer integral of C(t) = int_0^t S u, with C evaluated at the Gauss
    # points through nested quadrature on the partial element
    outer = np.zeros((n_el, n))
    half_x = 0.5 * (_GAUSS_X + 1.0)
    for k in range(n_el):
        for q in range(3):
            t_q = points[k, q]
            w = weights[k, q]
            c_val = cum_inner[k].copy()
            span = t_q - nodes[k]
            if span > 0:
                sub = nodes[k] + span * half_x
                for j in range(3):
                    u_s = nodal[k] + slopes[k] * (sub[j] - nodes[k])
                    c_val += 0.5 * span * _GAUSS_W[j] * (_matrix_at(problem.S, sub[j], n) @ u_s)
            outer[k] += w * c_val
    cum_outer = np.vstack([np.zeros(n), np.cumsum(outer, axis=0)])

    total_first = cum_first[-1]
    total_outer = cum_outer[-1]
    result = (
        cum_first
        - nodes[:, None] * total_first
        - cum_outer
        + nodes[:, None] * total_outer
    )
    return DiscreteFunction(space, result[1:-1].reshape(-1))


# ---------------------------------------------------------------------------
# evaluation maps, constrained subspaces, projections
# ---------------------------------------------------------------------------

def _bracket(space: DiscreteSpace, t: float):
    """Element index and interpolation weights of an interior point."""
    if not 0.0 < t < 1.0:
        raise OutOfInterval(f"evaluation point t={t} must lie in (0, 1)")
    nodes = space.mesh.nodes
    k = space.mesh.locate(t)
    h = nodes[k + 1] - nodes[k]
    w_right = (t - nodes[k]) / h
    return k, 1.0 - w_right, w_right


def evaluation_map(space: DiscreteSpace, t: float) -> np.ndarray:
    """Row block of the point evaluation u -> u(t), exact for the space."""
    k, w_left, w_right = _bracket(space, t)
    n = space.n
    n_el = space.mesh.n_elements
    rows = np.zeros((n, space.dof))
    if 1 <= k <= n_el - 1 and w_left > _NODE_SNAP:
        rows[:, space.block(k)] = w_left * np.eye(n)
    if 1 <= k + 1 <= n_el - 1 and w_right > _NODE_SNAP:
        rows[:, space.block(k + 1)] = w_right * np.eye(n)
    if not np.any(rows):
        raise OutOfInterval(f"evaluation at t={t} does not touch an interior node")
    return rows


def node_at(space: DiscreteSpace, t: float) -> int | None:
    """Interior node index equal to t, or None."""
    nodes = space.mesh.nodes
    k = int(np.argmin(np.abs(nodes - t)))
    if abs(nodes[k] - t) <= _NODE_SNAP and 1 <= k <= space.mesh.n_elements - 1:
        return k
    return None


def constrained_subspace(space: DiscreteSpace, t: float) -> Subspace:
    """Exact kernel of the evaluation map at t, codimension n.

    At a node the basis simply omits that node's block.  Between nodes
    the two bracketing blocks are replaced by n combined columns that
    vanish at t.
    """
    if not 0.0 < t < 1.0:
        raise OutOfInterval(f"constraint point t={t} must lie in (0, 1)")
    n = space.n
    dof = space.dof
    node = node_at(space, t)
    eye = np.eye(dof)
    if node is not None:
        keep = np.ones(dof, dtype=bool)
        keep[space.block(node)] = False
        return Subspace(space.ambient, eye[:, keep])
    k, w_left, w_right = _bracket(space, t)
    n_el = space.mesh.n_elements
    left_interior = 1 <= k <= n_el - 1
    right_interior = 1 <= k + 1 <= n_el - 1
    if left_interior and right_interior:
        keep = np.ones(dof, dtype=bool)
        keep[space.block(k)] = False
        keep[space.block(k + 1)] = False
        combined = np.zeros((dof, n))
        scale = 1.0 / np.hypot(w_left, w_right)
        combined[space.block(k)] = w_right * scale * np.eye(n)
        combined[space.block(k + 1)] = -w_left * scale * np.eye(n)
        return Subspace(space.ambient, np.hstack([eye[:, keep], combined]))
    # boundary element: only one interior node carries the constraint
    node = k if left_interior else k + 1
    keep = np.ones(dof, dtype=bool)
    keep[space.block(node)] = False
    return Subspace(space.ambient, eye[:, keep])


def default_cutoff(a: float, b: float) -> Callable[[float], float]:
    """Cubic smoothstep cutoff: 0 at the boundary, 1 on the plateau [a, b]."""
    if not 0.0 < a < b < 1.0:
        raise BadCutoff("plateau must satisfy 0 < a < b < 1")

    def chi(x: float) -> float:
        if x <= 0.0 or x >= 1.0:
            return 0.0
        if x < a:
            s = x / a
        elif x > b:
            s = (1.0 - x) / (1.0 - b)
        else:
            return 1.0
        return s * s * (3.0 - 2.0 * s)

    return chi


def chi_projection(space: DiscreteSpace, t: float, chi: Callable[[float], float],
                   tol: ToleranceProfile = DEFAULT_TOL) -> Projection:
    """Orthogonal projection onto the constrained subspace via the cutoff.

    Builds the bounded projection Q u = u - chi * u(t) with chi sampled
    at the nodes, then orthogonalizes it.  The cutoff must vanish at the
    boundary and the nodal interpolant must equal 1 at t, otherwise Q is
    not a projection.
    """
    if abs(chi(0.0)) > _NODE_SNAP or abs(chi(1.0)) > _NODE_SNAP:
        raise BadCutoff("cutoff must vanish at x=0 and x=1")
    nodes = space.mesh.nodes
    chi_nodes = np.array([chi(float(x)) for x in nodes])
    chi_nodes[0] = chi_nodes[-1] = 0.0
    k, w_left, w_right = _bracket(space, t)
    chi_t = w_left * chi_nodes[k] + w_right * chi_nodes[k + 1]
    if abs(chi_t - 1.0) > 1e-12:
        raise BadCutoff(f"cutoff plateau does not cover t={t} (chi(t)={chi_t})")
    n = space.n
    columns = np.zeros((space.dof, n))
    for node in range(1, space.mesh.n_elements):
        columns[space.block(node)] = chi_nodes[node] * np.eye(n)
    q = np.eye(space.dof) - columns @ evaluation_map(space, t)
    return orthogonalize_projection(q, space.ambient, tol)


def build_L_path(space: DiscreteSpace, T: SymmetricOperator,
                 projector: Callable[[float], Projection],
                 interval: tuple[float, float], label: str = "") -> OperatorPath:
    """Path L_t = P_t T P_t + (I - P_t) in ambient coordinates."""
    eye = np.eye(space.dof)
    cache: dict[float, SymmetricOperator] = {}

    def evaluate(t: float) -> SymmetricOperator:
        t = float(t)
        if t not in cache:
            p = projector(t).matrix
            cache[t] = SymmetricOperator(space.ambient, p @ T.matrix @ p + (eye - p))
        return cache[t]

    return OperatorPath(tuple(interval), evaluate, label)


def direct_projector(space: DiscreteSpace) -> Callable[[float], Projection]:
    """Projector t -> orthogonal projection onto the constrained subspace."""
    from .grassmann import orthogonal_projection

    def project(t: float) -> Projection:
        return orthogonal_projection(constrained_subspace(space, t))

    return project
