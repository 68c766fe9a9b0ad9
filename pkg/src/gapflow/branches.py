"""Constrained critical points near detected degeneracies.

Given a localized degenerate parameter, the branch finder walks a
geometric ladder of offsets toward it, solving the constrained critical
point equations by Newton in eliminated coordinates of the constraint
subspace (the constraint is removed by choosing a basis, never
penalized).  Offsets are snapped to mesh nodes: at a node the
constrained problem decouples exactly into the two sides of the
constraint, so a solution supported on one side stays identically zero
on the other to machine precision.

Seeds come from a scalar normal-form estimate along the kernel
direction, with continuation warm starts from the previous offset and
amplitude halving as fallbacks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import AllTrivial, GapFlowError, NewtonDivergence
from .fem import (
    DiscreteFunction,
    DiscreteSpace,
    Mesh,
    ProblemData,
    assemble_gram,
    assemble_hessian,
    constrained_subspace,
    direct_projector,
    node_at,
)
from .tolerances import DEFAULT_TOL, ToleranceProfile

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(3)


@dataclass(eq=False)
class BranchPoint:
    """A nontrivial constrained critical point near a degeneracy.

    The constraint u(t) = 0 holds exactly because the coordinate of the
    constrained node is eliminated, and the residual is the gram-dual
    norm of the constrained gradient.
    """

    t: float
    u: DiscreteFunction
    amplitude: float
    residual: float

    def __post_init__(self):
        if self.residual > 1e-10 * (1.0 + self.amplitude):
            raise GapFlowError(
                f"branch point at t={self.t} has residual {self.residual:.3e}, "
                "beyond the admissible bound"
            )
        if np.linalg.norm(self.u.value_at(self.t)) > 1e-12:
            raise GapFlowError(f"branch point at t={self.t} violates its constraint")


@dataclass(eq=False)
class BranchResult:
    points: list[BranchPoint]
    t_star: float
    side: int
    trivial_offsets: list[float]
    failures: list[tuple[float, str]]


@dataclass(frozen=True)
class GlobalSolutionCheck:
    jump: np.ndarray
    magnitude: float
    is_global: bool


# ---------------------------------------------------------------------------
# functional, gradients
# ---------------------------------------------------------------------------

def _values_on_quadrature(space: DiscreteSpace, coords: np.ndarray):
    """Function values at all quadrature points, shape (n_el, 3, n)."""
    n = space.n
    nodal = np.zeros((space.mesh.n_elements + 1, n))
    nodal[1:-1] = coords.reshape(-1, n)
    phi_l = 0.5 * (1.0 - _GAUSS_X)
    phi_r = 0.5 * (1.0 + _GAUSS_X)
    return (
        nodal[:-1, None, :] * phi_l[None, :, None]
        + nodal[1:, None, :] * phi_r[None, :, None]
    )


def _pointwise(func: Callable, xs: np.ndarray, us: np.ndarray, n: int) -> np.ndarray:
    """Evaluate a (x, xi) map on flattened quadrature data, shape (Q, n)."""
    if n == 1:
        u_flat = us[..., 0].ravel()
        try:
            out = np.asarray(func(xs.ravel(), u_flat), dtype=float)
            if out.shape == u_flat.shape:
                return out.reshape(-1, 1)
        except (TypeError, ValueError):
            pass
    rows = [
        np.ravel(np.asarray(func(float(x), u if n > 1 else float(u[0])), dtype=float))
        for x, u in zip(xs.ravel(), us.reshape(-1, n))
    ]
    return np.asarray(rows)


def _scalar_pointwise(func: Callable, xs: np.ndarray, us: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        u_flat = us[..., 0].ravel()
        try:
            out = np.asarray(func(xs.ravel(), u_flat), dtype=float)
            if out.shape == u_flat.shape:
                return out
        except (TypeError, ValueError):
            pass
    return np.asarray(
        [float(func(float(x), u if n > 1 else float(u[0])))
         for x, u in zip(xs.ravel(), us.reshape(-1, n))]
    )


def functional_value(space: DiscreteSpace, problem: ProblemData, u: DiscreteFunction) -> float:
    """J(u) = 1/2 integral(<A u', u'>) + integral(G(x, u)) by quadrature."""
    points, weights = space.quadrature()
    slopes = u.element_slopes()
    n = space.n
    quad = 0.0
    for k in range(space.mesh.n_elements):
        for q in range(3):
            a = np.atleast_2d(np.asarray(problem.A(float(points[k, q])), dtype=float))
            quad += 0.5 * weights[k, q] * float(slopes[k] @ a @ slopes[k])
    us = _values_on_quadrature(space, u.coords)
    pot = _scalar_pointwise(problem.G_pot, points, us, n)
    value = quad + float((pot.reshape(points.shape) * weights).sum())
    if not np.isfinite(value):
        raise GapFlowError("functional value is not finite")
    return value


def _nonlinear_load(space: DiscreteSpace, problem: ProblemData, coords: np.ndarray) -> np.ndarray:
    """Dual vector of integral(<g(x, u), phi_i>)."""
    points, weights = space.quadrature()
    n = space.n
    us = _values_on_quadrature(space, coords)
    g_vals = _pointwise(problem.g, points, us, n).reshape(points.shape + (n,))
    if not np.all(np.isfinite(g_vals)):
        raise GapFlowError("nonlinearity produced non-finite values")
    phi_l = 0.5 * (1.0 - _GAUSS_X)
    phi_r = 0.5 * (1.0 + _GAUSS_X)
    left = np.einsum("kq,q,kqn->kn", weights, phi_l, g_vals)
    right = np.einsum("kq,q,kqn->kn", weights, phi_r, g_vals)
    nodal = np.zeros((space.mesh.n_elements + 1, n))
    nodal[:-1] += left
    nodal[1:] += right
    return nodal[1:-1].reshape(-1)


def full_gradient(space: DiscreteSpace, problem: ProblemData, u: DiscreteFunction) -> np.ndarray:
    """Dual coordinates of the derivative of J at u.

    The quadratic part uses the assembled leading form so that the
    gradient is the exact derivative of the quadrature functional.
    """
    ws = _workspace(space, problem)
    return ws.gradient(u.coords)


def constrained_gradient(space: DiscreteSpace, problem: ProblemData, t: float,
                         u: DiscreteFunction) -> np.ndarray:
    """Gradient of J restricted to the constraint subspace at t.

    Returned in the coordinates of the constrained_subspace basis; its
    zeros are exactly the constrained critical points.
    """
    basis = constrained_subspace(space, t).basis
    return basis.T @ full_gradient(space, problem, u)


def relaxed_value(space: DiscreteSpace, problem: ProblemData, t: float,
                  u: DiscreteFunction) -> float:
    """J(P_t u) + 1/2 ||(I - P_t) u||^2, the unconstrained relaxation."""
    p = direct_projector(space)(t).matrix
    pu = DiscreteFunction(space, p @ u.coords)
    w = u.coords - pu.coords
    return functional_value(space, problem, pu) + 0.5 * float(w @ space.gram @ w)


def relaxed_gradient(space: DiscreteSpace, problem: ProblemData, t: float,
                     u: DiscreteFunction) -> np.ndarray:
    """Dual coordinates of the derivative of the relaxed functional."""
    p = direct_projector(space)(t).matrix
    pu = DiscreteFunction(space, p @ u.coords)
    w = u.coords - pu.coords
    grad_j = full_gradient(space, problem, pu)
    comp = np.eye(space.dof) - p
    return p.T @ grad_j + comp.T @ (space.gram @ w)


# ---------------------------------------------------------------------------
# Newton workspace
# ---------------------------------------------------------------------------

class _Workspace:
    """Sparse matrices and quadrature data reused across Newton solves."""

    def __init__(self, space: DiscreteSpace, problem: ProblemData):
        self.space = space
        self.problem = problem
        self.gram = sp.csr_matrix(space.gram)
        self.stiffness = sp.csr_matrix(
            _assemble_leading_form(space, problem)
        )
        self.hessian_zero = sp.csr_matrix(assemble_hessian(space, problem))

    def gradient(self, coords: np.ndarray) -> np.ndarray:
        return self.stiffness @ coords + _nonlinear_load(self.space, self.problem, coords)

    def jacobian(self, coords: np.ndarray) -> sp.csr_matrix:
        return self.stiffness + _mass_with_jacobian(self.space, self.problem, coords)


_WORKSPACES: dict[int, _Workspace] = {}


def _workspace(space: DiscreteSpace, problem: ProblemData) -> _Workspace:
    key = (id(space), id(problem))
    ws = _WORKSPACES.get(key)
    if ws is None or ws.space is not space or ws.problem is not problem:
        ws = _Workspace(space, problem)
        _WORKSPACES[key] = ws
    return ws


def _assemble_leading_form(space: DiscreteSpace, problem: ProblemData) -> np.ndarray:
    from .fem import assemble_form

    return assemble_form(space, problem.A, None)


def _mass_with_jacobian(space: DiscreteSpace, problem: ProblemData,
                        coords: np.ndarray) -> sp.csr_matrix:
    """Matrix of integral(<dg(x, u) phi_j, phi_i>) at the current iterate."""
    points, weights = space.quadrature()
    n = space.n
    n_el = space.mesh.n_elements
    us = _values_on_quadrature(space, coords)
    phi = np.array([0.5 * (1.0 - _GAUSS_X), 0.5 * (1.0 + _GAUSS_X)])
    if n == 1 and problem.dg is not None:
        dg = _scalar_pointwise(problem.dg, points, us, 1).reshape(points.shape)
        w = weights * dg
        dl = np.einsum("kq,q->k", w, phi[0] * phi[0])
        dr = np.einsum("kq,q->k", w, phi[1] * phi[1])
        cross = np.einsum("kq,q->k", w, phi[0] * phi[1])
        main = dr[:-1] + dl[1:]
        off = cross[1:-1]
        return sp.diags([off, main, off], [-1, 0, 1], format="csr")
    rows, cols, vals = [], [], []
    for k in range(n_el):
        block = np.zeros((2, 2, n, n))
        for q in range(3):
            dg = problem.jacobian_g(float(points[k, q]), us[k, q])
            for ia in range(2):
                for ib in range(2):
                    block[ia, ib] += weights[k, q] * phi[ia, q] * phi[ib, q] * dg
        for ia, node_a in enumerate((k, k + 1)):
            if not 1 <= node_a <= n_el - 1:
                continue
            for ib, node_b in enumerate((k, k + 1)):
                if not 1 <= node_b <= n_el - 1:
                    continue
                for ca in range(n):
                    for cb in range(n):
                        rows.append((node_a - 1) * n + ca)
                        cols.append((node_b - 1) * n + cb)
                        vals.append(block[ia, ib, ca, cb])
    return sp.csr_matrix((vals, (rows, cols)), shape=(space.dof, space.dof))


def _constraint_basis_sparse(space: DiscreteSpace, t: float) -> sp.csc_matrix:
    """Sparse basis of the constrained subspace (same columns as the dense one)."""
    from .fem import _bracket

    n = space.n
    dof = space.dof
    n_el = space.mesh.n_elements
    node = node_at(space, t)
    if node is None:
        k, w_left, w_right = _bracket(space, t)
        left_ok = 1 <= k <= n_el - 1
        right_ok = 1 <= k + 1 <= n_el - 1
        if left_ok and right_ok:
            keep = np.ones(dof, dtype=bool)
            keep[space.block(k)] = False
            keep[space.block(k + 1)] = False
            idx = np.where(keep)[0]
            rows = list(idx)
            cols = list(range(idx.size))
            vals = [1.0] * idx.size
            scale = 1.0 / np.hypot(w_left, w_right)
            for c in range(n):
                col = idx.size + c
                rows.extend([(k - 1) * n + c, k * n + c])
                cols.extend([col, col])
                vals.extend([w_right * scale, -w_left * scale])
            return sp.csc_matrix((vals, (rows, cols)), shape=(dof, idx.size + n))
        node = k if left_ok else k + 1
    keep = np.ones(dof, dtype=bool)
    keep[space.block(node)] = False
    idx = np.where(keep)[0]
    return sp.csc_matrix(
        (np.ones(idx.size), (idx, np.arange(idx.size))), shape=(dof, idx.size)
    )


def _restricted_pencil(space: DiscreteSpace, form: sp.spmatrix, t: float):
    basis = _constraint_basis_sparse(space, t)
    gram = sp.csc_matrix(space.gram)
    b_res = (basis.T @ form @ basis).tocsc()
    k_res = (basis.T @ gram @ basis).tocsc()
    return b_res, k_res, basis


def _crossing_eigenpair(space: DiscreteSpace, form: sp.spmatrix, t: float):
    """Eigenvalue of the restricted pencil closest to zero, with vector."""
    b_res, k_res, basis = _restricted_pencil(space, form, t)
    m = b_res.shape[0]
    if m <= 4:
        w, v = np.linalg.eigh(b_res.toarray() @ np.linalg.inv(k_res.toarray()))
        idx = int(np.argmin(np.abs(w)))
        return float(w[idx]), basis @ v[:, idx]
    try:
        w, v = spla.eigsh(b_res, k=1, M=k_res, sigma=0.0, which="LM")
        return float(w[0]), np.asarray(basis @ v[:, 0]).ravel()
    except (spla.ArpackError, RuntimeError):
        import scipy.linalg as sla

        w, v = sla.eigh(b_res.toarray(), k_res.toarray())
        idx = int(np.argmin(np.abs(w)))
        return float(w[idx]), np.asarray(basis @ v[:, idx]).ravel()


def refine_degeneracy(space: DiscreteSpace, problem: ProblemData, lo: float, hi: float) -> float:
    """Degenerate parameter from the node-sampled restricted eigenvalue curve.

    The crossing eigenvalue of the restricted Hessian is second-order
    accurate when the constraint sits on a mesh node, but carries a
    first-order bias between nodes (the constrained element is forced
    through a single slope).  Sampling at nodes only and taking the root
    of a local polynomial fit therefore localizes the underlying
    degeneracy far more accurately than bisection of the continuous
    curve.
    """
    ws = _workspace(space, problem)
    form = ws.hessian_zero
    nodes = space.mesh.nodes
    interior = nodes[1:-1]
    inside = np.where((interior >= lo) & (interior <= hi))[0]
    if inside.size < 2:
        center = int(np.argmin(np.abs(interior - 0.5 * (lo + hi))))
        inside = np.arange(max(0, center - 2), min(interior.size, center + 3))
    first, last = int(inside[0]), int(inside[-1])

    values: dict[int, float] = {}

    def lam(i: int) -> float:
        if i not in values:
            values[i] = _crossing_eigenpair(space, form, float(interior[i]))[0]
        return values[i]

    # locate a sign change between consecutive interior nodes
    change = None
    for i in range(first, last):
        if np.sign(lam(i)) != np.sign(lam(i + 1)):
            change = i
            break
    grow = 0
    while change is None and grow < 6:
        grow += 1
        if first > 0:
            first -= 1
            if np.sign(lam(first)) != np.sign(lam(first + 1)):
                change = first
        if change is None and last < interior.size - 1:
            last += 1
            if np.sign(lam(last - 1)) != np.sign(lam(last)):
                change = last - 1
    if change is None:
        raise GapFlowError(
            f"no sign change of the restricted eigenvalue near [{lo}, {hi}]"
        )
    window = [j for j in (change - 1, change, change + 1, change + 2)
              if 0 <= j < interior.size]
    xs = np.array([interior[j] for j in window])
    ys = np.array([lam(j) for j in window])
    poly = np.polynomial.Polynomial.fit(xs, ys, deg=len(window) - 1)
    bracket_lo, bracket_hi = interior[change], interior[change + 1]
    roots = [r.real for r in poly.roots()
             if abs(r.imag) < 1e-12 and bracket_lo - 1e-15 <= r.real <= bracket_hi + 1e-15]
    if not roots:
        # fall back to the secant root of the bracketing pair
        y0, y1 = lam(change), lam(change + 1)
        return float(bracket_lo + (bracket_hi - bracket_lo) * y0 / (y0 - y1))
    secant = bracket_lo + (bracket_hi - bracket_lo) * lam(change) / (lam(change) - lam(change + 1))
    return float(min(roots, key=lambda r: abs(r - secant)))


def family_degeneracy(space: DiscreteSpace, problem: ProblemData, lo: float, hi: float,
                      bracket: float = 1e-12) -> float:
    """Bisect the sign change of the restricted eigenvalue over all t.

    Unlike refine_degeneracy this follows the constrained family itself
    (including between-node parameters), so the returned parameter is a
    genuine numerical degeneracy of the family on this mesh.
    """
    ws = _workspace(space, problem)
    form = ws.hessian_zero

    def lam(t: float) -> float:
        return _crossing_eigenpair(space, form, t)[0]

    f_lo, f_hi = lam(lo), lam(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise GapFlowError(
            f"no eigenvalue sign change in [{lo}, {hi}] "
            f"(values {f_lo:.3e}, {f_hi:.3e})"
        )
    while hi - lo > bracket:
        mid = 0.5 * (lo + hi)
        f_mid = lam(mid)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Newton solve in eliminated coordinates
# ---------------------------------------------------------------------------

def _newton_at_node(ws: _Workspace, node: int, u0: np.ndarray,
                    max_iter: int = 40, target: float = 1e-12):
    """Newton for the constrained critical point equations at a mesh node.

    Works on the full coordinate vector with the node block frozen at
    zero; the active system stays sparse.  Returns (coords, residual).
    """
    space = ws.space
    active = np.ones(space.dof, dtype=bool)
    active[space.block(node)] = False
    idx = np.where(active)[0]
    gram_act = ws.gram[idx][:, idx].tocsc()
    gram_solve = spla.factorized(gram_act)
    u = u0.copy()
    u[~active] = 0.0
    scale_guard = 1e6 * (1.0 + np.abs(u0).max())
    for iteration in range(max_iter):
        grad = ws.gradient(u)[idx]
        residual = float(np.sqrt(max(grad @ gram_solve(grad), 0.0)))
        amp = float(np.abs(u).max())
        if residual <= target * (1.0 + amp):
            return u, residual
        jac = ws.jacobian(u)[idx][:, idx].tocsc()
        try:
            step = spla.spsolve(jac, -grad)
        except RuntimeError as exc:
            raise NewtonDivergence(space.mesh.nodes[node], iteration, residual) from exc
        if not np.all(np.isfinite(step)) or np.abs(step).max() > scale_guard:
            raise NewtonDivergence(space.mesh.nodes[node], iteration, residual)
        u[idx] += step
    raise NewtonDivergence(space.mesh.nodes[node], max_iter, residual)


def _normal_form_amplitude(ws: _Workspace, mode: np.ndarray, probe: float = 0.1):
    """Seed amplitude from a cubic normal-form estimate along the mode."""
    c1 = float(mode @ (ws.hessian_zero @ mode))
    grad = ws.gradient(probe * mode)
    r = float(grad @ mode)
    c3 = (r - c1 * probe) / probe**3
    if c1 * c3 < 0 and abs(c3) > 1e-14:
        return math.sqrt(-c1 / c3)
    return None


def branch_space(problem: ProblemData, t_star_estimate: float, side: int = 1,
                 steps: int = 6, delta0: float = 1e-5, n_elements: int = 1600,
                 refine_width: float = 2e-3) -> tuple[DiscreteSpace, float]:
    """Mesh tailored for branch continuation toward a degeneracy.

    Two-stage construction: the degeneracy is first localized on a
    uniform mesh, then nodes are inserted exactly at the ladder offsets
    so that every continuation parameter is a mesh node and the
    constrained problem decouples across it.
    """
    base = assemble_gram(Mesh.uniform(n_elements), problem.n)
    t0 = refine_degeneracy(base, problem, t_star_estimate - refine_width,
                           t_star_estimate + refine_width)
    deltas = delta0 * 0.5 ** np.arange(steps)
    inserts = t0 + side * deltas
    nodes = np.unique(np.concatenate([base.mesh.nodes, inserts]))
    spacing = np.diff(nodes)
    min_gap = 0.05 * deltas[-1]
    keep = np.concatenate([[True], spacing > min_gap])
    # prefer inserted ladder nodes over colliding uniform neighbours
    for t in inserts:
        j = int(np.argmin(np.abs(nodes - t)))
        keep[j] = True
        if j > 0 and nodes[j] - nodes[j - 1] <= min_gap:
            keep[j - 1] = nodes[j - 1] in (0.0,)
        if j + 1 < nodes.size and nodes[j + 1] - nodes[j] <= min_gap:
            keep[j + 1] = nodes[j + 1] in (1.0,)
    keep[0] = keep[-1] = True
    space = assemble_gram(Mesh(nodes[keep]), problem.n)
    t_ref = refine_degeneracy(space, problem, t_star_estimate - refine_width,
                              t_star_estimate + refine_width)
    return space, t_ref


def find_branch(space: DiscreteSpace, problem: ProblemData, t_star: float,
                side: int = 1, steps: int = 6, delta0: float = 1e-5,
                refine_width: float = 2e-3, newton_target: float = 1e-12,
                tol: ToleranceProfile = DEFAULT_TOL) -> BranchResult:
    """Nontrivial constrained critical points on one side of a degeneracy.

    Offsets delta0 * 2^{-j} from the refined degenerate parameter are
    snapped to mesh nodes and solved from large to small offset, warm
    starting each solve from the previous solution.  Raises AllTrivial
    when every solve collapses to zero (the candidate does not carry a
    branch on this side at these offsets).
    """
    if side not in (-1, 1):
        raise ValueError("side must be +1 or -1")
    ws = _workspace(space, problem)
    try:
        t_ref = refine_degeneracy(space, problem, t_star - refine_width,
                                  t_star + refine_width)
    except GapFlowError:
        # no degeneracy nearby: keep the requested parameter, the solves
        # will expose a spurious candidate through AllTrivial
        t_ref = t_star
    deltas = delta0 * 0.5 ** np.arange(steps)
    nodes = space.mesh.nodes
    chosen: list[int] = []
    for d in deltas:
        target = t_ref + side * d
        j = int(np.argmin(np.abs(nodes - target)))
        if j in chosen or not 1 <= j <= space.mesh.n_elements - 1:
            continue
        if side * (nodes[j] - t_ref) <= 0:
            continue
        chosen.append(j)
    if not chosen:
        raise GapFlowError(
            f"mesh has no interior nodes on side {side:+d} of t={t_ref}; "
            "build the space with branch_space"
        )
    chosen.sort(key=lambda j: -abs(nodes[j] - t_ref))

    points: list[BranchPoint] = []
    trivial: list[float] = []
    failures: list[tuple[float, str]] = []
    previous: np.ndarray | None = None
    previous_delta = None
    for j in chosen:
        t_j = float(nodes[j])
        delta = abs(t_j - t_ref)
        _, mode = _crossing_eigenpair(space, ws.hessian_zero, t_j)
        mode = mode / max(np.abs(mode).max(), 1e-300)
        alpha = _normal_form_amplitude(ws, mode) or 1e-2
        seeds: list[np.ndarray] = []
        if previous is not None:
            scaled = previous * math.sqrt(delta / previous_delta)
            scaled = scaled.copy()
            # zero everything at and beyond the new constraint on this side
            nodal = np.zeros(space.mesh.n_elements + 1)
            off_side = np.where(side * (nodes - t_j) >= 0)[0]
            for node_idx in off_side:
                if 1 <= node_idx <= space.mesh.n_elements - 1:
                    scaled[space.block(node_idx)] = 0.0
            seeds.append(scaled)
        seeds.extend(a * mode for a in (alpha, 0.5 * alpha, 0.25 * alpha, -alpha))
        solved = None
        message = ""
        for seed in seeds:
            try:
                u_coords, residual = _newton_at_node(ws, j, seed, target=newton_target)
            except NewtonDivergence as exc:
                message = str(exc)
                continue
            if np.abs(u_coords).max() > 1e-6:
                solved = (u_coords, residual)
                break
            message = "collapsed to the trivial solution"
        if solved is None:
            if message == "collapsed to the trivial solution":
                trivial.append(t_j)
            else:
                failures.append((t_j, message))
            previous, previous_delta = None, None
            continue
        u_coords, residual = solved
        func = DiscreteFunction(space, u_coords)
        points.append(BranchPoint(t_j, func, func.sup_norm, residual))
        previous, previous_delta = u_coords, delta
    if not points:
        raise AllTrivial(
            f"all {len(chosen)} constrained solves near t={t_ref} on side "
            f"{side:+d} returned the zero solution"
        )
    amplitudes = [p.amplitude for p in points]
    if any(b >= a for a, b in zip(amplitudes, amplitudes[1:])):
        raise GapFlowError("branch amplitudes are not strictly decreasing")
    return BranchResult(points, t_ref, side, trivial, failures)


def global_solution_check(point: BranchPoint, problem: ProblemData,
                          jump_tol: float = 1e-4) -> GlobalSolutionCheck:
    """Derivative jump A(t) (u'(t+) - u'(t-)) across the constraint point.

    One-sided derivatives come from the adjacent element slopes; since
    u(t) = 0 the second-order bias of those local differences vanishes.
    A jump below tolerance means the two pieces assemble into a solution
    of the unconstrained problem.
    """
    space = point.u.space
    node = node_at(space, point.t)
    slopes = point.u.element_slopes()
    if node is not None:
        left, right = slopes[node - 1], slopes[node]
    else:
        k = space.mesh.locate(point.t)
        left = slopes[k - 1] if k > 0 else slopes[k]
        right = slopes[k + 1] if k + 1 < slopes.shape[0] else slopes[k]
    a_mat = np.atleast_2d(np.asarray(problem.A(point.t), dtype=float))
    jump = a_mat @ (right - left)
    magnitude = float(np.linalg.norm(jump))
    return GlobalSolutionCheck(jump, magnitude, magnitude <= jump_tol)
