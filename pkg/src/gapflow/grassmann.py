"""Subspaces of a finite-dimensional inner-product space.

All geometry is taken with respect to an explicit Gram matrix G: the
inner product is <u, v> = u^T G v, the adjoint of a matrix M is
G^{-1} M^T G, and operator norms are the largest singular value of the
symmetrized representative G^{1/2} M G^{-1/2}.  Subspaces are basis
matrices in ambient coordinates; orthogonal projections, the gap
distance between subspaces, and projections onto kernels of surjective
operator families are built from that data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import (
    AmbientMismatch,
    DegenerateInput,
    GapFlowError,
    NotAProjection,
    RankDeficiency,
    SurjectivityFailure,
)
from .tolerances import DEFAULT_TOL, ToleranceProfile


@dataclass(eq=False)
class InnerProductSpace:
    """A finite-dimensional real space with a positive-definite Gram matrix.

    Values are immutable after construction; derived factorizations are
    cached on first use.
    """

    dim: int
    gram: np.ndarray

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be a positive integer")
        self.gram = np.asarray(self.gram, dtype=float)
        if self.gram.shape != (self.dim, self.dim):
            raise ValueError(f"gram must be {self.dim}x{self.dim}")
        scale = np.linalg.norm(self.gram)
        if np.linalg.norm(self.gram - self.gram.T) > 1e-12 * (1.0 + scale):
            raise ValueError("gram matrix is not symmetric")
        self.gram = 0.5 * (self.gram + self.gram.T)
        try:
            self._chol = sla.cholesky(self.gram, lower=True)
        except sla.LinAlgError as exc:
            raise ValueError("gram matrix is not positive definite") from exc
        self._half = None
        self._inv_half = None

    @classmethod
    def euclidean(cls, dim: int) -> "InnerProductSpace":
        return cls(dim, np.eye(dim))

    def _sqrt_factors(self):
        # G^{1/2} and G^{-1/2} from the symmetric eigendecomposition of G.
        if self._half is None:
            w, v = np.linalg.eigh(self.gram)
            if w.min() <= 0:
                raise ValueError("gram matrix is not positive definite")
            root = np.sqrt(w)
            self._half = (v * root) @ v.T
            self._inv_half = (v / root) @ v.T
        return self._half, self._inv_half

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ self.gram @ v)

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def adjoint(self, m: np.ndarray) -> np.ndarray:
        """Gram adjoint G^{-1} M^T G."""
        return sla.cho_solve((self._chol, True), m.T @ self.gram)

    def operator_norm(self, m: np.ndarray) -> float:
        half, inv_half = self._sqrt_factors()
        return float(np.linalg.norm(half @ m @ inv_half, 2))

    def dual_norm(self, rows: np.ndarray) -> float:
        """Operator norm of a functional block (rows acting on vectors)."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        x = sla.cho_solve((self._chol, True), rows.T)
        return float(np.sqrt(max(np.linalg.eigvalsh(rows @ x).max(), 0.0)))

    def orthonormalize(self, columns: np.ndarray, rank_rtol: float = 1e-10):
        """Gram-orthonormal basis of the column span, with numerical rank.

        Returns (q, r): q has r gram-orthonormal columns spanning the
        same space as the input columns.
        """
        columns = np.asarray(columns, dtype=float)
        if columns.ndim != 2 or columns.shape[1] == 0:
            return np.zeros((self.dim, 0)), 0
        y = self._chol.T @ columns
        u, s, _ = np.linalg.svd(y, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            return np.zeros((self.dim, 0)), 0
        r = int(np.sum(s > rank_rtol * s[0]))
        q = sla.solve_triangular(self._chol.T, u[:, :r], lower=False)
        return q, r

    def same_as(self, other: "InnerProductSpace") -> bool:
        if self is other:
            return True
        return self.dim == other.dim and np.array_equal(self.gram, other.gram)


@dataclass(eq=False)
class Subspace:
    """A subspace given by a full-column-rank basis in ambient coordinates."""

    ambient: InnerProductSpace
    basis: np.ndarray

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=float)
        if self.basis.ndim != 2 or self.basis.shape[0] != self.ambient.dim:
            raise ValueError("basis must be dim x k")
        k = self.basis.shape[1]
        if k > self.ambient.dim:
            raise RankDeficiency("more basis columns than ambient dimensions")
        if k > 0:
            s = np.linalg.svd(self.ambient._chol.T @ self.basis, compute_uv=False)
            if s[0] == 0.0 or s[-1] <= DEFAULT_TOL.rank_rtol * s[0]:
                raise RankDeficiency("basis is rank deficient in the gram metric")
        self._onb = None

    @classmethod
    def full(cls, ambient: InnerProductSpace) -> "Subspace":
        return cls(ambient, np.eye(ambient.dim))

    @classmethod
    def zero(cls, ambient: InnerProductSpace) -> "Subspace":
        return cls(ambient, np.zeros((ambient.dim, 0)))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def orthonormal_basis(self) -> np.ndarray:
        if self._onb is None:
            q, r = self.ambient.orthonormalize(self.basis)
            if r != self.dim:
                raise RankDeficiency("basis lost rank during orthonormalization")
            self._onb = q
        return self._onb

    def complement(self) -> "Subspace":
        p = orthogonal_projection(self)
        q, r = self.ambient.orthonormalize(np.eye(self.ambient.dim) - p.matrix)
        if r != self.ambient.dim - self.dim:
            raise RankDeficiency("complement has unexpected dimension")
        return Subspace(self.ambient, q)


@dataclass(eq=False)
class Projection:
    """An orthogonal (gram-selfadjoint, idempotent) projection matrix."""

    ambient: InnerProductSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        d = self.ambient.dim
        if self.matrix.shape != (d, d):
            raise ValueError(f"projection matrix must be {d}x{d}")
        m = self.matrix
        norm_m = np.linalg.norm(m)
        if np.linalg.norm(m @ m - m) > 1e-10 * (1.0 + norm_m):
            raise NotAProjection("matrix is not idempotent within tolerance")
        g = self.ambient.gram
        defect = np.linalg.norm(g @ m - m.T @ g)
        if defect > 1e-10 * np.linalg.norm(g) * (1.0 + norm_m):
            raise NotAProjection("matrix is not gram-selfadjoint within tolerance")

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix)))

    def complement(self) -> "Projection":
        return Projection(self.ambient, np.eye(self.ambient.dim) - self.matrix)

    def image(self) -> Subspace:
        q, _ = self.ambient.orthonormalize(self.matrix)
        return Subspace(self.ambient, q)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u


def orthogonal_projection(s: Subspace, tol: ToleranceProfile = DEFAULT_TOL) -> Projection:
    """Orthogonal projection onto the span of a subspace basis.

    Uses P = B (B^T G B)^{-1} B^T G.  The empty subspace maps to the
    zero matrix and the full subspace to the identity.
    """
    d = s.ambient.dim
    if s.dim == 0:
        return Projection(s.ambient, np.zeros((d, d)))
    b = s.basis
    gb = s.ambient.gram @ b
    inner = b.T @ gb
    try:
        c = sla.cho_factor(0.5 * (inner + inner.T))
    except sla.LinAlgError as exc:
        raise RankDeficiency("basis gram matrix is numerically singular") from exc
    p = b @ sla.cho_solve(c, gb.T)
    return Projection(s.ambient, p)


def _as_projection(x, tol: ToleranceProfile) -> Projection:
    if isinstance(x, Projection):
        return x
    if isinstance(x, Subspace):
        return orthogonal_projection(x, tol)
    raise TypeError("expected Subspace or Projection")


def gap_distance(u, v, tol: ToleranceProfile = DEFAULT_TOL) -> float:
    """Gap distance ||P_U - P_V|| in the gram operator norm."""
    pu = _as_projection(u, tol)
    pv = _as_projection(v, tol)
    if not pu.ambient.same_as(pv.ambient):
        raise AmbientMismatch("subspaces live in different ambient spaces")
    return pu.ambient.operator_norm(pu.matrix - pv.matrix)


def orthogonalize_projection(
    q: np.ndarray, ambient: InnerProductSpace, tol: ToleranceProfile = DEFAULT_TOL
) -> Projection:
    """Orthogonal projection with the same image as a bounded projection.

    Implements P = Q Q* (Q Q* + (I - Q*)(I - Q))^{-1}, where * is the
    gram adjoint.  A gram-selfadjoint input is reproduced unchanged up
    to round-off.
    """
    q = np.asarray(q, dtype=float)
    d = ambient.dim
    if q.shape != (d, d):
        raise ValueError(f"projection candidate must be {d}x{d}")
    norm_q = np.linalg.norm(q)
    if np.linalg.norm(q @ q - q) > 1e-8 * (1.0 + norm_q) ** 2:
        raise NotAProjection("input is not idempotent within tolerance")
    qs = ambient.adjoint(q)
    eye = np.eye(d)
    qqs = q @ qs
    inner = qqs + (eye - qs) @ (eye - q)
    try:
        p = sla.solve(inner.T, qqs.T, assume_a="gen").T
    except sla.LinAlgError as exc:
        raise DegenerateInput("inner matrix of the orthogonalization is singular") from exc
    if not np.all(np.isfinite(p)):
        raise DegenerateInput("orthogonalization produced non-finite entries")
    return Projection(ambient, p)


def kernel_path(
    family: Callable[[float], np.ndarray],
    samples: Sequence[float],
    ambient: InnerProductSpace,
    tol: ToleranceProfile = DEFAULT_TOL,
) -> list[Projection]:
    """Orthogonal projections onto ker(family(t)) at each sample.

    For each sample a right inverse M with family(t) @ M = I is built
    from the gram-weighted pseudoinverse, R = M @ family(t) is the
    complementary projection, and Q = I - R is orthogonalized.  Raises
    SurjectivityFailure when a family member loses row rank, and a
    GapFlowError when consecutive projections are a gap >= 1 apart
    (a dimension jump, so no continuous kernel path exists at this
    resolution).
    """
    samples = list(samples)
    if len(samples) == 0:
        return []
    if any(b <= a for a, b in zip(samples, samples[1:])):
        raise ValueError("samples must be strictly increasing")
    d = ambient.dim
    eye = np.eye(d)
    out: list[Projection] = []
    for t in samples:
        a_t = np.atleast_2d(np.asarray(family(t), dtype=float))
        m, n = a_t.shape
        if n != d or m >= d:
            raise ValueError(f"family value at t={t} must be m x dim with m < dim")
        s = np.linalg.svd(a_t, compute_uv=False)
        if s[0] == 0.0 or s[-1] <= tol.rank_rtol * s[0]:
            raise SurjectivityFailure(t)
        x = sla.cho_solve((ambient._chol, True), a_t.T)
        w = a_t @ x
        right_inv = x @ sla.solve(0.5 * (w + w.T), np.eye(m), assume_a="pos")
        q = eye - right_inv @ a_t
        p = orthogonalize_projection(q, ambient, tol)
        if out:
            jump = ambient.operator_norm(p.matrix - out[-1].matrix)
            if jump >= 1.0 - 1e-9:
                raise GapFlowError(
                    f"kernel path jumps by gap {jump:.6f} between consecutive samples"
                )
        out.append(p)
    return out


def principal_angle_cosines(u: Subspace, v: Subspace) -> np.ndarray:
    """Cosines of the principal angles between two subspaces, descending."""
    if not u.ambient.same_as(v.ambient):
        raise AmbientMismatch("subspaces live in different ambient spaces")
    qu = u.orthonormal_basis()
    qv = v.orthonormal_basis()
    if qu.shape[1] == 0 or qv.shape[1] == 0:
        return np.zeros(0)
    cos = np.linalg.svd(qu.T @ u.ambient.gram @ qv, compute_uv=False)
    return np.clip(cos, 0.0, 1.0)


def intersection_dimension(
    u: Subspace, v: Subspace, tol: ToleranceProfile = DEFAULT_TOL
) -> int:
    """Dimension of the intersection, counted by near-unit principal cosines."""
    cos = principal_angle_cosines(u, v)
    return int(np.sum(cos > 1.0 - tol.angle_gap))
