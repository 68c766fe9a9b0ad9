"""Morse index, relative Morse index and spectral flow in finite dimension.

Operators are given by coordinate matrices that are selfadjoint with
respect to the ambient Gram matrix.  Spectral data comes from the
generalized symmetric eigenproblem (form, gram), reduced by a Cholesky
factorization of the gram matrix.  The spectral flow of a path with
invertible endpoints is localized by adaptive bisection on the Morse
index and always equals the difference of the endpoint Morse indices,
which is asserted on every call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import (
    AmbientMismatch,
    DegenerateEndpoint,
    GapFlowError,
    IntervalMismatch,
    SubdivisionLimit,
)
from .grassmann import InnerProductSpace
from .tolerances import DEFAULT_TOL, ToleranceProfile


@dataclass(eq=False)
class SymmetricOperator:
    """An operator on (H, G) whose coordinate matrix M satisfies G M = M^T G."""

    ambient: InnerProductSpace
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        d = self.ambient.dim
        if self.matrix.shape != (d, d):
            raise ValueError(f"operator matrix must be {d}x{d}")
        g = self.ambient.gram
        defect = np.linalg.norm(g @ self.matrix - self.matrix.T @ g)
        bound = 1e-10 * np.linalg.norm(g) * (1.0 + np.linalg.norm(self.matrix))
        if defect > bound:
            raise ValueError("coordinate matrix is not gram-selfadjoint")
        self._form = None

    @classmethod
    def from_form(cls, ambient: InnerProductSpace, form: np.ndarray) -> "SymmetricOperator":
        """Operator representing a symmetric bilinear form, M = G^{-1} B."""
        form = np.asarray(form, dtype=float)
        if np.linalg.norm(form - form.T) > 1e-10 * (1.0 + np.linalg.norm(form)):
            raise ValueError("form matrix is not symmetric")
        form = 0.5 * (form + form.T)
        matrix = sla.cho_solve((ambient._chol, True), form)
        op = cls(ambient, matrix)
        op._form = form
        return op

    @classmethod
    def identity(cls, ambient: InnerProductSpace) -> "SymmetricOperator":
        return cls(ambient, np.eye(ambient.dim))

    @property
    def form(self) -> np.ndarray:
        """Bilinear form matrix G M, symmetrized."""
        if self._form is None:
            f = self.ambient.gram @ self.matrix
            self._form = 0.5 * (f + f.T)
        return self._form


@dataclass(eq=False)
class SpectralDecomposition:
    """Eigen data of the pencil (form, gram) with signed eigenvalue counts."""

    operator: SymmetricOperator
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_band: float

    @property
    def negative_count(self) -> int:
        return int(np.sum(self.eigenvalues < -self.zero_band))

    @property
    def zero_count(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues) <= self.zero_band))

    @property
    def positive_count(self) -> int:
        return int(np.sum(self.eigenvalues > self.zero_band))

    def negative_subspace(self) -> np.ndarray:
        return self.eigenvectors[:, self.eigenvalues < -self.zero_band]

    def positive_subspace(self) -> np.ndarray:
        return self.eigenvectors[:, self.eigenvalues > self.zero_band]

    def kernel_vectors(self) -> np.ndarray:
        return self.eigenvectors[:, np.abs(self.eigenvalues) <= self.zero_band]

    def smallest_magnitude(self) -> float:
        return float(np.abs(self.eigenvalues).min())


def decompose(op: SymmetricOperator, tol: ToleranceProfile = DEFAULT_TOL) -> SpectralDecomposition:
    """Solve the generalized symmetric eigenproblem for an operator.

    scipy's eigh reduces (form, gram) by a Cholesky factorization of the
    gram matrix; when that fails numerically the reduction falls back to
    the symmetric eigendecomposition of the gram matrix itself.
    """
    try:
        w, v = sla.eigh(op.form, op.ambient.gram)
    except (sla.LinAlgError, np.linalg.LinAlgError):
        half, inv_half = op.ambient._sqrt_factors()
        w, y = np.linalg.eigh(inv_half @ op.form @ inv_half)
        v = inv_half @ y
    scale = float(np.abs(w).max()) if w.size else 0.0
    band = tol.eigen_band(scale)
    residual = op.matrix @ v - v * w
    col_res = np.linalg.norm(residual, axis=0)
    bound = 1e-9 * max(1.0, np.linalg.norm(op.matrix)) * (1.0 + np.sqrt(op.ambient.dim))
    if col_res.size and col_res.max() > bound:
        raise GapFlowError(
            f"eigensolver residual {col_res.max():.3e} exceeds bound {bound:.3e}"
        )
    return SpectralDecomposition(op, w, v, band)


def morse_index(op: SymmetricOperator, tol: ToleranceProfile = DEFAULT_TOL) -> int:
    """Number of negative eigenvalues counted with multiplicity."""
    return decompose(op, tol).negative_count


def kernel_dimension(op: SymmetricOperator, tol: ToleranceProfile = DEFAULT_TOL) -> int:
    """Number of eigenvalues inside the zero band."""
    return decompose(op, tol).zero_count


def _intersection_count(a: np.ndarray, b: np.ndarray, gram: np.ndarray, angle_gap: float) -> int:
    if a.shape[1] == 0 or b.shape[1] == 0:
        return 0
    cos = np.linalg.svd(a.T @ gram @ b, compute_uv=False)
    return int(np.sum(np.clip(cos, 0.0, 1.0) > 1.0 - angle_gap))


def relative_morse_index(
    s: SymmetricOperator, t: SymmetricOperator, tol: ToleranceProfile = DEFAULT_TOL
) -> int:
    """dim(E^-(S) cap E^+(T)) - dim(E^+(S) cap E^-(T)) for invertible S, T.

    Intersection dimensions are counted through principal angles between
    the spectral subspaces; an angle counts as zero when its cosine
    exceeds 1 - tol.angle_gap.
    """
    if not s.ambient.same_as(t.ambient):
        raise AmbientMismatch("operators live in different ambient spaces")
    ds = decompose(s, tol)
    dt = decompose(t, tol)
    if ds.zero_count:
        raise DegenerateEndpoint("S", ds.smallest_magnitude())
    if dt.zero_count:
        raise DegenerateEndpoint("T", dt.smallest_magnitude())
    gram = s.ambient.gram
    plus = _intersection_count(ds.negative_subspace(), dt.positive_subspace(), gram, tol.angle_gap)
    minus = _intersection_count(ds.positive_subspace(), dt.negative_subspace(), gram, tol.angle_gap)
    return plus - minus


@dataclass(eq=False)
class OperatorPath:
    """A parameter-dependent gram-selfadjoint operator on a fixed space."""

    interval: tuple[float, float]
    evaluate: Callable[[float], SymmetricOperator]
    label: str = ""

    def __post_init__(self):
        a, b = self.interval
        if not a < b:
            raise ValueError("interval endpoints must satisfy a < b")
        self.interval = (float(a), float(b))

    def __call__(self, t: float) -> SymmetricOperator:
        return self.evaluate(t)


def direct_sum(p: OperatorPath, q: OperatorPath) -> OperatorPath:
    """Block-diagonal path on the product space with block-diagonal gram."""
    if p.interval != q.interval:
        raise IntervalMismatch(f"intervals {p.interval} and {q.interval} differ")
    probe_p = p(p.interval[0])
    probe_q = q(q.interval[0])
    gram = sla.block_diag(probe_p.ambient.gram, probe_q.ambient.gram)
    ambient = InnerProductSpace(probe_p.ambient.dim + probe_q.ambient.dim, gram)

    def evaluate(t: float) -> SymmetricOperator:
        return SymmetricOperator(ambient, sla.block_diag(p(t).matrix, q(t).matrix))

    label = f"({p.label})+({q.label})" if (p.label or q.label) else ""
    return OperatorPath(p.interval, evaluate, label)


@dataclass(frozen=True)
class ScanControl:
    """Parameters of the scan and bisection driver.

    samples: size of the initial uniform scan grid (cells).
    bracket: target width for localized crossings.
    max_depth: bisection depth limit before SubdivisionLimit.
    jump_budget: optional cap on the eigenvalue motion between
        consecutive scan samples; None disables the check.
    tol: tolerance profile used for every spectral decision.
    """

    samples: int = 64
    bracket: float = 1e-6
    max_depth: int = 60
    jump_budget: float | None = None
    tol: ToleranceProfile = DEFAULT_TOL

    def __post_init__(self):
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        if self.bracket <= 0:
            raise ValueError("bracket must be positive")


@dataclass(frozen=True)
class Crossing:
    """A localized zero crossing of the eigenvalue curves."""

    t: float
    sign: int
    kernel_dim: int
    eigenvalue_slope_estimate: float
    bracket: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "sign": self.sign,
            "kernel_dim": self.kernel_dim,
            "eigenvalue_slope_estimate": self.eigenvalue_slope_estimate,
        }


@dataclass(eq=False)
class SpectralFlowResult:
    value: int
    morse_start: int
    morse_end: int
    crossings: list[Crossing]
    grid: np.ndarray
    eigenvalue_table: np.ndarray
    max_grid_jump: float

    def __int__(self) -> int:
        return self.value


class _PathScanner:
    """Caches spectral data of a path at visited parameters."""

    def __init__(self, path: OperatorPath, tol: ToleranceProfile):
        self.path = path
        self.tol = tol
        self._cache: dict[float, SpectralDecomposition] = {}

    def at(self, t: float) -> SpectralDecomposition:
        if t not in self._cache:
            self._cache[t] = decompose(self.path(t), self.tol)
        return self._cache[t]

    def morse(self, t: float) -> int:
        return self.at(t).negative_count

    def degenerate(self, t: float) -> bool:
        return self.at(t).zero_count > 0


# deterministic, irrationally spaced trial offsets as fractions of the width
_SHIFT_FRACTIONS = (0.0, 0.1180339887498949, -0.1180339887498949,
                    0.2360679774997896, -0.2360679774997896,
                    0.3819660112501051, -0.3819660112501051)


def _regular_point(scanner: _PathScanner, t: float, lo: float, hi: float):
    """A non-degenerate parameter near t inside (lo, hi), or None."""
    width = hi - lo
    for frac in _SHIFT_FRACTIONS:
        cand = t + frac * width
        if not (lo < cand < hi):
            continue
        if not scanner.degenerate(cand):
            return cand
    return None


def _bisect_cells(scanner: _PathScanner, cells: list[tuple[float, float]],
                  control: ScanControl) -> list[Crossing]:
    """Localize every Morse-index change inside the given cells."""
    crossings: list[Crossing] = []
    stack = [(lo, hi, 0) for lo, hi in cells
             if scanner.morse(lo) != scanner.morse(hi)]
    while stack:
        lo, hi, depth = stack.pop()
        m_lo, m_hi = scanner.morse(lo), scanner.morse(hi)
        if hi - lo <= control.bracket:
            crossings.append(_emit_crossing(scanner, lo, hi))
            continue
        if depth >= control.max_depth:
            raise SubdivisionLimit(
                f"bisection depth {control.max_depth} exceeded on [{lo}, {hi}]"
            )
        mid = _regular_point(scanner, 0.5 * (lo + hi), lo, hi)
        if mid is None:
            # the whole interior sits inside the zero band: the crossing is
            # localized at the resolution the band permits
            crossings.append(_emit_crossing(scanner, lo, hi))
            continue
        m_mid = scanner.morse(mid)
        if m_lo != m_mid:
            stack.append((lo, mid, depth + 1))
        if m_mid != m_hi:
            stack.append((mid, hi, depth + 1))
    crossings.sort(key=lambda c: c.t)
    return crossings


def spectral_flow(path: OperatorPath, control: ScanControl | None = None,
                  scanner: _PathScanner | None = None) -> SpectralFlowResult:
    """Spectral flow of a path with invertible endpoints, with crossings.

    Scans a uniform grid, bisects every cell where the Morse index
    changes until the bracket width is reached, and reports each
    localized crossing with its signed multiplicity.  The sign of a
    crossing is the Morse index drop across its bracket, so the signs
    add up to morse(a) - morse(b); that identity is verified on every
    call and the result equals it exactly.
    """
    control = control or ScanControl()
    tol = control.tol
    a, b = path.interval
    scanner = scanner or _PathScanner(path, tol)

    dec_a = scanner.at(a)
    if dec_a.zero_count:
        raise DegenerateEndpoint(a, dec_a.smallest_magnitude())
    dec_b = scanner.at(b)
    if dec_b.zero_count:
        raise DegenerateEndpoint(b, dec_b.smallest_magnitude())

    grid = np.linspace(a, b, control.samples + 1)
    points = [a]
    for i in range(1, control.samples):
        t = float(grid[i])
        if scanner.degenerate(t):
            replacement = _regular_point(scanner, t, float(grid[i - 1]), float(grid[i + 1]))
            if replacement is None:
                raise SubdivisionLimit(
                    f"persistent degeneracy near grid point t={t}; cannot scan the path"
                )
            t = replacement
        points.append(t)
    points.append(b)

    table = np.vstack([scanner.at(t).eigenvalues for t in points])
    jumps = np.abs(np.diff(table, axis=0)).max(axis=1) if len(points) > 1 else np.zeros(0)
    max_jump = float(jumps.max()) if jumps.size else 0.0
    if control.jump_budget is not None and max_jump > control.jump_budget:
        raise GapFlowError(
            f"eigenvalue motion {max_jump:.3e} between scan samples exceeds "
            f"the declared budget {control.jump_budget:.3e}"
        )

    crossings = _bisect_cells(
        scanner, [(points[i], points[i + 1]) for i in range(len(points) - 1)], control
    )
    value = dec_a.negative_count - dec_b.negative_count
    if sum(c.sign for c in crossings) != value:
        raise GapFlowError("crossing signs do not add up to the endpoint Morse difference")

    return SpectralFlowResult(
        value=value,
        morse_start=dec_a.negative_count,
        morse_end=dec_b.negative_count,
        crossings=crossings,
        grid=np.asarray(points),
        eigenvalue_table=table,
        max_grid_jump=max_jump,
    )


def _emit_crossing(scanner: _PathScanner, lo: float, hi: float) -> Crossing:
    dec_lo, dec_hi = scanner.at(lo), scanner.at(hi)
    m_lo, m_hi = dec_lo.negative_count, dec_hi.negative_count
    sign = m_lo - m_hi
    k0, k1 = min(m_lo, m_hi), max(m_lo, m_hi)
    # eigenvalues with indices [k0, k1) change sign across the bracket
    slopes = (dec_hi.eigenvalues[k0:k1] - dec_lo.eigenvalues[k0:k1]) / (hi - lo)
    slope = float(np.mean(slopes)) if slopes.size else 0.0
    return Crossing(
        t=0.5 * (lo + hi),
        sign=sign,
        kernel_dim=abs(sign),
        eigenvalue_slope_estimate=slope,
        bracket=(lo, hi),
    )
