"""Tolerance profile threaded through all numerical decisions."""

from dataclasses import dataclass


@dataclass(frozen=True)
class ToleranceProfile:
    """Thresholds for rank, kernel and subspace-angle decisions.

    rank_rtol: a singular value counts as zero when it is below
        rank_rtol times the largest singular value.
    zero_band: an eigenvalue lam counts as zero when
        |lam| < zero_band * max(1, operator norm).
    angle_gap: a principal angle counts as zero (the directions are
        identified) when its cosine exceeds 1 - angle_gap.
    projection_residual: admissible defect for idempotency and
        self-adjointness of projection matrices.
    """

    rank_rtol: float = 1e-10
    zero_band: float = 1e-8
    angle_gap: float = 1e-9
    projection_residual: float = 1e-10

    def __post_init__(self):
        for name in ("rank_rtol", "zero_band", "angle_gap", "projection_residual"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def eigen_band(self, scale: float) -> float:
        """Absolute zero band for eigenvalues of an operator of the given norm."""
        return self.zero_band * max(1.0, scale)


DEFAULT_TOL = ToleranceProfile()
