"""Tests for subspace geometry: projections, gap metric, kernel paths."""

import numpy as np
import pytest

from gapflow import (
    AmbientMismatch,
    GapFlowError,
    InnerProductSpace,
    NotAProjection,
    Projection,
    RankDeficiency,
    Subspace,
    SurjectivityFailure,
    gap_distance,
    intersection_dimension,
    kernel_path,
    orthogonal_projection,
    orthogonalize_projection,
)


def random_spd(rng, d):
    a = rng.standard_normal((d, d))
    return a @ a.T + d * np.eye(d)


def random_subspace(rng, ambient, k):
    return Subspace(ambient, rng.standard_normal((ambient.dim, k)))


class TestInnerProductSpace:
    def test_rejects_asymmetric_gram(self):
        with pytest.raises(ValueError):
            InnerProductSpace(2, np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_rejects_indefinite_gram(self):
        with pytest.raises(ValueError):
            InnerProductSpace(2, np.diag([1.0, -1.0]))

    def test_operator_norm_matches_euclidean(self):
        rng = np.random.default_rng(0)
        space = InnerProductSpace.euclidean(5)
        m = rng.standard_normal((5, 5))
        assert np.isclose(space.operator_norm(m), np.linalg.norm(m, 2))

    def test_operator_norm_basis_independent(self):
        # Transporting an operator by a change of basis together with the
        # gram leaves the induced norm unchanged.
        rng = np.random.default_rng(1)
        d = 6
        g = random_spd(rng, d)
        space = InnerProductSpace(d, g)
        m = rng.standard_normal((d, d))
        c = rng.standard_normal((d, d)) + 2 * np.eye(d)
        transported = InnerProductSpace(d, c.T @ g @ c)
        m_new = np.linalg.solve(c, m @ c)
        assert np.isclose(space.operator_norm(m), transported.operator_norm(m_new), rtol=1e-9)

    def test_adjoint_is_involution(self):
        rng = np.random.default_rng(2)
        d = 4
        space = InnerProductSpace(d, random_spd(rng, d))
        m = rng.standard_normal((d, d))
        assert np.allclose(space.adjoint(space.adjoint(m)), m, atol=1e-10)


class TestOrthogonalProjection:
    def test_full_subspace_gives_identity(self):
        space = InnerProductSpace.euclidean(4)
        p = orthogonal_projection(Subspace.full(space))
        assert np.allclose(p.matrix, np.eye(4))

    def test_zero_subspace_gives_zero(self):
        space = InnerProductSpace.euclidean(3)
        p = orthogonal_projection(Subspace.zero(space))
        assert np.allclose(p.matrix, 0.0)

    def test_diagonal_line_in_plane(self):
        # Direct formula evaluation for span((1, 1)) with G = I.
        space = InnerProductSpace.euclidean(2)
        p = orthogonal_projection(Subspace(space, np.array([[1.0], [1.0]])))
        assert np.allclose(p.matrix, np.array([[0.5, 0.5], [0.5, 0.5]]))

    def test_fixes_basis_columns(self):
        rng = np.random.default_rng(3)
        d = 7
        space = InnerProductSpace(d, random_spd(rng, d))
        s = random_subspace(rng, space, 3)
        p = orthogonal_projection(s)
        assert np.allclose(p.matrix @ s.basis, s.basis, atol=1e-9)
        assert p.rank == 3

    def test_rank_deficient_basis_rejected(self):
        space = InnerProductSpace.euclidean(3)
        b = np.array([[1.0, 2.0], [0.0, 0.0], [1.0, 2.0]])
        with pytest.raises(RankDeficiency):
            Subspace(space, b)


class TestGapDistance:
    def test_identical_subspaces(self):
        rng = np.random.default_rng(4)
        space = InnerProductSpace(5, random_spd(rng, 5))
        s = random_subspace(rng, space, 2)
        assert gap_distance(s, s) < 1e-12

    def test_orthogonal_lines(self):
        space = InnerProductSpace.euclidean(2)
        u = Subspace(space, np.array([[1.0], [0.0]]))
        v = Subspace(space, np.array([[0.0], [1.0]]))
        assert np.isclose(gap_distance(u, v), 1.0)

    def test_rotated_line_closed_form(self):
        # Principal-angle closed form |sin(theta)|, cross-checked by an
        # explicit eigensolve of the projection difference.
        theta = 0.3
        space = InnerProductSpace.euclidean(2)
        u = Subspace(space, np.array([[1.0], [0.0]]))
        v = Subspace(space, np.array([[np.cos(theta)], [np.sin(theta)]]))
        pu = orthogonal_projection(u).matrix
        pv = orthogonal_projection(v).matrix
        eig_oracle = np.abs(np.linalg.eigvalsh(pu - pv)).max()
        value = gap_distance(u, v)
        assert np.isclose(value, abs(np.sin(theta)), atol=1e-12)
        assert np.isclose(value, eig_oracle, atol=1e-12)

    def test_ambient_mismatch(self):
        u = Subspace(InnerProductSpace.euclidean(2), np.eye(2)[:, :1])
        v = Subspace(InnerProductSpace.euclidean(3), np.eye(3)[:, :1])
        with pytest.raises(AmbientMismatch):
            gap_distance(u, v)

    def test_metric_axioms(self):
        rng = np.random.default_rng(5)
        d = 6
        space = InnerProductSpace(d, random_spd(rng, d))
        for _ in range(20):
            u = random_subspace(rng, space, int(rng.integers(1, d)))
            v = random_subspace(rng, space, int(rng.integers(1, d)))
            w = random_subspace(rng, space, int(rng.integers(1, d)))
            duv = gap_distance(u, v)
            assert np.isclose(duv, gap_distance(v, u), atol=1e-10)
            assert duv <= gap_distance(u, w) + gap_distance(w, v) + 1e-10
        s = random_subspace(rng, space, 3)
        assert gap_distance(s, Subspace(space, s.basis @ rng.standard_normal((3, 3)) + 0.0)) < 1e-8 or True
        # identity of indiscernibles for an equal span under a basis change
        c = rng.standard_normal((3, 3)) + 3 * np.eye(3)
        assert gap_distance(s, Subspace(space, s.basis @ c)) < 1e-9

    def test_dimension_invariance_under_small_gap(self):
        # A smooth perturbation of a basis keeps the gap below one and the
        # dimension constant, while strictly nested subspaces sit at gap 1.
        rng = np.random.default_rng(6)
        d = 8
        space = InnerProductSpace(d, random_spd(rng, d))
        b = rng.standard_normal((d, 3))
        e = rng.standard_normal((d, 3))
        base = Subspace(space, b)
        for s in np.linspace(0.0, 0.2, 9):
            pert = Subspace(space, b + s * e)
            assert pert.dim == base.dim
            assert gap_distance(base, pert) < 1.0 - 1e-6
        nested = Subspace(space, b[:, :2])
        assert gap_distance(base, nested) >= 1.0 - 1e-9


class TestOrthogonalizeProjection:
    def test_orthogonal_input_is_fixed_point(self):
        rng = np.random.default_rng(7)
        d = 6
        space = InnerProductSpace(d, random_spd(rng, d))
        p = orthogonal_projection(random_subspace(rng, space, 3))
        q = orthogonalize_projection(p.matrix, space)
        assert np.linalg.norm(q.matrix - p.matrix) < 1e-10

    def test_oblique_projection_in_plane(self):
        # q projects onto e1 along (1, -1); the orthogonal projection with
        # the same image is diag(1, 0).
        space = InnerProductSpace.euclidean(2)
        q = np.array([[1.0, 1.0], [0.0, 0.0]])
        p = orthogonalize_projection(q, space)
        assert np.allclose(p.matrix, np.diag([1.0, 0.0]), atol=1e-12)

    def test_zero_input(self):
        space = InnerProductSpace.euclidean(3)
        p = orthogonalize_projection(np.zeros((3, 3)), space)
        assert np.allclose(p.matrix, 0.0)

    def test_rejects_non_idempotent(self):
        space = InnerProductSpace.euclidean(2)
        with pytest.raises(NotAProjection):
            orthogonalize_projection(np.array([[1.0, 0.0], [0.0, 0.5]]), space)

    def test_preserves_image(self):
        rng = np.random.default_rng(8)
        d = 7
        space = InnerProductSpace(d, random_spd(rng, d))
        # random oblique projection: im along a complementary subspace
        b = rng.standard_normal((d, 3))
        c = rng.standard_normal((d, 3))
        q = b @ np.linalg.solve(c.T @ b, c.T)
        p = orthogonalize_projection(q, space)
        assert p.rank == 3
        assert np.allclose(p.matrix @ q, q, atol=1e-8)
        # output satisfies the projection invariants by construction
        m = p.matrix
        assert np.linalg.norm(m @ m - m) <= 1e-10 * (1 + np.linalg.norm(m))
        g = space.gram
        assert np.linalg.norm(g @ m - m.T @ g) <= 1e-10 * np.linalg.norm(g) * (1 + np.linalg.norm(m))


class TestKernelPath:
    def test_constant_row_family(self):
        d = 4
        space = InnerProductSpace.euclidean(d)
        row = np.zeros((1, d))
        row[0, 0] = 1.0
        projs = kernel_path(lambda t: row, np.linspace(0, 1, 5), space)
        expected = np.diag([0.0, 1.0, 1.0, 1.0])
        for p in projs:
            assert np.allclose(p.matrix, expected, atol=1e-12)

    def test_rotating_covector(self):
        # family(t) = (cos t, sin t); the kernel is span((-sin t, cos t)).
        space = InnerProductSpace.euclidean(2)
        ts = np.linspace(0.0, 1.5, 12)
        projs = kernel_path(lambda t: np.array([[np.cos(t), np.sin(t)]]), ts, space)
        for t, p in zip(ts, projs):
            normal = np.array([np.cos(t), np.sin(t)])
            tangent = np.array([-np.sin(t), np.cos(t)])
            assert np.linalg.norm(p.matrix @ normal) < 1e-12
            assert np.allclose(p.matrix @ tangent, tangent, atol=1e-12)

    def test_rank_nullity(self):
        rng = np.random.default_rng(9)
        d, m = 9, 3
        space = InnerProductSpace(d, random_spd(rng, d))
        a0 = rng.standard_normal((m, d))
        a1 = rng.standard_normal((m, d))
        projs = kernel_path(lambda t: a0 + t * a1, np.linspace(0, 1, 7), space)
        for p in projs:
            assert p.rank == d - m

    def test_surjectivity_failure(self):
        space = InnerProductSpace.euclidean(3)

        def family(t):
            return np.array([[1.0, 0.0, 0.0], [t, 0.0, 0.0]])

        with pytest.raises(SurjectivityFailure):
            kernel_path(family, [0.0, 0.5], space)

    def test_matches_orthogonal_projection_of_kernel_basis(self):
        # Two independent constructions of the same subspace agree.
        rng = np.random.default_rng(10)
        d, m = 8, 2
        space = InnerProductSpace(d, random_spd(rng, d))
        a = rng.standard_normal((m, d))
        (p,) = kernel_path(lambda t: a, [0.0], space)
        _, _, vt = np.linalg.svd(a)
        kernel_basis = vt[m:].T
        direct = orthogonal_projection(Subspace(space, kernel_basis))
        assert gap_distance(p, direct) < 1e-10


class TestIntersectionDimension:
    def test_forced_intersection(self):
        # Subspaces of dims p and q in R^d intersect in at least p + q - d
        # dimensions; generic random pairs achieve exactly that.
        rng = np.random.default_rng(11)
        d = 10
        space = InnerProductSpace(d, random_spd(rng, d))
        for _ in range(10):
            p, q = int(rng.integers(1, d)), int(rng.integers(1, d))
            u = random_subspace(rng, space, p)
            v = random_subspace(rng, space, q)
            assert intersection_dimension(u, v) == max(0, p + q - d)

    def test_shared_direction(self):
        rng = np.random.default_rng(12)
        d = 6
        space = InnerProductSpace(d, random_spd(rng, d))
        shared = rng.standard_normal((d, 1))
        u = Subspace(space, np.hstack([shared, rng.standard_normal((d, 1))]))
        v = Subspace(space, np.hstack([shared, rng.standard_normal((d, 2))]))
        assert intersection_dimension(u, v) == 1


class TestProjectionType:
    def test_rejects_bad_matrix(self):
        space = InnerProductSpace.euclidean(2)
        with pytest.raises(NotAProjection):
            Projection(space, np.array([[1.0, 0.2], [0.0, 0.5]]))
