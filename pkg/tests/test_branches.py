"""Tests for constrained functionals, branch continuation and verification."""

import math

import numpy as np
import pytest

from gapflow import (
    AllTrivial,
    BranchPoint,
    DiscreteFunction,
    Mesh,
    assemble_gram,
    assemble_hessian,
    branch_space,
    constant_problem,
    constrained_gradient,
    constrained_subspace,
    cubic_problem,
    find_branch,
    functional_value,
    global_solution_check,
    refine_degeneracy,
    relaxed_gradient,
    relaxed_value,
)
from gapflow.branches import _newton_at_node, _workspace, full_gradient
from gapflow.fem import node_at

from oracles import dirichlet_return_length, pitchfork_profile, unconstrained_second_mode

T_STAR = math.pi / math.sqrt(50.0)


class TestFunctionalAndGradient:
    def test_zero_function(self):
        space = assemble_gram(Mesh.uniform(40), 1)
        problem = cubic_problem(50.0)
        u = DiscreteFunction.zero(space)
        assert functional_value(space, problem, u) == 0.0
        assert np.allclose(full_gradient(space, problem, u), 0.0)

    def test_quadratic_problem_gradient_is_hessian_action(self):
        rng = np.random.default_rng(40)
        space = assemble_gram(Mesh.uniform(30), 1)
        problem = constant_problem(1.0, -12.0)
        hess = assemble_hessian(space, problem)
        u = DiscreteFunction(space, rng.standard_normal(space.dof))
        assert np.allclose(full_gradient(space, problem, u), hess @ u.coords, atol=1e-12)

    def test_finite_difference_directional_derivatives(self):
        rng = np.random.default_rng(41)
        space = assemble_gram(Mesh.uniform(50), 1)
        problem = cubic_problem(50.0)
        eps = 1e-5
        for _ in range(20):
            u = DiscreteFunction(space, 0.5 * rng.standard_normal(space.dof))
            direction = rng.standard_normal(space.dof)
            direction /= np.linalg.norm(direction)
            up = DiscreteFunction(space, u.coords + eps * direction)
            dn = DiscreteFunction(space, u.coords - eps * direction)
            fd = (functional_value(space, problem, up) - functional_value(space, problem, dn)) / (2 * eps)
            analytic = float(full_gradient(space, problem, u) @ direction)
            assert abs(fd - analytic) <= 1e-6 * max(1.0, abs(analytic))

    def test_constrained_gradient_restricts_full_gradient(self):
        rng = np.random.default_rng(42)
        space = assemble_gram(Mesh.uniform(24), 1)
        problem = cubic_problem(20.0)
        t = 0.37
        basis = constrained_subspace(space, t).basis
        u = DiscreteFunction(space, basis @ rng.standard_normal(basis.shape[1]))
        restricted = constrained_gradient(space, problem, t, u)
        assert np.allclose(restricted, basis.T @ full_gradient(space, problem, u))

    def test_relaxed_value_matches_on_constrained_functions(self):
        rng = np.random.default_rng(43)
        space = assemble_gram(Mesh.uniform(24), 1)
        problem = cubic_problem(20.0)
        t = 0.6
        basis = constrained_subspace(space, t).basis
        u = DiscreteFunction(space, basis @ rng.standard_normal(basis.shape[1]))
        assert np.isclose(relaxed_value(space, problem, t, u),
                          functional_value(space, problem, u), atol=1e-11)


@pytest.fixture(scope="module")
def cubic_branch():
    problem = cubic_problem(50.0, 1.0)
    space, _ = branch_space(problem, T_STAR, side=1, steps=6, delta0=1e-5,
                            n_elements=1600)
    result = find_branch(space, problem, T_STAR, side=1, steps=6, delta0=1e-5)
    return space, problem, result


class TestCubicBranch:
    def test_refined_parameter_close_to_exact(self, cubic_branch):
        _, _, result = cubic_branch
        assert abs(result.t_star - T_STAR) < 5e-6

    def test_branch_point_count_and_convergence(self, cubic_branch):
        _, _, result = cubic_branch
        assert len(result.points) >= 5
        offsets = [p.t - result.t_star for p in result.points]
        assert all(d > 0 for d in offsets)
        assert offsets == sorted(offsets, reverse=True)
        amplitudes = [p.amplitude for p in result.points]
        assert amplitudes == sorted(amplitudes, reverse=True)
        assert amplitudes[-1] < 1e-2

    def test_residuals(self, cubic_branch):
        _, _, result = cubic_branch
        for p in result.points:
            assert p.residual < 1e-10 * (1 + p.amplitude)

    def test_zero_on_the_far_side(self, cubic_branch):
        space, _, result = cubic_branch
        for p in result.points:
            nodal = p.u.nodal_values()[:, 0]
            mask = space.mesh.nodes > p.t + 1e-15
            assert np.abs(nodal[mask]).max() < 1e-9

    def test_pitchfork_exponent(self, cubic_branch):
        _, _, result = cubic_branch
        deltas = np.array([p.t - result.t_star for p in result.points])
        amplitudes = np.array([p.amplitude for p in result.points])
        slope = np.polyfit(np.log(deltas), np.log(amplitudes), 1)[0]
        assert 0.45 <= slope <= 0.55

    def test_shooting_oracle_agreement(self, cubic_branch):
        # energy-matched shooting profile of the same equation agrees with
        # each nontrivial piece in the sup norm
        space, _, result = cubic_branch
        nodes = space.mesh.nodes
        for p in result.points:
            nodal = p.u.nodal_values()[:, 0]
            inside = nodes <= p.t + 1e-15
            values = nodal[inside]
            if values[np.argmax(np.abs(values))] < 0:
                values = -values
            profile = pitchfork_profile(50.0, 1.0, np.abs(values).max(), nodes[inside])
            assert np.abs(values - profile).max() < 1e-6

    def test_oracle_interval_length_matches(self, cubic_branch):
        # the shooting solution with the same amplitude returns to zero at
        # (nearly) the constraint parameter
        _, _, result = cubic_branch
        p = result.points[0]
        ell = dirichlet_return_length(50.0, 1.0, p.amplitude)
        assert abs(ell - p.t) < 1e-6

    def test_weak_residual_of_the_pieces(self, cubic_branch):
        # both restrictions satisfy the piecewise equations: the full
        # gradient vanishes against hats supported on either side
        space, problem, result = cubic_branch
        p = result.points[0]
        grad = full_gradient(space, problem, p.u)
        node = node_at(space, p.t)
        n_el = space.mesh.n_elements
        left = grad[: node - 1]
        right = grad[node:]
        assert np.abs(left).max() < 1e-8
        assert np.abs(right).max() < 1e-8

    def test_relaxed_gradient_vanishes_at_solutions(self, cubic_branch):
        # critical points of the restriction are critical points of the
        # relaxation including the complement term
        space, problem, result = cubic_branch
        p = result.points[-1]
        dual = relaxed_gradient(space, problem, p.t, p.u)
        norm = space.ambient.dual_norm(dual.reshape(1, -1))
        assert norm < 1e-8


class TestTrivialOutcomes:
    def test_linear_problem_all_trivial(self):
        problem = constant_problem(1.0, -50.0)
        space, t_ref = branch_space(problem, T_STAR, side=1, steps=4, delta0=1e-4,
                                    n_elements=400)
        with pytest.raises(AllTrivial):
            find_branch(space, problem, T_STAR, side=1, steps=4, delta0=1e-4)

    def test_subcritical_cubic_all_trivial(self):
        problem = cubic_problem(5.0, 1.0)
        space = assemble_gram(Mesh.uniform(200), 1)
        with pytest.raises(AllTrivial):
            find_branch(space, problem, 0.45, side=1, steps=3, delta0=1e-3)

    def test_subcritical_side_of_pitchfork(self):
        # below the critical parameter the only small solution is zero
        problem = cubic_problem(50.0, 1.0)
        space, _ = branch_space(problem, T_STAR, side=-1, steps=3, delta0=1e-4,
                                n_elements=400)
        with pytest.raises(AllTrivial):
            find_branch(space, problem, T_STAR, side=-1, steps=3, delta0=1e-4)


class TestRefineDegeneracy:
    def test_second_order_accuracy(self):
        problem = constant_problem(1.0, -50.0)
        errors = []
        for n_el in (200, 400):
            space = assemble_gram(Mesh.uniform(n_el), 1)
            t_ref = refine_degeneracy(space, problem, T_STAR - 2e-3, T_STAR + 2e-3)
            errors.append(abs(t_ref - T_STAR))
        assert errors[0] < 1e-4
        assert errors[1] < 3e-5
        assert errors[1] < 0.5 * errors[0]


class TestGlobalSolutionCheck:
    def test_zero_function_is_global(self):
        space = assemble_gram(Mesh.uniform(64), 1)
        problem = cubic_problem(50.0)
        point = BranchPoint(0.5, DiscreteFunction.zero(space), 0.0, 0.0)
        check = global_solution_check(point, problem)
        assert check.is_global
        assert check.magnitude == 0.0

    def test_branch_point_is_not_global(self, cubic_branch):
        _, problem, result = cubic_branch
        check = global_solution_check(result.points[0], problem)
        assert not check.is_global
        # the jump equals A(t) u'(t-) since the right side vanishes
        slope = math.sqrt(50.0 * result.points[0].amplitude ** 2
                          - 0.5 * result.points[0].amplitude ** 4)
        assert np.isclose(check.magnitude, slope, rtol=1e-3)

    def test_genuine_solution_is_global(self):
        # import the collocation solution of the unconstrained problem,
        # polish it as a constrained critical point at its interior zero,
        # and verify the derivative jump vanishes
        c = 50.0
        problem = cubic_problem(c, 1.0)
        space = assemble_gram(Mesh.uniform(1024), 1)
        oracle = unconstrained_second_mode(c, 1.0)
        u0 = DiscreteFunction.interpolate(space, oracle)
        node = node_at(space, 0.5)
        assert node is not None
        ws = _workspace(space, problem)
        coords, residual = _newton_at_node(ws, node, u0.coords)
        u = DiscreteFunction(space, coords)
        point = BranchPoint(0.5, u, u.sup_norm, residual)
        check = global_solution_check(point, problem)
        assert check.is_global
        assert check.magnitude < 1e-4
        # and it genuinely matches the collocation oracle
        xs = space.mesh.nodes
        sign = 1.0 if u.nodal_values()[space.mesh.n_elements // 4, 0] * oracle(0.25) > 0 else -1.0
        assert np.abs(sign * u.nodal_values()[:, 0] - oracle(xs)).max() < 1e-4
