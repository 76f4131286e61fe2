import numpy as np
import pytest

from graspforce.cone_program import (
    ConeBounds,
    adaptive_lower_bounds,
    assemble,
    feasibility_residuals,
    max_residual,
    objective,
)
from graspforce.contact_geometry import build_contact_frame


def antipodal_frames():
    return (
        build_contact_frame((-0.05, 0, 0), (1, 0, 0)),
        build_contact_frame((0.05, 0, 0), (-1, 0, 0)),
    )


def default_bounds(m, mu=0.4, up=2.5):
    return [ConeBounds(0.0, up, mu) for _ in range(m)]


class TestConeBounds:
    def test_ordering_enforced(self):
        with pytest.raises(ValueError):
            ConeBounds(gamma_low=1.0, gamma_up=0.5, mu_tilde=0.4)
        with pytest.raises(ValueError):
            ConeBounds(gamma_low=-0.1, gamma_up=0.5, mu_tilde=0.4)

    def test_positive_mu_enforced(self):
        with pytest.raises(ValueError):
            ConeBounds(gamma_low=0.0, gamma_up=1.0, mu_tilde=0.0)


class TestAdaptiveLowerBounds:
    def test_hand_value(self):
        bounds = adaptive_lower_bounds([(1.0, 0.3, 0.4)], mu_tilde=0.5)
        assert np.isclose(bounds[0].gamma_low, 1.0)
        assert not bounds[0].saturated

    def test_zero_tangential_reproduces_static_default(self):
        bounds = adaptive_lower_bounds([(0.7, 0.0, 0.0), (0.0, 0.0, 0.0)], mu_tilde=0.4)
        assert all(b.gamma_low == 0.0 for b in bounds)
        assert all(not b.saturated for b in bounds)

    def test_clamped_bound_is_flagged(self):
        bounds = adaptive_lower_bounds([(1.0, 2.0, 0.0)], mu_tilde=0.4, gamma_up=2.5)
        assert np.isclose(bounds[0].gamma_low, 2.5)
        assert bounds[0].saturated

    def test_nonpositive_mu_rejected(self):
        with pytest.raises(ValueError):
            adaptive_lower_bounds([(1.0, 0.0, 0.0)], mu_tilde=0.0)


class TestAssemble:
    def test_dimension_bookkeeping(self):
        problem = assemble(antipodal_frames(), default_bounds(2), (0, 0, 1),
                           np.zeros(6))
        assert problem.num_variables == 6
        assert problem.stack_matrix().shape == (3, 6)

    def test_empty_contacts_rejected(self):
        with pytest.raises(ValueError):
            assemble([], [], (0, 0, 1), np.zeros(0))

    def test_wrong_f_prev_length_rejected(self):
        with pytest.raises(ValueError):
            assemble(antipodal_frames(), default_bounds(2), (0, 0, 1), np.zeros(5))

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            assemble(antipodal_frames(), default_bounds(2), (0, 0, 1), np.zeros(6),
                     beta1=-0.1)


class TestObjective:
    def test_exact_equilibrium_zeroes_objective(self):
        problem = assemble(antipodal_frames(), default_bounds(2), (0, 0, 0),
                           np.zeros(6), beta1=0.0, beta2=0.0)
        # Equal opposing normal forces sum to zero world force.
        f = np.array([1.0, 0, 0, 1.0, 0, 0])
        assert objective(problem, f) == pytest.approx(0.0, abs=1e-15)

    def test_weight_residual_dominates_at_zero_force(self):
        problem = assemble(antipodal_frames(), default_bounds(2), (0, 0, 1.0),
                           np.zeros(6), beta1=0.7, beta2=0.0)
        assert objective(problem, np.zeros(6)) == pytest.approx(1.0)

    def test_penalty_term_contribution(self):
        frame = build_contact_frame((0, 0, 0), (0, 0, 1))
        f = np.array([1.0, 0.0, 0.0])
        problem = assemble([frame], default_bounds(1), frame.n, f,
                           beta1=0.3, beta2=1.0)
        # E_eq = 0 (force equals the target), E_smt = 0 (f == f_prev), so the
        # whole objective is the unit E_pen contribution.
        assert objective(problem, f) == pytest.approx(1.0)

    def test_convexity_along_random_segments(self):
        rng = np.random.default_rng(5)
        frames = [build_contact_frame(rng.normal(size=3), rng.normal(size=3))
                  for _ in range(3)]
        problem = assemble(frames, default_bounds(3), rng.normal(size=3),
                           rng.normal(size=9), beta1=0.2, beta2=0.05)
        for _ in range(300):
            f, g = rng.normal(size=9), rng.normal(size=9)
            lam = rng.uniform()
            mixed = objective(problem, lam * f + (1 - lam) * g)
            assert mixed <= lam * objective(problem, f) + (1 - lam) * objective(problem, g) + 1e-9


class TestFeasibilityResiduals:
    def problem(self):
        return assemble(antipodal_frames(), default_bounds(2), (0, 0, 1), np.zeros(6))

    def test_inside_cone(self):
        f = np.array([1.0, 0.2, 0.2, 1.0, 0.0, 0.0])
        res = feasibility_residuals(self.problem(), f)
        assert res[0].cone == 0.0
        assert res[0].max == 0.0

    def test_cone_violation_magnitude(self):
        f = np.array([1.0, 0.5, 0.0, 1.0, 0.0, 0.0])
        res = feasibility_residuals(self.problem(), f)
        assert res[0].cone == pytest.approx(0.1)

    def test_upper_bound_violation(self):
        f = np.array([3.0, 0.0, 0.0, 1.0, 0.0, 0.0])
        res = feasibility_residuals(self.problem(), f)
        assert res[0].upper == pytest.approx(0.5)

    def test_lower_bound_violation(self):
        problem = assemble(antipodal_frames(),
                           [ConeBounds(0.5, 2.5, 0.4), ConeBounds(0.0, 2.5, 0.4)],
                           (0, 0, 1), np.zeros(6))
        res = feasibility_residuals(problem, np.zeros(6))
        assert res[0].lower == pytest.approx(0.5)

    def test_feasible_set_closed_under_convex_combination(self):
        rng = np.random.default_rng(9)
        problem = self.problem()

        def random_feasible():
            f = np.zeros(6)
            for i in range(2):
                u = rng.uniform(0.0, 2.5)
                t = rng.uniform(0.0, 0.4 * u)
                ang = rng.uniform(0, 2 * np.pi)
                f[3 * i:3 * i + 3] = (u, t * np.cos(ang), t * np.sin(ang))
            return f

        for _ in range(300):
            f, g = random_feasible(), random_feasible()
            lam = rng.uniform()
            assert max_residual(problem, lam * f + (1 - lam) * g) <= 1e-12
