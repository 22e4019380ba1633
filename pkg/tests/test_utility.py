"""Tests for the utility catalog and certainty equivalents."""

import math

import numpy as np
import pytest

from stopwise.errors import DomainError, RangeError
from stopwise.utility import (
    DiscreteDist,
    UtilitySpec,
    arrow_pratt,
    certainty_equivalent,
    compare_risk_aversion,
    entropic_ce_normal,
    eval_inverse,
    eval_utility,
    normal_quadrature,
)

LINEAR = UtilitySpec("linear")
EXP1 = UtilitySpec("exponential", gamma=-1.0)
EXP2 = UtilitySpec("exponential", gamma=-2.0)
LOG0 = UtilitySpec("log", shift=0.0)
POW_HALF = UtilitySpec("power", exponent=0.5, shift=0.0)


def uniform_on(atoms):
    n = len(atoms)
    return DiscreteDist(atoms, [1.0 / n] * n)


class TestConstruction:
    def test_rejects_unknown_family(self):
        with pytest.raises(ValueError):
            UtilitySpec("quadratic")

    def test_rejects_nonnegative_gamma(self):
        with pytest.raises(ValueError):
            UtilitySpec("exponential", gamma=0.5)
        with pytest.raises(ValueError):
            UtilitySpec("exponential")

    def test_rejects_bad_power_exponent(self):
        for p in (0.0, 1.0, 1.5, -0.2):
            with pytest.raises(ValueError):
                UtilitySpec("power", exponent=p)

    def test_rejects_misplaced_parameters(self):
        with pytest.raises(ValueError):
            UtilitySpec("linear", gamma=-1.0)
        with pytest.raises(ValueError):
            UtilitySpec("log", exponent=0.5)

    def test_increasing_and_concave_on_sample_grid(self):
        # Spot-check the catalog's defining shape on each family.
        specs = [LINEAR, EXP1, EXP2, LOG0, POW_HALF,
                 UtilitySpec("power", exponent=0.3, shift=2.0),
                 UtilitySpec("log", shift=1.5)]
        for U in specs:
            lo = U.domain_min()
            xs = np.linspace(lo + 0.1 if math.isfinite(lo) else -5.0, 5.0, 81)
            vals = [eval_utility(U, x) for x in xs]
            diffs = np.diff(vals)
            assert np.all(diffs > 0), U
            assert np.all(np.diff(diffs) <= 1e-9), U


class TestEvalUtility:
    def test_linear_identity(self):
        assert eval_utility(LINEAR, 3.5) == 3.5

    def test_exponential_at_zero(self):
        assert eval_utility(EXP1, 0.0) == -1.0

    def test_exponential_direct_evaluation(self):
        # (1/gamma) e^{gamma x} at gamma=-2, x=1
        expected = math.exp(-2.0) / -2.0
        assert math.isclose(eval_utility(EXP2, 1.0), expected, rel_tol=1e-15)
        assert math.isclose(expected, -0.0676676416, abs_tol=1e-9)

    def test_shift_domain_error(self):
        with pytest.raises(DomainError):
            eval_utility(LOG0, 0.0)
        with pytest.raises(DomainError):
            eval_utility(UtilitySpec("power", exponent=0.5, shift=1.0), -1.0)
        with pytest.raises(DomainError):
            eval_utility(LOG0, -3.0)


class TestEvalInverse:
    def test_linear(self):
        assert eval_inverse(LINEAR, -2.0) == -2.0

    def test_exponential_at_minus_one(self):
        assert eval_inverse(EXP1, -1.0) == 0.0

    def test_exponential_closed_form(self):
        # Solve (1/gamma) e^{gamma x} = -0.5 at gamma=-1: x = ln 2.
        assert math.isclose(eval_inverse(EXP1, -0.5), math.log(2.0), rel_tol=1e-14)

    def test_exponential_range_error(self):
        for u in (0.0, 0.25, 10.0):
            with pytest.raises(RangeError):
                eval_inverse(EXP1, u)

    def test_power_range_error(self):
        with pytest.raises(RangeError):
            eval_inverse(POW_HALF, -0.1)
        with pytest.raises(RangeError):
            eval_inverse(POW_HALF, 0.0)

    def test_round_trip_over_domain_grid(self):
        specs = [LINEAR, EXP1, EXP2, LOG0, POW_HALF,
                 UtilitySpec("log", shift=2.0),
                 UtilitySpec("power", exponent=0.7, shift=0.5)]
        for U in specs:
            lo = U.domain_min()
            xs = np.linspace(lo + 0.05 if math.isfinite(lo) else -8.0, 8.0, 200)
            for x in xs:
                x = float(x)
                back = eval_inverse(U, eval_utility(U, x))
                assert math.isclose(back, x, rel_tol=1e-12, abs_tol=1e-12), (U, x)


class TestArrowPratt:
    def test_exponential_constant(self):
        for x in (-5.0, 0.0, 3.0):
            assert arrow_pratt(EXP2, x) == 2.0

    def test_linear_zero(self):
        assert arrow_pratt(LINEAR, 17.0) == 0.0

    def test_log_closed_form(self):
        assert arrow_pratt(LOG0, 4.0) == 0.25

    def test_power_closed_form(self):
        # l(x) = (1-p)/(x+shift)
        U = UtilitySpec("power", exponent=0.25, shift=1.0)
        assert math.isclose(arrow_pratt(U, 2.0), 0.75 / 3.0, rel_tol=1e-15)

    def test_matches_finite_differences(self):
        # Independent check of every closed form against numeric -U''/U'.
        specs = [EXP1, EXP2, LOG0, POW_HALF, UtilitySpec("power", exponent=0.4, shift=2.0)]
        h = 1e-4
        for U in specs:
            for x in (0.5, 1.0, 3.0):
                up = eval_utility(U, x + h)
                mid = eval_utility(U, x)
                dn = eval_utility(U, x - h)
                d1 = (up - dn) / (2 * h)
                d2 = (up - 2 * mid + dn) / h**2
                assert math.isclose(arrow_pratt(U, x), -d2 / d1, rel_tol=2e-4), (U, x)


class TestCertaintyEquivalent:
    def test_linear_is_mean(self):
        X = DiscreteDist([0.0, 1.0, 4.0], [0.25, 0.25, 0.5])
        assert math.isclose(certainty_equivalent(LINEAR, X), X.mean(), rel_tol=1e-15)

    def test_constancy(self):
        for U in (LINEAR, EXP1, LOG0, POW_HALF):
            m = 2.75
            point = DiscreteDist([m], [1.0])
            assert abs(certainty_equivalent(U, point) - m) < 1e-12

    def test_exponential_uniform_01(self):
        # (1/gamma) ln E e^{gamma X} with X uniform on {0, 1}, gamma=-1.
        X = uniform_on([0.0, 1.0])
        expected = -math.log((1.0 + math.exp(-1.0)) / 2.0)
        got = certainty_equivalent(EXP1, X)
        assert math.isclose(got, expected, rel_tol=1e-14)
        assert math.isclose(got, 0.379885, abs_tol=5e-7)

    def test_jensen_bound(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = rng.integers(2, 6)
            atoms = rng.uniform(0.1, 5.0, n)
            w = rng.dirichlet(np.ones(n))
            X = DiscreteDist(atoms, w / w.sum() if abs(w.sum() - 1) > 0 else w)
            for U in (LINEAR, EXP1, EXP2, LOG0, POW_HALF):
                assert certainty_equivalent(U, X) <= X.mean() + 1e-12

    def test_monotone_in_first_order_dominance(self):
        # Same atom grid, CDF of Y below CDF of X pointwise.
        atoms = [0.0, 1.0, 2.0, 3.0]
        X = DiscreteDist(atoms, [0.4, 0.3, 0.2, 0.1])
        Y = DiscreteDist(atoms, [0.1, 0.2, 0.3, 0.4])
        cdf_x = np.cumsum(X.weights)
        cdf_y = np.cumsum(Y.weights)
        assert np.all(cdf_y <= cdf_x + 1e-15)
        for U in (LINEAR, EXP1, EXP2):
            assert certainty_equivalent(U, X) <= certainty_equivalent(U, Y) + 1e-12

    def test_mean_preserving_spread_lowers_ce(self):
        # Split one atom into two with the same conditional mean; every
        # concave utility must weakly prefer the unsplit version.
        rng = np.random.default_rng(7)
        for _ in range(40):
            base_atoms = rng.uniform(0.5, 4.0, 3)
            w = rng.dirichlet(np.ones(3))
            X = DiscreteDist(base_atoms, w)
            spread = rng.uniform(0.05, 0.4)
            a0 = base_atoms[0]
            Y = DiscreteDist(
                [a0 - spread, a0 + spread, base_atoms[1], base_atoms[2]],
                [w[0] / 2, w[0] / 2, w[1], w[2]],
            )
            for U in (LINEAR, EXP1, EXP2, LOG0, POW_HALF):
                assert certainty_equivalent(U, Y) <= certainty_equivalent(U, X) + 1e-12

    def test_exponential_translation_invariance(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            atoms = rng.uniform(-2.0, 2.0, 4)
            w = rng.dirichlet(np.ones(4))
            X = DiscreteDist(atoms, w)
            m = float(rng.uniform(-3.0, 3.0))
            lhs = certainty_equivalent(EXP2, X.shifted(m))
            rhs = certainty_equivalent(EXP2, X) + m
            assert abs(lhs - rhs) < 1e-10

    def test_power_log_positive_homogeneity(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            atoms = rng.uniform(0.2, 3.0, 4)
            w = rng.dirichlet(np.ones(4))
            X = DiscreteDist(atoms, w)
            alpha = float(rng.uniform(0.3, 2.5))
            for U in (LOG0, POW_HALF, UtilitySpec("power", exponent=0.3)):
                lhs = certainty_equivalent(U, X.scaled(alpha))
                rhs = alpha * certainty_equivalent(U, X)
                assert abs(lhs - rhs) < 1e-10

    def test_extreme_gamma_stability(self):
        # Log-space evaluation keeps strongly risk-averse CEs finite.
        U = UtilitySpec("exponential", gamma=-80.0)
        X = uniform_on([0.0, 1.0, 10.0])
        got = certainty_equivalent(U, X)
        assert math.isfinite(got)
        # Dominated by the worst atom plus the log-probability correction.
        assert math.isclose(got, 0.0 + math.log(1 / 3) / -80.0, rel_tol=1e-9)

    def test_domain_error_propagates(self):
        with pytest.raises(DomainError):
            certainty_equivalent(LOG0, DiscreteDist([-1.0, 1.0], [0.5, 0.5]))


class TestEntropicNormal:
    def test_degenerate(self):
        assert entropic_ce_normal(-1.0, 0.0, 0.0) == 0.0

    def test_published_closed_form_values(self):
        assert entropic_ce_normal(-1.0, 2.0, 4.0) == 0.0
        assert entropic_ce_normal(-0.5, 1.0, 2.0) == 0.5

    def test_quadrature_agreement_grid(self):
        for mu in (-1.0, 0.0, 2.0):
            for sigma2 in (0.25, 1.0, 4.0, 9.0):
                for gamma in (-3.0, -1.0, -0.25):
                    X = normal_quadrature(mu, sigma2, nodes=64)
                    ce = certainty_equivalent(UtilitySpec("exponential", gamma=gamma), X)
                    assert abs(ce - entropic_ce_normal(gamma, mu, sigma2)) < 1e-6

    def test_rejects_negative_variance(self):
        with pytest.raises(ValueError):
            entropic_ce_normal(-1.0, 0.0, -1.0)


class TestCompareRiskAversion:
    def test_exponential_pair(self):
        rep = compare_risk_aversion(EXP2, EXP1, [0.0, 1.0, 5.0])
        assert rep.ordering == "U_more_averse"

    def test_equal(self):
        rep = compare_risk_aversion(LINEAR, LINEAR, [0.0, 1.0])
        assert rep.ordering == "equal"

    def test_incomparable_crossing(self):
        # 1/x crosses the constant 0.1 at x=10 inside the grid {1..20}.
        W = UtilitySpec("exponential", gamma=-0.1)
        rep = compare_risk_aversion(LOG0, W, list(range(1, 21)))
        assert rep.ordering == "incomparable"

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            compare_risk_aversion(LINEAR, EXP1, [])


class TestDiscreteDist:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            DiscreteDist([0.0, 1.0], [0.5, 0.6])

    def test_rejects_negative_weight(self):
        with pytest.raises(ValueError):
            DiscreteDist([0.0, 1.0], [1.5, -0.5])

    def test_rejects_nan_atom(self):
        with pytest.raises(ValueError):
            DiscreteDist([float("nan")], [1.0])

    def test_duplicate_atoms_allowed(self):
        X = DiscreteDist([1.0, 1.0], [0.25, 0.75])
        assert X.mean() == 1.0


def test_exponential_utility_saturates_to_minus_infinity():
    # Deeply negative wealth under gamma < 0 would overflow exp; the
    # correct limiting value is -inf, not an exception.
    u = UtilitySpec("exponential", gamma=-1.0)
    assert eval_utility(u, -1000.0) == -math.inf
    assert eval_utility(u, -709.0) < -1e300
