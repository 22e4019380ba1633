"""Tests for the brute-force and Monte Carlo verification tools."""

from dataclasses import replace

import numpy as np
import pytest

from stopwise.errors import BudgetExceededError
from stopwise.oracle_sim import (
    brute_force_value,
    enumerate_rule_values,
    monte_carlo_eval,
)
from stopwise.stopping_core import PartiallyObservableModel, value_iteration
from stopwise.utility import UtilitySpec, eval_utility

LINEAR = UtilitySpec("linear")
EXP1 = UtilitySpec("exponential", gamma=-1.0)


def iid_offer_model(atoms, probs, cost):
    """Offers drawn iid from a known distribution; a synthetic start
    state precedes the first offer and must never be stopped in."""
    states = ("start",) + tuple(atoms)
    n = len(states)
    kernel = np.zeros((n, 1, n, 1))
    for i in range(n):
        for j, p in enumerate(probs):
            kernel[i, 0, j + 1, 0] = p
    return PartiallyObservableModel(
        observable_states=states,
        hidden_states=("known",),
        kernel=kernel,
        run_reward=(0.0,) + (-cost,) * len(atoms),
        stop_reward=(-1000.0,) + tuple(atoms),
        prior_weights=(1.0,),
        start_state="start",
    )


def random_model(rng, n_obs, n_hidden):
    kernel = rng.random((n_obs, n_hidden, n_obs, n_hidden)) ** 2 + 0.01
    kernel /= kernel.reshape(n_obs, n_hidden, -1).sum(axis=2)[:, :, None, None]
    prior = rng.random(n_hidden) + 0.1
    prior /= prior.sum()
    return PartiallyObservableModel(
        observable_states=tuple(range(n_obs)),
        hidden_states=tuple(range(n_hidden)),
        kernel=kernel,
        run_reward=tuple(rng.uniform(-0.4, 0.1, n_obs)),
        stop_reward=tuple(rng.uniform(-0.3, 1.0, n_obs)),
        prior_weights=tuple(prior),
        start_state=0,
    )


class TestBruteForce:
    def test_zero_horizon(self):
        rng = np.random.default_rng(20)
        model = random_model(rng, 2, 2)
        report = brute_force_value(model, EXP1, 0)
        assert report.value == pytest.approx(
            eval_utility(EXP1, model.stop_reward[0]), abs=1e-15
        )
        assert report.rules_examined == 1
        assert report.path_count == 1
        assert report.enumerated

    def test_four_rule_coin_example(self):
        # Two 0/1 offers, fair coin, cost 0.1 per rejection, linear
        # utility. The four adapted rules value to 0.5, 0.2, 0.7, 0.4;
        # the best continues only on a zero first offer.
        model = iid_offer_model((0.0, 1.0), (0.5, 0.5), 0.1)
        report = brute_force_value(model, LINEAR, 2, root_forced_continue=True)
        assert report.enumerated
        assert report.rules_examined == 4
        assert report.value == pytest.approx(0.7, abs=1e-12)
        values = enumerate_rule_values(model, LINEAR, 2, root_forced_continue=True)
        assert sorted(values) == pytest.approx([0.2, 0.4, 0.5, 0.7], abs=1e-12)
        assert report.best_rule[("start", 0.0)] == "continue"
        assert report.best_rule[("start", 1.0)] == "stop"

    def test_dominance_and_dp_agreement(self):
        rng = np.random.default_rng(21)
        model = random_model(rng, 2, 2)
        report = brute_force_value(model, EXP1, 3)
        assert report.enumerated
        values = enumerate_rule_values(model, EXP1, 3)
        assert max(values) == pytest.approx(report.value, abs=1e-12)
        assert all(v <= report.value + 1e-12 for v in values)
        dp, _ = value_iteration(model, EXP1, 3)
        assert dp.value == pytest.approx(report.value, abs=1e-12)

    def test_falls_back_to_sweep_when_rule_space_is_large(self):
        rng = np.random.default_rng(22)
        model = random_model(rng, 3, 2)
        report = brute_force_value(model, LINEAR, 4)
        assert not report.enumerated
        assert report.rules_examined > 100_000
        dp, _ = value_iteration(model, LINEAR, 4)
        assert dp.value == pytest.approx(report.value, abs=1e-12)

    def test_path_budget_enforced(self):
        rng = np.random.default_rng(23)
        model = random_model(rng, 3, 2)
        with pytest.raises(BudgetExceededError):
            brute_force_value(model, LINEAR, 4, path_budget=10)

    def test_forced_continue_needs_a_step(self):
        model = iid_offer_model((0.0, 1.0), (0.5, 0.5), 0.1)
        with pytest.raises(ValueError):
            brute_force_value(model, LINEAR, 0, root_forced_continue=True)


class TestMonteCarlo:
    def test_deterministic_model_is_exact(self):
        kernel = np.zeros((2, 1, 2, 1))
        kernel[:, 0, 1, 0] = 1.0
        model = PartiallyObservableModel(
            (0, 1), ("y",), kernel, (1.0, 0.0), (0.0, 5.0), (1.0,), 0
        )
        report, policy = value_iteration(model, LINEAR, 1)
        est = monte_carlo_eval(model, policy, samples=500, seed=7, utility=LINEAR)
        assert est.mean == pytest.approx(report.value, abs=1e-12)
        assert est.stderr == 0.0
        assert est.samples == 500
        assert est.seed == 7

    def test_same_seed_is_bit_identical(self):
        rng = np.random.default_rng(24)
        model = random_model(rng, 2, 2)
        model = replace(model, stop_reward=(-1.0,) + model.stop_reward[1:])
        _, policy = value_iteration(model, EXP1, 3)
        assert policy.root.decision == "continue"
        a = monte_carlo_eval(model, policy, samples=2000, seed=123, utility=EXP1)
        b = monte_carlo_eval(model, policy, samples=2000, seed=123, utility=EXP1)
        assert a == b
        c = monte_carlo_eval(model, policy, samples=2000, seed=124, utility=EXP1)
        assert c.mean != a.mean

    def test_concordance_with_dp_value(self):
        rng = np.random.default_rng(25)
        model = random_model(rng, 3, 2)
        model = replace(model, stop_reward=(-1.0,) + model.stop_reward[1:])
        report, policy = value_iteration(model, EXP1, 3)
        assert policy.root.decision == "continue"
        est = monte_carlo_eval(model, policy, samples=40_000, seed=11, utility=EXP1)
        assert abs(est.mean - report.value) <= 4.0 * est.stderr

    def test_input_validation(self):
        rng = np.random.default_rng(26)
        model = random_model(rng, 2, 2)
        _, policy = value_iteration(model, LINEAR, 2)
        with pytest.raises(ValueError):
            monte_carlo_eval(model, policy, samples=0, seed=1, utility=LINEAR)
        with pytest.raises(ValueError):
            monte_carlo_eval(model, policy, samples=10, seed=1)
        with pytest.raises(TypeError):
            monte_carlo_eval(model, "not a policy", samples=10, seed=1)