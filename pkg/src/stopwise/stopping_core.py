"""Risk-sensitive stopping for finite partially observable models.

The decision maker watches an observable chain whose transitions depend
on a hidden chain, collects a running reward per step while continuing,
and a terminal reward on stopping. The solver runs backward induction
on the augmented state (observable state, belief over the hidden state,
accumulated reward), expanding only histories reachable from the start
state instead of discretizing the belief simplex. Stopping is compared
through expected utility; ties go to stopping, so the induced rule is
the earliest optimal one.

`exp_value_iteration` is the exponential-utility shortcut: accumulated
reward factors out of the value as a multiplicative e^(gamma s) term,
leaving a table over (observable state, belief) only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BudgetExceededError
from .utility import WEIGHT_TOL, UtilitySpec, eval_utility

KEY_DECIMALS = 12
DEFAULT_NODE_BUDGET = 2_000_000


def _key_vec(values) -> tuple[float, ...]:
    return tuple(round(float(v), KEY_DECIMALS) for v in values)


def _key_scalar(v: float) -> float:
    return round(float(v), KEY_DECIMALS)


def _nested_tuple(value):
    if isinstance(value, list):
        return tuple(_nested_tuple(v) for v in value)
    return value


@dataclass(frozen=True)
class PartiallyObservableModel:
    """Joint chain on observable x hidden states with stop/run rewards.

    `kernel[i][j][k][l]` is the probability of moving to observable
    state k and hidden state l from observable i and hidden j. Rewards
    are indexed by observable state: `run_reward` accrues each time the
    decision maker continues out of a state, `stop_reward` is collected
    on stopping there.
    """

    observable_states: tuple
    hidden_states: tuple
    kernel: tuple
    run_reward: tuple[float, ...]
    stop_reward: tuple[float, ...]
    prior_weights: tuple[float, ...]
    start_state: object

    def __init__(
        self,
        observable_states,
        hidden_states,
        kernel,
        run_reward,
        stop_reward,
        prior_weights,
        start_state,
    ):
        xs = tuple(observable_states)
        ys = tuple(hidden_states)
        if not xs or not ys:
            raise ValueError("state spaces must be nonempty")
        arr = np.asarray(kernel, dtype=float)
        if arr.shape != (len(xs), len(ys), len(xs), len(ys)):
            raise ValueError(
                f"kernel shape {arr.shape} does not match "
                f"({len(xs)}, {len(ys)}, {len(xs)}, {len(ys)})"
            )
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("kernel entries must be finite and nonnegative")
        slice_sums = arr.reshape(len(xs), len(ys), -1).sum(axis=2)
        if np.max(np.abs(slice_sums - 1.0)) > WEIGHT_TOL:
            raise ValueError("each kernel slice must be a probability distribution")
        c = tuple(float(v) for v in run_reward)
        g = tuple(float(v) for v in stop_reward)
        if len(c) != len(xs) or len(g) != len(xs):
            raise ValueError("rewards must be indexed by observable state")
        w = tuple(float(v) for v in prior_weights)
        if len(w) != len(ys) or any(v < 0 for v in w):
            raise ValueError("prior must be a weight vector over hidden states")
        if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
            raise ValueError("prior weights do not sum to 1")
        if start_state not in xs:
            raise ValueError("start state is not an observable state")
        object.__setattr__(self, "observable_states", xs)
        object.__setattr__(self, "hidden_states", ys)
        object.__setattr__(self, "kernel", _nested_tuple(arr.tolist()))
        object.__setattr__(self, "run_reward", c)
        object.__setattr__(self, "stop_reward", g)
        object.__setattr__(self, "prior_weights", w)
        object.__setattr__(self, "start_state", start_state)

    @cached_property
    def kernel_array(self) -> np.ndarray:
        return np.asarray(self.kernel, dtype=float)

    @cached_property
    def start_index(self) -> int:
        return self.observable_states.index(self.start_state)

    @property
    def strictly_negative_cost(self) -> bool:
        return max(self.run_reward) < 0


def marginal_kernel(model: PartiallyObservableModel) -> np.ndarray:
    """Transition law of the observable state alone: entry [i, j, k] is
    the probability of observing k next from observable i, hidden j."""
    return model.kernel_array.sum(axis=3)


def check_integrability(model: PartiallyObservableModel, horizon: int) -> float:
    """Upper bound on collectable positive reward over any stopping
    rule: horizon * max positive run reward + max positive stop reward.
    Always finite for finite models; reported for diagnostics."""
    run_pos = max(max(0.0, v) for v in model.run_reward)
    stop_pos = max(max(0.0, v) for v in model.stop_reward)
    return horizon * run_pos + stop_pos


@dataclass(frozen=True)
class AugState:
    """One point of the augmented state space the solver works on."""

    observable: object
    belief: tuple[float, ...]
    accrued: float


@dataclass
class PolicyNode:
    stage: int
    state: AugState
    stop_value: float
    continue_value: float | None
    decision: str
    value: float
    children: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PolicyTree:
    """Stop/continue decisions on every reachable history node, with the
    stop and continuation values that produced them."""

    horizon: int
    root: PolicyNode


@dataclass(frozen=True)
class ValueReport:
    value: float
    stage_values: dict
    integrability_bound: float
    node_count: int


def value_iteration(
    model: PartiallyObservableModel,
    utility: UtilitySpec,
    horizon: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
    start_accrued: float = 0.0,
) -> tuple[ValueReport, PolicyTree]:
    """Solve the stopping problem exactly over the reachable tree.

    The value of a node with no steps left is the utility of stopping
    there; otherwise it is the larger of the stop utility and the
    predictive average of child values after the belief update.
    Raises BudgetExceededError once the number of distinct solver nodes
    passes `node_budget`, and DomainError if any reachable wealth falls
    outside the utility's domain.
    """
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    q = model.kernel_array
    n_obs = len(model.observable_states)
    memo: dict = {}
    visits = 0

    def solve(togo: int, ix: int, mu: np.ndarray, s: float):
        nonlocal visits
        key = (togo, ix, _key_vec(mu), _key_scalar(s))
        hit = memo.get(key)
        if hit is not None:
            return hit
        visits += 1
        if visits > node_budget:
            raise BudgetExceededError(
                f"reachable tree exceeds the node budget of {node_budget}"
            )
        stop_value = eval_utility(utility, model.stop_reward[ix] + s)
        if togo == 0:
            entry = (stop_value, stop_value, None, "stop")
        else:
            s_next = s + model.run_reward[ix]
            joint = np.tensordot(mu, q[ix], axes=1)
            pred = joint.sum(axis=1)
            acc = 0.0
            for jx in range(n_obs):
                if pred[jx] <= 0.0:
                    continue
                acc += pred[jx] * solve(togo - 1, jx, joint[jx] / pred[jx], s_next)[0]
            decision = "stop" if stop_value >= acc else "continue"
            entry = (max(stop_value, acc), stop_value, acc, decision)
        memo[key] = entry
        return entry

    prior = np.asarray(model.prior_weights, dtype=float)
    solve(horizon, model.start_index, prior, start_accrued)

    stage_values: dict = {}

    def build(stage: int, ix: int, mu: np.ndarray, s: float) -> PolicyNode:
        nonlocal visits
        togo = horizon - stage
        value, stop_value, cont_value, decision = memo[
            (togo, ix, _key_vec(mu), _key_scalar(s))
        ]
        label = model.observable_states[ix]
        node = PolicyNode(
            stage=stage,
            state=AugState(label, tuple(float(v) for v in mu), float(s)),
            stop_value=stop_value,
            continue_value=cont_value,
            decision=decision,
            value=value,
        )
        stage_values[(stage, label, _key_vec(mu), _key_scalar(s))] = value
        if togo > 0:
            visits += 1
            if visits > node_budget:
                raise BudgetExceededError(
                    f"reachable tree exceeds the node budget of {node_budget}"
                )
            joint = np.tensordot(mu, q[ix], axes=1)
            pred = joint.sum(axis=1)
            s_next = s + model.run_reward[ix]
            for jx in range(n_obs):
                if pred[jx] <= 0.0:
                    continue
                child_label = model.observable_states[jx]
                node.children[child_label] = build(
                    stage + 1, jx, joint[jx] / pred[jx], s_next
                )
        return node

    root = build(0, model.start_index, prior, start_accrued)
    report = ValueReport(
        value=root.value,
        stage_values=stage_values,
        integrability_bound=check_integrability(model, horizon),
        node_count=visits,
    )
    return report, PolicyTree(horizon=horizon, root=root)


@dataclass(frozen=True)
class ExpTable:
    """Exponential-utility value table: entries keyed by (steps to go,
    observable state, belief key) hold (value, stop value, continuation
    value, decision), all in the reward-free factorized form."""

    horizon: int
    gamma: float
    entries: dict
    root_value: float


def exp_value_iteration(
    model: PartiallyObservableModel,
    gamma: float,
    horizon: int,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> ExpTable:
    """Value iteration with the accumulated reward factored out.

    With exponential utility the value at accumulated reward s is
    e^(gamma s) times a function of (observable state, belief) alone;
    this computes that function. Decisions agree with value_iteration.
    """
    if not gamma < 0:
        raise ValueError("gamma must be negative")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    q = model.kernel_array
    n_obs = len(model.observable_states)
    memo: dict = {}
    visits = 0

    def solve(togo: int, ix: int, mu: np.ndarray):
        nonlocal visits
        key = (togo, model.observable_states[ix], _key_vec(mu))
        hit = memo.get(key)
        if hit is not None:
            return hit
        visits += 1
        if visits > node_budget:
            raise BudgetExceededError(
                f"reachable tree exceeds the node budget of {node_budget}"
            )
        stop_value = math.exp(gamma * model.stop_reward[ix]) / gamma
        if togo == 0:
            entry = (stop_value, stop_value, None, "stop")
        else:
            joint = np.tensordot(mu, q[ix], axes=1)
            pred = joint.sum(axis=1)
            acc = 0.0
            for jx in range(n_obs):
                if pred[jx] <= 0.0:
                    continue
                acc += pred[jx] * solve(togo - 1, jx, joint[jx] / pred[jx])[0]
            cont_value = math.exp(gamma * model.run_reward[ix]) * acc
            decision = "stop" if stop_value >= cont_value else "continue"
            entry = (max(stop_value, cont_value), stop_value, cont_value, decision)
        memo[key] = entry
        return entry

    root = solve(horizon, model.start_index, np.asarray(model.prior_weights, dtype=float))
    return ExpTable(horizon=horizon, gamma=gamma, entries=memo, root_value=root[0])


def extract_stopping_time(policy: PolicyTree, realized_history) -> int:
    """First stage at which the policy stops along a realized path.

    `realized_history` lists observable states from stage 0 on, starting
    with the model's initial state. The history only needs to be long
    enough to reach the first stop decision (the horizon cap counts).
    """
    seq = list(realized_history)
    if not seq:
        raise ValueError("history must contain at least the initial state")
    node = policy.root
    if seq[0] != node.state.observable:
        raise ValueError("history does not start at the model's initial state")
    stage = 0
    while True:
        if node.decision == "stop" or stage == policy.horizon:
            return stage
        stage += 1
        if stage >= len(seq):
            raise ValueError("history ends before the policy stops")
        child = node.children.get(seq[stage])
        if child is None:
            raise ValueError(
                f"transition to {seq[stage]!r} at stage {stage} has zero probability"
            )
        node = child
