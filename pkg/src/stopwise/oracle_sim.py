"""Independent verification of the dynamic-programming solvers.

Two checks that share no code with the solvers they audit:

    brute_force_value   exact optimum over every adapted stopping rule,
                        computed on the raw history tree with joint
                        hidden-state measures (no beliefs, no
                        memoization). When the rule space is small
                        enough every rule is evaluated explicitly;
                        otherwise the optimum comes from a backward
                        sweep over histories and the report says so.
    monte_carlo_eval    seeded simulation of a policy, averaging
                        realized utility; counter-based RNG (numpy
                        Philox) so runs reproduce across platforms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError
from .stopping_core import PartiallyObservableModel, PolicyTree
from .utility import UtilitySpec, eval_utility

DEFAULT_PATH_BUDGET = 100_000
DEFAULT_RULE_BUDGET = 100_000


@dataclass(frozen=True)
class BruteForceReport:
    value: float
    best_rule: dict
    rules_examined: int
    enumerated: bool
    path_count: int


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int


def _encode_house(model):
    """House model -> synthetic-start encoding, or None if `model` is
    not a finite house model. Imported lazily to keep this module the
    dependency root of the verification stack."""
    try:
        from .house_selling import HouseModel, encode_as_po
    except ImportError:
        return None
    if not isinstance(model, HouseModel):
        return None
    return encode_as_po(model)


class _HistNode:
    __slots__ = ("history", "ix", "alpha", "s", "children")

    def __init__(self, history, ix, alpha, s):
        self.history = history
        self.ix = ix
        self.alpha = alpha
        self.s = s
        self.children = []


def _build_history_tree(model: PartiallyObservableModel, horizon: int, path_budget: int):
    """Expand all positive-probability observation paths, carrying the
    unnormalized hidden-state measure whose total is the path mass."""
    q = model.kernel_array
    labels = model.observable_states
    leaves = 0

    def build(history, ix, alpha, s, depth):
        nonlocal leaves
        node = _HistNode(history, ix, alpha, s)
        if depth == horizon:
            leaves += 1
            if leaves > path_budget:
                raise BudgetExceededError(
                    f"observation paths exceed the budget of {path_budget}"
                )
            return node
        joint = np.tensordot(alpha, q[ix], axes=1)
        s_next = s + model.run_reward[ix]
        for jx in range(len(labels)):
            mass = joint[jx].sum()
            if mass <= 0.0:
                continue
            node.children.append(
                build(history + (labels[jx],), jx, joint[jx], s_next, depth + 1)
            )
        return node

    prior = np.asarray(model.prior_weights, dtype=float)
    root = build((model.start_state,), model.start_index, prior, 0.0, 0)
    return root, leaves


def _stop_contribution(model, utility, node) -> float:
    mass = float(node.alpha.sum())
    return mass * eval_utility(utility, model.stop_reward[node.ix] + node.s)


def brute_force_value(
    model: PartiallyObservableModel,
    utility: UtilitySpec,
    horizon: int,
    path_budget: int = DEFAULT_PATH_BUDGET,
    rule_budget: int = DEFAULT_RULE_BUDGET,
    root_forced_continue: bool = False,
) -> BruteForceReport:
    """Exact optimal expected utility over all adapted stopping rules.

    A rule assigns stop/continue to every internal observation history;
    the horizon forces a stop. Set `root_forced_continue` for models
    whose start state is a synthetic placeholder that must not be
    stopped in (the first real observation then carries the first
    decision).

    A finite-horizon house model may be passed directly; it is encoded
    through its synthetic-start form and the given horizon is the house
    horizon (the encoding adds the start step itself).
    """
    if not isinstance(model, PartiallyObservableModel):
        converted = _encode_house(model)
        if converted is None:
            raise TypeError(
                "model must be a PartiallyObservableModel or a finite "
                "house model"
            )
        return brute_force_value(
            converted,
            utility,
            horizon + 1,
            path_budget,
            rule_budget,
            root_forced_continue=True,
        )
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    if root_forced_continue and horizon == 0:
        raise ValueError("cannot force continuation with no steps to go")
    root, paths = _build_history_tree(model, horizon, path_budget)

    best_rule: dict = {}

    def sweep(node, depth):
        stop_c = _stop_contribution(model, utility, node)
        if depth == horizon:
            return stop_c
        cont_c = math.fsum(sweep(child, depth + 1) for child in node.children)
        if root_forced_continue and depth == 0:
            best_rule[node.history] = "continue"
            return cont_c
        decision = "stop" if stop_c >= cont_c else "continue"
        best_rule[node.history] = decision
        return max(stop_c, cont_c)

    optimum = sweep(root, 0)

    def count_rules(node, depth):
        if depth == horizon:
            return 1
        prod = 1
        for child in node.children:
            prod *= count_rules(child, depth + 1)
            if prod > rule_budget:
                break
        if root_forced_continue and depth == 0:
            return prod
        return 1 + prod

    n_rules = count_rules(root, 0)
    enumerated = n_rules <= rule_budget
    if enumerated:

        def enum(node, depth):
            stop_c = _stop_contribution(model, utility, node)
            if depth == horizon:
                return [stop_c]
            child_lists = [enum(child, depth + 1) for child in node.children]
            combos = [math.fsum(pick) for pick in itertools.product(*child_lists)]
            if root_forced_continue and depth == 0:
                return combos
            return [stop_c] + combos

        values = enum(root, 0)
        n_rules = len(values)
        optimum = max(optimum, max(values))

    return BruteForceReport(
        value=optimum,
        best_rule=best_rule,
        rules_examined=n_rules,
        enumerated=enumerated,
        path_count=paths,
    )


def enumerate_rule_values(
    model: PartiallyObservableModel,
    utility: UtilitySpec,
    horizon: int,
    path_budget: int = DEFAULT_PATH_BUDGET,
    root_forced_continue: bool = False,
) -> list[float]:
    """Exact value of every canonical adapted rule (test support)."""
    root, _ = _build_history_tree(model, horizon, path_budget)

    def enum(node, depth):
        stop_c = _stop_contribution(model, utility, node)
        if depth == horizon:
            return [stop_c]
        child_lists = [enum(child, depth + 1) for child in node.children]
        combos = [math.fsum(pick) for pick in itertools.product(*child_lists)]
        if root_forced_continue and depth == 0:
            return combos
        return [stop_c] + combos

    return enum(root, 0)


def evaluate_rule(
    model: PartiallyObservableModel,
    decide,
    utility: UtilitySpec,
    horizon: int,
    path_budget: int = DEFAULT_PATH_BUDGET,
) -> float:
    """Exact expected utility of an explicit rule. `decide` maps an
    observation history (tuple starting at the initial state) to
    'stop' or 'continue'; the horizon forces a stop."""
    root, _ = _build_history_tree(model, horizon, path_budget)

    def walk(node, depth):
        if depth == horizon or decide(node.history) == "stop":
            return _stop_contribution(model, utility, node)
        return math.fsum(walk(child, depth + 1) for child in node.children)

    return walk(root, 0)


def policy_decider(policy: PolicyTree):
    """Adapt a solved PolicyTree into a history -> decision callable."""

    def decide(history):
        node = policy.root
        if history[0] != node.state.observable:
            raise ValueError("history does not start at the initial state")
        for label in history[1:]:
            node = node.children[label]
        return node.decision

    return decide


def monte_carlo_eval(model, policy, samples: int, seed: int, utility=None) -> McEstimate:
    """Seeded policy simulation; the estimate is mean realized utility.

    For a PartiallyObservableModel with a PolicyTree, pass the utility
    the tree was solved under. House-selling models with reservation
    tables are dispatched to their own sampler.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if not isinstance(policy, PolicyTree):
        try:
            from .house_selling import ReservationTable, simulate_reservation_policy
        except ImportError:
            ReservationTable = None
        if ReservationTable is not None and isinstance(policy, ReservationTable):
            return simulate_reservation_policy(model, policy, samples, seed)
        raise TypeError(f"unsupported policy type {type(policy).__name__}")
    if utility is None:
        raise ValueError("utility is required when evaluating a policy tree")

    # Flatten the policy tree into arrays for a vectorized stage loop.
    label_index = {lab: i for i, lab in enumerate(model.observable_states)}
    n_obs = len(model.observable_states)
    nodes: list = []

    def register(node):
        nid = len(nodes)
        nodes.append(node)
        return nid

    register(policy.root)
    child_rows = []
    frontier = [0]
    while frontier:
        nid = frontier.pop()
        node = nodes[nid]
        row = np.full(n_obs, -1, dtype=np.int64)
        for label, child in node.children.items():
            cid = register(child)
            row[label_index[label]] = cid
            frontier.append(cid)
        child_rows.append((nid, row))
    child_ids = np.full((len(nodes), n_obs), -1, dtype=np.int64)
    for nid, row in child_rows:
        child_ids[nid] = row
    stop_now = np.array(
        [n.decision == "stop" or n.stage == policy.horizon for n in nodes]
    )
    stop_util = np.array(
        [
            eval_utility(
                utility,
                model.stop_reward[label_index[n.state.observable]] + n.state.accrued,
            )
            for n in nodes
        ]
    )

    rng = np.random.Generator(np.random.Philox(seed))
    q_flat = model.kernel_array.reshape(n_obs, len(model.hidden_states), -1)
    n_hidden = len(model.hidden_states)

    iy = rng.choice(n_hidden, size=samples, p=np.asarray(model.prior_weights))
    ix = np.full(samples, model.start_index, dtype=np.int64)
    node_id = np.zeros(samples, dtype=np.int64)
    values = np.empty(samples, dtype=float)
    active = np.ones(samples, dtype=bool)
    for _ in range(policy.horizon + 1):
        stopping = active & stop_now[node_id]
        values[stopping] = stop_util[node_id[stopping]]
        active &= ~stopping
        if not active.any():
            break
        idx = np.flatnonzero(active)
        rows = q_flat[ix[idx], iy[idx]]
        cum = np.cumsum(rows, axis=1)
        cum /= cum[:, -1:]
        draws = rng.random(len(idx))
        picks = (draws[:, None] < cum).argmax(axis=1)
        jx, jy = np.divmod(picks, n_hidden)
        ix[idx] = jx
        iy[idx] = jy
        node_id[idx] = child_ids[node_id[idx], jx]

    mean = float(values.mean())
    stderr = float(np.std(values, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return McEstimate(mean=mean, stderr=stderr, samples=samples, seed=seed)
