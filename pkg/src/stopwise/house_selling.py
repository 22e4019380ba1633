"""Sequential sale of an asset against iid offers with unknown law.

One offer arrives per stage; rejecting costs `cost` and reveals
information about the offer distribution through a Bayesian belief.
The optimal rule is a reservation policy: accept the current offer
exactly when it reaches a level that depends on the stage and the
current belief. This module computes those levels, exposes a
step-by-step advisor on top of them, and provides the verification
hooks (policy value, simulation, encoding into the general solver).

Two level recursions are implemented for exponential utility:

  * ``clipped``      backward induction in which the continuation value
                     at every future stage is again clipped at the then
                     current offer. This is the textbook dynamic
                     programming recursion and drives the theory-facing
                     checks (oracle equivalence, monotonicity,
                     infinite-horizon limits).
  * ``commitment``   the value of rejecting now and holding out for the
                     top offer over the remaining stages, accepting the
                     final offer if the top one never arrives. This is
                     the threshold an advisor quotes when asked "is a
                     low offer worth rejecting"; the rejection-count
                     bands are computed from it.

For finitely supported offers both recursions are exact over the
reachable beliefs. For exponential-mean offers with an Inverse-Gamma
prior, levels are stored on per-stage geometric grids in the sufficient
statistic and interpolated monotonically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import betaprime

from .belief import (
    Belief,
    Bernoulli,
    BetaBernoulli,
    DiscretePosterior,
    ExponentialMean,
    FiniteTable,
    InvGammaExp,
    OfferFamily,
    SecondOrderBeta,
    predictive,
    update,
)
from .errors import DomainError, InfeasibleObservationError, NonConvergenceError
from .oracle_sim import McEstimate
from .stopping_core import PartiallyObservableModel
from .utility import (
    DiscreteDist,
    UtilitySpec,
    certainty_equivalent,
    eval_inverse,
    eval_utility,
)

KEY_DECIMALS = 10
DEFAULT_GRID_NODES = 160
DEFAULT_QUAD_NODES = 128
DEFAULT_INFINITE_TOL = 1e-10
DEFAULT_ITERATION_CAP = 100_000
GRID_QUANTILE = 0.9999


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

def _family_top_offer(offers: OfferFamily):
    if isinstance(offers, (FiniteTable, Bernoulli)):
        return offers.top_offer
    return None


@dataclass(frozen=True)
class HouseModel:
    """Offer family, prior belief, per-rejection cost, utility, horizon.

    `horizon` is the index of the last offer: a horizon of N means N+1
    offers arrive at stages 0..N and the stage-N offer must be taken.
    `horizon=None` is the infinite-horizon problem and requires offers
    with bounded support.
    """

    offers: OfferFamily
    prior: Belief
    cost: float
    utility: UtilitySpec
    horizon: int | None

    def __post_init__(self) -> None:
        if not self.cost > 0:
            raise ValueError("rejection cost must be positive")
        if self.horizon is not None and (
            not isinstance(self.horizon, int) or self.horizon < 1
        ):
            raise ValueError("horizon must be a positive integer or None")
        self._check_pairing()
        self._check_domain()

    def _check_pairing(self) -> None:
        if isinstance(self.prior, BetaBernoulli):
            if not isinstance(self.offers, Bernoulli):
                raise ValueError("a Beta belief requires 0/1 offers")
        elif isinstance(self.prior, InvGammaExp):
            if not isinstance(self.offers, ExponentialMean):
                raise ValueError(
                    "an Inverse-Gamma belief requires exponential offers"
                )
        elif isinstance(self.prior, DiscretePosterior):
            if self.prior.likelihood != self.offers:
                raise ValueError(
                    "grid beliefs must carry the model's offer family "
                    "as their likelihood"
                )
        if self.horizon is None and _family_top_offer(self.offers) is None:
            raise ValueError(
                "infinite horizon requires offers with bounded support; "
                "exponential-mean offers are unbounded"
            )

    def _check_domain(self) -> None:
        if not self.utility.has_shift_domain:
            return
        if self.horizon is None:
            raise DomainError(
                "utilities with a bounded domain cannot absorb an "
                "unbounded run of rejection costs; use a finite horizon"
            )
        low = self._lowest_offer()
        worst = low - self.horizon * self.cost
        if not self.utility.contains(worst):
            raise DomainError(
                f"reachable wealth {worst} leaves the utility domain "
                f"(> {self.utility.domain_min()} required)"
            )

    def _lowest_offer(self) -> float:
        if isinstance(self.offers, FiniteTable):
            return min(self.offers.offer_atoms)
        if isinstance(self.offers, Bernoulli):
            return 0.0
        return 0.0

    @property
    def top_offer(self):
        return _family_top_offer(self.offers)

    @property
    def is_exponential(self) -> bool:
        return self.utility.family == "exponential"

    @property
    def gamma(self) -> float:
        if not self.is_exponential:
            raise ValueError("model utility is not exponential")
        return self.utility.gamma


def belief_key(mu: Belief) -> tuple:
    """Hashable, rounded identity of a belief for table keys."""
    if isinstance(mu, BetaBernoulli):
        return ("beta", round(mu.alpha, KEY_DECIMALS), round(mu.beta, KEY_DECIMALS))
    if isinstance(mu, InvGammaExp):
        return ("invgamma", round(mu.s, KEY_DECIMALS), mu.n)
    return ("grid",) + tuple(round(w, KEY_DECIMALS) for w in mu.weights)


def entropic_ce_stable(gamma: float, values, weights) -> float:
    """Certainty equivalent (1/gamma) ln E exp(gamma X) for a discrete
    law, written via expm1/log1p so it stays accurate as gamma -> 0-.

    The naive form loses all signal once |gamma| is small against the
    spread of the values; anchoring at the minimum value keeps every
    exponent in [gamma*(max-min), 0] and the remainder is a relative
    correction that expm1/log1p carry at full precision. When the
    spread is large against 1/|gamma| that correction saturates at -1
    and cancellation eats the signal instead, so the sum of plain
    exponentials (all nonnegative, no cancellation) takes over.
    """
    if not gamma < 0:
        raise ValueError("gamma must be negative")
    vals = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must have positive total mass")
    w = w / total
    mask = w > 0
    vals = vals[mask]
    w = w[mask]
    anchor = vals.min()
    scaled = gamma * (vals - anchor)
    u = float(np.dot(w, np.expm1(scaled)))
    if u > -0.5:
        return anchor + math.log1p(u) / gamma
    m = float(np.dot(w, np.exp(scaled)))
    return anchor + math.log(m) / gamma


def _discrete_law(mu: Belief) -> DiscreteDist:
    law = predictive(mu)
    if not isinstance(law, DiscreteDist):
        raise TypeError("belief does not have finitely supported offers")
    return law


# ---------------------------------------------------------------------------
# Level solvers: finitely supported offers
# ---------------------------------------------------------------------------

class _GeneralLevelSolver:
    """Backward recursion for arbitrary utilities, indexed by stage.

    The level at stage n makes the decision maker indifferent between
    taking the current offer (wealth level - n*cost) and the optimally
    clipped continuation, both measured through the utility shifted by
    the costs already sunk.
    """

    def __init__(self, model: HouseModel, horizon: int):
        self.model = model
        self.horizon = horizon
        self.memo: dict = {}

    def level(self, stage: int, mu: Belief) -> float:
        if stage >= self.horizon:
            return -math.inf
        key = (stage, belief_key(mu))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        u = self.model.utility
        c = self.model.cost
        law = _discrete_law(mu)
        acc = 0.0
        for x, p in zip(law.atoms, law.weights):
            if p <= 0.0:
                continue
            if stage == self.horizon - 1:
                best = x
            else:
                best = max(x, self.level(stage + 1, update(mu, x)))
            acc += p * eval_utility(u, best - (stage + 1) * c)
        value = eval_inverse(u, acc) + stage * c
        self.memo[key] = value
        return value


class _ExpLevelSolver:
    """Steps-to-go recursion for exponential utility.

    Sunk costs shift wealth additively and exponential certainty
    equivalents are translation invariant, so the level depends only on
    the belief and the number of offers still to come. `clip=True` is
    the optimal continuation (stop whenever a future offer beats its
    own level); `clip=False` commits to rejecting everything below the
    family's top offer until the final stage.
    """

    def __init__(self, model: HouseModel, clip: bool):
        self.model = model
        self.gamma = model.gamma
        self.clip = clip
        self.top = model.top_offer
        if not clip and self.top is None:
            raise ValueError(
                "commitment levels need a top offer to hold out for"
            )
        self.memo: dict = {}

    def level(self, togo: int, mu: Belief) -> float:
        if togo <= 0:
            return -math.inf
        key = (togo, belief_key(mu))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        law = _discrete_law(mu)
        vals = []
        probs = []
        for x, p in zip(law.atoms, law.weights):
            if p <= 0.0:
                continue
            if togo == 1:
                v = x
            elif self.clip:
                v = max(x, self.level(togo - 1, update(mu, x)))
            elif x >= self.top:
                v = x
            else:
                v = self.level(togo - 1, update(mu, x))
            vals.append(v)
            probs.append(p)
        value = -self.model.cost + entropic_ce_stable(self.gamma, vals, probs)
        self.memo[key] = value
        return value


class _StationaryExpSolver:
    """Infinite-horizon levels as the increasing limit of the
    steps-to-go recursion, evaluated per queried belief."""

    def __init__(self, model: HouseModel, tol: float, cap: int):
        self.base = _ExpLevelSolver(model, clip=True)
        self.tol = tol
        self.cap = cap
        self.memo: dict = {}

    def level(self, mu: Belief) -> float:
        key = belief_key(mu)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        prev = self.base.level(1, mu)
        increment = math.inf
        for togo in range(2, self.cap + 2):
            cur = self.base.level(togo, mu)
            increment = abs(cur - prev)
            prev = cur
            if increment < self.tol:
                self.memo[key] = cur
                return cur
        raise NonConvergenceError(
            f"stationary level did not converge within {self.cap} "
            f"iterations (last increment {increment:.3e})",
            last_increment=increment,
        )


class _StationaryGeneralSolver:
    """Infinite-horizon levels for non-exponential utilities: increase
    the horizon until the stage-n level stabilizes."""

    def __init__(self, model: HouseModel, tol: float, cap: int):
        self.model = model
        self.tol = tol
        self.cap = cap
        self.memo: dict = {}

    def level(self, stage: int, mu: Belief) -> float:
        key = (stage, belief_key(mu))
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        prev = _GeneralLevelSolver(self.model, stage + 1).level(stage, mu)
        increment = math.inf
        for horizon in range(stage + 2, stage + 2 + self.cap):
            cur = _GeneralLevelSolver(self.model, horizon).level(stage, mu)
            increment = abs(cur - prev)
            prev = cur
            if increment < self.tol:
                self.memo[key] = cur
                return cur
        raise NonConvergenceError(
            f"stationary level did not converge within {self.cap} "
            f"horizon extensions (last increment {increment:.3e})",
            last_increment=increment,
        )


# ---------------------------------------------------------------------------
# Level solver: exponential-mean offers on a sufficient-statistic grid
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gauss_legendre_01(nodes: int):
    t, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (t + 1.0), 0.5 * w


def _sob_density(law: SecondOrderBeta, xs: np.ndarray) -> np.ndarray:
    return law.a_post * law.scale**law.a_post / (xs + law.scale) ** (law.a_post + 1)


def _split_quadrature(law: SecondOrderBeta, split: float | None, nodes: int):
    """Nodes and probability weights for the predictive law, optionally
    split at a kink so each piece is smooth."""
    t, w = _gauss_legendre_01(nodes)
    if split is None or split <= 0.0:
        scale = law.scale
        xs = scale * t / (1.0 - t)
        ws = w * scale / (1.0 - t) ** 2 * _sob_density(law, xs)
        return xs, ws
    xs1 = split * t
    ws1 = split * w * _sob_density(law, xs1)
    tail_scale = law.scale + split
    xs2 = split + tail_scale * t / (1.0 - t)
    ws2 = w * tail_scale / (1.0 - t) ** 2 * _sob_density(law, xs2)
    return np.concatenate([xs1, xs2]), np.concatenate([ws1, ws2])


class _IgeLevelSolver:
    """Levels for Inverse-Gamma / exponential offers on per-stage grids.

    The belief is the pair (total observed, count); at a fixed count the
    level is an increasing function of the total, stored on a geometric
    grid and interpolated piecewise linearly. Grids are keyed by
    (steps to go, count) so ordered-information comparisons across
    different counts stay available.
    """

    def __init__(
        self,
        model: HouseModel,
        horizon: int,
        grid_nodes: int = DEFAULT_GRID_NODES,
        quad_nodes: int = DEFAULT_QUAD_NODES,
    ):
        self.model = model
        self.horizon = horizon
        self.grid_nodes = grid_nodes
        self.quad_nodes = quad_nodes
        self.prior: InvGammaExp = model.prior
        self.grids: dict = {}

    def _s_grid(self, count: int) -> np.ndarray:
        if count == 0:
            return np.array([0.0])
        top = float(
            betaprime.ppf(GRID_QUANTILE, count, self.prior.a, scale=self.prior.b)
        )
        inner = np.geomspace(top * 1e-3, top, self.grid_nodes - 1)
        return np.concatenate([[0.0], inner])

    def _belief(self, s: float, count: int) -> InvGammaExp:
        return InvGammaExp(self.prior.a, self.prior.b, self.prior.s + s, self.prior.n + count)

    def _find_kink(self, next_grid, next_levels, s: float) -> float | None:
        """Offer value at which taking the offer overtakes the next-stage
        level; None when the offer always dominates."""

        def gap(x: float) -> float:
            return float(np.interp(s + x, next_grid, next_levels)) - x

        if gap(0.0) <= 0.0:
            return None
        hi = max(1.0, float(next_levels[-1]))
        for _ in range(200):
            if gap(hi) < 0.0:
                break
            hi *= 2.0
        else:
            return None
        lo = 0.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if gap(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def grid(self, togo: int, count: int):
        key = (togo, count)
        hit = self.grids.get(key)
        if hit is not None:
            return hit
        s_nodes = self._s_grid(count)
        if togo == 1:
            nxt = None
        else:
            nxt = self.grid(togo - 1, count + 1)
        levels = np.empty_like(s_nodes)
        for i, s in enumerate(s_nodes):
            levels[i] = self._level_at(togo, count, float(s), nxt)
        result = (s_nodes, levels)
        self.grids[key] = result
        return result

    def _level_at(self, togo, count, s, nxt) -> float:
        mu = self._belief(s, count)
        law = predictive(mu)
        if togo == 1:
            xs, ws = _split_quadrature(law, None, self.quad_nodes)
            vals = xs
        else:
            next_grid, next_levels = nxt
            kink = self._find_kink(next_grid, next_levels, s)
            xs, ws = _split_quadrature(law, kink, self.quad_nodes)
            vals = np.maximum(xs, np.interp(s + xs, next_grid, next_levels))
        model = self.model
        if model.is_exponential:
            return -model.cost + entropic_ce_stable(model.gamma, vals, ws)
        stage = self.horizon - togo
        u = model.utility
        wealth = vals - (stage + 1) * model.cost
        util = _utility_array(u, wealth)
        target = float(np.dot(ws / ws.sum(), util))
        return eval_inverse(u, target) + stage * model.cost

    def level(self, stage: int, mu: InvGammaExp) -> float:
        if stage >= self.horizon:
            return -math.inf
        togo = self.horizon - stage
        count = mu.n - self.prior.n
        s = mu.s - self.prior.s
        s_nodes, levels = self.grid(togo, count)
        return float(np.interp(s, s_nodes, levels))


def _utility_array(u: UtilitySpec, wealth: np.ndarray) -> np.ndarray:
    if u.family == "linear":
        return wealth
    if u.family == "exponential":
        return np.exp(u.gamma * wealth) / u.gamma
    if np.any(wealth <= u.domain_min()):
        raise DomainError("wealth leaves the utility domain")
    if u.family == "log":
        return np.log(wealth + u.shift)
    return (wealth + u.shift) ** u.exponent


# ---------------------------------------------------------------------------
# Reservation tables
# ---------------------------------------------------------------------------

class ReservationTable:
    """Stage- and belief-indexed acceptance thresholds.

    `level(stage, belief)` returns the threshold the current offer must
    reach to be accepted; past the final stage it is -inf (the last
    offer is always taken). `kind` records which recursion produced the
    table: 'clipped', 'commitment', or 'stationary'.
    """

    def __init__(self, model: HouseModel, kind: str, solver, horizon: int | None):
        self.model = model
        self.kind = kind
        self.horizon = horizon
        self._solver = solver

    def level(self, stage: int, mu: Belief) -> float:
        if stage < 0:
            raise ValueError("stage must be nonnegative")
        if self.horizon is not None and stage >= self.horizon:
            return -math.inf
        solver = self._solver
        if isinstance(solver, _GeneralLevelSolver):
            return solver.level(stage, mu)
        if isinstance(solver, _ExpLevelSolver):
            return solver.level(self.horizon - stage, mu)
        if isinstance(solver, _StationaryExpSolver):
            return solver.level(mu)
        if isinstance(solver, _StationaryGeneralSolver):
            return solver.level(stage, mu)
        return solver.level(stage, mu)

    def level_by_togo(self, togo: int, mu: Belief) -> float:
        """Threshold with `togo` offers still to come (current one
        included); only meaningful for time-shift-invariant tables."""
        solver = self._solver
        if isinstance(solver, _ExpLevelSolver):
            return solver.level(togo, mu)
        if isinstance(solver, _StationaryExpSolver):
            return solver.level(mu)
        if isinstance(solver, _IgeLevelSolver):
            count = mu.n - solver.prior.n
            s_nodes, levels = solver.grid(togo, count)
            return float(np.interp(mu.s - solver.prior.s, s_nodes, levels))
        raise TypeError("table is not steps-to-go indexed")

    def rows(self):
        """Materialized (stage, belief key, level) rows for export."""
        solver = self._solver
        out = []
        if isinstance(solver, _GeneralLevelSolver):
            for (stage, key), level in sorted(solver.memo.items(), key=repr):
                out.append((stage, key, level))
        elif isinstance(solver, _ExpLevelSolver):
            for (togo, key), level in sorted(solver.memo.items(), key=repr):
                stage = None if self.horizon is None else self.horizon - togo
                out.append((stage if stage is not None else -togo, key, level))
        elif isinstance(solver, _StationaryExpSolver):
            for key, level in sorted(solver.memo.items(), key=repr):
                out.append((0, key, level))
        elif isinstance(solver, _StationaryGeneralSolver):
            for (stage, key), level in sorted(solver.memo.items(), key=repr):
                out.append((stage, key, level))
        elif isinstance(solver, _IgeLevelSolver):
            for (togo, count), (s_nodes, levels) in sorted(solver.grids.items()):
                for s, lvl in zip(s_nodes, levels):
                    out.append(
                        (
                            self.horizon - togo if self.horizon else -togo,
                            ("invgamma", round(float(s), KEY_DECIMALS), count),
                            float(lvl),
                        )
                    )
        return out


def _eager_fill(model: HouseModel, table: ReservationTable) -> None:
    """Populate the table over every belief reachable from the prior."""
    if isinstance(model.prior, InvGammaExp):
        table.level(0, model.prior)
        return
    seen = set()

    def walk(stage, mu):
        key = (stage, belief_key(mu))
        if key in seen or stage >= model.horizon:
            return
        seen.add(key)
        table.level(stage, mu)
        law = _discrete_law(mu)
        for x, p in zip(law.atoms, law.weights):
            if p > 0.0:
                walk(stage + 1, update(mu, x))

    walk(0, model.prior)


def reservation_levels_finite(model: HouseModel) -> ReservationTable:
    """Acceptance thresholds for a finite horizon, any utility family.

    Exact over the beliefs reachable from the prior for finitely
    supported offers; grid-interpolated in the observed total for
    exponential-mean offers.
    """
    if model.horizon is None:
        raise ValueError("use reservation_level_infinite for horizon=None")
    if isinstance(model.prior, InvGammaExp):
        solver = _IgeLevelSolver(model, model.horizon)
    else:
        solver = _GeneralLevelSolver(model, model.horizon)
    table = ReservationTable(model, "clipped", solver, model.horizon)
    _eager_fill(model, table)
    return table


def reservation_levels_exp(model: HouseModel) -> ReservationTable:
    """Thresholds for exponential utility, indexed by steps to go."""
    if model.horizon is None:
        raise ValueError("use reservation_level_infinite for horizon=None")
    if not model.is_exponential:
        raise ValueError("exponential-utility recursion needs an exponential utility")
    if isinstance(model.prior, InvGammaExp):
        solver = _IgeLevelSolver(model, model.horizon)
    else:
        solver = _ExpLevelSolver(model, clip=True)
    table = ReservationTable(model, "clipped", solver, model.horizon)
    _eager_fill(model, table)
    return table


def commitment_levels(model: HouseModel) -> ReservationTable:
    """Hold-out thresholds: the certainty equivalent of rejecting now
    and waiting for the top offer, taking the last offer if it never
    arrives. Requires exponential utility and a bounded top offer."""
    if model.horizon is None:
        raise ValueError("commitment levels are finite-horizon objects")
    if not model.is_exponential:
        raise ValueError("commitment levels require exponential utility")
    solver = _ExpLevelSolver(model, clip=False)
    table = ReservationTable(model, "commitment", solver, model.horizon)
    _eager_fill(model, table)
    return table


def reservation_level_infinite(
    model: HouseModel,
    tol: float = DEFAULT_INFINITE_TOL,
    cap: int = DEFAULT_ITERATION_CAP,
) -> ReservationTable:
    """Stationary thresholds for the infinite-horizon problem, computed
    as the increasing limit of finite-horizon levels at each queried
    belief. Raises NonConvergenceError with the last increment if the
    limit is not reached within `cap` extensions."""
    if model.horizon is not None:
        raise ValueError("model horizon must be None for the infinite problem")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    if model.is_exponential:
        solver = _StationaryExpSolver(model, tol, cap)
    else:
        solver = _StationaryGeneralSolver(model, tol, cap)
    table = ReservationTable(model, "stationary", solver, None)
    table.level(0, model.prior)
    return table


def behavior_table(model: HouseModel) -> ReservationTable:
    """The table the advisor quotes: commitment levels where they are
    defined (exponential utility, bounded top offer), otherwise the
    clipped recursion."""
    if model.horizon is None:
        return reservation_level_infinite(model)
    if model.is_exponential and model.top_offer is not None:
        return commitment_levels(model)
    return reservation_levels_finite(model)


def decision_level(
    table: ReservationTable, stage: int, mu: Belief, offer: float
) -> float:
    """Threshold an arriving offer is actually compared against.

    The clipped and stationary recursions define each stage's level at
    the belief that already includes the offer under decision (their
    continuation terms integrate the law of the offer after it), so the
    offer is folded into the belief before the lookup. Hold-out tables
    keep the pre-offer belief instead; that is the convention the
    published rejection counts follow.
    """
    if table.kind == "commitment":
        return table.level(stage, mu)
    return table.level(stage, update(mu, offer))


# ---------------------------------------------------------------------------
# Rejection counts and risk-aversion bands
# ---------------------------------------------------------------------------

def _bernoulli_zero_path(model: HouseModel):
    """Beliefs along the all-zeros trajectory, prior first."""
    out = [model.prior]
    for _ in range(model.horizon):
        out.append(update(out[-1], 0.0))
    return out


def _with_gamma(model: HouseModel, gamma: float) -> HouseModel:
    if gamma >= 0:
        raise ValueError("gamma must be negative")
    return HouseModel(
        offers=model.offers,
        prior=model.prior,
        cost=model.cost,
        utility=UtilitySpec("exponential", gamma=gamma),
        horizon=model.horizon,
    )


def rejection_count(model: HouseModel, gamma: float | None = None) -> int:
    """Number of consecutive zero offers rejected before one is taken.

    Follows the all-zeros trajectory of a 0/1 offer model and returns
    the first stage whose hold-out level drops to zero or below (a zero
    offer is then worth accepting), capped by the horizon.
    """
    if _family_top_offer(model.offers) != 1.0:
        raise ValueError("rejection counts are defined for 0/1 offer models")
    work = model if gamma is None else _with_gamma(model, gamma)
    if not work.is_exponential:
        raise ValueError("rejection counts require exponential utility")
    solver = _ExpLevelSolver(work, clip=False)
    beliefs = _bernoulli_zero_path(work)
    for stage in range(work.horizon):
        level = solver.level(work.horizon - stage, beliefs[stage])
        if level <= 0.0:
            return stage
    return work.horizon


def gamma_thresholds(
    model: HouseModel,
    k: int,
    bracket: tuple[float, float],
    tol: float = 1e-4,
) -> float:
    """Risk-aversion value where the rejection count switches from k-1
    to k, located by bisection inside `bracket` (both endpoints
    negative, lower one more risk averse)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    lo, hi = bracket
    if not (lo < hi < 0):
        raise ValueError("bracket must satisfy lo < hi < 0")
    count_lo = rejection_count(model, lo)
    count_hi = rejection_count(model, hi)
    if not (count_lo <= k - 1 and count_hi >= k):
        raise ValueError(
            f"bracket does not straddle the {k - 1}->{k} switch "
            f"(counts are {count_lo} and {count_hi})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rejection_count(model, mid) >= k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def rejection_bands(
    model: HouseModel,
    tol: float = 1e-4,
    scan_lo: float = -4.0,
    scan_hi: float = -1e-9,
    scan_points: int = 400,
):
    """Bands of the risk-aversion parameter with constant rejection
    count, as rows (band lower gamma, band upper gamma, count).

    Scans a log-spaced grid from `scan_lo` up to `scan_hi`, then
    bisects each detected switch to `tol`. Switches outside the scanned
    range are simply not reported.
    """
    grid = -np.geomspace(-scan_lo, -scan_hi, scan_points)
    counts = [rejection_count(model, float(g)) for g in grid]
    bands = []
    band_lo = float(grid[0])
    for i in range(1, len(grid)):
        if counts[i] == counts[i - 1]:
            continue
        for k in range(counts[i - 1] + 1, counts[i] + 1):
            switch = gamma_thresholds(
                model, k, (float(grid[i - 1]), float(grid[i])), tol
            )
            bands.append((band_lo, switch, k - 1))
            band_lo = switch
    bands.append((band_lo, float(grid[-1]), counts[-1]))
    return bands


# ---------------------------------------------------------------------------
# Lower-bound diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundReport:
    stage: int
    margins: tuple
    min_margin: float
    passed: bool


def check_lower_bound(
    model: HouseModel, table: ReservationTable, stage: int
) -> LowerBoundReport:
    """Checks that today's threshold is at least the certainty
    equivalent of tomorrow's (cost-adjusted) threshold under the
    predictive law, at every stored belief of the given stage.

    A reservation level can be bounded below by what the next level is
    worth before the next offer is seen; the margin is level minus that
    bound and must not be materially negative.
    """
    horizon = model.horizon
    if horizon is None or stage > horizon - 2:
        raise ValueError("stage must leave at least two offers ahead")
    beliefs = _stage_beliefs(model, stage)
    margins = []
    c = model.cost
    u = model.utility
    for mu in beliefs:
        lhs = table.level(stage, mu)
        law = _discrete_law(mu)
        next_levels = []
        probs = []
        for x, p in zip(law.atoms, law.weights):
            if p <= 0.0:
                continue
            next_levels.append(table.level(stage + 1, update(mu, x)) - (stage + 1) * c)
            probs.append(p)
        ce = certainty_equivalent(u, DiscreteDist(tuple(next_levels), tuple(probs)))
        rhs = stage * c + ce
        margins.append((belief_key(mu), lhs, rhs, lhs - rhs))
    min_margin = min(m[3] for m in margins)
    return LowerBoundReport(
        stage=stage,
        margins=tuple(margins),
        min_margin=min_margin,
        passed=min_margin >= -1e-10,
    )


def _stage_beliefs(model: HouseModel, stage: int):
    """Distinct beliefs reachable from the prior in `stage` updates."""
    current = {belief_key(model.prior): model.prior}
    for _ in range(stage):
        after = {}
        for mu in current.values():
            law = _discrete_law(mu)
            for x, p in zip(law.atoms, law.weights):
                if p <= 0.0:
                    continue
                nxt = update(mu, x)
                after[belief_key(nxt)] = nxt
        current = after
    return list(current.values())


# ---------------------------------------------------------------------------
# Advisor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdvisorState:
    """Immutable snapshot of an advice session.

    `level` is the threshold quoted before the NEXT offer arrives; for
    learning models the decision itself also accounts for what that
    offer reveals (see `advise`), so the quote is indicative. `advice`
    reflects the last offer processed (None before any offer). Rejected
    offers so far: `stage`; sunk cost: stage * model.cost.
    """

    model: HouseModel
    table: ReservationTable
    history: tuple[float, ...]
    belief: Belief
    stage: int
    level: float
    advice: str | None
    stopped: bool

    @property
    def accumulated_cost(self) -> float:
        return self.stage * self.model.cost

    @property
    def realized_wealth(self) -> float | None:
        if not self.stopped:
            return None
        return self.history[-1] - self.accumulated_cost


def make_advisor(model: HouseModel, table: ReservationTable | None = None) -> AdvisorState:
    if table is None:
        table = behavior_table(model)
    return AdvisorState(
        model=model,
        table=table,
        history=(),
        belief=model.prior,
        stage=0,
        level=table.level(0, model.prior),
        advice=None,
        stopped=False,
    )


def _offer_feasible(offers: OfferFamily, x: float) -> bool:
    return offers.feasible(x)


def advise(state: AdvisorState, offer: float) -> AdvisorState:
    """Process one offer: accept when it reaches its decision threshold
    (ties accept) or the horizon is exhausted, otherwise update the
    belief and quote the next threshold.

    For clipped and stationary tables the decision threshold is the
    level at the belief with the offer already folded in, matching the
    recursion that defines those tables. Hold-out tables compare
    against the quoted pre-offer level. Pure; returns a new state.
    """
    if state.stopped:
        raise ValueError("session already stopped")
    offer = float(offer)
    if not _offer_feasible(state.model.offers, offer):
        raise InfeasibleObservationError(
            f"offer {offer} is not feasible under the offer family"
        )
    horizon = state.model.horizon
    last_stage = horizon is not None and state.stage >= horizon
    if last_stage or offer >= decision_level(
        state.table, state.stage, state.belief, offer
    ):
        return AdvisorState(
            model=state.model,
            table=state.table,
            history=state.history + (offer,),
            belief=state.belief,
            stage=state.stage,
            level=state.level,
            advice="stop",
            stopped=True,
        )
    new_belief = update(state.belief, offer)
    new_stage = state.stage + 1
    return AdvisorState(
        model=state.model,
        table=state.table,
        history=state.history + (offer,),
        belief=new_belief,
        stage=new_stage,
        level=state.table.level(new_stage, new_belief),
        advice="continue",
        stopped=False,
    )


# ---------------------------------------------------------------------------
# Policy value, simulation, and the general-solver encoding
# ---------------------------------------------------------------------------

def policy_value(model: HouseModel, table: ReservationTable | None = None) -> float:
    """Expected utility of following the table's thresholds from the
    start, before the first offer arrives."""
    if model.horizon is None:
        raise ValueError("policy value is computed for finite horizons")
    if table is None:
        table = reservation_levels_finite(model)
    if isinstance(model.prior, InvGammaExp):
        return _policy_value_ige(model, table)
    horizon = model.horizon
    u = model.utility
    c = model.cost
    memo: dict = {}

    def value(stage, mu):
        key = (stage, belief_key(mu))
        hit = memo.get(key)
        if hit is not None:
            return hit
        law = _discrete_law(mu)
        acc = 0.0
        for x, p in zip(law.atoms, law.weights):
            if p <= 0.0:
                continue
            if stage >= horizon or x >= decision_level(table, stage, mu, x):
                acc += p * eval_utility(u, x - stage * c)
            else:
                acc += p * value(stage + 1, update(mu, x))
        memo[key] = acc
        return acc

    return value(0, model.prior)


def _policy_value_ige(model: HouseModel, table: ReservationTable) -> float:
    horizon = model.horizon
    solver = table._solver
    if not isinstance(solver, _IgeLevelSolver):
        raise TypeError("table does not index exponential-mean offers")
    u = model.utility
    c = model.cost
    quad = solver.quad_nodes
    value_grids: dict = {}

    def value_grid(stage):
        hit = value_grids.get(stage)
        if hit is not None:
            return hit
        count = stage
        s_nodes = solver._s_grid(count)
        vals = np.empty_like(s_nodes)
        if stage >= horizon:
            for i, s in enumerate(s_nodes):
                law = predictive(solver._belief(float(s), count))
                xs, ws = _split_quadrature(law, None, quad)
                util = _utility_array(u, xs - stage * c)
                vals[i] = float(np.dot(ws / ws.sum(), util))
        else:
            nxt = value_grid(stage + 1)
            # Level grid at the belief including the offer under
            # decision; the accept region is where the offer beats it.
            dec_nodes, dec_levels = solver.grid(horizon - stage, count + 1)
            for i, s in enumerate(s_nodes):
                law = predictive(solver._belief(float(s), count))
                boundary = solver._find_kink(dec_nodes, dec_levels, float(s))
                xs, ws = _split_quadrature(law, boundary, quad)
                accept = xs >= np.interp(float(s) + xs, dec_nodes, dec_levels)
                util_accept = _utility_array(u, xs - stage * c)
                next_s, next_v = nxt
                cont = np.interp(float(s) + xs, next_s, next_v)
                integrand = np.where(accept, util_accept, cont)
                vals[i] = float(np.dot(ws / ws.sum(), integrand))
        result = (s_nodes, vals)
        value_grids[stage] = result
        return result

    s_nodes, vals = value_grid(0)
    return float(vals[0])


def simulate_reservation_policy(
    model: HouseModel, table: ReservationTable, samples: int, seed: int
) -> McEstimate:
    """Seeded Monte Carlo of the threshold policy; the estimate is mean
    realized utility. Deterministic given the seed (Philox streams)."""
    if samples < 1:
        raise ValueError("need at least one sample")
    if model.horizon is None:
        raise ValueError("simulation needs a finite horizon")
    rng = np.random.Generator(np.random.Philox(seed))
    if isinstance(model.prior, InvGammaExp):
        wealth = _simulate_ige(model, table, samples, rng)
    else:
        wealth = _simulate_discrete(model, table, samples, rng)
    values = _utility_array(model.utility, wealth)
    mean = float(values.mean())
    stderr = float(np.std(values, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return McEstimate(mean=mean, stderr=stderr, samples=samples, seed=seed)


def _offer_atoms(model: HouseModel):
    if isinstance(model.offers, Bernoulli):
        return (0.0, 1.0)
    return model.offers.offer_atoms


def _simulate_discrete(model, table, samples, rng) -> np.ndarray:
    atoms = np.asarray(_offer_atoms(model), dtype=float)
    n_atoms = len(atoms)
    horizon = model.horizon
    prior = model.prior

    # Per-sample offer probabilities from a sampled parameter.
    if isinstance(prior, BetaBernoulli):
        theta = rng.beta(prior.alpha, prior.beta, samples)
        probs = np.column_stack([1.0 - theta, theta])
    else:
        thetas = np.asarray(prior.theta_grid)
        t_idx = rng.choice(len(thetas), size=samples, p=np.asarray(prior.weights))
        if isinstance(model.offers, Bernoulli):
            theta = thetas[t_idx]
            probs = np.column_stack([1.0 - theta, theta])
        else:
            ptab = np.asarray(model.offers.probs_per_theta)
            probs = ptab[t_idx]
    cum = np.cumsum(probs, axis=1)
    cum /= cum[:, -1:]

    draws = rng.random((samples, horizon + 1))
    offer_idx = np.empty((samples, horizon + 1), dtype=np.int64)
    for n in range(horizon + 1):
        offer_idx[:, n] = (draws[:, n, None] < cum).argmax(axis=1)

    # Thresholds depend only on the stage and the offer counts entering
    # the decision; build a lookup over count vectors per stage. For
    # clipped and stationary tables the counts include the offer under
    # decision, for hold-out tables they do not.
    post_offer = table.kind != "commitment"
    base = horizon + 2
    powers = base ** np.arange(n_atoms)

    def stage_lut(stage):
        lut = np.full(base ** n_atoms, np.nan)
        total = stage + 1 if post_offer else stage

        # enumerate offer-count vectors with sum == total
        def rec(pos, remaining, counts, mu):
            if pos == n_atoms - 1:
                counts2 = counts + [remaining]
                mu2 = mu
                feasible = True
                for j, cnt in enumerate(counts2):
                    for _ in range(cnt):
                        try:
                            mu2 = update(mu2, float(atoms[j]))
                        except InfeasibleObservationError:
                            feasible = False
                            break
                    if not feasible:
                        break
                if feasible:
                    code = int(np.dot(counts2, powers))
                    lut[code] = table.level(stage, mu2)
                return
            for take in range(remaining + 1):
                rec(pos + 1, remaining - take, counts + [take], mu)

        rec(0, total, [], prior)
        return lut

    # The final stage is a forced accept, so no lookup is needed there.
    luts = [stage_lut(n) for n in range(horizon)]

    counts_code = np.zeros(samples, dtype=np.int64)
    active = np.ones(samples, dtype=bool)
    wealth = np.empty(samples, dtype=float)
    for stage in range(horizon + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        offers_now = atoms[offer_idx[idx, stage]]
        if stage == horizon:
            accept = np.ones(idx.size, dtype=bool)
        else:
            codes = counts_code[idx]
            if post_offer:
                codes = codes + powers[offer_idx[idx, stage]]
            levels = luts[stage][codes]
            accept = offers_now >= levels
        acc_idx = idx[accept]
        wealth[acc_idx] = atoms[offer_idx[acc_idx, stage]] - stage * model.cost
        active[acc_idx] = False
        cont_idx = idx[~accept]
        counts_code[cont_idx] += powers[offer_idx[cont_idx, stage]]
    return wealth


def _simulate_ige(model, table, samples, rng) -> np.ndarray:
    prior: InvGammaExp = model.prior
    horizon = model.horizon
    solver = table._solver
    rate = rng.gamma(prior.shape_post, 1.0 / prior.scale_post, samples)
    theta = 1.0 / rate
    offers = rng.exponential(theta[:, None], size=(samples, horizon + 1))

    s_running = np.zeros(samples)
    active = np.ones(samples, dtype=bool)
    wealth = np.empty(samples, dtype=float)
    for stage in range(horizon + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        offers_now = offers[idx, stage]
        if stage == horizon:
            accept = np.ones(idx.size, dtype=bool)
        else:
            # Decision level at the belief including the current offer.
            if isinstance(solver, _IgeLevelSolver):
                s_nodes, lvls = solver.grid(horizon - stage, stage + 1)
                levels = np.interp(s_running[idx] + offers_now, s_nodes, lvls)
            else:
                levels = np.array(
                    [
                        table.level(
                            stage,
                            InvGammaExp(
                                prior.a, prior.b, prior.s + s + x, prior.n + stage + 1
                            ),
                        )
                        for s, x in zip(s_running[idx], offers_now)
                    ]
                )
            accept = offers_now >= levels
        acc_idx = idx[accept]
        wealth[acc_idx] = offers[acc_idx, stage] - stage * model.cost
        active[acc_idx] = False
        cont_idx = idx[~accept]
        s_running[cont_idx] += offers[cont_idx, stage]
    return wealth


def beta_grid_equivalent(model: HouseModel) -> HouseModel:
    """Replace a Beta prior by a finite grid with the same offer-path
    law up to the model's horizon.

    A Gauss-Jacobi rule with m nodes integrates polynomials of degree
    2m-1 exactly against the Beta density, and the joint law of the
    first N+1 exchangeable 0/1 offers depends on the prior only through
    the moments of the success parameter up to order N+1, so the grid
    model is exactly equivalent, not an approximation.
    """
    from scipy.special import roots_jacobi

    if model.horizon is None:
        raise ValueError("grid equivalence is horizon-specific")
    if not isinstance(model.prior, BetaBernoulli):
        raise TypeError("only Beta priors have a grid equivalent here")
    m = (model.horizon + 3) // 2
    nodes, weights = roots_jacobi(m, model.prior.beta - 1.0, model.prior.alpha - 1.0)
    order = np.argsort(nodes)
    theta = tuple((nodes[order] + 1.0) / 2.0)
    w = weights[order]
    prior = DiscretePosterior(
        theta_grid=theta,
        weights=tuple(w / w.sum()),
        likelihood=model.offers,
    )
    return HouseModel(
        offers=model.offers,
        prior=prior,
        cost=model.cost,
        utility=model.utility,
        horizon=model.horizon,
    )


def encode_as_po(model: HouseModel) -> PartiallyObservableModel:
    """Encode a finitely supported house model into the general solver's
    format: a synthetic start state precedes the first offer, the
    parameter grid is the hidden state, and offers are iid given it.
    Beta priors are first replaced by their exact finite-grid
    equivalent. Pair with root-forced-continue when brute forcing."""
    if model.horizon is None:
        raise ValueError("only finite horizons can be encoded")
    if isinstance(model.prior, BetaBernoulli):
        model = beta_grid_equivalent(model)
    if isinstance(model.prior, InvGammaExp):
        raise ValueError(
            "continuous offers have no finite encoding; use simulation"
        )
    atoms = _offer_atoms(model)
    thetas = model.prior.theta_grid
    n_atoms = len(atoms)
    n_theta = len(thetas)
    if isinstance(model.offers, Bernoulli):
        ptab = np.column_stack([1.0 - np.asarray(thetas), np.asarray(thetas)])
    else:
        ptab = np.asarray(model.offers.probs_per_theta, dtype=float)
    states = ("start",) + tuple(atoms)
    kernel = np.zeros((n_atoms + 1, n_theta, n_atoms + 1, n_theta))
    for i in range(n_atoms + 1):
        for t in range(n_theta):
            for j in range(n_atoms):
                kernel[i, t, j + 1, t] = ptab[t, j]
    floor = min(atoms) - (model.horizon + 1) * model.cost - 1.0
    if model.utility.has_shift_domain:
        dm = model.utility.domain_min()
        floor = max(floor, dm + 1e-6 * (1.0 + abs(dm)))
    return PartiallyObservableModel(
        observable_states=states,
        hidden_states=tuple(thetas),
        kernel=kernel,
        run_reward=(0.0,) + (-model.cost,) * n_atoms,
        stop_reward=(floor,) + tuple(atoms),
        prior_weights=model.prior.weights,
        start_state="start",
    )
