"""Bayesian filtering for offer models with an unknown parameter.

A Belief is a posterior over the unknown parameter theta. Three
representations are supported, each closed under its own updating:

    DiscretePosterior   finite grid of theta values with weights, paired
                        with a likelihood family for reweighting;
    BetaBernoulli       conjugate Beta(alpha, beta) posterior for 0/1
                        offers with unknown success probability;
    InvGammaExp         conjugate Inverse-Gamma posterior for
                        exponentially distributed offers with unknown
                        mean, tracked through the sufficient statistic
                        (s, n) = (sum of observed offers, count).

`update` is the Bayes operator: reweight by the likelihood of the new
observation and renormalize. `predictive` returns the law of the next
offer under the current belief (the likelihood mixed over theta).
`lr_compare` decides the likelihood-ratio order between two beliefs,
the order under which better news about theta provably raises
reservation levels downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InfeasibleObservationError
from .utility import WEIGHT_TOL, DiscreteDist

LR_TOL = 1e-10


# ---------------------------------------------------------------------------
# Offer families: the likelihood q(x | theta)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FiniteTable:
    """Finitely supported offers: row t of probs is the law of X given
    theta_grid[t] (rows align with the belief's theta grid)."""

    offer_atoms: tuple[float, ...]
    probs_per_theta: tuple[tuple[float, ...], ...]

    def __init__(self, offer_atoms, probs_per_theta):
        atoms = tuple(float(a) for a in offer_atoms)
        rows = tuple(tuple(float(p) for p in row) for row in probs_per_theta)
        if not atoms:
            raise ValueError("no offer atoms")
        for row in rows:
            if len(row) != len(atoms):
                raise ValueError("row length does not match offer atoms")
            if any(p < 0 for p in row):
                raise ValueError("negative probability")
            if abs(math.fsum(row) - 1.0) > WEIGHT_TOL:
                raise ValueError("offer row does not sum to 1")
        object.__setattr__(self, "offer_atoms", atoms)
        object.__setattr__(self, "probs_per_theta", rows)

    def mass(self, theta_index: int, x: float) -> float:
        for j, a in enumerate(self.offer_atoms):
            if x == a:
                return self.probs_per_theta[theta_index][j]
        return 0.0

    def feasible(self, x: float) -> bool:
        return x in self.offer_atoms

    @property
    def top_offer(self) -> float:
        return max(self.offer_atoms)


@dataclass(frozen=True)
class Bernoulli:
    """Offers in {0, 1}; theta is the success probability P(X=1)."""

    def mass(self, theta: float, x: float) -> float:
        if x == 1.0:
            return theta
        if x == 0.0:
            return 1.0 - theta
        return 0.0

    def feasible(self, x: float) -> bool:
        return x in (0.0, 1.0)

    @property
    def offer_atoms(self) -> tuple[float, ...]:
        return (0.0, 1.0)

    @property
    def top_offer(self) -> float:
        return 1.0


@dataclass(frozen=True)
class ExponentialMean:
    """Offers with density (1/theta) exp(-x/theta) on x >= 0; theta is
    the mean offer."""

    def density(self, theta: float, x: float) -> float:
        if x < 0:
            return 0.0
        return math.exp(-x / theta) / theta

    def feasible(self, x: float) -> bool:
        return x >= 0.0


OfferFamily = FiniteTable | Bernoulli | ExponentialMean


# ---------------------------------------------------------------------------
# Beliefs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscretePosterior:
    """Weights over a strictly increasing finite theta grid, with the
    likelihood family used for updates."""

    theta_grid: tuple[float, ...]
    weights: tuple[float, ...]
    likelihood: OfferFamily

    def __init__(self, theta_grid, weights, likelihood):
        grid = tuple(float(t) for t in theta_grid)
        w = tuple(float(v) for v in weights)
        if len(grid) != len(w) or not grid:
            raise ValueError("grid and weights must be nonempty and equal length")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("theta grid must be strictly increasing")
        if any(v < 0 for v in w):
            raise ValueError("negative weight")
        if abs(math.fsum(w) - 1.0) > WEIGHT_TOL:
            raise ValueError("weights do not sum to 1")
        if isinstance(likelihood, FiniteTable) and len(likelihood.probs_per_theta) != len(grid):
            raise ValueError("likelihood table rows must match theta grid")
        object.__setattr__(self, "theta_grid", grid)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "likelihood", likelihood)

    def _likelihood_at(self, x: float) -> np.ndarray:
        lk = self.likelihood
        if isinstance(lk, FiniteTable):
            return np.array([lk.mass(i, x) for i in range(len(self.theta_grid))])
        if isinstance(lk, Bernoulli):
            return np.array([lk.mass(t, x) for t in self.theta_grid])
        return np.array([lk.density(t, x) for t in self.theta_grid])


@dataclass(frozen=True)
class BetaBernoulli:
    """Beta(alpha, beta) posterior over a Bernoulli success probability."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("Beta parameters must be positive")

    @property
    def p_success(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class InvGammaExp:
    """Inverse-Gamma(a, b) prior on an exponential offer mean, advanced
    to the posterior Inverse-Gamma(a + n, b + s) by the sufficient
    statistic (s, n)."""

    a: float
    b: float
    s: float = 0.0
    n: int = 0

    def __post_init__(self) -> None:
        if not self.a > 1:
            raise ValueError("require a > 1 so the predictive has a mean")
        if not self.b > 0:
            raise ValueError("require b > 0")
        if self.s < 0 or self.n < 0:
            raise ValueError("sufficient statistic must be nonnegative")

    @property
    def shape_post(self) -> float:
        return self.a + self.n

    @property
    def scale_post(self) -> float:
        return self.b + self.s


Belief = DiscretePosterior | BetaBernoulli | InvGammaExp


# ---------------------------------------------------------------------------
# Predictive laws
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gauss_legendre_01(nodes: int) -> tuple[tuple[float, ...], tuple[float, ...]]:
    t, w = np.polynomial.legendre.leggauss(nodes)
    return tuple(0.5 * (t + 1.0)), tuple(0.5 * w)


def semiinfinite_quadrature(scale: float, nodes: int = 128) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals over [0, inf), via the rational
    substitution x = scale * t / (1 - t) on Gauss-Legendre points in
    [0, 1). `scale` places half the nodes below x = scale."""
    t, w = _gauss_legendre_01(nodes)
    t = np.asarray(t)
    w = np.asarray(w)
    xs = scale * t / (1.0 - t)
    ws = w * scale / (1.0 - t) ** 2
    return xs, ws


@dataclass(frozen=True)
class SecondOrderBeta:
    """Predictive offer law under an InvGammaExp belief: density
    a_post * scale^a_post / (x + scale)^(a_post + 1) on x >= 0."""

    a_post: float
    scale: float
    quad_nodes: int = 128

    def __post_init__(self) -> None:
        if not (self.a_post > 1 and self.scale > 0):
            raise ValueError("require a_post > 1 and scale > 0")

    def density(self, x: float) -> float:
        return second_order_beta_density(self.a_post, self.scale, x)

    def cdf(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return 1.0 - (self.scale / (x + self.scale)) ** self.a_post

    def quantile(self, q: float) -> float:
        if not (0.0 <= q < 1.0):
            raise ValueError("quantile level must be in [0, 1)")
        return self.scale * ((1.0 - q) ** (-1.0 / self.a_post) - 1.0)

    def mean(self) -> float:
        return self.scale / (self.a_post - 1.0)

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        xs, ws = semiinfinite_quadrature(self.scale, self.quad_nodes)
        dens = self.a_post * self.scale**self.a_post / (xs + self.scale) ** (self.a_post + 1)
        return xs, ws * dens


@dataclass(frozen=True)
class ContinuousMixture:
    """Predictive law for a DiscretePosterior over a continuous
    likelihood: a finite mixture of exponential densities."""

    thetas: tuple[float, ...]
    weights: tuple[float, ...]
    quad_nodes: int = 128

    def density(self, x: float) -> float:
        if x < 0:
            return 0.0
        return math.fsum(
            w * math.exp(-x / t) / t for t, w in zip(self.thetas, self.weights)
        )

    def cdf(self, x: float) -> float:
        if x <= 0:
            return 0.0
        return math.fsum(
            w * (1.0 - math.exp(-x / t)) for t, w in zip(self.thetas, self.weights)
        )

    def mean(self) -> float:
        return math.fsum(w * t for t, w in zip(self.thetas, self.weights))

    def quantile(self, q: float) -> float:
        if not (0.0 <= q < 1.0):
            raise ValueError("quantile level must be in [0, 1)")
        lo, hi = 0.0, max(self.thetas)
        while self.cdf(hi) < q:
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) < q:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        xs, ws = semiinfinite_quadrature(self.mean(), self.quad_nodes)
        dens = np.zeros_like(xs)
        for t, w in zip(self.thetas, self.weights):
            dens += w * np.exp(-xs / t) / t
        return xs, ws * dens


Predictive = DiscreteDist | SecondOrderBeta | ContinuousMixture


def second_order_beta_density(a_post: float, scale: float, x: float) -> float:
    """Density a_post * scale^a_post / (x + scale)^(a_post + 1), x >= 0."""
    if not (a_post > 1 and scale > 0):
        raise ValueError("require a_post > 1 and scale > 0")
    if x < 0:
        return 0.0
    return a_post * scale**a_post / (x + scale) ** (a_post + 1)


# ---------------------------------------------------------------------------
# The Bayes operator and predictive law
# ---------------------------------------------------------------------------

def update(mu: Belief, x: float) -> Belief:
    """One Bayes step: condition the belief on the observation x.

    Observations with zero predictive mass raise
    InfeasibleObservationError instead of silently renormalizing.
    """
    x = float(x)
    if isinstance(mu, BetaBernoulli):
        if x not in (0.0, 1.0):
            raise InfeasibleObservationError(f"Bernoulli offers are 0 or 1, got {x}")
        return BetaBernoulli(mu.alpha + x, mu.beta + 1.0 - x)
    if isinstance(mu, InvGammaExp):
        if x < 0:
            raise InfeasibleObservationError(f"exponential offers are nonnegative, got {x}")
        return InvGammaExp(mu.a, mu.b, mu.s + x, mu.n + 1)
    lk = mu._likelihood_at(x)
    w = np.asarray(mu.weights) * lk
    total = w.sum()
    if total <= 0.0:
        raise InfeasibleObservationError(
            f"observation {x} has zero predictive mass under the current belief"
        )
    return DiscretePosterior(mu.theta_grid, tuple(w / total), mu.likelihood)


def predictive(mu: Belief) -> Predictive:
    """Law of the next offer: the likelihood mixed over the belief."""
    if isinstance(mu, BetaBernoulli):
        p = mu.p_success
        return DiscreteDist((0.0, 1.0), (1.0 - p, p))
    if isinstance(mu, InvGammaExp):
        return SecondOrderBeta(mu.shape_post, mu.scale_post)
    lk = mu.likelihood
    if isinstance(lk, ExponentialMean):
        return ContinuousMixture(mu.theta_grid, mu.weights)
    if isinstance(lk, Bernoulli):
        p = float(np.dot(mu.weights, mu.theta_grid))
        return DiscreteDist((0.0, 1.0), (1.0 - p, p))
    probs = np.asarray(mu.weights) @ np.asarray(lk.probs_per_theta)
    return DiscreteDist(lk.offer_atoms, tuple(probs))


# ---------------------------------------------------------------------------
# Likelihood-ratio order
# ---------------------------------------------------------------------------

def _lr_leq_grid(w1, w2) -> bool:
    """Is the ratio w2/w1 nondecreasing along the grid (0/0 gaps skipped)?

    Support handling follows the density-ratio definition: once the
    ratio has become infinite (mass in w2 where w1 has none), any later
    positive w1 mass breaks the order.
    """
    last = None
    seen_inf = False
    for a, b in zip(w1, w2):
        if a <= LR_TOL and b <= LR_TOL:
            continue
        if a <= LR_TOL:
            seen_inf = True
            continue
        if seen_inf:
            return False
        ratio = b / a
        if last is not None and ratio < last * (1.0 - 1e-9) - LR_TOL:
            return False
        last = ratio if last is None else max(last, ratio)
    return True


def lr_compare(mu1: Belief, mu2: Belief) -> str:
    """Likelihood-ratio comparison: 'less' means mu1 precedes mu2.

    BetaBernoulli: Beta(a, b) precedes Beta(a', b') iff a <= a' and
    b >= b'. InvGammaExp: posterior Inverse-Gamma(shape, scale) precedes
    another iff shape >= shape' and scale <= scale' (smaller shape and
    larger scale put more mass on large theta). DiscretePosterior: the
    weight ratio must be monotone along the theta grid.
    """
    if type(mu1) is not type(mu2):
        raise ValueError("cannot compare beliefs of different variants")
    if isinstance(mu1, BetaBernoulli):
        le = mu1.alpha <= mu2.alpha and mu1.beta >= mu2.beta
        ge = mu2.alpha <= mu1.alpha and mu2.beta >= mu1.beta
    elif isinstance(mu1, InvGammaExp):
        le = mu1.shape_post >= mu2.shape_post and mu1.scale_post <= mu2.scale_post
        ge = mu2.shape_post >= mu1.shape_post and mu2.scale_post <= mu1.scale_post
    else:
        if mu1.theta_grid != mu2.theta_grid:
            raise ValueError("grid beliefs must share a theta grid")
        le = _lr_leq_grid(mu1.weights, mu2.weights)
        ge = _lr_leq_grid(mu2.weights, mu1.weights)
    if le and ge:
        return "equal"
    if le:
        return "less"
    if ge:
        return "greater"
    return "incomparable"
