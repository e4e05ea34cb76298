"""Descending auction with inspection costs, and its first-price counterpart.

Clock semantics: the price descends from H; a bidder inspects (pays her cost,
learns her value) when the price reaches her threshold, and may later claim
at her purchase price. At any single price level inspections happen before
claims, so strategies that claim immediately upon seeing a high value are
executable. The first claim ends the auction; simultaneous claims follow the
configured tie rule, with random-allocation outcomes reported in expectation.

The lambda/mu maps translate between monotone first-price strategies on
truncated values and descending-auction strategies; utilities transfer
exactly for claims-above strategies, which the tests verify by independent
enumeration on both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import Sequence

import numpy as np

from .auction import AuctionRule, FPA_RANDOM, Format, Tie, ex_post_utility
from .dist import (
    DiscreteDistribution,
    ProductDistribution,
    SampleMatrix,
    empirical_marginals,
    product_of,
    truncate_at,
)
from .equilibrium import solve_bne, verify_bne
from .errors import ClaimAboveInspection, DimensionMismatch, OddSampleCount
from .estimate import shade_family, sup_error
from .pandora import SearchInstance, opt_welfare, weitzman_index
from .strategy import MonotoneStrategy, StrategyProfile, shade

ENUM_LIMIT = 10_000


@dataclass(frozen=True)
class DAPureStrategy:
    """An inspection threshold price and a purchase-price function of the value."""

    tau: float
    beta: MonotoneStrategy

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ValueError("threshold price must be nonnegative")
        if self.beta.max_bid > self.tau:
            raise ClaimAboveInspection(
                f"claim price {self.beta.max_bid} exceeds inspection price {self.tau}"
            )

    def claims_above(self, sigma: float) -> bool:
        """True iff the purchase price equals tau for every value >= sigma."""
        if self.beta.eval(sigma) != self.tau:
            return False
        return all(b == self.tau for t, b in self.beta.breakpoints if t > sigma)


@dataclass(frozen=True)
class DAMixedStrategy:
    """Finite mixture over pure descending-auction strategies."""

    components: tuple[tuple[float, DAPureStrategy], ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise DimensionMismatch("mixture needs at least one component")
        if any(w <= 0 for w, _ in self.components):
            raise ValueError("mixture weights must be positive")
        if abs(sum(w for w, _ in self.components) - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")

    @classmethod
    def pure(cls, d: DAPureStrategy) -> "DAMixedStrategy":
        return cls(((1.0, d),))


@dataclass(frozen=True)
class MonotoneMixture:
    """Finite mixture over monotone first-price strategies (mu-map images)."""

    components: tuple[tuple[float, MonotoneStrategy], ...]

    @classmethod
    def pure(cls, s: MonotoneStrategy) -> "MonotoneMixture":
        return cls(((1.0, s),))


@dataclass(frozen=True)
class DAOutcome:
    """One realized descending auction; tie outcomes are in expectation.

    ``winner`` is None when the top claim is tied (under either tie rule);
    utilities and welfare then average over the uniform tie-break.
    """

    winner: int | None
    utilities: tuple[float, ...]
    welfare: float
    inspected: tuple[bool, ...]


@dataclass(frozen=True)
class MonteCarloParams:
    trials: int = 20_000
    seed: int = 0


def simulate_da(
    inst: SearchInstance,
    profile: Sequence[DAPureStrategy],
    values: Sequence[float],
    tie: Tie = Tie.RANDOM_ALLOCATION,
) -> DAOutcome:
    """Run the descending clock on one value vector."""
    n = inst.n
    if len(profile) != n or len(values) != n:
        raise DimensionMismatch("profile and values must match the instance size")
    claims = [profile[j].beta.eval(values[j]) for j in range(n)]
    price = max(claims)
    claimers = [j for j in range(n) if claims[j] == price]
    # A bidder inspects iff the clock reaches her threshold before the sale;
    # at the sale price itself inspections still happen (they precede claims).
    inspected = tuple(profile[j].tau >= price for j in range(n))
    k = len(claimers)
    if k == 1:
        shares = {claimers[0]: 1.0}
        winner = claimers[0]
    elif tie is Tie.RANDOM_ALLOCATION:
        shares = {j: 1.0 / k for j in claimers}
        winner = None
    else:
        shares = {}
        winner = None
    utilities = []
    welfare = 0.0
    for j in range(n):
        share = shares.get(j, 0.0)
        cost = inst.costs[j] if inspected[j] else 0.0
        utilities.append(share * (values[j] - price) - cost)
        welfare += share * values[j] - cost
    return DAOutcome(winner, tuple(utilities), welfare, inspected)


def _as_mixed(profile: Sequence[DAPureStrategy | DAMixedStrategy]) -> list[DAMixedStrategy]:
    return [
        d if isinstance(d, DAMixedStrategy) else DAMixedStrategy.pure(d) for d in profile
    ]


def _joint_size(inst: SearchInstance, profile: Sequence[DAMixedStrategy]) -> int:
    size = 1
    for f, d in zip(inst.boxes.marginals, profile):
        size *= len(f.atoms) * len(d.components)
        if size > ENUM_LIMIT:
            return size
    return size


def _enumerate_outcomes(inst, profile, tie):
    """Yield (probability, DAOutcome) over all value/component combinations."""
    per_bidder = []
    for f, d in zip(inst.boxes.marginals, profile):
        per_bidder.append(
            [(wv * wc, a, comp) for a, wv in f for wc, comp in d.components]
        )
    for combo in iter_product(*per_bidder):
        prob = 1.0
        values = []
        pures = []
        for w, a, comp in combo:
            prob *= w
            values.append(a)
            pures.append(comp)
        yield prob, simulate_da(inst, pures, values, tie)


def ex_ante_utility_da(
    inst: SearchInstance,
    profile: Sequence[DAPureStrategy | DAMixedStrategy],
    i: int,
    mc: MonteCarloParams | None = None,
    tie: Tie = Tie.RANDOM_ALLOCATION,
) -> tuple[float, float]:
    """Expected utility of bidder i before anyone learns values.

    Exact enumeration (stderr 0) whenever the joint support-times-mixture
    space is small enough; Monte Carlo with the given parameters otherwise.
    """
    mixed = _as_mixed(profile)
    if _joint_size(inst, mixed) <= ENUM_LIMIT:
        return sum(p * out.utilities[i] for p, out in _enumerate_outcomes(inst, mixed, tie)), 0.0
    mc = mc or MonteCarloParams()
    draws = _monte_carlo(inst, mixed, tie, mc, lambda out: out.utilities[i])
    return float(np.mean(draws)), float(np.std(draws, ddof=1) / math.sqrt(len(draws)))


def da_welfare(
    inst: SearchInstance,
    profile: Sequence[DAPureStrategy | DAMixedStrategy],
    mc: MonteCarloParams | None = None,
    tie: Tie = Tie.RANDOM_ALLOCATION,
) -> tuple[float, float]:
    """Expected welfare (allocated value minus all inspection costs paid)."""
    mixed = _as_mixed(profile)
    if _joint_size(inst, mixed) <= ENUM_LIMIT:
        return sum(p * out.welfare for p, out in _enumerate_outcomes(inst, mixed, tie)), 0.0
    mc = mc or MonteCarloParams()
    draws = _monte_carlo(inst, mixed, tie, mc, lambda out: out.welfare)
    return float(np.mean(draws)), float(np.std(draws, ddof=1) / math.sqrt(len(draws)))


def _monte_carlo(inst, mixed, tie, mc, stat):
    rng = np.random.default_rng(mc.seed)
    marginals = inst.boxes.marginals
    value_draws = [
        rng.choice(np.array(f.atoms), size=mc.trials, p=np.array(f.weights)) for f in marginals
    ]
    comp_draws = [
        rng.choice(len(d.components), size=mc.trials, p=[w for w, _ in d.components])
        for d in mixed
    ]
    out = np.empty(mc.trials)
    for t in range(mc.trials):
        pures = [mixed[j].components[comp_draws[j][t]][1] for j in range(inst.n)]
        values = [value_draws[j][t] for j in range(inst.n)]
        out[t] = stat(simulate_da(inst, pures, values, tie))
    return out


def lambda_map(f: MonotoneStrategy, sigma: float) -> DAPureStrategy:
    """First-price strategy on [0, sigma] -> descending strategy that claims above sigma."""
    tau = f.eval(sigma)
    bps = [(t, b) for t, b in f.breakpoints if t < sigma] + [(float(sigma), tau)]
    return DAPureStrategy(tau, MonotoneStrategy(tuple(bps), f.default_bid))


def mu_map(d: DAPureStrategy, f: DiscreteDistribution, sigma: float) -> MonotoneMixture:
    """Descending strategy -> mixture of first-price strategies on [0, sigma].

    Each component copies the purchase prices below sigma and bids, at value
    sigma, the purchase price of one conditional draw v' ~ f | v' >= sigma.
    When f puts no mass at or above sigma the mixture degenerates to the
    single component bidding beta(sigma) there.
    """
    below = tuple((t, b) for t, b in d.beta.breakpoints if t < sigma)

    def component(bid_at_sigma: float) -> MonotoneStrategy:
        return MonotoneStrategy(below + ((float(sigma), bid_at_sigma),), d.beta.default_bid)

    tail = [(a, w) for a, w in f if a >= sigma]
    if not tail:
        return MonotoneMixture.pure(component(d.beta.eval(sigma)))
    total = sum(w for _, w in tail)
    merged: dict[float, float] = {}
    for a, w in tail:
        bid = d.beta.eval(a)
        merged[bid] = merged.get(bid, 0.0) + w / total
    return MonotoneMixture(tuple((w, component(b)) for b, w in sorted(merged.items())))


def roundtrip_check(
    strategy: DAPureStrategy | MonotoneStrategy, f: DiscreteDistribution, sigma: float
) -> bool:
    """Check the lambda/mu round-trip identity pointwise on supp(f) and sigma."""
    probes = sorted(set(f.atoms) | {float(sigma)})
    if isinstance(strategy, MonotoneStrategy):
        # mu(lambda(f)) must reproduce f on the truncated domain.
        image = mu_map(lambda_map(strategy, sigma), f, sigma)
        pts = sorted({min(p, sigma) for p in probes})
        return all(
            comp.eval(p) == strategy.eval(p) for _, comp in image.components for p in pts
        )
    image = mu_map(strategy, f, sigma)
    for _, comp in image.components:
        back = lambda_map(comp, sigma)
        if back.tau != strategy.tau:
            return False
        if any(back.beta.eval(p) != strategy.beta.eval(p) for p in probes):
            return False
    return True


def smoothness_component(sigma: float, z: float, value_grid: Sequence[float]) -> DAPureStrategy:
    """One deviation component: inspect at (1-z)*sigma, claim at (1-z)*min(v, sigma)."""
    pts = sorted(set(float(g) for g in value_grid) | {float(sigma)})
    bps = tuple((g, (1.0 - z) * min(g, sigma)) for g in pts)
    return DAPureStrategy((1.0 - z) * sigma, MonotoneStrategy(bps, 0.0))


def smoothness_deviation(
    sigma: float, value_grid: Sequence[float], k_points: int = 64
) -> DAMixedStrategy:
    """The welfare-guarantee deviation: Z on [1/e, 1] with density 1/z.

    Z is discretized on k equal-probability quantiles (inverse CDF
    z = exp(u - 1)); every component claims above sigma.
    """
    comps = []
    for k in range(k_points):
        u = (k + 0.5) / k_points
        z = math.exp(u - 1.0)
        comps.append((1.0 / k_points, smoothness_component(sigma, z, value_grid)))
    return DAMixedStrategy(tuple(comps))


def ex_ante_utility_fpa(
    f: ProductDistribution,
    profile: Sequence[MonotoneMixture | MonotoneStrategy],
    i: int,
    rule: AuctionRule = FPA_RANDOM,
) -> float:
    """Exact ex ante first-price utility of bidder i under mixed monotone strategies.

    Pure enumeration over value profiles and mixture components; this is the
    oracle side of the utility-transfer checks, independent of the interim
    machinery.
    """
    mixed = [
        s if isinstance(s, MonotoneMixture) else MonotoneMixture.pure(s) for s in profile
    ]
    per_bidder = []
    for marg, mx in zip(f.marginals, mixed):
        per_bidder.append([(wv * wc, a, comp) for a, wv in marg for wc, comp in mx.components])
    total = 0.0
    for combo in iter_product(*per_bidder):
        prob = 1.0
        bids = []
        values = []
        for w, a, comp in combo:
            prob *= w
            values.append(a)
            bids.append(comp.eval(a))
        total += prob * ex_post_utility(rule, i, values[i], bids)
    return total


def poa_check(
    inst: SearchInstance,
    profile: Sequence[DAPureStrategy | DAMixedStrategy],
    certified_eps: float,
    mc: MonteCarloParams | None = None,
    tie: Tie = Tie.RANDOM_ALLOCATION,
) -> tuple[float, float, float]:
    """Welfare of the profile against the (1 - 1/e) * OPT - n * eps bound.

    Returns (welfare, bound, welfare stderr); the caller asserts
    welfare >= bound - 4 * stderr.
    """
    welfare, stderr = da_welfare(inst, profile, mc, tie)
    bound = (1.0 - 1.0 / math.e) * opt_welfare(inst) - inst.n * certified_eps
    return welfare, bound, stderr


@dataclass(frozen=True)
class SolverParams:
    """Knobs for the sample-to-equilibrium pipeline."""

    grid_step: float = 0.05
    max_iters: int = 60
    damping: float = 0.5
    seed: int = 0
    alpha_steps: int = 11
    z_points: int = 64
    target_eps: float | None = None
    tie: Tie = Tie.RANDOM_ALLOCATION


@dataclass(frozen=True)
class PipelineReport:
    """Everything the end-to-end learning pipeline measures."""

    sigma_hat: tuple[float, ...]
    cost_true: tuple[float, ...]
    cost_hat: tuple[float, ...]
    cost_err: float
    eps_fpa: float
    empp_sup_error: float
    da_gap: float
    da_gap_stderr: float
    welfare: float
    welfare_stderr: float
    opt: float
    poa_bound: float
    fpa_profile: StrategyProfile = field(repr=False)
    da_profile: tuple[DAPureStrategy, ...] = field(repr=False)

    def to_json(self) -> dict:
        return {
            "sigma_hat": list(self.sigma_hat),
            "cost_true": list(self.cost_true),
            "cost_hat": list(self.cost_hat),
            "cost_err": self.cost_err,
            "eps_fpa": self.eps_fpa,
            "empp_sup_error": self.empp_sup_error,
            "da_gap": self.da_gap,
            "da_gap_stderr": self.da_gap_stderr,
            "welfare": self.welfare,
            "welfare_stderr": self.welfare_stderr,
            "opt": self.opt,
            "poa_bound": self.poa_bound,
        }


def _deviation_gap(
    inst: SearchInstance,
    da_profile: Sequence[DAPureStrategy],
    sigma_hat: Sequence[float],
    params: SolverParams,
    mc: MonteCarloParams | None,
) -> tuple[float, float]:
    """Best-deviation lower bound on the ex ante equilibrium gap on the truth.

    Deviations per bidder: lambda-images of a linear-shading grid on the
    truncated support, plus the 1/z-density deviation. A finite class only
    lower-bounds the true gap, which the reports document.
    """
    gap, gap_se = 0.0, 0.0
    alphas = [k / (params.alpha_steps - 1) for k in range(params.alpha_steps)]
    for i in range(inst.n):
        own, own_se = ex_ante_utility_da(inst, da_profile, i, mc, params.tie)
        grid = sorted(
            {min(a, sigma_hat[i]) for a in inst.boxes.marginals[i].atoms} | {sigma_hat[i]}
        )
        deviations: list[DAPureStrategy | DAMixedStrategy] = [
            lambda_map(shade(grid, a), sigma_hat[i]) for a in alphas
        ]
        deviations.append(smoothness_deviation(sigma_hat[i], grid, params.z_points))
        for dev in deviations:
            trial = list(da_profile)
            trial[i] = dev
            u_dev, dev_se = ex_ante_utility_da(inst, trial, i, mc, params.tie)
            if u_dev - own > gap:
                gap = u_dev - own
                gap_se = math.hypot(dev_se, own_se)
    return gap, gap_se


def _break_bid_ties(
    profile: StrategyProfile, grid_step: float, h: float
) -> StrategyProfile:
    # Grid-valued bids tie across bidders with positive probability, and a
    # tied claim in the descending auction makes every tied bidder pay her
    # inspection cost for a fractional allocation, which breaks the exact
    # first-price correspondence. Before emitting an executable profile, give
    # each bidder a microscopic bid offset so claims never tie; the
    # certificate is then recomputed for the emitted profile.
    out = []
    for i, strat in enumerate(profile):
        delta = (i + 1) * grid_step * 1e-9
        bps = tuple((t, min(b + delta, h)) for t, b in strat.breakpoints)
        out.append(MonotoneStrategy(bps, strat.default_bid))
    return StrategyProfile(tuple(out))


def empirical_pipeline(
    s: SampleMatrix,
    costs: Sequence[float],
    f_true: ProductDistribution,
    params: SolverParams | None = None,
    mc: MonteCarloParams | None = None,
) -> PipelineReport:
    """Samples -> empirical indices -> truncated empirical FPA -> equilibrium -> DA.

    Splits the samples into halves (first/second, for reproducibility), fits
    indices on the first, solves a certified approximate equilibrium of the
    first-price auction on the truncated empirical marginals of the second,
    and maps the result into the descending auction on the true distribution.
    The emitted profile carries per-bidder tie-breaking bid offsets (see
    :func:`_break_bid_ties`) and is re-certified after the offsets. Reports
    the certified epsilon, the measured estimator error, the deviation-grid
    equilibrium gap, welfare against the price-of-anarchy bound, and how far
    the implied costs drift from the true ones.
    """
    params = params or SolverParams()
    if s.m % 2 != 0:
        raise OddSampleCount(f"m={s.m} must be even to split into halves")
    half = s.m // 2
    s_a = SampleMatrix(s.values[:half], seed=s.seed)
    s_b = SampleMatrix(s.values[half:], seed=s.seed)
    costs = tuple(float(c) for c in costs)

    emp_a = empirical_marginals(s_a, h=f_true.h)
    sigma_hat = tuple(
        weitzman_index(f, c, h=f_true.h) for f, c in zip(emp_a.marginals, costs)
    )

    emp_b = empirical_marginals(s_b, h=f_true.h)
    fpa_dist = product_of(
        (truncate_at(f, sig) for f, sig in zip(emp_b.marginals, sigma_hat)), f_true.h
    )
    steps = int(round(f_true.h / params.grid_step))
    bid_grid = [k * params.grid_step for k in range(steps + 1)]
    rule = AuctionRule(Format.FIRST_PRICE, params.tie)
    solved, _ = solve_bne(
        rule,
        fpa_dist,
        bid_grid,
        max_iters=params.max_iters,
        damping=params.damping,
        seed=params.seed,
        target_eps=params.target_eps,
    )
    fpa_profile = _break_bid_ties(solved, params.grid_step, f_true.h)
    cert = verify_bne(rule, fpa_dist, fpa_profile)
    da_profile = tuple(
        lambda_map(fpa_profile[i], sigma_hat[i]) for i in range(f_true.n)
    )

    cost_hat = tuple(
        f.expected_excess(sig) for f, sig in zip(f_true.marginals, sigma_hat)
    )
    cost_err = max(abs(c - ch) for c, ch in zip(costs, cost_hat))

    # Estimator error measured where the pipeline actually estimates: the
    # product-form estimator on the truncated second-half samples against the
    # truncated true distribution, over the solved profile plus a shading grid.
    f_true_trunc = product_of(
        (truncate_at(f, sig) for f, sig in zip(f_true.marginals, sigma_hat)), f_true.h
    )
    s_b_trunc = SampleMatrix(np.minimum(s_b.values, np.array(sigma_hat)), seed=s.seed)
    family = shade_family(f_true_trunc, [k / 4 for k in range(5)]) + [fpa_profile]
    empp_sup = sup_error(s_b_trunc, rule, family, f_true_trunc, "empp").sup_error

    inst = SearchInstance(f_true, costs)
    da_gap, da_gap_se = _deviation_gap(inst, da_profile, sigma_hat, params, mc)
    welfare, welfare_se = da_welfare(inst, da_profile, mc, params.tie)
    opt = opt_welfare(inst)
    bound = (1.0 - 1.0 / math.e) * opt - inst.n * da_gap
    return PipelineReport(
        sigma_hat=sigma_hat,
        cost_true=costs,
        cost_hat=cost_hat,
        cost_err=cost_err,
        eps_fpa=cert.epsilon,
        empp_sup_error=empp_sup,
        da_gap=da_gap,
        da_gap_stderr=da_gap_se,
        welfare=welfare,
        welfare_stderr=welfare_se,
        opt=opt,
        poa_bound=bound,
        fpa_profile=fpa_profile,
        da_profile=da_profile,
    )
