"""Sample-based interim-utility estimators and their verification harness.

Two estimators are provided: the empirical one, which averages ex post
utilities over the sampled value rows, and the product-form one, which
computes the exact interim utility on the product of per-bidder empirical
marginals. A permutation oracle checks the identity tying the two together,
and a label-vector counter checks the combinatorial bound that drives the
sample-complexity analysis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .auction import AuctionRule, ex_post_utility, interim_utility_exact, push_forward
from .dist import ProductDistribution, SampleMatrix, empirical_marginals, sample_matrix
from .errors import TooLargeToEnumerate
from .strategy import StrategyProfile, shade


# A strategy family is just a finite list of profiles.
StrategyFamily = Sequence[StrategyProfile]


@dataclass(frozen=True)
class ErrorReport:
    """Sup estimation error over (profile, bidder, value) probes."""

    sup_error: float
    argmax: tuple[int, int, float]  # (profile index, bidder, value)
    per_profile: tuple[float, ...]


def emp_estimate(
    s: SampleMatrix, rule: AuctionRule, i: int, v_i: float, profile: StrategyProfile
) -> float:
    """Average ex post utility of bidder i over the sampled opponent rows."""
    b_i = profile[i].eval(v_i)
    total = 0.0
    for row in s.values:
        bids = [profile[j].eval(row[j]) for j in range(s.n)]
        bids[i] = b_i
        total += ex_post_utility(rule, i, v_i, bids)
    return total / s.m


def empp_estimate(
    s: SampleMatrix, rule: AuctionRule, i: int, v_i: float, profile: StrategyProfile
) -> float:
    """Exact interim utility on the empirical product distribution."""
    emp = empirical_marginals(s)
    opp = [push_forward(emp.marginals[j], profile[j]) for j in range(s.n) if j != i]
    return interim_utility_exact(rule, i, v_i, profile[i].eval(v_i), opp)


def _probe_values(f: ProductDistribution, profile: StrategyProfile, i: int) -> list[float]:
    # Probes: atoms of the true marginal plus the strategy's own breakpoints.
    pts = set(f.marginals[i].atoms)
    pts.update(t for t, _ in profile[i].breakpoints if 0 <= t <= f.h)
    return sorted(pts)


def sup_error(
    s: SampleMatrix,
    rule: AuctionRule,
    family: StrategyFamily,
    f: ProductDistribution,
    estimator: str = "empp",
) -> ErrorReport:
    """Worst estimation error of a finite family against the exact utilities on f.

    The error is max over profiles, bidders, and probe values of
    |estimate - exact interim utility|; probe values are the atoms of each
    true marginal together with the profile's breakpoints.
    """
    if estimator not in ("emp", "empp"):
        raise ValueError(f"unknown estimator {estimator!r}")
    emp_prod = empirical_marginals(s, h=f.h) if estimator == "empp" else None
    sup, arg = -1.0, (0, 0, 0.0)
    per_profile = []
    for p_idx, profile in enumerate(family):
        worst = 0.0
        for i in range(f.n):
            opp_true = [push_forward(f.marginals[j], profile[j]) for j in range(f.n) if j != i]
            if emp_prod is not None:
                opp_emp = [
                    push_forward(emp_prod.marginals[j], profile[j])
                    for j in range(f.n)
                    if j != i
                ]
            for v in _probe_values(f, profile, i):
                b = profile[i].eval(v)
                exact = interim_utility_exact(rule, i, v, b, opp_true)
                if emp_prod is not None:
                    est = interim_utility_exact(rule, i, v, b, opp_emp)
                else:
                    est = emp_estimate(s, rule, i, v, profile)
                err = abs(est - exact)
                worst = max(worst, err)
                if err > sup:
                    sup, arg = err, (p_idx, i, v)
        per_profile.append(worst)
    return ErrorReport(sup, arg, tuple(per_profile))


def shade_family(f: ProductDistribution, alphas: Iterable[float]) -> list[StrategyProfile]:
    """Symmetric linear-shading profiles over each marginal's support grid."""
    return [
        StrategyProfile(tuple(shade(f.marginals[i].atoms, a) for i in range(f.n)))
        for a in alphas
    ]


def sup_error_sweep(
    f: ProductDistribution,
    rule: AuctionRule,
    family: StrategyFamily,
    m_values: Sequence[int],
    n_seeds: int,
    base_seed: int,
    estimator: str = "empp",
) -> list[dict]:
    """Seeded sweep of sup_error over sample sizes; seed schedule is base + k."""
    rows = []
    for m in m_values:
        for k in range(n_seeds):
            seed = base_seed + k
            rep = sup_error(sample_matrix(f, m, seed), rule, family, f, estimator)
            rows.append(
                {
                    "estimator": estimator,
                    "m": m,
                    "seed": seed,
                    "sup_error": rep.sup_error,
                    "argmax_bidder": rep.argmax[1],
                    "argmax_value": rep.argmax[2],
                    "profile_id": rep.argmax[0],
                }
            )
    return rows


def permutation_identity_check(
    s: SampleMatrix, rule: AuctionRule, i: int, v_i: float, profile: StrategyProfile
) -> tuple[float, float]:
    """Exact permutation average of the empirical estimator vs. the product-form one.

    Averages the empirical estimate over all (m!)^(n-1) joint permutations of
    the opponents' columns; the result must equal the product-form estimate.
    Only tiny instances are enumerable.
    """
    m, n = s.m, s.n
    if m > 5 or n > 3:
        raise TooLargeToEnumerate(f"m={m}, n={n} exceeds the (m!)^(n-1) enumeration limit")
    opp_cols = [j for j in range(n) if j != i]
    b_i = profile[i].eval(v_i)
    perms = list(itertools.permutations(range(m)))
    total = 0.0
    count = 0
    for assignment in itertools.product(perms, repeat=len(opp_cols)):
        acc = 0.0
        for j in range(m):
            bids = [0.0] * n
            bids[i] = b_i
            for col, perm in zip(opp_cols, assignment):
                bids[col] = profile[col].eval(s.values[perm[j], col])
            acc += ex_post_utility(rule, i, v_i, bids)
        total += acc / m
        count += 1
    return total / count, empp_estimate(s, rule, i, v_i, profile)


def label_vector_count(hypothesis_values: np.ndarray, witnesses: Sequence[float]) -> int:
    """Number of distinct sign vectors sgn(h(x_j) - r_j) over the hypothesis rows.

    sgn(0) counts as -1 (the closed lower branch), so the count is well
    defined even when a hypothesis value hits its witness exactly.
    """
    hv = np.asarray(hypothesis_values, dtype=float)
    r = np.asarray(witnesses, dtype=float)
    if hv.ndim != 2 or hv.shape[1] != r.shape[0]:
        raise ValueError("hypothesis_values must be |family| x len(witnesses)")
    labels = {tuple(1 if x > 0 else -1 for x in row - r) for row in hv}
    return len(labels)


def median_ratio_table(rows: Sequence[dict]) -> list[tuple[int, float]]:
    """Median sup_error per sample size, sorted by m (for scaling reports)."""
    by_m: dict[int, list[float]] = {}
    for r in rows:
        by_m.setdefault(r["m"], []).append(r["sup_error"])
    return [(m, float(np.median(v))) for m, v in sorted(by_m.items())]
