"""Builders for dense monotone hypothesis families used by the counting checks."""

from __future__ import annotations

import numpy as np

from .auction import FPA_NONE, FPA_RANDOM, AuctionRule, ex_post_utility
from .strategy import MonotoneStrategy


def random_monotone_strategy(rng: np.random.Generator, grid, h: float = 1.0) -> MonotoneStrategy:
    """Random nondecreasing step function on a sorted value grid, bids in [0, h]."""
    steps = rng.random(len(grid))
    total = steps.sum()
    bids = np.cumsum(steps) / total * rng.random() * h if total > 0 else np.zeros(len(grid))
    return MonotoneStrategy(tuple(zip(grid, bids)))


def dense_monotone_hypotheses(
    n: int, m: int, seed: int, n_strategies: int = 40
) -> tuple[np.ndarray, np.ndarray]:
    """Utility rows of a dense monotone family on m random samples, plus witnesses.

    Each hypothesis is (own value, own bid) against a profile of monotone
    opponent strategies; each sample is an (n-1)-vector of opponent values.
    Own bids are placed on and just above every realized opponent bid so the
    family sweeps all win/tie prefixes, and witnesses take both signs so
    winning and losing samples are distinguishable. For n = 2 the
    no-allocation rule applies (the regime of the quadratic counting bound);
    larger n uses random allocation.
    """
    rng = np.random.default_rng(seed)
    rule: AuctionRule = FPA_NONE if n == 2 else FPA_RANDOM
    samples = rng.random((m, n - 1))
    witnesses = rng.uniform(-0.5, 0.5, size=m)
    grids = [np.sort(np.unique(samples[:, j])) for j in range(n - 1)]
    v_grid = np.linspace(0.0, 1.0, 41)
    rows = []
    for _ in range(n_strategies):
        opp = [random_monotone_strategy(rng, grids[j]) for j in range(n - 1)]
        realized = sorted({opp[j].eval(x[j]) for x in samples for j in range(n - 1)})
        bid_cands = [0.0] + realized + [b + 1e-9 for b in realized]
        for b in bid_cands:
            for v in v_grid:
                rows.append(
                    [
                        ex_post_utility(
                            rule, 0, v, [b] + [opp[j].eval(x[j]) for j in range(n - 1)]
                        )
                        for x in samples
                    ]
                )
    return np.array(rows), witnesses
