"""Monotone bidding strategies as right-continuous step functions."""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Sequence

from .errors import DimensionMismatch


@dataclass(frozen=True)
class MonotoneStrategy:
    """Nondecreasing map from values to bids.

    ``breakpoints`` is a sorted list of (value threshold, bid); the bid at a
    value v is the bid of the largest threshold <= v, or ``default_bid`` when
    v lies below every threshold. Right-continuity makes the representation
    lossless on discrete supports and fixes the bid at off-support values.
    """

    breakpoints: tuple[tuple[float, float], ...] = ()
    default_bid: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "breakpoints", tuple((float(t), float(b)) for t, b in self.breakpoints)
        )
        thresholds = [t for t, _ in self.breakpoints]
        bids = [b for _, b in self.breakpoints]
        if any(b <= a for a, b in zip(thresholds, thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")
        if any(y < x for x, y in zip(bids, bids[1:])):
            raise ValueError("bids must be nondecreasing")
        if self.default_bid < 0 or (bids and bids[0] < self.default_bid):
            raise ValueError("bids must be >= default_bid >= 0")

    def eval(self, v: float) -> float:
        """Bid at value v (right-continuous step lookup)."""
        if v < 0:
            raise ValueError("value must be nonnegative")
        idx = bisect_right([t for t, _ in self.breakpoints], v) - 1
        return self.breakpoints[idx][1] if idx >= 0 else self.default_bid

    @property
    def max_bid(self) -> float:
        return self.breakpoints[-1][1] if self.breakpoints else self.default_bid

    def to_json(self) -> dict:
        return {
            "default_bid": self.default_bid,
            "breakpoints": [[t, b] for t, b in self.breakpoints],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MonotoneStrategy":
        return cls(
            tuple((t, b) for t, b in obj.get("breakpoints", [])),
            float(obj.get("default_bid", 0.0)),
        )


def constant(bid: float) -> MonotoneStrategy:
    """Strategy that bids the same amount at every value."""
    return MonotoneStrategy(((0.0, float(bid)),)) if bid > 0 else MonotoneStrategy()


def shade(grid: Sequence[float], alpha: float) -> MonotoneStrategy:
    """The linear-shading strategy b(v) = alpha * v on a value grid."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    pts = sorted(set(float(g) for g in grid))
    return MonotoneStrategy(tuple((g, alpha * g) for g in pts))


def check_monotone(breakpoints: Sequence[tuple[float, float]]) -> bool:
    """True iff a raw breakpoint list describes a monotone strategy."""
    pts = sorted(breakpoints)
    if any(t2 <= t1 for (t1, _), (t2, _) in zip(pts, pts[1:])):
        return False  # duplicate thresholds do not define a function
    return all(b2 >= b1 for (_, b1), (_, b2) in zip(pts, pts[1:]))


@dataclass(frozen=True)
class StrategyProfile:
    """One monotone strategy per bidder."""

    strategies: tuple[MonotoneStrategy, ...]

    def __post_init__(self) -> None:
        if not self.strategies:
            raise DimensionMismatch("profile needs at least one strategy")

    def __iter__(self):
        return iter(self.strategies)

    def __getitem__(self, i: int) -> MonotoneStrategy:
        return self.strategies[i]

    def __len__(self) -> int:
        return len(self.strategies)

    @property
    def n(self) -> int:
        return len(self.strategies)

    def replace(self, i: int, s: MonotoneStrategy) -> "StrategyProfile":
        parts = list(self.strategies)
        parts[i] = s
        return StrategyProfile(tuple(parts))

    def to_json(self) -> list:
        return [s.to_json() for s in self.strategies]

    @classmethod
    def from_json(cls, obj: list) -> "StrategyProfile":
        return cls(tuple(MonotoneStrategy.from_json(s) for s in obj))
