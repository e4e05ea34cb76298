"""Finite-support value distributions: products, sampling, empirical marginals.

Everything in this module is exact: distributions are atom/weight lists,
expectations are finite sums, and sampling is a pure function of a seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import AtomOutOfRange, DimensionMismatch, NegativeWeight, WeightSumZero

# Tolerance for "weights sum to 1"; inputs are renormalized on construction.
WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability distribution over finitely many nonnegative atoms.

    Atoms are strictly increasing, weights positive and summing to one.
    Use :func:`make_discrete` to build one from raw (possibly duplicated,
    unnormalized) data.
    """

    atoms: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.atoms or len(self.atoms) != len(self.weights):
            raise DimensionMismatch("atoms and weights must be nonempty and equal length")
        if any(b <= a for a, b in zip(self.atoms, self.atoms[1:])):
            raise ValueError("atoms must be strictly increasing")
        if self.atoms[0] < 0:
            raise AtomOutOfRange(f"atom {self.atoms[0]} < 0")
        if any(w <= 0 for w in self.weights):
            raise NegativeWeight("all weights must be strictly positive")
        if abs(sum(self.weights) - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must sum to 1 within 1e-12")

    def __iter__(self):
        return iter(zip(self.atoms, self.weights))

    @property
    def max_atom(self) -> float:
        return self.atoms[-1]

    def mean(self) -> float:
        return sum(a * w for a, w in self)

    def prob_at(self, x: float) -> float:
        """P(v == x), exact float comparison."""
        for a, w in self:
            if a == x:
                return w
        return 0.0

    def prob_below(self, x: float) -> float:
        """P(v < x)."""
        return sum(w for a, w in self if a < x)

    def prob_at_most(self, x: float) -> float:
        """P(v <= x)."""
        return sum(w for a, w in self if a <= x)

    def expected_excess(self, sigma: float) -> float:
        """E[max(v - sigma, 0)]."""
        return sum(w * (a - sigma) for a, w in self if a > sigma)

    def to_json(self) -> dict:
        return {"atoms": list(self.atoms), "weights": list(self.weights)}

    @classmethod
    def from_json(cls, obj: dict) -> "DiscreteDistribution":
        return make_discrete(obj["atoms"], obj["weights"])


def make_discrete(
    atoms: Sequence[float], weights: Sequence[float], h: float | None = None
) -> DiscreteDistribution:
    """Build a distribution from raw atom/weight lists.

    Sorts atoms, merges duplicates by summing weights, drops zero-weight
    atoms, and renormalizes. ``h``, when given, bounds the admissible atoms.
    """
    if not atoms or len(atoms) != len(weights):
        raise DimensionMismatch("atoms and weights must be nonempty and equal length")
    if any(w < 0 for w in weights):
        raise NegativeWeight("weights must be nonnegative")
    total = float(sum(weights))
    if total <= WEIGHT_TOL:
        raise WeightSumZero("weights sum to zero")
    for a in atoms:
        if a < 0 or (h is not None and a > h):
            raise AtomOutOfRange(f"atom {a} outside [0, {h if h is not None else 'inf'}]")
    merged: dict[float, float] = {}
    for a, w in zip(atoms, weights):
        if w > 0:
            merged[float(a)] = merged.get(float(a), 0.0) + w / total
    pairs = sorted(merged.items())
    return DiscreteDistribution(tuple(a for a, _ in pairs), tuple(w for _, w in pairs))


def point_mass(value: float) -> DiscreteDistribution:
    return DiscreteDistribution((float(value),), (1.0,))


def uniform_on(atoms: Sequence[float]) -> DiscreteDistribution:
    return make_discrete(list(atoms), [1.0] * len(atoms))


def truncate_at(f: DiscreteDistribution, sigma: float) -> DiscreteDistribution:
    """Distribution of min(v, sigma): mass above sigma collapses onto sigma."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma >= f.max_atom:
        return f
    below = [(a, w) for a, w in f if a < sigma]
    tail = sum(w for a, w in f if a >= sigma)
    atoms = tuple(a for a, _ in below) + (float(sigma),)
    weights = tuple(w for _, w in below) + (tail,)
    return DiscreteDistribution(atoms, weights)


@dataclass(frozen=True)
class ProductDistribution:
    """Independent product of per-bidder discrete distributions.

    ``h`` is the common upper bound on values (and bids); it defaults to the
    largest atom across marginals.
    """

    marginals: tuple[DiscreteDistribution, ...]
    h: float

    def __post_init__(self) -> None:
        if not self.marginals:
            raise DimensionMismatch("need at least one marginal")
        for f in self.marginals:
            if f.max_atom > self.h:
                raise AtomOutOfRange(f"atom {f.max_atom} exceeds H={self.h}")

    @property
    def n(self) -> int:
        return len(self.marginals)

    def to_json(self) -> dict:
        return {"H": self.h, "marginals": [f.to_json() for f in self.marginals]}

    @classmethod
    def from_json(cls, obj: dict) -> "ProductDistribution":
        marginals = tuple(DiscreteDistribution.from_json(f) for f in obj["marginals"])
        h = obj.get("H")
        return product_of(marginals, h)

    @classmethod
    def iid(cls, f: DiscreteDistribution, n: int, h: float | None = None) -> "ProductDistribution":
        return product_of((f,) * n, h)


def product_of(
    marginals: Iterable[DiscreteDistribution], h: float | None = None
) -> ProductDistribution:
    ms = tuple(marginals)
    if h is None:
        h = max(f.max_atom for f in ms)
    return ProductDistribution(ms, float(h))


@dataclass(frozen=True)
class SampleMatrix:
    """m x n matrix of sampled value profiles; row j is one joint sample.

    ``seed`` records the generator seed (0 when loaded from external data).
    """

    values: np.ndarray
    seed: int = 0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1:
            raise DimensionMismatch("values must be a nonempty 2-D array")
        if np.any(v < 0):
            raise AtomOutOfRange("sample values must be nonnegative")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def row(self, j: int) -> tuple[float, ...]:
        return tuple(self.values[j])

    def to_csv(self, path) -> None:
        np.savetxt(path, self.values, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "SampleMatrix":
        return cls(np.atleast_2d(np.loadtxt(path, delimiter=",")), seed=0)


def sample_matrix(f: ProductDistribution, m: int, seed: int) -> SampleMatrix:
    """Draw m i.i.d. rows from the product distribution, deterministically in seed."""
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = np.random.default_rng(seed)
    cols = [
        rng.choice(np.array(marg.atoms), size=m, p=np.array(marg.weights))
        for marg in f.marginals
    ]
    return SampleMatrix(np.column_stack(cols), seed=seed)


def empirical_marginals(s: SampleMatrix, h: float | None = None) -> ProductDistribution:
    """Product of per-column uniform distributions over the sampled values."""
    marginals = []
    for col in s.values.T:
        uniq, counts = np.unique(col, return_counts=True)
        marginals.append(make_discrete(uniq.tolist(), (counts / s.m).tolist()))
    return product_of(marginals, h)


def load_instance(path) -> ProductDistribution:
    with open(path) as fh:
        return ProductDistribution.from_json(json.load(fh))
