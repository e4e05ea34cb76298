"""Exception types shared across the package."""


class AuctionError(Exception):
    """Base class for every validation or domain error raised here."""


class NegativeWeight(AuctionError):
    """A probability weight is negative."""


class WeightSumZero(AuctionError):
    """Probability weights sum to (essentially) zero and cannot be normalized."""


class AtomOutOfRange(AuctionError):
    """A support atom lies outside the admissible value range."""


class IndexOutOfRange(AuctionError):
    """A bidder or box index does not exist in the given instance."""


class DimensionMismatch(AuctionError):
    """Vector lengths disagree (bidders, marginals, strategies, ...)."""


class NonMonotoneWitness(AuctionError):
    """Pointwise best-response bids failed the monotonicity postcondition."""


class TooLargeToEnumerate(AuctionError):
    """An exact enumeration oracle was asked to run beyond its size limit."""


class EmptyGrid(AuctionError):
    """A bid grid is empty."""


class CostExceedsMean(AuctionError):
    """A search cost exceeds the mean of its value distribution."""


class ClaimAboveInspection(AuctionError):
    """A descending-auction strategy claims at a price above its inspection price."""


class OddSampleCount(AuctionError):
    """A sample matrix cannot be split into two equal halves."""


class EpsTooLarge(AuctionError):
    """The hardness parameter is too large for the hard-instance family."""
