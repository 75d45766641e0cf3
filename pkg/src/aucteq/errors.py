"""Exception hierarchy shared by all modules."""


class AuctEqError(Exception):
    """Base class for every error raised by aucteq."""


class InvalidInputError(AuctEqError, ValueError):
    """Malformed input: wrong dimensions, negative bids, bad JSON shape."""


class InvariantError(AuctEqError, ValueError):
    """A domain invariant does not hold (probabilities, winner shares, ...)."""

    def __init__(self, name: str, detail: str = ""):
        self.name = name
        super().__init__(f"{name}: {detail}" if detail else name)


class RangeError(AuctEqError, ValueError):
    """Argument outside the domain of a CDF or inverse CDF."""


class ParameterError(AuctEqError, ValueError):
    """Parameters for a closed form or construction are outside their domain."""


class PreconditionError(AuctEqError):
    """An operation was called on an object that does not satisfy its precondition."""


class ConstructionError(AuctEqError):
    """An equilibrium construction could not be completed."""


class ProblemSizeError(AuctEqError):
    """The requested LP would be too large to enumerate."""
