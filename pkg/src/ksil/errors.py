"""Exception hierarchy.

Everything raised on purpose by this package derives from :class:`KsilError`.
Problems with the input data additionally derive from :class:`DataError`, which
the CLI maps to exit code 2.
"""


class KsilError(Exception):
    pass


class DataError(KsilError, ValueError):
    pass


class EmptyDataset(DataError):
    pass


class RaggedDimensions(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class LabelLengthMismatch(DataError):
    pass


class ParseError(DataError):
    pass


class MixedArity(ParseError):
    pass


class InvalidSpec(DataError):
    pass


class InvalidConfig(KsilError, ValueError):
    pass


class KTooSmall(InvalidConfig):
    pass


class KTooLarge(InvalidConfig):
    pass


class SingleCluster(KsilError, ValueError):
    pass


class EmptyIndexSet(KsilError, ValueError):
    pass


class SampleTooSmall(KsilError, ValueError):
    pass


class ZeroClusterWeight(KsilError, ArithmeticError):
    pass


class IrreparablePartition(KsilError, ValueError):
    pass


class LengthMismatch(KsilError, ValueError):
    pass


class ConstantSequence(KsilError, ValueError):
    pass


class TooFewPairs(KsilError, ValueError):
    pass


class ZeroBaseline(KsilError, ZeroDivisionError):
    pass


class TooFewSamples(KsilError, ValueError):
    pass
