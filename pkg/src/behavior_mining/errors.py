"""Exception hierarchy.

Everything raised on bad input derives from :class:`InputError`; numerical
breakdowns (non-converging iterations) raise :class:`NumericalFailure`.  The
command line maps the two families to exit codes 1 and 2.
"""


class BehaviorMiningError(Exception):
    pass


class InputError(BehaviorMiningError, ValueError):
    pass


class NumericalFailure(BehaviorMiningError, ArithmeticError):
    pass


# log ingestion
class MalformedRecord(InputError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class UnknownActionKind(MalformedRecord):
    pass


class EmptyLog(InputError):
    pass


class EmptyCollection(InputError):
    pass


# segmentation
class TooFewSequences(InputError):
    pass


class DegenerateData(InputError):
    pass


class BadThresholds(InputError):
    pass


# sequence clustering
class TooFewItems(InputError):
    pass


class BadK(InputError):
    pass


class EmptyCluster(InputError):
    pass


class TooFewClusters(InputError):
    pass


# learner clustering
class NoModels(InputError):
    pass


class TooFewLearners(InputError):
    pass


class DimensionMismatch(InputError):
    pass


# conceptual models
class SchemaError(InputError):
    pass


class DanglingEndpoint(SchemaError):
    pass


class DuplicateComponentId(SchemaError):
    pass


# statistics
class ZeroExpected(InputError):
    pass


class DegenerateVariance(InputError):
    pass


class TooFewValues(InputError):
    pass


# synthesis / evaluation
class InvalidSpec(InputError):
    pass


class LengthMismatch(InputError):
    pass
