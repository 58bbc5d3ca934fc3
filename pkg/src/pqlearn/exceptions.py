"""Exception hierarchy shared by every module of the package."""


class PQLError(Exception):
    """Base class for all package errors."""


class PreconditionError(PQLError, ValueError):
    """The input violates a documented precondition (CLI exit code 2)."""


class LearnerFailure(PQLError, RuntimeError):
    """A randomized learner gave up after exhausting its retry budget (CLI exit code 3)."""


class CyclicGraph(PreconditionError):
    pass


class NotArborescence(PreconditionError):
    pass


class InfeasibleSpec(PreconditionError):
    pass


class NoValidCrossEdge(PreconditionError):
    pass


class VertexOutOfRange(PreconditionError, IndexError):
    pass


class VertexNotInScope(PreconditionError):
    pass


class EmptyBatch(PreconditionError):
    pass


class EmptyVertexSet(PreconditionError):
    pass


class PreconditionViolated(PreconditionError):
    """Raised when oracle answers are inconsistent with the promised graph class."""


class NoParent(PreconditionError):
    pass


class NoCrossEdgeFound(PreconditionError):
    pass


class AmbiguousCandidate(PreconditionError):
    pass


class NotButterflyCardinality(PreconditionError):
    pass


class RootNotProgressing(PreconditionError):
    pass


class IterationCapExceeded(LearnerFailure):
    pass


class LoopCapExceeded(LearnerFailure):
    pass
