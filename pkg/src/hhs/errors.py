"""Exception hierarchy shared by every module.

Exit codes used by the command line map onto these classes: structural
problems exit with 2, an exhausted search bound with 3.
"""


class HhsError(Exception):
    """Base class for all errors raised by the toolkit."""

    exit_code = 2


class StructuralError(HhsError):
    """Input is malformed: dangling ids, missing tables, wrong shapes."""


class UnknownDomainError(StructuralError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DisconnectedGraphError(HhsError):
    def __init__(self, u, v):
        super().__init__(f"graph is disconnected: no path between vertices {u} and {v}")
        self.u = u
        self.v = v


class ActionError(HhsError):
    """A group-action generator is not a bijection or breaks the relations."""


class NetError(HhsError):
    """A net or approximation graph could not be built at the requested scale."""


class CosetEmbeddingError(HhsError):
    """The nesting tests for an added coset family disagree."""

    exit_code = 1

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IsolationError(HhsError):
    """A proposed family does not isolate orthogonality."""

    exit_code = 1

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InconclusiveError(HhsError):
    """A bounded search gave up before deciding."""

    exit_code = 3
