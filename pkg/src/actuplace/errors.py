"""Exception hierarchy.

Errors are split into two families so the CLI can map them onto exit codes:
:class:`InputError` (bad data or arguments) and :class:`InfeasibleError`
(well-formed problem with no admissible actuator set).
"""


class ActuplaceError(Exception):
    """Base class for all package errors."""


class InputError(ActuplaceError, ValueError):
    """Invalid input data or parameters."""


class InfeasibleError(ActuplaceError):
    """The placement problem admits no feasible solution."""


# -- network ---------------------------------------------------------------

class MalformedInput(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotStronglyConnected(InputError):
    pass


class NotGraphical(InputError):
    pass


class ConnectivityUnreachable(InputError):
    pass


class DisconnectedGrid(InputError):
    pass


class NonpositiveDamping(InputError):
    pass


# -- numerics --------------------------------------------------------------

class HorizonNonpositive(InputError):
    pass


class EpsNonpositive(InputError):
    pass


class NonpositiveParameter(InputError):
    pass


class SingularGramian(ActuplaceError, ArithmeticError):
    """The Gramian is numerically singular, so ``tr(W^-1)`` is undefined."""


class SingularGramianEncountered(SingularGramian):
    """An epsilon-selection iterate produced a numerically singular Gramian."""


class NodeAlreadyInSet(InputError):
    pass


# -- feasibility -----------------------------------------------------------

class CardinalityExceeded(InputError):
    pass


class TooManyExclusions(InputError):
    pass


class NotActuatable(InputError):
    pass


# -- greedy / solvers ------------------------------------------------------

class InfeasibleAtSize(InfeasibleError):
    pass


class KBelowMinimum(InfeasibleError):
    pass


class Infeasible(InfeasibleError):
    pass


class NoFeasibleSample(InfeasibleError):
    pass


class EnumerationTooLarge(InputError):
    pass


# -- guarantees / oracle ---------------------------------------------------

class GroundSetTooLarge(InputError):
    pass


class NotIncreasing(InputError):
    pass


class DomainError(InputError):
    pass


class OrderingViolated(InputError):
    pass


class DeltaOutOfRange(InputError):
    pass


class DimensionConstraintViolated(InputError):
    pass


class UnknownCommand(InputError):
    pass
