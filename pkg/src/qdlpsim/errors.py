"""Exception hierarchy shared by every module of the simulator."""


class QDLPError(Exception):
    """Base class for all simulator errors."""


class InvalidParams(QDLPError, ValueError):
    """Group parameters violate a structural invariant."""


class NotInvertible(QDLPError, ValueError):
    pass


class ExhaustedSearch(QDLPError):
    """A randomized or bounded search ran out of attempts."""


class NoSolution(QDLPError):
    """The discrete logarithm target is not in the generated subgroup."""


class DuplicateIndex(QDLPError, ValueError):
    pass


class ValueOutOfGroup(QDLPError, ValueError):
    pass


class NotHolder(QDLPError):
    """An actor tried to operate on a register it does not hold."""


class DegenerateOperation(QDLPError):
    """A register map is not injective, so it has no unitary extension."""


class InvalidKey(QDLPError, ValueError):
    pass


class InvalidMessage(QDLPError, ValueError):
    pass


class NoWitness(QDLPError):
    """Some candidate message has no (key, index) pair explaining an observation."""
