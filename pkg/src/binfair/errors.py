"""Exception hierarchy for the binfair library.

Contract violations (bad caller input) and internal guarantee violations
(a solver produced something its own theory says cannot happen) are kept
distinct so callers can tell misuse apart from bugs.
"""


class BinfairError(Exception):
    """Base class for all library errors."""


class InvalidSizeError(BinfairError):
    """An item size lies outside the permitted interval (0, 1]."""


class ContractViolationError(BinfairError):
    """A documented precondition was not met by the caller."""


class InvalidWitnessError(BinfairError):
    """A certificate or witness partition fails its structural checks."""


class InvalidAllocationError(BinfairError):
    """An allocation is not a partition of the item set."""


class CapacityExceededError(BinfairError):
    """An exact search was requested beyond the configured size cap."""


class LemmaViolationError(BinfairError):
    """A step the supporting lemmas guarantee to succeed has failed.

    Signals either invalid certificates or a bug; never expected on
    valid inputs.
    """


class TheoremViolationError(BinfairError):
    """A constructed witness misses the guarantee it is supposed to meet."""


class AlgorithmStuckError(BinfairError):
    """The round loop of the cardinal cover solver made no progress."""
