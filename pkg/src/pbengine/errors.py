"""
Exception hierarchy shared by every module.
"""


class PBError(Exception):
    """Base class of all errors raised by :py:mod:`pbengine`."""


class ModelError(PBError, ValueError):
    """Malformed domain object (instance, ballot, profile, allocation)."""


class InvalidInstance(ModelError):
    """Instance invariants violated (duplicate ids, non-positive or oversized costs)."""


class InvalidBallot(ModelError):
    """Ballot invariants violated."""


class UnknownProject(ModelError):
    """A project id not present in the instance was referenced."""


class InfeasibleAllocation(ModelError):
    """A set of projects whose total cost exceeds the budget limit."""


class InconsistentInputs(ModelError):
    """Instance, profile and metadata do not describe the same election."""


class FormatMismatch(ModelError):
    """Ballot variant incompatible with the requested ballot format."""


class WrongProfileVariant(ModelError):
    """Profile variant not accepted by the requested operation."""


IncompatibleProfile = WrongProfileVariant


class MissingSatisfaction(ModelError):
    """Operation on approval ballots called without a satisfaction function."""


class MissingContext(ModelError):
    """Profile-dependent satisfaction function evaluated without its profile."""


class EmptyApprovalSet(ModelError):
    """Relative satisfaction of a voter who approves nothing."""


class UnsupportedProject(ModelError):
    """Project without supporters where supporters are required."""


class NonIntegerBudget(ModelError):
    """Operation requires an integral budget limit."""


class InvalidTransform(ModelError):
    """Instance transform that violates its own preconditions."""


class UnknownAxiom(ModelError):
    """Axiom name not in the registry."""


class PreconditionUnmet(ModelError):
    """Input outside the premise of the axiom being checked."""


class MethodInapplicable(ModelError):
    """Completion method not applicable to the given rule or profile."""


class UnsupportedObjective(ModelError):
    """Objective that cannot be optimised exactly for the given satisfaction."""


class CapExceeded(PBError):
    """Enumeration size above the configured cap."""


class ScaleOverflow(PBError):
    """Integer-rescaled budget above the configured cap."""


class PabulibError(PBError, ValueError):
    """
    Parse error in a Pabulib document.

    Parameters
    ----------
        message : str
            Human readable description.
        line : int, optional
            One-based line number of the offending line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MissingSection(PabulibError):
    """A required section header is absent."""


class MissingColumn(PabulibError):
    """A required column is absent from a section header row."""


class MissingMetadata(PabulibError):
    """A required META key is absent."""


class NonPositiveCost(PabulibError):
    """A cost or the budget is zero or negative."""


class DuplicateProjectId(PabulibError):
    """The same project id appears twice in PROJECTS."""


class UnknownVoteType(PabulibError):
    """The vote_type is not one of the supported ballot kinds."""


class MalformedNumber(PabulibError):
    """A numeric field could not be parsed exactly."""


class UnknownProjectReference(PabulibError):
    """A vote references a project id not listed in PROJECTS."""
