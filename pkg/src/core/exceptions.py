# ---------------------------------------------
# EXCEPTIONS
# ---------------------------------------------


class LabError(Exception):
    """Base class for every error raised by the lab."""


# ---------------------------------------------
# DOMAIN AND MARKING
# ---------------------------------------------

class DomainError(LabError):
    """Raised when a lattice domain cannot be built."""


class EmptyDomain(DomainError):
    """No lattice point of the requested component exists."""


class NotInside(DomainError):
    """The interior point is not strictly inside the polygon."""


class DomainTopologyError(DomainError):
    """The discretised domain is not simply connected."""


class MarkingError(LabError):
    """Raised when four boundary marks cannot form a rectangle marking."""


class OrderViolation(MarkingError):
    """The marks are not in clockwise order along the boundary."""


class DegenerateArc(MarkingError):
    """Two marks collapse onto the same boundary vertex or cut."""


# ---------------------------------------------
# SAMPLING AND EXPLORATION
# ---------------------------------------------

class BoundaryConditionError(LabError):
    """Fixed arcs prescribe conflicting signs on a shared vertex."""


class TooLarge(LabError):
    """Exact enumeration requested over too many free spins."""


class ExplorerError(LabError):
    """Internal-consistency failure of an exploration."""


class Stuck(ExplorerError):
    """No admissible step exists although the target is reachable."""


class NoHit(ExplorerError):
    """The exploration touched neither [bc] nor [cd]."""


class IdentityViolation(ExplorerError):
    """An explorer hit disagrees with its crossing event on one sample."""


# ---------------------------------------------
# NUMERICS AND EXPERIMENTS
# ---------------------------------------------

class OrderingViolation(LabError):
    """O_L <= U <= O_R could not be restored after a reflection step."""


class NoConvergence(LabError):
    """An iterative solver hit its iteration cap."""


class SpecError(LabError):
    """An experiment spec or domain file is malformed."""
