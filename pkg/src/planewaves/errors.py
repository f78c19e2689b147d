"""Exception hierarchy for the planewaves package."""


class PlaneWaveError(Exception):
    """Base class for all planewaves errors."""


class DomainError(PlaneWaveError):
    """A coordinate or parameter lies outside its admissible range."""


class SymmetryError(PlaneWaveError):
    """A matrix violates its declared symmetry type beyond tolerance."""


class SingularityError(PlaneWaveError):
    """A metric or transformation degenerates where regularity is required."""


class IntegrationError(PlaneWaveError):
    """An ODE integration failed (step underflow, solver breakdown)."""


class PairingError(PlaneWaveError):
    """A conserved pairing drifted beyond tolerance (inconsistent inputs)."""


class ConversionError(PlaneWaveError):
    """A form conversion precondition or postcondition failed."""


class NotApplicableError(PlaneWaveError):
    """The operation's hypothesis excludes this input (flat, conformally trivial, ...)."""


class InconclusiveError(PlaneWaveError):
    """The decision procedure could not certify either verdict."""


class SchemaError(PlaneWaveError):
    """A JSON document failed schema validation."""
