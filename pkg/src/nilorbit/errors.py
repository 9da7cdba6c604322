"""Exception types shared across the package."""


class NilorbitError(Exception):
    """Base class for all errors raised by nilorbit."""


class BackendMismatchError(NilorbitError, TypeError):
    """Operands live on different scalar backends (exact vs float)."""


class DimensionError(NilorbitError, ValueError):
    pass


class StratumEmptyError(NilorbitError, ValueError):
    """Requested a nilpotent stratum N^p_k with p > k."""


class NotTangentError(NilorbitError, ValueError):
    """A vector is not tangent to the coadjoint orbit at the base point."""


class PreconditionError(NilorbitError, ValueError):
    pass


class NotLagrangianError(PreconditionError):
    pass


class TransversalityError(PreconditionError):
    """A point lies outside the transversality locus used by the cone model."""


class NoRationalLiftError(NilorbitError, ValueError):
    """The fiber over a rational nilpotent has no point defined over Q."""


class SamplingError(NilorbitError, RuntimeError):
    """Random sampling gave up after the retry cap."""
