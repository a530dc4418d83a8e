"""Exception hierarchy shared across the package."""


class FeketeDynError(Exception):
    """Base class for all library errors."""


class DegenerateLift(FeketeDynError):
    """The two homogeneous forms share a projective zero (zero resultant)."""


class DegreeCapExceeded(FeketeDynError):
    """Symbolic iteration would exceed the configured degree cap."""


class InexactDivision(FeketeDynError):
    """A dynatomic factor failed to divide exactly; indicates an upstream bug."""


class RootFindingDiverged(FeketeDynError):
    """The simultaneous root iteration exhausted its budget."""


class IncompleteRoots(FeketeDynError):
    """A root list does not account for the full degree of its polynomial."""


class NotGoodLift(FeketeDynError):
    """An operation requiring a resultant-one lift got an unnormalized one."""


class PreimageSolveFailed(FeketeDynError):
    """A degree-d preimage solve exceeded its residual tolerance."""


class EmptySample(FeketeDynError):
    """Monte-Carlo reduction over an empty sample list."""


class NegativeA(FeketeDynError):
    """The discrepancy-bound scalar came out negative; indicates a numerics bug."""


class ZeroInput(FeketeDynError):
    """Valuation or factorization of zero requested."""


class ZeroDiscriminant(FeketeDynError):
    """Arithmetic report requested for a configuration with vanishing discriminant."""


class IntegralityViolation(FeketeDynError):
    """An exact arithmetic prediction failed; release-blocking."""


class MapSpecError(FeketeDynError):
    """Malformed map-spec file."""


class UnknownObservable(FeketeDynError):
    """Observable name not present in the registry."""


class ConditionWarning(UserWarning):
    """Clustered (near-parabolic) roots were merged; discriminant is near zero."""
