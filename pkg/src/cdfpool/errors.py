"""Exception types shared across the package."""


class CdfPoolError(Exception):
    """Base class for all cdfpool errors."""


class DensityUnavailable(CdfPoolError):
    """The distribution has point masses, so no Lebesgue density exists."""


class MomentUnavailable(CdfPoolError):
    """A requested moment could not be computed to tolerance."""


class MedianUndefined(CdfPoolError):
    """The CDF is flat at probability 1/2, so there is no unique median."""


class DomainViolation(CdfPoolError):
    """A value fell outside the mathematical domain of an operation."""


class WeightConstraintViolation(CdfPoolError):
    """Pool weights violate the constraint required by the pool kind."""


class LengthMismatch(CdfPoolError):
    """Paired sequences have different lengths."""


class TooFewSamples(CdfPoolError):
    """Not enough samples for the requested statistic."""


class EmptyInput(CdfPoolError):
    """An input that must be nonempty was empty."""


class DegenerateDesign(CdfPoolError):
    """Regression design matrix is rank-deficient (e.g. constant covariate)."""


class InvalidConfig(CdfPoolError):
    """A simulation or run configuration is inconsistent."""


class SchemaError(CdfPoolError):
    """A data or parameter file does not conform to the expected schema."""
