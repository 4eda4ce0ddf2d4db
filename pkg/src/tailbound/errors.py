class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class UnboundedSummandError(DomainError):
    """Some summand carries no finite variance, skewness or kurtosis constraint."""


class DegenerateError(DomainError):
    """The effective variance is zero or too small to build a model."""
