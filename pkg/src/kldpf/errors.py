"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ContractError(ValueError):
    """A precondition on an object's state was not met (e.g. unnormalized weights)."""


class InfiniteDivergenceError(ArithmeticError):
    """KL divergence is infinite: p puts mass where q has none."""


class DegenerateWeightsError(ArithmeticError):
    """All particle weights are zero or non-finite."""

    def __init__(self, message="all particle weights are zero or non-finite", step=None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class ConfigError(ValueError):
    """Invalid benchmark configuration."""
