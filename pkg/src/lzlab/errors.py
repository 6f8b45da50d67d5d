"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericalError
(and subclasses) -> 3, BudgetExceededError -> 4.
"""


class LzlabError(Exception):
    """Base class for all package errors."""


class ConfigError(LzlabError):
    """Invalid or inconsistent user configuration."""


class DomainError(LzlabError):
    """Evaluation requested outside the analyticity sector."""


class NumericalError(LzlabError):
    """A numerical routine failed to reach its accuracy contract."""


class DegenerateZeroError(NumericalError):
    """A potential zero with |V'| below the simplicity threshold."""


class NonConvergenceError(NumericalError):
    """Iteration (Newton, bisection, quadrature refinement) did not converge."""


class EscapedBasinError(NumericalError):
    """Turning-point iteration left the basin of its seeding crossing."""


class BranchAmbiguityError(NumericalError):
    """Square-root branch continuation could not decide between sheets."""


class RegimeError(LzlabError):
    """An asymptotic formula was requested outside its validity regime."""


class GuardViolationError(LzlabError):
    """Asymptotic matching requested at a point where the guard fails."""


class StepUnderflowError(NumericalError):
    """Adaptive integrator needs steps below the representable floor."""


class TDependenceError(NumericalError):
    """Scattering matrix changed beyond tolerance when the truncation time grew."""


class CanonicalityError(NumericalError):
    """A path declared canonical fails its monotonicity certificate."""


class BudgetExceededError(LzlabError):
    """Estimated work exceeds the configured budget."""
