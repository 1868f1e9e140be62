"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class UnsupportedInputError(ValueError):
    """A closed-form routine was handed a state it does not cover."""


class DegenerateStateError(ValueError):
    """The evolved state is (numerically) pure, so the closed-form SLD blows up."""


class EllipticViolationError(ValueError):
    """The quadratic form is not elliptic (A**2 <= 4 B**2); no discrete number-operator form."""

    def __init__(self, a_coef, b_coef):
        self.a_coef = a_coef
        self.b_coef = b_coef
        super().__init__(
            f"quadratic form is not elliptic: A={a_coef:.6g}, B={b_coef:.6g} (A^2 <= 4B^2)"
        )


class InsufficientDimensionError(RuntimeError):
    """The Fock truncation loses more probability than the tail budget allows."""


class NonConvergenceError(RuntimeError):
    """An iterative procedure hit its cap without meeting its tolerance."""
