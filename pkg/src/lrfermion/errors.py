"""Exception types shared across the package."""


class NumericsError(RuntimeError):
    """A numerical procedure failed to reach its stated tolerance."""


class ConvergenceError(NumericsError):
    """Adaptive quadrature did not converge within the subdivision budget."""


class NonPhysicalStateError(NumericsError):
    """A reconstructed density matrix violates positivity beyond tolerance."""


class DegenerateGroundStateError(NumericsError):
    """Ground-state correlations are ill-conditioned (gapless ring)."""
