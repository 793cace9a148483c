"""Exception types raised by the simulator."""


class SpdcBellError(ValueError):
    """Base class for all domain errors."""


class InsufficientSamples(SpdcBellError):
    """Too few trajectories for a meaningful standard error."""


class NormalOrderDirectSampling(SpdcBellError):
    """Direct trajectory averaging was requested with normal ordering.

    Glauber-representation vacuum inputs have zero variance, so every
    trajectory is identically zero and direct averages carry no information.
    Normal-ordered Monte Carlo estimates must go through vacuum subtraction
    on symmetric (Wigner) samples instead.
    """


class DegenerateDenominator(SpdcBellError):
    """All four coincidence entries vanish, so the normalized correlation is 0/0."""


class NoCrossing(SpdcBellError):
    """The CHSH curve never reaches the classical bound."""


class ZeroLO(SpdcBellError):
    """Local oscillator with zero amplitude cannot define a quadrature."""
