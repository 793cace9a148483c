"""Two-photon polarization Bell tests from double-crystal SPDC in phase space.

Intensity correlations and the CHSH parameter are computed under normal
(Glauber) and symmetric (Wigner) ordering, analytically and by Monte Carlo
over stochastic amplitudes, plus a balanced-homodyne readout emulator.
"""

from .analyzer import PortAmplitudes, analyze
from .chsh import (
    ChshResult,
    chsh_s,
    closed_form_s,
    combine,
    m_estimate,
    m_value,
    sweep,
    violation_threshold,
)
from .correlator import (
    CorrelationTable,
    EstimateWithError,
    MonteCarloTable,
    analytic_correlations,
    analytic_intensity,
    isserlis_fourth_moment,
    mc_correlations,
    mc_intensities,
)
from .errors import (
    DegenerateDenominator,
    InsufficientSamples,
    NoCrossing,
    NormalOrderDirectSampling,
    SpdcBellError,
    ZeroLO,
)
from .homodyne import (
    LocalOscillator,
    QuadratureSample,
    balanced_homodyne,
    homodyne_chsh,
    homodyne_correlations,
    symmetric_intensity_correlation,
)
from .phase_space import (
    CANONICAL_CHSH,
    ChshSetting,
    Coupling,
    MeasurementSetting,
    ModeAmplitudes,
    Ordering,
    SampleConfig,
    sample_vacuum,
)
from .propagator import SecondMoments, analytic_second_moments, propagate

__version__ = "0.1.0"
