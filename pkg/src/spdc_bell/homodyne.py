"""Balanced homodyne readout of the detector ports.

Each port is mixed with a strong local oscillator on a 50/50 beam splitter
and the photocurrent difference yields one field quadrature.  Summing the
squared X and Y quadratures gives the symmetrically ordered intensity, so
coincidences built this way reproduce the Wigner-order CHSH curve.

By default X and Y of a port are read from the same trajectory, which is
legitimate for phase-space records but not for a single physical shot.
``physical=True`` first splits each port on a vacuum-loaded beam splitter and
reads X on one half and Y on the other; this adds half a quantum of vacuum
noise to every intensity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analyzer import PortAmplitudes
from .chsh import ChshResult, combine
from .correlator import (
    PORT_PAIRS,
    EstimateWithError,
    MonteCarloTable,
    _estimates,
    wigner_ports,
)
from .errors import ZeroLO
from .phase_space import (
    CANONICAL_CHSH,
    ChshSetting,
    Coupling,
    MeasurementSetting,
    Ordering,
    SampleConfig,
    accumulate,
    sample_vacuum,
)

DEFAULT_LO_AMPLITUDE = 1e3


@dataclass(frozen=True)
class LocalOscillator:
    amplitude: float = DEFAULT_LO_AMPLITUDE
    phase: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.phase):
            raise ValueError("LO phase must be finite")
        if not math.isfinite(self.amplitude) or self.amplitude < 0:
            raise ValueError("LO amplitude must be finite and non-negative")

    @property
    def beta(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))


@dataclass(frozen=True)
class QuadratureSample:
    x: float | np.ndarray
    y: float | np.ndarray

    @property
    def intensity(self):
        return self.x ** 2 + self.y ** 2


def beam_splitter(a, b):
    """Lossless 50/50 splitter: (a + b)/sqrt2, (a - b)/sqrt2."""
    r = 1 / math.sqrt(2)
    return r * (a + b), r * (a - b)


def balanced_homodyne(port, lo: LocalOscillator):
    """Quadrature X_phase = Re(a e^{-i phase}) read out against ``lo``.

    The outputs of the splitter are (a + beta)/sqrt2 and (a - beta)/sqrt2,
    whose intensity difference is beta* a + beta a*.  That difference is
    evaluated in this expanded form because subtracting two |beta|^2-sized
    intensities in floating point would cancel most of the signal digits.
    """
    if lo.amplitude == 0:
        raise ZeroLO("local oscillator amplitude must be positive")
    beta = lo.beta
    difference = 2 * np.real(np.conj(beta) * port)
    return difference / (2 * lo.amplitude)


def measure_port(port, lo_amplitude: float = DEFAULT_LO_AMPLITUDE) -> QuadratureSample:
    x = balanced_homodyne(port, LocalOscillator(lo_amplitude, 0.0))
    y = balanced_homodyne(port, LocalOscillator(lo_amplitude, math.pi / 2))
    return QuadratureSample(x, y)


def measure_port_physical(port, vacuum, lo_amplitude: float = DEFAULT_LO_AMPLITUDE) -> QuadratureSample:
    """Split ``port`` with an injected ``vacuum`` amplitude, read X and Y on the halves."""
    half_x, half_y = beam_splitter(port, vacuum)
    x = math.sqrt(2) * balanced_homodyne(half_x, LocalOscillator(lo_amplitude, 0.0))
    y = math.sqrt(2) * balanced_homodyne(half_y, LocalOscillator(lo_amplitude, math.pi / 2))
    return QuadratureSample(x, y)


def measure_quadratures(ports: PortAmplitudes | np.ndarray, lo_amplitude: float = DEFAULT_LO_AMPLITUDE,
                        physical: bool = False, rng: np.random.Generator | None = None
                        ) -> list[QuadratureSample]:
    """X/Y records for s+, s-, i+, i- (in that order)."""
    arr = ports.as_array() if isinstance(ports, PortAmplitudes) else np.asarray(ports)
    if not physical:
        return [measure_port(arr[k], lo_amplitude) for k in range(4)]
    if rng is None:
        raise ValueError("physical mode needs a random generator for the splitter vacuum")
    size = arr.shape[1] if arr.ndim > 1 else None
    vac = sample_vacuum(Ordering.SYMMETRIC, rng, size)
    vac = np.array([vac.s_h, vac.s_v, vac.i_h, vac.i_v])
    return [measure_port_physical(arr[k], vac[k], lo_amplitude) for k in range(4)]


def quadrature_products(quads: Sequence[QuadratureSample]) -> dict[str, np.ndarray]:
    """The XX, XY, YX, YY signal-idler quadrature products for every port pair."""
    out = {}
    names = ("+", "-")
    for s, i in PORT_PAIRS:
        tag = f"{names[s]}{names[i - 2]}"
        qs, qi = quads[s], quads[i]
        out[f"xx{tag}"] = qs.x * qi.x
        out[f"xy{tag}"] = qs.x * qi.y
        out[f"yx{tag}"] = qs.y * qi.x
        out[f"yy{tag}"] = qs.y * qi.y
    return out


def _homodyne_features(coupling, setting, lo_amplitude, physical):
    def features(rng, m):
        ports = wigner_ports(rng, m, coupling, setting)
        quads = measure_quadratures(ports, lo_amplitude, physical, rng)
        inten = [q.intensity for q in quads]
        return np.stack([inten[s] * inten[i] for s, i in PORT_PAIRS], axis=1)
    return features


def homodyne_correlations(coupling, setting: MeasurementSetting, config: SampleConfig,
                          lo_amplitude: float = DEFAULT_LO_AMPLITUDE, physical: bool = False,
                          key: Sequence[int] = ()) -> MonteCarloTable:
    """All four coincidences reconstructed from quadrature records."""
    coupling = Coupling.coerce(coupling)
    moments = accumulate(_homodyne_features(coupling, setting, lo_amplitude, physical), config, key)
    cov = moments.covariance / moments.n
    est = _estimates(moments.mean, cov, moments.n)
    return MonteCarloTable(*est, covariance=cov, setting=setting, ordering=Ordering.SYMMETRIC,
                           g_tau=coupling.g_tau, method="homodyne-physical" if physical else "homodyne")


def symmetric_intensity_correlation(config: SampleConfig, coupling, setting: MeasurementSetting,
                                    ports: str = "++", lo_amplitude: float = DEFAULT_LO_AMPLITUDE,
                                    physical: bool = False) -> EstimateWithError:
    """<[(X^s)^2 + (Y^s)^2][(X^i)^2 + (Y^i)^2]> for one signal/idler port pair."""
    index = {"++": 0, "--": 1, "+-": 2, "-+": 3}[ports]
    table = homodyne_correlations(coupling, setting, config, lo_amplitude, physical)
    return table.entries()[index]


def homodyne_chsh(coupling, config: SampleConfig, setting: ChshSetting = CANONICAL_CHSH,
                  lo_amplitude: float = DEFAULT_LO_AMPLITUDE, physical: bool = False) -> ChshResult:
    coupling = Coupling.coerce(coupling)
    tables = [homodyne_correlations(coupling, ms, config, lo_amplitude, physical, key=(k,))
              for k, (_, ms) in enumerate(setting.terms())]
    return combine(tables, Ordering.SYMMETRIC, coupling.g_tau, setting)
