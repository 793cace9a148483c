"""Normalized polarization correlation M and the CHSH parameter S."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import bisect

from .correlator import (
    CorrelationTable,
    EstimateWithError,
    MonteCarloTable,
    analytic_correlations,
    mc_correlations,
)
from .errors import DegenerateDenominator, NoCrossing, SpdcBellError
from .phase_space import CANONICAL_CHSH, ChshSetting, Coupling, Ordering, SampleConfig

CLASSICAL_BOUND = 2.0
TSIRELSON = 2 * math.sqrt(2)

_NUM = np.array([1.0, 1.0, -1.0, -1.0])
_DEN = np.ones(4)


@dataclass(frozen=True)
class ChshResult:
    s_value: float
    ordering: Ordering
    g_tau: float
    setting: ChshSetting
    per_setting_m: tuple[float, float, float, float]
    s_error: float | None = None
    per_setting_m_error: tuple[float, float, float, float] | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def violates(self) -> bool:
        return self.ok and abs(self.s_value) > CLASSICAL_BOUND


def _ratio(c: np.ndarray) -> float:
    den = float(_DEN @ c)
    if den == 0.0:
        raise DegenerateDenominator("all four coincidences are zero; M is 0/0 here")
    return float(_NUM @ c) / den


def m_value(table: CorrelationTable | MonteCarloTable) -> float:
    """(C++ + C-- - C+- - C-+) / (C++ + C-- + C+- + C-+)."""
    return _ratio(table.values())


def m_estimate(table: MonteCarloTable) -> EstimateWithError:
    """M with a first-order delta-method standard error."""
    c = table.values()
    m = _ratio(c)
    den = float(_DEN @ c)
    grad = (_NUM - m * _DEN) / den
    var = float(grad @ table.covariance @ grad)
    return EstimateWithError(m, math.sqrt(max(var, 0.0)), table.n_samples)


def combine(tables: Sequence, ordering, g_tau: float,
            setting: ChshSetting = CANONICAL_CHSH) -> ChshResult:
    """Build S from the four tables ordered as ``setting.terms()``.

    Monte Carlo tables must come from independent sample streams; their M
    errors are summed in quadrature.
    """
    signs = [sign for sign, _ in setting.terms()]
    if all(isinstance(t, MonteCarloTable) for t in tables):
        ests = [m_estimate(t) for t in tables]
        ms = tuple(e.value for e in ests)
        m_err = tuple(e.std_error for e in ests)
        s_err = math.sqrt(sum(e ** 2 for e in m_err))
    else:
        ms = tuple(m_value(t) for t in tables)
        m_err = None
        s_err = None
    s = sum(sign * m for sign, m in zip(signs, ms))
    return ChshResult(s, Ordering.parse(ordering), g_tau, setting, ms, s_err, m_err)


def chsh_s(coupling, ordering, setting: ChshSetting = CANONICAL_CHSH,
           engine: str | SampleConfig = "analytic") -> ChshResult:
    """CHSH parameter with the analytic engine or Monte Carlo.

    Pass a :class:`SampleConfig` as ``engine`` for Monte Carlo; each of the
    four analyzer settings then draws from its own sub-stream.
    Raises DegenerateDenominator at g_tau = 0 with normal ordering.
    """
    coupling = Coupling.coerce(coupling)
    ordering = Ordering.parse(ordering)
    terms = setting.terms()
    if isinstance(engine, SampleConfig):
        tables = [mc_correlations(coupling, ms, engine, ordering, key=(k,))
                  for k, (_, ms) in enumerate(terms)]
    elif engine == "analytic":
        tables = [analytic_correlations(coupling, ordering, ms) for _, ms in terms]
    else:
        raise ValueError(f"unknown engine {engine!r}")
    return combine(tables, ordering, coupling.g_tau, setting)


def closed_form_s(g_tau: float, ordering) -> float:
    """S at the canonical setting from the closed-form prefactors."""
    ordering = Ordering.parse(ordering)
    s2 = math.sinh(2 * g_tau) ** 2
    if ordering is Ordering.NORMAL:
        den = s2 + 8 * math.sinh(g_tau) ** 4
    else:
        den = s2 + 2 * math.cosh(2 * g_tau) ** 2
    if den == 0.0:
        raise DegenerateDenominator("normal-ordered S is 0/0 at g_tau = 0")
    return TSIRELSON * s2 / den


def sweep(g_tau_grid: Iterable[float], ordering, setting: ChshSetting = CANONICAL_CHSH,
          engine: str | SampleConfig = "analytic") -> list[ChshResult]:
    """S over a grid of couplings; failing points are flagged, never raised."""
    ordering = Ordering.parse(ordering)
    out = []
    for g in g_tau_grid:
        try:
            out.append(chsh_s(g, ordering, setting, engine))
        except SpdcBellError as exc:
            nan4 = (math.nan,) * 4
            out.append(ChshResult(math.nan, ordering, float(g), setting, nan4,
                                  error=f"{type(exc).__name__}: {exc}"))
    return out


def violation_threshold(ordering=Ordering.NORMAL, tolerance: float = 1e-6) -> float:
    """Coupling at which the canonical-setting S crosses the classical bound 2."""
    ordering = Ordering.parse(ordering)
    if ordering is not Ordering.NORMAL:
        raise NoCrossing("symmetric-order S never exceeds 2*sqrt(2)/3 < 2")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")

    def f(g):
        return chsh_s(g, ordering).s_value - CLASSICAL_BOUND

    # S_N decreases from 2*sqrt(2) toward 2*sqrt(2)/3, so one root lies in the bracket.
    return bisect(f, 1e-6, 5.0, xtol=tolerance, rtol=4 * np.finfo(float).eps)
