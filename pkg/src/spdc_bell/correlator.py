"""Detector intensities and signal-idler intensity correlations.

Two engines are provided.  The analytic engine assembles every coincidence
from exact port-level second moments through the Gaussian pairing rule.
The Monte Carlo engine averages over Wigner trajectories, either directly
(per-trajectory intensity products) or by pairing empirical second moments,
which is also how normal-ordered estimates are obtained (vacuum subtraction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .analyzer import analyze, port_matrix
from .errors import NormalOrderDirectSampling
from .phase_space import (
    Coupling,
    MeasurementSetting,
    Ordering,
    SampleConfig,
    accumulate,
    sample_vacuum,
)
from .propagator import analytic_second_moments, propagate

# Coincidence order used throughout: C++, C--, C+-, C-+.
# Each entry is (signal port row, idler port row) in PortAmplitudes.as_array().
PORT_PAIRS = ((0, 2), (1, 3), (0, 3), (1, 2))
ENTRY_NAMES = ("c_pp", "c_mm", "c_pm", "c_mp")

RAW = "raw"
ISSERLIS = "isserlis"


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n_samples: int

    def within(self, target: float, n_sigma: float = 5.0) -> bool:
        return abs(self.value - target) <= n_sigma * self.std_error


@dataclass(frozen=True)
class CorrelationTable:
    c_pp: float
    c_mm: float
    c_pm: float
    c_mp: float
    setting: MeasurementSetting
    ordering: Ordering
    g_tau: float

    def values(self) -> np.ndarray:
        return np.array([self.c_pp, self.c_mm, self.c_pm, self.c_mp])


@dataclass(frozen=True)
class MonteCarloTable:
    """Monte Carlo coincidences with the joint covariance of the four estimates."""

    c_pp: EstimateWithError
    c_mm: EstimateWithError
    c_pm: EstimateWithError
    c_mp: EstimateWithError
    covariance: np.ndarray = field(repr=False)
    setting: MeasurementSetting
    ordering: Ordering
    g_tau: float
    method: str

    @property
    def n_samples(self) -> int:
        return self.c_pp.n_samples

    def entries(self) -> tuple[EstimateWithError, ...]:
        return (self.c_pp, self.c_mm, self.c_pm, self.c_mp)

    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries()])

    @property
    def table(self) -> CorrelationTable:
        return CorrelationTable(*self.values(), setting=self.setting,
                                ordering=self.ordering, g_tau=self.g_tau)


def isserlis_fourth_moment(pair_moments: Mapping[tuple[int, int], complex]) -> complex:
    """<a1 a2 a3 a4> for zero-mean jointly Gaussian variables.

    ``pair_moments`` maps index pairs (1-based, either orientation) to
    second moments; missing pairs count as zero.
    """
    def pm(i, j):
        if (i, j) in pair_moments:
            return pair_moments[(i, j)]
        return pair_moments.get((j, i), 0.0)

    return pm(1, 2) * pm(3, 4) + pm(1, 3) * pm(2, 4) + pm(1, 4) * pm(2, 3)


def _coincidence(n_s, n_i, anomalous, cross) -> float:
    # variables (a_s*, a_s, a_i*, a_i)
    moments = {
        (1, 2): n_s,
        (3, 4): n_i,
        (1, 3): np.conj(anomalous),
        (2, 4): anomalous,
        (1, 4): cross,
        (2, 3): np.conj(cross),
    }
    return float(np.real(isserlis_fourth_moment(moments)))


def analytic_intensity(coupling, ordering) -> float:
    return analytic_second_moments(coupling, ordering).n_mode


def analytic_correlations(coupling, ordering, setting: MeasurementSetting) -> CorrelationTable:
    """Exact coincidences from rotated second moments.

    The mode-level moment matrices are carried through the analyzer rotation,
    and each coincidence is the three-pairing sum over (a_s*, a_s, a_i*, a_i).
    """
    coupling = Coupling.coerce(coupling)
    ordering = Ordering.parse(ordering)
    mom = analytic_second_moments(coupling, ordering)
    r = port_matrix(setting)
    normal = r @ mom.normal_matrix() @ r.T
    anomalous = r @ mom.anomalous_matrix() @ r.T
    values = [
        _coincidence(normal[s, s], normal[i, i], anomalous[s, i], normal[s, i])
        for s, i in PORT_PAIRS
    ]
    return CorrelationTable(*values, setting=setting, ordering=ordering, g_tau=coupling.g_tau)


# ---------------------------------------------------------------- Monte Carlo


def wigner_ports(rng: np.random.Generator, m: int, coupling: Coupling,
                 setting: MeasurementSetting) -> np.ndarray:
    """(4, m) detector-port amplitudes of ``m`` fresh Wigner trajectories."""
    modes = propagate(sample_vacuum(Ordering.SYMMETRIC, rng, m), coupling)
    return analyze(modes, setting).as_array()


def raw_features(ports: np.ndarray) -> np.ndarray:
    inten = np.abs(ports) ** 2
    return np.stack([inten[s] * inten[i] for s, i in PORT_PAIRS], axis=1)


def pair_features(ports: np.ndarray) -> np.ndarray:
    """Per-trajectory second-moment samples, 20 columns.

    Columns 0-3: |a|^2 of s+, s-, i+, i-.  Then, per coincidence pair,
    Re/Im of a_s a_i and Re/Im of a_s* a_i.
    """
    cols = list(np.abs(ports) ** 2)
    for s, i in PORT_PAIRS:
        anomalous = ports[s] * ports[i]
        cross = np.conj(ports[s]) * ports[i]
        cols += [anomalous.real, anomalous.imag, cross.real, cross.imag]
    return np.stack(cols, axis=1)


def assemble_from_pairs(q: np.ndarray, vacuum: float) -> tuple[np.ndarray, np.ndarray]:
    """Coincidences and their Jacobian from mean pair features.

    ``vacuum`` is subtracted from each intensity before pairing: 0 keeps
    symmetric ordering, 1/2 converts Wigner moments to normal order.
    """
    values = np.empty(4)
    jac = np.zeros((4, q.size))
    for k, (s, i) in enumerate(PORT_PAIRS):
        n_s = q[s] - vacuum
        n_i = q[i] - vacuum
        base = 4 + 4 * k
        anomalous = q[base] + 1j * q[base + 1]
        cross = q[base + 2] + 1j * q[base + 3]
        values[k] = _coincidence(n_s, n_i, anomalous, cross)
        jac[k, s] += n_i
        jac[k, i] += n_s
        jac[k, base:base + 4] = 2 * q[base:base + 4]
    return values, jac


def _estimates(values, cov, n) -> list[EstimateWithError]:
    return [EstimateWithError(float(v), math.sqrt(max(c, 0.0)), n)
            for v, c in zip(values, np.diag(cov))]


def mc_correlations(coupling, setting: MeasurementSetting, config: SampleConfig,
                    ordering=Ordering.SYMMETRIC, method: str | None = None,
                    key: Sequence[int] = ()) -> MonteCarloTable:
    """Monte Carlo coincidences with standard errors.

    ``method='raw'`` averages per-trajectory products |a_s|^2 |a_i|^2 and is
    only meaningful for symmetric ordering.  ``method='isserlis'`` pairs
    empirical second moments; with normal ordering the half-quantum vacuum
    contribution is removed from each intensity first.  The default is raw
    for symmetric and isserlis for normal ordering.
    """
    coupling = Coupling.coerce(coupling)
    ordering = Ordering.parse(ordering)
    if method is None:
        method = RAW if ordering is Ordering.SYMMETRIC else ISSERLIS
    if method not in (RAW, ISSERLIS):
        raise ValueError(f"unknown method {method!r}")
    if method == RAW and ordering is Ordering.NORMAL:
        raise NormalOrderDirectSampling(
            "normal-ordered inputs have zero variance, so every trajectory is identically "
            "zero; use method='isserlis' (vacuum subtraction on Wigner samples)")

    extract = raw_features if method == RAW else pair_features
    moments = accumulate(lambda rng, m: extract(wigner_ports(rng, m, coupling, setting)),
                         config, key)
    n = moments.n
    if method == RAW:
        values = moments.mean
        cov = moments.covariance / n
    else:
        vacuum = 0.5 if ordering is Ordering.NORMAL else 0.0
        values, jac = assemble_from_pairs(moments.mean, vacuum)
        cov = jac @ moments.covariance @ jac.T / n
    est = _estimates(values, cov, n)
    return MonteCarloTable(*est, covariance=cov, setting=setting, ordering=ordering,
                           g_tau=coupling.g_tau, method=method)


def mc_intensities(coupling, setting: MeasurementSetting, config: SampleConfig,
                   key: Sequence[int] = ()) -> dict[str, EstimateWithError]:
    """Symmetric-order mean intensity at each of the four ports."""
    coupling = Coupling.coerce(coupling)
    moments = accumulate(lambda rng, m: (np.abs(wigner_ports(rng, m, coupling, setting)) ** 2).T,
                         config, key)
    est = _estimates(moments.mean, moments.covariance / moments.n, moments.n)
    return dict(zip(("s_plus", "s_minus", "i_plus", "i_minus"), est))


def isserlis_discrepancy(coupling, setting: MeasurementSetting, config: SampleConfig,
                         key: Sequence[int] = ()) -> list[EstimateWithError]:
    """Raw fourth moment minus the pairing of empirical second moments.

    Both are measured on the same Wigner trajectories; the standard error
    comes from the joint delta method, so each entry should be consistent
    with zero.
    """
    coupling = Coupling.coerce(coupling)

    def features(rng, m):
        ports = wigner_ports(rng, m, coupling, setting)
        return np.concatenate([raw_features(ports), pair_features(ports)], axis=1)

    moments = accumulate(features, config, key)
    q = moments.mean
    assembled, jac = assemble_from_pairs(q[4:], 0.0)
    full = np.hstack([np.eye(4), -jac])
    values = q[:4] - assembled
    cov = full @ moments.covariance @ full.T / moments.n
    return _estimates(values, cov, moments.n)
