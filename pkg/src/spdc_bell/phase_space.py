"""Shared domain types, the Gaussian vacuum sampler and the chunked MC engine.

Stochastic amplitudes represent the quantum state through a quasiprobability
distribution.  The only thing distinguishing the Glauber (normal ordering) and
Wigner (symmetric ordering) pictures here is the variance of the input
vacuum noise, ``<a a*> = epsilon / 2`` with epsilon 0 or 1.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import InsufficientSamples

# Fixed block length inside a chunk; part of the reproducibility contract.
BLOCK_SIZE = 1 << 16
MIN_SAMPLES = 100


class Ordering(enum.Enum):
    NORMAL = "normal"
    SYMMETRIC = "symmetric"

    @property
    def epsilon(self) -> float:
        return 0.0 if self is Ordering.NORMAL else 1.0

    @classmethod
    def parse(cls, value: "Ordering | str") -> "Ordering":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class Coupling:
    """Dimensionless parametric gain ``g * tau`` of each crystal."""

    g_tau: float

    def __post_init__(self):
        if not math.isfinite(self.g_tau) or self.g_tau < 0:
            raise ValueError(f"g_tau must be finite and >= 0, got {self.g_tau!r}")

    @classmethod
    def coerce(cls, value: "Coupling | float") -> "Coupling":
        return value if isinstance(value, cls) else cls(float(value))


@dataclass(frozen=True)
class ModeAmplitudes:
    """Signal/idler x H/V complex amplitudes.

    Fields may be Python complex scalars (one trajectory) or equally shaped
    numpy arrays (a batch of trajectories).
    """

    s_h: complex | np.ndarray
    s_v: complex | np.ndarray
    i_h: complex | np.ndarray
    i_v: complex | np.ndarray

    def as_array(self) -> np.ndarray:
        """Stack as ``(4, ...)`` in the order s_h, s_v, i_h, i_v."""
        return np.stack(np.broadcast_arrays(self.s_h, self.s_v, self.i_h, self.i_v)).astype(complex)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ModeAmplitudes":
        return cls(arr[0], arr[1], arr[2], arr[3])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_array())))


@dataclass(frozen=True)
class MeasurementSetting:
    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("analyzer angles must be finite")


@dataclass(frozen=True)
class ChshSetting:
    theta: float = 0.0
    theta_prime: float = math.pi / 4
    phi: float = math.pi / 8
    phi_prime: float = 3 * math.pi / 8

    def terms(self) -> list[tuple[float, MeasurementSetting]]:
        """(sign, setting) for S = M(t,p) + M(t',p) - M(t,p') + M(t',p')."""
        return [
            (1.0, MeasurementSetting(self.theta, self.phi)),
            (1.0, MeasurementSetting(self.theta_prime, self.phi)),
            (-1.0, MeasurementSetting(self.theta, self.phi_prime)),
            (1.0, MeasurementSetting(self.theta_prime, self.phi_prime)),
        ]


CANONICAL_CHSH = ChshSetting()


@dataclass(frozen=True)
class SampleConfig:
    n_samples: int
    seed: int = 0
    n_chunks: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.n_chunks < 1:
            raise ValueError("n_chunks must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def chunk_sizes(self) -> list[int]:
        base, extra = divmod(self.n_samples, self.n_chunks)
        return [base + (1 if c < extra else 0) for c in range(self.n_chunks)]

    def stream(self, chunk: int, key: Sequence[int] = ()) -> np.random.Generator:
        """Counter-based Philox stream for ``chunk`` under sub-stream ``key``.

        The stream depends only on (seed, key, chunk), never on which thread
        runs the chunk or in what order.
        """
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(key) + (chunk,))
        return np.random.Generator(np.random.Philox(ss))


def sample_vacuum(ordering: Ordering, rng: np.random.Generator, size=None) -> ModeAmplitudes:
    """Draw input vacuum amplitudes for the four modes.

    Real and imaginary parts are independent zero-mean Gaussians with variance
    epsilon/4, giving <a> = 0, <a a> = 0 and <a a*> = epsilon/2 per mode with
    no cross-mode correlation.  For normal ordering the exact zero vector is
    returned and the generator is left untouched.
    """
    ordering = Ordering.parse(ordering)
    shape = () if size is None else (size,)
    if ordering.epsilon == 0.0:
        zero = np.zeros(shape, dtype=complex)
        if size is None:
            return ModeAmplitudes(0j, 0j, 0j, 0j)
        return ModeAmplitudes(zero, zero.copy(), zero.copy(), zero.copy())
    sigma = math.sqrt(ordering.epsilon / 4.0)
    draws = rng.normal(0.0, sigma, size=(4, 2) + shape)
    amps = draws[:, 0] + 1j * draws[:, 1]
    if size is None:
        return ModeAmplitudes(*(complex(a) for a in amps))
    return ModeAmplitudes.from_array(amps)


@dataclass(frozen=True)
class FeatureMoments:
    """First and second empirical moments of a vector of per-trajectory features."""

    n: int
    total: np.ndarray
    outer: np.ndarray

    @property
    def mean(self) -> np.ndarray:
        return self.total / self.n

    @property
    def covariance(self) -> np.ndarray:
        m = self.mean
        return (self.outer - self.n * np.outer(m, m)) / (self.n - 1)

    def __add__(self, other: "FeatureMoments") -> "FeatureMoments":
        return FeatureMoments(self.n + other.n, self.total + other.total, self.outer + other.outer)


FeatureFn = Callable[[np.random.Generator, int], np.ndarray]


def _run_chunk(features: FeatureFn, config: SampleConfig, chunk: int, size: int,
               key: Sequence[int]) -> FeatureMoments:
    rng = config.stream(chunk, key)
    total = None
    outer = None
    done = 0
    while done < size:
        m = min(BLOCK_SIZE, size - done)
        f = np.asarray(features(rng, m), dtype=float)
        if total is None:
            total = f.sum(axis=0)
            outer = f.T @ f
        else:
            total = total + f.sum(axis=0)
            outer = outer + f.T @ f
        done += m
    return FeatureMoments(size, total, outer)


def accumulate(features: FeatureFn, config: SampleConfig, key: Sequence[int] = ()) -> FeatureMoments:
    """Run ``features(rng, m) -> (m, k)`` over all chunks and reduce.

    Chunks may execute on a thread pool; partial sums are always combined in
    chunk-index order so the result is bit-identical for a given
    (seed, n_chunks) whatever the worker count.
    """
    if config.n_samples < MIN_SAMPLES:
        raise InsufficientSamples(
            f"need at least {MIN_SAMPLES} samples for a standard error, got {config.n_samples}")
    sizes = config.chunk_sizes()
    jobs = [(c, s) for c, s in enumerate(sizes) if s > 0]
    if config.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(lambda job: _run_chunk(features, config, job[0], job[1], key), jobs))
    else:
        parts = [_run_chunk(features, config, c, s, key) for c, s in jobs]
    result = parts[0]
    for part in parts[1:]:
        result = result + part
    return result
